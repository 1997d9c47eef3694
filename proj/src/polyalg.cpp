#include "m3s/polyalg.hpp"

#include <cmath>
#include <string>

namespace m3s {

using exact::GaussianRational;
using exact::Rational;
using exact::Scalar;

MatPoly MatPoly::constant(const exact::Matrix& c) {
  MatPoly p(c.dim());
  p.add_term({0, 0, 0}, c);
  return p;
}

MatPoly MatPoly::r_squared(int dim) {
  MatPoly p(dim);
  const auto id = exact::Matrix::identity(dim);
  p.add_term({2, 0, 0}, id);
  p.add_term({0, 2, 0}, id);
  p.add_term({0, 0, 2}, id);
  return p;
}

int MatPoly::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

bool MatPoly::is_homogeneous(int deg) const {
  for (const auto& [e, c] : terms_)
    if (e[0] + e[1] + e[2] != deg) return false;
  return true;
}

void MatPoly::add_term(const Exponent& e, const exact::Matrix& c) {
  if (c.is_zero()) return;
  if (dim_ == 0) dim_ = c.dim();
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

MatPoly& MatPoly::operator+=(const MatPoly& b) {
  if (dim_ == 0) dim_ = b.dim_;
  for (const auto& [e, c] : b.terms_) add_term(e, c);
  return *this;
}

MatPoly& MatPoly::operator-=(const MatPoly& b) {
  if (dim_ == 0) dim_ = b.dim_;
  for (const auto& [e, c] : b.terms_) add_term(e, c * Scalar(-1L));
  return *this;
}

MatPoly operator*(const MatPoly& a, const MatPoly& b) {
  MatPoly r(a.dim_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_)
      r.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
  return r;
}

MatPoly operator*(const MatPoly& a, const Scalar& c) {
  MatPoly r(a.dim_);
  for (const auto& [e, m] : a.terms_) r.add_term(e, m * c);
  return r;
}

MatPoly operator*(const exact::Matrix& c, const MatPoly& p) {
  MatPoly r(p.dim_);
  for (const auto& [e, m] : p.terms_) r.add_term(e, c * m);
  return r;
}

MatPoly operator*(const MatPoly& p, const exact::Matrix& c) {
  MatPoly r(p.dim_);
  for (const auto& [e, m] : p.terms_) r.add_term(e, m * c);
  return r;
}

MatPoly MatPoly::derivative(int axis) const {
  MatPoly r(dim_);
  for (const auto& [e, c] : terms_) {
    const int k = e[static_cast<size_t>(axis)];
    if (k == 0) continue;
    Exponent f = e;
    --f[static_cast<size_t>(axis)];
    r.add_term(f, c * Scalar(static_cast<long>(k)));
  }
  return r;
}

MatPoly MatPoly::shifted(const Exponent& s) const {
  MatPoly r(dim_);
  for (const auto& [e, c] : terms_) r.add_term({e[0] + s[0], e[1] + s[1], e[2] + s[2]}, c);
  return r;
}

namespace {

// Division by x^2 + y^2 + z^2 with x^2 as leading monomial (lex order).
// The remainder collects the terms of x-degree < 2.
void divmod_r_squared(const MatPoly& p, MatPoly& quot, MatPoly& rem) {
  MatPoly work = p;
  quot = MatPoly(p.dim());
  rem = MatPoly(p.dim());
  const MatPoly r2 = MatPoly::r_squared(p.dim());
  while (!work.is_zero()) {
    const auto it = std::prev(work.terms().end());
    const Exponent e = it->first;
    const exact::Matrix c = it->second;
    MatPoly lead(p.dim());
    lead.add_term(e, c);
    if (e[0] >= 2) {
      MatPoly q(p.dim());
      q.add_term({e[0] - 2, e[1], e[2]}, c);
      quot += q;
      work -= q * r2;
    } else {
      rem += lead;
      work -= lead;
    }
  }
}

}  // namespace

MatPoly MatPoly::divide_r_squared() const {
  MatPoly q, r;
  divmod_r_squared(*this, q, r);
  if (!r.is_zero()) throw DomainError("MatPoly: not divisible by |x|^2");
  return q;
}

Mat MatPoly::eval(const Vec3& x) const {
  Mat out = Mat::Zero(dim_, dim_);
  for (const auto& [e, c] : terms_) {
    const double mono = std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
    out += mono * c.to_complex();
  }
  return out;
}

Mat eval(const MatPoly& p, const Vec3& x) { return p.eval(x); }

ExactIrrep exact_generators(int m, int max_m) {
  if (m < 0) throw DomainError("exact_generators: m must be non-negative");
  if (m > max_m)
    throw CapabilityError("exact_generators: m = " + std::to_string(m) +
                          " exceeds the exact-mode limit " + std::to_string(max_m));
  ExactIrrep rep;
  rep.m = m;
  rep.dim = type_dim(m);
  const int d = rep.dim;
  for (auto& g : rep.generators) g = exact::Matrix(d);
  const GaussianRational half_i(Rational(0), Rational(1, 2));
  const GaussianRational half(Rational(1, 2));
  for (int a = 0; a < d; ++a) {
    const long mu = a - m;
    rep.generators[0](a, a) = Scalar(GaussianRational(Rational(0), Rational(mu)));
    if (a + 1 < d) {
      const auto n = static_cast<std::uint64_t>(m * (m + 1) - mu * (mu + 1));
      // A_2 = i J_x, A_3 = i J_y with J_x, J_y the ladder combinations.
      const Scalar ix = Scalar::sqrt_times(half_i, n);
      rep.generators[1](a + 1, a) = ix;
      rep.generators[1](a, a + 1) = ix;
      const Scalar y = Scalar::sqrt_times(half, n);
      rep.generators[2](a + 1, a) = y;
      rep.generators[2](a, a + 1) = -y;
    }
  }
  return rep;
}

MatPoly laplacian(const MatPoly& p) {
  MatPoly r(p.dim());
  for (int i = 0; i < 3; ++i) r += p.derivative(i).derivative(i);
  return r;
}

MatPoly apply_dtau_op(const ExactIrrep& rep, const MatPoly& p) {
  MatPoly r(p.dim());
  for (int i = 0; i < 3; ++i) r += rep.generators[static_cast<size_t>(i)] * p.derivative(i);
  return r;
}

std::vector<double> CoeffTable::as_double() const {
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& v : a) out.push_back(v.get_d());
  return out;
}

CoeffTable coeff_table(int m) {
  if (m < 0) throw DomainError("coeff_table: m must be non-negative");
  CoeffTable t;
  t.m = m;
  t.c = Rational(-m * (m + 1));
  for (int j = 1; j <= 2 * m; ++j) {
    const int k = j - 1;
    Rational v = Rational((k + 1) * (k + 1), 2 * k + 1) * (t.c + Rational(k * k + 2 * k, 4));
    v.canonicalize();
    t.a.push_back(v);
  }
  return t;
}

namespace {

MatPoly linear_q1(const ExactIrrep& rep) {
  MatPoly q1(rep.dim);
  q1.add_term({1, 0, 0}, rep.generators[0]);
  q1.add_term({0, 1, 0}, rep.generators[1]);
  q1.add_term({0, 0, 1}, rep.generators[2]);
  return q1;
}

}  // namespace

std::vector<MatPoly> build_Q(const ExactIrrep& rep) {
  std::vector<MatPoly> q;
  q.push_back(MatPoly::identity(rep.dim));
  if (rep.m == 0) return q;
  const MatPoly q1 = linear_q1(rep);
  const MatPoly r2 = MatPoly::r_squared(rep.dim);
  q.push_back(q1);
  for (int j = 1; j < 2 * rep.m; ++j) {
    const MatPoly& qj = q.back();
    const Scalar w = Scalar::rational(Rational(1, 2 * j + 1));
    q.push_back(q1 * qj - (r2 * apply_dtau_op(rep, qj)) * w);
  }
  return q;
}

std::vector<MatPoly> build_Q(int m, int max_m) { return build_Q(exact_generators(m, max_m)); }

MatPoly equivariance_defect(const ExactIrrep& rep, const MatPoly& q, int axis) {
  const auto& a = rep.generators[static_cast<size_t>(axis)];
  MatPoly defect = a * q - q * a;
  // grad Q . (Y x) with (Y x)_k = sum_l Y_kl x_l
  const Eigen::Matrix3d y = [&] {
    Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
    switch (axis) {
      case 0: b(1, 2) = 1; b(2, 1) = -1; break;
      case 1: b(0, 2) = -1; b(2, 0) = 1; break;
      default: b(0, 1) = 1; b(1, 0) = -1; break;
    }
    return b;
  }();
  for (int k = 0; k < 3; ++k) {
    const MatPoly dk = q.derivative(k);
    for (int l = 0; l < 3; ++l) {
      const double ykl = y(k, l);
      if (ykl == 0.0) continue;
      Exponent e{0, 0, 0};
      e[static_cast<size_t>(l)] = 1;
      defect -= dk.shifted(e) * Scalar(static_cast<long>(ykl));
    }
  }
  return defect;
}

MatPoly top_closure_defect(const ExactIrrep& rep, const std::vector<MatPoly>& q) {
  const MatPoly& top = q.back();
  const int j = static_cast<int>(q.size()) - 1;
  if (j == 0) return apply_dtau_op(rep, top);  // m = 0: Q_1 = 0 trivially
  const MatPoly r2 = MatPoly::r_squared(rep.dim);
  return q[1] * top - (r2 * apply_dtau_op(rep, top)) * Scalar::rational(Rational(1, 2 * j + 1));
}

std::vector<Q1Expansion> q1_expansion_from_recursion(const CoeffTable& table) {
  std::vector<Q1Expansion> out;
  out.push_back({0, {Rational(1)}});
  if (table.m == 0) return out;
  out.push_back({1, {Rational(1)}});
  for (int j = 1; j < 2 * table.m; ++j) {
    const auto& cur = out[static_cast<size_t>(j)].b;
    const auto& prev = out[static_cast<size_t>(j - 1)].b;
    Q1Expansion next{j + 1, std::vector<Rational>(static_cast<size_t>((j + 1) / 2 + 1), Rational(0))};
    Rational w = table(j) / Rational(2 * j + 1);
    for (size_t i = 0; i < next.b.size(); ++i) {
      Rational v = i < cur.size() ? cur[i] : Rational(0);
      if (i >= 1 && i - 1 < prev.size()) v -= w * prev[i - 1];
      v.canonicalize();
      next.b[i] = v;
    }
    out.push_back(std::move(next));
  }
  return out;
}

Q1Expansion recover_q1_expansion(const std::vector<MatPoly>& q, int j) {
  const int dim = q.at(0).dim();
  Q1Expansion out{j, {Rational(1)}};
  std::vector<MatPoly> pow{MatPoly::identity(dim)};
  for (int k = 1; k <= j; ++k) pow.push_back(pow.back() * q.at(1));
  MatPoly rest = q.at(static_cast<size_t>(j)) - pow[static_cast<size_t>(j)];
  for (int i = 1; 2 * i <= j; ++i) {
    MatPoly quot, rem;
    divmod_r_squared(rest, quot, rem);
    if (!rem.is_zero()) throw ConsistencyError("Q_j is not a C[r^2]-combination of powers of Q_1");
    rest = quot;
    const MatPoly& p = pow[static_cast<size_t>(j - 2 * i)];
    MatPoly prem_q, prem;
    divmod_r_squared(p, prem_q, prem);
    divmod_r_squared(rest, quot, rem);
    // rem(rest) = b * rem(Q_1^(j-2i)); read b off one entry and verify all.
    Scalar b;
    bool found = false;
    for (const auto& [e, c] : prem.terms()) {
      for (int a = 0; a < dim && !found; ++a)
        for (int bb = 0; bb < dim && !found; ++bb) {
          if (c(a, bb).terms().size() != 1) continue;
          const auto it = rem.terms().find(e);
          b = it == rem.terms().end() ? Scalar() : it->second(a, bb) * c(a, bb).inverse_monomial();
          found = true;
        }
      if (found) break;
    }
    if (!found) throw ConsistencyError("recover_q1_expansion: no usable pivot entry");
    const GaussianRational* g = b.as_gaussian();
    if (g == nullptr || sgn(g->im) != 0)
      throw ConsistencyError("recover_q1_expansion: non-rational coefficient");
    if (!(rem == prem * b)) throw ConsistencyError("recover_q1_expansion: inconsistent coefficient");
    out.b.push_back(g->re);
    rest -= p * b;
  }
  if (!rest.is_zero()) throw ConsistencyError("recover_q1_expansion: nonzero remainder");
  return out;
}

namespace {

nlohmann::json scalar_to_json(const Scalar& s) {
  auto arr = nlohmann::json::array();
  for (const auto& t : s.terms())
    arr.push_back({t.coeff.re.get_str(), t.coeff.im.get_str(), t.radicand});
  return arr;
}

}  // namespace

nlohmann::json matpoly_to_json(const MatPoly& p) {
  auto out = nlohmann::json::array();
  for (const auto& [e, c] : p.terms()) {
    nlohmann::json term;
    term["exponents"] = {e[0], e[1], e[2]};
    auto mat = nlohmann::json::array();
    for (int a = 0; a < c.dim(); ++a)
      for (int b = 0; b < c.dim(); ++b) mat.push_back(scalar_to_json(c(a, b)));
    term["matrix"] = mat;
    out.push_back(term);
  }
  return out;
}

}  // namespace m3s
