#include "m3s/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace m3s::exact {

GaussianRational GaussianRational::inverse() const {
  const Rational n2 = re * re + im * im;
  if (sgn(n2) == 0) throw DomainError("GaussianRational: division by zero");
  return {re / n2, -im / n2};
}

std::pair<std::uint64_t, std::uint64_t> squarefree_split(std::uint64_t n) {
  if (n == 0) return {0, 0};
  std::uint64_t k = 1, d = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) k *= p;
    if (e % 2) d *= p;
  }
  d *= n;
  return {k, d};
}

Scalar::Scalar(const GaussianRational& q, std::uint64_t radicand) {
  if (!q.is_zero()) terms_.push_back({radicand, q});
}

Scalar Scalar::sqrt_times(const GaussianRational& q, std::uint64_t n) {
  const auto [k, d] = squarefree_split(n);
  if (d == 0) return {};
  return Scalar(q * GaussianRational(Rational(static_cast<long>(k))), d);
}

const GaussianRational* Scalar::as_gaussian() const {
  static const GaussianRational zero;
  if (terms_.empty()) return &zero;
  if (terms_.size() == 1 && terms_[0].radicand == 1) return &terms_[0].coeff;
  return nullptr;
}

cplx Scalar::to_complex() const {
  cplx s = 0.0;
  for (const auto& t : terms_) s += t.coeff.to_complex() * std::sqrt(static_cast<double>(t.radicand));
  return s;
}

std::string Scalar::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << t.coeff.re.get_str() << (sgn(t.coeff.im) < 0 ? " - " : " + ")
       << Rational(abs(t.coeff.im)).get_str() << "i)";
    if (t.radicand != 1) os << "*sqrt(" << t.radicand << ")";
  }
  return os.str();
}

void Scalar::add_term(std::uint64_t radicand, const GaussianRational& c) {
  if (c.is_zero()) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), radicand,
                             [](const Term& t, std::uint64_t r) { return t.radicand < r; });
  if (it != terms_.end() && it->radicand == radicand) {
    it->coeff = it->coeff + c;
    if (it->coeff.is_zero()) terms_.erase(it);
  } else {
    terms_.insert(it, Term{radicand, c});
  }
}

Scalar& Scalar::operator+=(const Scalar& b) {
  for (const auto& t : b.terms_) add_term(t.radicand, t.coeff);
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& b) {
  for (const auto& t : b.terms_) add_term(t.radicand, -t.coeff);
  return *this;
}

Scalar operator-(const Scalar& a) {
  Scalar r = a;
  for (auto& t : r.terms_) t.coeff = -t.coeff;
  return r;
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  Scalar r;
  for (const auto& ta : a.terms_)
    for (const auto& tb : b.terms_) {
      // sqrt(d1) sqrt(d2) = g sqrt(d1 d2 / g^2) with g = gcd(d1, d2); both
      // radicands squarefree, so the remaining radicand is squarefree too.
      const std::uint64_t g = std::gcd(ta.radicand, tb.radicand);
      const std::uint64_t rad = (ta.radicand / g) * (tb.radicand / g);
      GaussianRational c = ta.coeff * tb.coeff;
      if (g != 1) c = c * GaussianRational(Rational(static_cast<long>(g)));
      r.add_term(rad, c);
    }
  return r;
}

Scalar operator*(const Scalar& a, const GaussianRational& q) {
  if (q.is_zero()) return {};
  Scalar r = a;
  for (auto& t : r.terms_) t.coeff = t.coeff * q;
  return r;
}

bool operator==(const Scalar& a, const Scalar& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (size_t i = 0; i < a.terms_.size(); ++i)
    if (a.terms_[i].radicand != b.terms_[i].radicand || !(a.terms_[i].coeff == b.terms_[i].coeff))
      return false;
  return true;
}

Scalar Scalar::inverse_monomial() const {
  if (terms_.size() != 1) throw DomainError("Scalar::inverse_monomial: not a single term");
  const auto& t = terms_[0];
  // 1 / (q sqrt d) = sqrt(d) / (q d)
  return Scalar(t.coeff.inverse() * GaussianRational(Rational(1, static_cast<long>(t.radicand))),
                t.radicand);
}

Matrix Matrix::identity(int dim) {
  Matrix m(dim);
  for (int a = 0; a < dim; ++a) m(a, a) = Scalar(1L);
  return m;
}

bool Matrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Scalar& s) { return s.is_zero(); });
}

Mat Matrix::to_complex() const {
  Mat r(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) r(a, b) = (*this)(a, b).to_complex();
  return r;
}

Matrix& Matrix::operator+=(const Matrix& b) {
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += b.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& b) {
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= b.data_[i];
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  const int d = a.dim_;
  Matrix r(d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const Scalar& aik = a(i, k);
      if (aik.is_zero()) continue;
      for (int j = 0; j < d; ++j) {
        const Scalar& bkj = b(k, j);
        if (bkj.is_zero()) continue;
        r(i, j) += aik * bkj;
      }
    }
  return r;
}

Matrix operator*(const Matrix& a, const Scalar& c) {
  Matrix r(a.dim_);
  if (c.is_zero()) return r;
  for (size_t i = 0; i < a.data_.size(); ++i)
    if (!a.data_[i].is_zero()) r.data_[i] = a.data_[i] * c;
  return r;
}

bool operator==(const Matrix& a, const Matrix& b) {
  return a.dim_ == b.dim_ && a.data_ == b.data_;
}

}  // namespace m3s::exact
