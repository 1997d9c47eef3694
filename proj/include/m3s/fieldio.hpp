#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "m3s/transform.hpp"

namespace m3s {

/// Anything that can live in an M3SF file: a lattice field, a radial-form
/// field (stored as diag(g_0..g_2m) per radius), or a spectrum (stored as
/// diag(F(F)(Phi_{s,-m})..F(F)(Phi_{s,m})) per s node).
using StoredField = std::variant<GridField, RadialField, SphericalCoefficients>;

enum class FieldForm { Grid, Radial, Spectrum };

std::string form_name(FieldForm f);
FieldForm form_of(const StoredField& f);
int stored_m(const StoredField& f);

// Failure classes of read_field; all derive from FormatError.
class FormatError : public Error {
 public:
  using Error::Error;
};
class HeaderError : public FormatError {
 public:
  using FormatError::FormatError;
};
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};
class PayloadLengthError : public FormatError {
 public:
  using FormatError::FormatError;
};
class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};
class IoError : public Error {
 public:
  using Error::Error;
};

struct FieldHeader {
  std::string magic = "M3SF";
  int version = 1;
  int m = 0;
  FieldForm form = FieldForm::Grid;
  nlohmann::json geometry;
  std::string endianness = "little";
  std::uint64_t checksum = 0;
};

struct LoadedField {
  StoredField field;
  FieldHeader header;
  std::vector<cplx> payload;          // exactly as stored
  std::optional<double> equivariance;  // grid fields: grid_equivariance_defect
  std::vector<std::string> warnings;
};

inline constexpr int kFormatVersion = 1;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const unsigned char* data, std::size_t n);

/// Serialise to the in-memory file image (header line + payload).
std::string encode_field(const StoredField& f);
LoadedField decode_field(const std::string& bytes, double equivariance_tol = 1e-6);

/// Atomic: writes `path`.tmp-<pid> and renames it into place.
void write_field(const StoredField& f, const std::string& path);
LoadedField read_field(const std::string& path, double equivariance_tol = 1e-6);

/// Default radii at which a radial field is written when it carries none.
std::vector<double> default_r_grid(const RadialField& f);

struct SynthParams {
  double sigma = 1.0;       // gaussian / packet envelope width
  std::optional<int> k;     // gaussian: put the envelope on g_k (default 0)
  double s0 = 2.0;          // bump centre / packet frequency
  double width = 0.5;       // bump width in s
  std::optional<int> j;     // bump: only this j (default all); packet: Phi_{s0,j}
  int nr = 256;             // bump: s nodes used to build the field
};

/// kind: "gaussian", "bump" or "plane-wave-packet". Throws DomainError for
/// unknown kinds or invalid parameters.
RadialField synthesize(const std::string& kind, int m, const SynthParams& p = {});

/// Spectral profile of the bump field: exp(-(s - s0)^2 / (2 width^2)).
double bump_profile(const SynthParams& p, double s);

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Config {
  int nr = 128;
  int per_panel = 16;
  double smax = 0.0;              // 0 = estimate from the field
  int sphere_degree = 0;          // 0 = band-limit heuristic
  double quad_tol = 1e-8;         // method 2 doubling check
  double truncation_tol = 1e-6;
  double equivariance_tol = 1e-6;
  double decomposition_tol = 1e-3;
  int threads = 0;                // 0 = runtime default

  void validate() const;
  TransformOptions transform_options() const;
};

/// Flat key=value lines; '#' starts a comment. Unknown keys are errors.
Config parse_config(const std::string& text, Config base = {});
Config load_config(const std::string& path, Config base = {});
/// Defaults, overridden by the file named in M3S_CONFIG if set.
Config default_config();

}  // namespace m3s
