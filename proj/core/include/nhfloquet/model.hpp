#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nhfloquet/types.hpp"

namespace nhf {

enum class Units { Pi4, Radians };

/// Complex couplings of U_F = exp(i J sum X_j X_{j+1}) exp(i h sum Z_j).
///
/// Stored in raw radians. J = alpha_J + i beta_J, h = alpha_h + i beta_h.
struct ModelParams {
  double alpha_J = 0.0;
  double beta_J = 0.0;
  double alpha_h = 0.0;
  double beta_h = 0.0;

  // Derived flags, filled by make_params.
  bool equal_alpha = false;  // alpha_J == alpha_h, the plane of the phase diagram
  bool dual_line = false;    // alpha_J == alpha_h == pi/4 mod pi/2
  bool self_dual = false;    // J == h == pi/4 (mod pi/2), real
  bool identity = false;     // all couplings vanish

  cplx J() const { return {alpha_J, beta_J}; }
  cplx h() const { return {alpha_h, beta_h}; }
  bool hermitian() const { return beta_J == 0.0 && beta_h == 0.0; }
};

/// Canonicalizes inputs to raw radians and fills the derived flags.
/// Throws ValidationError on non-finite input.
ModelParams make_params(double alpha_J, double beta_J, double alpha_h, double beta_h,
                        Units units = Units::Pi4);

/// Unit conversion for a single coupling (used for K as well).
double to_radians(double value, Units units);
double from_radians(double value, Units units);

enum class Boundary {
  PeriodicEvenParity,  // antiperiodic fermions
  PeriodicOddParity,   // periodic fermions
  Open,
};

enum class Parity { Even, Odd };

struct LatticeSpec {
  int L = 2;
  Boundary bc = Boundary::Open;

  bool periodic() const { return bc != Boundary::Open; }
  std::optional<Parity> parity_sector() const;
  void validate() const;
};

/// Contiguous block of sites, 1-based. Wraps around for periodic lattices.
struct SubsystemSpec {
  int start = 1;
  int length = 1;

  /// 0-based site indices, validated against the lattice.
  std::vector<int> sites(const LatticeSpec& lat) const;
};

/// Four contiguous segments covering [1, L], laid out A, B, D, C along the chain.
/// lengths holds {A, B, C, D}.
struct TeePartition {
  std::array<int, 4> lengths{};

  static TeePartition quarters(int L);
  void validate(int L) const;
};

enum class InitialState {
  NeelFermion,    // odd sites occupied (Z = -1), even sites empty
  AllUp,          // Z = +1 everywhere, the fermion vacuum
  AllDown,        // Z = -1 everywhere
  AntiferroSpins, // alternating X polarization, +x on site 1
  CustomProduct,  // explicit +-1 polarizations in the chosen basis
  RandomProduct,  // seeded random +-1 polarizations in the chosen basis
};

enum class Basis { Z, X };

struct QuenchConfig {
  InitialState initial_state = InitialState::NeelFermion;
  std::vector<int> custom;       // +-1 per site for CustomProduct
  Basis basis = Basis::Z;        // basis for CustomProduct / RandomProduct
  std::uint64_t seed = 12345;    // RandomProduct
  int n_periods = 100;
  double K = 0.0;                // raw radians, longitudinal field for the spin simulator

  /// Explicit per-site polarizations (+1 = up along the basis axis).
  std::vector<int> polarizations(int L) const;
  /// Basis the polarizations refer to.
  Basis polarization_basis() const;
  void validate(const LatticeSpec& lat) const;
};

enum class PhaseLabel {
  Trivial,
  ZeroMode,
  PiMode,
  ZeroPi,
  CriticalVolume,
  CriticalLog,
  Ambiguous,
};

std::string to_string(PhaseLabel label);
std::string to_string(Boundary bc);
std::string to_string(InitialState s);

Boundary parse_boundary(const std::string& text);
Units parse_units(const std::string& text);
InitialState parse_initial_state(const std::string& text);

/// Phase of the alpha_J == alpha_h plane from the inequalities between
/// |beta_J|, |beta_h| and alpha versus pi/4. Throws UnsupportedError off the plane.
PhaseLabel phase_label_from_params(const ModelParams& p);

/// Folds alpha into [0, pi/2] using the period pi and the reflection alpha -> -alpha.
double fold_alpha(double alpha);

/// Flat key = value configuration. Lines starting with '#' are comments.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int_or(const std::string& key, int fallback) const;
  std::vector<double> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Everything a single run needs, resolved from a KeyValueConfig.
struct RunConfig {
  ModelParams params;
  LatticeSpec lattice;
  QuenchConfig quench;
  Units units = Units::Pi4;
};

RunConfig resolve_run_config(const KeyValueConfig& cfg);

}  // namespace nhf
