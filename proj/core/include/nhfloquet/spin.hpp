#pragma once

#include <optional>
#include <vector>

#include "nhfloquet/model.hpp"
#include "nhfloquet/types.hpp"

namespace nhf {

inline constexpr int kMaxSpinSites = 14;

/// Dense spin-chain state. Basis index bit j (site j + 1) set means Z_j = -1.
struct SpinState {
  CVector amplitudes;
  int L = 0;
  bool normalized = true;
};

/// Product state from +-1 polarizations along the Z or X axis.
SpinState spin_product_state(const std::vector<int>& polarizations, Basis basis);
SpinState spin_initial_state(const QuenchConfig& q, const LatticeSpec& lat);

/// (|+...+> + |-...->)/sqrt(2) in the given basis.
SpinState ghz_state(int L, Basis basis = Basis::X);

/// Applies exp(i h sum Z), then exp(i J sum X_j X_{j+1}), then exp(i K sum X) if K != 0,
/// then renormalizes. Returns log of the norm before renormalization.
/// Periodic lattices include the X_L X_1 bond. Throws CapacityError for L > kMaxSpinSites.
double apply_floquet_period(SpinState& psi, const ModelParams& p, const LatticeSpec& lat, double K = 0.0);

/// prod_j Z_j, the Z2 symmetry of U_F at K = 0 (flips every X polarization).
SpinState flip_all(const SpinState& psi);

struct ObservableEntry {
  std::vector<double> Sx;     // <sigma_x^i>/2 per site
  double SxSx_edge = 0.0;     // <S_x^1 S_x^L>
  double ghz_overlap = 0.0;   // |<GHZ_x|psi>|^2
};

/// <Z_j> and <X_j X_{j+1}> (1-based j; j = L uses the wrap bond).
std::vector<double> z_expectations(const SpinState& psi);
std::vector<double> xx_expectations(const SpinState& psi);

ObservableEntry spin_observables(const SpinState& psi);

double ghz_overlap(const SpinState& psi, Basis basis = Basis::X);

/// Von Neumann entropy of the reduced state on `sites` (0-based), from the Schmidt values.
double reduced_entropy_oracle(const SpinState& psi, const std::vector<int>& sites);
/// Renyi-n from the same Schmidt spectrum.
double reduced_renyi_oracle(const SpinState& psi, const std::vector<int>& sites, int n);

struct ObservableTrace {
  std::vector<ObservableEntry> entries;  // entries[t] after t periods
  std::vector<double> log_norm;          // pre-renormalization log-norm per period
  std::optional<int> steady_period;      // first period of a detected (period-1 or 2) steady state
};

struct SteadyStateDetector {
  double rel_tol = 1e-6;
  int consecutive = 10;
};

/// Full per-period trace of a quench from q.initial_state over q.n_periods with q.K.
ObservableTrace quench_experiment(const ModelParams& p, const LatticeSpec& lat, const QuenchConfig& q,
                                  const SteadyStateDetector& detector = {});

/// Log-linear fit of |<S_x^1>| against period over [first, last]: returns the decay rate gamma
/// in |S_x^1| ~ exp(-gamma t).
double envelope_decay_rate(const ObservableTrace& trace, int first, int last);

}  // namespace nhf
