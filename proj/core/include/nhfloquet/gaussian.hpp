#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nhfloquet/model.hpp"
#include "nhfloquet/spectral.hpp"
#include "nhfloquet/types.hpp"

namespace nhf {

/// C_ij = <a_i a_j> / <psi|psi> on the 2L Majoranas.
struct CorrelationMatrix {
  CMatrix C;

  int L() const { return static_cast<int>(C.rows() / 2); }
  CMatrix prime() const { return C - CMatrix::Identity(C.rows(), C.cols()); }

  double anticommutator_residual() const;  // max |C + C^T - 2I|
  double antisymmetry_residual() const;    // max |C' + C'^T|
  double purity_residual() const;          // max |C'C' - I|

  /// <Z_j> and <X_j X_{j+1}> for 1-based j.
  double z(int site) const;
  double xx(int site) const;
};

/// Pure Gaussian state as an isotropic orthonormal frame. The state is annihilated
/// by b_k = sum_i Phi_ik a_i, k = 1..L.
struct GaussianFrame {
  CMatrix Phi;
  int period_count = 0;
  double norm_log = 0.0;

  int L() const { return static_cast<int>(Phi.cols()); }
  double isotropy_residual() const;        // max |Phi^T Phi|
  double orthonormality_residual() const;  // max |Phi^dagger Phi - I|
};

/// Frame of a Z-basis product state. Throws UnsupportedError for states that are
/// not fermionic Gaussian (X-basis products).
GaussianFrame initial_frame(const QuenchConfig& q, const LatticeSpec& lat);

/// Frame of an explicit occupation pattern, +1 = empty (Z = +1), -1 = occupied.
GaussianFrame product_frame(const std::vector<int>& z_polarizations);

/// C = 2 conj(Phi) Phi^T.
CorrelationMatrix correlation_from_frame(const GaussianFrame& frame);

/// Householder QR in place, then the first-order isotropic projection
/// Phi <- Phi - conj(Phi) S / 2 with S = Phi^T Phi. Accumulates sum log|R_kk| into norm_log.
/// Throws DegenerateEvolution when the frame lost rank.
void orthonormalize(GaussianFrame& frame);

/// Repeats orthonormalize until Phi^T Phi is below 1e-13 (at most three passes), keeping norm_log.
void restore_isotropy(GaussianFrame& frame);

/// Order in which the two kicks act on the frame within one period.
enum class KickOrder { FieldThenBond, BondThenField };

/// Pinned against the state-vector simulator: U_F = U_XX U_Z acts with the field kick first.
inline constexpr KickOrder kFrameKickOrder = KickOrder::FieldThenBond;

/// One period: Phi <- orthonormalize(M Phi). M is complex orthogonal, so M and M^{-T} coincide.
void period_map(GaussianFrame& frame, const FloquetKicks& kicks,
                KickOrder order = kFrameKickOrder);
void period_map(GaussianFrame& frame, const TransferMatrix& tm);

/// Isotropic frame of the L dominant eigenvectors of M (one per reciprocal pair).
/// Throws NumericalBreakdown when |mu_L| and |mu_{L+1}| are not separated by gap_tol,
/// in which case the steady state depends on the initial state.
GaussianFrame dominant_frame(const TransferMatrix& tm, double gap_tol = 1e-6);

/// t -> infinity limit of exp(4 W t): the L modes of W with the largest real part.
GaussianFrame continuous_steady_frame(const MajoranaForm& W, double gap_tol = 1e-6);

/// W = W' + W'', the generator of exp(i J sum XX + i h sum Z).
MajoranaForm continuous_form(const ModelParams& p, const LatticeSpec& lat);

struct ContinuousOptions {
  double rtol = 1e-9;
  double atol = 1e-11;
  double first_step = 1e-3;
};

/// Integrates dC/dt = i(-C^T conj(H)^T C + C^T conj(H) C + C H C^T - C H^T C^T) with H = iW,
/// adaptive Dormand-Prince. Returns C at every t in t_grid (ascending, t_grid[0] = 0 is C0).
/// Throws IntegrationFailure with the last good time on step-size breakdown.
std::vector<CorrelationMatrix> evolve_continuous(const CorrelationMatrix& C0, const MajoranaForm& W,
                                                 const std::vector<double>& t_grid,
                                                 const ContinuousOptions& opt = {});

/// Same dynamics through the exact propagator: Phi(t) = orthonormalize(exp(4 W dt) Phi).
/// t_grid must be uniformly spaced.
std::vector<GaussianFrame> evolve_continuous_frames(const GaussianFrame& frame0, const MajoranaForm& W,
                                                    const std::vector<double>& t_grid);

struct EntropyTrace {
  std::vector<int> period;
  std::vector<double> S_A;
  std::vector<double> norm_log;
  std::vector<double> purity_residual;
};

struct StroboscopicOptions {
  SubsystemSpec subsystem{1, 1};
  /// Periods between purity-residual evaluations (O(L^3) each); others repeat the last value.
  int diagnostic_stride = 1;
  /// Called with the frame after every recorded period, period 0 included.
  std::function<void(const GaussianFrame&)> on_period;
};

/// Evolves the initial frame for q.n_periods periods and records S_A after every period
/// (period 0 is the initial state). Returns the final frame through `final_frame` if given.
EntropyTrace stroboscopic_run(const ModelParams& p, const LatticeSpec& lat, const QuenchConfig& q,
                              const StroboscopicOptions& opt, GaussianFrame* final_frame = nullptr);

/// Writes C as row-major little-endian complex<double> to `<dir>/C_<period>.bin` with a
/// JSON sidecar `<dir>/C_<period>.json`. Returns the binary path.
std::string dump_correlations(const CorrelationMatrix& C, int period, const std::string& dir);

}  // namespace nhf
