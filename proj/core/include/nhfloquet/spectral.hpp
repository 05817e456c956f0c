#pragma once

#include <array>
#include <string>
#include <vector>

#include "nhfloquet/model.hpp"
#include "nhfloquet/types.hpp"

namespace nhf {

/// Antisymmetric 2L x 2L form W of a quadratic Majorana Hamiltonian
/// H = i sum_jk a_j W_jk a_k. The kick generated by it is exp(-iH) = exp(sum a W a).
struct MajoranaForm {
  CMatrix W;

  int dim() const { return static_cast<int>(W.rows()); }
  double antisymmetry_residual() const;
};

/// Rows (p, q) of a matrix are mapped to [[c, s], [-s, c]] * (row_p, row_q).
struct BondRotation {
  int p = 0;
  int q = 0;
  cplx c{1.0, 0.0};
  cplx s{0.0, 0.0};
};

/// exp(4W) of a kick whose bonds are pairwise disjoint, stored as commuting 2x2 rotations.
struct KickExponential {
  int dim = 0;
  std::vector<BondRotation> rotations;

  CMatrix dense() const;
  /// In place: rows <- exp(4W) * rows.
  void apply(CMatrix& rows) const;
};

/// Exact exponential exp(4W), bond by bond. Throws ValidationError if two bonds share a Majorana.
KickExponential kick_exponential(const MajoranaForm& form);

/// W' (bond kick, from J) and W'' (field kick, from h).
struct KickForms {
  MajoranaForm bond;
  MajoranaForm field;
};

KickForms build_kick_forms(const ModelParams& p, const LatticeSpec& lat);

/// One drive period as a pair of exact kick exponentials: M = exp(4W') exp(4W'').
struct FloquetKicks {
  KickExponential bond;
  KickExponential field;

  static FloquetKicks from(const KickForms& forms);
  static FloquetKicks from(const ModelParams& p, const LatticeSpec& lat);
  CMatrix dense() const;
  /// rows <- M * rows without forming M.
  void apply(CMatrix& rows) const;
};

struct TransferMatrix {
  CMatrix M;
  CVector eigenvalues;
  CMatrix right_eigenvectors;
  bool diagonalizable = true;
  double condition_estimate = 1.0;
};

/// Eigenvector condition above which M is treated as defective.
inline constexpr double kDefectiveCondition = 1e10;

TransferMatrix build_transfer_matrix(const MajoranaForm& bond, const MajoranaForm& field);
TransferMatrix build_transfer_matrix(const ModelParams& p, const LatticeSpec& lat);

/// Quasienergy of a transfer-matrix eigenvalue mu: eps = kQuasienergyScale * i * Log(mu).
/// The scale is pinned by matching the momentum-space dispersion; with -1 the real part
/// equals arg(mu) in (-pi, pi].
inline constexpr double kQuasienergyScale = -1.0;

cplx quasienergy_from_eigenvalue(cplx mu);

enum class ModeClass { Real, ComplexConjugatePair, GrowDecayPair, Exceptional };

std::string to_string(ModeClass c);

struct DispersionPoint {
  double k = 0.0;
  std::array<cplx, 2> epsilon{};
  cplx w_k{};
  cplx x{};
  ModeClass classification = ModeClass::Real;
};

/// Bogoliubov block H_k = 2[(h - J cos k) sigma_z + J sin k sigma_y] of J sum XX + h sum Z.
CMatrix continuous_block(cplx J, cplx h, double k);

/// Floquet block U_k = exp(i h_XX) exp(i h_Z) of the kicked chain in the same basis.
CMatrix floquet_block(cplx J, cplx h, double k);

/// lambda = +-2 sqrt(h^2 - 2 h J cos k + J^2). x holds the radicand, w_k the positive branch.
DispersionPoint dispersion_continuous(cplx J, cplx h, double k, double tol = 1e-10);

/// x = 2(1 + cos k) cos(2h - 2J) + 2(1 - cos k) cos(2h + 2J),
/// e^{w_k} = x/4 + sqrt((x/4)^2 - 1), eps = +-(-i w_k) with Re eps in (-pi, pi].
DispersionPoint floquet_dispersion(cplx J, cplx h, double k, double tol = 1e-10);

/// Fermion momenta compatible with the boundary condition (PBC only).
std::vector<double> allowed_momenta(const LatticeSpec& lat);

struct RealModeCensus {
  int count = 0;       // number of real quasienergies among the 2L
  double density = 0;  // count / (2L)
  std::vector<double> real_momenta;
};

/// Census over the allowed momenta using the analytic dispersion.
/// tol_real < 0 selects the default 1e-8 * max|eps|.
RealModeCensus count_real_modes(const ModelParams& p, const LatticeSpec& lat,
                                double tol_real = -1.0);

enum class EdgeKind { Zero, Pi };

struct EdgeModeRecord {
  EdgeKind kind = EdgeKind::Zero;
  cplx energy{};
  double localization_length = 0.0;
  double left_weight = 0.0;
  double right_weight = 0.0;
};

std::string to_string(EdgeKind k);

struct SpectrumReport {
  std::vector<cplx> quasienergies;
  int n_real_modes = 0;
  std::vector<EdgeModeRecord> edge_modes;
  PhaseLabel phase_label = PhaseLabel::Ambiguous;
  Boundary boundary_condition = Boundary::Open;
  bool diagonalizable = true;
  double tol_real = 0.0;
  /// Near-zero or near-pi real modes were seen that are not edge localized.
  bool edge_warning = false;

  int count_edges(EdgeKind kind) const;
};

inline constexpr double kDefaultTolEdge = 1e-3;

/// Quasienergies and real-mode count. tol_real < 0 selects 1e-8 * max|eps|.
SpectrumReport quasienergies_from_transfer(const TransferMatrix& tm, Boundary bc,
                                           double tol_real = -1.0);

struct EdgeScan {
  std::vector<EdgeModeRecord> records;
  bool warning = false;
};

/// Zero and pi edge modes of an open chain (L >= 8).
EdgeScan detect_edge_modes(const TransferMatrix& tm, const LatticeSpec& lat,
                           double tol_edge = kDefaultTolEdge);
EdgeScan detect_edge_modes(const ModelParams& p, const LatticeSpec& lat,
                           double tol_edge = kDefaultTolEdge);

/// Full report: quasienergies, real-mode census and, for open chains, edge modes.
SpectrumReport spectrum_report(const ModelParams& p, const LatticeSpec& lat,
                               double tol_real = -1.0, double tol_edge = kDefaultTolEdge);

/// Real-mode density at or above which a spectrum is labelled volume-law critical.
inline constexpr double kVolumeDensityThreshold = 0.1;

/// Label from an open-chain report (edge census) and a periodic report (real-mode density).
PhaseLabel classify_phase_from_spectrum(const SpectrumReport& open, const SpectrumReport& periodic);

/// Convenience: builds the open and the odd-parity periodic reports at size L and classifies.
PhaseLabel spectral_phase(const ModelParams& p, int L, double tol_real = -1.0,
                          double tol_edge = kDefaultTolEdge);

struct MetricOperator {
  CMatrix eta;
  double residual = 0.0;  // ||eta H eta^-1 - H^dagger|| / ||H||
  bool certified = false;
  std::string family;
};

inline constexpr double kMetricCertification = 1e-8;

double metric_residual(const CMatrix& eta, const CMatrix& H);

/// Closed-form metric where one is known:
///  - continuous limit with J = a + ib, h = a - ib: eta = [[1, g], [g, 1]], g = (b/a) cot(k/2)
///  - Floquet block on alpha_J = alpha_h = pi/4 mod pi/2: eta = sigma_x
///  - Hermitian couplings: eta = identity
/// Any other parameters fall back to numerical_metric (never certified).
/// Throws ValidationError at the pole k = 0 of the continuous-limit metric.
MetricOperator pseudo_hermiticity_certificate(const ModelParams& p, double k,
                                              bool continuous_limit);

/// Least-squares Hermitian eta minimizing ||eta H - H^dagger eta|| at unit norm.
MetricOperator numerical_metric(const CMatrix& H);

/// Effective Hamiltonian H_k = i Log(U_k) of the Floquet block.
CMatrix floquet_block_hamiltonian(cplx J, cplx h, double k);

}  // namespace nhf
