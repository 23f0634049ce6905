#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spdcsim/errors.hpp"

namespace spdcsim {

/// Sign branch of the two-mode squeezed vacuum correlations. Both branches
/// give identical click statistics for the built-in experiments; the
/// parameter exists because the physical convention is not fixed a priori.
enum class Sign { plus, minus };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }

/// Multimode Gaussian state in xxpp quadrature ordering: row/column i is
/// x of mode i, row/column n+i is p of mode i. Vacuum covariance is the
/// identity and the displacement of a coherent state |alpha> is
/// sqrt(2)*(Re alpha, Im alpha).
struct GaussianState {
  Eigen::MatrixXd cov;                   // 2n x 2n, symmetric
  Eigen::VectorXd disp;                  // 2n
  std::vector<std::string> mode_labels;  // size n, unique

  int n_modes() const { return static_cast<int>(mode_labels.size()); }

  /// Index of a mode label; throws std::invalid_argument if absent.
  int index_of(std::string_view label) const;
  bool has_mode(std::string_view label) const;
  std::vector<int> indices_of(std::span<const std::string> labels) const;
};

/// Passive linear-optics transform. `matrix` is the full 2n x 2n symplectic
/// matrix S; states evolve as cov -> S^T cov S, disp -> S^T disp.
struct SymplecticOp {
  Eigen::MatrixXd matrix;

  int n_modes() const { return static_cast<int>(matrix.rows()) / 2; }

  /// Composition: apply *this first, then `next` (matrix product this*next).
  SymplecticOp then(const SymplecticOp& next) const;

  double orthogonality_defect() const;    // ||S^T S - I||_inf
  double symplectic_defect() const;       // ||S^T Omega S - Omega||_inf
};

/// Pure loss map cov -> K^T cov K + alpha with K = diag(sqrt(t_i)) on both
/// quadratures and alpha = diag(1 - t_i). Displacements attenuate as K^T d.
struct LossChannel {
  std::vector<double> transmittances;  // one per mode, in [0,1]

  static LossChannel uniform(int n_modes, double t);
  static LossChannel identity(int n_modes);
  /// All modes lossless except `modes[i]` with transmittance `t[i]`.
  static LossChannel on_modes(int n_modes, std::span<const int> modes,
                              std::span<const double> t);
};

/// Phenomenological mode-mismatch between two interfering pulses, modeled
/// as effective beam splitters of transmittance xi routing the mismatched
/// signal components into fresh auxiliary modes.
struct MismatchSpec {
  double xi = 1.0;
  std::string pulse_a;
  std::string pulse_b;

  /// Deterministic derived labels for the four auxiliary modes, in append
  /// order: {a.2, b.2, a.3, b.3}.
  std::array<std::string, 4> aux_labels() const;
};

// State constructors

GaussianState make_vacuum(int n_modes, std::vector<std::string> labels = {});
GaussianState make_coherent(double alpha_re, double alpha_im,
                            std::string label = "m0");
GaussianState make_tmsv(double mu, Sign sign = Sign::plus,
                        std::string label_a = "m0", std::string label_b = "m1");
GaussianState make_thermal(double mu, std::string label = "m0");

// Operation constructors (matrices sized for a state with n_modes modes)

SymplecticOp make_identity_op(int n_modes);
SymplecticOp beam_splitter(int n_modes, double t, int mode_a, int mode_b);
SymplecticOp phase_shift(int n_modes, double phi, int mode);
SymplecticOp swap_modes(int n_modes, int mode_a, int mode_b);

// State transformations (pure functions, inputs untouched)

GaussianState partial_trace(const GaussianState& state,
                            std::span<const int> keep);
GaussianState partial_trace_labels(const GaussianState& state,
                                   std::span<const std::string> keep);
GaussianState tensor(std::span<const GaussianState> states);
GaussianState tensor(const GaussianState& a, const GaussianState& b);
GaussianState apply_symplectic(const GaussianState& state,
                               const SymplecticOp& op);
GaussianState apply_loss(const GaussianState& state, const LossChannel& loss);
GaussianState expand_mode_mismatch(const GaussianState& state,
                                   const MismatchSpec& spec);

std::complex<double> evaluate_characteristic_function(
    const GaussianState& state, const Eigen::VectorXd& x);

// Diagnostics

/// Minimum eigenvalue of the Hermitian matrix cov + i*Omega; physical states
/// have it >= -tol for a small numerical tolerance.
double min_physicality_eigenvalue(const GaussianState& state);
bool is_physical(const GaussianState& state, double tol = 1e-9);

/// Sum over modes of <n_i> = (cov_xx + cov_pp - 2)/4 (+ displacement term).
double total_mean_photons(const GaussianState& state);

// Squeezing-parameter conversions: lambda^2 = mu/(1+mu).
double lambda2_to_mu(double lambda2);
double mu_to_lambda2(double mu);

}  // namespace spdcsim
