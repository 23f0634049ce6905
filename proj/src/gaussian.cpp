#include "spdcsim/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace spdcsim {

namespace {

void check_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be in [0,1], got " +
                                std::to_string(v));
  }
}

std::vector<std::string> default_labels(int n_modes) {
  std::vector<std::string> labels;
  labels.reserve(n_modes);
  for (int i = 0; i < n_modes; ++i) labels.push_back("m" + std::to_string(i));
  return labels;
}

void check_labels_unique(const std::vector<std::string>& labels) {
  std::set<std::string_view> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw std::invalid_argument("duplicate mode label: " + l);
    }
  }
}

// Re-symmetrize to suppress floating-point drift in long transform chains.
Eigen::MatrixXd symmetrized(Eigen::MatrixXd m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

int GaussianState::index_of(std::string_view label) const {
  for (int i = 0; i < n_modes(); ++i) {
    if (mode_labels[i] == label) return i;
  }
  throw std::invalid_argument("unknown mode label: " + std::string(label));
}

bool GaussianState::has_mode(std::string_view label) const {
  return std::find(mode_labels.begin(), mode_labels.end(), label) !=
         mode_labels.end();
}

std::vector<int> GaussianState::indices_of(
    std::span<const std::string> labels) const {
  std::vector<int> idx;
  idx.reserve(labels.size());
  for (const auto& l : labels) idx.push_back(index_of(l));
  return idx;
}

SymplecticOp SymplecticOp::then(const SymplecticOp& next) const {
  if (matrix.rows() != next.matrix.rows()) {
    throw std::invalid_argument("cannot compose symplectic ops of sizes " +
                                std::to_string(matrix.rows()) + " and " +
                                std::to_string(next.matrix.rows()));
  }
  // cov -> next^T (this^T cov this) next = (this*next)^T cov (this*next)
  return SymplecticOp{matrix * next.matrix};
}

namespace {

// Symplectic form for xxpp ordering: Omega = [[0, I], [-I, 0]].
Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  omega.block(0, n_modes, n_modes, n_modes) =
      Eigen::MatrixXd::Identity(n_modes, n_modes);
  omega.block(n_modes, 0, n_modes, n_modes) =
      -Eigen::MatrixXd::Identity(n_modes, n_modes);
  return omega;
}

}  // namespace

double SymplecticOp::orthogonality_defect() const {
  const int d = static_cast<int>(matrix.rows());
  return (matrix.transpose() * matrix - Eigen::MatrixXd::Identity(d, d))
      .cwiseAbs()
      .maxCoeff();
}

double SymplecticOp::symplectic_defect() const {
  Eigen::MatrixXd omega = symplectic_form(n_modes());
  return (matrix.transpose() * omega * matrix - omega).cwiseAbs().maxCoeff();
}

LossChannel LossChannel::uniform(int n_modes, double t) {
  check_unit_interval(t, "transmittance");
  return LossChannel{std::vector<double>(n_modes, t)};
}

LossChannel LossChannel::identity(int n_modes) {
  return LossChannel{std::vector<double>(n_modes, 1.0)};
}

LossChannel LossChannel::on_modes(int n_modes, std::span<const int> modes,
                                  std::span<const double> t) {
  if (modes.size() != t.size()) {
    throw std::invalid_argument("loss mode and transmittance counts differ");
  }
  LossChannel loss{std::vector<double>(n_modes, 1.0)};
  for (size_t k = 0; k < modes.size(); ++k) {
    if (modes[k] < 0 || modes[k] >= n_modes) {
      throw std::invalid_argument("loss mode index out of range");
    }
    check_unit_interval(t[k], "transmittance");
    loss.transmittances[modes[k]] = t[k];
  }
  return loss;
}

std::array<std::string, 4> MismatchSpec::aux_labels() const {
  return {pulse_a + ".2", pulse_b + ".2", pulse_a + ".3", pulse_b + ".3"};
}

GaussianState make_vacuum(int n_modes, std::vector<std::string> labels) {
  if (n_modes < 1) {
    throw std::invalid_argument("vacuum needs at least one mode");
  }
  if (labels.empty()) labels = default_labels(n_modes);
  if (static_cast<int>(labels.size()) != n_modes) {
    throw std::invalid_argument("label count does not match mode count");
  }
  check_labels_unique(labels);
  return GaussianState{Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes),
                       Eigen::VectorXd::Zero(2 * n_modes), std::move(labels)};
}

GaussianState make_coherent(double alpha_re, double alpha_im,
                            std::string label) {
  GaussianState state = make_vacuum(1, {std::move(label)});
  state.disp(0) = std::sqrt(2.0) * alpha_re;
  state.disp(1) = std::sqrt(2.0) * alpha_im;
  return state;
}

GaussianState make_tmsv(double mu, Sign sign, std::string label_a,
                        std::string label_b) {
  if (mu < 0.0) {
    throw std::invalid_argument("tmsv mean photon number must be >= 0");
  }
  const double c = 2.0 * std::sqrt(mu * (mu + 1.0)) * sign_value(sign);
  const double v = 2.0 * mu + 1.0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
  // x block carries +c, p block -c (gamma^+ / gamma^- pair).
  cov(0, 0) = cov(1, 1) = cov(2, 2) = cov(3, 3) = v;
  cov(0, 1) = cov(1, 0) = c;
  cov(2, 3) = cov(3, 2) = -c;
  std::vector<std::string> labels{std::move(label_a), std::move(label_b)};
  check_labels_unique(labels);
  return GaussianState{std::move(cov), Eigen::VectorXd::Zero(4),
                       std::move(labels)};
}

GaussianState make_thermal(double mu, std::string label) {
  if (mu < 0.0) {
    throw std::invalid_argument("thermal mean photon number must be >= 0");
  }
  GaussianState state = make_vacuum(1, {std::move(label)});
  state.cov *= 2.0 * mu + 1.0;
  return state;
}

SymplecticOp make_identity_op(int n_modes) {
  return SymplecticOp{Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes)};
}

SymplecticOp beam_splitter(int n_modes, double t, int mode_a, int mode_b) {
  check_unit_interval(t, "beam splitter transmittance");
  if (mode_a == mode_b) {
    throw std::invalid_argument("beam splitter modes must differ");
  }
  if (mode_a < 0 || mode_a >= n_modes || mode_b < 0 || mode_b >= n_modes) {
    throw std::invalid_argument("beam splitter mode index out of range");
  }
  const double st = std::sqrt(t);
  const double sr = std::sqrt(1.0 - t);
  SymplecticOp op = make_identity_op(n_modes);
  // Identical 2x2 block in the x and p sectors.
  for (int q = 0; q < 2; ++q) {
    const int a = q * n_modes + mode_a;
    const int b = q * n_modes + mode_b;
    op.matrix(a, a) = st;
    op.matrix(a, b) = sr;
    op.matrix(b, a) = -sr;
    op.matrix(b, b) = st;
  }
  return op;
}

SymplecticOp phase_shift(int n_modes, double phi, int mode) {
  if (mode < 0 || mode >= n_modes) {
    throw std::invalid_argument("phase shift mode index out of range");
  }
  // R(phi) couples x_i and p_i, which sit n_modes apart under xxpp
  // ordering, so the four entries are scattered rather than block-placed.
  SymplecticOp op = make_identity_op(n_modes);
  const int x = mode;
  const int p = n_modes + mode;
  op.matrix(x, x) = std::cos(phi);
  op.matrix(x, p) = std::sin(phi);
  op.matrix(p, x) = -std::sin(phi);
  op.matrix(p, p) = std::cos(phi);
  return op;
}

SymplecticOp swap_modes(int n_modes, int mode_a, int mode_b) {
  if (mode_a < 0 || mode_a >= n_modes || mode_b < 0 || mode_b >= n_modes) {
    throw std::invalid_argument("swap mode index out of range");
  }
  SymplecticOp op = make_identity_op(n_modes);
  for (int q = 0; q < 2; ++q) {
    const int a = q * n_modes + mode_a;
    const int b = q * n_modes + mode_b;
    op.matrix(a, a) = 0.0;
    op.matrix(b, b) = 0.0;
    op.matrix(a, b) = 1.0;
    op.matrix(b, a) = 1.0;
  }
  return op;
}

GaussianState partial_trace(const GaussianState& state,
                            std::span<const int> keep) {
  if (keep.empty()) {
    throw std::invalid_argument("partial trace must keep at least one mode");
  }
  const int n = state.n_modes();
  std::set<int> seen;
  for (int m : keep) {
    if (m < 0 || m >= n) {
      throw std::invalid_argument("partial trace mode index out of range");
    }
    if (!seen.insert(m).second) {
      throw std::invalid_argument("partial trace keep set has duplicates");
    }
  }
  const int k = static_cast<int>(keep.size());
  Eigen::VectorXi rows(2 * k);
  std::vector<std::string> labels;
  labels.reserve(k);
  for (int i = 0; i < k; ++i) {
    rows(i) = keep[i];
    rows(k + i) = n + keep[i];
    labels.push_back(state.mode_labels[keep[i]]);
  }
  return GaussianState{state.cov(rows, rows), state.disp(rows),
                       std::move(labels)};
}

GaussianState partial_trace_labels(const GaussianState& state,
                                   std::span<const std::string> keep) {
  std::vector<int> idx = state.indices_of(keep);
  return partial_trace(state, idx);
}

GaussianState tensor(std::span<const GaussianState> states) {
  if (states.empty()) {
    throw std::invalid_argument("tensor product of zero states");
  }
  int n = 0;
  std::vector<std::string> labels;
  for (const auto& s : states) {
    n += s.n_modes();
    labels.insert(labels.end(), s.mode_labels.begin(), s.mode_labels.end());
  }
  check_labels_unique(labels);

  // Block-diagonal per quadrature sector so the result stays xxpp-ordered.
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::VectorXd disp = Eigen::VectorXd::Zero(2 * n);
  int offset = 0;
  for (const auto& s : states) {
    const int k = s.n_modes();
    for (int qr = 0; qr < 2; ++qr) {
      for (int qc = 0; qc < 2; ++qc) {
        cov.block(qr * n + offset, qc * n + offset, k, k) =
            s.cov.block(qr * k, qc * k, k, k);
      }
      disp.segment(qr * n + offset, k) = s.disp.segment(qr * k, k);
    }
    offset += k;
  }
  return GaussianState{std::move(cov), std::move(disp), std::move(labels)};
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  std::array<GaussianState, 2> pair{a, b};
  return tensor(std::span<const GaussianState>(pair));
}

GaussianState apply_symplectic(const GaussianState& state,
                               const SymplecticOp& op) {
  if (op.matrix.rows() != state.cov.rows()) {
    throw std::invalid_argument(
        "symplectic op dimension does not match state");
  }
  return GaussianState{
      symmetrized(op.matrix.transpose() * state.cov * op.matrix),
      op.matrix.transpose() * state.disp, state.mode_labels};
}

GaussianState apply_loss(const GaussianState& state, const LossChannel& loss) {
  const int n = state.n_modes();
  if (static_cast<int>(loss.transmittances.size()) != n) {
    throw std::invalid_argument("loss channel dimension does not match state");
  }
  Eigen::VectorXd k(2 * n), alpha(2 * n);
  for (int i = 0; i < n; ++i) {
    const double t = loss.transmittances[i];
    check_unit_interval(t, "transmittance");
    k(i) = k(n + i) = std::sqrt(t);
    alpha(i) = alpha(n + i) = 1.0 - t;
  }
  GaussianState out = state;
  out.cov = symmetrized(k.asDiagonal() * state.cov * k.asDiagonal());
  out.cov.diagonal() += alpha;
  out.disp = k.asDiagonal() * state.disp;
  return out;
}

GaussianState expand_mode_mismatch(const GaussianState& state,
                                   const MismatchSpec& spec) {
  check_unit_interval(spec.xi, "mode match factor");
  const int a = state.index_of(spec.pulse_a);
  const int b = state.index_of(spec.pulse_b);
  if (a == b) {
    throw std::invalid_argument("mismatch pulse pair must be distinct modes");
  }
  const auto aux = spec.aux_labels();
  GaussianState expanded = tensor(
      state, make_vacuum(4, std::vector<std::string>(aux.begin(), aux.end())));
  const int n = expanded.n_modes();
  const int a2 = expanded.index_of(aux[0]);
  const int b3 = expanded.index_of(aux[3]);
  // S_MM splits pulse a into (a, a.2) and pulse b into (b, b.3); the two
  // remaining auxiliaries stay vacuum until the paired real beam splitters.
  // Port order (aux, signal) keeps the whole pipeline in the orientation
  // that reproduces the printed closed-form block structures.
  SymplecticOp s_mm =
      beam_splitter(n, spec.xi, b3, b).then(beam_splitter(n, spec.xi, a2, a));
  return apply_symplectic(expanded, s_mm);
}

std::complex<double> evaluate_characteristic_function(
    const GaussianState& state, const Eigen::VectorXd& x) {
  if (x.size() != state.cov.rows()) {
    throw std::invalid_argument(
        "characteristic function argument dimension mismatch");
  }
  const double quad = -0.25 * x.dot(state.cov * x);
  const double phase = -state.disp.dot(x);
  return std::exp(quad) *
         std::complex<double>(std::cos(phase), std::sin(phase));
}

double min_physicality_eigenvalue(const GaussianState& state) {
  const int n = state.n_modes();
  Eigen::MatrixXcd herm =
      state.cov.cast<std::complex<double>>() +
      std::complex<double>(0.0, 1.0) *
          symplectic_form(n).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
  return solver.eigenvalues().minCoeff();
}

bool is_physical(const GaussianState& state, double tol) {
  if ((state.cov - state.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    return false;
  }
  return min_physicality_eigenvalue(state) >= -tol;
}

double total_mean_photons(const GaussianState& state) {
  const int n = state.n_modes();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += (state.cov(i, i) + state.cov(n + i, n + i) - 2.0 +
              state.disp(i) * state.disp(i) +
              state.disp(n + i) * state.disp(n + i)) /
             4.0;
  }
  return total;
}

double lambda2_to_mu(double lambda2) {
  if (!(lambda2 >= 0.0 && lambda2 < 1.0)) {
    throw std::invalid_argument("lambda^2 must be in [0,1)");
  }
  return lambda2 / (1.0 - lambda2);
}

double mu_to_lambda2(double mu) {
  if (mu < 0.0) throw std::invalid_argument("mu must be >= 0");
  return mu / (1.0 + mu);
}

}  // namespace spdcsim
