#include "spdcsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace spdcsim {

namespace {

constexpr std::size_t kMaxBasisStates = 40'000'000;

std::vector<std::string> default_labels(int n_modes) {
  std::vector<std::string> labels;
  labels.reserve(n_modes);
  for (int i = 0; i < n_modes; ++i) labels.push_back("m" + std::to_string(i));
  return labels;
}

std::vector<std::size_t> strides_of(std::span<const int> caps) {
  std::vector<std::size_t> strides(caps.size());
  std::size_t s = 1;
  for (std::size_t i = caps.size(); i-- > 0;) {
    strides[i] = s;
    s *= static_cast<std::size_t>(caps[i]) + 1;
  }
  return strides;
}

std::size_t dim_of(std::span<const int> caps) {
  std::size_t d = 1;
  for (int c : caps) {
    d *= static_cast<std::size_t>(c) + 1;
    if (d > kMaxBasisStates) {
      throw std::invalid_argument(
          "oracle instance too large: more than 4e7 basis states");
    }
  }
  return d;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

void check_mode_range(int mode, int n_modes) {
  if (mode < 0 || mode >= n_modes) {
    throw std::invalid_argument("mode index out of range");
  }
}

// Copy into a new capacity layout; amplitudes beyond a shrunk capacity are
// dropped (callers only ever grow).
FockVector reshaped(const FockVector& state, std::vector<int> new_caps) {
  FockVector out{std::move(new_caps), state.cap_limit, state.mode_labels, {}};
  out.amp.assign(dim_of(out.caps), {0.0, 0.0});
  const int n = state.n_modes();
  const auto old_strides = strides_of(state.caps);
  const auto new_strides = strides_of(out.caps);
  std::vector<int> occ(n, 0);
  for (std::size_t idx = 0; idx < state.dim(); ++idx) {
    if (state.amp[idx] == std::complex<double>{}) continue;
    std::size_t rem = idx;
    std::size_t target = 0;
    bool fits = true;
    for (int m = 0; m < n; ++m) {
      occ[m] = static_cast<int>(rem / old_strides[m]);
      rem %= old_strides[m];
      if (occ[m] > out.caps[m]) {
        fits = false;
        break;
      }
      target += occ[m] * new_strides[m];
    }
    if (fits) out.amp[target] = state.amp[idx];
  }
  return out;
}

}  // namespace

int FockVector::index_of(std::string_view label) const {
  for (int i = 0; i < n_modes(); ++i) {
    if (mode_labels[i] == label) return i;
  }
  throw std::invalid_argument("unknown mode label: " + std::string(label));
}

double FockVector::norm2() const {
  double total = 0.0;
  for (const auto& a : amp) total += std::norm(a);
  return total;
}

int FockVector::occupation(std::size_t idx, int mode) const {
  std::size_t stride = 1;
  for (int m = n_modes() - 1; m > mode; --m) {
    stride *= static_cast<std::size_t>(caps[m]) + 1;
  }
  return static_cast<int>(idx / stride) %
         (static_cast<std::size_t>(caps[mode]) + 1);
}

std::size_t FockVector::basis_index(std::span<const int> occupation) const {
  if (occupation.size() != static_cast<std::size_t>(n_modes())) {
    throw std::invalid_argument("occupation tuple has wrong length");
  }
  const auto strides = strides_of(caps);
  std::size_t idx = 0;
  for (int m = 0; m < n_modes(); ++m) {
    if (occupation[m] < 0 || occupation[m] > caps[m]) {
      throw std::invalid_argument("occupation exceeds mode capacity");
    }
    idx += occupation[m] * strides[m];
  }
  return idx;
}

int FockDensity::index_of(std::string_view label) const {
  for (int i = 0; i < n_modes(); ++i) {
    if (mode_labels[i] == label) return i;
  }
  throw std::invalid_argument("unknown mode label: " + std::string(label));
}

double FockDensity::trace() const { return rho.trace().real(); }

int FockDensity::occupation(std::size_t idx, int mode) const {
  std::size_t stride = 1;
  for (int m = n_modes() - 1; m > mode; --m) {
    stride *= static_cast<std::size_t>(n_max) + 1;
  }
  return static_cast<int>(idx / stride) % (n_max + 1);
}

FockVector fock_vacuum(int n_modes, int n_max,
                       std::vector<std::string> labels) {
  if (n_modes < 1) throw std::invalid_argument("need at least one mode");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  if (labels.empty()) labels = default_labels(n_modes);
  if (static_cast<int>(labels.size()) != n_modes) {
    throw std::invalid_argument("label count does not match mode count");
  }
  FockVector st{std::vector<int>(n_modes, n_max), 2 * n_max,
                std::move(labels), {}};
  st.amp.assign(dim_of(st.caps), {0.0, 0.0});
  st.amp[0] = 1.0;
  return st;
}

FockVector fock_tmsv(double lambda, int n_max, std::string label_s,
                     std::string label_i) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("squeezing parameter lambda must be in [0,1)");
  }
  FockVector st =
      fock_vacuum(2, n_max, {std::move(label_s), std::move(label_i)});
  const double norm = std::sqrt(1.0 - lambda * lambda);
  double pw = 1.0;
  std::array<int, 2> occ{};
  for (int n = 0; n <= n_max; ++n) {
    occ[0] = occ[1] = n;
    st.amp[st.basis_index(occ)] = norm * pw;
    pw *= lambda;
  }
  return st;
}

FockVector fock_coherent(double alpha_re, double alpha_im, int n_max,
                         std::string label) {
  FockVector st = fock_vacuum(1, n_max, {std::move(label)});
  const std::complex<double> alpha(alpha_re, alpha_im);
  const double a2 = std::norm(alpha);
  std::complex<double> num = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    st.amp[n] = std::exp(-0.5 * a2) * num / std::sqrt(factorial(n));
    num *= alpha;
  }
  return st;
}

FockVector fock_tensor(const FockVector& a, const FockVector& b) {
  std::vector<std::string> labels = a.mode_labels;
  labels.insert(labels.end(), b.mode_labels.begin(), b.mode_labels.end());
  {
    std::set<std::string_view> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) {
      throw std::invalid_argument("duplicate mode labels in tensor product");
    }
  }
  std::vector<int> caps = a.caps;
  caps.insert(caps.end(), b.caps.begin(), b.caps.end());
  FockVector out{std::move(caps), std::max(a.cap_limit, b.cap_limit),
                 std::move(labels), {}};
  out.amp.assign(dim_of(out.caps), {0.0, 0.0});
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (a.amp[i] == std::complex<double>{}) continue;
    for (std::size_t j = 0; j < b.dim(); ++j) {
      out.amp[i * b.dim() + j] = a.amp[i] * b.amp[j];
    }
  }
  return out;
}

FockVector fock_sagnac(double lambda, int n_max,
                       std::array<std::string, 4> labels) {
  FockVector st = fock_tensor(fock_tmsv(lambda, n_max, labels[0], labels[1]),
                              fock_tmsv(lambda, n_max, labels[2], labels[3]));
  fock_swap_modes(st, 1, 3);
  return st;
}

namespace {

// Shared two-mode SU(2) action: a photon in mode a exits as u|a> + v|b>,
// one in mode b as -v|a> + u|b>, with u^2 + v^2 = 1. Output capacities grow
// to hold the combined photon number, up to cap_limit.
void fock_two_mode(FockVector& state, double u, double v, int mode_a,
                   int mode_b) {
  check_mode_range(mode_a, state.n_modes());
  check_mode_range(mode_b, state.n_modes());
  if (mode_a == mode_b) {
    throw std::invalid_argument("beam splitter modes must differ");
  }
  const int grown = std::min(state.caps[mode_a] + state.caps[mode_b],
                             state.cap_limit);
  if (grown > state.caps[mode_a] || grown > state.caps[mode_b]) {
    std::vector<int> caps = state.caps;
    caps[mode_a] = std::max(caps[mode_a], grown);
    caps[mode_b] = std::max(caps[mode_b], grown);
    state = reshaped(state, std::move(caps));
  }
  const int qa = state.caps[mode_a] + 1;
  const int qb = state.caps[mode_b] + 1;

  // coeff[na][nb][ma]: amplitude to scatter |na,nb> -> |ma, na+nb-ma>,
  // from the binomial expansion of (u a+ + v b+)^na (-v a+ + u b+)^nb.
  std::vector<std::vector<std::vector<double>>> coeff(
      qa, std::vector<std::vector<double>>(qb));
  for (int na = 0; na < qa; ++na) {
    for (int nb = 0; nb < qb; ++nb) {
      std::vector<double> row(na + nb + 1, 0.0);
      const double in_norm = std::sqrt(factorial(na) * factorial(nb));
      for (int j = 0; j <= na; ++j) {
        for (int k = 0; k <= nb; ++k) {
          const int ma = j + (nb - k);
          const int mb = (na - j) + k;
          row[ma] += binomial(na, j) * binomial(nb, k) *
                     std::pow(u, j + k) * std::pow(v, na - j) *
                     std::pow(-v, nb - k) *
                     std::sqrt(factorial(ma) * factorial(mb)) / in_norm;
        }
      }
      coeff[na][nb] = std::move(row);
    }
  }

  const auto strides = strides_of(state.caps);
  const std::size_t sa = strides[mode_a];
  const std::size_t sb = strides[mode_b];
  std::vector<std::complex<double>> out(state.dim(), {0.0, 0.0});
  for (std::size_t idx = 0; idx < state.dim(); ++idx) {
    if (state.occupation(idx, mode_a) != 0 ||
        state.occupation(idx, mode_b) != 0) {
      continue;  // visit each (rest) slice once, at na = nb = 0
    }
    for (int na = 0; na < qa; ++na) {
      for (int nb = 0; nb < qb; ++nb) {
        const std::complex<double> in = state.amp[idx + na * sa + nb * sb];
        if (in == std::complex<double>{}) continue;
        const auto& row = coeff[na][nb];
        for (int ma = 0; ma < static_cast<int>(row.size()); ++ma) {
          const int mb = na + nb - ma;
          if (ma >= qa || mb >= qb) continue;  // ceiling truncation
          if (row[ma] == 0.0) continue;
          out[idx + ma * sa + mb * sb] += row[ma] * in;
        }
      }
    }
  }
  state.amp = std::move(out);
}

}  // namespace

void fock_beam_splitter(FockVector& state, double t, int mode_a, int mode_b) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("beam splitter transmittance out of range");
  }
  fock_two_mode(state, std::sqrt(t), std::sqrt(1.0 - t), mode_a, mode_b);
}

void fock_polarizer(FockVector& state, double theta, int mode_h, int mode_v) {
  // Same port orientation as the covariance-side polarizer embedding.
  fock_two_mode(state, std::cos(theta), std::sin(theta), mode_v, mode_h);
}

void fock_phase_shift(FockVector& state, double phi, int mode) {
  check_mode_range(mode, state.n_modes());
  // exp(i phi n) per basis state, matching the symplectic R(phi) action
  // (a coherent amplitude rotates as alpha -> e^{i phi} alpha).
  std::vector<std::complex<double>> phase(state.caps[mode] + 1);
  for (int n = 0; n <= state.caps[mode]; ++n) {
    phase[n] = std::complex<double>(std::cos(phi * n), std::sin(phi * n));
  }
  for (std::size_t idx = 0; idx < state.dim(); ++idx) {
    state.amp[idx] *= phase[state.occupation(idx, mode)];
  }
}

void fock_swap_modes(FockVector& state, int mode_a, int mode_b) {
  check_mode_range(mode_a, state.n_modes());
  check_mode_range(mode_b, state.n_modes());
  if (mode_a == mode_b) return;
  FockVector out = state;
  std::swap(out.caps[mode_a], out.caps[mode_b]);
  out.amp.assign(dim_of(out.caps), {0.0, 0.0});
  const int n = state.n_modes();
  const auto old_strides = strides_of(state.caps);
  const auto new_strides = strides_of(out.caps);
  for (std::size_t idx = 0; idx < state.dim(); ++idx) {
    if (state.amp[idx] == std::complex<double>{}) continue;
    std::size_t rem = idx;
    std::size_t target = 0;
    for (int m = 0; m < n; ++m) {
      const int occ = static_cast<int>(rem / old_strides[m]);
      rem %= old_strides[m];
      const int dest = m == mode_a ? mode_b : (m == mode_b ? mode_a : m);
      target += static_cast<std::size_t>(occ) * new_strides[dest];
    }
    out.amp[target] = state.amp[idx];
  }
  state = std::move(out);
}

FockVector fock_loss_env(const FockVector& state, double t, int mode,
                         std::string env_label) {
  check_mode_range(mode, state.n_modes());
  // The fresh environment starts with zero capacity; the beam splitter
  // grows it as needed.
  FockVector env{std::vector<int>{0}, state.cap_limit,
                 {std::move(env_label)}, {std::complex<double>(1.0, 0.0)}};
  FockVector out = fock_tensor(state, env);
  fock_beam_splitter(out, t, mode, out.n_modes() - 1);
  return out;
}

FockDensity fock_density_from(const FockVector& state) {
  int n_max = 0;
  for (int c : state.caps) n_max = std::max(n_max, c);
  const FockVector uniform =
      reshaped(state, std::vector<int>(state.n_modes(), n_max));
  Eigen::Map<const Eigen::VectorXcd> psi(uniform.amp.data(),
                                         static_cast<long>(uniform.dim()));
  return FockDensity{n_max, uniform.mode_labels, psi * psi.adjoint()};
}

FockDensity fock_thermal(double mu, int n_max, std::string label) {
  if (mu < 0.0) throw std::invalid_argument("mu must be >= 0");
  FockDensity st{n_max, {std::move(label)},
                 Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1)};
  for (int n = 0; n <= n_max; ++n) {
    st.rho(n, n) = std::pow(mu, n) / std::pow(mu + 1.0, n + 1);
  }
  return st;
}

FockDensity fock_loss(const FockDensity& state, double t, int mode) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("transmittance out of range");
  }
  check_mode_range(mode, state.n_modes());
  const int q = state.n_max + 1;
  std::size_t stride = 1;
  for (int m = state.n_modes() - 1; m > mode; --m) stride *= q;
  const long dim = state.rho.rows();

  Eigen::MatrixXcd result = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < q; ++k) {
    // K_k |n> = sqrt(C(n,k) t^(n-k) (1-t)^k) |n-k> on the lossy mode.
    Eigen::MatrixXcd kraus = Eigen::MatrixXcd::Zero(dim, dim);
    bool nonzero = false;
    for (long idx = 0; idx < dim; ++idx) {
      const int n =
          static_cast<int>(static_cast<std::size_t>(idx) / stride) % q;
      if (n < k) continue;
      const double amp = std::sqrt(binomial(n, k) * std::pow(t, n - k) *
                                   std::pow(1.0 - t, k));
      if (amp == 0.0) continue;
      kraus(idx - static_cast<long>(k * stride), idx) = amp;
      nonzero = true;
    }
    if (nonzero) result += kraus * state.rho * kraus.adjoint();
  }
  return FockDensity{state.n_max, state.mode_labels, std::move(result)};
}

FockDensity fock_loss(const FockVector& state, double t, int mode) {
  return fock_loss(fock_density_from(state), t, mode);
}

namespace {

struct PreparedFockPattern {
  std::vector<std::vector<int>> click_modes;
  std::vector<double> click_nu;
  std::vector<double> click_eta;
  std::vector<std::vector<int>> off_modes;  // NoClick detectors
  std::vector<double> off_nu;
  std::vector<double> off_eta;
};

template <typename State>
PreparedFockPattern prepare_fock(const State& state,
                                 std::span<const DetectorSpec> detectors,
                                 const ClickPattern& pattern) {
  for (const auto& [id, outcome] : pattern) {
    (void)outcome;
    const bool known =
        std::any_of(detectors.begin(), detectors.end(),
                    [&](const DetectorSpec& d) { return d.id == id; });
    if (!known) {
      throw std::invalid_argument("pattern references unknown detector: " +
                                  id);
    }
  }
  PreparedFockPattern prep;
  std::set<int> covered;
  std::vector<const DetectorSpec*> sorted;
  for (const auto& det : detectors) sorted.push_back(&det);
  std::sort(sorted.begin(), sorted.end(),
            [](const DetectorSpec* a, const DetectorSpec* b) {
              return a->id < b->id;
            });
  for (const DetectorSpec* det : sorted) {
    std::vector<int> modes;
    for (const auto& label : det->modes) {
      const int idx = state.index_of(label);
      if (!covered.insert(idx).second) {
        throw std::invalid_argument("detectors overlap on mode " + label);
      }
      modes.push_back(idx);
    }
    const auto it = pattern.find(det->id);
    const Outcome outcome =
        it == pattern.end() ? Outcome::marginal : it->second;
    if (outcome == Outcome::click) {
      prep.click_modes.push_back(std::move(modes));
      prep.click_nu.push_back(det->dark_rate);
      prep.click_eta.push_back(det->efficiency);
    } else if (outcome == Outcome::no_click) {
      prep.off_modes.push_back(std::move(modes));
      prep.off_nu.push_back(det->dark_rate);
      prep.off_eta.push_back(det->efficiency);
    }
  }
  return prep;
}

// P = sum over subsets S of the click detectors of
//     (-1)^|S| prod_{i in S+off}(1-nu_i) * W(S+off),
// where W weights each diagonal basis state by (1-eta)^(photons seen).
// Single pass over the basis with an occupation odometer and per-mode
// lookup tables of (1 - t*eta)^n.
template <typename State, typename WeightFn>
double fock_pattern_impl(const State& state, std::size_t dim,
                         WeightFn&& weight,
                         std::span<const DetectorSpec> detectors,
                         const ClickPattern& pattern,
                         std::span<const double> pre_detection,
                         std::span<const int> caps) {
  const int n_modes = state.n_modes();
  if (!pre_detection.empty() &&
      pre_detection.size() != static_cast<std::size_t>(n_modes)) {
    throw std::invalid_argument(
        "pre-detection transmittance needs one entry per mode");
  }
  const PreparedFockPattern prep = prepare_fock(state, detectors, pattern);
  const std::size_t n_click = prep.click_modes.size();
  const std::size_t n_off = prep.off_modes.size();
  const std::size_t n_active = n_click + n_off;

  // tables[j]: list of (mode, powers of (1 - t*eta)) for active detector j;
  // click detectors first, then the no-click ones.
  struct ModeTable {
    int mode;
    std::vector<double> pow;
  };
  std::vector<std::vector<ModeTable>> tables(n_active);
  const auto fill = [&](std::size_t j, const std::vector<int>& modes,
                        double eta) {
    for (int m : modes) {
      const double t = pre_detection.empty() ? 1.0 : pre_detection[m];
      ModeTable table{m, std::vector<double>(caps[m] + 1)};
      for (int k = 0; k <= caps[m]; ++k) {
        table.pow[k] = std::pow(1.0 - t * eta, k);
      }
      tables[j].push_back(std::move(table));
    }
  };
  for (std::size_t i = 0; i < n_click; ++i) {
    fill(i, prep.click_modes[i], prep.click_eta[i]);
  }
  for (std::size_t i = 0; i < n_off; ++i) {
    fill(n_click + i, prep.off_modes[i], prep.off_eta[i]);
  }

  std::vector<double> acc(std::size_t{1} << n_click, 0.0);
  std::vector<int> occ(n_modes, 0);
  std::vector<double> f(n_active);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const double w = weight(idx);
    if (w != 0.0) {
      for (std::size_t j = 0; j < n_active; ++j) {
        double v = 1.0;
        for (const ModeTable& t : tables[j]) v *= t.pow[occ[t.mode]];
        f[j] = v;
      }
      double base = w;
      for (std::size_t i = 0; i < n_off; ++i) base *= f[n_click + i];
      for (std::size_t mask = 0; mask < acc.size(); ++mask) {
        double v = base;
        for (std::size_t i = 0; i < n_click; ++i) {
          if (mask & (std::size_t{1} << i)) v *= f[i];
        }
        acc[mask] += v;
      }
    }
    // odometer increment
    for (int m = n_modes - 1; m >= 0; --m) {
      if (++occ[m] <= caps[m]) break;
      occ[m] = 0;
    }
  }

  double total = 0.0;
  for (std::size_t mask = 0; mask < acc.size(); ++mask) {
    double coefficient = 1.0;
    for (std::size_t i = 0; i < n_off; ++i) {
      coefficient *= 1.0 - prep.off_nu[i];
    }
    for (std::size_t i = 0; i < n_click; ++i) {
      if (mask & (std::size_t{1} << i)) {
        coefficient *= -(1.0 - prep.click_nu[i]);
      }
    }
    total += coefficient * acc[mask];
  }
  return total;
}

}  // namespace

double fock_pattern_probability(
    const FockVector& state, std::span<const DetectorSpec> detectors,
    const ClickPattern& pattern,
    std::span<const double> pre_detection_transmittance) {
  return fock_pattern_impl(
      state, state.dim(),
      [&](std::size_t idx) { return std::norm(state.amp[idx]); }, detectors,
      pattern, pre_detection_transmittance, state.caps);
}

double fock_pattern_probability(
    const FockDensity& state, std::span<const DetectorSpec> detectors,
    const ClickPattern& pattern,
    std::span<const double> pre_detection_transmittance) {
  const std::vector<int> caps(state.n_modes(), state.n_max);
  return fock_pattern_impl(
      state, static_cast<std::size_t>(state.rho.rows()),
      [&](std::size_t idx) {
        return state.rho(static_cast<long>(idx), static_cast<long>(idx))
            .real();
      },
      detectors, pattern, pre_detection_transmittance, caps);
}

double fock_truncation_bound(int n_tmsv, int n_detectors, double lambda,
                             int n_max) {
  return n_tmsv * n_detectors * std::pow(lambda, 2.0 * (n_max + 1));
}

double fock_hom_coincidence(const HomConfig& config, bool delayed,
                            int n_max) {
  const double lambda = std::sqrt(mu_to_lambda2(config.mu));
  FockVector st = fock_tmsv(lambda, n_max, "A1", "B1");
  if (config.t_a < 1.0) {
    st = fock_loss_env(st, config.t_a, st.index_of("A1"), "A1.env");
  }
  if (config.t_b < 1.0) {
    st = fock_loss_env(st, config.t_b, st.index_of("B1"), "B1.env");
  }
  {
    FockVector aux{std::vector<int>(4, 0), st.cap_limit,
                   {"A1.2", "B1.2", "A1.3", "B1.3"},
                   {std::complex<double>(1.0, 0.0)}};
    aux.amp.assign(1, {1.0, 0.0});
    st = fock_tensor(st, aux);
  }
  const double xi = delayed ? 0.0 : config.xi;
  fock_beam_splitter(st, xi, st.index_of("B1.3"), st.index_of("B1"));
  fock_beam_splitter(st, xi, st.index_of("A1.2"), st.index_of("A1"));
  fock_beam_splitter(st, 0.5, st.index_of("B1"), st.index_of("A1"));
  fock_beam_splitter(st, 0.5, st.index_of("B1.2"), st.index_of("A1.2"));
  fock_beam_splitter(st, 0.5, st.index_of("B1.3"), st.index_of("A1.3"));
  const std::vector<DetectorSpec> dets = hom_detectors(config);
  const ClickPattern pattern{{"A", Outcome::click}, {"B", Outcome::click}};
  return fock_pattern_probability(st, dets, pattern);
}

double fock_epr_coincidence(const EprConfig& config, int n_max) {
  const double lambda = std::sqrt(mu_to_lambda2(config.mu));
  FockVector st = fock_sagnac(lambda, n_max);
  fock_polarizer(st, config.theta_a, st.index_of("AH"), st.index_of("AV"));
  fock_polarizer(st, config.theta_b, st.index_of("BH"), st.index_of("BV"));
  // The per-arm transmittances sit directly in front of the detectors, so
  // they fold into the detection weights.
  const std::array<double, 4> pre{config.eta_ah, config.eta_av,
                                  config.eta_bh, config.eta_bv};
  const std::vector<DetectorSpec> dets{
      DetectorSpec{"A", {"AH", "AV"}, 1.0, 0.0},
      DetectorSpec{"B", {"BH", "BV"}, 1.0, 0.0},
  };
  const ClickPattern pattern{{"A", Outcome::click}, {"B", Outcome::click}};
  return fock_pattern_probability(st, dets, pattern, pre);
}

double fock_ces_joint_click(const CesConfig& config, int n_max,
                            int cap_limit) {
  const double lambda = std::sqrt(mu_to_lambda2(config.mu));
  const int m = config.m_bm;
  FockVector st = fock_sagnac(lambda, n_max, {"1", "2", "3", "4"});
  for (int k = 1; k <= m; ++k) {
    st = fock_tensor(
        st, fock_sagnac(lambda, n_max,
                        {std::to_string(4 * k + 1), std::to_string(4 * k + 2),
                         std::to_string(4 * k + 3),
                         std::to_string(4 * k + 4)}));
  }
  if (cap_limit > 0) st.cap_limit = cap_limit;
  for (int x = 1; x <= m; ++x) {
    fock_beam_splitter(st, 0.5, 4 * x, 4 * x - 2);
    fock_beam_splitter(st, 0.5, 4 * x + 1, 4 * x - 1);
  }
  fock_polarizer(st, config.theta_a, 0, 1);
  fock_polarizer(st, config.theta_b, 4 * m + 2, 4 * m + 3);

  std::vector<DetectorSpec> dets;
  ClickPattern pattern;
  for (const auto& mode : ces_detector_mode_labels(m)) {
    dets.push_back(DetectorSpec{"D" + mode, {mode}, config.eta, config.nu});
    pattern["D" + mode] = Outcome::click;
  }
  return fock_pattern_probability(st, dets, pattern);
}

}  // namespace spdcsim
