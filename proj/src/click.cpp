#include "spdcsim/click.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace spdcsim {

namespace {

using float50 =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<50>>;
using float100 =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<100>>;

constexpr double kProbabilityTol = 1e-9;

double clamp_probability(double p, const char* where) {
  if (p >= -kProbabilityTol && p < 0.0) return 0.0;
  if (p > 1.0 && p <= 1.0 + kProbabilityTol) return 1.0;
  if (p < 0.0 || p > 1.0) {
    throw numerical_degeneracy_error(std::string(where) +
                                     " produced probability " +
                                     std::to_string(p));
  }
  return p;
}

Eigen::VectorXi quadrature_rows(int n_modes, std::span<const int> modes) {
  Eigen::VectorXi rows(2 * modes.size());
  for (size_t i = 0; i < modes.size(); ++i) {
    rows(static_cast<int>(i)) = modes[i];
    rows(static_cast<int>(modes.size() + i)) = n_modes + modes[i];
  }
  return rows;
}

// Tr[rho |0><0|^m] on the given modes, via Cholesky of (cov_sub + I)/2.
// The factorization cannot fail for a physical state, so failure raises.
double vacuum_overlap(const GaussianState& state, std::span<const int> modes) {
  if (modes.empty()) return 1.0;
  const Eigen::VectorXi rows = quadrature_rows(state.n_modes(), modes);
  const Eigen::MatrixXd a =
      0.5 * (state.cov(rows, rows) +
             Eigen::MatrixXd::Identity(rows.size(), rows.size()));
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw numerical_degeneracy_error(
        "cov + I not positive definite on requested modes");
  }
  double log_det = 0.0;
  for (int i = 0; i < rows.size(); ++i) {
    log_det += std::log(llt.matrixL()(i, i));
  }
  double exponent = -log_det;  // -(1/2) log det a
  const Eigen::VectorXd d = state.disp(rows);
  if (!d.isZero(0.0)) {
    // exp(-d^T (cov_sub + I)^{-1} d), written in terms of a = (cov_sub+I)/2.
    exponent -= 0.5 * d.dot(llt.solve(d));
  }
  return std::exp(exponent);
}

struct PreparedPattern {
  GaussianState state;                     // efficiencies folded in
  std::vector<const DetectorSpec*> click;  // sorted by id
  std::vector<int> base_modes;             // modes of all NoClick detectors
  double base_coefficient = 1.0;           // prod over NoClick of (1 - nu)
  std::vector<std::vector<int>> click_modes;
};

PreparedPattern prepare(const GaussianState& state,
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

  std::set<int> covered;
  std::vector<int> loss_modes;
  std::vector<double> loss_t;
  for (const auto& det : detectors) {
    if (det.modes.empty()) {
      throw std::invalid_argument("detector " + det.id + " covers no modes");
    }
    if (!(det.efficiency >= 0.0 && det.efficiency <= 1.0)) {
      throw std::invalid_argument("detector " + det.id +
                                  " efficiency out of range");
    }
    if (!(det.dark_rate >= 0.0 && det.dark_rate < 1.0)) {
      throw std::invalid_argument("detector " + det.id +
                                  " dark rate out of range");
    }
    for (const auto& label : det.modes) {
      const int idx = state.index_of(label);
      if (!covered.insert(idx).second) {
        throw std::invalid_argument("detectors overlap on mode " + label);
      }
      loss_modes.push_back(idx);
      loss_t.push_back(det.efficiency);
    }
  }

  PreparedPattern prep{
      apply_loss(state, LossChannel::on_modes(state.n_modes(), loss_modes,
                                              loss_t)),
      {},
      {},
      1.0,
      {}};

  for (const auto& det : detectors) {
    const auto it = pattern.find(det.id);
    const Outcome outcome =
        it == pattern.end() ? Outcome::marginal : it->second;
    if (outcome == Outcome::marginal) continue;
    std::vector<int> modes = prep.state.indices_of(det.modes);
    std::sort(modes.begin(), modes.end());
    if (outcome == Outcome::click) {
      prep.click.push_back(&det);
      prep.click_modes.push_back(std::move(modes));
    } else {
      prep.base_modes.insert(prep.base_modes.end(), modes.begin(),
                             modes.end());
      prep.base_coefficient *= 1.0 - det.dark_rate;
    }
  }

  // Fixed subset-enumeration order: bit i of the mask is the i-th click
  // detector after sorting by id.
  std::vector<size_t> order(prep.click.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return prep.click[a]->id < prep.click[b]->id;
  });
  std::vector<const DetectorSpec*> click_sorted;
  std::vector<std::vector<int>> modes_sorted;
  for (size_t i : order) {
    click_sorted.push_back(prep.click[i]);
    modes_sorted.push_back(std::move(prep.click_modes[i]));
  }
  prep.click = std::move(click_sorted);
  prep.click_modes = std::move(modes_sorted);
  std::sort(prep.base_modes.begin(), prep.base_modes.end());
  return prep;
}

template <typename Scalar>
Scalar pairwise_sum(std::span<const Scalar> terms) {
  if (terms.size() <= 8) {
    Scalar total = 0;
    for (const Scalar& t : terms) total += t;
    return total;
  }
  const size_t half = terms.size() / 2;
  return pairwise_sum(terms.subspan(0, half)) +
         pairwise_sum(terms.subspan(half));
}

// Vacuum overlap over an arbitrary scalar type: 1/prod(L_ii) from the
// Cholesky factor of (cov_sub + I)/2, times the displacement factor.
template <typename Scalar>
Scalar vacuum_overlap_as(const GaussianState& state,
                         std::span<const int> modes,
                         std::vector<Scalar>& scratch) {
  const size_t m = modes.size();
  if (m == 0) return Scalar(1);
  const int n_modes = state.n_modes();
  const size_t d = 2 * m;

  scratch.assign(d * d, Scalar(0));
  std::vector<int> rows(d);
  for (size_t i = 0; i < m; ++i) {
    rows[i] = modes[i];
    rows[m + i] = n_modes + modes[i];
  }
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      Scalar v = Scalar(state.cov(rows[i], rows[j]));
      if (i == j) v += Scalar(1);
      scratch[i * d + j] = v / Scalar(2);
    }
  }

  // In-place lower Cholesky.
  using std::sqrt;
  Scalar inv_det_sqrt = Scalar(1);
  for (size_t j = 0; j < d; ++j) {
    Scalar diag = scratch[j * d + j];
    for (size_t k = 0; k < j; ++k) {
      diag -= scratch[j * d + k] * scratch[j * d + k];
    }
    if (!(diag > Scalar(0))) {
      throw numerical_degeneracy_error(
          "cov + I not positive definite on requested modes");
    }
    const Scalar root = sqrt(diag);
    scratch[j * d + j] = root;
    inv_det_sqrt /= root;
    for (size_t i = j + 1; i < d; ++i) {
      Scalar s = scratch[i * d + j];
      for (size_t k = 0; k < j; ++k) {
        s -= scratch[i * d + k] * scratch[j * d + k];
      }
      scratch[i * d + j] = s / root;
    }
  }

  bool displaced = false;
  for (size_t i = 0; i < d; ++i) {
    if (state.disp(rows[i]) != 0.0) {
      displaced = true;
      break;
    }
  }
  if (!displaced) return inv_det_sqrt;

  // exponent -(1/2) ||L^{-1} disp||^2 = -disp^T (cov_sub+I)^{-1} disp.
  std::vector<Scalar> y(d);
  for (size_t i = 0; i < d; ++i) {
    Scalar s = Scalar(state.disp(rows[i]));
    for (size_t k = 0; k < i; ++k) s -= scratch[i * d + k] * y[k];
    y[i] = s / scratch[i * d + i];
  }
  Scalar q = Scalar(0);
  for (size_t i = 0; i < d; ++i) q += y[i] * y[i];
  using std::exp;
  return inv_det_sqrt * exp(-q / Scalar(2));
}

template <typename Scalar>
struct SubsetSum {
  double value = 0.0;
  bool reliable = false;
};

// Inclusion-exclusion evaluation at one precision. The alternating sum can
// cancel to far below the term magnitudes (deep-loss regimes reach
// probabilities ~1e-40), so the result is flagged unreliable when it falls
// under the rounding floor of the term magnitudes and the caller escalates
// to a wider scalar.
template <typename Scalar>
SubsetSum<Scalar> subset_sum_at(const PreparedPattern& prep) {
  const size_t n_click = prep.click.size();
  std::vector<Scalar> terms(size_t{1} << n_click);
  std::vector<Scalar> scratch;
  std::vector<int> modes;
  Scalar magnitude = Scalar(0);
  for (size_t mask = 0; mask < terms.size(); ++mask) {
    Scalar coeff = Scalar(prep.base_coefficient);
    modes = prep.base_modes;
    for (size_t i = 0; i < n_click; ++i) {
      if (mask & (size_t{1} << i)) {
        coeff *= Scalar(-(1.0 - prep.click[i]->dark_rate));
        modes.insert(modes.end(), prep.click_modes[i].begin(),
                     prep.click_modes[i].end());
      }
    }
    std::sort(modes.begin(), modes.end());
    terms[mask] = coeff * vacuum_overlap_as<Scalar>(prep.state, modes,
                                                    scratch);
    using std::abs;
    magnitude += abs(terms[mask]);
  }
  const Scalar total = pairwise_sum(std::span<const Scalar>(terms));
  const Scalar floor = magnitude *
                       Scalar(std::numeric_limits<Scalar>::epsilon()) *
                       Scalar(4096);
  using std::abs;
  SubsetSum<Scalar> out;
  out.value = static_cast<double>(total);
  out.reliable = abs(total) >= floor;
  return out;
}

}  // namespace

double prob_no_click_all(const GaussianState& state,
                         std::span<const std::string> modes) {
  if (modes.empty()) {
    throw std::invalid_argument("no-click probability needs at least one mode");
  }
  std::vector<int> idx = state.indices_of(modes);
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw std::invalid_argument("duplicate modes in no-click set");
  }
  return clamp_probability(vacuum_overlap(state, idx), "prob_no_click_all");
}

double prob_on(const GaussianState& state, const std::string& mode) {
  std::array<std::string, 1> modes{mode};
  return clamp_probability(1.0 - prob_no_click_all(state, modes), "prob_on");
}

double pattern_probability(const GaussianState& state,
                           std::span<const DetectorSpec> detectors,
                           const ClickPattern& pattern) {
  const PreparedPattern prep = prepare(state, detectors, pattern);
  if (prep.click.size() > 30) {
    throw std::invalid_argument(
        "more than 30 click detectors: term count 2^n is impractical");
  }
  const SubsetSum<double> fast = subset_sum_at<double>(prep);
  if (fast.reliable) {
    return clamp_probability(fast.value, "pattern_probability");
  }
  const SubsetSum<float50> mid = subset_sum_at<float50>(prep);
  if (mid.reliable) {
    return clamp_probability(mid.value, "pattern_probability");
  }
  const SubsetSum<float100> wide = subset_sum_at<float100>(prep);
  if (wide.reliable) {
    return clamp_probability(wide.value, "pattern_probability");
  }
  // Below the 100-digit cancellation floor the probability is
  // indistinguishable from zero.
  return 0.0;
}

double pattern_probability_bruteforce_subsets(
    const GaussianState& state, std::span<const DetectorSpec> detectors,
    const ClickPattern& pattern) {
  // Independent route: expand each detector operator into (coefficient,
  // mode-set) atoms, take the Cartesian product, and evaluate each product
  // term with a plain LU determinant.
  const PreparedPattern folded = prepare(state, detectors, pattern);
  const GaussianState& st = folded.state;

  struct Atom {
    double coefficient;
    std::vector<int> modes;
  };
  std::vector<std::vector<Atom>> factors;
  for (const auto& det : detectors) {
    const auto it = pattern.find(det.id);
    const Outcome outcome =
        it == pattern.end() ? Outcome::marginal : it->second;
    if (outcome == Outcome::marginal) continue;
    std::vector<int> modes = st.indices_of(det.modes);
    if (outcome == Outcome::click) {
      factors.push_back(
          {Atom{1.0, {}}, Atom{-(1.0 - det.dark_rate), modes}});
    } else {
      factors.push_back({Atom{1.0 - det.dark_rate, modes}});
    }
  }

  double total = 0.0;
  std::vector<size_t> choice(factors.size(), 0);
  while (true) {
    double coeff = 1.0;
    std::vector<int> modes;
    for (size_t i = 0; i < factors.size(); ++i) {
      const Atom& atom = factors[i][choice[i]];
      coeff *= atom.coefficient;
      modes.insert(modes.end(), atom.modes.begin(), atom.modes.end());
    }
    double overlap = 1.0;
    if (!modes.empty()) {
      const Eigen::VectorXi rows = quadrature_rows(st.n_modes(), modes);
      const Eigen::MatrixXd gi =
          st.cov(rows, rows) +
          Eigen::MatrixXd::Identity(rows.size(), rows.size());
      const double det = gi.determinant();
      if (!(det > 0.0)) {
        throw numerical_degeneracy_error("non-positive determinant");
      }
      overlap = std::pow(2.0, static_cast<double>(modes.size())) /
                std::sqrt(det);
      const Eigen::VectorXd d = st.disp(rows);
      if (!d.isZero(0.0)) {
        overlap *= std::exp(-d.dot(gi.lu().solve(d)));
      }
    }
    total += coeff * overlap;

    size_t pos = 0;
    while (pos < factors.size() && ++choice[pos] == factors[pos].size()) {
      choice[pos] = 0;
      ++pos;
    }
    if (pos == factors.size()) break;
  }
  return clamp_probability(total, "pattern_probability_bruteforce_subsets");
}

std::uint64_t pattern_term_count(std::span<const DetectorSpec> detectors,
                                 const ClickPattern& pattern) {
  std::uint64_t clicks = 0;
  for (const auto& det : detectors) {
    const auto it = pattern.find(det.id);
    if (it != pattern.end() && it->second == Outcome::click) ++clicks;
  }
  return std::uint64_t{1} << clicks;
}

}  // namespace spdcsim
