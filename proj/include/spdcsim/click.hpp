#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spdcsim/gaussian.hpp"

namespace spdcsim {

/// One on/off detector. A detector may cover several physical modes (it
/// clicks unless *all* of them are empty). Efficiency is folded in as a
/// loss channel on the covered modes; dark counts scale the off-operator
/// by (1 - nu).
struct DetectorSpec {
  std::string id;
  std::vector<std::string> modes;
  double efficiency = 1.0;
  double dark_rate = 0.0;
};

enum class Outcome { click, no_click, marginal };

/// Required outcome per detector id. Detectors absent from the map are an
/// error; Marginal detectors contribute no operator (their modes are traced
/// out).
using ClickPattern = std::map<std::string, Outcome, std::less<>>;

/// Tr[rho |0><0|^(x)m] over the given modes: 2^m / sqrt(det(cov_sub + I)),
/// times the displacement factor when disp != 0.
double prob_no_click_all(const GaussianState& state,
                         std::span<const std::string> modes);

/// P_on = 1 - 2/sqrt(det(cov_sub + I)) for a single ideal detector.
double prob_on(const GaussianState& state, const std::string& mode);

/// Exact probability of the requested click/no-click pattern, by
/// inclusion-exclusion over the Click detectors. Deterministic: subsets are
/// enumerated in lexicographic order over detector-id-sorted bitmasks and
/// summed with a fixed pairwise tree.
double pattern_probability(const GaussianState& state,
                           std::span<const DetectorSpec> detectors,
                           const ClickPattern& pattern);

/// Reference evaluator with the same contract, computed by expanding every
/// detector operator independently (Cartesian product of per-detector
/// atoms, naive LU determinants, left-to-right summation). Exists to
/// cross-check pattern_probability; do not use it for anything large.
double pattern_probability_bruteforce_subsets(
    const GaussianState& state, std::span<const DetectorSpec> detectors,
    const ClickPattern& pattern);

/// Number of inclusion-exclusion terms: 2^(#Click detectors).
std::uint64_t pattern_term_count(std::span<const DetectorSpec> detectors,
                                 const ClickPattern& pattern);

}  // namespace spdcsim
