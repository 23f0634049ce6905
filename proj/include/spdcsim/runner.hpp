#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spdcsim/circuit.hpp"

namespace spdcsim {

struct EngineOptions {
  int threads = 0;           // 0: THREADS env var or hardware concurrency
  bool deterministic = false;  // force sequential sweep evaluation
  std::map<std::string, double> overrides;  // fixed symbol bindings
};

/// One evaluated sweep point.
struct RunPoint {
  std::vector<std::pair<std::string, double>> params;  // declaration order
  double probability = 0.0;
  std::uint64_t term_count = 0;  // 2^(#Click detectors)
  double wall_seconds = 0.0;
};

/// Evaluate the pattern probability at every sweep point (Cartesian product
/// of the sweep directives, row-major in declaration order). Points are
/// independent and may be evaluated by a worker pool; the output order and
/// the values are deterministic either way.
std::vector<RunPoint> run_circuit(const CircuitProgram& program,
                                  const EngineOptions& options = {});

/// Build the Gaussian state of a circuit at fixed symbol values and return
/// it together with the detector list (used by the CLI and by tests).
struct BoundCircuit {
  GaussianState state;
  std::vector<DetectorSpec> detectors;
  ClickPattern pattern;
};
BoundCircuit bind_circuit(const CircuitProgram& program,
                          const std::map<std::string, double>& bindings);

struct VerifyPoint {
  std::vector<std::pair<std::string, double>> params;
  double engine_probability = 0.0;
  double oracle_probability = 0.0;
  double abs_difference = 0.0;
  double truncation_bound = 0.0;
};

/// Re-evaluate every sweep point in the truncated photon-number basis and
/// report the discrepancy against the Gaussian engine together with the
/// a-priori truncation bound.
std::vector<VerifyPoint> verify_circuit(const CircuitProgram& program,
                                        int n_max,
                                        const EngineOptions& options = {});

/// Number of worker threads implied by options and the THREADS env var.
int resolve_thread_count(const EngineOptions& options);

/// Run fn(0..count-1) on a worker pool sized per the options; results must
/// be written to disjoint slots. Exceptions propagate to the caller.
void for_each_point(std::size_t count, const EngineOptions& options,
                    const std::function<void(std::size_t)>& fn);

}  // namespace spdcsim
