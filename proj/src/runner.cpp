#include "spdcsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "spdcsim/fock.hpp"

namespace spdcsim {

namespace {

double resolve(const Param& p, const std::map<std::string, double>& bindings,
               const char* what) {
  if (!p.is_symbol()) return p.value;
  const auto it = bindings.find(p.symbol);
  if (it == bindings.end()) {
    throw std::invalid_argument(std::string("unbound symbol '$") + p.symbol +
                                "' in " + what +
                                " (no sweep directive or override binds it)");
  }
  return it->second;
}

std::vector<double> sweep_values(const SweepDecl& sweep) {
  std::vector<double> values;
  values.reserve(sweep.count);
  if (sweep.count == 1) {
    values.push_back(sweep.from);
    return values;
  }
  for (int i = 0; i < sweep.count; ++i) {
    const double f = static_cast<double>(i) / (sweep.count - 1);
    if (sweep.log_scale) {
      values.push_back(sweep.from *
                       std::pow(sweep.to / sweep.from, f));
    } else {
      values.push_back(sweep.from + (sweep.to - sweep.from) * f);
    }
  }
  return values;
}

struct SweepGrid {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // per sweep

  std::size_t total() const {
    std::size_t n = 1;
    for (const auto& v : values) n *= v.size();
    return n;
  }

  // Row-major: the last declared sweep varies fastest.
  std::vector<std::pair<std::string, double>> at(std::size_t index) const {
    std::vector<std::pair<std::string, double>> point(names.size());
    for (std::size_t k = names.size(); k-- > 0;) {
      const auto& vals = values[k];
      point[k] = {names[k], vals[index % vals.size()]};
      index /= vals.size();
    }
    return point;
  }
};

SweepGrid build_grid(const CircuitProgram& program,
                     const EngineOptions& options) {
  SweepGrid grid;
  for (const auto& sweep : program.sweeps) {
    if (options.overrides.contains(sweep.symbol)) continue;  // pinned
    grid.names.push_back(sweep.symbol);
    grid.values.push_back(sweep_values(sweep));
  }
  return grid;
}

template <typename Fn>
void parallel_over_points(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<std::size_t>(threads, count);
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void for_each_point(std::size_t count, const EngineOptions& options,
                    const std::function<void(std::size_t)>& fn) {
  parallel_over_points(count, resolve_thread_count(options),
                       [&](std::size_t i) { fn(i); });
}

int resolve_thread_count(const EngineOptions& options) {
  if (options.deterministic) return 1;
  if (options.threads > 0) return options.threads;
  if (const char* env = std::getenv("THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

BoundCircuit bind_circuit(const CircuitProgram& program,
                          const std::map<std::string, double>& bindings) {
  std::vector<GaussianState> sources;
  sources.reserve(program.sources.size());
  for (const auto& src : program.sources) {
    switch (src.kind) {
      case SourceDecl::Kind::vacuum:
        sources.push_back(make_vacuum(static_cast<int>(src.modes.size()),
                                      src.modes));
        break;
      case SourceDecl::Kind::coherent:
        sources.push_back(make_coherent(resolve(src.re, bindings, "source"),
                                        resolve(src.im, bindings, "source"),
                                        src.modes[0]));
        break;
      case SourceDecl::Kind::thermal:
        sources.push_back(make_thermal(resolve(src.mu, bindings, "source"),
                                       src.modes[0]));
        break;
      case SourceDecl::Kind::tmsv:
        sources.push_back(make_tmsv(resolve(src.mu, bindings, "source"),
                                    src.sign, src.modes[0], src.modes[1]));
        break;
      case SourceDecl::Kind::sagnac:
        sources.push_back(sagnac_source(
            resolve(src.mu, bindings, "source"), src.sign,
            {src.modes[0], src.modes[1], src.modes[2], src.modes[3]}));
        break;
    }
  }
  GaussianState state = tensor(sources);

  for (const auto& op : program.ops) {
    const int n = state.n_modes();
    switch (op.kind) {
      case OpDecl::Kind::beam_splitter:
        state = apply_symplectic(
            state,
            beam_splitter(n, resolve(op.value, bindings, "bs"),
                          state.index_of(op.modes[0]),
                          state.index_of(op.modes[1])));
        break;
      case OpDecl::Kind::phase:
        state = apply_symplectic(
            state, phase_shift(n, resolve(op.value, bindings, "phase"),
                               state.index_of(op.modes[0])));
        break;
      case OpDecl::Kind::loss: {
        const double t = resolve(op.value, bindings, "loss");
        std::vector<int> modes;
        for (const auto& m : op.modes) modes.push_back(state.index_of(m));
        state = apply_loss(
            state, LossChannel::on_modes(
                       n, modes, std::vector<double>(modes.size(), t)));
        break;
      }
      case OpDecl::Kind::mismatch:
        state = expand_mode_mismatch(
            state, MismatchSpec{resolve(op.value, bindings, "mismatch"),
                                op.modes[0], op.modes[1]});
        break;
    }
  }

  BoundCircuit bound{std::move(state), {}, {}};
  for (const auto& det : program.detectors) {
    bound.detectors.push_back(
        DetectorSpec{det.id, det.modes, resolve(det.eta, bindings, "detector"),
                     resolve(det.nu, bindings, "detector")});
  }
  for (const auto& [id, outcome] : program.pattern) {
    bound.pattern[id] = outcome;
  }
  return bound;
}

std::vector<RunPoint> run_circuit(const CircuitProgram& program,
                                  const EngineOptions& options) {
  const SweepGrid grid = build_grid(program, options);
  const std::size_t count = grid.total();
  std::vector<RunPoint> out(count);
  const int threads = resolve_thread_count(options);

  parallel_over_points(count, threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    RunPoint point;
    point.params = grid.at(i);
    std::map<std::string, double> bindings = options.overrides;
    for (const auto& [name, value] : point.params) bindings[name] = value;
    const auto annotate = [&](const char* what) {
      std::string where = std::string(what) + " (at sweep point";
      for (const auto& [name, value] : point.params) {
        where += " " + name + "=" + std::to_string(value);
      }
      return where + ")";
    };
    try {
      const BoundCircuit bound = bind_circuit(program, bindings);
      point.probability =
          pattern_probability(bound.state, bound.detectors, bound.pattern);
      point.term_count = pattern_term_count(bound.detectors, bound.pattern);
    } catch (const numerical_degeneracy_error& e) {
      throw numerical_degeneracy_error(annotate(e.what()));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(annotate(e.what()));
    } catch (const std::exception& e) {
      throw std::runtime_error(annotate(e.what()));
    }
    point.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    out[i] = std::move(point);
  });
  return out;
}

namespace {

struct FockBuild {
  FockVector state;
  std::vector<double> pre_detection;  // per mode of `state`
  int tmsv_factors = 0;
  double max_lambda = 0.0;
};

// A loss is "trailing" for a mode when no later operation touches that
// mode again; it then folds into the detection weights instead of costing
// an environment mode.
bool loss_is_trailing(const CircuitProgram& program, std::size_t op_index,
                      const std::string& mode) {
  for (std::size_t k = op_index + 1; k < program.ops.size(); ++k) {
    for (const auto& m : program.ops[k].modes) {
      if (m == mode) return false;
    }
  }
  return true;
}

FockBuild build_fock(const CircuitProgram& program,
                     const std::map<std::string, double>& bindings,
                     int n_max) {
  FockBuild build{fock_vacuum(1, n_max, {"__seed"}), {}, 0, 0.0};
  bool first = true;
  const auto absorb = [&](FockVector&& next) {
    if (first) {
      build.state = std::move(next);
      first = false;
    } else {
      build.state = fock_tensor(build.state, next);
    }
  };
  const auto note_tmsv = [&](double mu, int factors) {
    build.tmsv_factors += factors;
    build.max_lambda =
        std::max(build.max_lambda, std::sqrt(mu_to_lambda2(mu)));
  };

  for (const auto& src : program.sources) {
    switch (src.kind) {
      case SourceDecl::Kind::vacuum:
        absorb(fock_vacuum(static_cast<int>(src.modes.size()), n_max,
                           src.modes));
        break;
      case SourceDecl::Kind::coherent:
        absorb(fock_coherent(resolve(src.re, bindings, "source"),
                             resolve(src.im, bindings, "source"), n_max,
                             src.modes[0]));
        break;
      case SourceDecl::Kind::thermal: {
        // Thermal input realized as a TMSV with a hidden partner mode that
        // no detector ever sees.
        const double mu = resolve(src.mu, bindings, "source");
        note_tmsv(mu, 1);
        absorb(fock_tmsv(std::sqrt(mu_to_lambda2(mu)), n_max, src.modes[0],
                         src.modes[0] + ".purifier"));
        break;
      }
      case SourceDecl::Kind::tmsv: {
        const double mu = resolve(src.mu, bindings, "source");
        note_tmsv(mu, 1);
        FockVector tm = fock_tmsv(std::sqrt(mu_to_lambda2(mu)), n_max,
                                  src.modes[0], src.modes[1]);
        if (src.sign == Sign::minus) {
          fock_phase_shift(tm, std::numbers::pi, 1);
        }
        absorb(std::move(tm));
        break;
      }
      case SourceDecl::Kind::sagnac: {
        const double mu = resolve(src.mu, bindings, "source");
        note_tmsv(mu, 2);
        FockVector sl = fock_sagnac(std::sqrt(mu_to_lambda2(mu)), n_max,
                                    {src.modes[0], src.modes[1],
                                     src.modes[2], src.modes[3]});
        if (src.sign == Sign::minus) {
          fock_phase_shift(sl, std::numbers::pi, 1);
          fock_phase_shift(sl, std::numbers::pi, 3);
        }
        absorb(std::move(sl));
        break;
      }
    }
  }

  std::map<std::string, double> pending;  // trailing loss per mode label
  for (std::size_t i = 0; i < program.ops.size(); ++i) {
    const OpDecl& op = program.ops[i];
    FockVector& st = build.state;
    switch (op.kind) {
      case OpDecl::Kind::beam_splitter:
        fock_beam_splitter(st, resolve(op.value, bindings, "bs"),
                           st.index_of(op.modes[0]),
                           st.index_of(op.modes[1]));
        break;
      case OpDecl::Kind::phase:
        fock_phase_shift(st, resolve(op.value, bindings, "phase"),
                         st.index_of(op.modes[0]));
        break;
      case OpDecl::Kind::loss: {
        const double t = resolve(op.value, bindings, "loss");
        if (t < 1.0) {
          for (const auto& m : op.modes) {
            if (loss_is_trailing(program, i, m)) {
              auto [it, inserted] = pending.emplace(m, t);
              if (!inserted) it->second *= t;
            } else {
              st = fock_loss_env(st, t, st.index_of(m), m + ".env");
            }
          }
        }
        break;
      }
      case OpDecl::Kind::mismatch: {
        const double xi = resolve(op.value, bindings, "mismatch");
        const MismatchSpec spec{xi, op.modes[0], op.modes[1]};
        const auto aux = spec.aux_labels();
        // Zero-capacity auxiliaries; the splitters grow them as needed.
        FockVector vac{std::vector<int>(4, 0), st.cap_limit,
                       {aux[0], aux[1], aux[2], aux[3]},
                       {std::complex<double>(1.0, 0.0)}};
        st = fock_tensor(st, vac);
        fock_beam_splitter(st, xi, st.index_of(aux[3]),
                           st.index_of(spec.pulse_b));
        fock_beam_splitter(st, xi, st.index_of(aux[0]),
                           st.index_of(spec.pulse_a));
        break;
      }
    }
  }
  build.pre_detection.assign(build.state.n_modes(), 1.0);
  for (const auto& [mode, t] : pending) {
    build.pre_detection[build.state.index_of(mode)] = t;
  }
  return build;
}

}  // namespace

std::vector<VerifyPoint> verify_circuit(const CircuitProgram& program,
                                        int n_max,
                                        const EngineOptions& options) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const SweepGrid grid = build_grid(program, options);
  const std::size_t count = grid.total();
  std::vector<VerifyPoint> out(count);
  const int threads = resolve_thread_count(options);

  parallel_over_points(count, threads, [&](std::size_t i) {
    VerifyPoint point;
    point.params = grid.at(i);
    std::map<std::string, double> bindings = options.overrides;
    for (const auto& [name, value] : point.params) bindings[name] = value;

    const BoundCircuit bound = bind_circuit(program, bindings);
    point.engine_probability =
        pattern_probability(bound.state, bound.detectors, bound.pattern);

    const FockBuild fock = build_fock(program, bindings, n_max);
    point.oracle_probability = fock_pattern_probability(
        fock.state, bound.detectors, bound.pattern, fock.pre_detection);

    point.abs_difference =
        std::abs(point.engine_probability - point.oracle_probability);
    int active_detectors = 0;
    for (const auto& det : bound.detectors) {
      const auto it = bound.pattern.find(det.id);
      if (it != bound.pattern.end() && it->second != Outcome::marginal) {
        ++active_detectors;
      }
    }
    point.truncation_bound = fock_truncation_bound(
        fock.tmsv_factors, active_detectors, fock.max_lambda, n_max);
    out[i] = std::move(point);
  });
  return out;
}

}  // namespace spdcsim
