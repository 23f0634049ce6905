#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdcsim/click.hpp"
#include "spdcsim/gaussian.hpp"

namespace spdcsim {

// Line-oriented circuit description language. One declaration per line,
// `#` starts a comment, fields are whitespace-separated `key=value` tokens.
//
//   source tmsv mu=0.1 sign=+ modes=a,b
//   source sagnac mu=$mu sign=+ modes=ah,av,bh,bv
//   source vacuum modes=c
//   source coherent re=0.5 im=0.0 modes=c
//   source thermal mu=0.2 modes=c
//   bs t=0.5 modes=a,b
//   phase phi=1.57 modes=a
//   loss t=0.9 modes=a,b
//   mismatch xi=0.9878 modes=a,b
//   detector D1 eta=0.68 nu=0 modes=a,a.2,a.3
//   pattern D1=click D2=noclick D3=marginal
//   sweep $mu log 1e-3 0.2 50
//
// Scalar fields take either a literal or a `$name` symbol bound by a sweep
// directive (or a command-line override). A `mismatch` on modes (a,b)
// creates the auxiliary modes a.2, b.2, a.3, b.3, which later lines may
// reference.

struct SourceLocation {
  int line = 0;
  int column = 0;
};

/// A scalar that is either a literal or a reference to a swept symbol.
struct Param {
  double value = 0.0;
  std::string symbol;

  bool is_symbol() const { return !symbol.empty(); }
  static Param literal(double v) { return Param{v, {}}; }

  friend bool operator==(const Param& a, const Param& b) {
    return a.value == b.value && a.symbol == b.symbol;
  }
};

struct SourceDecl {
  enum class Kind { vacuum, coherent, thermal, tmsv, sagnac };
  Kind kind = Kind::vacuum;
  Param mu;
  Param re;
  Param im;
  Sign sign = Sign::plus;
  std::vector<std::string> modes;
  SourceLocation loc;

  friend bool operator==(const SourceDecl& a, const SourceDecl& b) {
    return a.kind == b.kind && a.mu == b.mu && a.re == b.re && a.im == b.im &&
           a.sign == b.sign && a.modes == b.modes;
  }
};

struct OpDecl {
  enum class Kind { beam_splitter, phase, loss, mismatch };
  Kind kind = Kind::beam_splitter;
  Param value;  // t, phi, t, xi respectively
  std::vector<std::string> modes;
  SourceLocation loc;

  friend bool operator==(const OpDecl& a, const OpDecl& b) {
    return a.kind == b.kind && a.value == b.value && a.modes == b.modes;
  }
};

struct DetectorDecl {
  std::string id;
  Param eta = Param::literal(1.0);
  Param nu = Param::literal(0.0);
  std::vector<std::string> modes;
  SourceLocation loc;

  friend bool operator==(const DetectorDecl& a, const DetectorDecl& b) {
    return a.id == b.id && a.eta == b.eta && a.nu == b.nu &&
           a.modes == b.modes;
  }
};

struct SweepDecl {
  std::string symbol;
  bool log_scale = false;
  double from = 0.0;
  double to = 0.0;
  int count = 0;
  SourceLocation loc;

  friend bool operator==(const SweepDecl& a, const SweepDecl& b) {
    return a.symbol == b.symbol && a.log_scale == b.log_scale &&
           a.from == b.from && a.to == b.to && a.count == b.count;
  }
};

struct CircuitProgram {
  std::vector<SourceDecl> sources;
  std::vector<OpDecl> ops;
  std::vector<DetectorDecl> detectors;
  std::map<std::string, Outcome> pattern;  // detectors absent => marginal
  std::vector<SweepDecl> sweeps;

  friend bool operator==(const CircuitProgram& a, const CircuitProgram& b) {
    return a.sources == b.sources && a.ops == b.ops &&
           a.detectors == b.detectors && a.pattern == b.pattern &&
           a.sweeps == b.sweeps;
  }
};

/// Parse and validate a circuit. Throws parse_error with a source location
/// on any malformed input; never crashes on arbitrary text.
CircuitProgram parse_circuit(std::string_view text);

/// Canonical text form; parse_circuit(circuit_to_text(p)) == p.
std::string circuit_to_text(const CircuitProgram& program);

}  // namespace spdcsim
