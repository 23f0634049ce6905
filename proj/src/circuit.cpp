#include "spdcsim/circuit.hpp"
#include <span>

#include <charconv>
#include <cstdio>
#include <set>

namespace spdcsim {

namespace {

struct Token {
  std::string_view text;
  int line;
  int column;
};

[[noreturn]] void fail(const Token& tok, const std::string& message) {
  throw parse_error(tok.line, tok.column, message);
}

std::vector<std::vector<Token>> tokenize(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  int line_no = 1;
  size_t line_start = 0;
  while (line_start <= text.size()) {
    const size_t eol = text.find('\n', line_start);
    const std::string_view line =
        text.substr(line_start, eol == std::string_view::npos
                                    ? std::string_view::npos
                                    : eol - line_start);
    std::vector<Token> tokens;
    size_t i = 0;
    while (i < line.size()) {
      if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
        ++i;
        continue;
      }
      if (line[i] == '#') break;
      const size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
             line[i] != '\r' && line[i] != '#') {
        ++i;
      }
      tokens.push_back(Token{line.substr(start, i - start), line_no,
                             static_cast<int>(start) + 1});
    }
    if (!tokens.empty()) lines.push_back(std::move(tokens));
    if (eol == std::string_view::npos) break;
    line_start = eol + 1;
    ++line_no;
  }
  return lines;
}

double parse_number(const Token& tok, std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    fail(tok, "expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

Param parse_param(const Token& tok, std::string_view text) {
  if (!text.empty() && text.front() == '$') {
    if (text.size() == 1) fail(tok, "empty symbol name");
    return Param{0.0, std::string(text.substr(1))};
  }
  return Param::literal(parse_number(tok, text));
}

std::vector<std::string> parse_mode_list(const Token& tok,
                                         std::string_view text) {
  std::vector<std::string> modes;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos
                               ? std::string_view::npos
                               : comma - start);
    if (item.empty()) fail(tok, "empty mode name in list");
    modes.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (modes.empty()) fail(tok, "empty mode list");
  return modes;
}

// key=value fields after the leading keywords.
struct Fields {
  std::map<std::string, Token, std::less<>> values;

  static Fields gather(std::span<const Token> tokens) {
    Fields f;
    for (const Token& tok : tokens) {
      const size_t eq = tok.text.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        fail(tok, "expected key=value, got '" + std::string(tok.text) + "'");
      }
      const std::string key(tok.text.substr(0, eq));
      Token value = tok;
      value.text = tok.text.substr(eq + 1);
      value.column += static_cast<int>(eq) + 1;
      if (!f.values.emplace(key, value).second) {
        fail(tok, "duplicate field '" + key + "'");
      }
    }
    return f;
  }

  const Token& require(const Token& where, std::string_view key) const {
    const auto it = values.find(key);
    if (it == values.end()) {
      fail(where, "missing required field '" + std::string(key) + "'");
    }
    return it->second;
  }

  const Token* find(std::string_view key) const {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  }

  void reject_unknown(std::initializer_list<std::string_view> known) const {
    for (const auto& [key, tok] : values) {
      bool ok = false;
      for (const auto& k : known) {
        if (key == k) {
          ok = true;
          break;
        }
      }
      if (!ok) fail(tok, "unknown field '" + key + "'");
    }
  }
};

Sign parse_sign(const Token& tok) {
  if (tok.text == "+") return Sign::plus;
  if (tok.text == "-") return Sign::minus;
  fail(tok, "sign must be + or -");
}

SourceDecl parse_source(std::span<const Token> tokens) {
  const Token& kw = tokens[0];
  if (tokens.size() < 2) fail(kw, "source needs a kind");
  const Token& kind_tok = tokens[1];
  SourceDecl decl;
  decl.loc = SourceLocation{kw.line, kw.column};
  const Fields f = Fields::gather(tokens.subspan(2));

  const auto modes_of = [&](size_t expected) {
    decl.modes = parse_mode_list(f.require(kind_tok, "modes"),
                                 f.require(kind_tok, "modes").text);
    if (decl.modes.size() != expected) {
      fail(f.require(kind_tok, "modes"),
           "expected " + std::to_string(expected) + " mode(s)");
    }
  };

  if (kind_tok.text == "vacuum") {
    decl.kind = SourceDecl::Kind::vacuum;
    f.reject_unknown({"modes"});
    decl.modes = parse_mode_list(f.require(kind_tok, "modes"),
                                 f.require(kind_tok, "modes").text);
  } else if (kind_tok.text == "coherent") {
    decl.kind = SourceDecl::Kind::coherent;
    f.reject_unknown({"re", "im", "modes"});
    decl.re = parse_param(f.require(kind_tok, "re"),
                          f.require(kind_tok, "re").text);
    decl.im = parse_param(f.require(kind_tok, "im"),
                          f.require(kind_tok, "im").text);
    modes_of(1);
  } else if (kind_tok.text == "thermal") {
    decl.kind = SourceDecl::Kind::thermal;
    f.reject_unknown({"mu", "modes"});
    decl.mu = parse_param(f.require(kind_tok, "mu"),
                          f.require(kind_tok, "mu").text);
    modes_of(1);
  } else if (kind_tok.text == "tmsv") {
    decl.kind = SourceDecl::Kind::tmsv;
    f.reject_unknown({"mu", "sign", "modes"});
    decl.mu = parse_param(f.require(kind_tok, "mu"),
                          f.require(kind_tok, "mu").text);
    if (const Token* s = f.find("sign")) decl.sign = parse_sign(*s);
    modes_of(2);
  } else if (kind_tok.text == "sagnac") {
    decl.kind = SourceDecl::Kind::sagnac;
    f.reject_unknown({"mu", "sign", "modes"});
    decl.mu = parse_param(f.require(kind_tok, "mu"),
                          f.require(kind_tok, "mu").text);
    if (const Token* s = f.find("sign")) decl.sign = parse_sign(*s);
    modes_of(4);
  } else {
    fail(kind_tok,
         "unknown source kind '" + std::string(kind_tok.text) + "'");
  }
  return decl;
}

OpDecl parse_op(std::span<const Token> tokens) {
  const Token& kw = tokens[0];
  OpDecl decl;
  decl.loc = SourceLocation{kw.line, kw.column};
  const Fields f = Fields::gather(tokens.subspan(1));

  const auto value_field = [&](std::string_view key) {
    decl.value = parse_param(f.require(kw, key), f.require(kw, key).text);
  };
  const auto modes_field = [&](size_t min_count, size_t max_count) {
    const Token& tok = f.require(kw, "modes");
    decl.modes = parse_mode_list(tok, tok.text);
    if (decl.modes.size() < min_count || decl.modes.size() > max_count) {
      fail(tok, "wrong number of modes for this operation");
    }
  };

  if (kw.text == "bs") {
    decl.kind = OpDecl::Kind::beam_splitter;
    f.reject_unknown({"t", "modes"});
    value_field("t");
    modes_field(2, 2);
  } else if (kw.text == "phase") {
    decl.kind = OpDecl::Kind::phase;
    f.reject_unknown({"phi", "modes"});
    value_field("phi");
    modes_field(1, 1);
  } else if (kw.text == "loss") {
    decl.kind = OpDecl::Kind::loss;
    f.reject_unknown({"t", "modes"});
    value_field("t");
    modes_field(1, 64);
  } else if (kw.text == "mismatch") {
    decl.kind = OpDecl::Kind::mismatch;
    f.reject_unknown({"xi", "modes"});
    value_field("xi");
    modes_field(2, 2);
  } else {
    fail(kw, "unknown operation '" + std::string(kw.text) + "'");
  }
  return decl;
}

DetectorDecl parse_detector(std::span<const Token> tokens) {
  const Token& kw = tokens[0];
  if (tokens.size() < 2) fail(kw, "detector needs an id");
  DetectorDecl decl;
  decl.loc = SourceLocation{kw.line, kw.column};
  decl.id = std::string(tokens[1].text);
  if (decl.id.find('=') != std::string::npos) {
    fail(tokens[1], "detector id must come before the key=value fields");
  }
  const Fields f = Fields::gather(tokens.subspan(2));
  f.reject_unknown({"eta", "nu", "modes"});
  if (const Token* t = f.find("eta")) decl.eta = parse_param(*t, t->text);
  if (const Token* t = f.find("nu")) decl.nu = parse_param(*t, t->text);
  const Token& modes = f.require(kw, "modes");
  decl.modes = parse_mode_list(modes, modes.text);
  return decl;
}

void parse_pattern(std::span<const Token> tokens,
                   std::map<std::string, Outcome>& pattern) {
  const Token& kw = tokens[0];
  if (tokens.size() < 2) fail(kw, "pattern needs at least one assignment");
  for (const Token& tok : tokens.subspan(1)) {
    const size_t eq = tok.text.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      fail(tok, "expected id=outcome");
    }
    const std::string id(tok.text.substr(0, eq));
    const std::string_view outcome = tok.text.substr(eq + 1);
    Outcome value;
    if (outcome == "click") {
      value = Outcome::click;
    } else if (outcome == "noclick") {
      value = Outcome::no_click;
    } else if (outcome == "marginal") {
      value = Outcome::marginal;
    } else {
      fail(tok, "outcome must be click, noclick or marginal");
    }
    if (!pattern.emplace(id, value).second) {
      fail(tok, "duplicate pattern entry for detector '" + id + "'");
    }
  }
}

SweepDecl parse_sweep(std::span<const Token> tokens) {
  const Token& kw = tokens[0];
  if (tokens.size() != 6) {
    fail(kw, "sweep syntax: sweep $name lin|log FROM TO COUNT");
  }
  SweepDecl decl;
  decl.loc = SourceLocation{kw.line, kw.column};
  if (tokens[1].text.size() < 2 || tokens[1].text.front() != '$') {
    fail(tokens[1], "sweep parameter must be a $symbol");
  }
  decl.symbol = std::string(tokens[1].text.substr(1));
  if (tokens[2].text == "lin") {
    decl.log_scale = false;
  } else if (tokens[2].text == "log") {
    decl.log_scale = true;
  } else {
    fail(tokens[2], "sweep scale must be lin or log");
  }
  decl.from = parse_number(tokens[3], tokens[3].text);
  decl.to = parse_number(tokens[4], tokens[4].text);
  const double count = parse_number(tokens[5], tokens[5].text);
  if (count < 0 || count != static_cast<int>(count) || count > 1e9) {
    fail(tokens[5], "sweep count must be a non-negative integer");
  }
  decl.count = static_cast<int>(count);
  if (decl.log_scale && (decl.from <= 0.0 || decl.to <= 0.0)) {
    fail(tokens[3], "log sweep endpoints must be positive");
  }
  return decl;
}

void validate(const CircuitProgram& program, std::string_view text) {
  (void)text;
  const SourceLocation nowhere{0, 0};
  const auto fail_at = [](const SourceLocation& loc,
                          const std::string& message) {
    throw parse_error(loc.line, loc.column, message);
  };

  if (program.sources.empty()) {
    fail_at(nowhere, "circuit declares no sources");
  }

  std::set<std::string> live;
  for (const auto& src : program.sources) {
    for (const auto& mode : src.modes) {
      if (!live.insert(mode).second) {
        fail_at(src.loc, "mode '" + mode + "' declared more than once");
      }
    }
  }
  for (const auto& op : program.ops) {
    std::set<std::string_view> seen;
    for (const auto& mode : op.modes) {
      if (!live.contains(mode)) {
        fail_at(op.loc, "undeclared mode '" + mode + "'");
      }
      if (!seen.insert(mode).second) {
        fail_at(op.loc, "repeated mode '" + mode + "'");
      }
    }
    if (op.kind == OpDecl::Kind::mismatch) {
      const MismatchSpec spec{0.0, op.modes[0], op.modes[1]};
      for (const auto& aux : spec.aux_labels()) {
        if (!live.insert(aux).second) {
          fail_at(op.loc, "mismatch auxiliary mode '" + aux +
                              "' collides with an existing mode");
        }
      }
    }
  }

  std::set<std::string> detector_ids;
  std::set<std::string> detected_modes;
  for (const auto& det : program.detectors) {
    if (!detector_ids.insert(det.id).second) {
      fail_at(det.loc, "duplicate detector '" + det.id + "'");
    }
    for (const auto& mode : det.modes) {
      if (!live.contains(mode)) {
        fail_at(det.loc, "detector '" + det.id + "' references undeclared mode '" +
                             mode + "'");
      }
      if (!detected_modes.insert(mode).second) {
        fail_at(det.loc, "mode '" + mode + "' is covered by two detectors");
      }
    }
  }
  for (const auto& [id, outcome] : program.pattern) {
    (void)outcome;
    if (!detector_ids.contains(id)) {
      fail_at(nowhere, "pattern references unknown detector '" + id + "'");
    }
  }

  // Sweeps must bind symbols that appear somewhere; symbols may also be
  // bound by command-line overrides, so unbound symbols are checked at run
  // time, not here.
  std::set<std::string> symbols;
  const auto collect = [&](const Param& p) {
    if (p.is_symbol()) symbols.insert(p.symbol);
  };
  for (const auto& src : program.sources) {
    collect(src.mu);
    collect(src.re);
    collect(src.im);
  }
  for (const auto& op : program.ops) collect(op.value);
  for (const auto& det : program.detectors) {
    collect(det.eta);
    collect(det.nu);
  }
  std::set<std::string> swept;
  for (const auto& sweep : program.sweeps) {
    if (!symbols.contains(sweep.symbol)) {
      fail_at(sweep.loc,
              "sweep parameter '$" + sweep.symbol + "' is never used");
    }
    if (!swept.insert(sweep.symbol).second) {
      fail_at(sweep.loc, "parameter '$" + sweep.symbol + "' swept twice");
    }
  }
}

}  // namespace

CircuitProgram parse_circuit(std::string_view text) {
  CircuitProgram program;
  bool pattern_seen = false;
  for (const auto& tokens : tokenize(text)) {
    const Token& kw = tokens[0];
    if (kw.text == "source") {
      program.sources.push_back(parse_source(tokens));
    } else if (kw.text == "bs" || kw.text == "phase" || kw.text == "loss" ||
               kw.text == "mismatch") {
      program.ops.push_back(parse_op(tokens));
    } else if (kw.text == "detector") {
      program.detectors.push_back(parse_detector(tokens));
    } else if (kw.text == "pattern") {
      if (pattern_seen) fail(kw, "more than one pattern line");
      pattern_seen = true;
      parse_pattern(tokens, program.pattern);
    } else if (kw.text == "sweep") {
      program.sweeps.push_back(parse_sweep(tokens));
    } else {
      fail(kw, "unknown keyword '" + std::string(kw.text) + "'");
    }
  }
  validate(program, text);
  return program;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_param(const Param& p) {
  if (p.is_symbol()) return "$" + p.symbol;
  return format_number(p.value);
}

std::string join_modes(const std::vector<std::string>& modes) {
  std::string out;
  for (size_t i = 0; i < modes.size(); ++i) {
    if (i) out += ',';
    out += modes[i];
  }
  return out;
}

}  // namespace

std::string circuit_to_text(const CircuitProgram& program) {
  std::string out;
  for (const auto& src : program.sources) {
    out += "source ";
    switch (src.kind) {
      case SourceDecl::Kind::vacuum:
        out += "vacuum";
        break;
      case SourceDecl::Kind::coherent:
        out += "coherent re=" + format_param(src.re) +
               " im=" + format_param(src.im);
        break;
      case SourceDecl::Kind::thermal:
        out += "thermal mu=" + format_param(src.mu);
        break;
      case SourceDecl::Kind::tmsv:
        out += "tmsv mu=" + format_param(src.mu) + " sign=" +
               (src.sign == Sign::plus ? "+" : "-");
        break;
      case SourceDecl::Kind::sagnac:
        out += "sagnac mu=" + format_param(src.mu) + " sign=" +
               (src.sign == Sign::plus ? "+" : "-");
        break;
    }
    out += " modes=" + join_modes(src.modes) + "\n";
  }
  for (const auto& op : program.ops) {
    switch (op.kind) {
      case OpDecl::Kind::beam_splitter:
        out += "bs t=" + format_param(op.value);
        break;
      case OpDecl::Kind::phase:
        out += "phase phi=" + format_param(op.value);
        break;
      case OpDecl::Kind::loss:
        out += "loss t=" + format_param(op.value);
        break;
      case OpDecl::Kind::mismatch:
        out += "mismatch xi=" + format_param(op.value);
        break;
    }
    out += " modes=" + join_modes(op.modes) + "\n";
  }
  for (const auto& det : program.detectors) {
    out += "detector " + det.id + " eta=" + format_param(det.eta) +
           " nu=" + format_param(det.nu) + " modes=" + join_modes(det.modes) +
           "\n";
  }
  if (!program.pattern.empty()) {
    out += "pattern";
    for (const auto& [id, outcome] : program.pattern) {
      out += " " + id + "=";
      switch (outcome) {
        case Outcome::click:
          out += "click";
          break;
        case Outcome::no_click:
          out += "noclick";
          break;
        case Outcome::marginal:
          out += "marginal";
          break;
      }
    }
    out += "\n";
  }
  for (const auto& sweep : program.sweeps) {
    out += "sweep $" + sweep.symbol + (sweep.log_scale ? " log " : " lin ") +
           format_number(sweep.from) + " " + format_number(sweep.to) + " " +
           std::to_string(sweep.count) + "\n";
  }
  return out;
}

}  // namespace spdcsim
