#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spikenet/campaign.hpp"

namespace spikenet {

enum class ConfigErrc {
  syntax = 1,
  unknown_key,
  duplicate_key,
  missing_key,
  type_mismatch,
  bad_dimension,
  even_extent,
  extent_count,
  nonpositive_gamma,
  unknown_activation,
  invalid_value,
  sweep_conflict,
};

inline std::string_view to_string(ConfigErrc c) {
  switch (c) {
    case ConfigErrc::syntax: return "syntax";
    case ConfigErrc::unknown_key: return "unknown_key";
    case ConfigErrc::duplicate_key: return "duplicate_key";
    case ConfigErrc::missing_key: return "missing_key";
    case ConfigErrc::type_mismatch: return "type_mismatch";
    case ConfigErrc::bad_dimension: return "bad_dimension";
    case ConfigErrc::even_extent: return "even_extent";
    case ConfigErrc::extent_count: return "extent_count";
    case ConfigErrc::nonpositive_gamma: return "nonpositive_gamma";
    case ConfigErrc::unknown_activation: return "unknown_activation";
    case ConfigErrc::invalid_value: return "invalid_value";
    case ConfigErrc::sweep_conflict: return "sweep_conflict";
  }
  return "?";
}

class ConfigError : public std::runtime_error {
public:
  ConfigError(ConfigErrc code, std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        code_(code),
        line_(line) {}

  ConfigErrc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }  // 0 when not tied to a line

private:
  ConfigErrc code_;
  std::size_t line_;
};

namespace detail {

// A scalar is kept as its source token; lists hold scalar tokens.
struct ConfigValue {
  std::variant<std::string, std::vector<std::string>> v;
  bool quoted = false;
  std::size_t line = 0;
};

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string_view strip_comment(std::string_view s) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_quotes = !in_quotes;
    if (!in_quotes && (s[i] == '#' || s[i] == ';')) return s.substr(0, i);
  }
  return s;
}

inline bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

inline std::string parse_scalar(std::string_view tok, std::size_t line, bool& quoted) {
  tok = trim(tok);
  quoted = false;
  if (tok.empty()) throw ConfigError(ConfigErrc::syntax, line, "missing value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      throw ConfigError(ConfigErrc::syntax, line, "unterminated string");
    quoted = true;
    return std::string(tok.substr(1, tok.size() - 2));
  }
  for (char c : tok)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '[' || c == ']' || c == ',' || c == '=')
      throw ConfigError(ConfigErrc::syntax, line, "malformed value '" + std::string(tok) + "'");
  return std::string(tok);
}

using Table = std::map<std::string, ConfigValue>;

inline std::map<std::string, Table> parse_tables(std::string_view text) {
  std::map<std::string, Table> tables;
  tables[""];
  std::string section;
  std::set<std::string> seen_sections;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(ConfigErrc::syntax, line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "activation")
        throw ConfigError(ConfigErrc::unknown_key, line_no, "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second)
        throw ConfigError(ConfigErrc::duplicate_key, line_no, "duplicate section [" + section + "]");
      tables[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(ConfigErrc::syntax, line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) throw ConfigError(ConfigErrc::syntax, line_no, "malformed key");
    const auto rhs = trim(line.substr(eq + 1));
    ConfigValue value;
    value.line = line_no;
    if (!rhs.empty() && rhs.front() == '[') {
      if (rhs.back() != ']') throw ConfigError(ConfigErrc::syntax, line_no, "unterminated list");
      std::vector<std::string> items;
      const auto body = trim(rhs.substr(1, rhs.size() - 2));
      if (!body.empty()) {
        std::size_t start = 0;
        for (;;) {
          const auto comma = body.find(',', start);
          bool q = false;
          items.push_back(parse_scalar(body.substr(start, comma - start), line_no, q));
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
      }
      value.v = std::move(items);
    } else {
      value.v = parse_scalar(rhs, line_no, value.quoted);
    }
    auto& table = tables[section];
    if (table.contains(key))
      throw ConfigError(ConfigErrc::duplicate_key, line_no, "duplicate key '" + key + "'");
    table.emplace(key, std::move(value));
  }
  return tables;
}

inline const std::string& scalar(const std::string& key, const ConfigValue& v) {
  if (const auto* s = std::get_if<std::string>(&v.v)) return *s;
  throw ConfigError(ConfigErrc::type_mismatch, v.line, "'" + key + "' must be a single value");
}

inline const std::vector<std::string>& list(const std::string& key, const ConfigValue& v) {
  if (const auto* l = std::get_if<std::vector<std::string>>(&v.v)) return *l;
  throw ConfigError(ConfigErrc::type_mismatch, v.line, "'" + key + "' must be a list");
}

inline std::uint64_t to_uint(const std::string& key, const std::string& tok, std::size_t line) {
  std::uint64_t out = 0;
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  if (ec != std::errc{} || p != end)
    throw ConfigError(ConfigErrc::type_mismatch, line,
                      "'" + key + "' expects a nonnegative integer, got '" + tok + "'");
  return out;
}

inline double to_real(const std::string& key, const std::string& tok, std::size_t line) {
  if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  if (ec != std::errc{} || p != end || std::isnan(out))
    throw ConfigError(ConfigErrc::type_mismatch, line,
                      "'" + key + "' expects a number, got '" + tok + "'");
  return out;
}

inline std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  // Shortest %g form that round-trips; 17 digits always does.
  char buf[32];
  for (int prec = 1; prec < 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    double back = 0.0;
    std::from_chars(buf, buf + std::strlen(buf), back);
    if (back == x) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

// Parses the flat key-value campaign format:
//
//   dimension = 2
//   extents = [11, 11]
//   gamma = 1.25
//   replications = 10000
//   [activation]
//   kind = sigmoid   # hard | linear | sigmoid
//   slope = 3
//   shift = 6
//
// `activation = linear` at top level is shorthand for the table. Unknown keys
// are rejected. Missing keys take the documented defaults.
inline CampaignSpec parse_config(std::string_view text) {
  using namespace detail;
  auto tables = parse_tables(text);
  auto& top = tables[""];
  CampaignSpec spec;

  static const std::set<std::string> known = {
      "dimension",  "extents",      "boundary",   "gamma",        "activation",
      "initial_potential", "max_events", "max_time", "init_spike_rate",
      "replications", "bins",       "seed",       "size_sweep",   "gamma_sweep"};
  for (const auto& [k, v] : top)
    if (!known.contains(k)) throw ConfigError(ConfigErrc::unknown_key, v.line, "unknown key '" + k + "'");

  auto find = [&](const std::string& k) -> const ConfigValue* {
    auto it = top.find(k);
    return it == top.end() ? nullptr : &it->second;
  };

  if (auto* v = find("size_sweep"))
    for (const auto& t : list("size_sweep", *v)) {
      const auto n = to_uint("size_sweep", t, v->line);
      if (n < 1) throw ConfigError(ConfigErrc::invalid_value, v->line, "sweep sizes must be >= 1");
      spec.size_sweep.push_back(n);
    }
  if (auto* v = find("gamma_sweep"))
    for (const auto& t : list("gamma_sweep", *v)) {
      const double g = to_real("gamma_sweep", t, v->line);
      if (!(g > 0.0) || std::isinf(g))
        throw ConfigError(ConfigErrc::nonpositive_gamma, v->line, "gamma must be positive");
      spec.gamma_sweep.push_back(g);
    }
  if (!spec.size_sweep.empty() && !spec.gamma_sweep.empty())
    throw ConfigError(ConfigErrc::sweep_conflict, find("gamma_sweep")->line,
                      "size_sweep and gamma_sweep cannot be combined");

  const auto* dim = find("dimension");
  if (!dim) throw ConfigError(ConfigErrc::missing_key, 0, "missing key 'dimension'");
  spec.dimension = to_uint("dimension", scalar("dimension", *dim), dim->line);
  if (spec.dimension < 1 || spec.dimension > 3)
    throw ConfigError(ConfigErrc::bad_dimension, dim->line, "dimension must be 1, 2 or 3");
  if (!spec.size_sweep.empty() && spec.dimension != 1)
    throw ConfigError(ConfigErrc::sweep_conflict, dim->line, "size_sweep requires dimension = 1");

  if (const auto* v = find("extents")) {
    for (const auto& t : list("extents", *v)) {
      const auto e = to_uint("extents", t, v->line);
      if (e < 1 || e % 2 == 0)
        throw ConfigError(ConfigErrc::even_extent, v->line,
                          "lattice extents must be odd and >= 1, got " + t);
      spec.extents.push_back(e);
    }
    if (spec.extents.size() != spec.dimension)
      throw ConfigError(ConfigErrc::extent_count, v->line,
                        "expected " + std::to_string(spec.dimension) + " extents");
  } else if (spec.size_sweep.empty()) {
    throw ConfigError(ConfigErrc::missing_key, 0, "missing key 'extents'");
  }

  if (const auto* v = find("boundary")) {
    const auto& b = scalar("boundary", *v);
    if (b == "open")
      spec.boundary = Boundary::open;
    else if (b == "periodic")
      spec.boundary = Boundary::periodic;
    else
      throw ConfigError(ConfigErrc::invalid_value, v->line, "boundary must be open or periodic");
  }

  if (const auto* v = find("gamma")) {
    spec.gamma = to_real("gamma", scalar("gamma", *v), v->line);
    if (!(spec.gamma > 0.0) || std::isinf(spec.gamma))
      throw ConfigError(ConfigErrc::nonpositive_gamma, v->line, "gamma must be positive");
  } else if (spec.gamma_sweep.empty()) {
    throw ConfigError(ConfigErrc::missing_key, 0, "missing key 'gamma'");
  } else {
    spec.gamma = spec.gamma_sweep.front();
  }

  auto set_kind = [&](const std::string& name, std::size_t line) {
    const auto k = parse_activation_kind(name);
    if (!k) throw ConfigError(ConfigErrc::unknown_activation, line, "unknown activation kind '" + name + "'");
    spec.activation.kind = *k;
  };
  const bool has_table = tables.contains("activation");
  if (const auto* v = find("activation")) {
    if (has_table)
      throw ConfigError(ConfigErrc::duplicate_key, v->line,
                        "activation given both as a key and as a table");
    set_kind(scalar("activation", *v), v->line);
  }
  if (has_table) {
    for (const auto& [k, v] : tables["activation"]) {
      if (k == "kind")
        set_kind(scalar(k, v), v.line);
      else if (k == "slope")
        spec.activation.sigmoid_slope = to_real(k, scalar(k, v), v.line);
      else if (k == "shift")
        spec.activation.sigmoid_shift = to_real(k, scalar(k, v), v.line);
      else
        throw ConfigError(ConfigErrc::unknown_key, v.line, "unknown key 'activation." + k + "'");
    }
    const auto& t = tables["activation"];
    if (!(spec.activation.sigmoid_slope > 0.0) || std::isinf(spec.activation.sigmoid_slope))
      throw ConfigError(ConfigErrc::invalid_value, t.contains("slope") ? t.at("slope").line : 0,
                        "sigmoid slope must be positive and finite");
    if (!std::isfinite(spec.activation.sigmoid_shift))
      throw ConfigError(ConfigErrc::invalid_value, t.contains("shift") ? t.at("shift").line : 0,
                        "sigmoid shift must be finite");
  }

  if (const auto* v = find("initial_potential")) {
    const auto x = to_uint("initial_potential", scalar("initial_potential", *v), v->line);
    if (x < 1 || x > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()))
      throw ConfigError(ConfigErrc::invalid_value, v->line, "initial_potential must be >= 1");
    spec.initial_potential = static_cast<std::int32_t>(x);
  }
  if (const auto* v = find("max_events")) {
    const auto& t = scalar("max_events", *v);
    if (t == "none") {
      spec.max_events.reset();
    } else {
      const auto x = to_uint("max_events", t, v->line);
      if (x < 1) throw ConfigError(ConfigErrc::invalid_value, v->line, "max_events must be positive");
      spec.max_events = x;
    }
  }
  if (const auto* v = find("max_time")) {
    const auto& t = scalar("max_time", *v);
    const double x = t == "none" ? std::numeric_limits<double>::infinity() : to_real("max_time", t, v->line);
    if (!(x > 0.0)) throw ConfigError(ConfigErrc::invalid_value, v->line, "max_time must be positive");
    if (std::isinf(x))
      spec.max_time.reset();
    else
      spec.max_time = x;
  }
  if (const auto* v = find("init_spike_rate")) {
    const auto& t = scalar("init_spike_rate", *v);
    if (t == "phi")
      spec.init_spike_rate = InitSpikeRate::phi;
    else if (t == "unit")
      spec.init_spike_rate = InitSpikeRate::unit;
    else
      throw ConfigError(ConfigErrc::invalid_value, v->line, "init_spike_rate must be phi or unit");
  }
  if (const auto* v = find("replications")) {
    spec.replications = to_uint("replications", scalar("replications", *v), v->line);
    if (spec.replications < 1)
      throw ConfigError(ConfigErrc::invalid_value, v->line, "replications must be positive");
  }
  if (const auto* v = find("bins")) {
    spec.bins = to_uint("bins", scalar("bins", *v), v->line);
    if (spec.bins < 1) throw ConfigError(ConfigErrc::invalid_value, v->line, "bins must be positive");
  }
  if (const auto* v = find("seed")) spec.master_seed = to_uint("seed", scalar("seed", *v), v->line);
  return spec;
}

// Resolved configuration with every default written out. parse_config of
// the result reproduces `spec`.
inline std::string emit_config(const CampaignSpec& spec) {
  using detail::format_real;
  std::ostringstream os;
  auto list_of = [](const auto& xs, auto fmt) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
    return s + "]";
  };
  auto uint_fmt = [](std::size_t x) { return std::to_string(x); };
  os << "dimension = " << spec.dimension << '\n';
  if (!spec.extents.empty()) os << "extents = " << list_of(spec.extents, uint_fmt) << '\n';
  os << "boundary = " << (spec.boundary == Boundary::open ? "open" : "periodic") << '\n';
  os << "gamma = " << format_real(spec.gamma) << '\n';
  os << "initial_potential = " << spec.initial_potential << '\n';
  os << "max_events = " << (spec.max_events ? std::to_string(*spec.max_events) : "none") << '\n';
  os << "max_time = " << (spec.max_time ? format_real(*spec.max_time) : "inf") << '\n';
  os << "init_spike_rate = " << (spec.init_spike_rate == InitSpikeRate::phi ? "phi" : "unit") << '\n';
  os << "replications = " << spec.replications << '\n';
  os << "bins = " << spec.bins << '\n';
  if (spec.master_seed) os << "seed = " << *spec.master_seed << '\n';
  if (!spec.size_sweep.empty()) os << "size_sweep = " << list_of(spec.size_sweep, uint_fmt) << '\n';
  if (!spec.gamma_sweep.empty())
    os << "gamma_sweep = " << list_of(spec.gamma_sweep, format_real) << '\n';
  os << "\n[activation]\n";
  os << "kind = " << to_string(spec.activation.kind) << '\n';
  os << "slope = " << format_real(spec.activation.sigmoid_slope) << '\n';
  os << "shift = " << format_real(spec.activation.sigmoid_shift) << '\n';
  return os.str();
}

}  // namespace spikenet
