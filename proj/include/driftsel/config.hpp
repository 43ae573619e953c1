#pragma once

// Experiment configuration files.
//
// The format is a small subset of TOML: `key = value` lines, `[section]`
// headers, `#` comments, and values that are strings, numbers, booleans,
// arrays `[a, b]` or inline tables `{ k = v, ... }`. Example:
//
//   model = ["ex1", "ex4"]
//   basis = "hermite"
//   N = 100
//   T = 100
//   dt = 0.1
//   replicates = 25
//   correlation = { kind = "toeplitz", rho = [0, 0.5, 0.9] }
//   seed = 7

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "driftsel/bench.hpp"
#include "driftsel/csv.hpp"
#include "driftsel/error.hpp"

namespace driftsel {

namespace toml_lite {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws_and_comments(true);
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_ws();
        const std::string name = parse_key();
        skip_ws();
        expect(']');
        if (root.contains(name) && !root[name].is_object()) fail("section '" + name + "' redefines a key");
        if (!root.contains(name)) root[name] = json::object();
        table = &root[name];
      } else {
        const std::string key = parse_key();
        skip_ws();
        expect('=');
        skip_ws();
        if (table->contains(key)) fail("duplicate key '" + key + "'");
        (*table)[key] = parse_value();
      }
      end_of_line();
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) line += text_[i] == '\n';
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_ws_and_comments(bool newlines) {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
        ++pos_;
      } else if (c == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_ws();
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
    if (!eof() && peek() != '\n') fail("unexpected trailing characters");
  }

  std::string parse_key() {
    if (!eof() && peek() == '"') return parse_string();
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string parse_string() {
    expect('"');
    std::string out;
    while (!eof() && peek() != '"') {
      char c = peek();
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        ++pos_;
        if (eof()) fail("unterminated escape");
        c = peek();
        switch (c) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail("unsupported escape");
        }
      } else {
        out += c;
      }
      ++pos_;
    }
    expect('"');
    return out;
  }

  json parse_value() {
    if (eof()) fail("missing value");
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    const std::size_t start = pos_;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '}' && peek() != '\n' &&
           peek() != '#' && peek() != ' ' && peek() != '\t' && peek() != '\r') {
      ++pos_;
    }
    const std::string tok(text_.substr(start, pos_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string clean;
    for (char ch : tok) {
      if (ch != '_') clean += ch;
    }
    if (clean.empty()) fail("missing value");
    bool integral = clean.find_first_of(".eE") == std::string::npos &&
                    clean != "inf" && clean != "nan";
    try {
      std::size_t used = 0;
      if (integral) {
        const long long v = std::stoll(clean, &used);
        if (used == clean.size()) return v;
      } else {
        const double v = std::stod(clean, &used);
        if (used == clean.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("cannot parse value '" + tok + "'");
  }

  json parse_array() {
    expect('[');
    json arr = json::array();
    skip_ws_and_comments(true);
    if (!eof() && peek() == ']') {
      ++pos_;
      return arr;
    }
    while (true) {
      skip_ws_and_comments(true);
      arr.push_back(parse_value());
      skip_ws_and_comments(true);
      if (!eof() && peek() == ',') {
        ++pos_;
        skip_ws_and_comments(true);
        if (!eof() && peek() == ']') {
          ++pos_;
          return arr;
        }
        continue;
      }
      expect(']');
      return arr;
    }
  }

  json parse_inline_table() {
    expect('{');
    json t = json::object();
    skip_ws();
    if (!eof() && peek() == '}') {
      ++pos_;
      return t;
    }
    while (true) {
      skip_ws();
      const std::string key = parse_key();
      skip_ws();
      expect('=');
      skip_ws();
      if (t.contains(key)) fail("duplicate key '" + key + "'");
      t[key] = parse_value();
      skip_ws();
      if (!eof() && peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return t;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline json parse(std::string_view text) { return Parser(text).parse(); }

}  // namespace toml_lite

namespace detail {

using nlohmann::json;

inline double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  return v.get<double>();
}

inline long long integer(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d)) return static_cast<long long>(d);
  }
  throw ConfigError(key + ": expected an integer");
}

inline std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

template <class F>
auto one_or_many(const json& v, const std::string& key, F&& conv) {
  std::vector<decltype(conv(v, key))> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(conv(e, key));
  } else {
    out.push_back(conv(v, key));
  }
  if (out.empty()) throw ConfigError(key + ": must not be empty");
  return out;
}

inline void apply_correlation(ExperimentConfig& cfg, const json& v) {
  if (v.is_string()) {
    cfg.correlation = correlation_family_from_string(v.get<std::string>());
    return;
  }
  if (!v.is_object()) throw ConfigError("correlation: expected a table or a kind name");
  for (const auto& [k, val] : v.items()) {
    if (k == "kind") {
      cfg.correlation = correlation_family_from_string(text(val, "correlation.kind"));
    } else if (k == "rho" || k == "a") {
      cfg.rhos = one_or_many(val, "correlation." + k, number);
    } else {
      throw ConfigError("correlation." + k + ": unknown key");
    }
  }
}

inline void apply_key(ExperimentConfig& cfg, const std::string& key, const json& v) {
  if (key == "model") {
    cfg.models = one_or_many(v, key, [](const json& e, const std::string& k) {
      return model_id_from_string(text(e, k));
    });
  } else if (key == "basis") {
    cfg.bases = one_or_many(v, key, [](const json& e, const std::string& k) {
      return basis_family_from_string(text(e, k));
    });
  } else if (key == "N") {
    const long long n = integer(v, key);
    if (n < 1) throw ConfigError("N: must be positive");
    cfg.n_paths = static_cast<std::size_t>(n);
  } else if (key == "T") {
    cfg.horizon = number(v, key);
  } else if (key == "dt") {
    cfg.dt = number(v, key);
  } else if (key == "replicates") {
    cfg.replicates = static_cast<int>(integer(v, key));
  } else if (key == "correlation") {
    apply_correlation(cfg, v);
  } else if (key == "rho") {
    cfg.rhos = one_or_many(v, key, number);
  } else if (key == "kappa") {
    cfg.kappa = number(v, key);
  } else if (key == "m_max") {
    cfg.m_max = static_cast<int>(integer(v, key));
  } else if (key == "seed") {
    const long long s = integer(v, key);
    if (s < 0) throw ConfigError("seed: must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "mise_grid") {
    cfg.mise_grid = static_cast<int>(integer(v, key));
  } else if (key == "gate") {
    const std::string g = text(v, key);
    if (g == "empirical") cfg.gate = GateKind::Empirical;
    else if (g == "theoretical") cfg.gate = GateKind::Theoretical;
    else throw ConfigError("gate: expected empirical or theoretical");
  } else if (key == "p") {
    cfg.gate_p = number(v, key);
  } else if (key == "penalty") {
    const std::string g = text(v, key);
    if (g == "empirical") cfg.penalty = PenaltyKind::Empirical;
    else if (g == "theoretical") cfg.penalty = PenaltyKind::Theoretical;
    else throw ConfigError("penalty: expected empirical or theoretical");
  } else if (key == "x0") {
    cfg.x0 = number(v, key);
  } else if (key == "route") {
    cfg.route = simulation_route_from_string(text(v, key));
  } else if (key == "threads") {
    const long long t = integer(v, key);
    if (t < 1) throw ConfigError("threads: must be positive");
    cfg.threads = static_cast<unsigned>(t);
  } else {
    throw ConfigError(key + ": unknown key");
  }
}

// Errors raised deeper down do not always mention the key; prefix it.
inline void apply_named(ExperimentConfig& cfg, const std::string& key, const json& v) {
  try {
    apply_key(cfg, key, v);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(key, 0) == 0 || what.rfind("correlation.", 0) == 0) throw;
    throw ConfigError(key + ": " + what);
  }
}

}  // namespace detail

/// Applies the keys of a parsed document on top of `base`. Keys may sit at the
/// top level or inside an [experiment] section; [correlation] is a table.
inline ExperimentConfig apply_config(ExperimentConfig base, const nlohmann::json& doc) {
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") {
      if (!value.is_object()) throw ConfigError("experiment: expected a section");
      for (const auto& [k, v] : value.items()) detail::apply_named(base, k, v);
    } else {
      detail::apply_named(base, key, value);
    }
  }
  try {
    validate(base);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind("rho", 0) == 0 && what.find("correlation") == std::string::npos) {
      throw ConfigError("correlation.rho: " + what);
    }
    throw;
  }
  return base;
}

inline ExperimentConfig parse_config_text(std::string_view text) {
  return apply_config(ExperimentConfig{}, toml_lite::parse(text));
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Writes every field, so parse_config_text(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  auto list = [](const auto& items, auto&& fmt) {
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) s += ", ";
      s += fmt(items[i]);
    }
    return s + "]";
  };
  auto quoted = [](std::string_view s) { return "\"" + std::string(s) + "\""; };
  auto num = [](double v) {
    std::string s = format_double(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  };
  std::ostringstream os;
  os << "model = " << list(cfg.models, [&](ModelId id) { return quoted(to_string(id)); }) << '\n';
  os << "basis = " << list(cfg.bases, [&](BasisFamily f) { return quoted(to_string(f)); }) << '\n';
  os << "N = " << cfg.n_paths << '\n';
  os << "T = " << num(cfg.horizon) << '\n';
  os << "dt = " << num(cfg.dt) << '\n';
  os << "replicates = " << cfg.replicates << '\n';
  os << "correlation = { kind = " << quoted(to_string(cfg.correlation))
     << ", rho = " << list(cfg.rhos, num) << " }\n";
  os << "kappa = " << num(cfg.kappa) << '\n';
  if (cfg.m_max) os << "m_max = " << *cfg.m_max << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "mise_grid = " << cfg.mise_grid << '\n';
  os << "gate = " << quoted(cfg.gate == GateKind::Empirical ? "empirical" : "theoretical") << '\n';
  os << "p = " << num(cfg.gate_p) << '\n';
  os << "penalty = " << quoted(cfg.penalty == PenaltyKind::Empirical ? "empirical" : "theoretical")
     << '\n';
  if (cfg.x0) os << "x0 = " << num(*cfg.x0) << '\n';
  os << "route = " << quoted(to_string(cfg.route)) << '\n';
  os << "threads = " << cfg.threads << '\n';
  return os.str();
}

}  // namespace driftsel
