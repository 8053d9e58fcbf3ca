/*
   Copyright 2026 The bilinsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "bilinsde_app/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace bilinsde::app {

namespace {

struct KeySpec {
  const char* key;
  const char* default_value;  // nullptr: unset unless given (or derived at run time)
};

// Order matters only for the manifest listing.
const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"model.file", nullptr},
      {"model.builtin", nullptr},
      {"model.nu", "1"},
      {"model.c", "1,1,-2"},
      {"model.forced", nullptr},
      {"model.cutoff", "2"},
      {"model.dim", "2"},
      {"run.kind", nullptr},
      {"run.T", "1"},
      {"run.dt", "0.01"},
      {"run.scheme", "semi_implicit"},
      {"run.paths", "100"},
      {"run.seed", "0"},
      {"run.workers", "0"},
      {"run.blowup_bound", "1e8"},
      {"run.u0", nullptr},
      {"hormander.n_max", "10"},
      {"hormander.degree_cap", "4"},
      {"hormander.tol", "1e-8"},
      {"hormander.point", nullptr},
      {"malliavin.eps_grid", "1e-6,1e-5,1e-4,1e-3,1e-2,1e-1"},
      {"ergodic.burn_in", nullptr},
      {"ergodic.thin", nullptr},
      {"ergodic.observables", "energy,dissipation"},
      {"probe.K_grid", nullptr},
      {"probe.eta", "0.05"},
      {"probe.observables", "energy,coord:1"},
      {"probe.xi", nullptr},
      {"probe.eps_fd", "1e-5"},
      {"probe.u0_list", nullptr},
      {"probe.common_noise", "true"},
      {"probe.radius", "1"},
      {"probe.eps", "0.5"},
      {"probe.n_init", "20"},
      {"output.dir", nullptr},
      {"output.stride", "1"},
  };
  return specs;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const bool same = std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                        std::tolower(static_cast<unsigned char>(b[j - 1]));
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (same ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void semantic(const std::string& key, const std::string& what) {
  throw ConfigError("config.semantic", key, 0, 0, key + ": " + what);
}

class Reader {
public:
  explicit Reader(const std::map<std::string, std::string>& values) : values_(values) {}

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  double number(const std::string& key) const { return parse_number(key, *get(key)); }

  static double parse_number(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) semantic(key, "expected a number, got '" + text + "'");
    if (!std::isfinite(v)) semantic(key, "must be finite");
    return v;
  }

  std::int64_t integer(const std::string& key) const {
    const std::string text = *get(key);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
      semantic(key, "expected an integer, got '" + text + "'");
    return v;
  }

  bool boolean(const std::string& key) const {
    std::string text = *get(key);
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
    if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
    if (text == "false" || text == "no" || text == "off" || text == "0") return false;
    semantic(key, "expected true or false, got '" + text + "'");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    const std::string text = *get(key);
    if (trim(text).empty()) return out;
    for (const auto& part : split(text, ',')) out.push_back(parse_number(key, part));
    return out;
  }

  std::vector<std::string> words(const std::string& key) const {
    std::vector<std::string> out;
    for (auto& part : split(*get(key), ','))
      if (!part.empty()) out.push_back(part);
    return out;
  }

private:
  const std::map<std::string, std::string>& values_;
};

Kind parse_kind(const std::string& text) {
  static const std::vector<std::pair<std::string, Kind>> table = {
      {"validate", Kind::validate},
      {"hormander", Kind::hormander},
      {"simulate", Kind::simulate},
      {"malliavin", Kind::malliavin},
      {"ergodic", Kind::ergodic},
      {"probe.moments", Kind::probe_moments},
      {"probe.gradient", Kind::probe_gradient},
      {"probe.mixing", Kind::probe_mixing},
      {"probe.irreducibility", Kind::probe_irreducibility},
  };
  for (const auto& [name, kind] : table)
    if (name == text) return kind;
  std::string list;
  for (const auto& [name, kind] : table) list += (list.empty() ? "" : ", ") + name;
  semantic("run.kind", "unknown experiment '" + text + "' (expected one of " + list + ")");
}

}  // namespace

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::validate: return "validate";
    case Kind::hormander: return "hormander";
    case Kind::simulate: return "simulate";
    case Kind::malliavin: return "malliavin";
    case Kind::ergodic: return "ergodic";
    case Kind::probe_moments: return "probe.moments";
    case Kind::probe_gradient: return "probe.gradient";
    case Kind::probe_mixing: return "probe.mixing";
    case Kind::probe_irreducibility: return "probe.irreducibility";
  }
  return "unknown";
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : key_specs()) k.emplace_back(s.key);
    return k;
  }();
  return keys;
}

std::vector<std::string> nearest_keys(std::string_view key) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& k : known_keys()) {
    // also compare against the bare name, so "dtt" finds "run.dt"
    const auto bare = std::string_view(k).substr(k.find('.') + 1);
    scored.emplace_back(std::min(edit_distance(key, k), edit_distance(key, bare)), k);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && out.size() < 3; ++i) out.push_back(scored[i].second);
  return out;
}

void ConfigBuilder::set(const std::string& key, const std::string& value, const std::string& provenance, int line,
                        int column) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    std::string hint;
    for (const auto& k : nearest_keys(key)) hint += (hint.empty() ? "" : ", ") + k;
    std::ostringstream os;
    if (line > 0) os << "line " << line << ", column " << column << ": ";
    os << "unknown key '" << key << "'; nearest valid keys: " << hint;
    throw ConfigError(line > 0 ? "config.parse" : "config.semantic", key, line, column, os.str());
  }
  if (const auto it = raw_.find(key); it != raw_.end()) {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ", column " << column << ": ";
    os << "duplicate key '" << key << "' (first set by " << it->second.provenance << ")";
    throw ConfigError(line > 0 ? "config.parse" : "config.semantic", key, line, column, os.str());
  }
  raw_[key] = Raw{value, provenance};
}

RunConfig ConfigBuilder::finish(const std::filesystem::path& base_dir) const {
  RunConfig cfg;
  for (const auto& spec : key_specs()) {
    const auto it = raw_.find(spec.key);
    if (it != raw_.end()) {
      cfg.values[spec.key] = it->second.value;
      cfg.provenance[spec.key] = it->second.provenance;
    } else if (spec.default_value) {
      cfg.values[spec.key] = spec.default_value;
      cfg.provenance[spec.key] = "default";
    }
  }
  if (!cfg.values.count("output.dir")) {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
      cfg.values["output.dir"] = env;
      cfg.provenance["output.dir"] = std::string("environment ") + kOutputDirEnv;
    } else {
      cfg.values["output.dir"] = "bilinsde-out";
      cfg.provenance["output.dir"] = "default";
    }
  }
  const Reader r(cfg.values);

  if (!r.get("run.kind")) semantic("run.kind", "missing (one of validate, hormander, simulate, ...)");
  cfg.kind = parse_kind(*r.get("run.kind"));

  // model
  if (auto file = r.get("model.file")) {
    if (r.get("model.builtin")) semantic("model.builtin", "give either model.file or model.builtin, not both");
    std::filesystem::path p = *file;
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::is_regular_file(p)) semantic("model.file", "file not found: " + p.string());
    cfg.model.file = p;
  } else if (auto b = r.get("model.builtin")) {
    if (*b != "triad" && *b != "galerkin" && *b != "linear")
      semantic("model.builtin", "unknown model '" + *b + "' (expected triad, galerkin or linear)");
    cfg.model.builtin = *b;
  } else {
    semantic("model.file", "missing (set model.file or model.builtin)");
  }
  cfg.model.nu = r.number("model.nu");
  if (!(cfg.model.nu > 0.0)) semantic("model.nu", "must be > 0");
  cfg.model.c = r.numbers("model.c");
  if (cfg.model.c.size() != 3) semantic("model.c", "expected three coefficients");
  cfg.model.cutoff = static_cast<int>(r.integer("model.cutoff"));
  if (cfg.model.cutoff < 1 || cfg.model.cutoff > 8) semantic("model.cutoff", "must be in [1, 8]");
  cfg.model.dim = static_cast<int>(r.integer("model.dim"));
  if (cfg.model.dim < 1 || cfg.model.dim > 4096) semantic("model.dim", "must be in [1, 4096]");
  if (auto f = r.get("model.forced")) {
    cfg.model.forced = *f;
  } else {
    cfg.model.forced = cfg.model.builtin == "galerkin" ? "1:0,1:1" : "1,2";
    cfg.values["model.forced"] = cfg.model.forced;
    cfg.provenance["model.forced"] = "default";
  }

  // numerics
  cfg.T = r.number("run.T");
  if (!(cfg.T > 0.0)) semantic("run.T", "must be > 0");
  cfg.dt = r.number("run.dt");
  if (!(cfg.dt > 0.0)) semantic("run.dt", "must be > 0");
  if (cfg.dt > cfg.T) semantic("run.dt", "must not exceed run.T");
  if (cfg.T / cfg.dt > 1e9) semantic("run.dt", "more than 1e9 steps");
  try {
    cfg.scheme = parse_scheme(*r.get("run.scheme"));
  } catch (const Error&) {
    semantic("run.scheme", "expected semi_implicit or explicit_em");
  }
  const auto paths = r.integer("run.paths");
  if (paths < 1 || paths > 100000000) semantic("run.paths", "must be in [1, 1e8]");
  cfg.paths = static_cast<std::size_t>(paths);
  const auto seed = r.integer("run.seed");
  if (seed < 0) semantic("run.seed", "must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const auto workers = r.integer("run.workers");
  if (workers < 0 || workers > 4096) semantic("run.workers", "must be in [0, 4096] (0: all cores)");
  cfg.workers = static_cast<unsigned>(workers);
  cfg.blowup_bound = r.number("run.blowup_bound");
  if (!(cfg.blowup_bound > 0.0)) semantic("run.blowup_bound", "must be > 0");
  if (r.get("run.u0")) cfg.u0 = r.numbers("run.u0");

  cfg.n_max = static_cast<int>(r.integer("hormander.n_max"));
  if (cfg.n_max < 0 || cfg.n_max > 64) semantic("hormander.n_max", "must be in [0, 64]");
  cfg.degree_cap = static_cast<int>(r.integer("hormander.degree_cap"));
  if (cfg.degree_cap < 2 || cfg.degree_cap > 8) semantic("hormander.degree_cap", "must be in [2, 8]");
  cfg.rank_tol = r.number("hormander.tol");
  if (!(cfg.rank_tol > 0.0 && cfg.rank_tol < 1.0)) semantic("hormander.tol", "must be in (0, 1)");
  if (r.get("hormander.point")) cfg.hormander_point = r.numbers("hormander.point");

  cfg.eps_grid = r.numbers("malliavin.eps_grid");
  if (cfg.eps_grid.empty()) semantic("malliavin.eps_grid", "must not be empty");
  for (double e : cfg.eps_grid)
    if (!(e > 0.0)) semantic("malliavin.eps_grid", "entries must be > 0");

  if (r.get("ergodic.burn_in")) {
    cfg.burn_in = r.number("ergodic.burn_in");
    if (*cfg.burn_in < 0.0 || *cfg.burn_in >= cfg.T) semantic("ergodic.burn_in", "must be in [0, run.T)");
  } else {
    cfg.values["ergodic.burn_in"] = "T/10";
    cfg.provenance["ergodic.burn_in"] = "derived (10% of run.T)";
  }
  if (r.get("ergodic.thin")) {
    cfg.thin = r.integer("ergodic.thin");
    if (*cfg.thin < 1) semantic("ergodic.thin", "must be >= 1");
  } else {
    cfg.values["ergodic.thin"] = "auto";
    cfg.provenance["ergodic.thin"] = "derived (at most 1e5 stored samples)";
  }
  cfg.observables = r.words("ergodic.observables");
  if (cfg.observables.empty()) semantic("ergodic.observables", "must not be empty");

  if (r.get("probe.K_grid")) {
    cfg.K_grid = r.numbers("probe.K_grid");
    if (cfg.K_grid.empty()) semantic("probe.K_grid", "must not be empty");
  } else {
    cfg.values["probe.K_grid"] = "auto";
    cfg.provenance["probe.K_grid"] = "derived (from |U0|^2 and |sigma|^2 T)";
  }
  cfg.eta = r.number("probe.eta");
  if (!(cfg.eta > 0.0)) semantic("probe.eta", "must be > 0");
  cfg.probe_observables = r.words("probe.observables");
  if (cfg.probe_observables.empty()) semantic("probe.observables", "must not be empty");
  if (r.get("probe.xi")) cfg.xi = r.numbers("probe.xi");
  cfg.eps_fd = r.number("probe.eps_fd");
  if (!(cfg.eps_fd > 0.0 && cfg.eps_fd < 1.0)) semantic("probe.eps_fd", "must be in (0, 1)");
  if (auto list = r.get("probe.u0_list")) {
    for (const auto& part : split(*list, ';')) {
      std::vector<double> v;
      for (const auto& x : split(part, ',')) v.push_back(Reader::parse_number("probe.u0_list", x));
      cfg.u0_list.push_back(std::move(v));
    }
    if (cfg.u0_list.size() < 2) semantic("probe.u0_list", "needs at least two states separated by ';'");
  }
  cfg.common_noise = r.boolean("probe.common_noise");
  cfg.radius = r.number("probe.radius");
  if (cfg.radius < 0.0) semantic("probe.radius", "must be >= 0");
  cfg.eps = r.number("probe.eps");
  if (!(cfg.eps > 0.0)) semantic("probe.eps", "must be > 0");
  const auto n_init = r.integer("probe.n_init");
  if (n_init < 1 || n_init > 100000) semantic("probe.n_init", "must be in [1, 1e5]");
  cfg.n_init = static_cast<std::size_t>(n_init);

  cfg.out_dir = *r.get("output.dir");
  if (cfg.out_dir.empty()) semantic("output.dir", "must not be empty");
  cfg.stride = r.integer("output.stride");
  if (cfg.stride < 1) semantic("output.stride", "must be >= 1");
  return cfg;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ConfigBuilder builder;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto fail = [&](std::size_t col, const std::string& what) {
      std::ostringstream os;
      os << "line " << line_no << ", column " << col + 1 << ": " << what;
      throw ConfigError("config.parse", "", line_no, static_cast<int>(col + 1), os.str());
    };

    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size() || line[i] == '#' || line[i] == ';') continue;

    if (line[i] == '[') {
      const auto close = line.find(']', i);
      if (close == std::string_view::npos) fail(line.size(), "missing ']' in section header");
      section = trim(line.substr(i + 1, close - i - 1));
      if (section.empty()) fail(i + 1, "empty section name");
      for (std::size_t k = 0; k < section.size(); ++k)
        if (!std::isalnum(static_cast<unsigned char>(section[k])) && section[k] != '_')
          fail(i + 1, "invalid character in section name");
      std::size_t rest = close + 1;
      while (rest < line.size() && std::isspace(static_cast<unsigned char>(line[rest]))) ++rest;
      if (rest < line.size() && line[rest] != '#' && line[rest] != ';') fail(rest, "unexpected text after section header");
      continue;
    }

    const std::size_t key_start = i;
    while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_' || line[i] == '.'))
      ++i;
    if (i == key_start) fail(i, "expected a key");
    const std::string key(line.substr(key_start, i - key_start));
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size() || line[i] != '=') fail(i, "expected '=' after key '" + key + "'");
    ++i;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;

    std::string value;
    if (i < line.size() && line[i] == '"') {
      const std::size_t open = i++;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '\\' && i + 1 < line.size()) {
          value += line[i + 1];
          i += 2;
        } else if (line[i] == '"') {
          closed = true;
          ++i;
          break;
        } else {
          value += line[i++];
        }
      }
      if (!closed) fail(open, "unterminated string");
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i < line.size() && line[i] != '#' && line[i] != ';') fail(i, "unexpected text after quoted value");
    } else {
      std::size_t end = i;
      while (end < line.size() && line[end] != '#') ++end;
      value = trim(line.substr(i, end - i));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    builder.set(full, value, "line " + std::to_string(line_no), line_no, static_cast<int>(key_start + 1));
  }
  return builder.finish(base_dir);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config.semantic", "config", 0, 0, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace bilinsde::app
