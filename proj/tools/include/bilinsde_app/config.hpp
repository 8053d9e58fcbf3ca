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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bilinsde/error.hpp"
#include "bilinsde/sde.hpp"

namespace bilinsde::app {

// "config.parse" carries a line and column, "config.semantic" the field name.
class ConfigError : public Error {
public:
  ConfigError(std::string error_class, std::string field, int line, int column, const std::string& what)
      : Error(std::move(error_class), what), field_(std::move(field)), line_(line), column_(column) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  std::string field_;
  int line_;
  int column_;
};

enum class Kind {
  validate,
  hormander,
  simulate,
  malliavin,
  ergodic,
  probe_moments,
  probe_gradient,
  probe_mixing,
  probe_irreducibility,
};

std::string_view to_string(Kind kind);

struct ModelSpec {
  std::optional<std::filesystem::path> file;
  std::string builtin;  // triad | galerkin | linear, when no file is given
  double nu = 1.0;
  std::vector<double> c;  // triad coefficients
  std::string forced;     // triad axes "1,2" or galerkin modes "1:0,1:1"
  int cutoff = 2;
  int dim = 2;
};

struct RunConfig {
  Kind kind = Kind::validate;
  ModelSpec model;

  double T = 1.0;
  double dt = 1e-2;
  Scheme scheme = Scheme::semi_implicit;
  std::size_t paths = 100;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  double blowup_bound = kDefaultBlowupBound;
  std::vector<double> u0;  // empty: the origin

  int n_max = 10;
  int degree_cap = 4;
  double rank_tol = 1e-8;
  std::optional<std::vector<double>> hormander_point;

  std::vector<double> eps_grid;

  std::optional<double> burn_in;  // unset: T / 10
  std::optional<std::int64_t> thin;
  std::vector<std::string> observables;

  std::vector<double> K_grid;  // empty: derived from the model at run time
  double eta = 0.05;
  std::vector<std::string> probe_observables;  // gradient: all; mixing: the first
  std::vector<double> xi;  // empty: e_1
  double eps_fd = 1e-5;
  std::vector<std::vector<double>> u0_list;  // empty: origin and 5 e_1
  bool common_noise = true;
  double radius = 1.0;
  double eps = 0.5;
  std::size_t n_init = 20;

  std::filesystem::path out_dir;
  std::int64_t stride = 1;

  // canonical key -> value as resolved, and where it came from ("line 4",
  // "flag --dt", "default", "environment BILINSDE_OUTPUT_DIR")
  std::map<std::string, std::string> values;
  std::map<std::string, std::string> provenance;
};

inline constexpr const char* kOutputDirEnv = "BILINSDE_OUTPUT_DIR";

// Every accepted key, "section.key".
const std::vector<std::string>& known_keys();

// Up to three known keys closest to key by edit distance.
std::vector<std::string> nearest_keys(std::string_view key);

// Collects raw values from a config file or from command-line flags, then
// checks and converts them all at once.
class ConfigBuilder {
public:
  // Throws ConfigError for unknown keys (with suggestions) and duplicates.
  void set(const std::string& key, const std::string& value, const std::string& provenance, int line = 0,
           int column = 0);
  bool has(const std::string& key) const { return raw_.count(key) > 0; }
  // Relative model paths are resolved against base_dir.
  RunConfig finish(const std::filesystem::path& base_dir = ".") const;

private:
  struct Raw {
    std::string value;
    std::string provenance;
  };
  std::map<std::string, Raw> raw_;
};

// INI-style text: "[section]" headers, "key = value" lines, '#' or ';'
// comments, optional double quotes around values. See docs/config.md.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace bilinsde::app
