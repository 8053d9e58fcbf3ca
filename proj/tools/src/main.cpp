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

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bilinsde_app/app.hpp"

namespace {

using bilinsde::app::ConfigBuilder;
using bilinsde::app::ConfigError;

struct Flag {
  CLI::Option* option = nullptr;
  std::string key;
  std::string value;
};

class FlagTable {
public:
  void add(CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    flags_.push_back({nullptr, key, {}});
    Flag& f = flags_.back();
    f.option = sub->add_option(name, f.value, help);
    owners_.push_back(sub);
  }

  void feed(const CLI::App* active, ConfigBuilder& builder) const {
    for (std::size_t i = 0; i < flags_.size(); ++i) {
      if (owners_[i] != active || flags_[i].option->count() == 0) continue;
      builder.set(flags_[i].key, flags_[i].value, "flag " + flags_[i].option->get_name());
    }
  }

private:
  std::deque<Flag> flags_;
  std::vector<const CLI::App*> owners_;
};

void add_model_flags(FlagTable& t, CLI::App* sub) {
  t.add(sub, "--model", "model.file", "model description file (JSON)");
  t.add(sub, "--builtin", "model.builtin", "triad | galerkin | linear");
  t.add(sub, "--nu", "model.nu", "viscosity");
  t.add(sub, "--c", "model.c", "triad coefficients c1,c2,c3");
  t.add(sub, "--forced", "model.forced", "triad axes \"1,2\" or galerkin modes \"1:0,1:1\"");
  t.add(sub, "--cutoff", "model.cutoff", "galerkin cutoff K");
  t.add(sub, "--dim", "model.dim", "dimension of the linear model");
}

void add_run_flags(FlagTable& t, CLI::App* sub) {
  t.add(sub, "--u0", "run.u0", "initial state, comma separated");
  t.add(sub, "--T", "run.T", "horizon");
  t.add(sub, "--dt", "run.dt", "step size");
  t.add(sub, "--scheme", "run.scheme", "semi_implicit | explicit_em");
  t.add(sub, "--paths", "run.paths", "number of paths");
  t.add(sub, "--seed", "run.seed", "master seed");
  t.add(sub, "--workers", "run.workers", "worker threads, 0 = all cores");
  t.add(sub, "--blowup-bound", "run.blowup_bound", "abort a path once |U| exceeds this");
}

void add_out_flags(FlagTable& t, CLI::App* sub) {
  t.add(sub, "--out", "output.dir", "output directory");
  t.add(sub, "--stride", "output.stride", "keep every n-th time point");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilinsde: stochastic bilinear models with energy-conserving nonlinearity"};
  app.set_version_flag("--version", BILINSDE_VERSION);
  app.require_subcommand(1);
  FlagTable flags;

  std::vector<std::pair<CLI::App*, std::string>> kinds;
  auto command = [&](CLI::App* parent, const std::string& name, const std::string& kind, const std::string& help) {
    CLI::App* sub = parent->add_subcommand(name, help);
    sub->allow_extras();
    add_model_flags(flags, sub);
    add_out_flags(flags, sub);
    kinds.emplace_back(sub, kind);
    return sub;
  };

  command(&app, "validate", "validate", "check coercivity, cancellation and forcing");

  auto* horm = command(&app, "hormander", "hormander", "bracket ladder span dimensions");
  flags.add(horm, "--n-max", "hormander.n_max", "deepest ladder level");
  flags.add(horm, "--tol", "hormander.tol", "relative rank tolerance");
  flags.add(horm, "--at", "hormander.point", "also evaluate the full ladder at this state");
  flags.add(horm, "--degree-cap", "hormander.degree_cap", "polynomial degree cap for --at");

  auto* sim = command(&app, "simulate", "simulate", "sample paths and terminal statistics");
  add_run_flags(flags, sim);
  flags.add(sim, "--observables", "ergodic.observables", "observables summarised at T");

  auto* mal = command(&app, "malliavin", "malliavin", "Malliavin matrix spectra and lower tail");
  add_run_flags(flags, mal);
  flags.add(mal, "--eps-grid", "malliavin.eps_grid", "thresholds for P(lambda_min >= eps)");

  auto* erg = command(&app, "ergodic", "ergodic", "occupation measure averages");
  add_run_flags(flags, erg);
  flags.add(erg, "--burn-in", "ergodic.burn_in", "discarded initial time");
  flags.add(erg, "--thin", "ergodic.thin", "keep every n-th grid point");
  flags.add(erg, "--observables", "ergodic.observables", "observables to average");

  auto* probe = app.add_subcommand("probe", "numerical probes");
  probe->require_subcommand(1);
  auto* mom = command(probe, "moments", "probe.moments", "energy tail and exponential moment");
  add_run_flags(flags, mom);
  flags.add(mom, "--K-grid", "probe.K_grid", "tail thresholds");
  flags.add(mom, "--eta", "probe.eta", "exponential moment rate");

  auto* grad = command(probe, "gradient", "probe.gradient", "pathwise gradient against finite differences");
  add_run_flags(flags, grad);
  flags.add(grad, "--xi", "probe.xi", "direction (normalised)");
  flags.add(grad, "--eps-fd", "probe.eps_fd", "finite difference step");
  flags.add(grad, "--observables", "probe.observables", "observables");

  auto* mix = command(probe, "mixing", "probe.mixing", "dependence of E phi(U_T) on the initial state");
  add_run_flags(flags, mix);
  flags.add(mix, "--u0-list", "probe.u0_list", "initial states separated by ';'");
  flags.add(mix, "--common-noise", "probe.common_noise", "true | false");
  flags.add(mix, "--observables", "probe.observables", "observable (first one is used)");

  auto* irr = command(probe, "irreducibility", "probe.irreducibility", "hitting probability of a small ball");
  add_run_flags(flags, irr);
  flags.add(irr, "--radius", "probe.radius", "radius of the initial-state ball");
  flags.add(irr, "--eps", "probe.eps", "target ball radius");
  flags.add(irr, "--n-init", "probe.n_init", "number of initial states");

  std::string config_path;
  auto* from_file = app.add_subcommand("run", "run an experiment described by a config file");
  from_file->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  std::string out_override;
  auto* out_opt = from_file->add_option("--out", out_override, "override output.dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bilinsde::app::kExitConfig;
  }

  for (const auto& [sub, kind] : kinds) {
    if (!sub->parsed() || sub->remaining().empty()) continue;
    const std::string extra = sub->remaining().front();
    std::string stem = extra.substr(extra.find_first_not_of('-') == std::string::npos ? 0 : extra.find_first_not_of('-'));
    std::replace(stem.begin(), stem.end(), '-', '_');
    std::cerr << "error[config.parse]: unknown argument '" << extra << "'";
    const auto near = bilinsde::app::nearest_keys(stem);
    if (!near.empty()) {
      std::cerr << "; nearest keys:";
      for (const auto& k : near) std::cerr << ' ' << k;
    }
    std::cerr << '\n';
    return bilinsde::app::kExitConfig;
  }

  bilinsde::app::RunConfig config;
  try {
    if (from_file->parsed()) {
      config = bilinsde::app::load_config(config_path);
      if (out_opt->count() > 0) {
        config.out_dir = out_override;
        config.values["output.dir"] = out_override;
        config.provenance["output.dir"] = "flag --out";
      }
    } else {
      ConfigBuilder builder;
      for (const auto& [sub, kind] : kinds) {
        if (!sub->parsed()) continue;
        builder.set("run.kind", kind, "subcommand");
        flags.feed(sub, builder);
      }
      config = builder.finish(".");
    }
  } catch (const ConfigError& e) {
    std::cerr << "error[" << e.error_class() << "]: " << e.what() << '\n';
    return bilinsde::app::kExitConfig;
  } catch (const bilinsde::Error& e) {
    std::cerr << "error[" << e.error_class() << "]: " << e.what() << '\n';
    return bilinsde::app::exit_code_for(e.error_class());
  }

  const auto result = bilinsde::app::run(config, std::cout);
  if (result.exit_code != 0) std::cerr << "error[" << result.error_class << "]: " << result.message << '\n';
  return result.exit_code;
}
