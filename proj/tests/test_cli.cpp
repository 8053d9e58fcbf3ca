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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bilinsde_app/app.hpp"
#include "bilinsde_app/config.hpp"
#include "bilinsde_app/csv.hpp"

using namespace bilinsde;
using namespace bilinsde::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bilinsde_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig config_for(const std::string& body, const fs::path& out) {
  return parse_config(body + "\n[output]\ndir = \"" + out.string() + "\"\n");
}

RunResult quiet_run(const RunConfig& c) {
  std::ostringstream log;
  return run(c, log);
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config fills in defaults with provenance") {
  const auto c = parse_config("[run]\nkind = simulate\n[model]\nbuiltin = triad\n");
  CHECK(c.kind == Kind::simulate);
  CHECK(c.T == 1.0);
  CHECK(c.dt == 0.01);
  CHECK(c.paths == 100);
  CHECK(c.scheme == Scheme::semi_implicit);
  CHECK(c.model.c == std::vector<double>{1, 1, -2});
  CHECK(c.model.forced == "1,2");
  CHECK(c.provenance.at("run.kind") == "line 2");
  CHECK(c.provenance.at("run.dt") == "default");
}

TEST_CASE("galerkin forcing default differs from the triad one") {
  const auto c = parse_config("[run]\nkind = validate\n[model]\nbuiltin = galerkin\n");
  CHECK(c.model.forced == "1:0,1:1");
}

TEST_CASE("semantic errors name the field") {
  const std::string base = "[model]\nbuiltin = triad\n[run]\nkind = simulate\n";
  CHECK(error_of(base + "dt = 0\n").find("run.dt") != std::string::npos);
  CHECK(error_of(base + "dt = -1e-3\n").find("run.dt") != std::string::npos);
  CHECK(error_of(base + "paths = 0\n").find("run.paths") != std::string::npos);
  CHECK(error_of(base + "scheme = rk4\n").find("run.scheme") != std::string::npos);
  CHECK(error_of(base + "T = abc\n").find("run.T") != std::string::npos);
  CHECK(error_of("[run]\nkind = teleport\n[model]\nbuiltin = triad\n").find("run.kind") != std::string::npos);
}

TEST_CASE("unknown keys list the nearest known keys") {
  const auto msg = error_of("[run]\nkind = simulate\ndtt = 0.1\n");
  CHECK(msg.find("run.dtt") != std::string::npos);
  CHECK(msg.find("run.dt") != std::string::npos);
  const auto near = nearest_keys("run.sed");
  REQUIRE_FALSE(near.empty());
  CHECK(near.front() == "run.seed");
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_config("[run]\nkind = simulate\n  dt 0.1\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(e.error_class() == "config.parse");
    CHECK(e.line() == 3);
    CHECK(e.column() > 0);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[run]\nkind = simulate\nkind = validate\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run\n"), ConfigError);
}

TEST_CASE("comments and quoting") {
  const auto c = parse_config(
      "# leading\n[run] ; section comment\nkind = \"simulate\"  # trailing\nT = 2\n[model]\nbuiltin = triad\n"
      "[output]\ndir = \"a # b\"\n");
  CHECK(c.T == 2.0);
  CHECK(c.out_dir == fs::path("a # b"));
}

TEST_CASE("missing model file is a config error") {
  CHECK(error_of("[run]\nkind = validate\n[model]\nfile = /nonexistent/model.json\n").find("model.file") !=
        std::string::npos);
}

TEST_CASE("csv formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("validate on the triad writes a passing report") {
  const auto out = scratch("validate");
  const auto r = quiet_run(config_for("[run]\nkind = validate\n[model]\nbuiltin = triad\n", out));
  REQUIRE(r.exit_code == kExitOk);
  const auto text = slurp(out / "validation.csv");
  CHECK(text.rfind("check,value,ok,message\n", 0) == 0);
  CHECK(text.find("model_ok,1,true,") != std::string::npos);
}

TEST_CASE("hormander on a singly forced triad leaves spanning_level empty") {
  const auto out = scratch("hormander");
  const auto r = quiet_run(config_for("[run]\nkind = hormander\n[model]\nbuiltin = triad\nforced = 1\n", out));
  REQUIRE(r.exit_code == kExitOk);
  const auto text = slurp(out / "hormander.csv");
  CHECK(text == "level,new_vectors,span_dim,spanning_level\n0,1,1,\n1,0,1,\n");
}

TEST_CASE("hormander on the doubly forced triad spans at level 1") {
  const auto out = scratch("hormander2");
  const auto r = quiet_run(config_for("[run]\nkind = hormander\n[model]\nbuiltin = triad\n", out));
  REQUIRE(r.exit_code == kExitOk);
  CHECK(slurp(out / "hormander.csv") == "level,new_vectors,span_dim,spanning_level\n0,2,2,1\n1,1,3,1\n");
}

TEST_CASE("explicit blow-up exits with the integration class and writes no csv") {
  const auto out = scratch("blowup");
  std::string u0 = "3";
  for (int i = 1; i < 24; ++i) u0 += ",3";
  const auto r = quiet_run(config_for("[run]\nkind = simulate\nT = 10\ndt = 0.5\nscheme = explicit_em\npaths = 2\nu0 = " +
                                          u0 + "\n[model]\nbuiltin = galerkin\ncutoff = 2\n",
                                      out));
  CHECK(r.exit_code == kExitNumeric);
  CHECK(r.error_class == "integration.blowup");
  CHECK(r.message.find("path") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "trajectories.csv"));
}

TEST_CASE("u0 of the wrong size is a semantic error") {
  const auto out = scratch("u0");
  const auto r = quiet_run(config_for("[run]\nkind = simulate\nu0 = 1,2\n[model]\nbuiltin = triad\n", out));
  CHECK(r.exit_code == kExitConfig);
  CHECK(r.message.find("run.u0") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across reruns and worker counts") {
  const std::string body =
      "[run]\nkind = simulate\nT = 0.5\npaths = 6\nseed = 11\nu0 = 1,0,0\nworkers = WORKERS\n[model]\nbuiltin = triad\n";
  auto with_workers = [&](const std::string& w) {
    auto s = body;
    s.replace(s.find("WORKERS"), 7, w);
    return s;
  };
  const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  REQUIRE(quiet_run(config_for(with_workers("1"), a)).exit_code == 0);
  REQUIRE(quiet_run(config_for(with_workers("1"), b)).exit_code == 0);
  REQUIRE(quiet_run(config_for(with_workers("4"), c)).exit_code == 0);
  for (const char* f : {"trajectories.csv", "summary.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f) == slurp(c / f));
  }
}

TEST_CASE("every csv has a header row and a manifest sidecar") {
  const std::vector<std::string> kinds{"validate",      "hormander",      "simulate",     "malliavin",
                                       "ergodic",       "probe.moments",  "probe.gradient", "probe.mixing",
                                       "probe.irreducibility"};
  for (const auto& kind : kinds) {
    CAPTURE(kind);
    const auto out = scratch("all_" + kind);
    const auto r = quiet_run(config_for("[run]\nkind = " + kind +
                                            "\nT = 2\npaths = 8\nu0 = 0.5,0.2,-0.1\n[model]\nbuiltin = triad\n"
                                            "[probe]\nn_init = 3\n",
                                        out));
    REQUIRE(r.exit_code == kExitOk);
    REQUIRE_FALSE(r.files.empty());
    for (const auto& f : r.files) {
      CAPTURE(f.string());
      const auto text = slurp(f);
      const auto header = text.substr(0, text.find('\n'));
      const auto manifest = nlohmann::json::parse(slurp(f.string() + ".manifest.json"));
      CHECK(manifest.at("kind") == kind);
      CHECK(manifest.at("rows").get<std::size_t>() + 1 ==
            static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')));
      std::string joined;
      for (const auto& col : manifest.at("columns")) joined += (joined.empty() ? "" : ",") + col.get<std::string>();
      CHECK(joined == header);
      CHECK(manifest.at("inputs").at("run.seed").at("source") == "default");
      CHECK(manifest.at("inputs").at("run.T").at("source") == "line 3");
    }
  }
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for("config.parse") == kExitConfig);
  CHECK(exit_code_for("model.structure") == kExitConfig);
  CHECK(exit_code_for("precondition") == kExitConfig);
  CHECK(exit_code_for("integration.blowup") == kExitNumeric);
  CHECK(exit_code_for("malliavin.singular") == kExitNumeric);
  CHECK(exit_code_for("something.else") == kExitInternal);
}
