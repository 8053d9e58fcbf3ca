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

#include <benchmark/benchmark.h>

#include <vector>

#include "bilinsde/brackets.hpp"
#include "bilinsde/malliavin.hpp"
#include "bilinsde/model.hpp"
#include "bilinsde/rng.hpp"
#include "bilinsde/sde.hpp"
#include "bilinsde/variational.hpp"

using namespace bilinsde;

namespace {

Vector generic_state(int n) {
  Vector u(n);
  for (int i = 0; i < n; ++i) u[i] = std::sin(1.3 * i + 0.4);
  return u;
}

void BM_PhiloxBlock(benchmark::State& state) {
  Philox4x32::Counter c{0, 0, 0, 0};
  const Philox4x32::Key k{0x12345678u, 0x9abcdef0u};
  for (auto _ : state) {
    c[0]++;
    benchmark::DoNotOptimize(Philox4x32::generate(c, k));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxBlock);

void BM_GaussianFill(benchmark::State& state) {
  const GaussianStream g(1, 2);
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  std::uint64_t step = 0;
  for (auto _ : state) {
    g.fill(step++, static_cast<int>(out.size()), out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GaussianFill)->Arg(2)->Arg(64);

void BM_SimulateTriad(benchmark::State& state) {
  const auto m = make_triad({1, 1, -2}, 1.0, {1, 2});
  SimulationOptions o;
  o.T = 10.0;
  std::uint64_t p = 0;
  for (auto _ : state) {
    o.stream_id = p++;
    benchmark::DoNotOptimize(simulate(m, Vector::Ones(3), o).states.data());
  }
  state.SetItemsProcessed(state.iterations() * step_count(o.T, o.dt));
}
BENCHMARK(BM_SimulateTriad);

void BM_SimulateGalerkin(benchmark::State& state) {
  const auto m = make_galerkin_nse2d(static_cast<int>(state.range(0)), 1.0, {{1, 0}, {1, 1}});
  SimulationOptions o;
  o.T = 1.0;
  std::uint64_t p = 0;
  for (auto _ : state) {
    o.stream_id = p++;
    benchmark::DoNotOptimize(simulate(m, generic_state(m->dim()), o).states.data());
  }
  state.SetItemsProcessed(state.iterations() * step_count(o.T, o.dt));
  state.counters["N"] = m->dim();
}
BENCHMARK(BM_SimulateGalerkin)->Arg(1)->Arg(2)->Arg(3);

void BM_MalliavinAssembly(benchmark::State& state) {
  const auto m = make_galerkin_nse2d(static_cast<int>(state.range(0)), 1.0, {{1, 0}, {1, 1}});
  SimulationOptions o;
  o.T = 1.0;
  const auto tr = simulate(m, generic_state(m->dim()), o);
  const TangentPropagator prop(tr);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_malliavin(tr, prop).matrix().data());
  state.counters["N"] = m->dim();
}
BENCHMARK(BM_MalliavinAssembly)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_WLadder(benchmark::State& state) {
  const auto m = make_galerkin_nse2d(static_cast<int>(state.range(0)), 1.0, {{1, 0}, {1, 1}});
  for (auto _ : state) benchmark::DoNotOptimize(build_W_ladder(*m, 10).span_dim.back());
  state.counters["N"] = m->dim();
}
BENCHMARK(BM_WLadder)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_PointwiseHormander(benchmark::State& state) {
  const auto m = make_galerkin_nse2d(2, 1.0, {{1, 0}, {1, 1}});
  const Vector u = generic_state(m->dim());
  for (auto _ : state) benchmark::DoNotOptimize(check_hormander_at_point(*m, u, 4).span_dim);
}
BENCHMARK(BM_PointwiseHormander)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
