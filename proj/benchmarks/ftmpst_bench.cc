/*
 * Copyright (c) 2026, The ftmpst Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/

/**
 * Micro-benchmarks of projection, typing, execution and state-space
 * exploration on the toy protocol and the rotating-coordinator instance.
 */

#include <benchmark/benchmark.h>

#include "ftmpst/failure_patterns.hh"
#include "ftmpst/harness.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/projection.hh"
#include "ftmpst/semantics.hh"

namespace ftmpst {
namespace {

const char kToy[] = FTMPST_SOURCE_DIR "/protocols/toy.ftmpst";

void BM_ProjectToy(benchmark::State& state) {
  SourceFile f = ParseFile(kToy);
  const Global& g = f.Find("Toy")->global;
  for (auto _ : state) benchmark::DoNotOptimize(Project(g, 1));
}
BENCHMARK(BM_ProjectToy);

void BM_ProjectRc(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  RcSystem rc = BuildRc(n, std::vector<int64_t>(n, 1));
  for (auto _ : state)
    for (Role p = 1; p <= n; ++p) benchmark::DoNotOptimize(Project(rc.G, p));
}
BENCHMARK(BM_ProjectRc)->DenseRange(3, 5);

void BM_TypecheckRc(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  RcSystem rc = BuildRc(n, std::vector<int64_t>(n, 1));
  for (auto _ : state) benchmark::DoNotOptimize(CheckRcTyping(rc));
}
BENCHMARK(BM_TypecheckRc)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_RunRc(benchmark::State& state) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  RcRunOptions opts;
  opts.monitor = state.range(0) != 0;
  uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(RunRc(rc, ++seed, opts));
}
BENCHMARK(BM_RunRc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ExploreToy(benchmark::State& state) {
  SourceFile f = ParseFile(kToy);
  Configuration cfg = LoadConfiguration(f, "P");
  FailureFree ff;
  int depth = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Explore(cfg, ff, depth));
}
BENCHMARK(BM_ExploreToy)->Arg(12)->Arg(24);

}  // namespace
}  // namespace ftmpst

BENCHMARK_MAIN();
