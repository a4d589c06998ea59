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
 * Acceptance run: one PASS/FAIL line per criterion. Tolerances and budgets
 * are the constants below; the process exits 1 if any criterion fails.
 */

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../common/synthetic.hh"
#include "ftmpst/failure_patterns.hh"
#include "ftmpst/harness.hh"
#include "ftmpst/metatheory.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/projection.hh"
#include "ftmpst/semantics.hh"
#include "ftmpst/typesystem.hh"

#ifndef FTMPST_SOURCE_DIR
#define FTMPST_SOURCE_DIR "."
#endif

namespace ftmpst {
namespace {

// Pinned budgets (seconds) and sizes.
constexpr double kProjectionBudget = 1.0;
constexpr double kReplayBudget = 5.0;
constexpr double kRcTypingBudget = 10.0;
constexpr double kDeterminacyBudget = 5.0;
constexpr double kMonitorBudget = 5.0;
constexpr int kReplayDepth = 12;
constexpr int kSrRcTraces = 500;
constexpr int kSrRcPatternSeeds = 50;
constexpr int kSrTraceDepth = 30;
constexpr int kSrSystems = 200;
constexpr int kSrSamplesPerSystem = 3;
constexpr int kProgressSystems = 200;
constexpr int kProgressRoles = 4;
constexpr int kProgressDepth = 6;
constexpr int kProgressExploreDepth = 64;
constexpr int kRcRuns = 1000;
constexpr int kFailureFreeRuns = 20;
constexpr uint64_t kSeed = 20260101;

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  int id;
  bool pass;
  double seconds;
  std::string detail;
};

std::vector<Line> g_lines;

void Report(int id, bool pass, double seconds, const std::string& detail) {
  g_lines.push_back({id, pass, seconds, detail});
  std::printf("criterion %d: %s (%.2f s) %s\n", id, pass ? "PASS" : "FAIL",
              seconds, detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// 1. Toy projection.

const char kToyLocal[] =
    "mu(t, c1=0). loop({}, c1, c2=0; Nat){loop({}, (c1, c2), c3=0; Nat){end "
    "; call((c1, c2)) ; Nat: call(c1)} ; call(c1) ; Nat: t}";

void Criterion1() {
  auto t0 = Clock::now();
  SourceFile f = ParseFile(FTMPST_SOURCE_DIR "/protocols/toy.ftmpst");
  Local got = Project(f.Find("Toy")->global, 1);
  bool equal = Equal(got, ParseLocal(kToyLocal));
  double s = Since(t0);
  Report(1, equal && s < kProjectionBudget, s,
         equal ? "projection onto role 1 equals the printed local type"
               : "got " + Pretty(got));
}

// ---------------------------------------------------------------------------
// 2. Toy trace replay.

/** Inner loop P_{c1,c2}(x) of the toy process with literal arguments. */
std::string Inner(const std::string& c1, const std::string& c2,
                  const std::string& arg) {
  std::string id = "(" + c1 + ", " + c2 + ")";
  return "loop(s[1][{}], " + id + ", c3=0, (x2).exit(" + id +
         ", x2 + 1), call(" + id + ", " + arg +
         " + 1), (y2).if y2 < 5 then call(" + c1 + ", y2 + 1) else exit(" +
         c1 + ", y2 + 1))";
}

/** The recursion mu(X, c1=n). P_{c1}. */
std::string Recursion(int n) {
  return "mu(X, c1=" + std::to_string(n) + "). loop(s[1][{}], c1, c2=0, (x)." +
         Inner("c1", "c2", "x") + ", call(c1, 0), (y).X)";
}

/** Outer loop with counter value c2 and the given current body. */
std::string Outer(int c1, int c2, const std::string& body, int next) {
  std::string id = std::to_string(c1);
  return "loop(s[1][{}], " + id + ", c2=" + std::to_string(c2) + ", (x)." +
         Inner(id, "c2", "x") + ", " + body + ", (y)." + Recursion(next) + ")";
}

void Criterion2() {
  auto t0 = Clock::now();
  SourceFile f = ParseFile(FTMPST_SOURCE_DIR "/protocols/toy.ftmpst");
  Configuration cfg = LoadConfiguration(f, "P");
  // Printed derivatives; true marks a single step, false a step sequence.
  std::vector<std::pair<std::string, bool>> expected = {
      {Outer(0, 0, "call(0, 0)", 1), true},
      {Outer(0, 1, Inner("0", "0", "0"), 1), true},
      {Outer(0, 1, "call(0, 2 + 1)", 1), false},
      {Outer(0, 2, Inner("0", "1", "3"), 1), true},
      {Outer(0, 2, "exit(0, 5 + 1)", 1), false},
      {Recursion(1), true},  // {6/y}: y does not occur in the continuation
      {Outer(1, 0, "call(1, 0)", 2), true},
  };
  FailureFree ff;
  ExploreResult ex = Explore(cfg, ff, kReplayDepth);
  std::set<size_t> reached{0};
  size_t matched = 0;
  for (const auto& [text, single] : expected) {
    Proc want = ParseProcess(text);
    std::set<size_t> next;
    std::vector<size_t> stack(reached.begin(), reached.end());
    std::set<size_t> seen;
    while (!stack.empty()) {
      size_t u = stack.back();
      stack.pop_back();
      for (size_t v : ex.successors[u]) {
        if (Congruent(ex.states[v].term(), want)) next.insert(v);
        if (!single && seen.insert(v).second) stack.push_back(v);
      }
    }
    if (next.empty()) break;
    reached = next;
    ++matched;
  }
  double s = Since(t0);
  bool ok = matched == expected.size() && s < kReplayBudget;
  std::ostringstream d;
  d << matched << "/" << expected.size()
    << " printed derivatives matched in order, " << ex.states.size()
    << " states at depth " << kReplayDepth;
  Report(2, ok, s, d.str());
}

// ---------------------------------------------------------------------------
// 3. RC typing.

void Criterion3() {
  auto t0 = Clock::now();
  std::map<int, std::vector<int64_t>> instances = {
      {3, {0, 1, 1}}, {4, {0, 1, 1, 0}}, {5, {0, 1, 1, 0, 1}}};
  std::string errors;
  for (const auto& [n, beliefs] : instances) {
    std::string err = CheckRcTyping(BuildRc(n, beliefs));
    if (!err.empty()) errors += " n=" + std::to_string(n) + ": " + err;
  }
  double s = Since(t0);
  Report(3, errors.empty() && s < kRcTypingBudget, s,
         errors.empty() ? "n = 3, 4, 5 well-typed and coherent at budget 0"
                        : errors);
}

// ---------------------------------------------------------------------------
// 4. Subject reduction.

void Criterion4() {
  auto t0 = Clock::now();
  std::ostringstream d;
  bool ok = true;
  // RC(3) under rc-diamond-s, spread over several pattern instances.
  SystemUnderTest rc = RcSystemUnderTest(3, {0, 1, 1});
  int rc_traces = 0;
  int64_t rc_steps = 0;
  size_t rc_bad = 0;
  std::string first;
  for (int i = 0; i < kSrRcPatternSeeds; ++i) {
    auto fp = MakePatterns("rc-diamond-s", DeriveSeed(kSeed, i), 3);
    SrOptions so;
    so.depth = kSrTraceDepth;
    so.samples = kSrRcTraces / kSrRcPatternSeeds;
    so.seed = DeriveSeed(kSeed, 100 + i);
    SrReport rep = CheckSubjectReduction(rc, *fp, so);
    rc_traces += rep.samples;
    rc_steps += rep.steps_checked;
    rc_bad += rep.violations.size();
    if (!rep.ok() && first.empty()) first = rep.violations[0].ToString();
  }
  ok &= rc_bad == 0 && rc_traces == kSrRcTraces;
  d << "rc: " << rc_traces << " traces, " << rc_steps << " steps, " << rc_bad
    << " violations; ";
  // Generated systems under chaotic-c1.
  auto suts = GenerateSystems(4, 6, OperatorMix{}, kSeed, kSrSystems);
  int64_t gen_steps = 0;
  size_t gen_bad = 0;
  for (size_t i = 0; i < suts.size(); ++i) {
    auto fp = MakePatterns("chaotic-c1", DeriveSeed(kSeed, 1000 + i),
                           suts[i].roles);
    SrOptions so;
    so.depth = kSrTraceDepth;
    so.samples = kSrSamplesPerSystem;
    so.seed = DeriveSeed(kSeed, 2000 + i);
    SrReport rep = CheckSubjectReduction(suts[i], *fp, so);
    gen_steps += rep.steps_checked;
    gen_bad += rep.violations.size();
    if (!rep.ok() && first.empty())
      first = suts[i].name + ": " + rep.violations[0].ToString();
  }
  ok &= gen_bad == 0 && suts.size() == static_cast<size_t>(kSrSystems);
  d << "generated: " << suts.size() << " systems, " << gen_steps
    << " steps, " << gen_bad << " violations; ";
  // Mutation sensitivity.
  std::vector<SystemUnderTest> mut(suts.begin(), suts.begin() + 30);
  mut.push_back(rc);
  MutationReport mr = RunMutationSuite(mut, 3, kSrTraceDepth, kSeed);
  int detected = 0;
  for (const auto& r : mr.results) {
    detected += r.detected;
    d << MutationName(r.mutation) << "->" << (r.detected ? r.by : "missed")
      << " ";
  }
  ok &= mr.ok() && detected == 6 && mr.results.size() == 6;
  d << "(" << detected << "/6 mutations detected)";
  if (!first.empty()) d << " first violation: " << first;
  Report(4, ok, Since(t0), d.str());
}

// ---------------------------------------------------------------------------
// 5. Progress.

void Criterion5() {
  auto t0 = Clock::now();
  auto suts = GenerateSystems(kProgressRoles, kProgressDepth,
                              OperatorMix::Finite(), kSeed + 5,
                              kProgressSystems);
  size_t states = 0, bad = 0, free_ok = 0;
  std::string first;
  for (size_t i = 0; i < suts.size(); ++i) {
    if (!suts[i].recursion_free || suts[i].roles > kProgressRoles ||
        suts[i].depth > kProgressDepth) {
      ++bad;
      continue;
    }
    ++free_ok;
    for (const char* name : {"failure-free", "chaotic-c1"}) {
      auto fp = MakePatterns(name, DeriveSeed(kSeed, 5000 + i), suts[i].roles);
      ProgressReport rep = CheckProgress(suts[i], *fp, kProgressExploreDepth);
      states += rep.states;
      if (!rep.ok() || rep.depth_insufficient || rep.budget_exceeded) {
        ++bad;
        if (first.empty())
          first = suts[i].name + " (" + name + "): " + rep.ToString();
      }
    }
  }
  std::ostringstream d;
  d << free_ok << " recursion- and loop-free systems explored exhaustively "
    << "under failure-free and chaotic-c1, " << states << " states, " << bad
    << " failing";
  if (!first.empty()) d << "; " << first;
  Report(5, bad == 0 && free_ok >= kProgressSystems, Since(t0), d.str());
}

// ---------------------------------------------------------------------------
// 6 and 7: RC runs; their traces feed criterion 8.

struct MonitorTally {
  int traces = 0;
  int violations = 0;
  double seconds = 0;
};

MonitorTally g_monitor;

void Tally(const RcReport& rep) {
  for (const RcOutcome& o : rep.outcomes) {
    if (!o.monitor) continue;
    ++g_monitor.traces;
    g_monitor.violations += static_cast<int>(o.monitor->violations.size());
    g_monitor.seconds += o.monitor_seconds;
  }
}

void Criterion6() {
  auto t0 = Clock::now();
  RcRunOptions o;
  o.monitor = true;
  RcReport rep = RcExperiment(3, {0, 1, 1}, kRcRuns, kSeed, o);
  Tally(rep);
  int max_crashes = 0;
  for (const RcOutcome& out : rep.outcomes) {
    int c = 0;
    for (bool b : out.crashed) c += b;
    max_crashes = std::max(max_crashes, c);
  }
  std::ostringstream d;
  d << rep.outcomes.size() << " runs: agreement "
    << rep.outcomes.size() - rep.agreement_failures << "/"
    << rep.outcomes.size() << ", validity "
    << rep.outcomes.size() - rep.validity_failures << "/"
    << rep.outcomes.size() << ", termination within 3n rounds "
    << rep.outcomes.size() - rep.termination_failures << "/"
    << rep.outcomes.size() << "; " << rep.crashed_runs
    << " runs with a crash (max " << max_crashes << "), "
    << rep.multi_exit_runs << " with several exits";
  bool ok = rep.agreement_failures == 0 && rep.validity_failures == 0 &&
            rep.termination_failures == 0 && max_crashes <= 1 &&
            static_cast<int>(rep.outcomes.size()) == kRcRuns;
  Report(6, ok, Since(t0), d.str());
}

/** Most frequent belief, ties toward the smaller value; computed here
 * independently of the library. */
int64_t Majority(const std::vector<int64_t>& beliefs) {
  std::map<int64_t, int> freq;
  for (int64_t b : beliefs) ++freq[b];
  int64_t best = freq.begin()->first;
  for (const auto& [v, c] : freq)
    if (c > freq[best]) best = v;
  return best;
}

void Criterion7() {
  auto t0 = Clock::now();
  std::vector<int64_t> beliefs = {0, 1, 1};
  int64_t want = Majority(beliefs);
  RcRunOptions o;
  o.patterns = "failure-free";
  o.monitor = true;
  RcReport rep = RcExperiment(3, beliefs, kFailureFreeRuns, kSeed + 7, o);
  Tally(rep);
  int good = 0;
  std::string first;
  for (const RcOutcome& out : rep.outcomes) {
    bool ok = !out.truncated && out.initiated.size() == 1 &&
              out.initiated[0].actor.role == RcCoordinator(0, 3) &&
              out.initiated[0].counter <= 1;
    for (const auto& d : out.decision) ok &= d.has_value() && *d == want;
    good += ok;
    if (!ok && first.empty()) first = out.ToString();
  }
  std::ostringstream d;
  d << good << "/" << rep.outcomes.size() << " failure-free runs decide "
    << want << " by the round-0 coordinator with exit counter <= 1";
  if (!first.empty()) d << "; " << first;
  double s = Since(t0);
  Report(7, good == kFailureFreeRuns && s < kDeterminacyBudget, s, d.str());
}

// ---------------------------------------------------------------------------
// 8. Condition 1 monitor.

void Criterion8() {
  auto t0 = Clock::now();
  int flagged = 0;
  std::ostringstream d;
  for (int item : {6, 8, 1}) {
    auto syn = testing::SyntheticViolation(item);
    ConditionReport rep = MonitorCondition1(syn.trace, nullptr, syn.semantics);
    bool hit = false;
    for (const auto& v : rep.violations) hit |= v.item == item;
    flagged += hit;
    d << "1." << item << (hit ? " flagged" : " missed") << ", ";
  }
  double own = Since(t0);
  double total = own + g_monitor.seconds;
  d << g_monitor.violations << " violations on " << g_monitor.traces
    << " traces of criteria 6 and 7 (monitor time " << g_monitor.seconds
    << " s)";
  bool ok = flagged == 3 && g_monitor.violations == 0 &&
            g_monitor.traces == kRcRuns + kFailureFreeRuns &&
            total < kMonitorBudget;
  Report(8, ok, total, d.str());
}

int Main() {
  std::vector<std::function<void()>> criteria = {
      Criterion1, Criterion2, Criterion3, Criterion4,
      Criterion5, Criterion6, Criterion7, Criterion8};
  for (size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      Report(static_cast<int>(i) + 1, false, 0,
             std::string("exception: ") + e.what());
    }
  }
  int failed = 0;
  for (const Line& l : g_lines) failed += !l.pass;
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(g_lines.size()) - failed, g_lines.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace ftmpst

int main() { return ftmpst::Main(); }
