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

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <string>

#include "ftmpst/failure_patterns.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/semantics.hh"
#include "json.hpp"

namespace ftmpst {
namespace {

/** Every predicate answers a fixed value. */
class Fixed : public FailurePatternSet {
 public:
  bool uget = true, uskip = false, wskip = false, ml = false, crash = false,
       drop = false;
  std::string name() const override { return "fixed"; }
  bool UGet(const std::string&, Role, Role, const Label&,
            const PatternContext&) const override {
    return uget;
  }
  bool USkip(const std::string&, Role, Role, const Label&,
             const PatternContext&) const override {
    return uskip;
  }
  bool WSkip(const std::string&, Role, Role,
             const PatternContext&) const override {
    return wskip;
  }
  bool ML(const std::string&, Role, Role, const Label&,
          const PatternContext&) const override {
    return ml;
  }
  bool Crash(const Proc&, const std::set<Actor>&,
             const PatternContext&) const override {
    return crash;
  }
  bool Drop(const std::string&, Role, const Value&,
            const PatternContext&) const override {
    return drop;
  }
};

Configuration Cfg(const std::string& text) {
  return Configuration(ParseProcess(text));
}

/** The single enabled redex of rule r; fails the test otherwise. */
Redex Only(const Configuration& cfg, const FailurePatternSet& fp, Rule r) {
  std::vector<Redex> found;
  for (const Redex& rx : EnabledRedexes(cfg, fp).redexes)
    if (rx.rule == r) found.push_back(rx);
  EXPECT_EQ(found.size(), 1u) << RuleName(r) << " in " << cfg.ToString();
  return found.empty() ? Redex{} : found.front();
}

bool Same(const Configuration& cfg, const std::string& expected) {
  return Congruent(cfg.term(), ParseProcess(expected));
}

TEST(SemanticsTest, ConditionalPicksTheThenBranch) {
  Fixed fp;
  Configuration c = Cfg("if 1 < 2 then s[1, 2]!<1>.0 else crash");
  Configuration d = Step(c, Only(c, fp, Rule::kIfT));
  EXPECT_TRUE(Same(d, "s[1, 2]!<1>.0"));
}

TEST(SemanticsTest, ReliableSendAndGetAreFifo) {
  Fixed fp;
  Configuration c =
      Cfg("s[2, 1]?(x).s[2, 1]?(y).s[2, 3]!<x>.0 | s[1->2]:[r<4>, r<9>]");
  StepEffect e;
  c = Step(c, Only(c, fp, Rule::kRGet), {}, &e);
  ASSERT_TRUE(e.bound.has_value());
  EXPECT_EQ(*e.bound, Value::Nat(4));
  c = Step(c, Only(c, fp, Rule::kRGet));
  EXPECT_TRUE(Same(c, "s[2, 3]!<4>.0 | s[1->2]:[]"));
}

TEST(SemanticsTest, UnreliableSkipSubstitutesTheDefault) {
  Fixed fp;
  fp.uskip = true;
  Configuration c = Cfg("s[2, 1]?(u, 0)<7>(x).s[2, 3]!<x>.0 | s[1->2]:[]");
  Configuration d = Step(c, Only(c, fp, Rule::kUSkip));
  EXPECT_TRUE(Same(d, "s[2, 3]!<7>.0 | s[1->2]:[]"));
}

TEST(SemanticsTest, MessageLossNeedsThePattern) {
  Fixed fp;
  Configuration c = Cfg("s[1->2]:[u:(u, 0)<1>]");
  for (const Redex& rx : EnabledRedexes(c, fp).redexes)
    EXPECT_NE(rx.rule, Rule::kML);
  fp.ml = true;
  EXPECT_TRUE(Same(Step(c, Only(c, fp, Rule::kML)), "s[1->2]:[]"));
}

TEST(SemanticsTest, LoopCallIncrementsTheCounter) {
  Fixed fp;
  Configuration c = Cfg(
      "loop(s[1][{}], 0, c2=1, (x).exit(0, x + c2), call(0, 2 + 1), (y).0)");
  StepEffect e;
  Configuration d = Step(c, Only(c, fp, Rule::kLCall), {}, &e);
  EXPECT_TRUE(Same(
      d, "loop(s[1][{}], 0, c2=2, (x).exit(0, x + c2), exit(0, 3 + 1), "
         "(y).0)"))
      << d.ToString();
  EXPECT_EQ(e.counter_before, 1);
  EXPECT_EQ(e.counter_after, 2);
}

TEST(SemanticsTest, ExitBroadcastsToEveryPartner) {
  Fixed fp;
  Configuration c = Cfg(
      "loop(s[1][{2, 3}], 1, c=1, (x).exit(1, x), exit(1, 5), "
      "(y).s[1, 2]!<y>.0) | s[1->2]:[] | s[1->3]:[]");
  StepEffect e;
  Configuration d = Step(c, Only(c, fp, Rule::kLExitS), {}, &e);
  EXPECT_TRUE(Same(d, "s[1, 2]!<5>.0 | s[1->2]:[exit<1, 5>] | "
                      "s[1->3]:[exit<1, 5>]"))
      << d.ToString();
  EXPECT_EQ(e.appended.size(), 2u);
  ASSERT_TRUE(e.exit.has_value());
  EXPECT_TRUE(e.exit->initiated);
}

TEST(SemanticsTest, ExitMessageEndsThePartnersLoop) {
  Fixed fp;
  Configuration c = Cfg(
      "loop(s[2][{1}], 1, c=1, (x).exit(1, x), s[2, 1]?(u, 0)<0>(z).call(1, "
      "z), (y).s[2, 3]!<y>.0) | s[1->2]:[exit<1, 5>]");
  StepEffect e;
  Configuration d = Step(c, Only(c, fp, Rule::kLExitG), {}, &e);
  EXPECT_TRUE(Same(d, "s[2, 3]!<5>.0 | s[1->2]:[]")) << d.ToString();
  ASSERT_TRUE(e.exit.has_value());
  EXPECT_FALSE(e.exit->initiated);
}

TEST(SemanticsTest, DropRemovesExitMessagesOnlyWhenAllowed) {
  Fixed fp;
  Configuration c = Cfg("s[1->2]:[exit<1, 0>, r<3>] | s[2, 1]?(x).0");
  for (const Redex& rx : EnabledRedexes(c, fp).redexes)
    EXPECT_NE(rx.rule, Rule::kEDrop);
  fp.drop = true;
  Configuration d = Step(c, Only(c, fp, Rule::kEDrop));
  EXPECT_TRUE(Same(d, "s[1->2]:[r<3>] | s[2, 1]?(x).0"));
}

TEST(SemanticsTest, CrashReplacesTheComponent) {
  Fixed fp;
  fp.crash = true;
  Configuration c = Cfg("s[1, 2]!(u, 0)<1>.0 | s[1->2]:[]");
  StepEffect e;
  Configuration d = Step(c, Only(c, fp, Rule::kCrash), {}, &e);
  EXPECT_TRUE(Same(d, "crash | s[1->2]:[]"));
  EXPECT_TRUE(e.crashed.count({"s", 1}));
  EXPECT_TRUE(d.crashed().count({"s", 1}));
}

TEST(SemanticsTest, StronglyReliableComponentsNeverCrash) {
  Fixed fp;
  fp.crash = true;
  Configuration c = Cfg("s[1, 2]!<1>.0 | s[1->2]:[]");
  for (const Redex& rx : EnabledRedexes(c, fp).redexes)
    EXPECT_NE(rx.rule, Rule::kCrash);
}

TEST(SemanticsTest, StaleRedexIsReported) {
  Fixed fp;
  Configuration c = Cfg("if true then 0 else 0");
  Redex rx = Only(c, fp, Rule::kIfT);
  Configuration d = Step(c, rx);
  EXPECT_THROW(Step(d, rx), StaleRedex);
}

TEST(RunTest, InertAndZeroStepRuns) {
  FailureFree ff;
  RandomScheduler rs(1);
  RunOptions o;
  Trace inert = ftmpst::Run(Cfg("0"), ff, rs, o);
  EXPECT_TRUE(inert.steps.empty());
  EXPECT_FALSE(inert.truncated);
  o.max_steps = 0;
  Trace cut = ftmpst::Run(Cfg("if true then 0 else 0"), ff, rs, o);
  EXPECT_TRUE(cut.steps.empty());
  EXPECT_TRUE(cut.truncated);
}

TEST(RunTest, TraceReplaysAndSerializes) {
  SourceFile f = Parse(
      "label u : Nat;\n"
      "global G = 1 -> 2 : <Nat>.2 -> 1 : (u, 0)<Nat>.end;\n"
      "channel a : G;\n"
      "process Sys = req a[2](s).s[2, 1]?(x).s[2, 1]!(u, 0)<x>.0 | "
      "acc a[1](s).s[1, 2]!<5>.s[1, 2]?(u, 0)<0>(y).0;\n");
  Configuration cfg = LoadConfiguration(f, "Sys");
  auto fp = MakePatterns("chaotic-c1", 3);
  FairScheduler sched(5);
  RunOptions o;
  Trace tr = ftmpst::Run(cfg, *fp, sched, o);
  EXPECT_FALSE(tr.truncated);
  EXPECT_TRUE(IsPrefixFree(tr.final));
  std::string why;
  EXPECT_TRUE(Replay(tr, *fp, {}, &why)) << why;
  std::istringstream lines(tr.ToJsonl());
  std::string line;
  size_t n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("step").get<int64_t>(), static_cast<int64_t>(n));
    EXPECT_TRUE(RuleFromName(j.at("rule").get<std::string>()).has_value());
    ++n;
  }
  EXPECT_EQ(n, tr.steps.size());
}

TEST(ExploreTest, TwoRoleCommunicationHasFourStates) {
  SourceFile f = Parse(
      "global G = 1 -> 2 : <Nat>.end;\n"
      "channel a : G;\n"
      "process Sys = req a[2](s).s[2, 1]?(x).0 | acc a[1](s).s[1, 2]!<5>.0;");
  FailureFree ff;
  ExploreResult ex = Explore(LoadConfiguration(f, "Sys"), ff, 3);
  EXPECT_EQ(ex.states.size(), 4u);
  EXPECT_FALSE(ex.budget_exceeded);
}

TEST(ExploreTest, InertConfigurationIsItsOnlyState) {
  FailureFree ff;
  ExploreResult ex = Explore(Cfg("0"), ff, 5);
  EXPECT_EQ(ex.states.size(), 1u);
}

TEST(ExploreTest, BudgetIsReported) {
  Fixed fp;
  Configuration c = Cfg(
      "mu(X, c=0). s[1, 2]!(u, c)<c>.X | s[1->2]:[]");
  ExploreResult ex = Explore(c, fp, 50, 10);
  EXPECT_TRUE(ex.budget_exceeded);
}

TEST(MutationTest, NonFifoDequeueTakesTheNewestMessage) {
  Fixed fp;
  SemanticsOptions opts;
  opts.mutation = Mutation::kNonFifoDequeue;
  Configuration c = Cfg("s[2, 1]?(x).s[2, 3]!<x>.0 | s[1->2]:[r<4>, r<9>]");
  Redex rx;
  for (const Redex& r : EnabledRedexes(c, fp, 0, opts).redexes)
    if (r.rule == Rule::kRGet) rx = r;
  Configuration d = Step(c, rx, opts);
  EXPECT_TRUE(Same(d, "s[2, 3]!<9>.0 | s[1->2]:[r<4>]"));
}

}  // namespace
}  // namespace ftmpst
