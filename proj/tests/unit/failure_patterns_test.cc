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

#include <string>

#include "../common/synthetic.hh"
#include "ftmpst/failure_patterns.hh"
#include "ftmpst/harness.hh"
#include "ftmpst/parser.hh"

namespace ftmpst {
namespace {

using testing::SyntheticViolation;

TEST(PatternsTest, FactoryKnowsTheFourSets) {
  for (const char* name :
       {"failure-free", "chaotic", "chaotic-c1", "rc-diamond-s"}) {
    auto fp = MakePatterns(name, 1, 3);
    ASSERT_NE(fp, nullptr) << name;
    EXPECT_EQ(fp->name(), name);
  }
  EXPECT_EQ(MakePatterns("nope", 1), nullptr);
}

TEST(PatternsTest, CoinIsDeterministicAndInRange) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    double c = Coin(seed, "key");
    EXPECT_GE(c, 0.0);
    EXPECT_LT(c, 1.0);
    EXPECT_EQ(c, Coin(seed, "key"));
  }
  EXPECT_NE(Coin(1, "a"), Coin(1, "b"));
}

TEST(PatternsTest, ConstrainedChaoticNeverCrashesStronglyReliable) {
  Configuration cfg(ParseProcess("s[1, 2]!<1>.0 | s[1->2]:[]"));
  Proc reliable = ParseProcess("s[1, 2]!<1>.0");
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Chaotic c1(seed, true, 0.9);
    for (int64_t step = 0; step < 5; ++step) {
      EXPECT_FALSE(c1.Crash(reliable, {{"s", 1}}, {cfg, step}));
    }
  }
}

TEST(PatternsTest, ConstrainedChaoticPairsLossAndSkip) {
  // ml and the matching uskip agree on every message at every step.
  Configuration cfg(
      ParseProcess("s[2, 1]?(u, 0)<0>(x).0 | s[1->2]:[u:(u, 0)<1>]"));
  Label l{"u", {Nat(0)}};
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Chaotic c1(seed, true, 0.5);
    for (int64_t step = 0; step < 4; ++step) {
      PatternContext ctx{cfg, step};
      EXPECT_EQ(c1.ML("s", 1, 2, l, ctx), c1.USkip("s", 2, 1, l, ctx));
      EXPECT_TRUE(c1.UGet("s", 2, 1, l, ctx));
    }
  }
}

TEST(PatternsTest, FailureFreeDropsOnlyAfterTermination) {
  FailureFree ff;
  Configuration before(ParseProcess(
      "loop(s[2][{1}], 1, c=1, (x).exit(1, x), s[2, 1]?(u, 0)<0>(z).call(1, "
      "z), (y).0) | s[1->2]:[exit<1, 5>]"));
  EXPECT_FALSE(ff.Drop("s", 2, Value::Nat(1), {before, 0}));
  EXPECT_TRUE(ff.ML("s", 1, 3, Label{"u", {}}, {before, 0}));  // no s[3]
  EXPECT_FALSE(ff.ML("s", 1, 2, Label{"u", {}}, {before, 0}));
}

TEST(RcDiamondSTest, CrashesKeepAMajorityAndSpareTheDesignated) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  for (uint64_t seed = 0; seed < 50; ++seed) {
    RcPatternOptions o;
    o.seed = seed;
    o.crash_probability = 1.0;
    RcDiamondS fp(o);
    for (Role r = 1; r <= 3; ++r) {
      bool crash = fp.Crash(proc::Nil(), {{"s", r}}, {rc.cfg, 0});
      EXPECT_FALSE(crash && r == fp.designated()) << seed;
    }
    EXPECT_LT(fp.stabilization(), o.max_stabilization);
  }
}

TEST(RcDiamondSTest, DesignatedIsEventuallyTrusted) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  for (uint64_t seed = 0; seed < 50; ++seed) {
    RcPatternOptions o;
    o.seed = seed;
    o.suspicion_probability = 1.0;
    RcDiamondS fp(o);
    Role d = fp.designated();
    Role other = d == 1 ? 2 : 1;
    int64_t after = fp.stabilization();
    EXPECT_FALSE(fp.Suspects("s", other, d, {rc.cfg, after}));
    EXPECT_FALSE(fp.Suspects("s", other, d, {rc.cfg, after + 1000}));
  }
}

TEST(RcDiamondSTest, MonitorAcceptsFailureFreeAndDiamondRuns) {
  RcRunOptions o;
  o.monitor = true;
  for (const char* patterns : {"failure-free", "rc-diamond-s"}) {
    o.patterns = patterns;
    RcReport rep = RcExperiment(3, {0, 1, 1}, 20, 17, o, 1);
    EXPECT_EQ(rep.monitor_failures, 0) << patterns << "\n" << rep.ToString();
  }
}

bool Flags(const ConditionReport& rep, int item) {
  for (const auto& v : rep.violations)
    if (v.item == item) return true;
  return false;
}

TEST(MonitorTest, FlagsWskipWhileTheSenderIsAlive) {
  auto s = SyntheticViolation(6);
  ASSERT_FALSE(s.trace.steps.empty());
  EXPECT_EQ(s.trace.steps.front().redex.rule, Rule::kWSkip);
  ConditionReport rep = MonitorCondition1(s.trace, nullptr, s.semantics);
  EXPECT_TRUE(Flags(rep, 6)) << rep.ToString();
}

TEST(MonitorTest, FlagsDropBeforeTermination) {
  auto s = SyntheticViolation(8);
  ASSERT_FALSE(s.trace.steps.empty());
  EXPECT_EQ(s.trace.steps.front().redex.rule, Rule::kEDrop);
  ConditionReport rep = MonitorCondition1(s.trace, nullptr, s.semantics);
  EXPECT_TRUE(Flags(rep, 8)) << rep.ToString();
}

TEST(MonitorTest, FlagsCrashOfAStronglyReliableProcess) {
  auto s = SyntheticViolation(1);
  ASSERT_FALSE(s.trace.steps.empty());
  EXPECT_EQ(s.trace.steps.front().redex.rule, Rule::kCrash);
  ConditionReport rep = MonitorCondition1(s.trace, nullptr, s.semantics);
  EXPECT_TRUE(Flags(rep, 1)) << rep.ToString();
}

TEST(MonitorTest, OnlineAndReplayingMonitorsAgree) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  RcRunOptions o;
  o.monitor = true;
  o.keep_trace = true;
  RcOutcome out = RunRc(rc, 23, o);
  ASSERT_TRUE(out.monitor && out.trace);
  RcPatternOptions po;
  po.seed = 23;
  RcDiamondS fp(po);
  ConditionReport replayed = MonitorCondition1(*out.trace, &fp);
  EXPECT_EQ(replayed.ToString(), out.monitor->ToString());
}

}  // namespace
}  // namespace ftmpst
