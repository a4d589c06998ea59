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

#include <set>
#include <stdexcept>

#include "ftmpst/harness.hh"
#include "ftmpst/projection.hh"

namespace ftmpst {
namespace {

Value B() { return Value::Bottom(); }
Value N(int64_t n) { return Value::Nat(n); }
Value A(bool b) { return Value::Bool(b); }

TEST(RcFunctionsTest, CoordinatorRotates) {
  EXPECT_EQ(RcCoordinator(0, 3), 1);
  EXPECT_EQ(RcCoordinator(3, 3), 1);
  EXPECT_EQ(RcCoordinator(4, 3), 2);
  for (int n = 1; n <= 6; ++n) {
    for (int64_t r = 0; r < 20; ++r) {
      Role c = RcCoordinator(r, n);
      EXPECT_GE(c, 1);
      EXPECT_LE(c, n);
      EXPECT_EQ(RcCoordinator(r + n, n), c);
    }
  }
}

TEST(RcFunctionsTest, BestPicksMostFrequentSmallerOnTies) {
  EXPECT_EQ(RcBest({N(1), N(1), N(1)}), 1);
  EXPECT_EQ(RcBest({N(0), B(), N(0)}), 0);
  EXPECT_EQ(RcBest({N(0), N(1), B()}), 0);
  EXPECT_EQ(RcBest({N(0), N(1), N(1)}), 1);
  EXPECT_THROW(RcBest({B(), B()}), EvalError);
}

TEST(RcFunctionsTest, BestIsAlwaysAKnownEntry) {
  // Validity of a decision rests on best returning a present value.
  for (int mask = 0; mask < 3 * 3 * 3 * 3; ++mask) {
    std::vector<Value> K;
    std::set<int64_t> present;
    for (int i = 0, m = mask; i < 4; ++i, m /= 3) {
      if (m % 3 == 2) {
        K.push_back(B());
      } else {
        K.push_back(N(m % 3));
        present.insert(m % 3);
      }
    }
    if (present.empty()) continue;
    EXPECT_TRUE(present.count(RcBest(K))) << mask;
  }
}

TEST(RcFunctionsTest, CountAckCountsTrueEntries) {
  EXPECT_EQ(RcCountAck({A(true), A(true), B()}), 2);
  EXPECT_EQ(RcCountAck({A(false), B(), B()}), 0);
  EXPECT_EQ(RcCountAck({}), 0);
}

TEST(RcFunctionsTest, ThresholdIsCeilOfHalfOfOthers) {
  EXPECT_EQ(RcThreshold(3), 1);
  EXPECT_EQ(RcThreshold(4), 2);
  EXPECT_EQ(RcThreshold(5), 2);
  EXPECT_EQ(RcThreshold(6), 3);
}

TEST(BuildRcTest, RejectsInvalidInstances) {
  EXPECT_THROW(BuildRc(2, {0, 1}), std::invalid_argument);
  EXPECT_THROW(BuildRc(3, {0, 1}), std::invalid_argument);
  EXPECT_THROW(BuildRc(3, {0, 1, 2}), std::invalid_argument);
}

TEST(BuildRcTest, ProjectionOfRoleTwoLoopsWithTheOthers) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  Local T = Project(rc.G, 2);
  ASSERT_EQ(T->kind, LKind::kLoop);
  EXPECT_EQ(T->R, (RoleSet{1, 3}));
  EXPECT_EQ(T->n, 0);
}

TEST(BuildRcTest, SystemIsWellTyped) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  EXPECT_EQ(CheckRcTyping(rc), "");
}

TEST(RunRcTest, UnanimousFailureFreeDecidesInOneRound) {
  RcSystem rc = BuildRc(3, {1, 1, 1});
  RcRunOptions o;
  o.patterns = "failure-free";
  RcOutcome out = RunRc(rc, 1, o);
  ASSERT_FALSE(out.truncated);
  for (int r = 0; r < 3; ++r) {
    ASSERT_TRUE(out.decision[r].has_value());
    EXPECT_EQ(*out.decision[r], 1);
  }
  ASSERT_EQ(out.initiated.size(), 1u);
  EXPECT_EQ(out.initiated[0].actor.role, 1);
  EXPECT_LE(out.initiated[0].counter, 1);
}

TEST(RunRcTest, FailureFreeEndsWithEmptyQueues) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  RcRunOptions o;
  o.patterns = "failure-free";
  o.keep_trace = true;
  RcOutcome out = RunRc(rc, 3, o);
  ASSERT_TRUE(out.trace.has_value());
  for (const auto& [k, idx] : out.trace->final.queues()) {
    EXPECT_TRUE(out.trace->final.Queue(k)->empty()) << k.ToString();
  }
  EXPECT_TRUE(IsPrefixFree(out.trace->final));
}

TEST(RunRcTest, DeterministicInSeed) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  RcRunOptions o;
  RcOutcome a = RunRc(rc, 42, o);
  RcOutcome b = RunRc(rc, 42, o);
  EXPECT_EQ(a.ToString(), b.ToString());
  EXPECT_EQ(a.steps, b.steps);
}

TEST(RunRcTest, ForcedCrashOfFirstCoordinatorKeepsSafety) {
  RcRunOptions o;
  o.forced_crash = 1;
  o.monitor = true;
  RcReport rep = RcExperiment(3, {0, 1, 1}, 30, 5, o, 1);
  EXPECT_TRUE(rep.ok()) << rep.ToString();
  EXPECT_GT(rep.crashed_runs, 0);
}

TEST(RcExperimentTest, IndependentOfWorkerCount) {
  RcRunOptions o;
  RcReport one = RcExperiment(3, {0, 1, 1}, 8, 11, o, 1);
  RcReport two = RcExperiment(3, {0, 1, 1}, 8, 11, o, 2);
  ASSERT_EQ(one.outcomes.size(), two.outcomes.size());
  for (size_t i = 0; i < one.outcomes.size(); ++i)
    EXPECT_EQ(one.outcomes[i].ToString(), two.outcomes[i].ToString());
}

TEST(MultiExitTest, WitnessCarriesEqualValues) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  MultiExitWitness w = FindMultiExit(rc, 1);
  ASSERT_TRUE(w.found);
  ASSERT_GE(w.values.size(), 2u);
  for (const Value& v : w.values) EXPECT_EQ(v, w.values.front());
}

}  // namespace
}  // namespace ftmpst
