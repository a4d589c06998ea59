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

#include "ftmpst/failure_patterns.hh"
#include "ftmpst/harness.hh"
#include "ftmpst/metatheory.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/projection.hh"

namespace ftmpst {
namespace {

TEST(GeneratorTest, DeterministicInSeed) {
  auto a = GenerateSystems(4, 6, OperatorMix{}, 5, 30);
  auto b = GenerateSystems(4, 6, OperatorMix{}, 5, 30);
  auto c = GenerateSystems(4, 6, OperatorMix{}, 6, 30);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].source, b[i].source);
    EXPECT_EQ(a[i].cfg.Key(), b[i].cfg.Key());
    differs |= a[i].source != c[i].source;
  }
  EXPECT_TRUE(differs);
}

TEST(GeneratorTest, RespectsBoundsAndTheOperatorMix) {
  auto suts = GenerateSystems(4, 6, OperatorMix::Finite(), 8, 100);
  ASSERT_EQ(suts.size(), 100u);
  for (const auto& sut : suts) {
    EXPECT_TRUE(sut.recursion_free) << sut.source;
    EXPECT_GE(sut.roles, 2);
    EXPECT_LE(sut.roles, 4);
    EXPECT_LE(sut.depth, 6);
    EXPECT_TRUE(WellFormed(sut.G).ok());
    EXPECT_EQ(sut.source.find("loop("), std::string::npos);
    EXPECT_EQ(sut.source.find("mu("), std::string::npos);
  }
}

TEST(GeneratorTest, FullMixEmitsLoopsAndRecursion) {
  auto suts = GenerateSystems(4, 6, OperatorMix{}, 9, 100);
  int loops = 0, recursive = 0;
  for (const auto& sut : suts) {
    loops += sut.source.find("loop(") != std::string::npos;
    recursive += !sut.recursion_free;
  }
  EXPECT_GT(loops, 0);
  EXPECT_GT(recursive, 0);
}

TEST(TraceCheckTest, CleanTraceHasNoFindings) {
  RcSystem rc = BuildRc(3, {0, 1, 1});
  RcRunOptions o;
  o.keep_trace = true;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    RcOutcome out = RunRc(rc, seed, o);
    auto found = CheckTrace(*out.trace);
    EXPECT_TRUE(found.empty()) << found.front().ToString();
  }
}

TEST(TraceCheckTest, TamperedDeliveryIsFound) {
  RcSystem rc = BuildRc(3, {1, 1, 1});
  RcRunOptions o;
  o.patterns = "failure-free";
  o.keep_trace = true;
  Trace tr = *RunRc(rc, 2, o).trace;
  bool tampered = false;
  for (TraceStep& ts : tr.steps) {
    if (ts.redex.rule == Rule::kUGet && ts.effect.bound) {
      ts.effect.bound = Value::Nat(7);
      tampered = true;
      break;
    }
  }
  ASSERT_TRUE(tampered);
  auto found = CheckTrace(tr);
  ASSERT_FALSE(found.empty());
  EXPECT_EQ(found.front().check, "delivery");
}

TEST(SubjectReductionTest, GeneratedSystemsUnderConstrainedChaos) {
  auto suts = GenerateSystems(3, 5, OperatorMix{}, 31, 15);
  SrOptions so;
  so.samples = 3;
  so.depth = 25;
  for (size_t i = 0; i < suts.size(); ++i) {
    auto fp = MakePatterns("chaotic-c1", i, suts[i].roles);
    so.seed = i;
    SrReport rep = CheckSubjectReduction(suts[i], *fp, so);
    EXPECT_TRUE(rep.ok()) << suts[i].source << rep.ToString();
    EXPECT_GT(rep.steps_checked, 0);
  }
}

TEST(SubjectReductionTest, RotatingCoordinator) {
  auto sut = RcSystemUnderTest(3, {0, 1, 1});
  auto fp = MakePatterns("rc-diamond-s", 4, 3);
  SrOptions so;
  so.samples = 4;
  so.depth = 30;
  SrReport rep = CheckSubjectReduction(sut, *fp, so);
  EXPECT_TRUE(rep.ok()) << rep.ToString();
}

TEST(ProgressTest, FiniteGeneratedSystems) {
  auto suts = GenerateSystems(3, 4, OperatorMix::Finite(), 41, 20);
  for (size_t i = 0; i < suts.size(); ++i) {
    auto fp = MakePatterns("chaotic-c1", i, suts[i].roles);
    ProgressReport rep = CheckProgress(suts[i], *fp, 40);
    EXPECT_TRUE(rep.ok()) << suts[i].source << rep.ToString();
    EXPECT_FALSE(rep.depth_insufficient);
  }
}

TEST(ProgressTest, UntypedDeadlockIsStuck) {
  // Two receivers waiting on each other: not typable, and stuck.
  SystemUnderTest sut;
  sut.name = "deadlock";
  sut.cfg = Configuration(ParseProcess(
      "s[1, 2]?(x).s[1, 2]!<1>.0 | s[2, 1]?(y).s[2, 1]!<1>.0 | s[1->2]:[] | "
      "s[2->1]:[]"));
  sut.roles = 2;
  FailureFree ff;
  ProgressReport rep = CheckProgress(sut, ff, 10);
  EXPECT_FALSE(rep.stuck.empty());
}

TEST(MutationSuiteTest, CounterMutationIsCaught) {
  auto suts = GenerateSystems(3, 5, OperatorMix{}, 3, 10);
  suts.push_back(RcSystemUnderTest(3, {0, 1, 1}));
  MutationReport rep = RunMutationSuite(suts, 2, 30, 3);
  EXPECT_TRUE(rep.baseline.empty());
  for (const MutationResult& r : rep.results) {
    if (r.mutation == Mutation::kLCallNoIncrement)
      EXPECT_TRUE(r.detected) << rep.ToString();
  }
}

}  // namespace
}  // namespace ftmpst
