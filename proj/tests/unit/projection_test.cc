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

#include "ftmpst/metatheory.hh"
#include "ftmpst/ops.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/projection.hh"

namespace ftmpst {
namespace {

const char kToyGlobal[] =
    "mu(t, c1). loop({1}, c1, c2; Nat){loop({1}, (c1, c2), c3; Nat){end ; "
    "Nat: call(c1)} ; Nat: t}";

// Local type printed for role 1 of the toy type, transcribed by hand.
const char kToyLocal[] =
    "mu(t, c1=0). loop({}, c1, c2=0; Nat){loop({}, (c1, c2), c3=0; Nat){end "
    "; call((c1, c2)) ; Nat: call(c1)} ; call(c1) ; Nat: t}";

TEST(ProjectionTest, ToyProjectsToPrintedLocalType) {
  Local got = Project(ParseGlobal(kToyGlobal), 1);
  EXPECT_TRUE(Equal(got, ParseLocal(kToyLocal))) << Pretty(got);
}

TEST(ProjectionTest, CommunicationAndRecursion) {
  Global g = ParseGlobal("mu(t, c). 1 -> 2 : <Nat>.2 -> 3 : (u, c)<Bel>.t");
  EXPECT_TRUE(Equal(Project(g, 1), ParseLocal("mu(t, c=0). 2!<Nat>.t")));
  EXPECT_TRUE(Equal(Project(g, 2),
                    ParseLocal("mu(t, c=0). 1?<Nat>.3!(u, c)<Bel>.t")));
  EXPECT_TRUE(
      Equal(Project(g, 3), ParseLocal("mu(t, c=0). 2?(u, c)<Bel>.t")));
}

TEST(ProjectionTest, UninvolvedRoleMergesEqualBranches) {
  Global g = ParseGlobal(
      "1 -> 2 : {l.2 -> 3 : <Nat>.end, m.2 -> 3 : <Nat>.end}");
  EXPECT_TRUE(Equal(Project(g, 3), ParseLocal("2?<Nat>.end")));
  EXPECT_TRUE(Equal(Project(g, 1), ParseLocal("2!{l.end, m.end}")));
}

TEST(ProjectionTest, UninvolvedRoleWithDifferentBranchesIsUndefined) {
  Global g = ParseGlobal("1 -> 2 : {l.3 -> 1 : <Nat>.end, m.end}");
  EXPECT_THROW(Project(g, 3), ProjectionError);
  EXPECT_FALSE(WellFormed(g).ok());
}

TEST(ProjectionTest, WeakBranchingKeepsTheDefaultLast) {
  Global g = ParseGlobal("1 => {2, 3} : {w.end, default d.end}");
  EXPECT_TRUE(Equal(Project(g, 1), ParseLocal("{2, 3}!!{w.end, d.end}")));
  EXPECT_TRUE(
      Equal(Project(g, 3), ParseLocal("1??{w.end, default d.end}")));
}

TEST(ProjectionTest, LoopPartnersExcludeTheProjectedRole) {
  Global g = ParseGlobal(
      "loop({1, 2, 3}, 0, c; Nat){1 -> 2 : (u, c)<Nat>.call(0) ; Nat: end}");
  Local t3 = Project(g, 3);
  ASSERT_EQ(t3->kind, LKind::kLoop);
  EXPECT_EQ(t3->R, (RoleSet{1, 2}));
  EXPECT_TRUE(Equal(t3->T0, ParseLocal("call(0)")));
}

TEST(WellFormedTest, LoopIdentifiersMustMentionEnclosingCounters) {
  EXPECT_TRUE(WellFormed(ParseGlobal(kToyGlobal)).ok());
  auto wf = WellFormed(ParseGlobal(
      "mu(t, c). loop({1, 2}, 0, c2; Nat){1 -> 2 : (u)<Nat>.call(0) ; Nat: "
      "t}"));
  ASSERT_FALSE(wf.ok());
  EXPECT_NE(wf.violations[0].find("not unique"), std::string::npos);
}

TEST(WellFormedTest, FreeTypeVariablesAreRejected) {
  EXPECT_FALSE(WellFormed(ParseGlobal("1 -> 2 : <Nat>.t")).ok());
}

TEST(ProjectionTest, GeneratedSystemsProjectOntoEveryRole) {
  // Property: the generator only emits well-formed types, so projection is
  // total on their roles and every projection mentions only roles of G.
  for (const auto& sut : GenerateSystems(4, 6, OperatorMix{}, 7, 80)) {
    ASSERT_TRUE(WellFormed(sut.G).ok()) << Pretty(sut.G);
    std::set<Role> roles = Roles(sut.G);
    for (const auto& [r, T] : ProjectAll(sut.G)) {
      EXPECT_TRUE(roles.count(r));
      for (Role q : Roles(T)) EXPECT_TRUE(roles.count(q)) << Pretty(T);
    }
  }
}

}  // namespace
}  // namespace ftmpst
