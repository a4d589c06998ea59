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
#include <vector>

#include "ftmpst/metatheory.hh"
#include "ftmpst/ops.hh"
#include "ftmpst/parser.hh"

namespace ftmpst {
namespace {

TEST(ExprTest, EvaluatesArithmeticAndComparisons) {
  EXPECT_EQ(Eval(ParseExpr("(4 mod 3) + 1"), {}), Value::Nat(2));
  EXPECT_EQ(Eval(ParseExpr("x + 1 < 5"), {{"x", Value::Nat(3)}}),
            Value::Bool(true));
  EXPECT_EQ(Eval(ParseExpr("not (1 = 2) and true"), {}), Value::Bool(true));
  EXPECT_THROW(Eval(ParseExpr("y + 1"), {}), EvalError);
  EXPECT_THROW(Eval(ParseExpr("true + 1"), {}), EvalError);
}

TEST(ExprTest, KnowledgeHelpersAreReachableByName) {
  EXPECT_EQ(Eval(ParseExpr("best((0, 1, 1))"), {}), Value::Nat(1));
  EXPECT_EQ(Eval(ParseExpr("best((0, bot, 0))"), {}), Value::Nat(0));
  EXPECT_EQ(Eval(ParseExpr("countAck((true, true, bot))"), {}),
            Value::Nat(2));
  EXPECT_EQ(Eval(ParseExpr("known((true, bot, 0))"), {}), Value::Nat(2));
}

TEST(ExprTest, SubstitutionReplacesEveryOccurrence) {
  Expr e = Subst(ParseExpr("(c1, c2 + c2)"), "c2", Nat(4));
  EXPECT_EQ(Eval(e, {{"c1", Value::Nat(0)}}),
            Value::Tuple({Value::Nat(0), Value::Nat(8)}));
  EXPECT_FALSE(Mentions(e, "c2"));
}

TEST(SortTest, BelAndAckAreLiteralSubsorts) {
  EXPECT_TRUE(Value::Nat(0).HasSort(Sort::Bel()));
  EXPECT_TRUE(Value::Nat(1).HasSort(Sort::Bel()));
  EXPECT_FALSE(Value::Nat(2).HasSort(Sort::Bel()));
  EXPECT_TRUE(Value::Bool(false).HasSort(Sort::Ack()));
}

TEST(LabelTest, CompatibilityInspectsOnlyTheSymbol) {
  Label a{"p1", {Nat(0)}};
  Label b{"p1", {Nat(3)}};
  Label c{"p2", {Nat(0)}};
  EXPECT_TRUE(LabelsCompatible(a, b));
  EXPECT_FALSE(LabelEqual(a, b));
  EXPECT_FALSE(LabelsCompatible(a, c));
}

TEST(RoleSetTest, SortedAndDuplicateFree) {
  EXPECT_EQ(MakeRoleSet({3, 1, 3, 2}), (RoleSet{1, 2, 3}));
}

const char* kGlobals[] = {
    "end",
    "1 -> 2 : <Nat>.end",
    "1 -> 2 : (u, 0)<Bel>.end",
    "1 -> 2 : {l.end, m.2 -> 1 : <Bool>.end}",
    "1 => {2, 3} : {w.end, default d.end}",
    "mu(t, c1). loop({1}, c1, c2; Nat){loop({1}, (c1, c2), c3; Nat){end ; "
    "Nat: call(c1)} ; Nat: t}",
    "loop({1, 2, 3}, 1, r; Bel){case (r mod 3) + 1 of {1: call(1), 2: "
    "call(1), 3: call(1)} ; Bel: end}",
    "(1 -> 2 : <Nat>.end | 3 -> 4 : <Nat>.end)",
};

TEST(ParserTest, GlobalTypesRoundTrip) {
  for (const char* text : kGlobals) {
    Global g = ParseGlobal(text);
    Global again = ParseGlobal(Pretty(g));
    EXPECT_TRUE(Equal(g, again)) << text << "\n" << Pretty(g);
    EXPECT_EQ(Pretty(again), Pretty(g));
  }
}

const char* kLocals[] = {
    "end",
    "2!<Nat>.end",
    "1?(u, 0)<Bel>.end",
    "mu(t, c1=0). loop({}, c1, c2=0; Nat){loop({}, (c1, c2), c3=0; Nat){end "
    "; call((c1, c2)) ; Nat: call(c1)} ; call(c1) ; Nat: t}",
};

TEST(ParserTest, LocalTypesRoundTrip) {
  for (const char* text : kLocals) {
    Local t = ParseLocal(text);
    EXPECT_TRUE(Equal(t, ParseLocal(Pretty(t)))) << text;
  }
}

const char* kProcs[] = {
    "0",
    "crash",
    "s[1, 2]!<5>.0",
    "s[2, 1]?(x).if x < 5 then 0 else crash",
    "s[1, 2]!(u, 0)<1>.s[1, 2]?(v, 0)<0>(y).0",
    "s[1, {2, 3}]!!{w}.0",
    "s[2, 1]??{w.0, default d.0}",
    "s[1->2]:[r<1>, u:(p1, 0)<1>, exit<1, 0>]",
    "new s. (s[1, 2]!<1>.0 | s[2, 1]?(x).0)",
    "mu(X, c1=0). loop(s[1][{}], c1, c2=0, (x).exit(c1, x + 1), call(c1, "
    "0), (y).X)",
    "req a[2](s).0 | acc a[1](s).0",
};

TEST(ParserTest, ProcessesRoundTrip) {
  for (const char* text : kProcs) {
    Proc p = ParseProcess(text);
    Proc again = ParseProcess(Pretty(p));
    EXPECT_TRUE(Equal(p, again)) << text << "\n" << Pretty(p);
  }
}

TEST(ParserTest, GeneratedTermsRoundTrip) {
  // Property: parse(pretty(x)) == x over generated types and processes.
  auto suts = GenerateSystems(4, 6, OperatorMix{}, 99, 60);
  ASSERT_EQ(suts.size(), 60u);
  for (const auto& sut : suts) {
    EXPECT_TRUE(Equal(sut.G, ParseGlobal(Pretty(sut.G)))) << Pretty(sut.G);
    Proc p = sut.cfg.term();
    EXPECT_TRUE(Equal(p, ParseProcess(Pretty(p)))) << Pretty(p);
  }
}

TEST(ParserTest, ErrorsCarryPositions) {
  try {
    Parse("global G = 1 -> 2 : <Nat>.\n  end;\nprocess P = s[1, 2]!<>.0;");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 3);
    EXPECT_NE(std::string(e.what()).find("3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ParseGlobal("1 -> 2 : <Nat>"), ParseError);
  EXPECT_THROW(ParseProcess("loop(s[1][{}], 0)"), ParseError);
}

TEST(ParserTest, FileDeclarations) {
  SourceFile f = Parse(
      "label p1 : Bel;\n"
      "global G = 1 -> 2 : (p1, 0)<Bel>.end;\n"
      "channel a : G;\n"
      "session s : G;\n"
      "process P = s[1, 2]!(p1, 0)<1>.0;\n");
  ASSERT_NE(f.Find("G"), nullptr);
  EXPECT_EQ(f.Find("G")->kind, DeclKind::kGlobal);
  EXPECT_EQ(f.Find("P")->kind, DeclKind::kProcess);
  EXPECT_EQ(f.labels.at("p1"), Sort::Bel());
  EXPECT_TRUE(f.channels.count("a"));
  EXPECT_TRUE(f.sessions.count("s"));
  EXPECT_EQ(f.Find("Q"), nullptr);
}

TEST(OpsTest, SubstitutionAvoidsCapture) {
  // Replacing X by a process mentioning free y must not be captured by the
  // receive binder y.
  Proc body = ParseProcess("s[2, 1]?(y).X");
  Proc q = ParseProcess("s[2, 1]!<y>.0");
  Proc r = SubstVar(body, "X", q);
  EXPECT_TRUE(FreeNames(r).count("y"));
}

TEST(OpsTest, StructuralCongruence) {
  EXPECT_TRUE(Congruent(ParseProcess("s[1, 2]!<1>.0 | 0"),
                        ParseProcess("s[1, 2]!<1>.0")));
  EXPECT_TRUE(Congruent(ParseProcess("s[1, 2]!<1>.0 | s[2, 1]?(x).0"),
                        ParseProcess("s[2, 1]?(z).0 | s[1, 2]!<1>.0")));
  EXPECT_TRUE(Congruent(ParseProcess("new s. s[1, 2]!<1>.0"),
                        ParseProcess("new t. t[1, 2]!<1>.0")));
  EXPECT_FALSE(Congruent(ParseProcess("s[1, 2]!<1>.0"),
                         ParseProcess("s[1, 2]!<2>.0")));
}

TEST(OpsTest, ReliabilityPredicates) {
  EXPECT_TRUE(Nsr(ParseProcess("s[1, 2]!(u, 0)<1>.0")));
  EXPECT_TRUE(Unr(ParseProcess("s[1, 2]!(u, 0)<1>.0")));
  EXPECT_FALSE(Nsr(ParseProcess("s[1, 2]!<1>.0")));
  EXPECT_FALSE(Unr(ParseProcess("s[1, {2}]!!{w}.0")));
}

}  // namespace
}  // namespace ftmpst
