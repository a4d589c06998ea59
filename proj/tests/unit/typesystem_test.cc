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
#include "ftmpst/parser.hh"
#include "ftmpst/semantics.hh"
#include "ftmpst/typesystem.hh"

#ifndef FTMPST_SOURCE_DIR
#define FTMPST_SOURCE_DIR "."
#endif

namespace ftmpst {
namespace {

const char kTwoRoles[] =
    "global G = 1 -> 2 : <Nat>.end;\n"
    "channel a : G;\n"
    "process Sys = req a[2](s).s[2, 1]?(x).0 | acc a[1](s).s[1, 2]!<5>.0;\n";

TEST(TypecheckTest, RequestAcceptSystem) {
  SourceFile f = Parse(kTwoRoles);
  Configuration cfg = LoadConfiguration(f, "Sys");
  Derivation d = Typecheck(GlobalEnv::FromSource(f), {}, cfg.term(), {});
  EXPECT_GT(d.Size(), 3u);
  EXPECT_NE(d.Explain().find("(RSend)"), std::string::npos);
}

TEST(TypecheckTest, WrongPayloadSortIsRejected) {
  SourceFile f = Parse(
      "global G = 1 -> 2 : <Nat>.end;\n"
      "channel a : G;\n"
      "process Sys = req a[2](s).s[2, 1]?(x).0 | acc a[1](s).s[1, 2]!<true>.0;");
  Configuration cfg = LoadConfiguration(f, "Sys");
  EXPECT_THROW(Typecheck(GlobalEnv::FromSource(f), {}, cfg.term(), {}),
               TypeError);
}

TEST(TypecheckTest, MissingCommunicationIsRejected) {
  SourceFile f = Parse(
      "global G = 1 -> 2 : <Nat>.end;\n"
      "channel a : G;\n"
      "process Sys = req a[2](s).0 | acc a[1](s).s[1, 2]!<1>.0;");
  Configuration cfg = LoadConfiguration(f, "Sys");
  EXPECT_THROW(Typecheck(GlobalEnv::FromSource(f), {}, cfg.term(), {}),
               TypeError);
}

TEST(TypecheckTest, ToyProcessAgainstItsProjection) {
  SourceFile f = ParseFile(FTMPST_SOURCE_DIR "/protocols/toy.ftmpst");
  Configuration cfg = LoadConfiguration(f, "P");
  SessionEnv delta = InitialEnv(f.sessions.at("s"), "s");
  GlobalEnv gamma = GlobalEnv::FromSource(f);
  Derivation a = Typecheck(gamma, {}, cfg.term(), delta);
  Derivation b = Typecheck(gamma, {}, cfg.term(), delta);
  EXPECT_EQ(a.Explain(), b.Explain());  // deterministic
  EXPECT_EQ(Coherent(gamma, delta, 0), Coherence::kCoherent);
}

TEST(TypecheckTest, LoopProgramsMustBeUnreliable) {
  SourceFile f = Parse(
      "session s : loop({1, 2}, 0, c; Nat){1 -> 2 : <Nat>.call(0) ; Nat: "
      "end};\n"
      "process P = loop(s[1][{2}], 0, c=0, (x).s[1, 2]!<x>.exit(0, x), "
      "call(0, 1), (y).0) | loop(s[2][{1}], 0, c=0, (x).s[2, 1]?(z).call(0, "
      "z), call(0, 1), (y).0);");
  Configuration cfg = LoadConfiguration(f, "P");
  SessionEnv delta = InitialEnv(f.sessions.at("s"), "s");
  try {
    Typecheck(GlobalEnv::FromSource(f), {}, cfg.term(), delta);
    FAIL() << "expected a type error";
  } catch (const TypeError& e) {
    EXPECT_NE(std::string(e.what()).find("unreliable"), std::string::npos)
        << e.what();
  }
}

SessionEnv AfterOneSend() {
  SessionEnv d;
  d.Set({"s", 2}, ParseLocal("1?<Nat>.end"));
  d.SetQueue({"s", 1, 2}, {MsgType{MsgType::Kind::kR, Sort::Nat()}});
  d.SetQueue({"s", 2, 1}, {});
  return d;
}

TEST(CoherenceTest, InitialEnvironmentIsCoherentAtBudgetZero) {
  Global G = ParseGlobal("1 -> 2 : <Nat>.end");
  GlobalEnv gamma;
  gamma.sessions["s"] = G;
  EXPECT_EQ(Coherent(gamma, InitialEnv(G, "s"), 0), Coherence::kCoherent);
}

TEST(CoherenceTest, OneSendNeedsOneStep) {
  GlobalEnv gamma;
  gamma.sessions["s"] = ParseGlobal("1 -> 2 : <Nat>.end");
  EXPECT_EQ(Coherent(gamma, AfterOneSend(), 1), Coherence::kCoherent);
  EXPECT_EQ(Coherent(gamma, AfterOneSend(), 0), Coherence::kBudgetExhausted);
  // Monotone in the budget.
  EXPECT_EQ(Coherent(gamma, AfterOneSend(), 4), Coherence::kCoherent);
}

TEST(CoherenceTest, UnproducibleQueueIsIncoherent) {
  GlobalEnv gamma;
  gamma.sessions["s"] = ParseGlobal("1 -> 2 : <Nat>.end");
  SessionEnv d = AfterOneSend();
  d.SetQueue({"s", 2, 1}, {MsgType{MsgType::Kind::kR, Sort::Nat()}});
  EXPECT_EQ(Coherent(gamma, d, 6), Coherence::kIncoherent);
}

TEST(EvolveTest, InitialRcEnvironmentEvolvesLinearly) {
  // Property: evolution steps never duplicate an actor or a queue, and each
  // successor stays coherent one step further.
  auto sut = RcSystemUnderTest(3, {0, 1, 1});
  GlobalEnv gamma;
  gamma.sessions["s"] = sut.G;
  std::vector<SessionEnv> frontier{InitialEnv(sut.G, "s")};
  for (int depth = 1; depth <= 3; ++depth) {
    std::vector<SessionEnv> next;
    for (const SessionEnv& d : frontier) {
      for (const SessionEnv& e : Evolve(d)) {
        EXPECT_LE(e.actors().size(), 3u);
        EXPECT_NO_THROW(e.Compose(SessionEnv{}));
        EXPECT_EQ(Coherent(gamma, e, depth), Coherence::kCoherent)
            << e.ToString();
        if (next.size() < 20) next.push_back(e);
      }
    }
    frontier = next;
  }
}

TEST(TypecheckTest, GeneratedSystemsTypecheck) {
  for (const auto& sut : GenerateSystems(4, 6, OperatorMix{}, 21, 60)) {
    EXPECT_NO_THROW(Typecheck(sut.gamma, {}, sut.cfg.term(), {}))
        << sut.source;
  }
}

}  // namespace
}  // namespace ftmpst
