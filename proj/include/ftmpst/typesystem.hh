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

#ifndef FTMPST_TYPESYSTEM_HH_
#define FTMPST_TYPESYSTEM_HH_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftmpst/ops.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/syntax.hh"

namespace ftmpst {

/** Gamma: sorts of names, global types of shared channels and running
 * sessions, and sorts of unreliable labels. Each key is bound once. */
struct GlobalEnv {
  SortEnv names;
  std::map<std::string, Global> channels;
  std::map<std::string, Sort> labels;
  /** Sessions already running in the typed term (free session names). */
  std::map<std::string, Global> sessions;

  static GlobalEnv FromSource(const SourceFile& file);
  /** Gamma o x:S; throws TypeError if x is bound already. */
  GlobalEnv With(const std::string& x, const Sort& s) const;
};

/** Theta: process variables and the loops whose program is being typed. */
struct LoopEnv {
  struct VarEntry {
    Actor actor;
    std::string t;
  };
  struct LoopEntry {
    Expr id;
    Actor actor;
    Sort S0, S2;
  };
  std::map<std::string, VarEntry> vars;
  std::vector<LoopEntry> loops;

  bool NoLoop() const { return loops.empty(); }
  std::string ToString() const;
};

/**
 * Delta: local types of actors and message-type lists of queues. Actors of
 * type end are absent; queues are present even when empty.
 */
class SessionEnv {
 public:
  SessionEnv() = default;

  const std::map<Actor, Local>& actors() const { return actors_; }
  const std::map<QueueKey, std::vector<MsgType>>& queues() const {
    return queues_;
  }

  /** Sets a's type; end removes a. */
  void Set(const Actor& a, const Local& T);
  void Erase(const Actor& a) { actors_.erase(a); }
  const Local* Find(const Actor& a) const;
  void SetQueue(const QueueKey& k, std::vector<MsgType> msgs);
  void EraseQueue(const QueueKey& k) { queues_.erase(k); }
  const std::vector<MsgType>* FindQueue(const QueueKey& k) const;

  bool empty() const { return actors_.empty() && queues_.empty(); }
  /** Entries of session s only. */
  SessionEnv Restrict(const std::string& s) const;
  /** Entries of every session other than s. */
  SessionEnv Without(const std::string& s) const;
  std::set<std::string> Sessions() const;
  /** Disjoint union; throws TypeError on a shared actor or queue. */
  SessionEnv Compose(const SessionEnv& other) const;

  /** Canonical text, equal for alpha-equivalent environments. */
  std::string Key() const;
  std::string ToString() const;

 private:
  std::map<Actor, Local> actors_;
  std::map<QueueKey, std::vector<MsgType>> queues_;
};

/** One rule instance of a typing derivation. */
struct Derivation {
  std::string rule;
  std::string conclusion;
  std::vector<Derivation> premises;

  /** Indented proof tree, one node per line. */
  std::string Explain() const;
  size_t Size() const;
};

/** No rule applies; carries the failing sub-process and the environments. */
class TypeError : public std::runtime_error {
 public:
  TypeError(const std::string& what, std::string process = "",
            std::string expected = "", std::string actual = "");
  const std::string& process() const { return process_; }
  const std::string& expected() const { return expected_; }
  const std::string& actual() const { return actual_; }

 private:
  std::string process_, expected_, actual_;
};

/** Gamma |- e : S. Throws TypeError when e is open in Gamma or ill-sorted. */
Sort SortOf(const GlobalEnv& gamma, const Expr& e);

struct TypeOptions {
  /** Candidate environments for restricted sessions, tried in order. */
  std::map<std::string, std::vector<SessionEnv>> pool;
  /** Evolution steps searched from the initial environment of a global
   * type when the pool has no fitting candidate. */
  int res2_budget = 2;
  /** Receives the environment chosen for each restricted session. */
  std::map<std::string, SessionEnv>* chosen = nullptr;
};

/** Gamma, Theta |- P |> Delta in checking mode; throws TypeError. */
Derivation Typecheck(const GlobalEnv& gamma, const LoopEnv& theta,
                     const Proc& P, const SessionEnv& delta,
                     const TypeOptions& opts = {});

/** Resolves every case whose scrutinee is closed. */
Local Simplify(const Local& T);

/** Projections of G onto every role as actors of s plus empty queues. */
SessionEnv InitialEnv(const Global& G, const std::string& s);

/** Every Delta' with Delta |-> Delta' (one step of the evolution). */
std::vector<SessionEnv> Evolve(const SessionEnv& delta);

enum class Coherence { kCoherent, kIncoherent, kBudgetExhausted };
const char* CoherenceName(Coherence c);

/**
 * For every session s of delta, some global type for s (its declaration in
 * gamma.sessions, else any channel type with the same roles) reaches the
 * restriction of delta to s within budget evolution steps.
 */
Coherence Coherent(const GlobalEnv& gamma, const SessionEnv& delta,
                   int budget, size_t state_budget = 100000);

}  // namespace ftmpst

#endif  // FTMPST_TYPESYSTEM_HH_
