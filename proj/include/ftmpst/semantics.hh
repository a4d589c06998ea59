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

#ifndef FTMPST_SEMANTICS_HH_
#define FTMPST_SEMANTICS_HH_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ftmpst/ops.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/syntax.hh"

namespace ftmpst {

/** The reduction rules that change a configuration. Par, Res, Struc and
 * LStep are contexts: LStep shows up as a path longer than one. */
enum class Rule {
  kInit,
  kRSend,
  kRGet,
  kUSend,
  kUGet,
  kUSkip,
  kML,
  kRSel,
  kRBran,
  kWSel,
  kWBran,
  kWSkip,
  kLCall,
  kLExitS,
  kLExitG,
  kEDrop,
  kCrash,
  kIfT,
  kIfF,
  kDeleg,
  kSRecv,
  kRec
};

const char* RuleName(Rule r);
std::optional<Rule> RuleFromName(const std::string& name);

/** True for the rules that model failures or are guarded by a pattern. */
bool IsFailureRule(Rule r);

/** One question asked to a failure pattern and its answer. */
struct PatternQuery {
  enum class Kind { kUGet, kUSkip, kWSkip, kML, kCrash, kDrop };
  Kind kind = Kind::kUGet;
  std::string session;
  // uget/uskip/wskip: p1 = receiver, p2 = sender. ml: p1 = sender,
  // p2 = receiver. drop: p1 = the role whose loop terminated.
  Role p1 = 0, p2 = 0;
  Label label;                // closed; static part plus runtime values
  Value id;                   // drop
  std::vector<Actor> actors;  // crash: actors of the component
  bool nsr = true;            // crash: nsr of the component
  bool answer = false;

  std::string ToString() const;
};

const char* QueryKindName(PatternQuery::Kind k);

/** A loop that an actor left, by its own exit or by an exit message. */
struct ExitRecord {
  Actor actor;
  Value id;
  Value value;
  int64_t counter = 0;  // loop counter when the loop was left
  bool initiated = false;
};

class Configuration;

/** Read-only view handed to failure patterns. */
struct PatternContext {
  const Configuration& cfg;
  int64_t step = 0;
};

/**
 * The six failure-pattern predicates. Implementations must be
 * deterministic functions of their arguments and the context.
 */
class FailurePatternSet {
 public:
  virtual ~FailurePatternSet() = default;
  virtual std::string name() const = 0;
  virtual bool UGet(const std::string& s, Role recv, Role send, const Label& l,
                    const PatternContext& ctx) const = 0;
  virtual bool USkip(const std::string& s, Role recv, Role send,
                     const Label& l, const PatternContext& ctx) const = 0;
  virtual bool WSkip(const std::string& s, Role recv, Role send,
                     const PatternContext& ctx) const = 0;
  virtual bool ML(const std::string& s, Role send, Role recv, const Label& l,
                  const PatternContext& ctx) const = 0;
  virtual bool Crash(const Proc& component, const std::set<Actor>& actors,
                     const PatternContext& ctx) const = 0;
  virtual bool Drop(const std::string& s, Role recv, const Value& id,
                    const PatternContext& ctx) const = 0;
};

/**
 * A closed, normalized system with its message queues and the history the
 * failure patterns may consult. Immutable.
 */
class Configuration {
 public:
  Configuration() = default;
  /** Normalizes P. */
  explicit Configuration(const Proc& P);

  const Proc& term() const { return term_; }
  /** Restrictions extruded to the top, outermost first. */
  const std::vector<std::pair<std::string, std::optional<Sort>>>& binders()
      const {
    return binders_;
  }
  /** Top-level parallel components, queues included. */
  const std::vector<Proc>& components() const { return comps_; }

  const std::vector<ExitRecord>& exits() const { return exits_; }
  const std::set<Actor>& crashed() const { return crashed_; }
  /** UGet receptions per "session|receiver|receiver label". */
  const std::map<std::string, int64_t>& receipts() const { return receipts_; }

  /** Queue contents, or nullptr when the queue does not exist. */
  const std::vector<Message>* Queue(const QueueKey& k) const;
  std::optional<int> QueueIndex(const QueueKey& k) const;
  const std::map<QueueKey, int>& queues() const { return queue_index_; }
  /** Actors owned by some non-queue component. */
  const std::set<Actor>& actors() const { return actors_; }
  bool Terminated(const std::string& s, Role r, const Value& id) const;
  bool TerminatedAny(const std::string& s, Role r) const;
  /** Counter of the outermost loop of actor a in session s, if any. */
  std::optional<int64_t> LoopCounter(const Actor& a) const;
  int64_t Receipts(const std::string& s, Role recv, const Label& l) const;

  /** Canonical text: alpha-normal term plus history. */
  std::string Key() const;
  uint64_t Hash() const { return Fnv1a(Key()); }
  std::string ToString() const { return ftmpst::ToString(term_); }

  /** Replaces the term (renormalizing) and keeps the history. */
  Configuration WithTerm(const Proc& P) const;

 private:
  friend class Stepper;
  void Index();

  Proc term_;
  std::vector<std::pair<std::string, std::optional<Sort>>> binders_;
  std::vector<Proc> comps_;
  std::map<QueueKey, int> queue_index_;
  std::set<Actor> actors_;
  std::vector<ExitRecord> exits_;
  std::set<Actor> crashed_;
  std::map<std::string, int64_t> receipts_;
};

/** Fired rule instance. */
struct Redex {
  Rule rule = Rule::kInit;
  /** path[0]: top-level component; path[k]: component of the k-th
   * enclosing loop body (LStep descent). */
  std::vector<int> path;
  int branch = -1;            // RBran/WBran
  std::vector<int> partners;  // top-level queues or acceptors involved
  std::string subject;        // acting actor or queue, for fairness classes
  /** The guard query of a pattern-guarded rule. */
  std::optional<PatternQuery> guard;

  bool lstep() const { return path.size() > 1; }
  std::string ToString() const;
};

bool SameRedex(const Redex& a, const Redex& b);

/** Semantics mutations used to validate the metatheory suites. */
enum class Mutation {
  kNone,
  kUGetDefault,        // UGet substitutes the default value
  kLCallNoIncrement,   // LCall keeps the counter
  kNonFifoDequeue,     // receptions take the newest message
  kExitNoBroadcast,    // LExitS sends no exit messages
  kWSkipUnguarded,     // WSkip ignores its pattern
  kCrashIgnoresNsr     // Crash offered to strongly reliable components
};

const char* MutationName(Mutation m);
std::vector<Mutation> AllMutations();

struct SemanticsOptions {
  Mutation mutation = Mutation::kNone;
};

struct Enabled {
  std::vector<Redex> redexes;
  std::vector<PatternQuery> queries;  // every query asked, in order
};

/** Every rule instance whose shape matches and whose guard answers true. */
Enabled EnabledRedexes(const Configuration& cfg, const FailurePatternSet& fp,
                       int64_t step = 0, const SemanticsOptions& opts = {});

class StaleRedex : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** Observable effect of one step, used by the trace-level checks. */
struct StepEffect {
  std::vector<std::pair<QueueKey, Message>> appended;
  std::optional<std::pair<QueueKey, Message>> removed;
  std::optional<Actor> actor;
  std::optional<Value> loop_id;
  int64_t counter_before = -1;
  int64_t counter_after = -1;
  std::optional<Value> bound;  // value bound by a receive
  std::optional<ExitRecord> exit;
  std::set<Actor> crashed;
};

/** Applies rx; throws StaleRedex when its shape no longer matches. */
Configuration Step(const Configuration& cfg, const Redex& rx,
                   const SemanticsOptions& opts = {},
                   StepEffect* effect = nullptr);

bool IsPrefixFree(const Configuration& cfg);

// ---------------------------------------------------------------------------
// Runs.

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  /** Index into enabled; enabled is nonempty. */
  virtual size_t Pick(const Configuration& cfg,
                      const std::vector<Redex>& enabled, int64_t step) = 0;
};

/** Uniform choice from a seeded mt19937_64. */
class RandomScheduler : public Scheduler {
 public:
  explicit RandomScheduler(uint64_t seed) : rng_(seed) {}
  size_t Pick(const Configuration&, const std::vector<Redex>& enabled,
              int64_t) override;

 private:
  std::mt19937_64 rng_;
};

/**
 * Random choice, except that a redex class (rule and subject) enabled for
 * window consecutive steps is forced. Crash is never forced. window <= 0
 * selects 4 times the number of actors.
 */
class FairScheduler : public Scheduler {
 public:
  explicit FairScheduler(uint64_t seed, int window = 0)
      : rng_(seed), window_(window) {}
  size_t Pick(const Configuration& cfg, const std::vector<Redex>& enabled,
              int64_t step) override;

 private:
  std::mt19937_64 rng_;
  int window_;
  std::map<std::string, int> age_;
};

class CallbackScheduler : public Scheduler {
 public:
  using Fn = std::function<size_t(const Configuration&,
                                  const std::vector<Redex>&, int64_t)>;
  explicit CallbackScheduler(Fn fn) : fn_(std::move(fn)) {}
  size_t Pick(const Configuration& cfg, const std::vector<Redex>& enabled,
              int64_t step) override {
    return fn_(cfg, enabled, step);
  }

 private:
  Fn fn_;
};

struct TraceStep {
  int64_t index = 0;
  Redex redex;
  std::vector<PatternQuery> queries;
  StepEffect effect;
  uint64_t hash = 0;  // successor
};

struct Trace {
  Configuration initial;
  std::vector<TraceStep> steps;
  Configuration final;
  bool truncated = false;
  std::string patterns;

  /** One JSON object per line: step, rule, lstep, path, queries, hash. */
  std::string ToJsonl() const;
};

struct RunOptions {
  int64_t max_steps = 1000;
  SemanticsOptions semantics;
  /** Called after every step with the successor. */
  std::function<void(const Configuration&, const TraceStep&)> on_step;
};

Trace Run(const Configuration& cfg, const FailurePatternSet& fp,
          Scheduler& sched, const RunOptions& opts);

/** Re-applies the recorded redexes; true iff every hash and answer agrees. */
bool Replay(const Trace& tr, const FailurePatternSet& fp,
            const SemanticsOptions& opts = {}, std::string* why = nullptr);

struct ExploreResult {
  std::vector<Configuration> states;
  std::vector<std::vector<size_t>> successors;
  std::vector<int> depth;  // BFS depth of first discovery
  /** States at the depth bound whose successors were not expanded. */
  std::vector<bool> frontier;
  bool budget_exceeded = false;
};

/** Breadth-first exploration up to depth, deduplicated up to congruence. */
ExploreResult Explore(const Configuration& cfg, const FailurePatternSet& fp,
                      int depth, size_t state_budget = 200000,
                      const SemanticsOptions& opts = {});

// ---------------------------------------------------------------------------
// Loading systems from source files.

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * The process declaration name of file as a configuration. Free names must
 * be declared channels or sessions; declared sessions get their missing
 * empty queues.
 */
Configuration LoadConfiguration(const SourceFile& file,
                                const std::string& name);

}  // namespace ftmpst

#endif  // FTMPST_SEMANTICS_HH_
