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

#ifndef FTMPST_FAILURE_PATTERNS_HH_
#define FTMPST_FAILURE_PATTERNS_HH_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ftmpst/semantics.hh"

namespace ftmpst {

/** Deterministic coin in [0, 1) keyed by seed and text. */
double Coin(uint64_t seed, const std::string& key);

/** True when s[r] crashed or left any loop. */
bool GoneOrTerminated(const PatternContext& ctx, const std::string& s, Role r);

/**
 * No failures: uget holds, wskip and crash never hold, drop(r, id) holds
 * once r terminated loop id (or crashed), and ml and uskip hold only for
 * messages whose receiver owns no process any more.
 */
class FailureFree : public FailurePatternSet {
 public:
  std::string name() const override { return "failure-free"; }
  bool UGet(const std::string&, Role, Role, const Label&,
            const PatternContext&) const override {
    return true;
  }
  bool USkip(const std::string& s, Role recv, Role send, const Label& l,
             const PatternContext& ctx) const override;
  bool WSkip(const std::string&, Role, Role,
             const PatternContext&) const override {
    return false;
  }
  bool ML(const std::string& s, Role send, Role recv, const Label& l,
          const PatternContext& ctx) const override;
  bool Crash(const Proc&, const std::set<Actor>&,
             const PatternContext&) const override {
    return false;
  }
  bool Drop(const std::string& s, Role recv, const Value& id,
            const PatternContext& ctx) const override;
};

/**
 * Seeded coins. Unconstrained, every predicate but drop is a coin keyed by
 * the query and the step index. Constrained (chaotic-c1), uget holds, ml
 * and the matching uskip share one coin keyed by the message that also
 * holds once the sender or receiver is gone, wskip holds exactly when the
 * sender is gone and its queue is empty, and crash requires nsr.
 */
class Chaotic : public FailurePatternSet {
 public:
  Chaotic(uint64_t seed, bool constrained, double p = 0.1)
      : seed_(seed), constrained_(constrained), p_(p) {}
  std::string name() const override {
    return constrained_ ? "chaotic-c1" : "chaotic";
  }
  bool UGet(const std::string& s, Role recv, Role send, const Label& l,
            const PatternContext& ctx) const override;
  bool USkip(const std::string& s, Role recv, Role send, const Label& l,
             const PatternContext& ctx) const override;
  bool WSkip(const std::string& s, Role recv, Role send,
             const PatternContext& ctx) const override;
  bool ML(const std::string& s, Role send, Role recv, const Label& l,
          const PatternContext& ctx) const override;
  bool Crash(const Proc& component, const std::set<Actor>& actors,
             const PatternContext& ctx) const override;
  bool Drop(const std::string& s, Role recv, const Value& id,
            const PatternContext& ctx) const override;

 private:
  bool Lossy(const std::string& s, Role send, Role recv, const Label& l,
             const PatternContext& ctx) const;

  uint64_t seed_;
  bool constrained_;
  double p_;
};

struct RcPatternOptions {
  int n = 3;
  uint64_t seed = 0;
  double crash_probability = 0.02;
  double suspicion_probability = 0.2;
  /** Steps after which the designated correct role is never suspected are
   * drawn uniformly below this bound. */
  int64_t max_stabilization = 200;
  /** Forces the crash of this role from the given step on, if allowed. */
  std::optional<Role> forced_crash;
  int64_t forced_crash_step = 0;
  /** Disables random crashes; forced crashes still happen. */
  bool random_crashes = true;
};

/**
 * Eventually strong failure detection for the rotating coordinator.
 * Messages are unconsumable (ml and uskip) when outdated, when their
 * receiver or sender is gone, when a p2 sender is suspected, and when the
 * coordinator already received a majority of p1 or p3 messages. Crashes
 * keep more than half of the roles alive and spare the designated role.
 */
class RcDiamondS : public FailurePatternSet {
 public:
  explicit RcDiamondS(const RcPatternOptions& o);
  std::string name() const override { return "rc-diamond-s"; }
  bool UGet(const std::string&, Role, Role, const Label&,
            const PatternContext&) const override {
    return true;
  }
  bool USkip(const std::string& s, Role recv, Role send, const Label& l,
             const PatternContext& ctx) const override;
  bool WSkip(const std::string& s, Role recv, Role send,
             const PatternContext& ctx) const override;
  bool ML(const std::string& s, Role send, Role recv, const Label& l,
          const PatternContext& ctx) const override;
  bool Crash(const Proc& component, const std::set<Actor>& actors,
             const PatternContext& ctx) const override;
  bool Drop(const std::string& s, Role recv, const Value& id,
            const PatternContext& ctx) const override;

  Role designated() const { return designated_; }
  int64_t stabilization() const { return stabilization_; }
  /** Whether recv suspects send at this step. */
  bool Suspects(const std::string& s, Role recv, Role send,
                const PatternContext& ctx) const;
  bool Unconsumable(const std::string& s, Role send, Role recv, const Label& l,
                    const PatternContext& ctx) const;

 private:
  RcPatternOptions o_;
  Role designated_;
  int64_t stabilization_;
};

/** failure-free | chaotic | chaotic-c1 | rc-diamond-s; nullptr otherwise. */
std::unique_ptr<FailurePatternSet> MakePatterns(const std::string& name,
                                                uint64_t seed, int n = 3);

// ---------------------------------------------------------------------------
// Condition 1 monitor.

struct ConditionViolation {
  int item = 0;  // 1..8; 0 for a failure rule applied with a false guard
  int64_t step = 0;
  std::string query;
  std::string detail;
  std::string ToString() const;
};

/** An eventually clause that the trace did not discharge. */
struct OpenObligation {
  int item = 0;  // 4, 5 or 7
  int64_t since = 0;
  std::string what;
  std::string ToString() const;
};

struct ConditionReport {
  std::vector<ConditionViolation> violations;
  std::vector<OpenObligation> open;
  bool ok() const { return violations.empty(); }
  std::string ToString() const;
};

/**
 * Online form of the Condition 1 check: feed every step together with the
 * configuration it was taken from, in trace order.
 */
class Condition1Monitor {
 public:
  /** With fp, the ml/uskip pairing asks the complementary query. */
  explicit Condition1Monitor(const FailurePatternSet* fp = nullptr);
  ~Condition1Monitor();
  Condition1Monitor(const Condition1Monitor&) = delete;
  Condition1Monitor& operator=(const Condition1Monitor&) = delete;

  void Observe(const Configuration& before, const TraceStep& ts);
  /** Violations so far and the obligations still open. */
  ConditionReport Report() const;

 private:
  struct State;
  std::unique_ptr<State> st_;
};

/**
 * Checks the recorded answers of tr against Condition 1 by replaying its
 * configurations. With fp, the ml/uskip pairing is checked by asking the
 * complementary query of every recorded one.
 */
ConditionReport MonitorCondition1(const Trace& tr,
                                  const FailurePatternSet* fp = nullptr,
                                  const SemanticsOptions& opts = {});

}  // namespace ftmpst

#endif  // FTMPST_FAILURE_PATTERNS_HH_
