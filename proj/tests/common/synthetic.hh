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

#ifndef FTMPST_TESTS_COMMON_SYNTHETIC_HH_
#define FTMPST_TESTS_COMMON_SYNTHETIC_HH_

#include <memory>
#include <stdexcept>
#include <string>

#include "ftmpst/failure_patterns.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/semantics.hh"

namespace ftmpst::testing {

/** Delegates to base except for one predicate, which always answers
 * answer. Used to produce traces of patterns that break Condition 1. */
class Forcing : public FailurePatternSet {
 public:
  Forcing(std::unique_ptr<FailurePatternSet> base, PatternQuery::Kind kind,
          bool answer)
      : base_(std::move(base)), kind_(kind), answer_(answer) {}
  std::string name() const override { return "forcing-" + base_->name(); }
  bool UGet(const std::string& s, Role r, Role p, const Label& l,
            const PatternContext& c) const override {
    return Is(PatternQuery::Kind::kUGet) ? answer_ : base_->UGet(s, r, p, l, c);
  }
  bool USkip(const std::string& s, Role r, Role p, const Label& l,
             const PatternContext& c) const override {
    return Is(PatternQuery::Kind::kUSkip) ? answer_
                                          : base_->USkip(s, r, p, l, c);
  }
  bool WSkip(const std::string& s, Role r, Role p,
             const PatternContext& c) const override {
    return Is(PatternQuery::Kind::kWSkip) ? answer_ : base_->WSkip(s, r, p, c);
  }
  bool ML(const std::string& s, Role p, Role r, const Label& l,
          const PatternContext& c) const override {
    return Is(PatternQuery::Kind::kML) ? answer_ : base_->ML(s, p, r, l, c);
  }
  bool Crash(const Proc& P, const std::set<Actor>& a,
             const PatternContext& c) const override {
    return Is(PatternQuery::Kind::kCrash) ? answer_ : base_->Crash(P, a, c);
  }
  bool Drop(const std::string& s, Role r, const Value& id,
            const PatternContext& c) const override {
    return Is(PatternQuery::Kind::kDrop) ? answer_ : base_->Drop(s, r, id, c);
  }

 private:
  bool Is(PatternQuery::Kind k) const { return k == kind_; }
  std::unique_ptr<FailurePatternSet> base_;
  PatternQuery::Kind kind_;
  bool answer_;
};

/** A trace whose pattern answers break Condition 1 item 1, 6 or 8, with
 * the semantics options needed to replay it. */
struct Synthetic {
  Trace trace;
  SemanticsOptions semantics;
};

/** Fires rule first whenever it is enabled. */
inline Trace RunPreferring(const Configuration& cfg,
                           const FailurePatternSet& fp, Rule rule,
                           const SemanticsOptions& semantics) {
  CallbackScheduler sched(
      [rule](const Configuration&, const std::vector<Redex>& en, int64_t) {
        for (size_t i = 0; i < en.size(); ++i)
          if (en[i].rule == rule) return i;
        return size_t{0};
      });
  RunOptions o;
  o.max_steps = 20;
  o.semantics = semantics;
  return Run(cfg, fp, sched, o);
}

inline Synthetic SyntheticViolation(int item) {
  using K = PatternQuery::Kind;
  Synthetic out;
  if (item == 6) {
    // wskip answered true while the selecting sender is still alive.
    Configuration cfg(ParseProcess(
        "s[1, {2}]!!{w}.0 | s[2, 1]??{w.0, default d.0} | s[1->2]:[] | "
        "s[2->1]:[]"));
    Forcing fp(MakePatterns("failure-free", 0), K::kWSkip, true);
    out.trace = RunPreferring(cfg, fp, Rule::kWSkip, out.semantics);
  } else if (item == 8) {
    // drop answered true before the receiver left the loop.
    Configuration cfg(ParseProcess(
        "loop(s[2][{1}], 1, c=1, (x).exit(1, x), s[2, 1]?(u, 0)<0>(z).call(1, "
        "z), (y).0) | s[1->2]:[exit<1, 5>]"));
    Forcing fp(MakePatterns("failure-free", 0), K::kDrop, true);
    out.trace = RunPreferring(cfg, fp, Rule::kEDrop, out.semantics);
  } else if (item == 1) {
    // crash answered true for a strongly reliable process; the semantics
    // must offer the crash for the pattern to be asked at all.
    out.semantics.mutation = Mutation::kCrashIgnoresNsr;
    Configuration cfg(ParseProcess("s[1, 2]!<1>.0 | s[1->2]:[]"));
    Forcing fp(MakePatterns("failure-free", 0), K::kCrash, true);
    out.trace = RunPreferring(cfg, fp, Rule::kCrash, out.semantics);
  } else {
    throw std::invalid_argument("no synthetic trace for item " +
                                std::to_string(item));
  }
  return out;
}

}  // namespace ftmpst::testing

#endif  // FTMPST_TESTS_COMMON_SYNTHETIC_HH_
