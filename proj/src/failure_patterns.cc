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

#include "ftmpst/failure_patterns.hh"

#include <map>
#include <sstream>

namespace ftmpst {

namespace {

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string LabelKey(const Label& l) { return ToString(l); }

/** Round carried by a label's first runtime value, if any. */
std::optional<int64_t> LabelRound(const Label& l) {
  if (l.rt.empty()) return std::nullopt;
  auto v = TryEval(l.rt.front());
  if (!v || v->kind() != Value::Kind::kNat) return std::nullopt;
  return v->as_nat();
}

bool Crashed(const PatternContext& ctx, const std::string& s, Role r) {
  return ctx.cfg.crashed().count(Actor{s, r}) > 0;
}

bool SenderGoneAndQueueEmpty(const PatternContext& ctx, const std::string& s,
                             Role recv, Role send) {
  if (ctx.cfg.actors().count(Actor{s, send})) return false;
  const auto* q = ctx.cfg.Queue({s, send, recv});
  return !q || q->empty();
}

int64_t CeilHalf(int64_t x) { return (x + 1) / 2; }

}  // namespace

double Coin(uint64_t seed, const std::string& key) {
  uint64_t h = SplitMix(Fnv1a(key) ^ SplitMix(seed));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

bool GoneOrTerminated(const PatternContext& ctx, const std::string& s,
                      Role r) {
  return Crashed(ctx, s, r) || ctx.cfg.TerminatedAny(s, r);
}

bool FailureFree::Drop(const std::string& s, Role recv, const Value& id,
                       const PatternContext& ctx) const {
  return ctx.cfg.Terminated(s, recv, id) || Crashed(ctx, s, recv);
}

// A receiver without process never consumes; uskip mirrors ml for the
// pairing of Condition 1.3 and is never asked by such a receiver.
bool FailureFree::USkip(const std::string& s, Role recv, Role,
                        const Label&, const PatternContext& ctx) const {
  return !ctx.cfg.actors().count({s, recv});
}

bool FailureFree::ML(const std::string& s, Role, Role recv, const Label&,
                     const PatternContext& ctx) const {
  return !ctx.cfg.actors().count({s, recv});
}

// ---------------------------------------------------------------------------
// Chaotic.

bool Chaotic::Lossy(const std::string& s, Role send, Role recv, const Label& l,
                    const PatternContext& ctx) const {
  if (GoneOrTerminated(ctx, s, send) || GoneOrTerminated(ctx, s, recv))
    return true;
  // Keyed by the message, not the step, so that ml and uskip agree on it.
  return Coin(seed_, "lossy|" + s + "|" + std::to_string(send) + "|" +
                         std::to_string(recv) + "|" + LabelKey(l)) < p_;
}

bool Chaotic::UGet(const std::string& s, Role recv, Role send, const Label& l,
                   const PatternContext& ctx) const {
  if (constrained_) return true;
  return Coin(seed_, "uget|" + s + "|" + std::to_string(recv) + "|" +
                         std::to_string(send) + "|" + LabelKey(l) + "|" +
                         std::to_string(ctx.step)) >= p_;
}

bool Chaotic::USkip(const std::string& s, Role recv, Role send, const Label& l,
                    const PatternContext& ctx) const {
  if (constrained_) return Lossy(s, send, recv, l, ctx);
  return Coin(seed_, "uskip|" + s + "|" + std::to_string(recv) + "|" +
                         std::to_string(send) + "|" + LabelKey(l) + "|" +
                         std::to_string(ctx.step)) < p_;
}

bool Chaotic::WSkip(const std::string& s, Role recv, Role send,
                    const PatternContext& ctx) const {
  if (constrained_) return SenderGoneAndQueueEmpty(ctx, s, recv, send);
  return Coin(seed_, "wskip|" + s + "|" + std::to_string(recv) + "|" +
                         std::to_string(send) + "|" +
                         std::to_string(ctx.step)) < p_;
}

bool Chaotic::ML(const std::string& s, Role send, Role recv, const Label& l,
                 const PatternContext& ctx) const {
  if (constrained_) return Lossy(s, send, recv, l, ctx);
  return Coin(seed_, "ml|" + s + "|" + std::to_string(send) + "|" +
                         std::to_string(recv) + "|" + LabelKey(l) + "|" +
                         std::to_string(ctx.step)) < p_;
}

bool Chaotic::Crash(const Proc& component, const std::set<Actor>& actors,
                    const PatternContext& ctx) const {
  if (constrained_ && !Nsr(component)) return false;
  std::string key = "crash|" + std::to_string(ctx.step);
  for (const Actor& a : actors) key += "|" + a.ToString();
  return Coin(seed_, key) < p_ / 4;
}

bool Chaotic::Drop(const std::string& s, Role recv, const Value& id,
                   const PatternContext& ctx) const {
  return ctx.cfg.Terminated(s, recv, id) || Crashed(ctx, s, recv);
}

// ---------------------------------------------------------------------------
// Rotating-coordinator failure detection.

RcDiamondS::RcDiamondS(const RcPatternOptions& o) : o_(o) {
  uint64_t h = SplitMix(o.seed ^ 0x5eedULL);
  std::vector<Role> candidates;
  for (Role r = 1; r <= o.n; ++r) {
    if (!o.forced_crash || *o.forced_crash != r) candidates.push_back(r);
  }
  designated_ = candidates[h % candidates.size()];
  stabilization_ = o.max_stabilization > 0
                       ? static_cast<int64_t>(SplitMix(h) %
                                              static_cast<uint64_t>(
                                                  o.max_stabilization))
                       : 0;
}

bool RcDiamondS::Suspects(const std::string& s, Role recv, Role send,
                          const PatternContext& ctx) const {
  if (Crashed(ctx, s, send)) return true;
  if (send == designated_ && ctx.step >= stabilization_) return false;
  auto round = ctx.cfg.LoopCounter({s, recv});
  return Coin(o_.seed, "suspect|" + s + "|" + std::to_string(recv) + "|" +
                           std::to_string(send) + "|" +
                           std::to_string(round.value_or(-1))) <
         o_.suspicion_probability;
}

bool RcDiamondS::Unconsumable(const std::string& s, Role send, Role recv,
                              const Label& l,
                              const PatternContext& ctx) const {
  if (GoneOrTerminated(ctx, s, recv) || GoneOrTerminated(ctx, s, send))
    return true;
  auto counter = ctx.cfg.LoopCounter({s, recv});
  if (!counter) return true;  // the receiver left its loop
  int64_t recv_round = *counter - 1;
  auto round = LabelRound(l);
  if (round && *round < recv_round) return true;
  if (l.sym == "p2") return Suspects(s, recv, send, ctx);
  if (l.sym == "p1" || l.sym == "p3") {
    return ctx.cfg.Receipts(s, recv, l) >= CeilHalf(o_.n - 1);
  }
  return false;
}

bool RcDiamondS::USkip(const std::string& s, Role recv, Role send,
                       const Label& l, const PatternContext& ctx) const {
  return Unconsumable(s, send, recv, l, ctx);
}

bool RcDiamondS::ML(const std::string& s, Role send, Role recv, const Label& l,
                    const PatternContext& ctx) const {
  return Unconsumable(s, send, recv, l, ctx);
}

bool RcDiamondS::WSkip(const std::string& s, Role recv, Role send,
                       const PatternContext& ctx) const {
  return SenderGoneAndQueueEmpty(ctx, s, recv, send);
}

bool RcDiamondS::Crash(const Proc& component, const std::set<Actor>& actors,
                       const PatternContext& ctx) const {
  if (actors.empty() || !Nsr(component)) return false;
  const std::string& s = actors.begin()->session;
  int64_t alive = o_.n;
  for (const Actor& a : ctx.cfg.crashed()) {
    if (a.session == s) --alive;
  }
  if (alive <= CeilHalf(o_.n)) return false;
  bool forced = false;
  for (const Actor& a : actors) {
    if (a.role == designated_) return false;
    if (o_.forced_crash && a.role == *o_.forced_crash &&
        ctx.step >= o_.forced_crash_step) {
      forced = true;
    }
  }
  if (forced) return true;
  if (!o_.random_crashes) return false;
  std::string key = "crash|" + std::to_string(ctx.step);
  for (const Actor& a : actors) key += "|" + a.ToString();
  return Coin(o_.seed, key) < o_.crash_probability;
}

bool RcDiamondS::Drop(const std::string& s, Role recv, const Value& id,
                      const PatternContext& ctx) const {
  return ctx.cfg.Terminated(s, recv, id) || Crashed(ctx, s, recv);
}

std::unique_ptr<FailurePatternSet> MakePatterns(const std::string& name,
                                                uint64_t seed, int n) {
  if (name == "failure-free") return std::make_unique<FailureFree>();
  if (name == "chaotic") return std::make_unique<Chaotic>(seed, false);
  if (name == "chaotic-c1") return std::make_unique<Chaotic>(seed, true);
  if (name == "rc-diamond-s") {
    RcPatternOptions o;
    o.n = n;
    o.seed = seed;
    return std::make_unique<RcDiamondS>(o);
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Monitor.

std::string ConditionViolation::ToString() const {
  std::ostringstream out;
  if (item == 0) {
    out << "unguarded failure rule";
  } else {
    out << "condition 1." << item;
  }
  out << " violated at step " << step << ": " << detail;
  if (!query.empty()) out << " [" << query << "]";
  return out.str();
}

std::string OpenObligation::ToString() const {
  return "condition 1." + std::to_string(item) + " open since step " +
         std::to_string(since) + ": " + what;
}

std::string ConditionReport::ToString() const {
  std::ostringstream out;
  out << violations.size() << " violation(s), " << open.size()
      << " open obligation(s)\n";
  for (const auto& v : violations) out << "  " << v.ToString() << "\n";
  for (const auto& o : open) out << "  " << o.ToString() << "\n";
  return out.str();
}

namespace {

/** Eventually clauses triggered by crashes and loop terminations. */
class Obligations {
 public:
  void Crash(const Actor& a, int64_t step) {
    crashed_[a] = step;
  }
  void Terminate(const Actor& a, const Value& id, int64_t step) {
    terminated_[a] = step;
    ids_[a].push_back(id);
  }

  /** Registers a query answered at step; opens or discharges entries. */
  void Observe(const PatternQuery& q, int64_t step) {
    using K = PatternQuery::Kind;
    auto note = [&](int item, Role target, const std::string& what) {
      Actor a{q.session, target};
      std::string key = std::to_string(item) + "|" + what;
      auto& e = entries_[key];
      if (e.discharged) return;
      e.item = item;
      e.what = what;
      if (e.since < 0) e.since = step;
      if (q.answer) e.discharged = true;
      (void)a;
    };
    switch (q.kind) {
      case K::kUSkip:
      case K::kWSkip:
        // 1.4: skips of messages from a crashed sender (p2).
        if (crashed_.count({q.session, q.p2}))
          note(4, q.p2,
               std::string(QueryKindName(q.kind)) + " from crashed " +
                   Actor{q.session, q.p2}.ToString() + " at " +
                   std::to_string(q.p1));
        break;
      case K::kML:
        // 1.5 and 1.7: losses toward a crashed or terminated receiver.
        if (crashed_.count({q.session, q.p2}))
          note(5, q.p2,
               "ml toward crashed " + Actor{q.session, q.p2}.ToString() +
                   " from " + std::to_string(q.p1) + " " + ToString(q.label));
        else if (terminated_.count({q.session, q.p2}))
          note(7, q.p2,
               "ml toward terminated " + Actor{q.session, q.p2}.ToString() +
                   " from " + std::to_string(q.p1) + " " + ToString(q.label));
        break;
      case K::kDrop: {
        Actor a{q.session, q.p1};
        if (crashed_.count(a))
          note(5, q.p1, "drop toward crashed " + a.ToString() + " id " +
                            q.id.ToString());
        else if (terminated_.count(a))
          note(7, q.p1, "drop toward terminated " + a.ToString() + " id " +
                            q.id.ToString());
        break;
      }
      default:
        break;
    }
  }

  std::vector<OpenObligation> Open() const {
    std::vector<OpenObligation> out;
    for (const auto& [k, e] : entries_) {
      if (!e.discharged) out.push_back({e.item, e.since, e.what});
    }
    return out;
  }

 private:
  struct Entry {
    int item = 0;
    int64_t since = -1;
    std::string what;
    bool discharged = false;
  };
  std::map<Actor, int64_t> crashed_;
  std::map<Actor, int64_t> terminated_;
  std::map<Actor, std::vector<Value>> ids_;
  std::map<std::string, Entry> entries_;
};

}  // namespace

struct Condition1Monitor::State {
  const FailurePatternSet* fp = nullptr;
  Obligations obligations;
  ConditionReport report;
};

Condition1Monitor::Condition1Monitor(const FailurePatternSet* fp)
    : st_(std::make_unique<State>()) {
  st_->fp = fp;
}

Condition1Monitor::~Condition1Monitor() = default;

void Condition1Monitor::Observe(const Configuration& cur, const TraceStep& ts) {
  using K = PatternQuery::Kind;
  const FailurePatternSet* fp = st_->fp;
  auto violate = [&](int item, const PatternQuery* q,
                     const std::string& detail) {
    st_->report.violations.push_back(
        {item, ts.index, q ? q->ToString() : std::string(), detail});
  };
  PatternContext ctx{cur, ts.index};
  for (const PatternQuery& q : ts.queries) {
    switch (q.kind) {
      case K::kCrash:
        if (q.answer && !q.nsr)
          violate(1, &q, "crash of a strongly reliable process");
        break;
      case K::kUGet:
        if (!q.answer) violate(2, &q, "uget refused");
        break;
      case K::kWSkip:
        if (q.answer &&
            (cur.actors().count({q.session, q.p2}) ||
             (cur.Queue({q.session, q.p2, q.p1}) &&
              !cur.Queue({q.session, q.p2, q.p1})->empty()))) {
          violate(6, &q,
                  "wskip while the sender is alive or its queue is not empty");
        }
        break;
      case K::kDrop:
        if (q.answer && !cur.Terminated(q.session, q.p1, q.id) &&
            !cur.crashed().count({q.session, q.p1})) {
          violate(8, &q, "drop before the receiver terminated the loop");
        }
        break;
      case K::kML:
        if (fp) {
          bool skip = fp->USkip(q.session, q.p2, q.p1, q.label, ctx);
          if (skip != q.answer) violate(3, &q, "ml and uskip disagree");
        }
        break;
      case K::kUSkip:
        if (fp) {
          bool ml = fp->ML(q.session, q.p2, q.p1, q.label, ctx);
          if (ml != q.answer) violate(3, &q, "uskip and ml disagree");
        }
        break;
    }
    st_->obligations.Observe(q, ts.index);
  }
  if (!fp) {
    // Pair recorded ml and uskip queries on the same message shape.
    for (const PatternQuery& a : ts.queries) {
      if (a.kind != K::kML) continue;
      for (const PatternQuery& b : ts.queries) {
        if (b.kind == K::kUSkip && b.session == a.session && b.p1 == a.p2 &&
            b.p2 == a.p1 && LabelEqual(a.label, b.label) &&
            a.answer != b.answer) {
          violate(3, &a, "ml and uskip disagree");
        }
      }
    }
  }
  const Redex& rx = ts.redex;
  if (IsFailureRule(rx.rule) && rx.guard && !rx.guard->answer)
    violate(0, &*rx.guard,
            std::string(RuleName(rx.rule)) +
                " applied although its pattern is false");
  for (const Actor& a : ts.effect.crashed) st_->obligations.Crash(a, ts.index);
  if (ts.effect.exit)
    st_->obligations.Terminate(ts.effect.exit->actor, ts.effect.exit->id,
                               ts.index);
}

ConditionReport Condition1Monitor::Report() const {
  ConditionReport out = st_->report;
  out.open = st_->obligations.Open();
  return out;
}

ConditionReport MonitorCondition1(const Trace& tr,
                                  const FailurePatternSet* fp,
                                  const SemanticsOptions& opts) {
  Condition1Monitor monitor(fp);
  Configuration cur = tr.initial;
  for (const TraceStep& ts : tr.steps) {
    monitor.Observe(cur, ts);
    cur = Step(cur, ts.redex, opts);
  }
  return monitor.Report();
}

}  // namespace ftmpst
