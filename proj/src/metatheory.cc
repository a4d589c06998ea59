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

#include "ftmpst/metatheory.hh"

#include <algorithm>
#include <deque>
#include <random>
#include <set>
#include <sstream>

#include "ftmpst/harness.hh"
#include "ftmpst/projection.hh"

namespace ftmpst {

OperatorMix OperatorMix::Finite() {
  OperatorMix m;
  m.recursion = false;
  m.loops = false;
  return m;
}

namespace {

// ---------------------------------------------------------------------------
// Global type generation.

enum class Term { kEnd, kVar, kCall };

struct GenContext {
  std::vector<Role> roles;  // roles allowed here
  Term term = Term::kEnd;
  std::string var;          // kVar
  Expr call;                // kCall
  std::vector<std::string> counters;
  bool in_rec = false;
  bool unreliable_only = false;  // loop programs: no (weakly) reliable ops
};

class Generator {
 public:
  Generator(const OperatorMix& mix, uint64_t seed) : mix_(mix), rng_(seed) {}

  Global Gen(int d, const GenContext& ctx) {
    if (d <= 0 || ctx.roles.size() < 2) return Terminal(ctx);
    std::vector<int> ops;
    if (mix_.reliable && !ctx.unreliable_only) ops.push_back(0);
    if (mix_.unreliable) ops.push_back(1);
    if (mix_.branching && d >= 2 && !ctx.unreliable_only) ops.push_back(2);
    if (mix_.weak_branching && d >= 2 && !ctx.unreliable_only)
      ops.push_back(3);
    if (mix_.recursion && d >= 2 && !ctx.in_rec && ctx.term == Term::kEnd)
      ops.push_back(4);
    if (mix_.loops && d >= 3) ops.push_back(5);
    if (ops.empty()) return Terminal(ctx);
    switch (ops[Below(ops.size())]) {
      case 0: {
        auto [p, q] = Pair(ctx.roles);
        return global::Comm(p, q, Below(2) ? Sort::Nat() : Sort::Bool(),
                            Gen(d - 1, ctx));
      }
      case 1: {
        auto [p, q] = Pair(ctx.roles);
        Label l{"u" + std::to_string(++labels_), {}};
        Sort s = Below(2) ? Sort::Nat() : Sort::Bool();
        label_sorts_[l.sym] = s;
        return global::UComm(p, q, l, s, Gen(d - 1, ctx));
      }
      case 2: {
        auto [p, q] = Pair(ctx.roles);
        int k = ++labels_;
        Global tail = Gen(d - 2, ctx);
        std::vector<GBranch> b;
        b.push_back({Label{"l" + std::to_string(k), {}}, tail});
        b.push_back({Label{"m" + std::to_string(k), {}},
                     global::Comm(p, q, Sort::Nat(), tail)});
        return global::Branch(p, q, b);
      }
      case 3: {
        Role p = ctx.roles[Below(ctx.roles.size())];
        RoleSet R;
        for (Role r : ctx.roles) {
          if (r != p && (R.empty() || Below(2))) R.push_back(r);
        }
        int k = ++labels_;
        Global tail = Gen(d - 1, ctx);
        std::vector<GBranch> b;
        b.push_back({Label{"w" + std::to_string(k), {}}, tail});
        b.push_back({Label{"d" + std::to_string(k), {}}, tail});
        return global::WBranch(p, R, b);
      }
      case 4: {
        GenContext inner = ctx;
        inner.in_rec = true;
        inner.term = Term::kVar;
        inner.var = "t" + std::to_string(++vars_);
        std::string c = "c" + std::to_string(++vars_);
        inner.counters.push_back(c);
        return global::Rec(inner.var, c, Gen(d - 1, inner));
      }
      default: {
        RoleSet R;
        for (Role r : ctx.roles) {
          if (R.size() < 2 || Below(3)) R.push_back(r);
        }
        std::vector<Expr> id{Nat(++loops_)};
        for (const auto& c : ctx.counters) id.push_back(Name(c));
        Expr ide = id.size() == 1 ? id.front() : TupleExpr(id);
        std::string c = "c" + std::to_string(++vars_);
        int dp = 1 + static_cast<int>(Below(d - 2));
        GenContext prog = ctx;
        prog.roles.assign(R.begin(), R.end());
        prog.term = Term::kCall;
        prog.call = ide;
        prog.counters.push_back(c);
        prog.in_rec = true;  // no free type variables inside a program
        prog.unreliable_only = true;
        Global g0 = Gen(dp, prog);
        Global g2 = Gen(d - 1 - dp, ctx);
        return global::Loop(R, ide, c, Sort::Nat(), g0, Sort::Nat(), g2);
      }
    }
  }

  const std::map<std::string, Sort>& label_sorts() const {
    return label_sorts_;
  }
  uint64_t Below(uint64_t n) {
    return std::uniform_int_distribution<uint64_t>(0, n - 1)(rng_);
  }

 private:
  Global Terminal(const GenContext& ctx) {
    switch (ctx.term) {
      case Term::kVar:
        return global::Var(ctx.var);
      case Term::kCall:
        return global::Call(ctx.call);
      case Term::kEnd:
        break;
    }
    return global::End();
  }

  std::pair<Role, Role> Pair(const std::vector<Role>& roles) {
    size_t i = Below(roles.size());
    size_t j = Below(roles.size() - 1);
    if (j >= i) ++j;
    return {roles[i], roles[j]};
  }

  OperatorMix mix_;
  std::mt19937_64 rng_;
  std::map<std::string, Sort> label_sorts_;
  int labels_ = 0, vars_ = 0, loops_ = 0;
};

bool HasRecOrLoop(const Global& g) {
  if (!g) return false;
  if (g->kind == GKind::kRec || g->kind == GKind::kLoop) return true;
  for (const auto& b : g->branches) {
    if (HasRecOrLoop(b.cont)) return true;
  }
  return HasRecOrLoop(g->next) || HasRecOrLoop(g->cont);
}

// ---------------------------------------------------------------------------
// Canonical implementations.

struct LoopFrame {
  Expr id;
  std::string c;
  Sort S0;
  std::string x;
  bool leaves;
};

class Implementer {
 public:
  Implementer(std::string s, Role p, uint64_t seed)
      : s_(std::move(s)), p_(p), rng_(seed) {}

  Proc Impl(const Local& T, std::vector<LoopFrame>& loops) {
    Expr me = Nat(p_);
    switch (T->kind) {
      case LKind::kEnd:
        return proc::Nil();
      case LKind::kVar:
        return proc::Var("X" + T->t);
      case LKind::kRec:
        return proc::Rec("X" + T->t, T->c, T->n, Impl(T->next, loops));
      case LKind::kSend:
        return proc::Send(s_, me, Nat(T->p), Lit(Literal(T->S)),
                          Impl(T->next, loops));
      case LKind::kRecv:
        return proc::Recv(s_, me, Nat(T->p), Fresh(), Impl(T->next, loops));
      case LKind::kUSend:
        return proc::USend(s_, me, Nat(T->p), T->l, Lit(Literal(T->S)),
                           Impl(T->next, loops));
      case LKind::kURecv: {
        Expr dv = Lit(Literal(T->S));
        std::string x = Fresh();
        return proc::URecv(s_, me, Nat(T->p), T->l, dv, x,
                           Impl(T->next, loops));
      }
      case LKind::kSel: {
        const LBranch& b = T->branches[Below(T->branches.size())];
        return proc::Sel(s_, me, Nat(T->p), b.label, Impl(b.cont, loops));
      }
      case LKind::kBran:
      case LKind::kWBran: {
        std::vector<PBranch> bs;
        for (const auto& b : T->branches)
          bs.push_back({b.label, Impl(b.cont, loops)});
        return T->kind == LKind::kBran ? proc::Bran(s_, me, Nat(T->p), bs)
                                       : proc::WBran(s_, me, Nat(T->p), bs);
      }
      case LKind::kWSel: {
        const LBranch& b = T->branches[Below(T->branches.size())];
        return proc::WSel(s_, me, T->R, b.label, Impl(b.cont, loops));
      }
      case LKind::kLoop: {
        bool leaves = T->R.empty() || p_ < T->R.front();
        std::string x = Fresh(), y = Fresh();
        loops.push_back({T->e, T->c, T->S, x, leaves});
        Proc p0 = Impl(T->T0, loops);
        loops.pop_back();
        Proc p1 = proc::Call(T->e, Lit(Literal(T->S)));
        Proc p2 = Impl(T->T2, loops);
        return proc::Loop(s_, me, T->R, T->e, T->c, T->n, x, p0, p1, y, p2);
      }
      case LKind::kCall: {
        const LoopFrame* f = nullptr;
        for (const auto& l : loops) {
          if (Equal(l.id, T->e)) f = &l;
        }
        if (!f) return proc::Call(T->e, Lit(Literal(Sort::Nat())));
        Proc call = proc::Call(T->e, Name(f->x));
        if (!f->leaves) return call;
        return proc::If(Bin(Op::kLt, Name(f->c), Nat(2)), call,
                        proc::Exit(T->e, Name(f->x)));
      }
      default:
        break;
    }
    throw std::invalid_argument("no canonical implementation for " +
                                ToString(T));
  }

 private:
  uint64_t Below(uint64_t n) {
    return std::uniform_int_distribution<uint64_t>(0, n - 1)(rng_);
  }
  Value Literal(const Sort& s) {
    switch (s.kind) {
      case SortKind::kBool:
      case SortKind::kAck:
        return Value::Bool(Below(2));
      case SortKind::kBel:
        return Value::Nat(static_cast<int64_t>(Below(2)));
      default:
        return Value::Nat(static_cast<int64_t>(Below(3)));
    }
  }
  std::string Fresh() { return "x" + std::to_string(++fresh_); }

  std::string s_;
  Role p_;
  std::mt19937_64 rng_;
  int fresh_ = 0;
};

}  // namespace

Proc CanonicalProcess(const Local& T, const std::string& s, Role p,
                      uint64_t seed) {
  Implementer impl(s, p, seed);
  std::vector<LoopFrame> loops;
  return impl.Impl(T, loops);
}

std::vector<SystemUnderTest> GenerateSystems(int roles, int depth,
                                             const OperatorMix& mix,
                                             uint64_t seed, int count) {
  std::vector<SystemUnderTest> out;
  std::mt19937_64 rng(seed);
  for (int i = 0; out.size() < static_cast<size_t>(count); ++i) {
    uint64_t sub = rng();
    Generator gen(mix, sub);
    int max_roles = std::max(2, std::min(roles, depth + 1));
    int k = 2 + static_cast<int>(gen.Below(max_roles - 1));
    GenContext ctx;
    for (Role r = 1; r <= k; ++r) ctx.roles.push_back(r);
    int d = 1 + static_cast<int>(gen.Below(std::max(depth, 1)));
    Global G = gen.Gen(d, ctx);
    // Every role 1..k takes part, so the request owner is role k.
    if (static_cast<int>(Roles(G).size()) != k) continue;
    if (!WellFormed(G).ok()) continue;
    SystemUnderTest sut;
    sut.name = "gen-" + std::to_string(seed) + "-" + std::to_string(i);
    sut.G = G;
    sut.roles = k;
    sut.depth = d;
    sut.recursion_free = !HasRecOrLoop(G);
    std::ostringstream src;
    for (const auto& [l, s] : gen.label_sorts())
      src << "label " << l << " : " << s.ToString() << ";\n";
    src << "channel a : " << ToString(G) << ";\n";
    sut.source = src.str();
    sut.gamma.channels["a"] = G;
    sut.gamma.labels = gen.label_sorts();
    std::vector<Proc> kids;
    for (Role r = 1; r <= k; ++r) {
      Proc body = CanonicalProcess(Project(G, r), "s", r, sub + r);
      kids.push_back(r == k ? proc::Req("a", k, "s", body)
                            : proc::Acc("a", r, "s", body));
    }
    sut.cfg = Configuration(proc::Par(kids));
    out.push_back(std::move(sut));
  }
  return out;
}

SystemUnderTest RcSystemUnderTest(int n, const std::vector<int64_t>& beliefs) {
  RcSystem rc = BuildRc(n, beliefs);
  SystemUnderTest sut;
  sut.name = "rc-" + std::to_string(n);
  sut.gamma = rc.gamma;
  sut.cfg = rc.cfg;
  sut.G = rc.G;
  sut.roles = n;
  sut.recursion_free = false;
  sut.source = RcSource(n, beliefs);
  return sut;
}

// ---------------------------------------------------------------------------
// Trace checks.

std::string TraceViolation::ToString() const {
  return check + " at step " + std::to_string(step) + ": " + detail;
}

std::vector<TraceViolation> CheckTrace(const Trace& tr) {
  std::vector<TraceViolation> out;
  std::map<QueueKey, std::deque<Message>> shadow;
  for (const auto& [k, idx] : tr.initial.queues()) {
    const auto* q = tr.initial.Queue(k);
    if (q) shadow[k].assign(q->begin(), q->end());
  }
  std::set<std::pair<Actor, Value>> exited;
  for (const TraceStep& ts : tr.steps) {
    const StepEffect& e = ts.effect;
    const Rule rule = ts.redex.rule;
    auto add = [&](const std::string& check, const std::string& detail) {
      out.push_back({check, ts.index, detail});
    };
    if (e.removed) {
      auto& q = shadow[e.removed->first];
      if (q.empty() || !MessageEqual(q.front(), e.removed->second)) {
        add("fifo", RuleName(rule) + std::string(" took ") +
                        ftmpst::ToString(e.removed->second) + " from " +
                        e.removed->first.ToString() + " whose head is " +
                        (q.empty() ? std::string("absent")
                                   : ftmpst::ToString(q.front())));
        // Resynchronize with the removed message.
        for (auto it = q.begin(); it != q.end(); ++it) {
          if (MessageEqual(*it, e.removed->second)) {
            q.erase(it);
            break;
          }
        }
      } else {
        q.pop_front();
      }
    }
    for (const auto& [k, m] : e.appended) shadow[k].push_back(m);
    if (rule == Rule::kLCall && e.counter_after != e.counter_before + 1) {
      add("counter", "LCall moved the counter from " +
                         std::to_string(e.counter_before) + " to " +
                         std::to_string(e.counter_after));
    }
    if (e.exit) {
      auto key = std::make_pair(e.exit->actor, e.exit->id);
      if (!exited.insert(key).second)
        add("exit-unique", e.exit->actor.ToString() + " left loop " +
                               e.exit->id.ToString() + " twice");
    }
    if (rule == Rule::kLExitS) {
      size_t exits = std::count_if(
          e.appended.begin(), e.appended.end(), [](const auto& a) {
            return a.second.kind == Message::Kind::kExit;
          });
      if (exits != ts.redex.partners.size())
        add("exit-broadcast", "LExitS appended " + std::to_string(exits) +
                                  " exit messages for " +
                                  std::to_string(ts.redex.partners.size()) +
                                  " queues");
    }
    if ((rule == Rule::kRGet || rule == Rule::kUGet) && e.removed &&
        e.bound && *e.bound != e.removed->second.v) {
      add("delivery", std::string(RuleName(rule)) + " bound " +
                          e.bound->ToString() + " but dequeued " +
                          e.removed->second.v.ToString());
    }
    if (IsFailureRule(rule) && (!ts.redex.guard || !ts.redex.guard->answer)) {
      add("guard", std::string(RuleName(rule)) +
                       " applied without a true pattern answer");
    }
    if (rule == Rule::kCrash && ts.redex.guard && !ts.redex.guard->nsr) {
      add("crash-nsr", "crash of a component that is not nsr");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subject reduction.

std::string SrViolation::ToString() const {
  std::ostringstream out;
  out << check << " in sample " << sample << " at step " << step << ": "
      << detail << "\n    prefix:";
  for (const auto& r : prefix) out << " " << r;
  return out.str();
}

std::string SrReport::ToString() const {
  std::ostringstream out;
  out << "subject reduction: " << samples << " samples, " << steps_checked
      << " configurations typed, " << violations.size() << " violation(s)\n";
  for (const auto& v : violations) out << "  " << v.ToString() << "\n";
  return out.str();
}

namespace {

/** Types configurations of one trace, carrying the session environments. */
class SrTyper {
 public:
  explicit SrTyper(const SystemUnderTest& sut) : sut_(sut) {
    gamma_ = sut.gamma;
    for (const auto& [s, G] : sut.sessions) {
      gamma_.sessions[s] = G;
      outer_ = outer_.Compose(InitialEnv(G, s));
    }
  }

  /** Empty on success, the last type error otherwise. */
  std::string Type(const Configuration& cfg) {
    TypeOptions to;
    for (const auto& [s, env] : prev_) {
      auto& pool = to.pool[s];
      pool.push_back(env);
      for (auto& e : Evolve(env)) pool.push_back(std::move(e));
    }
    std::vector<SessionEnv> outers{outer_};
    if (!outer_.empty()) {
      for (auto& e : Evolve(outer_)) outers.push_back(std::move(e));
    }
    std::string err;
    for (const SessionEnv& delta : outers) {
      std::map<std::string, SessionEnv> chosen;
      to.chosen = &chosen;
      try {
        Typecheck(gamma_, {}, cfg.term(), delta, to);
        prev_ = std::move(chosen);
        outer_ = delta;
        return "";
      } catch (const TypeError& e) {
        err = e.what();
      } catch (const std::exception& e) {
        err = e.what();
      }
    }
    return err.empty() ? "no environment fits" : err;
  }

 private:
  const SystemUnderTest& sut_;
  GlobalEnv gamma_;
  SessionEnv outer_;
  std::map<std::string, SessionEnv> prev_;
};

std::vector<std::string> Prefix(const Trace& tr, int64_t upto) {
  std::vector<std::string> out;
  for (const TraceStep& ts : tr.steps) {
    if (ts.index > upto) break;
    out.push_back(ts.redex.ToString());
  }
  return out;
}

}  // namespace

SrReport CheckSubjectReduction(const SystemUnderTest& sut,
                               const FailurePatternSet& fp,
                               const SrOptions& opts) {
  SrReport rep;
  for (int i = 0; i < opts.samples; ++i) {
    ++rep.samples;
    SrTyper typer(sut);
    std::string err = typer.Type(sut.cfg);
    ++rep.steps_checked;
    if (!err.empty()) {
      rep.violations.push_back(
          {i, -1, "initial-typing", err, {}});
      continue;
    }
    RandomScheduler sched(DeriveSeed(opts.seed, i));
    RunOptions ro;
    ro.max_steps = opts.depth;
    ro.semantics = opts.semantics;
    bool failed = false;
    int64_t failed_at = -1;
    ro.on_step = [&](const Configuration& next, const TraceStep& ts) {
      if (failed) return;
      ++rep.steps_checked;
      std::string e = typer.Type(next);
      if (!e.empty()) {
        failed = true;
        failed_at = ts.index;
        err = e;
      }
    };
    Trace tr = Run(sut.cfg, fp, sched, ro);
    if (failed) {
      rep.violations.push_back({i, failed_at, "subject-reduction", err,
                                Prefix(tr, failed_at)});
    }
    if (opts.trace_checks) {
      for (const TraceViolation& v : CheckTrace(tr)) {
        rep.violations.push_back(
            {i, v.step, v.check, v.detail, Prefix(tr, v.step)});
        break;  // one per trace keeps reports short
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Progress.

std::string ProgressReport::ToString() const {
  std::ostringstream out;
  out << "progress: " << states << " states, " << stuck.size()
      << " stuck, " << not_prefix_free.size() << " maximal paths with prefixes"
      << (depth_insufficient ? ", depth insufficient" : "")
      << (budget_exceeded ? ", state budget exceeded" : "") << "\n";
  for (const auto& s : stuck) out << "  stuck: " << s << "\n";
  for (const auto& s : not_prefix_free) out << "  not prefix free: " << s << "\n";
  return out.str();
}

ProgressReport CheckProgress(const SystemUnderTest& sut,
                             const FailurePatternSet& fp, int depth,
                             size_t state_budget,
                             const SemanticsOptions& semantics) {
  ProgressReport rep;
  ExploreResult ex = Explore(sut.cfg, fp, depth, state_budget, semantics);
  rep.states = ex.states.size();
  rep.budget_exceeded = ex.budget_exceeded;
  for (size_t i = 0; i < ex.states.size(); ++i) {
    bool prefix_free = IsPrefixFree(ex.states[i]);
    if (ex.frontier[i]) {
      if (!prefix_free) rep.depth_insufficient = true;
      continue;
    }
    if (!ex.successors[i].empty()) continue;
    if (!prefix_free) {
      rep.stuck.push_back(ex.states[i].ToString());
      if (sut.recursion_free)
        rep.not_prefix_free.push_back(ex.states[i].ToString());
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Mutations.

bool MutationReport::ok() const {
  if (!baseline.empty()) return false;
  return std::all_of(results.begin(), results.end(),
                     [](const MutationResult& r) { return r.detected; });
}

std::string MutationReport::ToString() const {
  std::ostringstream out;
  out << "mutation suite: baseline " << baseline.size() << " violation(s)\n";
  for (const auto& b : baseline) out << "  baseline: " << b << "\n";
  for (const auto& r : results) {
    out << "  " << MutationName(r.mutation) << ": "
        << (r.detected ? "detected by " + r.by : std::string("NOT DETECTED"))
        << "\n";
    if (r.detected) out << "    " << r.witness << "\n";
  }
  return out.str();
}

MutationReport RunMutationSuite(const std::vector<SystemUnderTest>& suts,
                                int samples, int depth, uint64_t seed) {
  MutationReport rep;
  auto run = [&](Mutation m, const std::string& patterns,
                 std::vector<SrViolation>* found) {
    for (size_t i = 0; i < suts.size(); ++i) {
      auto fp = MakePatterns(patterns, DeriveSeed(seed, i), suts[i].roles);
      SrOptions o;
      o.depth = depth;
      o.samples = samples;
      o.seed = DeriveSeed(seed, 1000 + i);
      o.semantics.mutation = m;
      SrReport r = CheckSubjectReduction(suts[i], *fp, o);
      for (auto& v : r.violations) {
        v.detail = suts[i].name + " (" + patterns + "): " + v.detail;
        found->push_back(std::move(v));
        if (m != Mutation::kNone) return;
      }
    }
  };
  std::vector<SrViolation> base;
  run(Mutation::kNone, "chaotic-c1", &base);
  run(Mutation::kNone, "chaotic", &base);
  for (const auto& v : base) rep.baseline.push_back(v.ToString());
  for (Mutation m : AllMutations()) {
    MutationResult res;
    res.mutation = m;
    std::vector<SrViolation> found;
    // Crashes of reliable components need patterns that ignore nsr.
    run(m, m == Mutation::kCrashIgnoresNsr ? "chaotic" : "chaotic-c1", &found);
    if (!found.empty()) {
      res.detected = true;
      res.by = found.front().check;
      res.witness = found.front().ToString();
    }
    rep.results.push_back(std::move(res));
  }
  return rep;
}

}  // namespace ftmpst
