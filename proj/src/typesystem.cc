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

#include "ftmpst/typesystem.hh"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "ftmpst/projection.hh"

namespace ftmpst {

// ---------------------------------------------------------------------------
// Environments.

GlobalEnv GlobalEnv::FromSource(const SourceFile& file) {
  GlobalEnv g;
  g.channels = file.channels;
  g.labels = file.labels;
  g.sessions = file.sessions;
  return g;
}

GlobalEnv GlobalEnv::With(const std::string& x, const Sort& s) const {
  if (names.count(x) || channels.count(x) || sessions.count(x))
    throw TypeError("name " + x + " is bound twice in the global environment");
  GlobalEnv g = *this;
  g.names[x] = s;
  return g;
}

std::string LoopEnv::ToString() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [X, v] : vars) {
    out += (first ? "" : ", ") + X + ": " + v.actor.ToString() + " " + v.t;
    first = false;
  }
  for (const auto& l : loops) {
    out += (first ? "" : ", ") + ftmpst::ToString(l.id) + ": " +
           l.actor.ToString() + "<" + l.S0.ToString() + ", " +
           l.S2.ToString() + ">";
    first = false;
  }
  return out + "}";
}

void SessionEnv::Set(const Actor& a, const Local& T) {
  if (T->kind == LKind::kEnd) {
    actors_.erase(a);
  } else {
    actors_[a] = T;
  }
}

const Local* SessionEnv::Find(const Actor& a) const {
  auto it = actors_.find(a);
  return it == actors_.end() ? nullptr : &it->second;
}

void SessionEnv::SetQueue(const QueueKey& k, std::vector<MsgType> msgs) {
  queues_[k] = std::move(msgs);
}

const std::vector<MsgType>* SessionEnv::FindQueue(const QueueKey& k) const {
  auto it = queues_.find(k);
  return it == queues_.end() ? nullptr : &it->second;
}

SessionEnv SessionEnv::Restrict(const std::string& s) const {
  SessionEnv out;
  for (const auto& [a, T] : actors_) {
    if (a.session == s) out.actors_[a] = T;
  }
  for (const auto& [k, m] : queues_) {
    if (k.session == s) out.queues_[k] = m;
  }
  return out;
}

SessionEnv SessionEnv::Without(const std::string& s) const {
  SessionEnv out;
  for (const auto& [a, T] : actors_) {
    if (a.session != s) out.actors_[a] = T;
  }
  for (const auto& [k, m] : queues_) {
    if (k.session != s) out.queues_[k] = m;
  }
  return out;
}

std::set<std::string> SessionEnv::Sessions() const {
  std::set<std::string> out;
  for (const auto& [a, T] : actors_) out.insert(a.session);
  for (const auto& [k, m] : queues_) out.insert(k.session);
  return out;
}

SessionEnv SessionEnv::Compose(const SessionEnv& other) const {
  SessionEnv out = *this;
  for (const auto& [a, T] : other.actors_) {
    if (out.actors_.count(a))
      throw TypeError("linearity: actor " + a.ToString() + " is bound twice");
    out.actors_[a] = T;
  }
  for (const auto& [k, m] : other.queues_) {
    if (out.queues_.count(k))
      throw TypeError("linearity: queue " + k.ToString() + " is bound twice");
    out.queues_[k] = m;
  }
  return out;
}

std::string SessionEnv::Key() const {
  std::string out;
  for (const auto& [a, T] : actors_) {
    out += a.ToString() + ":" + AlphaKey(T) + ";";
  }
  for (const auto& [k, m] : queues_) {
    out += k.ToString() + ":[";
    for (const MsgType& t : m) out += ftmpst::ToString(t) + ",";
    out += "];";
  }
  return out;
}

std::string SessionEnv::ToString() const {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += ", ";
  };
  for (const auto& [a, T] : actors_) {
    sep();
    out += a.ToString() + ": " + ftmpst::ToString(T);
  }
  for (const auto& [k, m] : queues_) {
    sep();
    out += k.ToString() + ": [";
    for (size_t i = 0; i < m.size(); ++i) {
      out += (i ? ", " : "") + ftmpst::ToString(m[i]);
    }
    out += "]";
  }
  return out.empty() ? "{}" : "{" + out + "}";
}

std::string Derivation::Explain() const {
  std::ostringstream out;
  std::function<void(const Derivation&, int)> walk = [&](const Derivation& d,
                                                          int depth) {
    out << std::string(2 * depth, ' ') << "(" << d.rule << ") "
        << d.conclusion << "\n";
    for (const Derivation& p : d.premises) walk(p, depth + 1);
  };
  walk(*this, 0);
  return out.str();
}

size_t Derivation::Size() const {
  size_t n = 1;
  for (const Derivation& p : premises) n += p.Size();
  return n;
}

TypeError::TypeError(const std::string& what, std::string process,
                     std::string expected, std::string actual)
    : std::runtime_error(what),
      process_(std::move(process)),
      expected_(std::move(expected)),
      actual_(std::move(actual)) {}

Sort SortOf(const GlobalEnv& gamma, const Expr& e) {
  for (const std::string& x : FreeNames(e)) {
    if (!gamma.names.count(x)) throw TypeError("unbound name " + x);
  }
  try {
    return SortOf(e, gamma.names);
  } catch (const EvalError& err) {
    throw TypeError(std::string("ill-sorted expression ") + ToString(e) +
                    ": " + err.what());
  }
}

// ---------------------------------------------------------------------------
// Residue split helpers: rewriting (c mod m) and resolving closed cases.

namespace {

Expr Rebuild(const Expr& e, std::vector<Expr> args) {
  ExprNode n = *e;
  n.args = std::move(args);
  return std::make_shared<const ExprNode>(std::move(n));
}

bool IsCounterMod(const Expr& e, const std::string& c, int64_t* m) {
  if (e->op != Op::kMod || e->args[0]->op != Op::kName ||
      e->args[0]->name != c || !IsLiteral(e->args[1]) ||
      e->args[1]->lit.kind() != Value::Kind::kNat ||
      e->args[1]->lit.as_nat() <= 0) {
    return false;
  }
  *m = e->args[1]->lit.as_nat();
  return true;
}

/** Applies f to every expression of T or P, outside binders of c. */
using ExprFn = std::function<Expr(const Expr&)>;

Label MapLabel(const Label& l, const ExprFn& f) {
  Label out{l.sym, {}};
  for (const Expr& e : l.rt) out.rt.push_back(f(e));
  return out;
}

Local MapLocal(const Local& T, const std::string& c, const ExprFn& f) {
  if (!T) return T;
  LNode n = *T;
  if (n.e) n.e = f(n.e);
  n.l = MapLabel(n.l, f);
  for (auto& b : n.branches) {
    b.label = MapLabel(b.label, f);
    b.cont = MapLocal(b.cont, c, f);
  }
  bool shadows = T->c == c;
  if (T->kind != LKind::kRec || !shadows) n.next = MapLocal(T->next, c, f);
  if (T->kind != LKind::kLoop || !shadows) {
    n.T0 = MapLocal(T->T0, c, f);
    n.T1 = MapLocal(T->T1, c, f);
  }
  n.T2 = MapLocal(T->T2, c, f);
  return std::make_shared<const LNode>(std::move(n));
}

Proc MapProc(const Proc& P, const std::string& c, const ExprFn& f) {
  if (!P) return P;
  PNode n = *P;
  for (Expr* e : {&n.p, &n.q, &n.e, &n.e2, &n.dr}) {
    if (*e) *e = f(*e);
  }
  n.l = MapLabel(n.l, f);
  for (auto& b : n.branches) {
    b.label = MapLabel(b.label, f);
    b.cont = MapProc(b.cont, c, f);
  }
  for (auto& k : n.kids) k = MapProc(k, c, f);
  auto binds = [&](const std::string& x) { return !x.empty() && x == c; };
  switch (P->kind) {
    case PKind::kRecv:
    case PKind::kURecv:
      if (!binds(P->x)) n.next = MapProc(P->next, c, f);
      break;
    case PKind::kDRecv:
      if (!binds(P->x) && !binds(P->y)) n.next = MapProc(P->next, c, f);
      break;
    case PKind::kRec:
      if (!binds(P->c)) n.next = MapProc(P->next, c, f);
      break;
    case PKind::kReq:
    case PKind::kAcc:
      if (!binds(P->s)) n.next = MapProc(P->next, c, f);
      break;
    case PKind::kRes:
      if (!binds(P->x)) n.next = MapProc(P->next, c, f);
      break;
    case PKind::kLoop:
      if (!binds(P->c) && !binds(P->x)) n.P0 = MapProc(P->P0, c, f);
      if (!binds(P->c)) n.P1 = MapProc(P->P1, c, f);
      if (!binds(P->y)) n.P2 = MapProc(P->P2, c, f);
      break;
    case PKind::kIf:
      n.P1 = MapProc(P->P1, c, f);
      n.P2 = MapProc(P->P2, c, f);
      break;
    default:
      n.next = MapProc(P->next, c, f);
      break;
  }
  return std::make_shared<const PNode>(std::move(n));
}

/** Rewrites (c mod m) to (rho mod m); only collects m when moduli is set. */
Expr RewriteMod(const Expr& e, const std::string& c, int64_t rho,
                std::set<int64_t>* moduli) {
  int64_t m = 0;
  if (IsCounterMod(e, c, &m)) {
    if (moduli) {
      moduli->insert(m);
      return e;
    }
    return Nat(rho % m);
  }
  if (e->args.empty()) return e;
  std::vector<Expr> args;
  for (const Expr& a : e->args) args.push_back(RewriteMod(a, c, rho, moduli));
  return Rebuild(e, std::move(args));
}

ExprFn ModRewriter(const std::string& c, int64_t rho,
                   std::set<int64_t>* moduli) {
  return [c, rho, moduli](const Expr& e) { return RewriteMod(e, c, rho, moduli); };
}

int64_t Lcm(const std::set<int64_t>& ms) {
  int64_t l = 1;
  for (int64_t m : ms) l = std::lcm(l, m);
  return l;
}

}  // namespace

Local Simplify(const Local& T) {
  if (!T) return T;
  if (T->kind == LKind::kCase) {
    if (auto v = TryEval(T->e)) {
      for (size_t i = 0; i < T->keys.size(); ++i) {
        if (v->kind() == Value::Kind::kNat && v->as_nat() == T->keys[i])
          return Simplify(T->branches[i].cont);
      }
    }
  }
  LNode n = *T;
  bool changed = false;
  auto simp = [&](Local& x) {
    if (!x) return;
    Local y = Simplify(x);
    if (y != x) {
      x = y;
      changed = true;
    }
  };
  simp(n.next);
  simp(n.T0);
  simp(n.T1);
  simp(n.T2);
  for (auto& b : n.branches) simp(b.cont);
  if (!changed) return T;
  return std::make_shared<const LNode>(std::move(n));
}

// ---------------------------------------------------------------------------
// Typing.

namespace {

std::string Short(const Proc& P) {
  std::string s = ToString(P);
  if (s.size() > 90) s = s.substr(0, 87) + "...";
  return s;
}

bool SameLabel(const Label& a, const Label& b) { return a.sym == b.sym; }

bool SameId(const Expr& a, const Expr& b) {
  if (Equal(a, b)) return true;
  auto va = TryEval(a), vb = TryEval(b);
  return va && vb && *va == *vb;
}

class Typer {
 public:
  explicit Typer(const TypeOptions& opts) : opts_(opts) {}

  Derivation Check(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                   const SessionEnv& d_in) {
    // Empty queues are absorbed like end outside parallel compositions.
    SessionEnv d = d_in;
    if (P->kind != PKind::kPar && P->kind != PKind::kQueue &&
        P->kind != PKind::kRes) {
      for (const auto& [k, m] : d_in.queues()) {
        if (m.empty()) d.EraseQueue(k);
      }
    }
    switch (P->kind) {
      case PKind::kNil:
        if (!d.empty())
          Fail("(End) needs an empty session environment", P, "{}", d);
        if (!th.NoLoop())
          Fail("(End) needs noLoop of the loop environment " + th.ToString(),
               P, "{}", d);
        return Leaf("End", th, P, d);
      case PKind::kCrash:
        for (const auto& [a, T] : d.actors()) {
          if (!Nsr(T))
            Fail("(Crash) needs nsr: " + a.ToString() + " is strongly reliable",
                 P, "nsr environment", d);
        }
        if (!d.queues().empty())
          Fail("(Crash) cannot own queues", P, "actors only", d);
        return Leaf("Crash", th, P, d);
      case PKind::kVar:
        return Var(th, P, d);
      case PKind::kReq:
      case PKind::kAcc:
        return Session(g, th, P, d);
      case PKind::kSend:
      case PKind::kUSend:
        return Send(g, th, P, d);
      case PKind::kRecv:
      case PKind::kURecv:
        return Recv(g, th, P, d);
      case PKind::kSel:
      case PKind::kWSel:
        return Select(g, th, P, d);
      case PKind::kBran:
      case PKind::kWBran:
        return Branch(g, th, P, d);
      case PKind::kDSend:
        return DSend(g, th, P, d);
      case PKind::kDRecv:
        return DRecv(g, th, P, d);
      case PKind::kIf:
        return If(g, th, P, d);
      case PKind::kPar:
        return Par(g, th, P, d);
      case PKind::kRes:
        return Res(g, th, P, d);
      case PKind::kRec:
        return Rec(g, th, P, d);
      case PKind::kLoop:
        return Loop(g, th, P, d);
      case PKind::kCall:
      case PKind::kExit:
        return CallExit(g, th, P, d);
      case PKind::kQueue:
        return Queue(g, th, P, d);
    }
    Fail("unknown process", P, "", d);
  }

 private:
  [[noreturn]] static void Fail(const std::string& why, const Proc& P,
                                const std::string& expected,
                                const SessionEnv& actual) {
    throw TypeError(why + " at " + Short(P), Short(P), expected,
                    actual.ToString());
  }

  static Derivation Leaf(const std::string& rule, const LoopEnv& th,
                         const Proc& P, const SessionEnv& d) {
    Derivation out;
    out.rule = rule;
    out.conclusion = th.ToString() + " |- " + Short(P) + " |> " + d.ToString();
    return out;
  }

  static Actor ActorOf(const Proc& P) {
    auto r = EvalRole(P->p);
    if (!r) Fail("the role " + ToString(P->p) + " is not closed", P, "", {});
    return {P->ch, *r};
  }

  static Role PeerOf(const Proc& P) {
    auto r = EvalRole(P->q);
    if (!r) Fail("the role " + ToString(P->q) + " is not closed", P, "", {});
    return *r;
  }

  /** The type of a in d with the expected head kind. */
  static Local Need(const SessionEnv& d, const Actor& a, LKind kind,
                    const Proc& P, const std::string& what) {
    const Local* T = d.Find(a);
    if (!T) Fail("no type for " + a.ToString(), P, a.ToString() + ": " + what, d);
    if ((*T)->kind != kind)
      Fail("type of " + a.ToString() + " is " + ToString(*T) + ", expected " +
               what,
           P, what, d);
    return *T;
  }

  static void NeedSort(const GlobalEnv& g, const Expr& e, const Sort& S,
                       const Proc& P, const SessionEnv& d) {
    for (const std::string& x : FreeNames(e)) {
      if (!g.names.count(x))
        Fail("unbound name " + x + " in " + ToString(e), P, S.ToString(), d);
    }
    if (!CheckSort(e, S, g.names))
      Fail("expression " + ToString(e) + " does not have sort " +
               S.ToString(),
           P, S.ToString(), d);
  }

  static void NeedLabelSort(const GlobalEnv& g, const Label& l, const Sort& S,
                            const Proc& P, const SessionEnv& d) {
    auto it = g.labels.find(l.sym);
    if (it != g.labels.end() && !(it->second == S))
      Fail("label " + l.sym + " carries " + it->second.ToString() +
               ", the type says " + S.ToString(),
           P, it->second.ToString(), d);
  }

  Derivation Var(const LoopEnv& th, const Proc& P, const SessionEnv& d) {
    auto it = th.vars.find(P->X);
    if (it == th.vars.end()) Fail("unbound process variable " + P->X, P, "", d);
    const auto& [a, t] = it->second;
    if (d.actors().size() != 1 || !d.queues().empty() || !d.Find(a) ||
        (*d.Find(a))->kind != LKind::kVar || (*d.Find(a))->t != t) {
      Fail("(Var) needs exactly " + a.ToString() + ": " + t, P,
           "{" + a.ToString() + ": " + t + "}", d);
    }
    return Leaf("Var", th, P, d);
  }

  Derivation Session(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                     const SessionEnv& d) {
    bool req = P->kind == PKind::kReq;
    auto it = g.channels.find(P->ch);
    if (it == g.channels.end()) Fail("unknown shared channel " + P->ch, P, "", d);
    const Global& G = it->second;
    int64_t n = static_cast<int64_t>(Roles(G).size());
    Role p;
    if (req) {
      if (P->count != n)
        Fail("request for " + std::to_string(P->count) + " roles, " + P->ch +
                 " has " + std::to_string(n),
             P, "", d);
      p = static_cast<Role>(n);
    } else {
      if (P->count <= 0 || P->count >= n)
        Fail("accept role " + std::to_string(P->count) + " out of range", P,
             "", d);
      p = static_cast<Role>(P->count);
    }
    Local T;
    try {
      T = Project(G, p);
    } catch (const ProjectionError& e) {
      Fail(std::string("projection failed: ") + e.what(), P, "", d);
    }
    SessionEnv next = d;
    Actor a{P->s, p};
    if (next.Find(a)) Fail("linearity: " + a.ToString() + " already typed", P, "", d);
    next.Set(a, T);
    Derivation out = Leaf(req ? "Req" : "Acc", th, P, d);
    out.premises.push_back(Check(g, th, P->next, next));
    return out;
  }

  Derivation Send(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                  const SessionEnv& d) {
    bool unr = P->kind == PKind::kUSend;
    Actor a = ActorOf(P);
    Role q = PeerOf(P);
    Local T = Need(d, a, unr ? LKind::kUSend : LKind::kSend, P,
                   unr ? "an unreliable send" : "a reliable send");
    if (T->p != q)
      Fail("send to " + std::to_string(q) + ", the type sends to " +
               std::to_string(T->p),
           P, ToString(T), d);
    if (unr) {
      if (!SameLabel(P->l, T->l))
        Fail("label " + P->l.sym + " differs from " + T->l.sym, P, ToString(T),
             d);
      NeedLabelSort(g, T->l, T->S, P, d);
    }
    NeedSort(g, P->e, T->S, P, d);
    SessionEnv next = d;
    next.Set(a, T->next);
    Derivation out = Leaf(unr ? "USend" : "RSend", th, P, d);
    out.premises.push_back(Check(g, th, P->next, next));
    return out;
  }

  Derivation Recv(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                  const SessionEnv& d) {
    bool unr = P->kind == PKind::kURecv;
    Actor a = ActorOf(P);
    Role q = PeerOf(P);
    Local T = Need(d, a, unr ? LKind::kURecv : LKind::kRecv, P,
                   unr ? "an unreliable receive" : "a reliable receive");
    if (T->p != q)
      Fail("receive from " + std::to_string(q) + ", the type receives from " +
               std::to_string(T->p),
           P, ToString(T), d);
    if (unr) {
      if (!SameLabel(P->l, T->l))
        Fail("label " + P->l.sym + " differs from " + T->l.sym, P, ToString(T),
             d);
      NeedLabelSort(g, T->l, T->S, P, d);
      NeedSort(g, P->e, T->S, P, d);
    }
    SessionEnv next = d;
    next.Set(a, T->next);
    Derivation out = Leaf(unr ? "UGet" : "RGet", th, P, d);
    out.premises.push_back(Check(Bind(g, P->x, T->S, P, d), th, P->next, next));
    return out;
  }

  /** Gamma o x:S where an inner binder shadows an outer one of the same
   * name (alpha-renaming the inner binder apart). */
  static GlobalEnv Bind(const GlobalEnv& g, const std::string& x,
                        const Sort& S, const Proc& P, const SessionEnv& d) {
    try {
      if (g.names.count(x)) {
        GlobalEnv shadowed = g;
        shadowed.names.erase(x);
        return shadowed.With(x, S);
      }
      return g.With(x, S);
    } catch (const TypeError& e) {
      Fail(e.what(), P, "", d);
    }
  }

  Derivation Select(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                    const SessionEnv& d) {
    bool weak = P->kind == PKind::kWSel;
    Actor a = ActorOf(P);
    Local T = Need(d, a, weak ? LKind::kWSel : LKind::kSel, P,
                   weak ? "a weakly reliable selection" : "a selection");
    if (weak) {
      if (T->R != P->R) Fail("selection role set differs", P, ToString(T), d);
    } else if (T->p != PeerOf(P)) {
      Fail("selection target differs", P, ToString(T), d);
    }
    for (const auto& b : T->branches) {
      if (SameLabel(b.label, P->l)) {
        SessionEnv next = d;
        next.Set(a, b.cont);
        Derivation out = Leaf(weak ? "WSel" : "RSel", th, P, d);
        out.premises.push_back(Check(g, th, P->next, next));
        return out;
      }
    }
    Fail("label " + P->l.sym + " is not offered by the type", P, ToString(T), d);
  }

  Derivation Branch(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                    const SessionEnv& d) {
    bool weak = P->kind == PKind::kWBran;
    Actor a = ActorOf(P);
    Local T = Need(d, a, weak ? LKind::kWBran : LKind::kBran, P,
                   weak ? "a weakly reliable branching" : "a branching");
    if (T->p != PeerOf(P)) Fail("branching source differs", P, ToString(T), d);
    Derivation out = Leaf(weak ? "WBran" : "RBran", th, P, d);
    // Every branch of the type is implemented; the defaults correspond.
    for (size_t j = 0; j < T->branches.size(); ++j) {
      const auto& tb = T->branches[j];
      int match = -1;
      if (weak && j + 1 == T->branches.size()) {
        match = static_cast<int>(P->branches.size()) - 1;
        if (!SameLabel(P->branches.back().label, tb.label))
          Fail("default branch label differs", P, ToString(T), d);
      } else {
        for (size_t i = 0; i < P->branches.size(); ++i) {
          if (SameLabel(P->branches[i].label, tb.label)) match = static_cast<int>(i);
        }
      }
      if (match < 0)
        Fail("branch " + tb.label.sym + " is not implemented", P, ToString(T),
             d);
      SessionEnv next = d;
      next.Set(a, tb.cont);
      out.premises.push_back(Check(g, th, P->branches[match].cont, next));
    }
    return out;
  }

  Derivation DSend(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                   const SessionEnv& d) {
    Actor a = ActorOf(P);
    Local T = Need(d, a, LKind::kDSend, P, "a delegation");
    auto dr = EvalRole(P->dr);
    if (!dr || *dr != T->dr || T->p != PeerOf(P))
      Fail("delegated endpoint differs from the type", P, ToString(T), d);
    Actor sent{P->dch, *dr};
    const Local* U = d.Find(sent);
    if (!U || !AlphaEqual(*U, T->dtype))
      Fail("delegated endpoint " + sent.ToString() + " lacks type " +
               ToString(T->dtype),
           P, ToString(T->dtype), d);
    SessionEnv next = d;
    next.Erase(sent);
    next.Set(a, T->next);
    Derivation out = Leaf("Deleg", th, P, d);
    out.premises.push_back(Check(g, th, P->next, next));
    return out;
  }

  Derivation DRecv(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                   const SessionEnv& d) {
    Actor a = ActorOf(P);
    Local T = Need(d, a, LKind::kDRecv, P, "a delegation reception");
    if (T->p != PeerOf(P)) Fail("delegation source differs", P, ToString(T), d);
    Proc body = Subst(P->next, P->y, Nat(T->dr));
    SessionEnv next = d;
    next.Set(a, T->next);
    Actor got{P->x, T->dr};
    if (next.Find(got)) Fail("linearity: " + got.ToString(), P, "", d);
    next.Set(got, T->dtype);
    Derivation out = Leaf("SRecv", th, P, d);
    out.premises.push_back(Check(g, th, body, next));
    return out;
  }

  Derivation If(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                const SessionEnv& d) {
    if (FreeNames(P->e).empty()) {
      auto v = TryEval(P->e);
      if (!v || v->kind() != Value::Kind::kBool)
        Fail("condition " + ToString(P->e) + " is not a boolean", P, "", d);
      Derivation out = Leaf(v->as_bool() ? "If-closed-T" : "If-closed-F", th,
                            P, d);
      out.premises.push_back(Check(g, th, v->as_bool() ? P->P1 : P->P2, d));
      return out;
    }
    NeedSort(g, P->e, Sort::Bool(), P, d);
    Derivation out = Leaf("If", th, P, d);
    out.premises.push_back(Check(g, th, P->P1, d));
    out.premises.push_back(Check(g, th, P->P2, d));
    return out;
  }

  Derivation Par(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                 const SessionEnv& d) {
    const auto& kids = P->kids;
    std::vector<SessionEnv> parts(kids.size());
    std::vector<LoopEnv> thetas(kids.size());
    std::vector<std::set<Actor>> owned(kids.size());
    int crash = -1;
    for (size_t k = 0; k < kids.size(); ++k) {
      if (kids[k]->kind != PKind::kQueue) owned[k] = Actors(kids[k]);
      if (kids[k]->kind == PKind::kCrash && crash < 0) crash = static_cast<int>(k);
    }
    for (const auto& [a, T] : d.actors()) {
      int owner = -1;
      for (size_t k = 0; k < kids.size(); ++k) {
        if (!owned[k].count(a)) continue;
        if (owner >= 0)
          Fail("linearity: " + a.ToString() + " is used by two components", P,
               "", d);
        owner = static_cast<int>(k);
      }
      if (owner < 0) owner = crash;
      if (owner < 0)
        Fail("no component implements " + a.ToString() + ": " + ToString(T), P,
             "", d);
      parts[owner].Set(a, T);
    }
    std::set<QueueKey> seen;
    for (size_t k = 0; k < kids.size(); ++k) {
      const Proc& c = kids[k];
      if (c->kind != PKind::kQueue) continue;
      auto from = EvalRole(c->p), to = EvalRole(c->q);
      if (!from || !to) Fail("queue with open roles", c, "", d);
      QueueKey key{c->ch, *from, *to};
      if (!seen.insert(key).second)
        Fail("linearity: two queues " + key.ToString(), P, "", d);
      if (const auto* m = d.FindQueue(key)) {
        parts[k].SetQueue(key, *m);
      } else if (!c->queue.empty()) {
        Fail("queue " + key.ToString() + " has no type", P, "", d);
      }
    }
    for (const auto& [key, m] : d.queues()) {
      if (!seen.count(key) && !m.empty())
        Fail("no queue implements " + key.ToString(), P, "", d);
    }
    // Theta is linear: each entry goes to the component that uses it.
    for (const auto& [X, v] : th.vars) {
      for (size_t k = 0; k < kids.size(); ++k) {
        if (FreeVars(kids[k]).count(X)) {
          thetas[k].vars[X] = v;
          break;
        }
      }
    }
    for (const auto& l : th.loops) {
      for (size_t k = 0; k < kids.size(); ++k) {
        if (owned[k].count(l.actor)) {
          thetas[k].loops.push_back(l);
          break;
        }
      }
    }
    Derivation out = Leaf("Par", th, P, d);
    for (size_t k = 0; k < kids.size(); ++k) {
      out.premises.push_back(Check(g, thetas[k], kids[k], parts[k]));
    }
    return out;
  }

  Derivation Res(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                 const SessionEnv& d) {
    if (P->sort) {
      Derivation out = Leaf("Res1", th, P, d);
      out.premises.push_back(Check(Bind(g, P->x, *P->sort, P, d), th, P->next, d));
      return out;
    }
    const std::string& s = P->x;
    if (!d.Restrict(s).empty())
      Fail("restricted session " + s + " is also typed outside", P, "", d);
    std::vector<SessionEnv> candidates;
    auto pit = opts_.pool.find(s);
    if (pit != opts_.pool.end()) candidates = pit->second;
    std::string last_error = "no candidate environment for session " + s;
    std::unordered_set<std::string> tried;
    auto attempt = [&](const SessionEnv& cand) -> std::optional<Derivation> {
      if (!tried.insert(cand.Key()).second) return std::nullopt;
      try {
        SessionEnv full = d.Compose(cand);
        Derivation out = Leaf("Res2", th, P, d);
        out.premises.push_back(Check(g, th, P->next, full));
        if (opts_.chosen) (*opts_.chosen)[s] = cand;
        return out;
      } catch (const TypeError& e) {
        last_error = e.what();
        return std::nullopt;
      }
    };
    for (const SessionEnv& c : candidates) {
      if (auto r = attempt(c)) return *r;
    }
    // Fallback: environments reachable from an initial environment.
    std::set<Role> roles;
    for (const Actor& a : Actors(P->next)) {
      if (a.session == s) roles.insert(a.role);
    }
    std::vector<Global> globals;
    for (const auto& [a, G] : g.channels) globals.push_back(G);
    for (const Global& G : globals) {
      std::set<Role> rg = Roles(G);
      if (!std::includes(rg.begin(), rg.end(), roles.begin(), roles.end()))
        continue;
      std::vector<SessionEnv> layer{InitialEnv(G, s)};
      for (int step = 0; step <= opts_.res2_budget && !layer.empty(); ++step) {
        std::vector<SessionEnv> next;
        for (const SessionEnv& c : layer) {
          if (auto r = attempt(c)) return *r;
          if (step < opts_.res2_budget) {
            for (SessionEnv& e : Evolve(c)) next.push_back(std::move(e));
          }
        }
        layer = std::move(next);
      }
    }
    if (roles.empty()) {
      if (auto r = attempt(SessionEnv())) return *r;
    }
    Fail("(Res2) found no coherent environment for " + s + ": " + last_error,
         P, "", d);
  }

  Derivation Rec(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                 const SessionEnv& d) {
    if (d.actors().size() != 1 || !d.queues().empty())
      Fail("(Rec) needs exactly one actor", P, "one recursive actor", d);
    const auto& [a, T] = *d.actors().begin();
    if (T->kind != LKind::kRec)
      Fail("(Rec) needs a recursive type for " + a.ToString(), P, "mu type", d);
    if (T->n != P->count)
      Fail("recursion counter " + std::to_string(P->count) +
               " differs from the type's " + std::to_string(T->n),
           P, ToString(T), d);
    Local body = T->c == P->c ? T->next : Subst(T->next, T->c, Name(P->c));
    if (th.vars.count(P->X))
      Fail("process variable " + P->X + " bound twice", P, "", d);
    LoopEnv inner = th;
    inner.vars[P->X] = {a, T->t};
    SessionEnv next;
    next.Set(a, body);
    Derivation out = Leaf("Rec", th, P, d);
    out.premises.push_back(
        Check(Bind(g, P->c, Sort::Nat(), P, d), inner, P->next, next));
    return out;
  }

  /** Types P against {a: T}, splitting on residues of c when (c mod m)
   * occurs in P or T. */
  void CheckProgram(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                    const Actor& a, const Local& T, const std::string& c,
                    Derivation* out) {
    std::set<int64_t> moduli;
    MapProc(P, c, ModRewriter(c, 0, &moduli));
    MapLocal(T, c, ModRewriter(c, 0, &moduli));
    if (moduli.empty()) {
      SessionEnv d;
      d.Set(a, Simplify(T));
      out->premises.push_back(Check(g, th, P, d));
      return;
    }
    int64_t L = Lcm(moduli);
    for (int64_t rho = 0; rho < L; ++rho) {
      Proc Pr = MapProc(P, c, ModRewriter(c, rho, nullptr));
      Local Tr = Simplify(MapLocal(T, c, ModRewriter(c, rho, nullptr)));
      SessionEnv d;
      d.Set(a, Tr);
      Derivation split;
      split.rule = "Residue";
      split.conclusion = c + " mod " + std::to_string(L) + " = " +
                         std::to_string(rho);
      split.premises.push_back(Check(g, th, Pr, d));
      out->premises.push_back(std::move(split));
    }
  }

  Derivation Loop(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                  const SessionEnv& d) {
    Actor a = ActorOf(P);
    Local T = Need(d, a, LKind::kLoop, P, "a loop");
    if (T->R != P->R) Fail("loop role sets differ", P, ToString(T), d);
    if (!Equal(T->e, P->e))
      Fail("loop identifier " + ToString(P->e) + " differs from the type's " +
               ToString(T->e),
           P, ToString(T), d);
    if (T->n != P->count)
      Fail("loop counter " + std::to_string(P->count) +
               " differs from the type's " + std::to_string(T->n),
           P, ToString(T), d);
    Local T0 = T->c == P->c ? T->T0 : Subst(T->T0, T->c, Name(P->c));
    Local T1 = T->c == P->c ? T->T1 : Subst(T->T1, T->c, Name(P->c));
    if (!Unr(T0) || !Unr(T1))
      Fail("loop program types must be unreliable", P, "unr types", d);
    LoopEnv inner;
    inner.loops.push_back({P->e, a, T->S, T->S2});
    Derivation out = Leaf("Loop", th, P, d);
    GlobalEnv gc = Bind(g, P->c, Sort::Nat(), P, d);
    CheckProgram(Bind(gc, P->x, T->S, P, d), inner, P->P0, a, T0, P->c, &out);
    CheckProgram(gc, inner, P->P1, a, T1, P->c, &out);
    SessionEnv rest = d;
    rest.Set(a, T->T2);
    out.premises.push_back(Check(Bind(g, P->y, T->S2, P, d), th, P->P2, rest));
    return out;
  }

  Derivation CallExit(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                      const SessionEnv& d) {
    bool call = P->kind == PKind::kCall;
    const LoopEnv::LoopEntry* entry = nullptr;
    for (const auto& l : th.loops) {
      if (Equal(l.id, P->e)) entry = &l;
    }
    if (!entry)
      Fail("loop " + ToString(P->e) + " is not in the loop environment " +
               th.ToString(),
           P, "", d);
    NeedSort(g, P->e2, call ? entry->S0 : entry->S2, P, d);
    if (!d.queues().empty()) Fail("calls and exits own no queues", P, "", d);
    for (const auto& [a, T] : d.actors()) {
      if (!(a == entry->actor))
        Fail("only " + entry->actor.ToString() + " may be typed here", P, "", d);
    }
    if (call) {
      const Local* T = d.Find(entry->actor);
      if (!T || (*T)->kind != LKind::kCall || !Equal((*T)->e, P->e))
        Fail("(Call) needs " + entry->actor.ToString() + ": call(" +
                 ToString(P->e) + ")",
             P, entry->actor.ToString() + ": call(" + ToString(P->e) + ")", d);
    }
    return Leaf(call ? "Call" : "Exit", th, P, d);
  }

  Derivation Queue(const GlobalEnv& g, const LoopEnv& th, const Proc& P,
                   const SessionEnv& d) {
    auto from = EvalRole(P->p), to = EvalRole(P->q);
    QueueKey key{P->ch, *from, *to};
    const auto* types = d.FindQueue(key);
    std::vector<MsgType> none;
    if (!types) types = &none;
    if (!d.actors().empty() || d.queues().size() > (d.FindQueue(key) ? 1u : 0u))
      Fail("a queue owns only its own entry", P, key.ToString(), d);
    if (types->size() != P->queue.size())
      Fail("queue " + key.ToString() + " holds " +
               std::to_string(P->queue.size()) + " messages, the type " +
               std::to_string(types->size()),
           P, key.ToString(), d);
    Derivation out = Leaf(P->queue.empty() ? "MQEmpty" : "MQ", th, P, d);
    for (size_t i = 0; i < types->size(); ++i) {
      const Message& m = P->queue[i];
      const MsgType& t = (*types)[i];
      bool ok = static_cast<int>(m.kind) == static_cast<int>(t.kind);
      if (ok) {
        switch (t.kind) {
          case MsgType::Kind::kR:
            ok = m.v.HasSort(t.S);
            break;
          case MsgType::Kind::kU:
            ok = SameLabel(m.l, t.l) && m.v.HasSort(t.S);
            break;
          case MsgType::Kind::kBR:
          case MsgType::Kind::kBW:
            ok = SameLabel(m.l, t.l);
            break;
          case MsgType::Kind::kExit: {
            auto id = TryEval(t.id);
            ok = id && *id == m.id && m.v.HasSort(t.S);
            break;
          }
          case MsgType::Kind::kDeleg:
            ok = m.role == t.role && (t.ch.empty() || t.ch == m.ch);
            break;
        }
      }
      if (!ok)
        Fail("message " + ToString(m) + " does not have type " + ToString(t),
             P, ToString(t), d);
      Derivation md;
      md.rule = "MQ-msg";
      md.conclusion = ToString(m) + " : " + ToString(t);
      out.premises.push_back(std::move(md));
    }
    return out;
  }

  const TypeOptions& opts_;
};

}  // namespace

Derivation Typecheck(const GlobalEnv& gamma, const LoopEnv& theta,
                     const Proc& P, const SessionEnv& delta,
                     const TypeOptions& opts) {
  return Typer(opts).Check(gamma, theta, P, delta);
}

// ---------------------------------------------------------------------------
// Evolution.

SessionEnv InitialEnv(const Global& G, const std::string& s) {
  SessionEnv d;
  std::set<Role> roles = Roles(G);
  for (Role p : roles) d.Set({s, p}, Project(G, p));
  for (Role p : roles) {
    for (Role q : roles) {
      if (p != q) d.SetQueue({s, p, q}, {});
    }
  }
  return d;
}

namespace {

struct TFrame {
  std::string s;
  Role r;
  RoleSet R;
};

bool Allowed(const QueueKey& k, const std::vector<TFrame>& frames) {
  for (const TFrame& f : frames) {
    if (f.s != k.session) return false;
    bool out = k.from == f.r && std::binary_search(f.R.begin(), f.R.end(), k.to);
    bool in = std::binary_search(f.R.begin(), f.R.end(), k.from) && k.to == f.r;
    if (!out && !in) return false;
  }
  return true;
}

using Emit = std::function<void(const Local&, const SessionEnv&)>;

class Evolver {
 public:
  explicit Evolver(const SessionEnv& d) : d_(d) {}

  std::vector<SessionEnv> Run() {
    for (const auto& [a, T] : d_.actors()) {
      Moves(a, T, {}, d_, [&](const Local& U, const SessionEnv& e) {
        SessionEnv n = e;
        n.Set(a, U);
        Add(std::move(n));
      });
      if (Nsr(T)) {  // crash erasure
        SessionEnv n = d_;
        n.Erase(a);
        Add(std::move(n));
      }
    }
    for (const auto& [k, m] : d_.queues()) {
      if (m.empty()) continue;
      // ML drops unreliable heads; EDrop drops exit heads.
      if (m.front().kind == MsgType::Kind::kU ||
          m.front().kind == MsgType::Kind::kExit) {
        SessionEnv n = d_;
        n.SetQueue(k, std::vector<MsgType>(m.begin() + 1, m.end()));
        Add(std::move(n));
      }
    }
    return std::move(out_);
  }

 private:
  void Add(SessionEnv e) {
    if (seen_.insert(e.Key()).second) out_.push_back(std::move(e));
  }

  static const std::vector<MsgType>* Q(const SessionEnv& e, const QueueKey& k,
                                       const std::vector<TFrame>& frames) {
    if (!Allowed(k, frames)) return nullptr;
    return e.FindQueue(k);
  }

  static SessionEnv Push(const SessionEnv& e, const QueueKey& k,
                         const MsgType& m) {
    SessionEnv n = e;
    std::vector<MsgType> q = *e.FindQueue(k);
    q.push_back(m);
    n.SetQueue(k, std::move(q));
    return n;
  }

  static SessionEnv Pop(const SessionEnv& e, const QueueKey& k) {
    SessionEnv n = e;
    const auto& q = *e.FindQueue(k);
    n.SetQueue(k, std::vector<MsgType>(q.begin() + 1, q.end()));
    return n;
  }

  void Moves(const Actor& a, const Local& T, const std::vector<TFrame>& frames,
             const SessionEnv& e, const Emit& emit) {
    const std::string& s = a.session;
    Role p = a.role;
    switch (T->kind) {
      case LKind::kSend:
      case LKind::kUSend: {
        QueueKey k{s, p, T->p};
        if (!Q(e, k, frames)) return;
        MsgType m;
        m.kind = T->kind == LKind::kSend ? MsgType::Kind::kR : MsgType::Kind::kU;
        m.S = T->S;
        m.l = T->l;
        emit(T->next, Push(e, k, m));
        return;
      }
      case LKind::kRecv:
      case LKind::kURecv: {
        bool unr = T->kind == LKind::kURecv;
        QueueKey k{s, T->p, p};
        const auto* q = Q(e, k, frames);
        if (q && !q->empty()) {
          const MsgType& h = q->front();
          if (!unr && h.kind == MsgType::Kind::kR) emit(T->next, Pop(e, k));
          if (unr && h.kind == MsgType::Kind::kU && SameLabel(h.l, T->l))
            emit(T->next, Pop(e, k));
        }
        if (unr) emit(T->next, e);  // USkip
        return;
      }
      case LKind::kSel: {
        QueueKey k{s, p, T->p};
        if (!Q(e, k, frames)) return;
        for (const auto& b : T->branches) {
          MsgType m;
          m.kind = MsgType::Kind::kBR;
          m.l = b.label;
          emit(b.cont, Push(e, k, m));
        }
        return;
      }
      case LKind::kWSel: {
        for (Role r : T->R) {
          if (!Q(e, {s, p, r}, frames)) return;
        }
        for (const auto& b : T->branches) {
          SessionEnv n = e;
          MsgType m;
          m.kind = MsgType::Kind::kBW;
          m.l = b.label;
          for (Role r : T->R) n = Push(n, {s, p, r}, m);
          emit(b.cont, n);
        }
        return;
      }
      case LKind::kBran:
      case LKind::kWBran: {
        bool weak = T->kind == LKind::kWBran;
        QueueKey k{s, T->p, p};
        const auto* q = Q(e, k, frames);
        if (q && !q->empty()) {
          const MsgType& h = q->front();
          auto want = weak ? MsgType::Kind::kBW : MsgType::Kind::kBR;
          if (h.kind == want) {
            for (const auto& b : T->branches) {
              if (SameLabel(b.label, h.l)) {
                emit(b.cont, Pop(e, k));
                break;
              }
            }
          }
        }
        if (weak) emit(T->branches.back().cont, e);  // WSkip
        return;
      }
      case LKind::kRec: {
        Local body = Subst(T->next, T->c, Nat(T->n));
        Local again = local::Rec(T->t, T->c, T->n + 1, T->next);
        emit(Simplify(SubstVar(body, T->t, again)), e);
        return;
      }
      case LKind::kLoop:
        LoopMoves(a, T, frames, e, emit);
        return;
      case LKind::kDSend: {
        QueueKey k{s, p, T->p};
        if (!Q(e, k, frames)) return;
        for (const auto& [b, U] : e.actors()) {
          if (b.session == s || b.role != T->dr || !AlphaEqual(U, T->dtype))
            continue;
          MsgType m;
          m.kind = MsgType::Kind::kDeleg;
          m.ch = b.session;
          m.role = b.role;
          SessionEnv n = Push(e, k, m);
          n.Erase(b);
          emit(T->next, n);
        }
        return;
      }
      case LKind::kDRecv: {
        QueueKey k{s, T->p, p};
        const auto* q = Q(e, k, frames);
        if (!q || q->empty() || q->front().kind != MsgType::Kind::kDeleg ||
            q->front().role != T->dr) {
          return;
        }
        SessionEnv n = Pop(e, k);
        if (!q->front().ch.empty()) n.Set({q->front().ch, T->dr}, T->dtype);
        emit(T->next, n);
        return;
      }
      case LKind::kCase: {
        Local U = Simplify(T);
        if (U != T) Moves(a, U, frames, e, emit);
        return;
      }
      default:
        return;
    }
  }

  void LoopMoves(const Actor& a, const Local& T,
                 const std::vector<TFrame>& frames, const SessionEnv& e,
                 const Emit& emit) {
    const std::string& s = a.session;
    Role p = a.role;
    // LCall.
    if (T->T1->kind == LKind::kCall && SameId(T->T1->e, T->e)) {
      Local body = Simplify(Subst(T->T0, T->c, Nat(T->n)));
      emit(local::Loop(T->R, T->e, T->c, T->n + 1, T->S, T->T0, body, T->S2,
                       T->T2),
           e);
    }
    // LExitS: the program may exit at any point.
    {
      bool ok = true;
      SessionEnv n = e;
      MsgType m;
      m.kind = MsgType::Kind::kExit;
      m.id = T->e;
      m.S = T->S2;
      for (Role r : T->R) {
        if (!Q(n, {s, p, r}, frames)) {
          ok = false;
          break;
        }
        n = Push(n, {s, p, r}, m);
      }
      if (ok) emit(T->T2, n);
    }
    // LExitG.
    for (Role r : T->R) {
      QueueKey k{s, r, p};
      const auto* q = Q(e, k, frames);
      if (q && !q->empty() && q->front().kind == MsgType::Kind::kExit &&
          SameId(q->front().id, T->e)) {
        emit(T->T2, Pop(e, k));
      }
    }
    // LStep.
    std::vector<TFrame> inner = frames;
    inner.push_back({s, p, T->R});
    Moves(a, T->T1, inner, e, [&](const Local& U, const SessionEnv& n) {
      emit(local::Loop(T->R, T->e, T->c, T->n, T->S, T->T0, U, T->S2, T->T2),
           n);
    });
  }

  const SessionEnv& d_;
  std::vector<SessionEnv> out_;
  std::unordered_set<std::string> seen_;
};

}  // namespace

std::vector<SessionEnv> Evolve(const SessionEnv& delta) {
  return Evolver(delta).Run();
}

const char* CoherenceName(Coherence c) {
  switch (c) {
    case Coherence::kCoherent:
      return "coherent";
    case Coherence::kIncoherent:
      return "incoherent";
    case Coherence::kBudgetExhausted:
      return "budget exhausted";
  }
  return "?";
}

Coherence Coherent(const GlobalEnv& gamma, const SessionEnv& delta,
                   int budget, size_t state_budget) {
  bool exhausted = false;
  for (const std::string& s : delta.Sessions()) {
    SessionEnv target = delta.Restrict(s);
    std::string want = target.Key();
    std::set<Role> roles;
    for (const auto& [a, T] : target.actors()) roles.insert(a.role);
    for (const auto& [k, m] : target.queues()) {
      roles.insert(k.from);
      roles.insert(k.to);
    }
    std::vector<Global> candidates;
    auto sit = gamma.sessions.find(s);
    if (sit != gamma.sessions.end()) {
      candidates.push_back(sit->second);
    } else {
      for (const auto& [a, G] : gamma.channels) {
        std::set<Role> rg = Roles(G);
        if (std::includes(rg.begin(), rg.end(), roles.begin(), roles.end()))
          candidates.push_back(G);
      }
    }
    bool found = false;
    for (const Global& G : candidates) {
      SessionEnv init;
      try {
        init = InitialEnv(G, s);
      } catch (const ProjectionError&) {
        continue;
      }
      std::unordered_set<std::string> seen{init.Key()};
      std::vector<SessionEnv> layer{init};
      if (init.Key() == want) {
        found = true;
        break;
      }
      for (int step = 0; step < budget && !layer.empty() && !found; ++step) {
        std::vector<SessionEnv> next;
        for (const SessionEnv& c : layer) {
          for (SessionEnv& n : Evolve(c)) {
            std::string k = n.Key();
            if (k == want) found = true;
            if (seen.size() >= state_budget) {
              exhausted = true;
              break;
            }
            if (seen.insert(k).second) next.push_back(std::move(n));
          }
          if (found) break;
        }
        layer = std::move(next);
      }
      if (found) break;
      if (!layer.empty()) exhausted = true;
    }
    if (!found) return exhausted ? Coherence::kBudgetExhausted
                                 : Coherence::kIncoherent;
  }
  return Coherence::kCoherent;
}

}  // namespace ftmpst
