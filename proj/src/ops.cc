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

#include "ftmpst/ops.hh"

#include <algorithm>
#include <functional>
#include <map>

namespace ftmpst {

namespace {

using Names = std::set<std::string>;
using NameMap = std::map<std::string, std::string>;

void AddAll(Names* out, const Names& in) { out->insert(in.begin(), in.end()); }

void AddExpr(Names* out, const Expr& e) {
  if (e) AddAll(out, FreeNames(e));
}

void AddLabel(Names* out, const Label& l) {
  for (const Expr& e : l.rt) AddExpr(out, e);
}

Names Minus(Names s, std::initializer_list<std::string> bound) {
  for (const auto& b : bound) s.erase(b);
  return s;
}

Label SubstLabel(const Label& l, const std::string& x, const Expr& v) {
  Label out = l;
  for (Expr& e : out.rt) e = Subst(e, x, v);
  return out;
}

Expr SubstOpt(const Expr& e, const std::string& x, const Expr& v) {
  return e ? Subst(e, x, v) : e;
}

template <typename Node>
std::shared_ptr<const Node> Share(Node n) {
  return std::make_shared<const Node>(std::move(n));
}

}  // namespace

std::string Fresh(const std::string& base, const std::set<std::string>& avoid) {
  std::string stem = base;
  while (!stem.empty() && stem.back() == '\'') stem.pop_back();
  for (int k = 1;; ++k) {
    std::string cand = stem + std::string(k, '\'');
    if (k > 3) cand = stem + "_" + std::to_string(k);
    if (!avoid.count(cand)) return cand;
  }
}

// ---------------------------------------------------------------------------
// Free names and variables.

std::set<std::string> FreeNames(const Proc& P) {
  Names out;
  switch (P->kind) {
    case PKind::kNil:
    case PKind::kCrash:
    case PKind::kVar:
      break;
    case PKind::kReq:
    case PKind::kAcc:
      out.insert(P->ch);
      AddAll(&out, Minus(FreeNames(P->next), {P->s}));
      break;
    case PKind::kSend:
    case PKind::kUSend:
    case PKind::kSel:
    case PKind::kWSel:
      out.insert(P->ch);
      AddExpr(&out, P->p);
      AddExpr(&out, P->q);
      AddLabel(&out, P->l);
      AddExpr(&out, P->e);
      AddAll(&out, FreeNames(P->next));
      break;
    case PKind::kRecv:
    case PKind::kURecv:
      out.insert(P->ch);
      AddExpr(&out, P->p);
      AddExpr(&out, P->q);
      AddLabel(&out, P->l);
      AddExpr(&out, P->e);
      AddAll(&out, Minus(FreeNames(P->next), {P->x}));
      break;
    case PKind::kBran:
    case PKind::kWBran:
      out.insert(P->ch);
      AddExpr(&out, P->p);
      AddExpr(&out, P->q);
      for (const auto& b : P->branches) {
        AddLabel(&out, b.label);
        AddAll(&out, FreeNames(b.cont));
      }
      break;
    case PKind::kPar:
      for (const Proc& k : P->kids) AddAll(&out, FreeNames(k));
      break;
    case PKind::kRec:
      AddAll(&out, Minus(FreeNames(P->next), {P->c}));
      break;
    case PKind::kLoop:
      out.insert(P->ch);
      AddExpr(&out, P->p);
      AddExpr(&out, P->e);
      AddAll(&out, Minus(FreeNames(P->P0), {P->c, P->x}));
      AddAll(&out, FreeNames(P->P1));
      AddAll(&out, Minus(FreeNames(P->P2), {P->y}));
      break;
    case PKind::kCall:
    case PKind::kExit:
      AddExpr(&out, P->e);
      AddExpr(&out, P->e2);
      break;
    case PKind::kIf:
      AddExpr(&out, P->e);
      AddAll(&out, FreeNames(P->P1));
      AddAll(&out, FreeNames(P->P2));
      break;
    case PKind::kRes:
      AddAll(&out, Minus(FreeNames(P->next), {P->x}));
      break;
    case PKind::kDSend:
      out.insert(P->ch);
      out.insert(P->dch);
      AddExpr(&out, P->p);
      AddExpr(&out, P->q);
      AddExpr(&out, P->dr);
      AddAll(&out, FreeNames(P->next));
      break;
    case PKind::kDRecv:
      out.insert(P->ch);
      AddExpr(&out, P->p);
      AddExpr(&out, P->q);
      AddAll(&out, Minus(FreeNames(P->next), {P->x, P->y}));
      break;
    case PKind::kQueue:
      out.insert(P->ch);
      for (const Message& m : P->queue) {
        if (m.kind == Message::Kind::kDeleg) out.insert(m.ch);
      }
      break;
  }
  return out;
}

std::set<std::string> FreeVars(const Proc& P) {
  Names out;
  switch (P->kind) {
    case PKind::kVar:
      out.insert(P->X);
      return out;
    case PKind::kRec:
      return Minus(FreeVars(P->next), {P->X});
    default:
      break;
  }
  for (const Proc* k : {&P->next, &P->P0, &P->P1, &P->P2}) {
    if (*k) AddAll(&out, FreeVars(*k));
  }
  for (const Proc& k : P->kids) AddAll(&out, FreeVars(k));
  for (const auto& b : P->branches) AddAll(&out, FreeVars(b.cont));
  return out;
}

std::set<std::string> FreeNames(const Local& T) {
  Names out;
  AddExpr(&out, T->e);
  AddLabel(&out, T->l);
  for (const auto& b : T->branches) {
    AddLabel(&out, b.label);
    AddAll(&out, FreeNames(b.cont));
  }
  switch (T->kind) {
    case LKind::kRec:
      AddAll(&out, Minus(FreeNames(T->next), {T->c}));
      return out;
    case LKind::kLoop:
      AddAll(&out, Minus(FreeNames(T->T0), {T->c}));
      AddAll(&out, FreeNames(T->T1));
      AddAll(&out, FreeNames(T->T2));
      return out;
    default:
      break;
  }
  if (T->next) AddAll(&out, FreeNames(T->next));
  if (T->dtype) AddAll(&out, FreeNames(T->dtype));
  return out;
}

std::set<std::string> FreeVars(const Local& T) {
  Names out;
  switch (T->kind) {
    case LKind::kVar:
      out.insert(T->t);
      return out;
    case LKind::kRec:
      return Minus(FreeVars(T->next), {T->t});
    default:
      break;
  }
  for (const Local* k : {&T->next, &T->T0, &T->T1, &T->T2}) {
    if (*k) AddAll(&out, FreeVars(*k));
  }
  for (const auto& b : T->branches) AddAll(&out, FreeVars(b.cont));
  return out;
}

std::set<std::string> FreeNames(const Global& G) {
  Names out;
  AddExpr(&out, G->e);
  AddLabel(&out, G->l);
  for (const auto& b : G->branches) {
    AddLabel(&out, b.label);
    AddAll(&out, FreeNames(b.cont));
  }
  switch (G->kind) {
    case GKind::kRec:
      AddAll(&out, Minus(FreeNames(G->next), {G->c}));
      return out;
    case GKind::kLoop:
      AddAll(&out, Minus(FreeNames(G->next), {G->c}));
      AddAll(&out, FreeNames(G->cont));
      return out;
    default:
      break;
  }
  if (G->next) AddAll(&out, FreeNames(G->next));
  if (G->cont) AddAll(&out, FreeNames(G->cont));
  return out;
}

std::set<std::string> FreeVars(const Global& G) {
  Names out;
  switch (G->kind) {
    case GKind::kVar:
      out.insert(G->t);
      return out;
    case GKind::kRec:
      return Minus(FreeVars(G->next), {G->t});
    default:
      break;
  }
  if (G->next) AddAll(&out, FreeVars(G->next));
  if (G->cont) AddAll(&out, FreeVars(G->cont));
  for (const auto& b : G->branches) AddAll(&out, FreeVars(b.cont));
  return out;
}

// ---------------------------------------------------------------------------
// Process substitution.

namespace {

std::string RenameChannel(const std::string& ch, const std::string& x,
                          const Expr& v) {
  if (ch == x && v->op == Op::kName) return v->name;
  return ch;
}

// Prepares binders bs over body for substituting x: returns false when x is
// shadowed; renames binders that would capture names in avoid.
template <typename Term>
bool OpenBinders(std::vector<std::string*> binders, Term* body,
                 const std::string& x, const Names& avoid,
                 std::vector<Term*> extra_bodies = {}) {
  for (std::string* b : binders) {
    if (*b == x) return false;
  }
  for (std::string* b : binders) {
    if (!avoid.count(*b)) continue;
    Names all = avoid;
    AddAll(&all, FreeNames(*body));
    for (Term* t : extra_bodies) AddAll(&all, FreeNames(*t));
    all.insert(x);
    for (std::string* other : binders) all.insert(*other);
    std::string fresh = Fresh(*b, all);
    *body = Subst(*body, *b, Name(fresh));
    for (Term* t : extra_bodies) *t = Subst(*t, *b, Name(fresh));
    *b = fresh;
  }
  return true;
}

}  // namespace

Proc Subst(const Proc& P, const std::string& x, const Expr& v) {
  if (!FreeNames(P).count(x)) return P;
  Names avoid = FreeNames(v);
  PNode n = *P;
  n.ch = RenameChannel(n.ch, x, v);
  n.dch = RenameChannel(n.dch, x, v);
  n.p = SubstOpt(n.p, x, v);
  n.q = SubstOpt(n.q, x, v);
  n.l = SubstLabel(n.l, x, v);
  n.dr = SubstOpt(n.dr, x, v);
  switch (P->kind) {
    case PKind::kReq:
    case PKind::kAcc:
      if (OpenBinders<Proc>({&n.s}, &n.next, x, avoid))
        n.next = Subst(n.next, x, v);
      break;
    case PKind::kRecv:
    case PKind::kURecv:
      n.e = SubstOpt(n.e, x, v);
      if (OpenBinders<Proc>({&n.x}, &n.next, x, avoid))
        n.next = Subst(n.next, x, v);
      break;
    case PKind::kRec:
      if (OpenBinders<Proc>({&n.c}, &n.next, x, avoid))
        n.next = Subst(n.next, x, v);
      break;
    case PKind::kLoop:
      n.e = SubstOpt(n.e, x, v);
      if (OpenBinders<Proc>({&n.c, &n.x}, &n.P0, x, avoid))
        n.P0 = Subst(n.P0, x, v);
      n.P1 = Subst(n.P1, x, v);
      if (OpenBinders<Proc>({&n.y}, &n.P2, x, avoid))
        n.P2 = Subst(n.P2, x, v);
      break;
    case PKind::kRes:
      if (OpenBinders<Proc>({&n.x}, &n.next, x, avoid))
        n.next = Subst(n.next, x, v);
      break;
    case PKind::kDRecv:
      if (OpenBinders<Proc>({&n.x, &n.y}, &n.next, x, avoid))
        n.next = Subst(n.next, x, v);
      break;
    case PKind::kQueue:
      for (Message& m : n.queue) {
        if (m.kind == Message::Kind::kDeleg) m.ch = RenameChannel(m.ch, x, v);
      }
      break;
    default:
      n.e = SubstOpt(n.e, x, v);
      n.e2 = SubstOpt(n.e2, x, v);
      if (n.next) n.next = Subst(n.next, x, v);
      if (n.P1) n.P1 = Subst(n.P1, x, v);
      if (n.P2) n.P2 = Subst(n.P2, x, v);
      for (Proc& k : n.kids) k = Subst(k, x, v);
      break;
  }
  for (auto& b : n.branches) {
    b.label = SubstLabel(b.label, x, v);
    b.cont = Subst(b.cont, x, v);
  }
  return Share(std::move(n));
}

Proc SubstVar(const Proc& P, const std::string& X, const Proc& Q) {
  if (!FreeVars(P).count(X)) return P;
  if (P->kind == PKind::kVar) return Q;
  Names avoid = FreeNames(Q);
  Names avoid_vars = FreeVars(Q);
  PNode n = *P;
  // Value binders in scope of X must not capture free names of Q.
  auto guard = [&](std::vector<std::string*> binders, Proc* body) {
    for (std::string* b : binders) {
      if (!avoid.count(*b)) continue;
      Names all = avoid;
      AddAll(&all, FreeNames(*body));
      for (std::string* other : binders) all.insert(*other);
      std::string fresh = Fresh(*b, all);
      *body = Subst(*body, *b, Name(fresh));
      *b = fresh;
    }
    *body = SubstVar(*body, X, Q);
  };
  switch (P->kind) {
    case PKind::kReq:
    case PKind::kAcc:
      guard({&n.s}, &n.next);
      break;
    case PKind::kRecv:
    case PKind::kURecv:
    case PKind::kRes:
      guard({&n.x}, &n.next);
      break;
    case PKind::kDRecv:
      guard({&n.x, &n.y}, &n.next);
      break;
    case PKind::kRec: {
      if (n.X == X) break;
      if (avoid_vars.count(n.X)) {
        Names all = avoid_vars;
        AddAll(&all, FreeVars(n.next));
        std::string fresh = Fresh(n.X, all);
        n.next = SubstVar(n.next, n.X, proc::Var(fresh));
        n.X = fresh;
      }
      guard({&n.c}, &n.next);
      break;
    }
    case PKind::kLoop:
      guard({&n.c, &n.x}, &n.P0);
      n.P1 = SubstVar(n.P1, X, Q);
      guard({&n.y}, &n.P2);
      break;
    default:
      if (n.next) n.next = SubstVar(n.next, X, Q);
      if (n.P1) n.P1 = SubstVar(n.P1, X, Q);
      if (n.P2) n.P2 = SubstVar(n.P2, X, Q);
      for (Proc& k : n.kids) k = SubstVar(k, X, Q);
      break;
  }
  for (auto& b : n.branches) b.cont = SubstVar(b.cont, X, Q);
  return Share(std::move(n));
}

// ---------------------------------------------------------------------------
// Type substitution.

Local Subst(const Local& T, const std::string& x, const Expr& v) {
  if (!FreeNames(T).count(x)) return T;
  Names avoid = FreeNames(v);
  LNode n = *T;
  n.e = SubstOpt(n.e, x, v);
  n.l = SubstLabel(n.l, x, v);
  for (auto& b : n.branches) {
    b.label = SubstLabel(b.label, x, v);
    b.cont = Subst(b.cont, x, v);
  }
  switch (T->kind) {
    case LKind::kRec:
      if (OpenBinders<Local>({&n.c}, &n.next, x, avoid))
        n.next = Subst(n.next, x, v);
      break;
    case LKind::kLoop:
      if (OpenBinders<Local>({&n.c}, &n.T0, x, avoid))
        n.T0 = Subst(n.T0, x, v);
      n.T1 = Subst(n.T1, x, v);
      n.T2 = Subst(n.T2, x, v);
      break;
    default:
      if (n.next) n.next = Subst(n.next, x, v);
      if (n.dtype) n.dtype = Subst(n.dtype, x, v);
      break;
  }
  return Share(std::move(n));
}

Local SubstVar(const Local& T, const std::string& t, const Local& U) {
  if (!FreeVars(T).count(t)) return T;
  if (T->kind == LKind::kVar) return U;
  Names avoid = FreeNames(U);
  Names avoid_vars = FreeVars(U);
  LNode n = *T;
  auto guard_counter = [&](Local* body) {
    if (avoid.count(n.c)) {
      Names all = avoid;
      AddAll(&all, FreeNames(*body));
      std::string fresh = Fresh(n.c, all);
      *body = Subst(*body, n.c, Name(fresh));
      n.c = fresh;
    }
    *body = SubstVar(*body, t, U);
  };
  for (auto& b : n.branches) b.cont = SubstVar(b.cont, t, U);
  switch (T->kind) {
    case LKind::kRec:
      if (n.t == t) break;
      if (avoid_vars.count(n.t)) {
        Names all = avoid_vars;
        AddAll(&all, FreeVars(n.next));
        std::string fresh = Fresh(n.t, all);
        n.next = SubstVar(n.next, n.t, local::Var(fresh));
        n.t = fresh;
      }
      guard_counter(&n.next);
      break;
    case LKind::kLoop:
      guard_counter(&n.T0);
      n.T1 = SubstVar(n.T1, t, U);
      n.T2 = SubstVar(n.T2, t, U);
      break;
    default:
      if (n.next) n.next = SubstVar(n.next, t, U);
      break;
  }
  return Share(std::move(n));
}

Global Subst(const Global& G, const std::string& x, const Expr& v) {
  if (!FreeNames(G).count(x)) return G;
  Names avoid = FreeNames(v);
  GNode n = *G;
  n.e = SubstOpt(n.e, x, v);
  n.l = SubstLabel(n.l, x, v);
  for (auto& b : n.branches) {
    b.label = SubstLabel(b.label, x, v);
    b.cont = Subst(b.cont, x, v);
  }
  switch (G->kind) {
    case GKind::kRec:
      if (OpenBinders<Global>({&n.c}, &n.next, x, avoid))
        n.next = Subst(n.next, x, v);
      break;
    case GKind::kLoop:
      if (OpenBinders<Global>({&n.c}, &n.next, x, avoid))
        n.next = Subst(n.next, x, v);
      n.cont = Subst(n.cont, x, v);
      break;
    default:
      if (n.next) n.next = Subst(n.next, x, v);
      if (n.cont) n.cont = Subst(n.cont, x, v);
      break;
  }
  return Share(std::move(n));
}

Global SubstVar(const Global& G, const std::string& t, const Global& U) {
  if (!FreeVars(G).count(t)) return G;
  if (G->kind == GKind::kVar) return U;
  Names avoid = FreeNames(U);
  Names avoid_vars = FreeVars(U);
  GNode n = *G;
  auto guard_counter = [&](Global* body) {
    if (avoid.count(n.c)) {
      Names all = avoid;
      AddAll(&all, FreeNames(*body));
      std::string fresh = Fresh(n.c, all);
      *body = Subst(*body, n.c, Name(fresh));
      n.c = fresh;
    }
    *body = SubstVar(*body, t, U);
  };
  for (auto& b : n.branches) b.cont = SubstVar(b.cont, t, U);
  switch (G->kind) {
    case GKind::kRec:
      if (n.t == t) break;
      if (avoid_vars.count(n.t)) {
        Names all = avoid_vars;
        AddAll(&all, FreeVars(n.next));
        std::string fresh = Fresh(n.t, all);
        n.next = SubstVar(n.next, n.t, global::Var(fresh));
        n.t = fresh;
      }
      guard_counter(&n.next);
      break;
    case GKind::kLoop:
      guard_counter(&n.next);
      n.cont = SubstVar(n.cont, t, U);
      break;
    default:
      if (n.next) n.next = SubstVar(n.next, t, U);
      if (n.cont) n.cont = SubstVar(n.cont, t, U);
      break;
  }
  return Share(std::move(n));
}

// ---------------------------------------------------------------------------
// Roles, actors and reliability predicates.

std::set<Role> Roles(const Global& G) {
  std::set<Role> out;
  std::function<void(const Global&)> walk = [&](const Global& g) {
    switch (g->kind) {
      case GKind::kComm:
      case GKind::kUComm:
      case GKind::kBranch:
      case GKind::kDeleg:
        out.insert(g->p);
        out.insert(g->q);
        break;
      case GKind::kWBranch:
        out.insert(g->p);
        out.insert(g->R.begin(), g->R.end());
        break;
      case GKind::kLoop:
        out.insert(g->R.begin(), g->R.end());
        break;
      default:
        break;
    }
    if (g->next) walk(g->next);
    if (g->cont) walk(g->cont);
    for (const auto& b : g->branches) walk(b.cont);
  };
  walk(G);
  return out;
}

std::set<Role> Roles(const Local& T) {
  std::set<Role> out;
  std::function<void(const Local&)> walk = [&](const Local& t) {
    switch (t->kind) {
      case LKind::kSend:
      case LKind::kRecv:
      case LKind::kUSend:
      case LKind::kURecv:
      case LKind::kSel:
      case LKind::kBran:
      case LKind::kWBran:
      case LKind::kDSend:
      case LKind::kDRecv:
        out.insert(t->p);
        break;
      case LKind::kWSel:
      case LKind::kLoop:
        out.insert(t->R.begin(), t->R.end());
        break;
      default:
        break;
    }
    for (const Local* k : {&t->next, &t->T0, &t->T1, &t->T2}) {
      if (*k) walk(*k);
    }
    for (const auto& b : t->branches) walk(b.cont);
  };
  walk(T);
  return out;
}

std::set<Actor> Actors(const Proc& P) {
  std::set<Actor> out;
  std::function<void(const Proc&, const Names&)> walk = [&](const Proc& x,
                                                           Names bound) {
    switch (x->kind) {
      case PKind::kSend:
      case PKind::kRecv:
      case PKind::kUSend:
      case PKind::kURecv:
      case PKind::kSel:
      case PKind::kBran:
      case PKind::kWSel:
      case PKind::kWBran:
      case PKind::kDSend:
      case PKind::kDRecv:
      case PKind::kLoop:
        if (!bound.count(x->ch)) {
          if (auto r = EvalRole(x->p)) out.insert({x->ch, *r});
        }
        break;
      case PKind::kReq:
      case PKind::kAcc:
        bound.insert(x->s);
        break;
      case PKind::kRes:
        bound.insert(x->x);
        break;
      default:
        break;
    }
    if (x->kind == PKind::kDRecv) {
      Names inner = bound;
      inner.insert(x->x);
      walk(x->next, inner);
      return;
    }
    for (const Proc* k : {&x->next, &x->P0, &x->P1, &x->P2}) {
      if (*k) walk(*k, bound);
    }
    for (const Proc& k : x->kids) walk(k, bound);
    for (const auto& b : x->branches) walk(b.cont, bound);
  };
  walk(P, {});
  return out;
}

namespace {

bool AnyProc(const Proc& P, const std::function<bool(const Proc&)>& pred) {
  if (pred(P)) return true;
  for (const Proc* k : {&P->next, &P->P0, &P->P1, &P->P2}) {
    if (*k && AnyProc(*k, pred)) return true;
  }
  for (const Proc& k : P->kids) {
    if (AnyProc(k, pred)) return true;
  }
  for (const auto& b : P->branches) {
    if (AnyProc(b.cont, pred)) return true;
  }
  return false;
}

bool AnyLocal(const Local& T, const std::function<bool(const Local&)>& pred) {
  if (pred(T)) return true;
  for (const Local* k : {&T->next, &T->T0, &T->T1, &T->T2}) {
    if (*k && AnyLocal(*k, pred)) return true;
  }
  for (const auto& b : T->branches) {
    if (AnyLocal(b.cont, pred)) return true;
  }
  return false;
}

bool IsStronglyReliable(PKind k) {
  return k == PKind::kSend || k == PKind::kRecv || k == PKind::kSel ||
         k == PKind::kBran || k == PKind::kDSend || k == PKind::kDRecv ||
         k == PKind::kQueue;
}

bool IsStronglyReliable(LKind k) {
  return k == LKind::kSend || k == LKind::kRecv || k == LKind::kSel ||
         k == LKind::kBran || k == LKind::kDSend || k == LKind::kDRecv;
}

}  // namespace

bool Nsr(const Proc& P) {
  return !AnyProc(P, [](const Proc& x) { return IsStronglyReliable(x->kind); });
}

bool Unr(const Proc& P) {
  return !AnyProc(P, [](const Proc& x) {
    return IsStronglyReliable(x->kind) || x->kind == PKind::kWSel ||
           x->kind == PKind::kWBran;
  });
}

bool Nsr(const Local& T) {
  return !AnyLocal(T,
                   [](const Local& x) { return IsStronglyReliable(x->kind); });
}

bool Unr(const Local& T) {
  return !AnyLocal(T, [](const Local& x) {
    return IsStronglyReliable(x->kind) || x->kind == LKind::kWSel ||
           x->kind == LKind::kWBran;
  });
}

bool IsPrefixFree(const Proc& P) {
  switch (P->kind) {
    case PKind::kNil:
    case PKind::kCrash:
      return true;
    case PKind::kPar:
      return std::all_of(P->kids.begin(), P->kids.end(), IsPrefixFree);
    case PKind::kRes:
      return IsPrefixFree(P->next);
    case PKind::kRec:
      return P->next->kind == PKind::kNil;
    case PKind::kQueue:
      return true;
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// Alpha-canonical keys.

namespace {

Expr RenameExpr(const Expr& e, const NameMap& m) {
  if (!e) return e;
  if (e->op == Op::kName) {
    auto it = m.find(e->name);
    return it == m.end() ? e : Name(it->second);
  }
  if (e->args.empty()) return e;
  ExprNode n = *e;
  for (Expr& a : n.args) a = RenameExpr(a, m);
  return std::make_shared<const ExprNode>(std::move(n));
}

Label RenameLabel(const Label& l, const NameMap& m) {
  Label out = l;
  for (Expr& e : out.rt) e = RenameExpr(e, m);
  return out;
}

std::string RenameName(const std::string& s, const NameMap& m) {
  auto it = m.find(s);
  return it == m.end() ? s : it->second;
}

struct Canonicalizer {
  int counter = 0;

  std::string Bind(NameMap* m, const std::string& b, const char* tag) {
    std::string c = std::string(tag) + std::to_string(counter++);
    (*m)[b] = c;
    return c;
  }

  Proc Run(const Proc& P, NameMap m, NameMap vars) {
    PNode n = *P;
    n.ch = RenameName(n.ch, m);
    n.dch = RenameName(n.dch, m);
    n.p = RenameExpr(n.p, m);
    n.q = RenameExpr(n.q, m);
    n.l = RenameLabel(n.l, m);
    n.dr = RenameExpr(n.dr, m);
    n.e = RenameExpr(n.e, m);
    n.e2 = RenameExpr(n.e2, m);
    for (auto& b : n.branches) {
      b.label = RenameLabel(b.label, m);
      b.cont = Run(b.cont, m, vars);
    }
    switch (P->kind) {
      case PKind::kVar:
        n.X = RenameName(n.X, vars);
        break;
      case PKind::kReq:
      case PKind::kAcc: {
        NameMap inner = m;
        n.s = Bind(&inner, P->s, "#");
        n.next = Run(P->next, inner, vars);
        break;
      }
      case PKind::kRecv:
      case PKind::kURecv:
      case PKind::kRes: {
        NameMap inner = m;
        n.x = Bind(&inner, P->x, "#");
        n.next = Run(P->next, inner, vars);
        break;
      }
      case PKind::kDRecv: {
        NameMap inner = m;
        n.x = Bind(&inner, P->x, "#");
        n.y = Bind(&inner, P->y, "#");
        n.next = Run(P->next, inner, vars);
        break;
      }
      case PKind::kRec: {
        NameMap inner = m;
        NameMap inner_vars = vars;
        n.X = Bind(&inner_vars, P->X, "X#");
        n.c = Bind(&inner, P->c, "#");
        n.next = Run(P->next, inner, inner_vars);
        break;
      }
      case PKind::kLoop: {
        NameMap body = m;
        n.c = Bind(&body, P->c, "#");
        n.x = Bind(&body, P->x, "#");
        n.P0 = Run(P->P0, body, vars);
        n.P1 = Run(P->P1, m, vars);
        NameMap cont = m;
        n.y = Bind(&cont, P->y, "#");
        n.P2 = Run(P->P2, cont, vars);
        break;
      }
      case PKind::kQueue:
        for (Message& msg : n.queue) {
          if (msg.kind == Message::Kind::kDeleg) msg.ch = RenameName(msg.ch, m);
        }
        break;
      default:
        if (n.next) n.next = Run(P->next, m, vars);
        if (n.P1) n.P1 = Run(P->P1, m, vars);
        if (n.P2) n.P2 = Run(P->P2, m, vars);
        for (Proc& k : n.kids) k = Run(k, m, vars);
        break;
    }
    return std::make_shared<const PNode>(std::move(n));
  }

  Local Run(const Local& T, NameMap m, NameMap vars) {
    LNode n = *T;
    n.e = RenameExpr(n.e, m);
    n.l = RenameLabel(n.l, m);
    for (auto& b : n.branches) {
      b.label = RenameLabel(b.label, m);
      b.cont = Run(b.cont, m, vars);
    }
    switch (T->kind) {
      case LKind::kVar:
        n.t = RenameName(n.t, vars);
        break;
      case LKind::kRec: {
        NameMap inner = m;
        NameMap inner_vars = vars;
        n.t = Bind(&inner_vars, T->t, "t#");
        n.c = Bind(&inner, T->c, "#");
        n.next = Run(T->next, inner, inner_vars);
        break;
      }
      case LKind::kLoop: {
        NameMap body = m;
        n.c = Bind(&body, T->c, "#");
        n.T0 = Run(T->T0, body, vars);
        n.T1 = Run(T->T1, m, vars);
        n.T2 = Run(T->T2, m, vars);
        break;
      }
      default:
        if (n.next) n.next = Run(T->next, m, vars);
        if (n.dtype) n.dtype = Run(T->dtype, {}, {});
        break;
    }
    return std::make_shared<const LNode>(std::move(n));
  }
};

// Components of a flattened parallel composition with extruded restrictions.
struct Flat {
  std::vector<std::pair<std::string, std::optional<Sort>>> restricted;
  std::vector<Proc> comps;
};

void Flatten(const Proc& P, Flat* out, Names* taken) {
  switch (P->kind) {
    case PKind::kNil:
      return;
    case PKind::kPar:
      for (const Proc& k : P->kids) Flatten(k, out, taken);
      return;
    case PKind::kRes: {
      // Extrude with a name unused elsewhere, so no side condition is needed.
      std::string x = P->x;
      Proc body = P->next;
      if (taken->count(x)) {
        Names avoid = *taken;
        AddAll(&avoid, FreeNames(body));
        std::string fresh = Fresh(x, avoid);
        body = Subst(body, x, Name(fresh));
        x = fresh;
      }
      taken->insert(x);
      out->restricted.push_back({x, P->sort});
      Flatten(body, out, taken);
      return;
    }
    case PKind::kRec:
      if (P->next->kind == PKind::kNil) return;
      break;
    default:
      break;
  }
  out->comps.push_back(P);
}

// Sort key independent of the spelling of restricted names.
std::string ComponentKey(const Proc& P, const Names& restricted) {
  NameMap m;
  for (const auto& r : restricted) m[r] = "#r";
  Canonicalizer c;
  return ToString(c.Run(P, m, {}));
}

Proc NormalizeChildren(const Proc& P) {
  PNode n = *P;
  if (n.next) n.next = Normalize(n.next);
  if (n.P0) n.P0 = Normalize(n.P0);
  if (n.P1) n.P1 = Normalize(n.P1);
  if (n.P2) n.P2 = Normalize(n.P2);
  for (auto& b : n.branches) b.cont = Normalize(b.cont);
  return std::make_shared<const PNode>(std::move(n));
}

}  // namespace

Proc Normalize(const Proc& P) {
  Flat flat;
  Names taken = FreeNames(P);
  Flatten(P, &flat, &taken);
  std::vector<Proc> comps;
  for (const Proc& c : flat.comps) {
    Proc nc = NormalizeChildren(c);
    // A normalized child may itself have become 0 or a parallel term.
    if (nc->kind == PKind::kRec && nc->next->kind == PKind::kNil) continue;
    comps.push_back(nc);
  }
  // Children never produce top-level restrictions or pars: those only come
  // from Flatten, which already descended through them.
  Names restricted_names;
  for (const auto& r : flat.restricted) restricted_names.insert(r.first);
  std::vector<std::pair<std::string, Proc>> keyed;
  for (const Proc& c : comps) {
    keyed.push_back({ComponentKey(c, restricted_names), c});
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  comps.clear();
  for (auto& k : keyed) comps.push_back(k.second);

  // Keep only restrictions that are used; order them by first use.
  Names used;
  std::vector<std::pair<std::string, std::optional<Sort>>> restricted;
  std::vector<std::string> order;
  for (const Proc& c : comps) {
    Names fn = FreeNames(c);
    for (const auto& r : flat.restricted) {
      if (fn.count(r.first) && !used.count(r.first)) {
        used.insert(r.first);
        order.push_back(r.first);
      }
    }
  }
  for (const std::string& name : order) {
    for (const auto& r : flat.restricted) {
      if (r.first == name) restricted.push_back(r);
    }
  }

  Proc body;
  if (comps.empty()) return proc::Nil();
  body = comps.size() == 1 ? comps.front() : proc::Par(comps);
  for (auto it = restricted.rbegin(); it != restricted.rend(); ++it) {
    body = proc::Res(it->first, it->second, body);
  }
  return body;
}

std::string AlphaKey(const Proc& P) {
  Canonicalizer c;
  return ToString(c.Run(P, {}, {}));
}

std::string AlphaKey(const Local& T) {
  Canonicalizer c;
  return ToString(c.Run(T, {}, {}));
}

bool Congruent(const Proc& P, const Proc& Q) {
  return AlphaKey(Normalize(P)) == AlphaKey(Normalize(Q));
}

bool AlphaEqual(const Local& a, const Local& b) {
  return AlphaKey(a) == AlphaKey(b);
}

uint64_t Fnv1a(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ftmpst
