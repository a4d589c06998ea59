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

#include "ftmpst/syntax.hh"

#include <algorithm>

namespace ftmpst {

RoleSet MakeRoleSet(std::vector<Role> roles) {
  std::sort(roles.begin(), roles.end());
  roles.erase(std::unique(roles.begin(), roles.end()), roles.end());
  return roles;
}

bool LabelsCompatible(const Label& a, const Label& b) { return a.sym == b.sym; }

bool LabelEqual(const Label& a, const Label& b) {
  if (a.sym != b.sym || a.rt.size() != b.rt.size()) return false;
  for (size_t i = 0; i < a.rt.size(); ++i) {
    if (!Equal(a.rt[i], b.rt[i])) return false;
  }
  return true;
}

std::string ToString(const Label& l) {
  if (l.rt.empty()) return l.sym;
  std::string out = "(" + l.sym;
  for (const Expr& e : l.rt) out += ", " + ToString(e);
  return out + ")";
}

namespace {

template <typename Node>
std::shared_ptr<const Node> Share(Node n) {
  return std::make_shared<const Node>(std::move(n));
}

// Angle-bracketed payloads stop at a bare '>' when parsed back.
std::string Angle(const Expr& e) {
  bool has_gt = false;
  std::function<void(const Expr&)> scan = [&](const Expr& x) {
    if (x->op == Op::kGt || x->op == Op::kGe) has_gt = true;
    for (const Expr& a : x->args) scan(a);
  };
  scan(e);
  std::string s = ToString(e);
  return has_gt ? "(" + s + ")" : s;
}

std::string RolesText(const RoleSet& r) {
  std::string out = "{";
  for (size_t i = 0; i < r.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(r[i]);
  }
  return out + "}";
}

bool RolesEqual(const RoleSet& a, const RoleSet& b) { return a == b; }

bool OptExprEqual(const Expr& a, const Expr& b) {
  if (!a || !b) return !a && !b;
  return Equal(a, b);
}

}  // namespace

// ---------------------------------------------------------------------------
// Global constructors.

namespace global {

Global End() { return Share(GNode{}); }

Global Var(std::string t) {
  GNode n;
  n.kind = GKind::kVar;
  n.t = std::move(t);
  return Share(std::move(n));
}

Global Rec(std::string t, std::string c, Global body) {
  GNode n;
  n.kind = GKind::kRec;
  n.t = std::move(t);
  n.c = std::move(c);
  n.next = std::move(body);
  return Share(std::move(n));
}

Global Comm(Role p, Role q, Sort s, Global next) {
  GNode n;
  n.kind = GKind::kComm;
  n.p = p;
  n.q = q;
  n.S = std::move(s);
  n.next = std::move(next);
  return Share(std::move(n));
}

Global UComm(Role p, Role q, Label l, Sort s, Global next) {
  GNode n;
  n.kind = GKind::kUComm;
  n.p = p;
  n.q = q;
  n.l = std::move(l);
  n.S = std::move(s);
  n.next = std::move(next);
  return Share(std::move(n));
}

Global Branch(Role p, Role q, std::vector<GBranch> branches) {
  GNode n;
  n.kind = GKind::kBranch;
  n.p = p;
  n.q = q;
  n.branches = std::move(branches);
  return Share(std::move(n));
}

Global WBranch(Role p, RoleSet r, std::vector<GBranch> branches) {
  GNode n;
  n.kind = GKind::kWBranch;
  n.p = p;
  n.R = MakeRoleSet(std::move(r));
  n.branches = std::move(branches);
  return Share(std::move(n));
}

Global Par(Global a, Global b) {
  GNode n;
  n.kind = GKind::kPar;
  n.next = std::move(a);
  n.cont = std::move(b);
  return Share(std::move(n));
}

Global Loop(RoleSet r, Expr id, std::string c, Sort s0, Global g0, Sort s2,
            Global g2) {
  GNode n;
  n.kind = GKind::kLoop;
  n.R = MakeRoleSet(std::move(r));
  n.e = std::move(id);
  n.c = std::move(c);
  n.S = std::move(s0);
  n.next = std::move(g0);
  n.S2 = std::move(s2);
  n.cont = std::move(g2);
  return Share(std::move(n));
}

Global Call(Expr id) {
  GNode n;
  n.kind = GKind::kCall;
  n.e = std::move(id);
  return Share(std::move(n));
}

Global Deleg(Role p, Role q, Role dr, Local dtype, Global next) {
  GNode n;
  n.kind = GKind::kDeleg;
  n.p = p;
  n.q = q;
  n.dr = dr;
  n.dtype = std::move(dtype);
  n.next = std::move(next);
  return Share(std::move(n));
}

Global Case(Expr scrutinee, std::vector<int64_t> keys,
            std::vector<Global> branches) {
  GNode n;
  n.kind = GKind::kCase;
  n.e = std::move(scrutinee);
  n.keys = std::move(keys);
  for (auto& b : branches) n.branches.push_back({Label{}, std::move(b)});
  return Share(std::move(n));
}

}  // namespace global

// ---------------------------------------------------------------------------
// Local constructors.

namespace local {

Local End() { return Share(LNode{}); }

Local Var(std::string t) {
  LNode n;
  n.kind = LKind::kVar;
  n.t = std::move(t);
  return Share(std::move(n));
}

Local Rec(std::string t, std::string c, int64_t count, Local body) {
  LNode n;
  n.kind = LKind::kRec;
  n.t = std::move(t);
  n.c = std::move(c);
  n.n = count;
  n.next = std::move(body);
  return Share(std::move(n));
}

namespace {
Local Prefix(LKind kind, Role peer, Label l, Sort s, Local next) {
  LNode n;
  n.kind = kind;
  n.p = peer;
  n.l = std::move(l);
  n.S = std::move(s);
  n.next = std::move(next);
  return Share(std::move(n));
}
}  // namespace

Local Send(Role q, Sort s, Local next) {
  return Prefix(LKind::kSend, q, {}, std::move(s), std::move(next));
}
Local Recv(Role p, Sort s, Local next) {
  return Prefix(LKind::kRecv, p, {}, std::move(s), std::move(next));
}
Local USend(Role q, Label l, Sort s, Local next) {
  return Prefix(LKind::kUSend, q, std::move(l), std::move(s), std::move(next));
}
Local URecv(Role p, Label l, Sort s, Local next) {
  return Prefix(LKind::kURecv, p, std::move(l), std::move(s), std::move(next));
}

Local Sel(Role q, std::vector<LBranch> branches) {
  LNode n;
  n.kind = LKind::kSel;
  n.p = q;
  n.branches = std::move(branches);
  return Share(std::move(n));
}

Local Bran(Role p, std::vector<LBranch> branches) {
  LNode n;
  n.kind = LKind::kBran;
  n.p = p;
  n.branches = std::move(branches);
  return Share(std::move(n));
}

Local WSel(RoleSet r, std::vector<LBranch> branches) {
  LNode n;
  n.kind = LKind::kWSel;
  n.R = MakeRoleSet(std::move(r));
  n.branches = std::move(branches);
  return Share(std::move(n));
}

Local WBran(Role p, std::vector<LBranch> branches) {
  LNode n;
  n.kind = LKind::kWBran;
  n.p = p;
  n.branches = std::move(branches);
  return Share(std::move(n));
}

Local Loop(RoleSet r, Expr id, std::string c, int64_t count, Sort s0,
           Local t0, Local t1, Sort s2, Local t2) {
  LNode n;
  n.kind = LKind::kLoop;
  n.R = MakeRoleSet(std::move(r));
  n.e = std::move(id);
  n.c = std::move(c);
  n.n = count;
  n.S = std::move(s0);
  n.T0 = std::move(t0);
  n.T1 = std::move(t1);
  n.S2 = std::move(s2);
  n.T2 = std::move(t2);
  return Share(std::move(n));
}

Local Call(Expr id) {
  LNode n;
  n.kind = LKind::kCall;
  n.e = std::move(id);
  return Share(std::move(n));
}

Local DSend(Role q, Role dr, Local dtype, Local next) {
  LNode n;
  n.kind = LKind::kDSend;
  n.p = q;
  n.dr = dr;
  n.dtype = std::move(dtype);
  n.next = std::move(next);
  return Share(std::move(n));
}

Local DRecv(Role p, Role dr, Local dtype, Local next) {
  LNode n;
  n.kind = LKind::kDRecv;
  n.p = p;
  n.dr = dr;
  n.dtype = std::move(dtype);
  n.next = std::move(next);
  return Share(std::move(n));
}

Local Case(Expr scrutinee, std::vector<int64_t> keys,
           std::vector<Local> branches) {
  LNode n;
  n.kind = LKind::kCase;
  n.e = std::move(scrutinee);
  n.keys = std::move(keys);
  for (auto& b : branches) n.branches.push_back({Label{}, std::move(b)});
  return Share(std::move(n));
}

}  // namespace local

// ---------------------------------------------------------------------------
// Messages.

Message Message::R(Value v) {
  Message m;
  m.kind = Kind::kR;
  m.v = std::move(v);
  return m;
}

Message Message::U(Label l, Value v) {
  Message m;
  m.kind = Kind::kU;
  m.l = std::move(l);
  m.v = std::move(v);
  return m;
}

Message Message::BR(Label l) {
  Message m;
  m.kind = Kind::kBR;
  m.l = std::move(l);
  return m;
}

Message Message::BW(Label l) {
  Message m;
  m.kind = Kind::kBW;
  m.l = std::move(l);
  return m;
}

Message Message::Exit(Value id, Value v) {
  Message m;
  m.kind = Kind::kExit;
  m.id = std::move(id);
  m.v = std::move(v);
  return m;
}

Message Message::Deleg(std::string ch, Role role) {
  Message m;
  m.kind = Kind::kDeleg;
  m.ch = std::move(ch);
  m.role = role;
  return m;
}

bool MessageEqual(const Message& a, const Message& b) {
  return a.kind == b.kind && a.v == b.v && LabelEqual(a.l, b.l) &&
         a.id == b.id && a.ch == b.ch && a.role == b.role;
}

std::string ToString(const Message& m) {
  switch (m.kind) {
    case Message::Kind::kR:
      return "r<" + m.v.ToString() + ">";
    case Message::Kind::kU:
      return "u:" + ToString(m.l) + "<" + m.v.ToString() + ">";
    case Message::Kind::kBR:
      return "rbr:" + ToString(m.l);
    case Message::Kind::kBW:
      return "wbr:" + ToString(m.l);
    case Message::Kind::kExit:
      return "exit<" + m.id.ToString() + ", " + m.v.ToString() + ">";
    case Message::Kind::kDeleg:
      return "deleg<" + m.ch + "[" + std::to_string(m.role) + "]>";
  }
  return "?";
}

bool MsgTypeEqual(const MsgType& a, const MsgType& b) {
  return a.kind == b.kind && a.S == b.S && LabelEqual(a.l, b.l) &&
         OptExprEqual(a.id, b.id) && a.ch == b.ch && a.role == b.role;
}

std::string ToString(const MsgType& m) {
  switch (m.kind) {
    case MsgType::Kind::kR:
      return "r(" + m.S.ToString() + ")";
    case MsgType::Kind::kU:
      return "u:" + ToString(m.l) + "(" + m.S.ToString() + ")";
    case MsgType::Kind::kBR:
      return "rbr:" + ToString(m.l);
    case MsgType::Kind::kBW:
      return "wbr:" + ToString(m.l);
    case MsgType::Kind::kExit:
      return "exit(" + ToString(m.id) + ", " + m.S.ToString() + ")";
    case MsgType::Kind::kDeleg:
      return "deleg(" + m.ch + "[" + std::to_string(m.role) + "])";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Process constructors.

namespace proc {

Proc Nil() { return Share(PNode{}); }

Proc Crash() {
  PNode n;
  n.kind = PKind::kCrash;
  return Share(std::move(n));
}

Proc Var(std::string X) {
  PNode n;
  n.kind = PKind::kVar;
  n.X = std::move(X);
  return Share(std::move(n));
}

Proc Req(std::string a, int64_t count, std::string s, Proc next) {
  PNode n;
  n.kind = PKind::kReq;
  n.ch = std::move(a);
  n.count = count;
  n.s = std::move(s);
  n.next = std::move(next);
  return Share(std::move(n));
}

Proc Acc(std::string a, int64_t p, std::string s, Proc next) {
  PNode n;
  n.kind = PKind::kAcc;
  n.ch = std::move(a);
  n.count = p;
  n.s = std::move(s);
  n.next = std::move(next);
  return Share(std::move(n));
}

namespace {
PNode Prefix(PKind kind, std::string s, Expr p, Expr q, Proc next) {
  PNode n;
  n.kind = kind;
  n.ch = std::move(s);
  n.p = std::move(p);
  n.q = std::move(q);
  n.next = std::move(next);
  return n;
}
}  // namespace

Proc Send(std::string s, Expr p, Expr q, Expr e, Proc next) {
  PNode n = Prefix(PKind::kSend, std::move(s), std::move(p), std::move(q),
                   std::move(next));
  n.e = std::move(e);
  return Share(std::move(n));
}

Proc Recv(std::string s, Expr p, Expr q, std::string x, Proc next) {
  PNode n = Prefix(PKind::kRecv, std::move(s), std::move(p), std::move(q),
                   std::move(next));
  n.x = std::move(x);
  return Share(std::move(n));
}

Proc USend(std::string s, Expr p, Expr q, Label l, Expr e, Proc next) {
  PNode n = Prefix(PKind::kUSend, std::move(s), std::move(p), std::move(q),
                   std::move(next));
  n.l = std::move(l);
  n.e = std::move(e);
  return Share(std::move(n));
}

Proc URecv(std::string s, Expr p, Expr q, Label l, Expr dv, std::string x,
           Proc next) {
  PNode n = Prefix(PKind::kURecv, std::move(s), std::move(p), std::move(q),
                   std::move(next));
  n.l = std::move(l);
  n.e = std::move(dv);
  n.x = std::move(x);
  return Share(std::move(n));
}

Proc Sel(std::string s, Expr p, Expr q, Label l, Proc next) {
  PNode n = Prefix(PKind::kSel, std::move(s), std::move(p), std::move(q),
                   std::move(next));
  n.l = std::move(l);
  return Share(std::move(n));
}

Proc Bran(std::string s, Expr p, Expr q, std::vector<PBranch> branches) {
  PNode n = Prefix(PKind::kBran, std::move(s), std::move(p), std::move(q),
                   nullptr);
  n.branches = std::move(branches);
  return Share(std::move(n));
}

Proc WSel(std::string s, Expr p, RoleSet r, Label l, Proc next) {
  PNode n = Prefix(PKind::kWSel, std::move(s), std::move(p), nullptr,
                   std::move(next));
  n.R = MakeRoleSet(std::move(r));
  n.l = std::move(l);
  return Share(std::move(n));
}

Proc WBran(std::string s, Expr p, Expr q, std::vector<PBranch> branches) {
  PNode n = Prefix(PKind::kWBran, std::move(s), std::move(p), std::move(q),
                   nullptr);
  n.branches = std::move(branches);
  return Share(std::move(n));
}

Proc Par(std::vector<Proc> kids) {
  PNode n;
  n.kind = PKind::kPar;
  n.kids = std::move(kids);
  return Share(std::move(n));
}

Proc Rec(std::string X, std::string c, int64_t count, Proc body) {
  PNode n;
  n.kind = PKind::kRec;
  n.X = std::move(X);
  n.c = std::move(c);
  n.count = count;
  n.next = std::move(body);
  return Share(std::move(n));
}

Proc Loop(std::string s, Expr p, RoleSet r, Expr id, std::string c,
          int64_t count, std::string x, Proc p0, Proc p1, std::string y,
          Proc p2) {
  PNode n;
  n.kind = PKind::kLoop;
  n.ch = std::move(s);
  n.p = std::move(p);
  n.R = MakeRoleSet(std::move(r));
  n.e = std::move(id);
  n.c = std::move(c);
  n.count = count;
  n.x = std::move(x);
  n.P0 = std::move(p0);
  n.P1 = std::move(p1);
  n.y = std::move(y);
  n.P2 = std::move(p2);
  return Share(std::move(n));
}

Proc Call(Expr id, Expr v) {
  PNode n;
  n.kind = PKind::kCall;
  n.e = std::move(id);
  n.e2 = std::move(v);
  return Share(std::move(n));
}

Proc Exit(Expr id, Expr v) {
  PNode n;
  n.kind = PKind::kExit;
  n.e = std::move(id);
  n.e2 = std::move(v);
  return Share(std::move(n));
}

Proc If(Expr cond, Proc then_branch, Proc else_branch) {
  PNode n;
  n.kind = PKind::kIf;
  n.e = std::move(cond);
  n.P1 = std::move(then_branch);
  n.P2 = std::move(else_branch);
  return Share(std::move(n));
}

Proc Res(std::string x, std::optional<Sort> sort, Proc body) {
  PNode n;
  n.kind = PKind::kRes;
  n.x = std::move(x);
  n.sort = std::move(sort);
  n.next = std::move(body);
  return Share(std::move(n));
}

Proc DSend(std::string s, Expr p, Expr q, std::string dch, Expr dr,
           Proc next) {
  PNode n = Prefix(PKind::kDSend, std::move(s), std::move(p), std::move(q),
                   std::move(next));
  n.dch = std::move(dch);
  n.dr = std::move(dr);
  return Share(std::move(n));
}

Proc DRecv(std::string s, Expr p, Expr q, std::string dch_binder,
           std::string role_binder, Proc next) {
  PNode n = Prefix(PKind::kDRecv, std::move(s), std::move(p), std::move(q),
                   std::move(next));
  n.x = std::move(dch_binder);
  n.y = std::move(role_binder);
  return Share(std::move(n));
}

Proc Queue(std::string s, Role from, Role to, std::vector<Message> msgs) {
  PNode n;
  n.kind = PKind::kQueue;
  n.ch = std::move(s);
  n.p = Nat(from);
  n.q = Nat(to);
  n.queue = std::move(msgs);
  return Share(std::move(n));
}

}  // namespace proc

std::optional<Role> EvalRole(const Expr& e) {
  if (!e) return std::nullopt;
  auto v = TryEval(e);
  if (!v || v->kind() != Value::Kind::kNat) return std::nullopt;
  return static_cast<Role>(v->as_nat());
}

// ---------------------------------------------------------------------------
// Equality.

namespace {

template <typename B>
bool BranchesEqual(const std::vector<B>& a, const std::vector<B>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!LabelEqual(a[i].label, b[i].label) || !Equal(a[i].cont, b[i].cont))
      return false;
  }
  return true;
}

}  // namespace

bool Equal(const Global& a, const Global& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  return a->p == b->p && a->q == b->q && RolesEqual(a->R, b->R) &&
         a->S == b->S && a->S2 == b->S2 && LabelEqual(a->l, b->l) &&
         a->t == b->t && a->c == b->c && OptExprEqual(a->e, b->e) &&
         BranchesEqual(a->branches, b->branches) && a->keys == b->keys &&
         Equal(a->next, b->next) && Equal(a->cont, b->cont) &&
         a->dr == b->dr && Equal(a->dtype, b->dtype);
}

bool Equal(const Local& a, const Local& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  return a->p == b->p && RolesEqual(a->R, b->R) && a->S == b->S &&
         a->S2 == b->S2 && LabelEqual(a->l, b->l) && a->t == b->t &&
         a->c == b->c && a->n == b->n && OptExprEqual(a->e, b->e) &&
         BranchesEqual(a->branches, b->branches) && a->keys == b->keys &&
         Equal(a->next, b->next) && Equal(a->T0, b->T0) &&
         Equal(a->T1, b->T1) && Equal(a->T2, b->T2) && a->dr == b->dr &&
         Equal(a->dtype, b->dtype);
}

bool Equal(const Proc& a, const Proc& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); ++i) {
    if (!Equal(a->kids[i], b->kids[i])) return false;
  }
  if (a->queue.size() != b->queue.size()) return false;
  for (size_t i = 0; i < a->queue.size(); ++i) {
    if (!MessageEqual(a->queue[i], b->queue[i])) return false;
  }
  return a->ch == b->ch && a->s == b->s && a->count == b->count &&
         OptExprEqual(a->p, b->p) && OptExprEqual(a->q, b->q) &&
         RolesEqual(a->R, b->R) && LabelEqual(a->l, b->l) &&
         OptExprEqual(a->e, b->e) && OptExprEqual(a->e2, b->e2) &&
         a->x == b->x && a->y == b->y && a->X == b->X && a->c == b->c &&
         BranchesEqual(a->branches, b->branches) && Equal(a->next, b->next) &&
         Equal(a->P0, b->P0) && Equal(a->P1, b->P1) && Equal(a->P2, b->P2) &&
         a->sort == b->sort && a->dch == b->dch && OptExprEqual(a->dr, b->dr);
}

// ---------------------------------------------------------------------------
// Printing. The output is the concrete syntax accepted by the parser.

std::string ToString(const Global& g) {
  switch (g->kind) {
    case GKind::kEnd:
      return "end";
    case GKind::kVar:
      return g->t;
    case GKind::kRec:
      return "mu(" + g->t + ", " + g->c + "). " + ToString(g->next);
    case GKind::kComm:
      return std::to_string(g->p) + "->" + std::to_string(g->q) + ":<" +
             g->S.ToString() + ">." + ToString(g->next);
    case GKind::kUComm:
      return std::to_string(g->p) + "->" + std::to_string(g->q) + ":" +
             ToString(g->l) + "<" + g->S.ToString() + ">." +
             ToString(g->next);
    case GKind::kBranch:
    case GKind::kWBranch: {
      std::string out =
          g->kind == GKind::kBranch
              ? std::to_string(g->p) + "->" + std::to_string(g->q) + ":{"
              : std::to_string(g->p) + "=>" + RolesText(g->R) + ":{";
      for (size_t i = 0; i < g->branches.size(); ++i) {
        if (i) out += ", ";
        if (g->kind == GKind::kWBranch && i + 1 == g->branches.size())
          out += "default ";
        out += ToString(g->branches[i].label) + "." +
               ToString(g->branches[i].cont);
      }
      return out + "}";
    }
    case GKind::kPar:
      return "(" + ToString(g->next) + " | " + ToString(g->cont) + ")";
    case GKind::kLoop:
      return "loop(" + RolesText(g->R) + ", " + ToString(g->e) + ", " + g->c +
             "; " + g->S.ToString() + "){" + ToString(g->next) + " ; " +
             g->S2.ToString() + ": " + ToString(g->cont) + "}";
    case GKind::kCall:
      return "call(" + ToString(g->e) + ")";
    case GKind::kDeleg:
      return std::to_string(g->p) + "->" + std::to_string(g->q) + ":deleg<" +
             std::to_string(g->dr) + " : " + ToString(g->dtype) + ">." +
             ToString(g->next);
    case GKind::kCase: {
      std::string out = "case " + ToString(g->e) + " of {";
      for (size_t i = 0; i < g->branches.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(g->keys[i]) + ": " +
               ToString(g->branches[i].cont);
      }
      return out + "}";
    }
  }
  return "?";
}

std::string ToString(const Local& t) {
  auto branches = [](const Local& x, bool weak_default) {
    std::string out = "{";
    for (size_t i = 0; i < x->branches.size(); ++i) {
      if (i) out += ", ";
      if (weak_default && i + 1 == x->branches.size()) out += "default ";
      out += ToString(x->branches[i].label) + "." +
             ToString(x->branches[i].cont);
    }
    return out + "}";
  };
  switch (t->kind) {
    case LKind::kEnd:
      return "end";
    case LKind::kVar:
      return t->t;
    case LKind::kRec:
      return "mu(" + t->t + ", " + t->c + "=" + std::to_string(t->n) + "). " +
             ToString(t->next);
    case LKind::kSend:
      return std::to_string(t->p) + "!<" + t->S.ToString() + ">." +
             ToString(t->next);
    case LKind::kRecv:
      return std::to_string(t->p) + "?<" + t->S.ToString() + ">." +
             ToString(t->next);
    case LKind::kUSend:
      return std::to_string(t->p) + "!" + ToString(t->l) + "<" +
             t->S.ToString() + ">." + ToString(t->next);
    case LKind::kURecv:
      return std::to_string(t->p) + "?" + ToString(t->l) + "<" +
             t->S.ToString() + ">." + ToString(t->next);
    case LKind::kSel:
      return std::to_string(t->p) + "!" + branches(t, false);
    case LKind::kBran:
      return std::to_string(t->p) + "?" + branches(t, false);
    case LKind::kWSel:
      return RolesText(t->R) + "!!" + branches(t, false);
    case LKind::kWBran:
      return std::to_string(t->p) + "??" + branches(t, true);
    case LKind::kLoop:
      return "loop(" + RolesText(t->R) + ", " + ToString(t->e) + ", " + t->c +
             "=" + std::to_string(t->n) + "; " + t->S.ToString() + "){" +
             ToString(t->T0) + " ; " + ToString(t->T1) + " ; " +
             t->S2.ToString() + ": " + ToString(t->T2) + "}";
    case LKind::kCall:
      return "call(" + ToString(t->e) + ")";
    case LKind::kDSend:
      return std::to_string(t->p) + "!deleg<" + std::to_string(t->dr) +
             " : " + ToString(t->dtype) + ">." + ToString(t->next);
    case LKind::kDRecv:
      return std::to_string(t->p) + "?deleg<" + std::to_string(t->dr) +
             " : " + ToString(t->dtype) + ">." + ToString(t->next);
    case LKind::kCase: {
      std::string out = "case " + ToString(t->e) + " of {";
      for (size_t i = 0; i < t->branches.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(t->keys[i]) + ": " +
               ToString(t->branches[i].cont);
      }
      return out + "}";
    }
  }
  return "?";
}

std::string ToString(const Proc& P) {
  auto endpoint = [](const Proc& x) {
    return x->ch + "[" + ToString(x->p) + ", " + ToString(x->q) + "]";
  };
  auto branches = [](const Proc& x, bool weak_default) {
    std::string out = "{";
    for (size_t i = 0; i < x->branches.size(); ++i) {
      if (i) out += ", ";
      if (weak_default && i + 1 == x->branches.size()) out += "default ";
      out += ToString(x->branches[i].label) + "." +
             ToString(x->branches[i].cont);
    }
    return out + "}";
  };
  switch (P->kind) {
    case PKind::kNil:
      return "0";
    case PKind::kCrash:
      return "crash";
    case PKind::kVar:
      return P->X;
    case PKind::kReq:
      return "req " + P->ch + "[" + std::to_string(P->count) + "](" + P->s +
             ")." + ToString(P->next);
    case PKind::kAcc:
      return "acc " + P->ch + "[" + std::to_string(P->count) + "](" + P->s +
             ")." + ToString(P->next);
    case PKind::kSend:
      return endpoint(P) + "!<" + Angle(P->e) + ">." + ToString(P->next);
    case PKind::kRecv:
      return endpoint(P) + "?(" + P->x + ")." + ToString(P->next);
    case PKind::kUSend:
      return endpoint(P) + "!" + ToString(P->l) + "<" + Angle(P->e) + ">." +
             ToString(P->next);
    case PKind::kURecv:
      return endpoint(P) + "?" + ToString(P->l) + "<" + Angle(P->e) + ">(" +
             P->x + ")." + ToString(P->next);
    case PKind::kSel:
      return endpoint(P) + "!{" + ToString(P->l) + "}." + ToString(P->next);
    case PKind::kBran:
      return endpoint(P) + "?" + branches(P, false);
    case PKind::kWSel:
      return P->ch + "[" + ToString(P->p) + ", " + RolesText(P->R) + "]!!{" +
             ToString(P->l) + "}." + ToString(P->next);
    case PKind::kWBran:
      return endpoint(P) + "??" + branches(P, true);
    case PKind::kPar: {
      if (P->kids.empty()) return "0";
      std::string out = "(";
      for (size_t i = 0; i < P->kids.size(); ++i) {
        if (i) out += " | ";
        out += ToString(P->kids[i]);
      }
      return out + ")";
    }
    case PKind::kRec:
      return "mu(" + P->X + ", " + P->c + "=" + std::to_string(P->count) +
             "). " + ToString(P->next);
    case PKind::kLoop:
      return "loop(" + P->ch + "[" + ToString(P->p) + "][" + RolesText(P->R) +
             "], " + ToString(P->e) + ", " + P->c + "=" +
             std::to_string(P->count) + ", (" + P->x + ")." +
             ToString(P->P0) + ", " + ToString(P->P1) + ", (" + P->y + ")." +
             ToString(P->P2) + ")";
    case PKind::kCall:
      return "call(" + ToString(P->e) + ", " + ToString(P->e2) + ")";
    case PKind::kExit:
      return "exit(" + ToString(P->e) + ", " + ToString(P->e2) + ")";
    case PKind::kIf:
      return "if " + ToString(P->e) + " then " + ToString(P->P1) + " else " +
             ToString(P->P2);
    case PKind::kRes:
      return "new " + P->x +
             (P->sort ? " : " + P->sort->ToString() : std::string()) + ". " +
             ToString(P->next);
    case PKind::kDSend:
      return endpoint(P) + "!deleg<" + P->dch + "[" + ToString(P->dr) + "]>." +
             ToString(P->next);
    case PKind::kDRecv:
      return endpoint(P) + "?deleg(" + P->x + "[" + P->y + "])." +
             ToString(P->next);
    case PKind::kQueue: {
      std::string out = P->ch + "[" + ToString(P->p) + "->" + ToString(P->q) +
                        "]:[";
      for (size_t i = 0; i < P->queue.size(); ++i) {
        if (i) out += ", ";
        out += ToString(P->queue[i]);
      }
      return out + "]";
    }
  }
  return "?";
}

}  // namespace ftmpst
