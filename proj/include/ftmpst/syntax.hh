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

#ifndef FTMPST_SYNTAX_HH_
#define FTMPST_SYNTAX_HH_

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ftmpst/expr.hh"
#include "ftmpst/value.hh"

namespace ftmpst {

using Role = int;
using RoleSet = std::vector<Role>;  // kept sorted and duplicate free

RoleSet MakeRoleSet(std::vector<Role> roles);

/**
 * A label: a static symbol plus an optional runtime part. Compatibility only
 * inspects the symbol. In messages the runtime part holds literals.
 */
struct Label {
  std::string sym;
  std::vector<Expr> rt;
};

bool LabelsCompatible(const Label& a, const Label& b);
bool LabelEqual(const Label& a, const Label& b);
std::string ToString(const Label& l);

struct LNode;
using Local = std::shared_ptr<const LNode>;
struct GNode;
using Global = std::shared_ptr<const GNode>;
struct PNode;
using Proc = std::shared_ptr<const PNode>;

// ---------------------------------------------------------------------------
// Global types.

enum class GKind {
  kEnd,
  kVar,
  kRec,
  kComm,
  kUComm,
  kBranch,
  kWBranch,
  kPar,
  kLoop,
  kCall,
  kDeleg,
  kCase
};

struct GBranch {
  Label label;
  Global cont;
};

/**
 * Global type node. Field use by kind:
 *   kComm/kUComm: p -> q, S (payload), l (unreliable), next
 *   kBranch: p -> q, branches; kWBranch: p => R, branches (default last)
 *   kRec: t, c, next; kVar: t
 *   kLoop: R, e (id), c, S (S0), next (G0), S2, cont (G2)
 *   kCall: e; kPar: next | cont
 *   kDeleg: p -> q, dr (delegated role), dtype, next
 *   kCase: e (scrutinee), keys[i] selects branches[i].cont
 */
struct GNode {
  GKind kind = GKind::kEnd;
  Role p = 0, q = 0;
  RoleSet R;
  Sort S, S2;
  Label l;
  std::string t, c;
  Expr e;
  std::vector<GBranch> branches;
  std::vector<int64_t> keys;
  Global next, cont;
  Role dr = 0;
  Local dtype;
};

namespace global {
Global End();
Global Var(std::string t);
Global Rec(std::string t, std::string c, Global body);
Global Comm(Role p, Role q, Sort s, Global next);
Global UComm(Role p, Role q, Label l, Sort s, Global next);
Global Branch(Role p, Role q, std::vector<GBranch> branches);
Global WBranch(Role p, RoleSet r, std::vector<GBranch> branches);
Global Par(Global a, Global b);
Global Loop(RoleSet r, Expr id, std::string c, Sort s0, Global g0, Sort s2,
            Global g2);
Global Call(Expr id);
Global Deleg(Role p, Role q, Role dr, Local dtype, Global next);
Global Case(Expr scrutinee, std::vector<int64_t> keys,
            std::vector<Global> branches);
}  // namespace global

// ---------------------------------------------------------------------------
// Local types.

enum class LKind {
  kEnd,
  kVar,
  kRec,
  kSend,
  kRecv,
  kUSend,
  kURecv,
  kSel,
  kBran,
  kWSel,
  kWBran,
  kLoop,
  kCall,
  kDSend,
  kDRecv,
  kCase
};

struct LBranch {
  Label label;
  Local cont;
};

/**
 * Local type node. Field use by kind:
 *   kSend/kRecv/kUSend/kURecv: peer p, S, l (unreliable), next
 *   kSel/kBran: peer p, branches; kWSel: R, branches; kWBran: p, branches
 *     with the default last
 *   kRec: t, c, n, next; kVar: t
 *   kLoop: R, e, c, n, S (S0), T0, T1, S2, T2
 *   kCall: e; kDSend/kDRecv: peer p, dr, dtype, next; kCase: e, keys, branches
 */
struct LNode {
  LKind kind = LKind::kEnd;
  Role p = 0;
  RoleSet R;
  Sort S, S2;
  Label l;
  std::string t, c;
  int64_t n = 0;
  Expr e;
  std::vector<LBranch> branches;
  std::vector<int64_t> keys;
  Local next, T0, T1, T2;
  Role dr = 0;
  Local dtype;
};

namespace local {
Local End();
Local Var(std::string t);
Local Rec(std::string t, std::string c, int64_t n, Local body);
Local Send(Role q, Sort s, Local next);
Local Recv(Role p, Sort s, Local next);
Local USend(Role q, Label l, Sort s, Local next);
Local URecv(Role p, Label l, Sort s, Local next);
Local Sel(Role q, std::vector<LBranch> branches);
Local Bran(Role p, std::vector<LBranch> branches);
Local WSel(RoleSet r, std::vector<LBranch> branches);
Local WBran(Role p, std::vector<LBranch> branches);
Local Loop(RoleSet r, Expr id, std::string c, int64_t n, Sort s0, Local t0,
           Local t1, Sort s2, Local t2);
Local Call(Expr id);
Local DSend(Role q, Role dr, Local dtype, Local next);
Local DRecv(Role p, Role dr, Local dtype, Local next);
Local Case(Expr scrutinee, std::vector<int64_t> keys,
           std::vector<Local> branches);
}  // namespace local

// ---------------------------------------------------------------------------
// Messages and message types.

struct Message {
  enum class Kind { kR, kU, kBR, kBW, kExit, kDeleg };
  Kind kind = Kind::kR;
  Value v;          // kR, kU, kExit payload
  Label l;          // kU, kBR, kBW; runtime part literal
  Value id;         // kExit evaluated loop identifier
  std::string ch;   // kDeleg endpoint channel
  Role role = 0;    // kDeleg endpoint role

  static Message R(Value v);
  static Message U(Label l, Value v);
  static Message BR(Label l);
  static Message BW(Label l);
  static Message Exit(Value id, Value v);
  static Message Deleg(std::string ch, Role role);
};

bool MessageEqual(const Message& a, const Message& b);
std::string ToString(const Message& m);

struct MsgType {
  enum class Kind { kR, kU, kBR, kBW, kExit, kDeleg };
  Kind kind = Kind::kR;
  Sort S;
  Label l;
  Expr id;
  std::string ch;
  Role role = 0;
};

bool MsgTypeEqual(const MsgType& a, const MsgType& b);
std::string ToString(const MsgType& m);

// ---------------------------------------------------------------------------
// Processes.

enum class PKind {
  kNil,
  kCrash,
  kVar,
  kReq,
  kAcc,
  kSend,
  kRecv,
  kUSend,
  kURecv,
  kSel,
  kBran,
  kWSel,
  kWBran,
  kPar,
  kRec,
  kLoop,
  kCall,
  kExit,
  kIf,
  kRes,
  kDSend,
  kDRecv,
  kQueue
};

struct PBranch {
  Label label;
  Proc cont;
};

/**
 * Process node. Field use by kind:
 *   kReq: ch = a, count = n, s (binder), next;  kAcc: ch = a, count = p
 *   prefixes: ch = s, p (own role), q (peer role), next
 *     kSend: e;  kRecv: x;  kUSend: l, e;  kURecv: l, e (default), x
 *     kSel: l;  kBran: branches;  kWSel: R, l;  kWBran: branches, default last
 *     kDSend: dch, dr (payload endpoint);  kDRecv: x (channel binder),
 *       y (role binder)
 *   kPar: kids;  kRec: X, c, count, next;  kVar: X
 *   kLoop: ch, p, R, e (id), c, count, x, P0, P1, y, P2
 *   kCall/kExit: e (id), e2 (value);  kIf: e, P1 (then), P2 (else)
 *   kRes: x, sort (optional annotation), next
 *   kQueue: ch, p (from), q (to), queue
 */
struct PNode {
  PKind kind = PKind::kNil;
  std::string ch;
  std::string s;
  int64_t count = 0;
  Expr p, q;
  RoleSet R;
  Label l;
  Expr e, e2;
  std::string x, y;
  std::string X, c;
  std::vector<PBranch> branches;
  std::vector<Proc> kids;
  Proc next, P0, P1, P2;
  std::optional<Sort> sort;
  std::string dch;
  Expr dr;
  std::vector<Message> queue;
};

namespace proc {
Proc Nil();
Proc Crash();
Proc Var(std::string X);
Proc Req(std::string a, int64_t n, std::string s, Proc next);
Proc Acc(std::string a, int64_t p, std::string s, Proc next);
Proc Send(std::string s, Expr p, Expr q, Expr e, Proc next);
Proc Recv(std::string s, Expr p, Expr q, std::string x, Proc next);
Proc USend(std::string s, Expr p, Expr q, Label l, Expr e, Proc next);
Proc URecv(std::string s, Expr p, Expr q, Label l, Expr dv, std::string x,
           Proc next);
Proc Sel(std::string s, Expr p, Expr q, Label l, Proc next);
Proc Bran(std::string s, Expr p, Expr q, std::vector<PBranch> branches);
Proc WSel(std::string s, Expr p, RoleSet r, Label l, Proc next);
Proc WBran(std::string s, Expr p, Expr q, std::vector<PBranch> branches);
Proc Par(std::vector<Proc> kids);
Proc Rec(std::string X, std::string c, int64_t n, Proc body);
Proc Loop(std::string s, Expr p, RoleSet r, Expr id, std::string c, int64_t n,
          std::string x, Proc p0, Proc p1, std::string y, Proc p2);
Proc Call(Expr id, Expr v);
Proc Exit(Expr id, Expr v);
Proc If(Expr cond, Proc then_branch, Proc else_branch);
Proc Res(std::string x, std::optional<Sort> sort, Proc body);
Proc DSend(std::string s, Expr p, Expr q, std::string dch, Expr dr, Proc next);
Proc DRecv(std::string s, Expr p, Expr q, std::string dch_binder,
           std::string role_binder, Proc next);
Proc Queue(std::string s, Role from, Role to, std::vector<Message> msgs);
}  // namespace proc

/** Evaluates a closed role expression; nullopt when not a closed Nat. */
std::optional<Role> EvalRole(const Expr& e);

// ---------------------------------------------------------------------------
// Structural equality (exact, not up to alpha) and printing.

bool Equal(const Global& a, const Global& b);
bool Equal(const Local& a, const Local& b);
bool Equal(const Proc& a, const Proc& b);

std::string ToString(const Global& g);
std::string ToString(const Local& t);
std::string ToString(const Proc& p);

}  // namespace ftmpst

#endif  // FTMPST_SYNTAX_HH_
