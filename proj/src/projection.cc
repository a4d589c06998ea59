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

#include "ftmpst/projection.hh"

#include <algorithm>
#include <functional>

#include "ftmpst/ops.hh"

namespace ftmpst {

namespace {

template <typename B>
std::vector<LBranch> ProjectBranches(const std::vector<B>& in, Role p) {
  std::vector<LBranch> out;
  for (const auto& b : in) out.push_back({b.label, Project(b.cont, p)});
  return out;
}

// Plain merge: every branch must project to the same local type.
Local Merge(const std::vector<GBranch>& branches, Role p) {
  Local first;
  for (const auto& b : branches) {
    Local t = Project(b.cont, p);
    if (!first) {
      first = t;
    } else if (!AlphaEqual(first, t)) {
      throw ProjectionError("role " + std::to_string(p) +
                            " is not involved in a branching whose branches "
                            "project differently");
    }
  }
  return first ? first : local::End();
}

bool Contains(const RoleSet& r, Role p) {
  return std::binary_search(r.begin(), r.end(), p);
}

}  // namespace

Local Project(const Global& G, Role p) {
  switch (G->kind) {
    case GKind::kEnd:
      return local::End();
    case GKind::kVar:
      return local::Var(G->t);
    case GKind::kRec: {
      if (!FreeVars(G->next).count(G->t)) {
        return Project(Subst(G->next, G->c, Nat(0)), p);
      }
      if (Roles(G->next).count(p)) {
        return local::Rec(G->t, G->c, 0, Project(G->next, p));
      }
      return local::End();
    }
    case GKind::kComm:
      if (G->p == G->q) throw ProjectionError("self communication");
      if (p == G->p) return local::Send(G->q, G->S, Project(G->next, p));
      if (p == G->q) return local::Recv(G->p, G->S, Project(G->next, p));
      return Project(G->next, p);
    case GKind::kUComm:
      if (G->p == G->q) throw ProjectionError("self communication");
      if (p == G->p) return local::USend(G->q, G->l, G->S, Project(G->next, p));
      if (p == G->q) return local::URecv(G->p, G->l, G->S, Project(G->next, p));
      return Project(G->next, p);
    case GKind::kBranch:
      if (p == G->p) return local::Sel(G->q, ProjectBranches(G->branches, p));
      if (p == G->q) return local::Bran(G->p, ProjectBranches(G->branches, p));
      return Merge(G->branches, p);
    case GKind::kWBranch:
      if (p == G->p) return local::WSel(G->R, ProjectBranches(G->branches, p));
      if (Contains(G->R, p))
        return local::WBran(G->p, ProjectBranches(G->branches, p));
      return Merge(G->branches, p);
    case GKind::kPar: {
      bool left = Roles(G->next).count(p) > 0;
      bool right = Roles(G->cont).count(p) > 0;
      if (left && right)
        throw ProjectionError("role " + std::to_string(p) +
                              " occurs on both sides of a parallel type");
      if (left) return Project(G->next, p);
      if (right) return Project(G->cont, p);
      return local::End();
    }
    case GKind::kLoop: {
      if (!Contains(G->R, p)) return Project(G->cont, p);
      RoleSet rest;
      for (Role r : G->R) {
        if (r != p) rest.push_back(r);
      }
      return local::Loop(rest, G->e, G->c, 0, G->S, Project(G->next, p),
                         local::Call(G->e), G->S2, Project(G->cont, p));
    }
    case GKind::kCall:
      return local::Call(G->e);
    case GKind::kDeleg:
      if (p == G->p)
        return local::DSend(G->q, G->dr, G->dtype, Project(G->next, p));
      if (p == G->q)
        return local::DRecv(G->p, G->dr, G->dtype, Project(G->next, p));
      return Project(G->next, p);
    case GKind::kCase: {
      if (auto v = TryEval(G->e)) {
        for (size_t i = 0; i < G->keys.size(); ++i) {
          if (v->kind() == Value::Kind::kNat && v->as_nat() == G->keys[i])
            return Project(G->branches[i].cont, p);
        }
        throw ProjectionError("case scrutinee " + v->ToString() +
                              " matches no branch");
      }
      std::vector<Local> branches;
      for (const auto& b : G->branches) branches.push_back(Project(b.cont, p));
      bool uniform = std::all_of(branches.begin(), branches.end(),
                                 [&](const Local& t) {
                                   return AlphaEqual(t, branches.front());
                                 });
      if (uniform && !branches.empty()) return branches.front();
      return local::Case(G->e, G->keys, branches);
    }
  }
  throw ProjectionError("unknown global type");
}

std::map<Role, Local> ProjectAll(const Global& G) {
  std::map<Role, Local> out;
  for (Role p : Roles(G)) out[p] = Project(G, p);
  return out;
}

// ---------------------------------------------------------------------------
// Well-formedness.

namespace {

struct LoopScope {
  Expr id;
  bool in_program;  // inside G0 of this loop, where call(id) is allowed
};

class Checker {
 public:
  explicit Checker(WellFormedness* out) : out_(out) {}

  void Add(const std::string& v) {
    if (std::find(out_->violations.begin(), out_->violations.end(), v) ==
        out_->violations.end()) {
      out_->violations.push_back(v);
    }
  }

  // unguarded: type variables that would be reached without a prefix.
  // counters: counters of enclosing mu and loop programs.
  void Walk(const Global& g, std::vector<std::string> unguarded,
            bool call_guarded, std::vector<std::string> counters,
            std::vector<LoopScope> loops) {
    switch (g->kind) {
      case GKind::kEnd:
        return;
      case GKind::kVar:
        if (std::count(unguarded.begin(), unguarded.end(), g->t))
          Add("unguarded recursion variable " + g->t);
        return;
      case GKind::kRec:
        unguarded.push_back(g->t);
        counters.push_back(g->c);
        Walk(g->next, unguarded, call_guarded, counters, loops);
        return;
      case GKind::kComm:
      case GKind::kUComm:
      case GKind::kDeleg:
        Walk(g->next, {}, true, counters, loops);
        return;
      case GKind::kBranch:
      case GKind::kWBranch:
        for (const auto& b : g->branches)
          Walk(b.cont, {}, true, counters, loops);
        return;
      case GKind::kPar:
        Walk(g->next, unguarded, call_guarded, counters, loops);
        Walk(g->cont, unguarded, call_guarded, counters, loops);
        return;
      case GKind::kCase:
        for (const auto& b : g->branches)
          Walk(b.cont, unguarded, call_guarded, counters, loops);
        return;
      case GKind::kCall: {
        bool found = false;
        for (const auto& l : loops) {
          if (l.in_program && Equal(l.id, g->e)) found = true;
        }
        if (!found)
          Add("call(" + ToString(g->e) + ") outside the program of its loop");
        if (!call_guarded)
          Add("unguarded call(" + ToString(g->e) + ")");
        return;
      }
      case GKind::kLoop: {
        for (const auto& c : counters) {
          if (!Mentions(g->e, c))
            Add("loop identifier " + ToString(g->e) +
                " is not unique: it does not mention counter " + c);
        }
        for (const Expr& seen : ids_) {
          if (Equal(seen, g->e))
            Add("loop identifier " + ToString(g->e) + " is used twice");
        }
        ids_.push_back(g->e);
        if (!FreeVars(g->next).empty())
          Add("free type variable inside the program of loop " +
              ToString(g->e));
        std::vector<LoopScope> inner = loops;
        inner.push_back({g->e, true});
        std::vector<std::string> inner_counters = counters;
        inner_counters.push_back(g->c);
        // The program is unguarded: a leading call is not allowed.
        Walk(g->next, {}, false, inner_counters, inner);
        // The loop guards its continuation.
        Walk(g->cont, {}, true, counters, loops);
        return;
      }
    }
  }

 private:
  WellFormedness* out_;
  std::vector<Expr> ids_;
};

}  // namespace

WellFormedness WellFormed(const Global& G) {
  WellFormedness out;
  Checker checker(&out);
  for (const auto& t : FreeVars(G)) checker.Add("free type variable " + t);
  checker.Walk(G, {}, false, {}, {});
  for (Role p : Roles(G)) {
    try {
      Project(G, p);
    } catch (const ProjectionError& e) {
      checker.Add("not projectable onto role " + std::to_string(p) + ": " +
                  e.what());
    }
  }
  return out;
}

}  // namespace ftmpst
