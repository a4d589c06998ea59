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

#ifndef FTMPST_EXPR_HH_
#define FTMPST_EXPR_HH_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ftmpst/value.hh"

namespace ftmpst {

enum class Op {
  kLit,
  kName,
  kAdd,
  kMod,
  kEq,
  kNe,
  kLt,
  kLe,
  kGt,
  kGe,
  kAnd,
  kOr,
  kNot,
  kTuple,
  kApply
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

/** Immutable expression tree; shared freely between ASTs and threads. */
struct ExprNode {
  Op op = Op::kLit;
  Value lit;               // kLit
  std::string name;        // kName variable, kApply function name
  std::vector<Expr> args;  // operands
};

Expr Lit(Value v);
Expr Nat(int64_t n);
Expr Name(std::string name);
Expr Bin(Op op, Expr a, Expr b);
Expr Not(Expr a);
Expr TupleExpr(std::vector<Expr> elems);
Expr Apply(std::string fn, std::vector<Expr> args);

using Env = std::map<std::string, Value>;
using SortEnv = std::map<std::string, Sort>;

/** Evaluates e; throws EvalError on unbound names or ill-sorted operands. */
Value Eval(const Expr& e, const Env& env);

/** Evaluates a closed expression; nullopt when open or ill-sorted. */
std::optional<Value> TryEval(const Expr& e);

/** Infers the sort of e under gamma; throws EvalError when ill-sorted. */
Sort SortOf(const Expr& e, const SortEnv& gamma);

/** Checks e against s, admitting literals by value membership (0 : Bel). */
bool CheckSort(const Expr& e, const Sort& s, const SortEnv& gamma);

std::set<std::string> FreeNames(const Expr& e);
bool Mentions(const Expr& e, const std::string& name);

/** Replaces every occurrence of name x (expressions have no binders). */
Expr Subst(const Expr& e, const std::string& x, const Expr& v);

bool Equal(const Expr& a, const Expr& b);
bool IsLiteral(const Expr& e);
std::string ToString(const Expr& e);

/** Moduli m of every subterm (a mod m) where a mentions name and m is
 * literal; empty if name occurs elsewhere outside such a subterm. */
bool CollectModuli(const Expr& e, const std::string& name,
                   std::set<int64_t>* moduli);

/**
 * Pure named functions usable in expressions. Registration is expected at
 * start-up; lookups after that are read-only and thread safe.
 */
struct Function {
  int arity = -1;  // -1: variadic
  std::function<Value(const std::vector<Value>&)> eval;
  std::function<Sort(const std::vector<Sort>&, const std::vector<Expr>&)>
      sort;
};

void RegisterFunction(const std::string& name, Function fn);
const Function* FindFunction(const std::string& name);

/** Built-in knowledge-vector helpers, also reachable through Apply. */
Value BestOf(const Value& k);
int64_t CountAck(const Value& k);
int64_t Known(const Value& k);

}  // namespace ftmpst

#endif  // FTMPST_EXPR_HH_
