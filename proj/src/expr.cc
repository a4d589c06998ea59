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

#include "ftmpst/expr.hh"

#include <mutex>

namespace ftmpst {

namespace {

Expr Make(ExprNode node) { return std::make_shared<const ExprNode>(node); }

const Sort& ElemSortAt(const Sort& tuple, int64_t index) {
  if (tuple.kind != SortKind::kTuple || index < 1 ||
      index > static_cast<int64_t>(tuple.elems.size())) {
    throw EvalError("index " + std::to_string(index) + " out of range for " +
                    tuple.ToString());
  }
  return tuple.elems[index - 1];
}

void RequireTuple(const Sort& s, const std::string& fn) {
  if (s.kind != SortKind::kTuple && s.kind != SortKind::kAny)
    throw EvalError(fn + " expects a vector, got " + s.ToString());
}

std::map<std::string, Function>& Registry() {
  static std::map<std::string, Function> registry = [] {
    std::map<std::string, Function> r;
    r["best"] = Function{
        1, [](const std::vector<Value>& a) { return BestOf(a[0]); },
        [](const std::vector<Sort>& s, const std::vector<Expr>&) {
          RequireTuple(s[0], "best");
          for (const Sort& e : s[0].elems) {
            if (!IsSubsort(e, Sort::Nat()))
              throw EvalError("best expects Bel entries, got " + e.ToString());
          }
          return Sort::Bel();
        }};
    r["countAck"] = Function{
        1,
        [](const std::vector<Value>& a) { return Value::Nat(CountAck(a[0])); },
        [](const std::vector<Sort>& s, const std::vector<Expr>&) {
          RequireTuple(s[0], "countAck");
          return Sort::Nat();
        }};
    r["known"] = Function{
        1, [](const std::vector<Value>& a) { return Value::Nat(Known(a[0])); },
        [](const std::vector<Sort>& s, const std::vector<Expr>&) {
          RequireTuple(s[0], "known");
          return Sort::Nat();
        }};
    r["at"] = Function{
        2,
        [](const std::vector<Value>& a) {
          const auto& elems = a[0].elems();
          int64_t i = a[1].as_nat();
          if (i < 1 || i > static_cast<int64_t>(elems.size()))
            throw EvalError("at: index out of range");
          return elems[i - 1];
        },
        [](const std::vector<Sort>& s, const std::vector<Expr>& args) {
          RequireTuple(s[0], "at");
          if (!IsSubsort(s[1], Sort::Nat()))
            throw EvalError("at: index must be Nat");
          if (s[0].kind == SortKind::kAny) return Sort::Any();
          if (IsLiteral(args[1]))
            return ElemSortAt(s[0], args[1]->lit.as_nat());
          for (const Sort& e : s[0].elems) {
            if (!(e == s[0].elems.front())) return Sort::Any();
          }
          return s[0].elems.empty() ? Sort::Any() : s[0].elems.front();
        }};
    r["upd"] = Function{
        3,
        [](const std::vector<Value>& a) {
          std::vector<Value> elems = a[0].elems();
          int64_t i = a[1].as_nat();
          if (i < 1 || i > static_cast<int64_t>(elems.size()))
            throw EvalError("upd: index out of range");
          elems[i - 1] = a[2];
          return Value::Tuple(std::move(elems));
        },
        [](const std::vector<Sort>& s, const std::vector<Expr>& args) {
          RequireTuple(s[0], "upd");
          if (!IsSubsort(s[1], Sort::Nat()))
            throw EvalError("upd: index must be Nat");
          if (s[0].kind == SortKind::kAny || !IsLiteral(args[1])) return s[0];
          Sort out = s[0];
          ElemSortAt(out, args[1]->lit.as_nat());
          out.elems[args[1]->lit.as_nat() - 1] = s[2];
          return out;
        }};
    return r;
  }();
  return registry;
}

std::mutex& RegistryMutex() {
  static std::mutex m;
  return m;
}

int Precedence(const Expr& e) {
  switch (e->op) {
    case Op::kOr:
      return 1;
    case Op::kAnd:
      return 2;
    case Op::kNot:
      return 3;
    case Op::kEq:
    case Op::kNe:
    case Op::kLt:
    case Op::kLe:
    case Op::kGt:
    case Op::kGe:
      return 4;
    case Op::kAdd:
      return 5;
    case Op::kMod:
      return 6;
    default:
      return 7;
  }
}

const char* OpText(Op op) {
  switch (op) {
    case Op::kAdd:
      return "+";
    case Op::kMod:
      return "mod";
    case Op::kEq:
      return "=";
    case Op::kNe:
      return "!=";
    case Op::kLt:
      return "<";
    case Op::kLe:
      return "<=";
    case Op::kGt:
      return ">";
    case Op::kGe:
      return ">=";
    case Op::kAnd:
      return "and";
    case Op::kOr:
      return "or";
    default:
      return "?";
  }
}

// Left operand may sit at the same level; right operand must bind tighter
// (all binary operators are left associative, comparisons non-associative).
std::string Wrap(const Expr& e, int min_prec) {
  std::string s = ToString(e);
  return Precedence(e) < min_prec ? "(" + s + ")" : s;
}

}  // namespace

Expr Lit(Value v) {
  ExprNode n;
  n.op = Op::kLit;
  n.lit = std::move(v);
  return Make(std::move(n));
}

Expr Nat(int64_t n) { return Lit(Value::Nat(n)); }

Expr Name(std::string name) {
  ExprNode n;
  n.op = Op::kName;
  n.name = std::move(name);
  return Make(std::move(n));
}

Expr Bin(Op op, Expr a, Expr b) {
  ExprNode n;
  n.op = op;
  n.args = {std::move(a), std::move(b)};
  return Make(std::move(n));
}

Expr Not(Expr a) {
  ExprNode n;
  n.op = Op::kNot;
  n.args = {std::move(a)};
  return Make(std::move(n));
}

Expr TupleExpr(std::vector<Expr> elems) {
  ExprNode n;
  n.op = Op::kTuple;
  n.args = std::move(elems);
  return Make(std::move(n));
}

Expr Apply(std::string fn, std::vector<Expr> args) {
  ExprNode n;
  n.op = Op::kApply;
  n.name = std::move(fn);
  n.args = std::move(args);
  return Make(std::move(n));
}

Value Eval(const Expr& e, const Env& env) {
  switch (e->op) {
    case Op::kLit:
      return e->lit;
    case Op::kName: {
      auto it = env.find(e->name);
      if (it == env.end()) throw EvalError("unbound name " + e->name);
      return it->second;
    }
    case Op::kAdd:
      return Value::Nat(Eval(e->args[0], env).as_nat() +
                        Eval(e->args[1], env).as_nat());
    case Op::kMod: {
      int64_t d = Eval(e->args[1], env).as_nat();
      if (d == 0) throw EvalError("mod by zero");
      return Value::Nat(Eval(e->args[0], env).as_nat() % d);
    }
    case Op::kEq:
      return Value::Bool(Eval(e->args[0], env) == Eval(e->args[1], env));
    case Op::kNe:
      return Value::Bool(Eval(e->args[0], env) != Eval(e->args[1], env));
    case Op::kLt:
      return Value::Bool(Eval(e->args[0], env).as_nat() <
                         Eval(e->args[1], env).as_nat());
    case Op::kLe:
      return Value::Bool(Eval(e->args[0], env).as_nat() <=
                         Eval(e->args[1], env).as_nat());
    case Op::kGt:
      return Value::Bool(Eval(e->args[0], env).as_nat() >
                         Eval(e->args[1], env).as_nat());
    case Op::kGe:
      return Value::Bool(Eval(e->args[0], env).as_nat() >=
                         Eval(e->args[1], env).as_nat());
    case Op::kAnd:
      return Value::Bool(Eval(e->args[0], env).as_bool() &&
                         Eval(e->args[1], env).as_bool());
    case Op::kOr:
      return Value::Bool(Eval(e->args[0], env).as_bool() ||
                         Eval(e->args[1], env).as_bool());
    case Op::kNot:
      return Value::Bool(!Eval(e->args[0], env).as_bool());
    case Op::kTuple: {
      std::vector<Value> elems;
      elems.reserve(e->args.size());
      for (const Expr& a : e->args) elems.push_back(Eval(a, env));
      return Value::Tuple(std::move(elems));
    }
    case Op::kApply: {
      const Function* fn = FindFunction(e->name);
      if (!fn) throw EvalError("unknown function " + e->name);
      if (fn->arity >= 0 && fn->arity != static_cast<int>(e->args.size()))
        throw EvalError("arity mismatch for " + e->name);
      std::vector<Value> args;
      for (const Expr& a : e->args) args.push_back(Eval(a, env));
      return fn->eval(args);
    }
  }
  throw EvalError("bad expression");
}

std::optional<Value> TryEval(const Expr& e) {
  try {
    return Eval(e, {});
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

Sort SortOf(const Expr& e, const SortEnv& gamma) {
  auto sort_of_value = [](const Value& v, auto&& self) -> Sort {
    switch (v.kind()) {
      case Value::Kind::kBottom:
        return Sort::Any();
      case Value::Kind::kBool:
        return Sort::Bool();
      case Value::Kind::kNat:
        return Sort::Nat();
      case Value::Kind::kEndpoint:
        return Sort::Endpoint();
      case Value::Kind::kTuple: {
        std::vector<Sort> elems;
        for (const Value& x : v.elems()) elems.push_back(self(x, self));
        return Sort::Tuple(std::move(elems));
      }
    }
    return Sort::Any();
  };
  switch (e->op) {
    case Op::kLit:
      return sort_of_value(e->lit, sort_of_value);
    case Op::kName: {
      auto it = gamma.find(e->name);
      if (it == gamma.end()) throw EvalError("unbound name " + e->name);
      return it->second;
    }
    case Op::kAdd:
    case Op::kMod:
      for (const Expr& a : e->args) {
        if (!IsSubsort(SortOf(a, gamma), Sort::Nat()))
          throw EvalError("operand of " + std::string(OpText(e->op)) +
                          " is not Nat: " + ToString(a));
      }
      return Sort::Nat();
    case Op::kEq:
    case Op::kNe: {
      Sort a = SortOf(e->args[0], gamma);
      Sort b = SortOf(e->args[1], gamma);
      if (!Compatible(a, b))
        throw EvalError("incomparable sorts " + a.ToString() + " and " +
                        b.ToString());
      return Sort::Bool();
    }
    case Op::kLt:
    case Op::kLe:
    case Op::kGt:
    case Op::kGe:
      for (const Expr& a : e->args) {
        if (!IsSubsort(SortOf(a, gamma), Sort::Nat()))
          throw EvalError("ordered comparison on non-Nat " + ToString(a));
      }
      return Sort::Bool();
    case Op::kAnd:
    case Op::kOr:
    case Op::kNot:
      for (const Expr& a : e->args) {
        if (!IsSubsort(SortOf(a, gamma), Sort::Bool()))
          throw EvalError("boolean operator on non-Bool " + ToString(a));
      }
      return Sort::Bool();
    case Op::kTuple: {
      std::vector<Sort> elems;
      for (const Expr& a : e->args) elems.push_back(SortOf(a, gamma));
      return Sort::Tuple(std::move(elems));
    }
    case Op::kApply: {
      const Function* fn = FindFunction(e->name);
      if (!fn) throw EvalError("unknown function " + e->name);
      if (fn->arity >= 0 && fn->arity != static_cast<int>(e->args.size()))
        throw EvalError("arity mismatch for " + e->name);
      std::vector<Sort> sorts;
      for (const Expr& a : e->args) sorts.push_back(SortOf(a, gamma));
      return fn->sort(sorts, e->args);
    }
  }
  throw EvalError("bad expression");
}

bool CheckSort(const Expr& e, const Sort& s, const SortEnv& gamma) {
  try {
    if (e->op == Op::kLit) return e->lit.HasSort(s);
    if (e->op == Op::kTuple && s.kind == SortKind::kTuple) {
      if (e->args.size() != s.elems.size()) return false;
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (!CheckSort(e->args[i], s.elems[i], gamma)) return false;
      }
      return true;
    }
    return IsSubsort(SortOf(e, gamma), s);
  } catch (const EvalError&) {
    return false;
  }
}

std::set<std::string> FreeNames(const Expr& e) {
  std::set<std::string> out;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (x->op == Op::kName) out.insert(x->name);
    for (const Expr& a : x->args) walk(a);
  };
  walk(e);
  return out;
}

bool Mentions(const Expr& e, const std::string& name) {
  if (e->op == Op::kName) return e->name == name;
  for (const Expr& a : e->args) {
    if (Mentions(a, name)) return true;
  }
  return false;
}

Expr Subst(const Expr& e, const std::string& x, const Expr& v) {
  if (e->op == Op::kName) return e->name == x ? v : e;
  if (e->args.empty()) return e;
  bool changed = false;
  std::vector<Expr> args;
  args.reserve(e->args.size());
  for (const Expr& a : e->args) {
    args.push_back(Subst(a, x, v));
    changed |= args.back() != a;
  }
  if (!changed) return e;
  ExprNode n = *e;
  n.args = std::move(args);
  return Make(std::move(n));
}

bool Equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->args.size() != b->args.size()) return false;
  if (a->op == Op::kLit && !(a->lit == b->lit)) return false;
  if ((a->op == Op::kName || a->op == Op::kApply) && a->name != b->name)
    return false;
  for (size_t i = 0; i < a->args.size(); ++i) {
    if (!Equal(a->args[i], b->args[i])) return false;
  }
  return true;
}

bool IsLiteral(const Expr& e) { return e->op == Op::kLit; }

std::string ToString(const Expr& e) {
  switch (e->op) {
    case Op::kLit:
      return e->lit.ToString();
    case Op::kName:
      return e->name;
    case Op::kNot:
      return "not " + Wrap(e->args[0], 4);
    case Op::kTuple: {
      std::string out = "(";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) out += ", ";
        out += ToString(e->args[i]);
      }
      if (e->args.size() == 1) out += ",";
      return out + ")";
    }
    case Op::kApply: {
      std::string out = e->name + "(";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) out += ", ";
        out += ToString(e->args[i]);
      }
      return out + ")";
    }
    default: {
      int p = Precedence(e);
      // Comparisons are non-associative: both sides need a tighter level.
      int left = p == 4 ? 5 : p;
      return Wrap(e->args[0], left) + " " + OpText(e->op) + " " +
             Wrap(e->args[1], p + 1);
    }
  }
}

bool CollectModuli(const Expr& e, const std::string& name,
                   std::set<int64_t>* moduli) {
  if (e->op == Op::kMod && Mentions(e->args[0], name) &&
      IsLiteral(e->args[1]) &&
      e->args[1]->lit.kind() == Value::Kind::kNat &&
      e->args[1]->lit.as_nat() > 0) {
    moduli->insert(e->args[1]->lit.as_nat());
    return true;
  }
  if (e->op == Op::kName) return e->name != name;
  for (const Expr& a : e->args) {
    if (!CollectModuli(a, name, moduli)) return false;
  }
  return true;
}

void RegisterFunction(const std::string& name, Function fn) {
  std::lock_guard<std::mutex> lock(RegistryMutex());
  Registry()[name] = std::move(fn);
}

const Function* FindFunction(const std::string& name) {
  auto& r = Registry();
  auto it = r.find(name);
  return it == r.end() ? nullptr : &it->second;
}

Value BestOf(const Value& k) {
  std::map<int64_t, int> freq;
  for (const Value& v : k.elems()) {
    if (v.is_bottom()) continue;
    freq[v.as_nat()]++;
  }
  if (freq.empty()) throw EvalError("best of an empty knowledge vector");
  int64_t best = freq.begin()->first;
  int count = freq.begin()->second;
  for (const auto& [value, c] : freq) {
    if (c > count) {  // strict: ties stay with the smaller value
      best = value;
      count = c;
    }
  }
  return Value::Nat(best);
}

int64_t CountAck(const Value& k) {
  int64_t n = 0;
  for (const Value& v : k.elems()) {
    if (v.kind() == Value::Kind::kBool && v.as_bool()) ++n;
  }
  return n;
}

int64_t Known(const Value& k) {
  int64_t n = 0;
  for (const Value& v : k.elems()) {
    if (!v.is_bottom()) ++n;
  }
  return n;
}

}  // namespace ftmpst
