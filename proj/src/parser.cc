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

#include "ftmpst/parser.hh"

#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace ftmpst {

namespace {

enum class Tok { kIdent, kNumber, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  SourcePos pos;
};

const std::set<std::string>& Keywords() {
  static const std::set<std::string> kw = {
      "end",  "mu",   "loop", "call",    "exit",    "case",  "of",
      "default", "deleg", "req", "acc",  "if",      "then",  "else",
      "new",  "crash", "true", "false",  "bot",     "not",   "and",
      "or",   "mod",  "def",  "label",   "channel", "global", "local",
      "process", "session"};
  return kw;
}

std::vector<Token> Lex(const std::string& text) {
  static const char* kMulti[] = {"->", "=>", "!!", "??", "!=", "<=", ">="};
  std::vector<Token> out;
  SourcePos pos;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++pos.line;
        pos.col = 1;
      } else {
        ++pos.col;
      }
      pos.offset = i + 1;
    }
  };
  while (i < text.size()) {
    char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      advance(1);
      continue;
    }
    if (ch == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.pos = pos;
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_' || text[j] == '\'')) {
        ++j;
      }
      tok.kind = Tok::kIdent;
      tok.text = text.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
        ++j;
      tok.kind = Tok::kNumber;
      tok.text = text.substr(i, j - i);
      advance(j - i);
    } else {
      tok.kind = Tok::kPunct;
      for (const char* m : kMulti) {
        if (text.compare(i, 2, m) == 0) tok.text = m;
      }
      if (tok.text.empty()) {
        if (std::string("(){}[],.;:|!?<>=+").find(ch) == std::string::npos) {
          std::ostringstream msg;
          msg << "line " << pos.line << ":" << pos.col << " (offset "
              << pos.offset << "): unexpected character '" << ch << "'";
          throw ParseError(msg.str(), pos);
        }
        tok.text = std::string(1, ch);
      }
      advance(tok.text.size());
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.pos = pos;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(Lex(text)) {}

  // ----- token helpers -----------------------------------------------------

  const Token& Peek(size_t k = 0) const {
    size_t at = std::min(i_ + k, toks_.size() - 1);
    return toks_[at];
  }
  bool AtEnd() const { return Peek().kind == Tok::kEnd; }
  bool Is(const std::string& text, size_t k = 0) const {
    const Token& t = Peek(k);
    return t.kind != Tok::kEnd && t.kind != Tok::kNumber && t.text == text;
  }
  bool IsIdent(size_t k = 0) const {
    const Token& t = Peek(k);
    return t.kind == Tok::kIdent && !Keywords().count(t.text);
  }
  bool Accept(const std::string& text) {
    if (!Is(text)) return false;
    ++i_;
    return true;
  }
  [[noreturn]] void Fail(const std::string& expected) const {
    const Token& t = Peek();
    std::ostringstream msg;
    msg << "line " << t.pos.line << ":" << t.pos.col << " (offset "
        << t.pos.offset << "): expected " << expected << ", found "
        << (t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'");
    throw ParseError(msg.str(), t.pos);
  }
  void Expect(const std::string& text) {
    if (!Accept(text)) Fail("'" + text + "'");
  }
  std::string Ident() {
    if (!IsIdent()) Fail("identifier");
    return toks_[i_++].text;
  }
  int64_t Number() {
    if (Peek().kind != Tok::kNumber) Fail("number");
    return std::stoll(toks_[i_++].text);
  }
  size_t Mark() const { return i_; }
  void Reset(size_t m) { i_ = m; }
  SourcePos Pos() const { return Peek().pos; }
  void ExpectEnd() {
    if (!AtEnd()) Fail("end of input");
  }

  // ----- expressions -------------------------------------------------------

  // no_gt: stop before a top-level '>' or '>=' (angle-bracket payloads).
  Expr ParseExpression(bool no_gt = false) { return ParseOr(no_gt); }

  Expr ParseOr(bool no_gt) {
    Expr a = ParseAnd(no_gt);
    while (Accept("or")) a = Bin(Op::kOr, a, ParseAnd(no_gt));
    return a;
  }
  Expr ParseAnd(bool no_gt) {
    Expr a = ParseNot(no_gt);
    while (Accept("and")) a = Bin(Op::kAnd, a, ParseNot(no_gt));
    return a;
  }
  Expr ParseNot(bool no_gt) {
    if (Accept("not")) return Not(ParseNot(no_gt));
    return ParseCmp(no_gt);
  }
  Expr ParseCmp(bool no_gt) {
    Expr a = ParseAdd();
    static const std::pair<const char*, Op> kCmp[] = {
        {"=", Op::kEq},  {"!=", Op::kNe}, {"<=", Op::kLe},
        {">=", Op::kGe}, {"<", Op::kLt},  {">", Op::kGt}};
    for (const auto& [text, op] : kCmp) {
      if (no_gt && (op == Op::kGt || op == Op::kGe)) continue;
      if (Is(text)) {
        ++i_;
        return Bin(op, a, ParseAdd());
      }
    }
    return a;
  }
  Expr ParseAdd() {
    Expr a = ParseMod();
    while (Accept("+")) a = Bin(Op::kAdd, a, ParseMod());
    return a;
  }
  Expr ParseMod() {
    Expr a = ParseAtom();
    while (Accept("mod")) a = Bin(Op::kMod, a, ParseAtom());
    return a;
  }
  Expr ParseAtom() {
    if (Peek().kind == Tok::kNumber) return Nat(Number());
    if (Accept("true")) return Lit(Value::Bool(true));
    if (Accept("false")) return Lit(Value::Bool(false));
    if (Accept("bot")) return Lit(Value::Bottom());
    if (IsIdent()) {
      std::string name = Ident();
      if (!Accept("(")) return Name(name);
      std::vector<Expr> args;
      if (!Accept(")")) {
        do {
          args.push_back(ParseExpression());
        } while (Accept(","));
        Expect(")");
      }
      return Apply(name, std::move(args));
    }
    if (Accept("(")) {
      std::vector<Expr> elems;
      bool trailing = false;
      if (Accept(")")) return FoldTuple({});
      elems.push_back(ParseExpression());
      while (Accept(",")) {
        if (Is(")")) {
          trailing = true;
          break;
        }
        elems.push_back(ParseExpression());
      }
      Expect(")");
      if (elems.size() == 1 && !trailing) return elems[0];
      // Tuples of literals fold to one literal so printing round-trips.
      return FoldTuple(std::move(elems));
    }
    Fail("expression");
  }
  static Expr FoldTuple(std::vector<Expr> elems) {
    std::vector<Value> vals;
    for (const Expr& e : elems) {
      if (e->op != Op::kLit) return TupleExpr(std::move(elems));
      vals.push_back(e->lit);
    }
    return Lit(Value::Tuple(std::move(vals)));
  }

  // ----- shared pieces -----------------------------------------------------

  Sort ParseSort() {
    if (Accept("(")) {
      std::vector<Sort> elems;
      if (!Accept(")")) {
        elems.push_back(ParseSort());
        while (Accept(",")) {
          if (Is(")")) break;
          elems.push_back(ParseSort());
        }
        Expect(")");
      }
      return Sort::Tuple(std::move(elems));
    }
    static const std::map<std::string, Sort> kSorts = {
        {"Bool", Sort::Bool()}, {"Nat", Sort::Nat()},
        {"Bel", Sort::Bel()},   {"Ack", Sort::Ack()},
        {"Endpoint", Sort::Endpoint()}, {"Any", Sort::Any()}};
    if (Peek().kind == Tok::kIdent) {
      auto it = kSorts.find(Peek().text);
      if (it != kSorts.end()) {
        ++i_;
        return it->second;
      }
    }
    Fail("sort");
  }

  Label ParseLabel() {
    Label l;
    if (Accept("(")) {
      l.sym = Ident();
      while (Accept(",")) l.rt.push_back(ParseExpression());
      Expect(")");
      return l;
    }
    l.sym = Ident();
    return l;
  }

  RoleSet ParseRoleSet() {
    Expect("{");
    std::vector<Role> roles;
    if (!Accept("}")) {
      do {
        roles.push_back(static_cast<Role>(Number()));
      } while (Accept(","));
      Expect("}");
    }
    return MakeRoleSet(std::move(roles));
  }

  // ----- global types ------------------------------------------------------

  Global ParseG() {
    if (Accept("end")) return global::End();
    if (Accept("mu")) {
      Expect("(");
      std::string t = Ident();
      Expect(",");
      std::string c = Ident();
      Expect(")");
      Expect(".");
      return global::Rec(t, c, ParseG());
    }
    if (Accept("loop")) {
      Expect("(");
      RoleSet r = ParseRoleSet();
      Expect(",");
      Expr id = ParseExpression();
      Expect(",");
      std::string c = Ident();
      Expect(";");
      Sort s0 = ParseSort();
      Expect(")");
      Expect("{");
      Global g0 = ParseG();
      Expect(";");
      Sort s2 = ParseSort();
      Expect(":");
      Global g2 = ParseG();
      Expect("}");
      return global::Loop(r, id, c, s0, g0, s2, g2);
    }
    if (Accept("call")) {
      Expect("(");
      Expr id = ParseExpression();
      Expect(")");
      return global::Call(id);
    }
    if (Accept("case")) {
      Expr e = ParseExpression();
      Expect("of");
      Expect("{");
      std::vector<int64_t> keys;
      std::vector<Global> branches;
      do {
        keys.push_back(Number());
        Expect(":");
        branches.push_back(ParseG());
      } while (Accept(","));
      Expect("}");
      return global::Case(e, keys, branches);
    }
    if (Accept("(")) {
      Global a = ParseG();
      if (Accept("|")) {
        Global b = ParseG();
        Expect(")");
        return global::Par(a, b);
      }
      Expect(")");
      return a;
    }
    if (IsIdent()) return global::Var(Ident());
    if (Peek().kind != Tok::kNumber) Fail("global type");
    Role p = static_cast<Role>(Number());
    if (Accept("=>")) {
      RoleSet r = ParseRoleSet();
      Expect(":");
      return global::WBranch(p, r, ParseGBranches(true));
    }
    Expect("->");
    Role q = static_cast<Role>(Number());
    Expect(":");
    if (Accept("<")) {
      Sort s = ParseSort();
      Expect(">");
      Expect(".");
      return global::Comm(p, q, s, ParseG());
    }
    if (Is("{")) return global::Branch(p, q, ParseGBranches(false));
    if (Accept("deleg")) {
      Expect("<");
      Role dr = static_cast<Role>(Number());
      Expect(":");
      Local dtype = ParseL();
      Expect(">");
      Expect(".");
      return global::Deleg(p, q, dr, dtype, ParseG());
    }
    Label l = ParseLabel();
    Expect("<");
    Sort s = ParseSort();
    Expect(">");
    Expect(".");
    return global::UComm(p, q, l, s, ParseG());
  }

  template <typename Branch, typename ContFn>
  std::vector<Branch> ParseBranchList(bool weak, ContFn cont) {
    Expect("{");
    std::vector<Branch> out;
    bool saw_default = false;
    do {
      if (weak && Accept("default")) saw_default = true;
      Branch b;
      b.label = ParseLabel();
      Expect(".");
      b.cont = cont();
      out.push_back(std::move(b));
      if (saw_default) break;
    } while (Accept(","));
    if (weak && !saw_default) Fail("'default' branch");
    Expect("}");
    return out;
  }

  std::vector<GBranch> ParseGBranches(bool weak) {
    return ParseBranchList<GBranch>(weak, [this] { return ParseG(); });
  }

  // ----- local types -------------------------------------------------------

  Local ParseL() {
    if (Accept("end")) return local::End();
    if (Accept("mu")) {
      Expect("(");
      std::string t = Ident();
      Expect(",");
      std::string c = Ident();
      Expect("=");
      int64_t n = Number();
      Expect(")");
      Expect(".");
      return local::Rec(t, c, n, ParseL());
    }
    if (Accept("loop")) {
      Expect("(");
      RoleSet r = ParseRoleSet();
      Expect(",");
      Expr id = ParseExpression();
      Expect(",");
      std::string c = Ident();
      Expect("=");
      int64_t n = Number();
      Expect(";");
      Sort s0 = ParseSort();
      Expect(")");
      Expect("{");
      Local t0 = ParseL();
      Expect(";");
      Local t1 = ParseL();
      Expect(";");
      Sort s2 = ParseSort();
      Expect(":");
      Local t2 = ParseL();
      Expect("}");
      return local::Loop(r, id, c, n, s0, t0, t1, s2, t2);
    }
    if (Accept("call")) {
      Expect("(");
      Expr id = ParseExpression();
      Expect(")");
      return local::Call(id);
    }
    if (Accept("case")) {
      Expr e = ParseExpression();
      Expect("of");
      Expect("{");
      std::vector<int64_t> keys;
      std::vector<Local> branches;
      do {
        keys.push_back(Number());
        Expect(":");
        branches.push_back(ParseL());
      } while (Accept(","));
      Expect("}");
      return local::Case(e, keys, branches);
    }
    if (Is("{")) {
      RoleSet r = ParseRoleSet();
      Expect("!!");
      return local::WSel(r, ParseLBranches(false));
    }
    if (Accept("(")) {
      Local t = ParseL();
      Expect(")");
      return t;
    }
    if (IsIdent()) return local::Var(Ident());
    if (Peek().kind != Tok::kNumber) Fail("local type");
    Role p = static_cast<Role>(Number());
    if (Accept("??")) return local::WBran(p, ParseLBranches(true));
    bool send = Accept("!");
    if (!send) Expect("?");
    if (Accept("<")) {
      Sort s = ParseSort();
      Expect(">");
      Expect(".");
      Local next = ParseL();
      return send ? local::Send(p, s, next) : local::Recv(p, s, next);
    }
    if (Is("{")) {
      auto b = ParseLBranches(false);
      return send ? local::Sel(p, b) : local::Bran(p, b);
    }
    if (Accept("deleg")) {
      Expect("<");
      Role dr = static_cast<Role>(Number());
      Expect(":");
      Local dtype = ParseL();
      Expect(">");
      Expect(".");
      Local next = ParseL();
      return send ? local::DSend(p, dr, dtype, next)
                  : local::DRecv(p, dr, dtype, next);
    }
    Label l = ParseLabel();
    Expect("<");
    Sort s = ParseSort();
    Expect(">");
    Expect(".");
    Local next = ParseL();
    return send ? local::USend(p, l, s, next) : local::URecv(p, l, s, next);
  }

  std::vector<LBranch> ParseLBranches(bool weak) {
    return ParseBranchList<LBranch>(weak, [this] { return ParseL(); });
  }

  // ----- processes ---------------------------------------------------------

  // A parallel composition without surrounding parentheses.
  Proc ParsePPar() {
    std::vector<Proc> kids{ParseP()};
    while (Accept("|")) kids.push_back(ParseP());
    return kids.size() == 1 ? kids[0] : proc::Par(std::move(kids));
  }

  Proc ParseP() {
    if (Peek().kind == Tok::kNumber && Peek().text == "0") {
      ++i_;
      return proc::Nil();
    }
    if (Accept("crash")) return proc::Crash();
    if (Accept("(")) {
      Proc p = ParsePPar();
      Expect(")");
      return p;
    }
    if (Is("req") || Is("acc")) {
      bool req = Accept("req");
      if (!req) Expect("acc");
      std::string a = Ident();
      Expect("[");
      int64_t n = Number();
      Expect("]");
      Expect("(");
      std::string s = Ident();
      Expect(")");
      Expect(".");
      Proc next = ParseP();
      return req ? proc::Req(a, n, s, next) : proc::Acc(a, n, s, next);
    }
    if (Accept("mu")) {
      Expect("(");
      std::string X = Ident();
      Expect(",");
      std::string c = Ident();
      Expect("=");
      int64_t n = Number();
      Expect(")");
      Expect(".");
      return proc::Rec(X, c, n, ParseP());
    }
    if (Accept("loop")) {
      Expect("(");
      std::string s = Ident();
      Expect("[");
      Expr p = ParseExpression();
      Expect("]");
      Expect("[");
      RoleSet r = ParseRoleSet();
      Expect("]");
      Expect(",");
      Expr id = ParseExpression();
      Expect(",");
      std::string c = Ident();
      Expect("=");
      int64_t n = Number();
      Expect(",");
      Expect("(");
      std::string x = Ident();
      Expect(")");
      Expect(".");
      Proc p0 = ParsePPar();
      Expect(",");
      Proc p1 = ParsePPar();
      Expect(",");
      Expect("(");
      std::string y = Ident();
      Expect(")");
      Expect(".");
      Proc p2 = ParsePPar();
      Expect(")");
      return proc::Loop(s, p, r, id, c, n, x, p0, p1, y, p2);
    }
    if (Is("call") || Is("exit")) {
      bool call = Accept("call");
      if (!call) Expect("exit");
      Expect("(");
      Expr id = ParseExpression();
      Expect(",");
      Expr v = ParseExpression();
      Expect(")");
      return call ? proc::Call(id, v) : proc::Exit(id, v);
    }
    if (Accept("if")) {
      Expr cond = ParseExpression();
      Expect("then");
      Proc a = ParseP();
      Expect("else");
      Proc b = ParseP();
      return proc::If(cond, a, b);
    }
    if (Accept("new")) {
      std::string x = Ident();
      std::optional<Sort> sort;
      if (Accept(":")) sort = ParseSort();
      Expect(".");
      return proc::Res(x, sort, ParseP());
    }
    if (!IsIdent()) Fail("process");
    std::string s = Ident();
    if (!Accept("[")) return proc::Var(s);
    Expr p = ParseExpression();
    if (Accept("->")) {
      Expr q = ParseExpression();
      Expect("]");
      Expect(":");
      return ParseQueue(s, p, q);
    }
    Expect(",");
    if (Is("{")) {
      RoleSet r = ParseRoleSet();
      Expect("]");
      Expect("!!");
      Expect("{");
      Label l = ParseLabel();
      Expect("}");
      Expect(".");
      return proc::WSel(s, p, r, l, ParseP());
    }
    Expr q = ParseExpression();
    Expect("]");
    if (Accept("??")) {
      auto b = ParsePBranches(true);
      return proc::WBran(s, p, q, b);
    }
    if (Accept("!")) {
      if (Accept("<")) {
        Expr e = ParseExpression(true);
        Expect(">");
        Expect(".");
        return proc::Send(s, p, q, e, ParseP());
      }
      if (Accept("{")) {
        Label l = ParseLabel();
        Expect("}");
        Expect(".");
        return proc::Sel(s, p, q, l, ParseP());
      }
      if (Accept("deleg")) {
        Expect("<");
        std::string dch = Ident();
        Expect("[");
        Expr dr = ParseExpression();
        Expect("]");
        Expect(">");
        Expect(".");
        return proc::DSend(s, p, q, dch, dr, ParseP());
      }
      Label l = ParseLabel();
      Expect("<");
      Expr e = ParseExpression(true);
      Expect(">");
      Expect(".");
      return proc::USend(s, p, q, l, e, ParseP());
    }
    Expect("?");
    if (Is("(") && IsIdent(1) && Is(")", 2) && Is(".", 3)) {
      ++i_;
      std::string x = Ident();
      Expect(")");
      Expect(".");
      return proc::Recv(s, p, q, x, ParseP());
    }
    if (Is("{")) return proc::Bran(s, p, q, ParsePBranches(false));
    if (Accept("deleg")) {
      Expect("(");
      std::string x = Ident();
      Expect("[");
      std::string y = Ident();
      Expect("]");
      Expect(")");
      Expect(".");
      return proc::DRecv(s, p, q, x, y, ParseP());
    }
    Label l = ParseLabel();
    Expect("<");
    Expr dv = ParseExpression(true);
    Expect(">");
    Expect("(");
    std::string x = Ident();
    Expect(")");
    Expect(".");
    return proc::URecv(s, p, q, l, dv, x, ParseP());
  }

  std::vector<PBranch> ParsePBranches(bool weak) {
    return ParseBranchList<PBranch>(weak, [this] { return ParseP(); });
  }

  Value ClosedValue(const Expr& e) {
    auto v = TryEval(e);
    if (!v) Fail("closed value in message");
    return *v;
  }

  Label ClosedLabel(Label l) {
    for (Expr& e : l.rt) e = Lit(ClosedValue(e));
    return l;
  }

  Proc ParseQueue(const std::string& s, const Expr& p, const Expr& q) {
    auto from = EvalRole(p);
    auto to = EvalRole(q);
    if (!from || !to) Fail("closed queue roles");
    Expect("[");
    std::vector<Message> msgs;
    if (!Accept("]")) {
      do {
        msgs.push_back(ParseMessage());
      } while (Accept(","));
      Expect("]");
    }
    return proc::Queue(s, *from, *to, std::move(msgs));
  }

  Message ParseMessage() {
    std::string kind = Peek().text;
    if (Accept("exit")) {
      Expect("<");
      Value id = ClosedValue(ParseExpression());
      Expect(",");
      Value v = ClosedValue(ParseExpression(true));
      Expect(">");
      return Message::Exit(id, v);
    }
    if (Accept("deleg")) {
      Expect("<");
      std::string ch = Ident();
      Expect("[");
      int64_t r = Number();
      Expect("]");
      Expect(">");
      return Message::Deleg(ch, static_cast<Role>(r));
    }
    if (kind == "r" && Is("<", 1)) {
      ++i_;
      Expect("<");
      Value v = ClosedValue(ParseExpression(true));
      Expect(">");
      return Message::R(v);
    }
    if ((kind == "u" || kind == "rbr" || kind == "wbr") && Is(":", 1)) {
      ++i_;
      Expect(":");
      Label l = ClosedLabel(ParseLabel());
      if (kind == "rbr") return Message::BR(l);
      if (kind == "wbr") return Message::BW(l);
      Expect("<");
      Value v = ClosedValue(ParseExpression(true));
      Expect(">");
      return Message::U(l, v);
    }
    Fail("message");
  }

 private:
  std::vector<Token> toks_;
  size_t i_ = 0;
};

void CheckLabels(const Global& g, const SourceFile& file, SourcePos pos) {
  std::function<void(const Global&)> walk = [&](const Global& x) {
    if (x->kind == GKind::kUComm && !file.labels.count(x->l.sym)) {
      std::ostringstream msg;
      msg << "line " << pos.line << ":" << pos.col << " (offset " << pos.offset
          << "): label '" << x->l.sym << "' has no sort binding";
      throw ParseError(msg.str(), pos);
    }
    if (x->next) walk(x->next);
    if (x->cont) walk(x->cont);
    for (const auto& b : x->branches) walk(b.cont);
  };
  walk(g);
}

[[noreturn]] void DeclError(const std::string& what, SourcePos pos) {
  std::ostringstream msg;
  msg << "line " << pos.line << ":" << pos.col << " (offset " << pos.offset
      << "): " << what;
  throw ParseError(msg.str(), pos);
}

}  // namespace

const Declaration* SourceFile::Find(const std::string& name) const {
  for (const auto& d : decls) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

SourceFile Parse(const std::string& text) {
  Parser p(text);
  SourceFile file;
  std::vector<std::pair<Global, SourcePos>> to_check;
  while (!p.AtEnd()) {
    SourcePos pos = p.Pos();
    if (p.Accept("label")) {
      std::string sym = p.Ident();
      p.Expect(":");
      Sort s = p.ParseSort();
      p.Expect(";");
      if (file.labels.count(sym)) DeclError("duplicate label '" + sym + "'", pos);
      file.labels[sym] = s;
      continue;
    }
    bool is_channel = p.Is("channel");
    if (is_channel || p.Is("session")) {
      p.Accept(is_channel ? "channel" : "session");
      std::string a = p.Ident();
      p.Expect(":");
      Global g;
      if (p.IsIdent() && p.Is(";", 1)) {
        std::string ref = p.Ident();
        const Declaration* d = file.Find(ref);
        if (!d || d->kind != DeclKind::kGlobal)
          DeclError("'" + ref + "' is not a declared global type", pos);
        g = d->global;
      } else {
        g = p.ParseG();
        to_check.push_back({g, pos});
      }
      p.Expect(";");
      auto& table = is_channel ? file.channels : file.sessions;
      if (table.count(a))
        DeclError(std::string("duplicate ") +
                      (is_channel ? "channel" : "session") + " '" + a + "'",
                  pos);
      table[a] = g;
      continue;
    }
    Declaration d;
    d.pos = pos;
    std::string kw = p.Peek().text;
    if (!(p.Accept("def") || p.Accept("global") || p.Accept("local") ||
          p.Accept("process"))) {
      p.Fail("declaration");
    }
    d.name = p.Ident();
    p.Expect("=");
    if (kw == "global") {
      d.kind = DeclKind::kGlobal;
      d.global = p.ParseG();
    } else if (kw == "local") {
      d.kind = DeclKind::kLocal;
      d.local = p.ParseL();
    } else if (kw == "process") {
      d.kind = DeclKind::kProcess;
      d.proc = p.ParsePPar();
    } else {
      size_t mark = p.Mark();
      bool as_global = false;
      try {
        d.global = p.ParseG();
        as_global = p.Is(";");
      } catch (const ParseError&) {
        as_global = false;
      }
      if (as_global) {
        d.kind = DeclKind::kGlobal;
      } else {
        p.Reset(mark);
        d.kind = DeclKind::kProcess;
        d.global = nullptr;
        d.proc = p.ParsePPar();
      }
    }
    p.Expect(";");
    if (file.Find(d.name)) DeclError("duplicate declaration '" + d.name + "'", pos);
    if (d.kind == DeclKind::kGlobal) to_check.push_back({d.global, pos});
    file.decls.push_back(std::move(d));
  }
  for (const auto& [g, pos] : to_check) CheckLabels(g, file, pos);
  return file;
}

SourceFile ParseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

Global ParseGlobal(const std::string& text) {
  Parser p(text);
  Global g = p.ParseG();
  p.ExpectEnd();
  return g;
}

Local ParseLocal(const std::string& text) {
  Parser p(text);
  Local t = p.ParseL();
  p.ExpectEnd();
  return t;
}

Proc ParseProcess(const std::string& text) {
  Parser p(text);
  Proc P = p.ParsePPar();
  p.ExpectEnd();
  return P;
}

Expr ParseExpr(const std::string& text) {
  Parser p(text);
  Expr e = p.ParseExpression();
  p.ExpectEnd();
  return e;
}

}  // namespace ftmpst
