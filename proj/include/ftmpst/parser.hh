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

#ifndef FTMPST_PARSER_HH_
#define FTMPST_PARSER_HH_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftmpst/syntax.hh"

namespace ftmpst {

struct SourcePos {
  int line = 1;
  int col = 1;
  size_t offset = 0;
};

/** Syntax or declaration error; the message already contains the position. */
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, SourcePos pos)
      : std::runtime_error(what), pos_(pos) {}
  const SourcePos& pos() const { return pos_; }

 private:
  SourcePos pos_;
};

enum class DeclKind { kGlobal, kLocal, kProcess };

struct Declaration {
  std::string name;
  DeclKind kind = DeclKind::kProcess;
  Global global;
  Local local;
  Proc proc;
  SourcePos pos;
};

/**
 * A parsed .ftmpst file. Statements:
 *   def NAME = TERM;        (global type if it parses as one, else process)
 *   global NAME = G;  local NAME = T;  process NAME = P;
 *   label SYM : SORT;
 *   channel NAME : G;       (G inline or the name of a global declaration)
 *   session NAME : G;       (an already running session s typed by G)
 * Line comments start with "//".
 */
struct SourceFile {
  std::vector<Declaration> decls;
  std::map<std::string, Sort> labels;
  std::map<std::string, Global> channels;
  std::map<std::string, Global> sessions;

  const Declaration* Find(const std::string& name) const;
};

SourceFile Parse(const std::string& text);
SourceFile ParseFile(const std::string& path);

Global ParseGlobal(const std::string& text);
Local ParseLocal(const std::string& text);
Proc ParseProcess(const std::string& text);
Expr ParseExpr(const std::string& text);

/** Pretty printers; parse(pretty(x)) is structurally equal to x. */
inline std::string Pretty(const Global& g) { return ToString(g); }
inline std::string Pretty(const Local& t) { return ToString(t); }
inline std::string Pretty(const Proc& p) { return ToString(p); }

}  // namespace ftmpst

#endif  // FTMPST_PARSER_HH_
