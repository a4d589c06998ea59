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

#ifndef FTMPST_PROJECTION_HH_
#define FTMPST_PROJECTION_HH_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftmpst/syntax.hh"

namespace ftmpst {

class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * G restricted to role p. Uninvolved roles of a branching require equal
 * projections of every branch (plain merge). A case whose scrutinee is
 * closed is resolved; a case whose branches project equally collapses.
 */
Local Project(const Global& G, Role p);

/** Project(G, p) for every p in Roles(G). */
std::map<Role, Local> ProjectAll(const Global& G);

struct WellFormedness {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/**
 * Guardedness of type variables and calls, calls confined to the program of
 * their loop, no free type variables (in particular inside loops), loop
 * identifiers that mention every enclosing counter and are pairwise
 * distinct, and projectability onto every role.
 */
WellFormedness WellFormed(const Global& G);

}  // namespace ftmpst

#endif  // FTMPST_PROJECTION_HH_
