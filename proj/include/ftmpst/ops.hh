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

#ifndef FTMPST_OPS_HH_
#define FTMPST_OPS_HH_

#include <set>
#include <string>
#include <utility>

#include "ftmpst/syntax.hh"

namespace ftmpst {

/** An actor s[p]: one participant's endpoint in session s. */
struct Actor {
  std::string session;
  Role role = 0;
  auto operator<=>(const Actor&) const = default;
  std::string ToString() const {
    return session + "[" + std::to_string(role) + "]";
  }
};

/** The message queue s[from -> to]. */
struct QueueKey {
  std::string session;
  Role from = 0, to = 0;
  auto operator<=>(const QueueKey&) const = default;
  std::string ToString() const {
    return session + "[" + std::to_string(from) + "->" + std::to_string(to) +
           "]";
  }
};

// Substitution. All variants are capture avoiding: a binder that would
// capture a free name of the replacement is renamed first.

/** P{v/x} for a value-level name x (also renames channels if v is a name). */
Proc Subst(const Proc& P, const std::string& x, const Expr& v);
/** P{Q/X} for a process variable X. */
Proc SubstVar(const Proc& P, const std::string& X, const Proc& Q);
Local Subst(const Local& T, const std::string& x, const Expr& v);
Local SubstVar(const Local& T, const std::string& t, const Local& U);
Global Subst(const Global& G, const std::string& x, const Expr& v);
Global SubstVar(const Global& G, const std::string& t, const Global& U);

std::set<std::string> FreeNames(const Proc& P);
std::set<std::string> FreeVars(const Proc& P);
std::set<std::string> FreeNames(const Local& T);
std::set<std::string> FreeVars(const Local& T);
std::set<std::string> FreeNames(const Global& G);
std::set<std::string> FreeVars(const Global& G);

/** Fresh identifier derived from base that avoids every name in avoid. */
std::string Fresh(const std::string& base, const std::set<std::string>& avoid);

std::set<Role> Roles(const Global& G);
std::set<Role> Roles(const Local& T);

/** Actors s[p] with s free in P whose role is a closed expression. */
std::set<Actor> Actors(const Proc& P);

bool Nsr(const Proc& P);
bool Unr(const Proc& P);
bool Nsr(const Local& T);
bool Unr(const Local& T);

/** No action prefix, loop, request/accept or call/exit. Messages left in
 * queues are not prefixes: a message to a crashed role may stay forever. */
bool IsPrefixFree(const Proc& P);

/**
 * Normal form modulo structural congruence: restrictions extruded to the
 * front, parallel flattened and sorted, 0 and mu(X,c=n).0 dropped, applied
 * recursively under every prefix.
 */
Proc Normalize(const Proc& P);

/** Canonical text of P with every bound name renamed by binding order. */
std::string AlphaKey(const Proc& P);
std::string AlphaKey(const Local& T);

bool Congruent(const Proc& P, const Proc& Q);
bool AlphaEqual(const Local& a, const Local& b);

/** Stable 64-bit FNV-1a hash. */
uint64_t Fnv1a(const std::string& text);

}  // namespace ftmpst

#endif  // FTMPST_OPS_HH_
