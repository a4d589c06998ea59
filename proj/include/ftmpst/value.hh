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

#ifndef FTMPST_VALUE_HH_
#define FTMPST_VALUE_HH_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftmpst {

/**
 * Sorts of values. kAny is internal: it is the inferred sort of the absent
 * value and is compatible with every sort; it never appears in source text.
 */
enum class SortKind { kBool, kNat, kBel, kAck, kTuple, kEndpoint, kAny };

struct Sort {
  SortKind kind = SortKind::kNat;
  std::vector<Sort> elems;  // kTuple only

  static Sort Bool() { return {SortKind::kBool, {}}; }
  static Sort Nat() { return {SortKind::kNat, {}}; }
  static Sort Bel() { return {SortKind::kBel, {}}; }
  static Sort Ack() { return {SortKind::kAck, {}}; }
  static Sort Endpoint() { return {SortKind::kEndpoint, {}}; }
  static Sort Any() { return {SortKind::kAny, {}}; }
  static Sort Tuple(std::vector<Sort> elems) {
    return {SortKind::kTuple, std::move(elems)};
  }

  bool operator==(const Sort& other) const = default;
  std::string ToString() const;
};

/**
 * Subsorting: Bel <= Nat, Ack <= Bool, Any <= everything, tuples pointwise.
 */
bool IsSubsort(const Sort& sub, const Sort& super);

/** Least common supersort if one exists; used for comparison operands. */
bool Compatible(const Sort& a, const Sort& b);

class Value {
 public:
  enum class Kind { kBottom, kBool, kNat, kTuple, kEndpoint };

  Value() : kind_(Kind::kBottom) {}

  static Value Bottom() { return Value(); }
  static Value Bool(bool b);
  static Value Nat(int64_t n);
  static Value Tuple(std::vector<Value> elems);
  static Value Endpoint(std::string channel, int role);

  Kind kind() const { return kind_; }
  bool is_bottom() const { return kind_ == Kind::kBottom; }
  bool as_bool() const;
  int64_t as_nat() const;
  const std::vector<Value>& elems() const;
  const std::string& channel() const { return channel_; }
  int role() const { return static_cast<int>(nat_); }

  /** True iff this value inhabits sort s (bottom inhabits every sort). */
  bool HasSort(const Sort& s) const;

  bool operator==(const Value& other) const;
  bool operator!=(const Value& other) const { return !(*this == other); }
  bool operator<(const Value& other) const;

  std::string ToString() const;

 private:
  Kind kind_;
  bool bool_ = false;
  int64_t nat_ = 0;
  std::vector<Value> elems_;
  std::string channel_;
};

/** Raised on ill-sorted operator application or unbound names. */
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ftmpst

#endif  // FTMPST_VALUE_HH_
