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

#include "ftmpst/value.hh"

#include <sstream>

namespace ftmpst {

std::string Sort::ToString() const {
  switch (kind) {
    case SortKind::kBool:
      return "Bool";
    case SortKind::kNat:
      return "Nat";
    case SortKind::kBel:
      return "Bel";
    case SortKind::kAck:
      return "Ack";
    case SortKind::kEndpoint:
      return "Endpoint";
    case SortKind::kAny:
      return "Any";
    case SortKind::kTuple: {
      std::string out = "(";
      for (size_t i = 0; i < elems.size(); ++i) {
        if (i) out += ", ";
        out += elems[i].ToString();
      }
      if (elems.size() == 1) out += ",";
      return out + ")";
    }
  }
  return "?";
}

bool IsSubsort(const Sort& sub, const Sort& super) {
  if (sub.kind == SortKind::kAny || super.kind == SortKind::kAny) return true;
  if (sub.kind == SortKind::kTuple || super.kind == SortKind::kTuple) {
    if (sub.kind != super.kind || sub.elems.size() != super.elems.size())
      return false;
    for (size_t i = 0; i < sub.elems.size(); ++i) {
      if (!IsSubsort(sub.elems[i], super.elems[i])) return false;
    }
    return true;
  }
  if (sub.kind == super.kind) return true;
  if (sub.kind == SortKind::kBel && super.kind == SortKind::kNat) return true;
  if (sub.kind == SortKind::kAck && super.kind == SortKind::kBool) return true;
  return false;
}

bool Compatible(const Sort& a, const Sort& b) {
  return IsSubsort(a, b) || IsSubsort(b, a);
}

Value Value::Bool(bool b) {
  Value v;
  v.kind_ = Kind::kBool;
  v.bool_ = b;
  return v;
}

Value Value::Nat(int64_t n) {
  if (n < 0) throw EvalError("negative natural " + std::to_string(n));
  Value v;
  v.kind_ = Kind::kNat;
  v.nat_ = n;
  return v;
}

Value Value::Tuple(std::vector<Value> elems) {
  Value v;
  v.kind_ = Kind::kTuple;
  v.elems_ = std::move(elems);
  return v;
}

Value Value::Endpoint(std::string channel, int role) {
  Value v;
  v.kind_ = Kind::kEndpoint;
  v.channel_ = std::move(channel);
  v.nat_ = role;
  return v;
}

bool Value::as_bool() const {
  if (kind_ != Kind::kBool) throw EvalError("expected Bool, got " + ToString());
  return bool_;
}

int64_t Value::as_nat() const {
  if (kind_ != Kind::kNat) throw EvalError("expected Nat, got " + ToString());
  return nat_;
}

const std::vector<Value>& Value::elems() const {
  if (kind_ != Kind::kTuple)
    throw EvalError("expected tuple, got " + ToString());
  return elems_;
}

bool Value::HasSort(const Sort& s) const {
  if (kind_ == Kind::kBottom || s.kind == SortKind::kAny) return true;
  switch (s.kind) {
    case SortKind::kBool:
    case SortKind::kAck:
      return kind_ == Kind::kBool;
    case SortKind::kNat:
      return kind_ == Kind::kNat;
    case SortKind::kBel:
      return kind_ == Kind::kNat && nat_ <= 1;
    case SortKind::kEndpoint:
      return kind_ == Kind::kEndpoint;
    case SortKind::kTuple:
      if (kind_ != Kind::kTuple || elems_.size() != s.elems.size())
        return false;
      for (size_t i = 0; i < elems_.size(); ++i) {
        if (!elems_[i].HasSort(s.elems[i])) return false;
      }
      return true;
    case SortKind::kAny:
      return true;
  }
  return false;
}

bool Value::operator==(const Value& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::kBottom:
      return true;
    case Kind::kBool:
      return bool_ == other.bool_;
    case Kind::kNat:
      return nat_ == other.nat_;
    case Kind::kTuple:
      return elems_ == other.elems_;
    case Kind::kEndpoint:
      return channel_ == other.channel_ && nat_ == other.nat_;
  }
  return false;
}

bool Value::operator<(const Value& other) const {
  if (kind_ != other.kind_) return kind_ < other.kind_;
  switch (kind_) {
    case Kind::kBottom:
      return false;
    case Kind::kBool:
      return bool_ < other.bool_;
    case Kind::kNat:
      return nat_ < other.nat_;
    case Kind::kTuple:
      return elems_ < other.elems_;
    case Kind::kEndpoint:
      if (channel_ != other.channel_) return channel_ < other.channel_;
      return nat_ < other.nat_;
  }
  return false;
}

std::string Value::ToString() const {
  switch (kind_) {
    case Kind::kBottom:
      return "bot";
    case Kind::kBool:
      return bool_ ? "true" : "false";
    case Kind::kNat:
      return std::to_string(nat_);
    case Kind::kEndpoint:
      return channel_ + "[" + std::to_string(nat_) + "]";
    case Kind::kTuple: {
      std::string out = "(";
      for (size_t i = 0; i < elems_.size(); ++i) {
        if (i) out += ", ";
        out += elems_[i].ToString();
      }
      if (elems_.size() == 1) out += ",";
      return out + ")";
    }
  }
  return "?";
}

}  // namespace ftmpst
