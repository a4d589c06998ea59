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

#include "ftmpst/semantics.hh"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "ftmpst/projection.hh"

namespace ftmpst {

namespace {

using Binders = std::vector<std::pair<std::string, std::optional<Sort>>>;

constexpr struct {
  Rule rule;
  const char* name;
} kRuleNames[] = {
    {Rule::kInit, "Init"},     {Rule::kRSend, "RSend"},
    {Rule::kRGet, "RGet"},     {Rule::kUSend, "USend"},
    {Rule::kUGet, "UGet"},     {Rule::kUSkip, "USkip"},
    {Rule::kML, "ML"},         {Rule::kRSel, "RSel"},
    {Rule::kRBran, "RBran"},   {Rule::kWSel, "WSel"},
    {Rule::kWBran, "WBran"},   {Rule::kWSkip, "WSkip"},
    {Rule::kLCall, "LCall"},   {Rule::kLExitS, "LExitS"},
    {Rule::kLExitG, "LExitG"}, {Rule::kEDrop, "EDrop"},
    {Rule::kCrash, "Crash"},   {Rule::kIfT, "If-T"},
    {Rule::kIfF, "If-F"},      {Rule::kDeleg, "Deleg"},
    {Rule::kSRecv, "SRecv"},   {Rule::kRec, "Rec"},
};

void Decompose(const Proc& P, Binders* binders, std::vector<Proc>* comps) {
  Proc x = P;
  while (x->kind == PKind::kRes) {
    binders->push_back({x->x, x->sort});
    x = x->next;
  }
  if (x->kind == PKind::kPar) {
    *comps = x->kids;
  } else if (x->kind != PKind::kNil) {
    comps->push_back(x);
  }
}

Proc Compose(const Binders& binders, const std::vector<Proc>& comps) {
  Proc body;
  if (comps.empty()) {
    body = proc::Nil();
  } else if (comps.size() == 1) {
    body = comps.front();
  } else {
    body = proc::Par(comps);
  }
  for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
    body = proc::Res(it->first, it->second, body);
  }
  return body;
}

bool InSet(const RoleSet& r, Role x) {
  return std::binary_search(r.begin(), r.end(), x);
}

std::optional<Value> Closed(const Expr& e) {
  if (!e) return std::nullopt;
  return TryEval(e);
}

/** The label with its runtime expressions evaluated. */
std::optional<Label> ConcreteLabel(const Label& l) {
  Label out{l.sym, {}};
  for (const Expr& e : l.rt) {
    auto v = Closed(e);
    if (!v) return std::nullopt;
    out.rt.push_back(Lit(*v));
  }
  return out;
}

std::set<std::string> Identifiers(const std::string& text) {
  std::set<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    if (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_' || text[j] == '\'')) {
        ++j;
      }
      out.insert(text.substr(i, j - i));
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

Proc WithP1(const Proc& loop, const Proc& body) {
  PNode n = *loop;
  n.P1 = body;
  return std::make_shared<const PNode>(std::move(n));
}

struct Frame {
  std::string s;
  Role r;
  RoleSet R;
};

std::string ActorText(const std::string& s, Role r) {
  return Actor{s, r}.ToString();
}

std::string ValueKey(const Value& v) { return v.ToString(); }

}  // namespace

const char* RuleName(Rule r) {
  for (const auto& e : kRuleNames) {
    if (e.rule == r) return e.name;
  }
  return "?";
}

std::optional<Rule> RuleFromName(const std::string& name) {
  for (const auto& e : kRuleNames) {
    if (name == e.name) return e.rule;
  }
  return std::nullopt;
}

bool IsFailureRule(Rule r) {
  return r == Rule::kUSkip || r == Rule::kML || r == Rule::kWSkip ||
         r == Rule::kCrash || r == Rule::kEDrop;
}

const char* QueryKindName(PatternQuery::Kind k) {
  switch (k) {
    case PatternQuery::Kind::kUGet:
      return "uget";
    case PatternQuery::Kind::kUSkip:
      return "uskip";
    case PatternQuery::Kind::kWSkip:
      return "wskip";
    case PatternQuery::Kind::kML:
      return "ml";
    case PatternQuery::Kind::kCrash:
      return "crash";
    case PatternQuery::Kind::kDrop:
      return "drop";
  }
  return "?";
}

std::string PatternQuery::ToString() const {
  std::ostringstream out;
  out << QueryKindName(kind) << "(";
  switch (kind) {
    case Kind::kUGet:
    case Kind::kUSkip:
    case Kind::kML:
      out << session << ", " << p1 << ", " << p2 << ", "
          << ftmpst::ToString(label);
      break;
    case Kind::kWSkip:
      out << session << ", " << p1 << ", " << p2;
      break;
    case Kind::kCrash: {
      bool first = true;
      for (const Actor& a : actors) {
        out << (first ? "" : ", ") << a.ToString();
        first = false;
      }
      out << (nsr ? "; nsr" : "; not nsr");
      break;
    }
    case Kind::kDrop:
      out << session << ", " << p1 << ", " << id.ToString();
      break;
  }
  out << ") = " << (answer ? "true" : "false");
  return out.str();
}

// ---------------------------------------------------------------------------
// Configuration.

Configuration::Configuration(const Proc& P) : term_(Normalize(P)) { Index(); }

Configuration Configuration::WithTerm(const Proc& P) const {
  Configuration c = *this;
  c.term_ = Normalize(P);
  c.binders_.clear();
  c.comps_.clear();
  c.queue_index_.clear();
  c.actors_.clear();
  c.Index();
  return c;
}

void Configuration::Index() {
  Decompose(term_, &binders_, &comps_);
  for (size_t i = 0; i < comps_.size(); ++i) {
    const Proc& c = comps_[i];
    if (c->kind == PKind::kQueue) {
      auto p = EvalRole(c->p), q = EvalRole(c->q);
      if (p && q) queue_index_[{c->ch, *p, *q}] = static_cast<int>(i);
    } else {
      for (const Actor& a : ftmpst::Actors(c)) actors_.insert(a);
    }
  }
}

const std::vector<Message>* Configuration::Queue(const QueueKey& k) const {
  auto it = queue_index_.find(k);
  if (it == queue_index_.end()) return nullptr;
  return &comps_[it->second]->queue;
}

std::optional<int> Configuration::QueueIndex(const QueueKey& k) const {
  auto it = queue_index_.find(k);
  if (it == queue_index_.end()) return std::nullopt;
  return it->second;
}

bool Configuration::Terminated(const std::string& s, Role r,
                               const Value& id) const {
  for (const auto& e : exits_) {
    if (e.actor.session == s && e.actor.role == r && e.id == id) return true;
  }
  return false;
}

bool Configuration::TerminatedAny(const std::string& s, Role r) const {
  for (const auto& e : exits_) {
    if (e.actor.session == s && e.actor.role == r) return true;
  }
  return false;
}

std::optional<int64_t> Configuration::LoopCounter(const Actor& a) const {
  for (const Proc& c : comps_) {
    if (c->kind != PKind::kLoop || c->ch != a.session) continue;
    auto r = EvalRole(c->p);
    if (r && *r == a.role) return c->count;
  }
  return std::nullopt;
}

int64_t Configuration::Receipts(const std::string& s, Role recv,
                                const Label& l) const {
  auto it = receipts_.find(s + "|" + std::to_string(recv) + "|" +
                           ftmpst::ToString(l));
  return it == receipts_.end() ? 0 : it->second;
}

std::string Configuration::Key() const {
  std::string out = AlphaKey(term_);
  std::vector<std::string> ex;
  for (const auto& e : exits_) {
    ex.push_back(e.actor.ToString() + ":" + ValueKey(e.id) + "=" +
                 ValueKey(e.value) + "@" + std::to_string(e.counter) +
                 (e.initiated ? "!" : "?"));
  }
  std::sort(ex.begin(), ex.end());
  out += " #exits";
  for (const auto& e : ex) out += " " + e;
  out += " #crashed";
  for (const auto& a : crashed_) out += " " + a.ToString();
  out += " #receipts";
  for (const auto& [k, v] : receipts_) out += " " + k + "=" + std::to_string(v);
  return out;
}

// ---------------------------------------------------------------------------
// Redexes.

std::string Redex::ToString() const {
  std::ostringstream out;
  out << RuleName(rule);
  if (lstep()) out << " (LStep)";
  out << " at";
  for (int p : path) out << " " << p;
  if (branch >= 0) out << " branch " << branch;
  if (!subject.empty()) out << " on " << subject;
  if (guard) out << " [" << guard->ToString() << "]";
  return out.str();
}

bool SameRedex(const Redex& a, const Redex& b) {
  return a.rule == b.rule && a.path == b.path && a.branch == b.branch &&
         a.partners == b.partners;
}

const char* MutationName(Mutation m) {
  switch (m) {
    case Mutation::kNone:
      return "none";
    case Mutation::kUGetDefault:
      return "uget-substitutes-default";
    case Mutation::kLCallNoIncrement:
      return "lcall-skips-counter-increment";
    case Mutation::kNonFifoDequeue:
      return "non-fifo-dequeue";
    case Mutation::kExitNoBroadcast:
      return "lexits-without-broadcast";
    case Mutation::kWSkipUnguarded:
      return "wskip-without-pattern";
    case Mutation::kCrashIgnoresNsr:
      return "crash-on-nsr-false";
  }
  return "?";
}

std::vector<Mutation> AllMutations() {
  return {Mutation::kUGetDefault,      Mutation::kLCallNoIncrement,
          Mutation::kNonFifoDequeue,   Mutation::kExitNoBroadcast,
          Mutation::kWSkipUnguarded,   Mutation::kCrashIgnoresNsr};
}

namespace {

/** Splits a loop body into its restrictions and parallel components. */
void BodyParts(const Proc& body, Binders* binders, std::vector<Proc>* kids) {
  Decompose(body, binders, kids);
  if (kids->empty()) kids->push_back(proc::Nil());
}

class Enumerator {
 public:
  Enumerator(const Configuration& cfg, const FailurePatternSet& fp,
             int64_t step, const SemanticsOptions& opts)
      : cfg_(cfg), fp_(fp), ctx_{cfg, step}, opts_(opts) {}

  Enabled Run() {
    const auto& comps = cfg_.components();
    for (size_t i = 0; i < comps.size(); ++i) {
      const Proc& c = comps[i];
      if (c->kind == PKind::kQueue) {
        QueueRules(static_cast<int>(i));
        continue;
      }
      Located(c, {static_cast<int>(i)}, {});
      CrashRule(static_cast<int>(i));
    }
    return std::move(out_);
  }

 private:
  PatternQuery Ask(PatternQuery q) {
    switch (q.kind) {
      case PatternQuery::Kind::kUGet:
        q.answer = fp_.UGet(q.session, q.p1, q.p2, q.label, ctx_);
        break;
      case PatternQuery::Kind::kUSkip:
        q.answer = fp_.USkip(q.session, q.p1, q.p2, q.label, ctx_);
        break;
      case PatternQuery::Kind::kWSkip:
        q.answer = fp_.WSkip(q.session, q.p1, q.p2, ctx_);
        break;
      case PatternQuery::Kind::kML:
        q.answer = fp_.ML(q.session, q.p1, q.p2, q.label, ctx_);
        break;
      case PatternQuery::Kind::kCrash:
        break;  // asked by CrashRule with the component at hand
      case PatternQuery::Kind::kDrop:
        q.answer = fp_.Drop(q.session, q.p1, q.id, ctx_);
        break;
    }
    out_.queries.push_back(q);
    return q;
  }

  static bool Allowed(const std::string& s, Role from, Role to,
                      const std::vector<Frame>& frames) {
    for (const Frame& f : frames) {
      if (f.s != s) return false;
      bool out = from == f.r && InSet(f.R, to);
      bool in = InSet(f.R, from) && to == f.r;
      if (!out && !in) return false;
    }
    return true;
  }

  std::optional<int> FindQueue(const std::string& s, Role from, Role to,
                               const std::vector<Frame>& frames) const {
    if (!Allowed(s, from, to, frames)) return std::nullopt;
    return cfg_.QueueIndex({s, from, to});
  }

  /** The message a reception would consume (the newest when mutated). */
  const Message* Head(int qi) const {
    const auto& q = cfg_.components()[qi]->queue;
    if (q.empty()) return nullptr;
    return opts_.mutation == Mutation::kNonFifoDequeue ? &q.back() : &q.front();
  }

  void Add(Rule rule, const std::vector<int>& path, std::string subject,
           std::vector<int> partners = {}, int branch = -1,
           std::optional<PatternQuery> guard = std::nullopt) {
    Redex r;
    r.rule = rule;
    r.path = path;
    r.subject = std::move(subject);
    r.partners = std::move(partners);
    r.branch = branch;
    r.guard = std::move(guard);
    out_.redexes.push_back(std::move(r));
  }

  void QueueRules(int i) {
    const Proc& q = cfg_.components()[i];
    if (q->queue.empty()) return;
    auto from = EvalRole(q->p), to = EvalRole(q->q);
    if (!from || !to) return;
    const Message& head = q->queue.front();
    QueueKey key{q->ch, *from, *to};
    if (head.kind == Message::Kind::kU) {
      PatternQuery pq;
      pq.kind = PatternQuery::Kind::kML;
      pq.session = q->ch;
      pq.p1 = *from;
      pq.p2 = *to;
      pq.label = head.l;
      pq = Ask(pq);
      if (pq.answer) Add(Rule::kML, {i}, key.ToString(), {}, -1, pq);
    } else if (head.kind == Message::Kind::kExit) {
      PatternQuery pq;
      pq.kind = PatternQuery::Kind::kDrop;
      pq.session = q->ch;
      pq.p1 = *to;  // the receiving role of the queue
      pq.id = head.id;
      pq = Ask(pq);
      if (pq.answer) Add(Rule::kEDrop, {i}, key.ToString(), {}, -1, pq);
    }
  }

  void CrashRule(int i) {
    const Proc& c = cfg_.components()[i];
    std::set<Actor> actors = ftmpst::Actors(c);
    if (actors.empty()) return;
    bool nsr = Nsr(c);
    PatternQuery pq;
    pq.kind = PatternQuery::Kind::kCrash;
    pq.actors.assign(actors.begin(), actors.end());
    pq.nsr = nsr;
    if (!nsr && opts_.mutation != Mutation::kCrashIgnoresNsr) return;
    pq.answer = fp_.Crash(c, actors, ctx_);
    out_.queries.push_back(pq);
    std::string subject;
    for (const Actor& a : actors) subject += a.ToString();
    if (pq.answer) Add(Rule::kCrash, {i}, subject, {}, -1, pq);
  }

  void Located(const Proc& P, const std::vector<int>& path,
               const std::vector<Frame>& frames) {
    switch (P->kind) {
      case PKind::kReq:
        if (frames.empty()) InitRule(P, path);
        return;
      case PKind::kSend:
      case PKind::kUSend:
      case PKind::kSel:
      case PKind::kDSend: {
        auto p = EvalRole(P->p), q = EvalRole(P->q);
        if (!p || !q) return;
        auto qi = FindQueue(P->ch, *p, *q, frames);
        if (!qi) return;
        if (P->kind == PKind::kSend || P->kind == PKind::kUSend) {
          if (!Closed(P->e)) return;
        }
        if ((P->kind == PKind::kUSend || P->kind == PKind::kSel) &&
            !ConcreteLabel(P->l)) {
          return;
        }
        if (P->kind == PKind::kDSend && !EvalRole(P->dr)) return;
        Rule rule = P->kind == PKind::kSend    ? Rule::kRSend
                    : P->kind == PKind::kUSend ? Rule::kUSend
                    : P->kind == PKind::kSel   ? Rule::kRSel
                                               : Rule::kDeleg;
        Add(rule, path, ActorText(P->ch, *p), {*qi});
        return;
      }
      case PKind::kRecv:
      case PKind::kDRecv: {
        auto p = EvalRole(P->p), q = EvalRole(P->q);
        if (!p || !q) return;
        auto qi = FindQueue(P->ch, *q, *p, frames);
        if (!qi) return;
        const Message* m = Head(*qi);
        if (!m) return;
        Message::Kind want = P->kind == PKind::kRecv ? Message::Kind::kR
                                                     : Message::Kind::kDeleg;
        if (m->kind != want) return;
        Add(P->kind == PKind::kRecv ? Rule::kRGet : Rule::kSRecv, path,
            ActorText(P->ch, *p), {*qi});
        return;
      }
      case PKind::kURecv: {
        auto p = EvalRole(P->p), q = EvalRole(P->q);
        if (!p || !q) return;
        auto own = ConcreteLabel(P->l);
        if (!own || !Closed(P->e)) return;
        auto qi = FindQueue(P->ch, *q, *p, frames);
        if (qi) {
          const Message* m = Head(*qi);
          if (m && m->kind == Message::Kind::kU &&
              LabelsCompatible(P->l, m->l)) {
            PatternQuery pq;
            pq.kind = PatternQuery::Kind::kUGet;
            pq.session = P->ch;
            pq.p1 = *p;
            pq.p2 = *q;
            pq.label = m->l;
            pq = Ask(pq);
            if (pq.answer)
              Add(Rule::kUGet, path, ActorText(P->ch, *p), {*qi}, -1, pq);
          }
        }
        PatternQuery sk;
        sk.kind = PatternQuery::Kind::kUSkip;
        sk.session = P->ch;
        sk.p1 = *p;
        sk.p2 = *q;
        sk.label = *own;
        sk = Ask(sk);
        if (sk.answer) Add(Rule::kUSkip, path, ActorText(P->ch, *p), {}, -1, sk);
        return;
      }
      case PKind::kBran:
      case PKind::kWBran: {
        auto p = EvalRole(P->p), q = EvalRole(P->q);
        if (!p || !q) return;
        bool weak = P->kind == PKind::kWBran;
        auto qi = FindQueue(P->ch, *q, *p, frames);
        if (qi) {
          const Message* m = Head(*qi);
          Message::Kind want = weak ? Message::Kind::kBW : Message::Kind::kBR;
          if (m && m->kind == want) {
            for (size_t j = 0; j < P->branches.size(); ++j) {
              if (LabelsCompatible(P->branches[j].label, m->l)) {
                Add(weak ? Rule::kWBran : Rule::kRBran, path,
                    ActorText(P->ch, *p), {*qi}, static_cast<int>(j));
                break;
              }
            }
          }
        }
        if (weak) {
          PatternQuery pq;
          pq.kind = PatternQuery::Kind::kWSkip;
          pq.session = P->ch;
          pq.p1 = *p;
          pq.p2 = *q;
          pq = Ask(pq);
          if (pq.answer || opts_.mutation == Mutation::kWSkipUnguarded) {
            Add(Rule::kWSkip, path, ActorText(P->ch, *p), {},
                static_cast<int>(P->branches.size()) - 1, pq);
          }
        }
        return;
      }
      case PKind::kWSel: {
        auto p = EvalRole(P->p);
        if (!p || !ConcreteLabel(P->l)) return;
        std::vector<int> qs;
        for (Role r : P->R) {
          auto qi = FindQueue(P->ch, *p, r, frames);
          if (!qi) return;
          qs.push_back(*qi);
        }
        Add(Rule::kWSel, path, ActorText(P->ch, *p), qs);
        return;
      }
      case PKind::kIf: {
        auto v = Closed(P->e);
        if (!v || v->kind() != Value::Kind::kBool) return;
        Add(v->as_bool() ? Rule::kIfT : Rule::kIfF, path, "");
        return;
      }
      case PKind::kRec:
        Add(Rule::kRec, path, "");
        return;
      case PKind::kLoop:
        LoopRules(P, path, frames);
        return;
      default:
        return;
    }
  }

  void InitRule(const Proc& P, const std::vector<int>& path) {
    const auto& comps = cfg_.components();
    std::vector<int> partners;
    for (int64_t i = 1; i < P->count; ++i) {
      int found = -1;
      for (size_t k = 0; k < comps.size(); ++k) {
        const Proc& c = comps[k];
        if (c->kind == PKind::kAcc && c->ch == P->ch && c->count == i) {
          found = static_cast<int>(k);
          break;
        }
      }
      if (found < 0) return;
      partners.push_back(found);
    }
    Add(Rule::kInit, path, "init:" + P->ch, partners);
  }

  void LoopRules(const Proc& P, const std::vector<int>& path,
                 const std::vector<Frame>& frames) {
    auto r = EvalRole(P->p);
    auto id = Closed(P->e);
    if (!r || !id) return;
    std::string subject = ActorText(P->ch, *r);
    const Proc& body = P->P1;
    if (body->kind == PKind::kCall) {
      auto el = Closed(body->e);
      if (el && *el == *id && Closed(body->e2)) Add(Rule::kLCall, path, subject);
    }
    if (body->kind == PKind::kExit) {
      auto el = Closed(body->e);
      if (el && *el == *id && Closed(body->e2)) {
        std::vector<int> qs;
        bool ok = true;
        for (Role ri : P->R) {
          auto qi = FindQueue(P->ch, *r, ri, frames);
          if (!qi) {
            ok = false;
            break;
          }
          qs.push_back(*qi);
        }
        if (ok) Add(Rule::kLExitS, path, subject, qs);
      }
    }
    for (Role ri : P->R) {
      auto qi = FindQueue(P->ch, ri, *r, frames);
      if (!qi) continue;
      const Message* m = Head(*qi);
      if (m && m->kind == Message::Kind::kExit && m->id == *id) {
        Add(Rule::kLExitG, path, subject, {*qi});
      }
    }
    // LStep: the body acts with queues between r and R only.
    std::vector<Frame> inner = frames;
    inner.push_back({P->ch, *r, P->R});
    Binders binders;
    std::vector<Proc> kids;
    BodyParts(body, &binders, &kids);
    for (size_t k = 0; k < kids.size(); ++k) {
      std::vector<int> sub = path;
      sub.push_back(static_cast<int>(k));
      Located(kids[k], sub, inner);
    }
  }

  const Configuration& cfg_;
  const FailurePatternSet& fp_;
  PatternContext ctx_;
  const SemanticsOptions& opts_;
  Enabled out_;
};

}  // namespace

Enabled EnabledRedexes(const Configuration& cfg, const FailurePatternSet& fp,
                       int64_t step, const SemanticsOptions& opts) {
  return Enumerator(cfg, fp, step, opts).Run();
}

// ---------------------------------------------------------------------------
// Step.

/** Applies redexes; friend of Configuration for the history fields. */
class Stepper {
 public:
  Stepper(const Configuration& cfg, const SemanticsOptions& opts,
          StepEffect* eff)
      : cfg_(cfg), opts_(opts), eff_(eff) {
    comps_ = cfg.components();
    binders_ = cfg.binders();
  }

  Configuration Apply(const Redex& rx) {
    if (rx.path.empty() || rx.path[0] < 0 ||
        rx.path[0] >= static_cast<int>(comps_.size())) {
      Stale("path");
    }
    if (rx.rule == Rule::kML || rx.rule == Rule::kEDrop) {
      DropHead(rx.path[0], rx.rule == Rule::kML ? Message::Kind::kU
                                                : Message::Kind::kExit);
      return Finish();
    }
    if (rx.rule == Rule::kCrash) {
      const Proc& c = comps_[rx.path[0]];
      if (c->kind == PKind::kQueue) Stale("queue cannot crash");
      eff_->crashed = ftmpst::Actors(c);
      comps_[rx.path[0]] = proc::Crash();
      return Finish();
    }
    // Locate, descending through loop bodies.
    std::vector<Proc> chain{comps_[rx.path[0]]};
    for (size_t k = 1; k < rx.path.size(); ++k) {
      const Proc& loop = chain.back();
      if (loop->kind != PKind::kLoop) Stale("LStep path");
      Binders b;
      std::vector<Proc> kids;
      BodyParts(loop->P1, &b, &kids);
      if (rx.path[k] < 0 || rx.path[k] >= static_cast<int>(kids.size()))
        Stale("LStep path");
      chain.push_back(kids[rx.path[k]]);
    }
    Proc replacement = Fire(chain.back(), rx);
    for (size_t k = rx.path.size() - 1; k >= 1; --k) {
      const Proc& loop = chain[k - 1];
      Binders b;
      std::vector<Proc> kids;
      BodyParts(loop->P1, &b, &kids);
      kids[rx.path[k]] = replacement;
      replacement = WithP1(loop, Compose(b, kids));
    }
    comps_[rx.path[0]] = replacement;
    return Finish();
  }

 private:
  [[noreturn]] static void Stale(const std::string& what) {
    throw StaleRedex("stale redex: " + what);
  }

  QueueKey KeyOf(int qi) const {
    const Proc& q = comps_.at(qi);
    if (q->kind != PKind::kQueue) Stale("partner is not a queue");
    return {q->ch, *EvalRole(q->p), *EvalRole(q->q)};
  }

  void Append(int qi, const Message& m) {
    QueueKey k = KeyOf(qi);
    std::vector<Message> msgs = comps_[qi]->queue;
    msgs.push_back(m);
    comps_[qi] = proc::Queue(k.session, k.from, k.to, msgs);
    eff_->appended.push_back({k, m});
  }

  /** Removes the message a reception consumes and returns it. */
  Message Consume(int qi, Message::Kind want) {
    QueueKey k = KeyOf(qi);
    std::vector<Message> msgs = comps_[qi]->queue;
    if (msgs.empty()) Stale("empty queue");
    bool newest = opts_.mutation == Mutation::kNonFifoDequeue;
    Message m = newest ? msgs.back() : msgs.front();
    if (m.kind != want) Stale("queue head");
    if (newest) {
      msgs.pop_back();
    } else {
      msgs.erase(msgs.begin());
    }
    comps_[qi] = proc::Queue(k.session, k.from, k.to, msgs);
    eff_->removed = {k, m};
    return m;
  }

  void DropHead(int qi, Message::Kind want) {
    QueueKey k = KeyOf(qi);
    std::vector<Message> msgs = comps_[qi]->queue;
    if (msgs.empty() || msgs.front().kind != want) Stale("queue head");
    Message m = msgs.front();
    msgs.erase(msgs.begin());
    comps_[qi] = proc::Queue(k.session, k.from, k.to, msgs);
    eff_->removed = {k, m};
  }

  static Value MustEval(const Expr& e) {
    auto v = Closed(e);
    if (!v) Stale("open or ill-sorted expression " + ToString(e));
    return *v;
  }

  static Role MustRole(const Expr& e) {
    auto r = EvalRole(e);
    if (!r) Stale("open role " + ToString(e));
    return *r;
  }

  static Label MustLabel(const Label& l) {
    auto c = ConcreteLabel(l);
    if (!c) Stale("open label " + ToString(l));
    return *c;
  }

  int Partner(const Redex& rx, size_t i) const {
    if (i >= rx.partners.size()) Stale("missing partner");
    return rx.partners[i];
  }

  Proc Fire(const Proc& P, const Redex& rx) {
    auto expect = [&](PKind k) {
      if (P->kind != k) Stale(std::string("shape for ") + RuleName(rx.rule));
    };
    switch (rx.rule) {
      case Rule::kInit:
        expect(PKind::kReq);
        return Init(P, rx);
      case Rule::kRSend:
        expect(PKind::kSend);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        Append(Partner(rx, 0), Message::R(MustEval(P->e)));
        return P->next;
      case Rule::kUSend:
        expect(PKind::kUSend);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        Append(Partner(rx, 0), Message::U(MustLabel(P->l), MustEval(P->e)));
        return P->next;
      case Rule::kRSel:
        expect(PKind::kSel);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        Append(Partner(rx, 0), Message::BR(MustLabel(P->l)));
        return P->next;
      case Rule::kWSel: {
        expect(PKind::kWSel);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        Label l = MustLabel(P->l);
        for (int qi : rx.partners) Append(qi, Message::BW(l));
        return P->next;
      }
      case Rule::kDeleg:
        expect(PKind::kDSend);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        Append(Partner(rx, 0), Message::Deleg(P->dch, MustRole(P->dr)));
        return P->next;
      case Rule::kRGet: {
        expect(PKind::kRecv);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        Message m = Consume(Partner(rx, 0), Message::Kind::kR);
        eff_->bound = m.v;
        return Subst(P->next, P->x, Lit(m.v));
      }
      case Rule::kUGet: {
        expect(PKind::kURecv);
        Role p = MustRole(P->p);
        eff_->actor = Actor{P->ch, p};
        Message m = Consume(Partner(rx, 0), Message::Kind::kU);
        if (!LabelsCompatible(P->l, m.l)) Stale("label mismatch");
        receipt_ = P->ch + "|" + std::to_string(p) + "|" +
                   ToString(MustLabel(P->l));
        Value v = opts_.mutation == Mutation::kUGetDefault ? MustEval(P->e)
                                                           : m.v;
        eff_->bound = v;
        return Subst(P->next, P->x, Lit(v));
      }
      case Rule::kUSkip:
        expect(PKind::kURecv);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        eff_->bound = MustEval(P->e);
        return Subst(P->next, P->x, P->e);
      case Rule::kRBran:
      case Rule::kWBran: {
        bool weak = rx.rule == Rule::kWBran;
        expect(weak ? PKind::kWBran : PKind::kBran);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        if (rx.branch < 0 || rx.branch >= static_cast<int>(P->branches.size()))
          Stale("branch");
        Message m = Consume(Partner(rx, 0),
                            weak ? Message::Kind::kBW : Message::Kind::kBR);
        if (!LabelsCompatible(P->branches[rx.branch].label, m.l))
          Stale("branch label");
        return P->branches[rx.branch].cont;
      }
      case Rule::kWSkip:
        expect(PKind::kWBran);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        return P->branches.back().cont;
      case Rule::kSRecv: {
        expect(PKind::kDRecv);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        Message m = Consume(Partner(rx, 0), Message::Kind::kDeleg);
        Proc next = Subst(P->next, P->x, Name(m.ch));
        return Subst(next, P->y, Nat(m.role));
      }
      case Rule::kIfT:
      case Rule::kIfF: {
        expect(PKind::kIf);
        Value v = MustEval(P->e);
        if (v.kind() != Value::Kind::kBool ||
            v.as_bool() != (rx.rule == Rule::kIfT)) {
          Stale("condition");
        }
        return rx.rule == Rule::kIfT ? P->P1 : P->P2;
      }
      case Rule::kRec: {
        expect(PKind::kRec);
        Proc body = Subst(P->next, P->c, Nat(P->count));
        Proc again = proc::Rec(P->X, P->c, P->count + 1, P->next);
        eff_->counter_before = P->count;
        eff_->counter_after = P->count + 1;
        return SubstVar(body, P->X, again);
      }
      case Rule::kLCall: {
        expect(PKind::kLoop);
        if (P->P1->kind != PKind::kCall) Stale("loop body is not a call");
        Value id = MustEval(P->e);
        if (MustEval(P->P1->e) != id) Stale("call of another loop");
        Value v = MustEval(P->P1->e2);
        eff_->actor = Actor{P->ch, MustRole(P->p)};
        eff_->loop_id = id;
        eff_->counter_before = P->count;
        PNode n = *P;
        n.count = opts_.mutation == Mutation::kLCallNoIncrement ? P->count
                                                                : P->count + 1;
        eff_->counter_after = n.count;
        n.P1 = Subst(Subst(P->P0, P->c, Nat(P->count)), P->x, Lit(v));
        return std::make_shared<const PNode>(std::move(n));
      }
      case Rule::kLExitS: {
        expect(PKind::kLoop);
        if (P->P1->kind != PKind::kExit) Stale("loop body is not an exit");
        Value id = MustEval(P->e);
        if (MustEval(P->P1->e) != id) Stale("exit of another loop");
        Value v = MustEval(P->P1->e2);
        Actor a{P->ch, MustRole(P->p)};
        eff_->actor = a;
        eff_->loop_id = id;
        if (opts_.mutation != Mutation::kExitNoBroadcast) {
          for (int qi : rx.partners) Append(qi, Message::Exit(id, v));
        }
        eff_->exit = ExitRecord{a, id, v, P->count, true};
        return Subst(P->P2, P->y, Lit(v));
      }
      case Rule::kLExitG: {
        expect(PKind::kLoop);
        Value id = MustEval(P->e);
        Actor a{P->ch, MustRole(P->p)};
        eff_->actor = a;
        eff_->loop_id = id;
        Message m = Consume(Partner(rx, 0), Message::Kind::kExit);
        if (m.id != id) Stale("exit message of another loop");
        eff_->exit = ExitRecord{a, id, m.v, P->count, false};
        return Subst(P->P2, P->y, Lit(m.v));
      }
      default:
        Stale(std::string("rule ") + RuleName(rx.rule) + " at a process");
    }
  }

  Proc Init(const Proc& req, const Redex& rx) {
    std::set<std::string> avoid = Identifiers(ToString(cfg_.term()));
    for (const auto& e : cfg_.exits()) avoid.insert(e.actor.session);
    for (const auto& a : cfg_.crashed()) avoid.insert(a.session);
    std::string s = Fresh(req->s, avoid);
    std::vector<Proc> parts{Subst(req->next, req->s, Name(s))};
    if (static_cast<int64_t>(rx.partners.size()) != req->count - 1)
      Stale("acceptors");
    for (size_t i = 0; i < rx.partners.size(); ++i) {
      const Proc& acc = comps_.at(rx.partners[i]);
      if (acc->kind != PKind::kAcc || acc->ch != req->ch ||
          acc->count != static_cast<int64_t>(i + 1)) {
        Stale("acceptor");
      }
      parts.push_back(Subst(acc->next, acc->s, Name(s)));
      comps_[rx.partners[i]] = proc::Nil();
    }
    for (Role i = 1; i <= req->count; ++i) {
      for (Role j = 1; j <= req->count; ++j) {
        if (i != j) parts.push_back(proc::Queue(s, i, j, {}));
      }
    }
    return proc::Res(s, std::nullopt, proc::Par(parts));
  }

  Configuration Finish() {
    Configuration next = cfg_.WithTerm(Compose(binders_, comps_));
    if (eff_->exit) next.exits_.push_back(*eff_->exit);
    for (const Actor& a : eff_->crashed) next.crashed_.insert(a);
    if (!receipt_.empty()) next.receipts_[receipt_]++;
    return next;
  }

  const Configuration& cfg_;
  const SemanticsOptions& opts_;
  StepEffect* eff_;
  std::vector<Proc> comps_;
  Binders binders_;
  std::string receipt_;
};

Configuration Step(const Configuration& cfg, const Redex& rx,
                   const SemanticsOptions& opts, StepEffect* effect) {
  StepEffect local;
  StepEffect* eff = effect ? effect : &local;
  *eff = StepEffect{};
  return Stepper(cfg, opts, eff).Apply(rx);
}

bool IsPrefixFree(const Configuration& cfg) {
  return ftmpst::IsPrefixFree(cfg.term());
}

// ---------------------------------------------------------------------------
// Schedulers.

size_t RandomScheduler::Pick(const Configuration&,
                             const std::vector<Redex>& enabled, int64_t) {
  std::uniform_int_distribution<size_t> d(0, enabled.size() - 1);
  return d(rng_);
}

size_t FairScheduler::Pick(const Configuration& cfg,
                           const std::vector<Redex>& enabled, int64_t) {
  auto key = [](const Redex& r) {
    return std::string(RuleName(r.rule)) + "|" + r.subject;
  };
  std::map<std::string, int> next;
  for (const Redex& r : enabled) {
    if (r.rule == Rule::kCrash) continue;
    std::string k = key(r);
    if (next.count(k)) continue;
    auto it = age_.find(k);
    next[k] = (it == age_.end() ? 0 : it->second) + 1;
  }
  age_ = std::move(next);
  int window = window_ > 0
                   ? window_
                   : 4 * std::max<int>(1, static_cast<int>(cfg.actors().size()));
  std::string oldest;
  int oldest_age = 0;
  for (const auto& [k, a] : age_) {
    if (a >= window && a > oldest_age) {
      oldest = k;
      oldest_age = a;
    }
  }
  size_t pick = 0;
  bool forced = false;
  if (!oldest.empty()) {
    for (size_t i = 0; i < enabled.size(); ++i) {
      if (key(enabled[i]) == oldest) {
        pick = i;
        forced = true;
        break;
      }
    }
  }
  if (!forced) {
    std::uniform_int_distribution<size_t> d(0, enabled.size() - 1);
    pick = d(rng_);
  }
  age_.erase(key(enabled[pick]));
  return pick;
}

// ---------------------------------------------------------------------------
// Runs, traces, replay and exploration.

std::string Trace::ToJsonl() const {
  std::ostringstream out;
  for (const TraceStep& s : steps) {
    nlohmann::json j;
    j["step"] = s.index;
    j["rule"] = RuleName(s.redex.rule);
    j["lstep"] = s.redex.lstep();
    j["path"] = s.redex.path;
    if (s.redex.branch >= 0) j["branch"] = s.redex.branch;
    if (!s.redex.subject.empty()) j["subject"] = s.redex.subject;
    nlohmann::json qs = nlohmann::json::array();
    for (const PatternQuery& q : s.queries) {
      nlohmann::json jq;
      jq["kind"] = QueryKindName(q.kind);
      jq["query"] = q.ToString();
      jq["answer"] = q.answer;
      qs.push_back(jq);
    }
    j["queries"] = qs;
    std::ostringstream h;
    h << std::hex << s.hash;
    j["hash"] = h.str();
    out << j.dump() << "\n";
  }
  return out.str();
}

Trace Run(const Configuration& cfg, const FailurePatternSet& fp,
          Scheduler& sched, const RunOptions& opts) {
  Trace tr;
  tr.initial = cfg;
  tr.patterns = fp.name();
  Configuration cur = cfg;
  for (int64_t i = 0;; ++i) {
    if (i >= opts.max_steps) {
      tr.truncated = true;
      break;
    }
    Enabled en = EnabledRedexes(cur, fp, i, opts.semantics);
    if (en.redexes.empty()) break;
    size_t pick = sched.Pick(cur, en.redexes, i);
    TraceStep ts;
    ts.index = i;
    ts.redex = en.redexes.at(pick);
    ts.queries = std::move(en.queries);
    cur = Step(cur, ts.redex, opts.semantics, &ts.effect);
    ts.hash = cur.Hash();
    if (opts.on_step) opts.on_step(cur, ts);
    tr.steps.push_back(std::move(ts));
  }
  tr.final = cur;
  return tr;
}

bool Replay(const Trace& tr, const FailurePatternSet& fp,
            const SemanticsOptions& opts, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  Configuration cur = tr.initial;
  for (const TraceStep& s : tr.steps) {
    Enabled en = EnabledRedexes(cur, fp, s.index, opts);
    const Redex* match = nullptr;
    for (const Redex& r : en.redexes) {
      if (SameRedex(r, s.redex)) match = &r;
    }
    if (!match)
      return fail("step " + std::to_string(s.index) + ": redex not enabled");
    if (en.queries.size() != s.queries.size())
      return fail("step " + std::to_string(s.index) + ": query count differs");
    for (size_t k = 0; k < en.queries.size(); ++k) {
      if (en.queries[k].answer != s.queries[k].answer)
        return fail("step " + std::to_string(s.index) + ": answer differs");
    }
    cur = Step(cur, *match, opts);
    if (cur.Hash() != s.hash)
      return fail("step " + std::to_string(s.index) + ": hash differs");
  }
  return true;
}

ExploreResult Explore(const Configuration& cfg, const FailurePatternSet& fp,
                      int depth, size_t state_budget,
                      const SemanticsOptions& opts) {
  ExploreResult out;
  std::unordered_map<std::string, size_t> seen;
  auto add = [&](const Configuration& c, int d) -> std::optional<size_t> {
    std::string k = c.Key();
    auto it = seen.find(k);
    if (it != seen.end()) return it->second;
    if (out.states.size() >= state_budget) {
      out.budget_exceeded = true;
      return std::nullopt;
    }
    size_t idx = out.states.size();
    seen.emplace(std::move(k), idx);
    out.states.push_back(c);
    out.successors.emplace_back();
    out.depth.push_back(d);
    out.frontier.push_back(false);
    return idx;
  };
  add(cfg, 0);
  std::deque<size_t> work{0};
  while (!work.empty()) {
    size_t i = work.front();
    work.pop_front();
    int d = out.depth[i];
    Enabled en = EnabledRedexes(out.states[i], fp, d, opts);
    if (d >= depth) {
      out.frontier[i] = !en.redexes.empty();
      continue;
    }
    for (const Redex& r : en.redexes) {
      Configuration next = Step(out.states[i], r, opts);
      size_t before = out.states.size();
      auto j = add(next, d + 1);
      if (!j) continue;
      out.successors[i].push_back(*j);
      if (out.states.size() > before) work.push_back(*j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loading.

Configuration LoadConfiguration(const SourceFile& file,
                                const std::string& name) {
  const Declaration* d = file.Find(name);
  if (!d) throw LoadError("unknown declaration '" + name + "'");
  if (d->kind != DeclKind::kProcess)
    throw LoadError("'" + name + "' is not a process");
  Proc P = d->proc;
  for (const std::string& x : FreeNames(P)) {
    if (!file.channels.count(x) && !file.sessions.count(x))
      throw LoadError("process '" + name + "' has the open free name '" + x +
                      "'");
  }
  std::function<void(const Proc&)> check = [&](const Proc& x) {
    if ((x->kind == PKind::kReq || x->kind == PKind::kAcc) &&
        !file.channels.count(x->ch)) {
      throw LoadError("undeclared channel '" + x->ch + "'");
    }
    for (const Proc* k : {&x->next, &x->P0, &x->P1, &x->P2}) {
      if (*k) check(*k);
    }
    for (const Proc& k : x->kids) check(k);
    for (const auto& b : x->branches) check(b.cont);
  };
  check(P);
  if (!FreeVars(P).empty())
    throw LoadError("process '" + name + "' has a free process variable");
  Configuration cfg(P);
  std::vector<Proc> extra{P};
  for (const auto& [s, g] : file.sessions) {
    for (Role p : Roles(g)) {
      for (Role q : Roles(g)) {
        if (p != q && !cfg.QueueIndex({s, p, q}))
          extra.push_back(proc::Queue(s, p, q, {}));
      }
    }
  }
  return Configuration(proc::Par(extra));
}

}  // namespace ftmpst
