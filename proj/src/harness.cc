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

#include "ftmpst/harness.hh"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ftmpst {

Role RcCoordinator(int64_t r, int n) {
  return static_cast<Role>(r % n) + 1;
}

int64_t RcBest(const std::vector<Value>& K) {
  return BestOf(Value::Tuple(K)).as_nat();
}

int64_t RcCountAck(const std::vector<Value>& K) {
  return CountAck(Value::Tuple(K));
}

int64_t RcThreshold(int n) { return n / 2; }  // ceil((n - 1) / 2)

namespace {

std::string Join(const std::vector<std::string>& parts,
                 const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string RoleSetText(int n, Role except) {
  std::vector<std::string> roles;
  for (Role r = 1; r <= n; ++r) {
    if (r != except) roles.push_back(std::to_string(r));
  }
  return "{" + Join(roles, ", ") + "}";
}

/** Tuple of per-role entries with own at position c. */
std::string Vector(int n, Role c, const std::string& prefix,
                   const std::string& own) {
  std::vector<std::string> elems;
  for (Role j = 1; j <= n; ++j) {
    elems.push_back(j == c ? own : prefix + std::to_string(j));
  }
  return "(" + Join(elems, ", ") + ")";
}

std::string RoundGlobal(int n, Role c) {
  std::string g;
  for (Role i = 1; i <= n; ++i) {
    if (i != c)
      g += std::to_string(i) + " -> " + std::to_string(c) +
           " : (p1, r)<Bel>.\n      ";
  }
  for (Role i = 1; i <= n; ++i) {
    if (i != c)
      g += std::to_string(c) + " -> " + std::to_string(i) +
           " : (p2, r)<Bel>.\n      ";
  }
  for (Role i = 1; i <= n; ++i) {
    if (i != c)
      g += std::to_string(i) + " -> " + std::to_string(c) +
           " : (p3, r)<Ack>.\n      ";
  }
  return g + "call(1)";
}

/** Phases 2 to 4 of coordinator c with belief kc and proposal arg. */
std::string CoordinatorTail(int n, Role c, const std::string& kc,
                            const std::string& arg) {
  std::string th = std::to_string(RcThreshold(n));
  std::string p;
  for (Role j = 1; j <= n; ++j) {
    if (j != c)
      p += "s[" + std::to_string(c) + ", " + std::to_string(j) + "]!(p2, r)<" +
           arg + ">.\n        ";
  }
  for (Role j = 1; j <= n; ++j) {
    if (j != c)
      p += "s[" + std::to_string(c) + ", " + std::to_string(j) +
           "]?(p3, r)<bot>(a" + std::to_string(j) + ").\n        ";
  }
  return p + "if countAck(" + Vector(n, c, "a", kc) + ") >= " + th +
         " then exit(1, " + kc + ") else call(1, " + kc + ")";
}

std::string Coordinator(int n, Role c) {
  std::string th = std::to_string(RcThreshold(n));
  std::string p;
  for (Role j = 1; j <= n; ++j) {
    if (j != c)
      p += "s[" + std::to_string(c) + ", " + std::to_string(j) +
           "]?(p1, r)<bot>(x" + std::to_string(j) + ").\n        ";
  }
  std::string K = Vector(n, c, "x", "k");
  std::string best = "best(" + K + ")";
  return p + "if known(" + K + ") >= " + th + "\n      then (" +
         CoordinatorTail(n, c, best, best) + ")\n      else (" +
         CoordinatorTail(n, c, "k", "bot") + ")";
}

std::string NonCoordinator(int n, Role i) {
  std::string me = std::to_string(i);
  std::string c = "(r mod " + std::to_string(n) + ") + 1";
  std::string ch = "s[" + me + ", " + c + "]";
  return ch + "!(p1, r)<k>.\n        " + ch + "?(p2, r)<bot>(x).\n        " +
         "if x = bot then " + ch + "!(p3, r)<false>.call(1, k)\n        " +
         "else " + ch + "!(p3, r)<true>.call(1, x)";
}

std::string RoleProcess(int n, Role i, int64_t belief) {
  return "loop(s[" + std::to_string(i) + "][" + RoleSetText(n, i) +
         "], 1, r = 0,\n    (k). if " + std::to_string(i) + " = (r mod " +
         std::to_string(n) + ") + 1\n      then (" + Coordinator(n, i) +
         ")\n      else (" + NonCoordinator(n, i) + "),\n    call(1, " +
         std::to_string(belief) + "),\n    (v). 0)";
}

}  // namespace

std::string RcSource(int n, const std::vector<int64_t>& beliefs) {
  std::ostringstream out;
  out << "label p1 : Bel;\nlabel p2 : Bel;\nlabel p3 : Ack;\n\n";
  out << "global RC = loop(" << RoleSetText(n, 0) << ", 1, r; Bel){\n"
      << "  case (r mod " << n << ") + 1 of {\n";
  for (Role c = 1; c <= n; ++c) {
    out << "    " << c << ": " << RoundGlobal(n, c) << (c < n ? ",\n" : "\n");
  }
  out << "  } ; Bel: end\n};\n\nchannel a : RC;\n\nprocess RC_Sys =\n";
  out << "  req a[" << n << "](s)." << RoleProcess(n, n, beliefs[n - 1]);
  for (Role i = 1; i < n; ++i) {
    out << "\n  | acc a[" << i << "](s)." << RoleProcess(n, i, beliefs[i - 1]);
  }
  out << ";\n";
  return out.str();
}

RcSystem BuildRc(int n, const std::vector<int64_t>& beliefs) {
  if (n < 3) throw std::invalid_argument("RC needs at least 3 roles");
  if (static_cast<int>(beliefs.size()) != n)
    throw std::invalid_argument("RC needs one belief per role");
  for (int64_t b : beliefs) {
    if (b != 0 && b != 1) throw std::invalid_argument("beliefs are 0 or 1");
  }
  RcSystem rc;
  rc.n = n;
  rc.beliefs = beliefs;
  rc.file = Parse(RcSource(n, beliefs));
  rc.gamma = GlobalEnv::FromSource(rc.file);
  rc.G = rc.file.channels.at("a");
  rc.cfg = LoadConfiguration(rc.file, "RC_Sys");
  return rc;
}

std::string CheckRcTyping(const RcSystem& rc) {
  try {
    Typecheck(rc.gamma, {}, rc.cfg.term(), SessionEnv{});
    // Initialize the session and type the running system.
    FailureFree ff;
    Enabled en = EnabledRedexes(rc.cfg, ff);
    auto init = std::find_if(en.redexes.begin(), en.redexes.end(),
                             [](const Redex& r) {
                               return r.rule == Rule::kInit;
                             });
    if (init == en.redexes.end()) return "session initialization not enabled";
    Configuration running = Step(rc.cfg, *init);
    if (running.binders().empty()) return "no session after initialization";
    const std::string& s = running.binders().front().first;
    SessionEnv delta = InitialEnv(rc.G, s);
    // The running term restricts s; type its body under the projections.
    Proc body = running.term();
    while (body->kind == PKind::kRes) body = body->next;
    GlobalEnv gamma = rc.gamma;
    gamma.sessions[s] = rc.G;
    Typecheck(gamma, {}, body, delta);
    Coherence c = Coherent(gamma, delta, 0);
    if (c != Coherence::kCoherent)
      return std::string("initial environment ") + CoherenceName(c);
    Typecheck(rc.gamma, {}, running.term(), SessionEnv{});
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::string RcOutcome::ToString() const {
  std::ostringstream out;
  out << "seed " << seed << ": steps " << steps;
  if (truncated) out << " (truncated)";
  out << ", decisions [";
  for (size_t r = 0; r < decision.size(); ++r) {
    if (r) out << ", ";
    if (crashed[r]) {
      out << "crashed";
    } else if (decision[r]) {
      out << *decision[r] << "@" << rounds[r];
    } else {
      out << "undecided@" << rounds[r];
    }
  }
  out << "], exits " << initiated.size();
  if (!agreement) out << ", AGREEMENT VIOLATED";
  if (!validity) out << ", VALIDITY VIOLATED";
  if (!termination) out << ", NOT TERMINATED";
  if (monitor && !monitor->ok()) out << ", " << monitor->ToString();
  return out.str();
}

RcOutcome RunRc(const RcSystem& rc, uint64_t seed, const RcRunOptions& opts) {
  std::unique_ptr<FailurePatternSet> fp;
  if (opts.patterns == "rc-diamond-s") {
    RcPatternOptions po;
    po.n = rc.n;
    po.seed = seed;
    po.forced_crash = opts.forced_crash;
    po.forced_crash_step = opts.forced_crash_step;
    po.random_crashes = opts.random_crashes;
    po.max_stabilization = opts.max_stabilization;
    fp = std::make_unique<RcDiamondS>(po);
  } else {
    fp = MakePatterns(opts.patterns, seed, rc.n);
    if (!fp) throw std::invalid_argument("unknown patterns " + opts.patterns);
  }
  RcOutcome out;
  out.seed = seed;
  out.decision.assign(rc.n, std::nullopt);
  out.crashed.assign(rc.n, false);
  out.rounds.assign(rc.n, 0);
  FairScheduler sched(DeriveSeed(seed, 0x5c4ed));
  std::optional<Condition1Monitor> monitor;
  if (opts.monitor) monitor.emplace(fp.get());
  Configuration before = rc.cfg;
  RunOptions ro;
  ro.max_steps = opts.max_steps;
  ro.on_step = [&](const Configuration& after, const TraceStep& ts) {
    if (monitor) {
      auto t0 = std::chrono::steady_clock::now();
      monitor->Observe(before, ts);
      before = after;
      out.monitor_seconds += std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
    }
    const StepEffect& e = ts.effect;
    if (e.actor && e.actor->role >= 1 && e.actor->role <= rc.n) {
      int64_t& r = out.rounds[e.actor->role - 1];
      r = std::max(r, e.counter_after);
    }
    if (e.exit && e.exit->initiated) out.initiated.push_back(*e.exit);
  };
  Trace tr = Run(rc.cfg, *fp, sched, ro);
  out.steps = static_cast<int64_t>(tr.steps.size());
  out.truncated = tr.truncated;
  for (const ExitRecord& x : tr.final.exits()) {
    Role r = x.actor.role;
    if (r < 1 || r > rc.n || x.id != Value::Nat(1)) continue;
    out.decision[r - 1] = x.value.as_nat();
    out.rounds[r - 1] = x.counter;
  }
  for (const Actor& a : tr.final.crashed()) {
    if (a.role >= 1 && a.role <= rc.n) out.crashed[a.role - 1] = true;
  }
  std::set<int64_t> decided;
  int bound = opts.round_bound > 0 ? opts.round_bound : 3 * rc.n;
  for (int r = 0; r < rc.n; ++r) {
    if (out.decision[r]) {
      decided.insert(*out.decision[r]);
      if (std::find(rc.beliefs.begin(), rc.beliefs.end(), *out.decision[r]) ==
          rc.beliefs.end())
        out.validity = false;
      // Counter c at exit means rounds 0 .. c - 1 were entered.
      if (out.rounds[r] - 1 >= bound) out.termination = false;
    } else if (!out.crashed[r]) {
      out.termination = false;
    }
  }
  out.agreement = decided.size() <= 1;
  if (monitor) out.monitor = monitor->Report();
  if (opts.keep_trace) out.trace = std::move(tr);
  return out;
}

uint64_t DeriveSeed(uint64_t seed, uint64_t index) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(index),
                    static_cast<uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  return rng();
}

std::string RcReport::ToString() const {
  std::ostringstream out;
  out << "rc n=" << n << " beliefs [";
  for (size_t i = 0; i < beliefs.size(); ++i)
    out << (i ? "," : "") << beliefs[i];
  out << "] runs " << outcomes.size() << "\n";
  out << "  agreement failures:   " << agreement_failures << "\n";
  out << "  validity failures:    " << validity_failures << "\n";
  out << "  termination failures: " << termination_failures << "\n";
  out << "  monitor failures:     " << monitor_failures << "\n";
  out << "  runs with a crash:    " << crashed_runs << "\n";
  out << "  runs with >1 exit:    " << multi_exit_runs << "\n";
  for (const RcOutcome& o : outcomes) {
    if (!o.agreement || !o.validity || !o.termination ||
        (o.monitor && !o.monitor->ok()))
      out << "  " << o.ToString() << "\n";
  }
  out << (ok() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

RcReport RcExperiment(int n, const std::vector<int64_t>& beliefs, int runs,
                      uint64_t seed, const RcRunOptions& opts, int threads) {
  RcSystem rc = BuildRc(n, beliefs);
  RcReport rep;
  rep.n = n;
  rep.beliefs = beliefs;
  rep.outcomes.resize(std::max(runs, 0));
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::max(
                                  1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(runs, 1));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < runs; i = next++) {
        rep.outcomes[i] = RunRc(rc, DeriveSeed(seed, i), opts);
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const RcOutcome& o : rep.outcomes) {
    rep.agreement_failures += !o.agreement;
    rep.validity_failures += !o.validity;
    rep.termination_failures += !o.termination;
    rep.monitor_failures += o.monitor && !o.monitor->ok();
    rep.multi_exit_runs += o.initiated.size() > 1;
    rep.crashed_runs += std::count(o.crashed.begin(), o.crashed.end(), true) > 0;
  }
  return rep;
}

MultiExitWitness FindMultiExit(const RcSystem& rc, uint64_t seed,
                               int64_t max_attempts, int64_t max_steps) {
  MultiExitWitness w;
  for (int64_t attempt = 0; attempt < max_attempts; ++attempt) {
    ++w.attempts;
    uint64_t run_seed = DeriveSeed(seed, attempt);
    RcPatternOptions po;
    po.n = rc.n;
    po.seed = run_seed;
    po.random_crashes = false;
    RcDiamondS fp(po);
    std::mt19937_64 rng(run_seed);
    // Postpone adopting a decision so that later coordinators keep going.
    CallbackScheduler sched([&](const Configuration&,
                                const std::vector<Redex>& en, int64_t) {
      std::vector<size_t> preferred;
      for (size_t i = 0; i < en.size(); ++i) {
        if (en[i].rule != Rule::kLExitG) preferred.push_back(i);
      }
      if (preferred.empty()) {
        return std::uniform_int_distribution<size_t>(0, en.size() - 1)(rng);
      }
      return preferred[std::uniform_int_distribution<size_t>(
          0, preferred.size() - 1)(rng)];
    });
    RunOptions ro;
    ro.max_steps = max_steps;
    Trace tr = Run(rc.cfg, fp, sched, ro);
    std::vector<Value> values;
    for (const TraceStep& ts : tr.steps) {
      if (ts.effect.exit && ts.effect.exit->initiated &&
          ts.effect.exit->id == Value::Nat(1))
        values.push_back(ts.effect.exit->value);
    }
    if (values.size() >= 2) {
      w.found = true;
      w.values = std::move(values);
      w.trace = std::move(tr);
      return w;
    }
  }
  return w;
}

}  // namespace ftmpst
