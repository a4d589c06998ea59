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

/**
 * Command line front end. Exit status: 0 when every check passes, 1 on a
 * violation (type error, property failure, monitor finding), 2 on a usage,
 * parse or load error.
 */

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ftmpst/failure_patterns.hh"
#include "ftmpst/harness.hh"
#include "ftmpst/metatheory.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/projection.hh"
#include "ftmpst/semantics.hh"
#include "ftmpst/typesystem.hh"

namespace ftmpst {
namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

/** Thrown for errors that must exit with kUsage. */
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

uint64_t DefaultSeed() {
  const char* env = std::getenv("FTMPST_SEED");
  if (!env || !*env) return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw UsageError(std::string("FTMPST_SEED is not a number: ") + env);
  }
}

/** The named process, or the last process declaration of the file. */
std::string PickProcess(const SourceFile& file, const std::string& name) {
  if (!name.empty()) return name;
  for (auto it = file.decls.rbegin(); it != file.decls.rend(); ++it) {
    if (it->kind == DeclKind::kProcess) return it->name;
  }
  throw UsageError("the file declares no process");
}

/** The named global type, else the first global declaration, channel or
 * session type. */
Global PickGlobal(const SourceFile& file, const std::string& name) {
  if (!name.empty()) {
    if (const Declaration* d = file.Find(name);
        d && d->kind == DeclKind::kGlobal)
      return d->global;
    if (file.channels.count(name)) return file.channels.at(name);
    if (file.sessions.count(name)) return file.sessions.at(name);
    throw UsageError("no global type named '" + name + "'");
  }
  for (const Declaration& d : file.decls) {
    if (d.kind == DeclKind::kGlobal) return d.global;
  }
  if (!file.channels.empty()) return file.channels.begin()->second;
  if (!file.sessions.empty()) return file.sessions.begin()->second;
  throw UsageError("the file declares no global type");
}

std::unique_ptr<FailurePatternSet> Patterns(const std::string& name,
                                            uint64_t seed, int n) {
  auto fp = MakePatterns(name, seed, n);
  if (!fp) throw UsageError("unknown pattern set '" + name + "'");
  return fp;
}

/** Initial session environment of every declared running session. */
SessionEnv DeclaredSessions(const SourceFile& file) {
  SessionEnv delta;
  for (const auto& [s, G] : file.sessions) {
    delta = delta.Compose(InitialEnv(G, s));
  }
  return delta;
}

std::vector<int64_t> ParseCsv(const std::string& csv) {
  std::vector<int64_t> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number in list: '" + item + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands.

struct ProjectArgs {
  std::string file;
  std::string global;
  int role = 0;
  bool all = false;
};

int CmdProject(const ProjectArgs& a) {
  SourceFile file = ParseFile(a.file);
  Global G = PickGlobal(file, a.global);
  WellFormedness wf = WellFormed(G);
  for (const std::string& v : wf.violations)
    std::cerr << "ill-formed: " << v << "\n";
  if (!wf.ok()) return kViolation;
  try {
    if (a.all) {
      for (const auto& [r, T] : ProjectAll(G))
        std::cout << r << ": " << Pretty(T) << "\n";
    } else {
      std::cout << Pretty(Project(G, a.role)) << "\n";
    }
  } catch (const ProjectionError& e) {
    std::cerr << "projection undefined: " << e.what() << "\n";
    return kViolation;
  }
  return kOk;
}

struct CheckArgs {
  std::string file;
  std::string process;
  bool explain = false;
  int budget = 0;
};

int CmdCheck(const CheckArgs& a) {
  SourceFile file = ParseFile(a.file);
  std::string name = PickProcess(file, a.process);
  Configuration cfg = LoadConfiguration(file, name);
  GlobalEnv gamma = GlobalEnv::FromSource(file);
  SessionEnv delta = DeclaredSessions(file);
  for (const auto& [ch, G] : file.channels) {
    WellFormedness wf = WellFormed(G);
    for (const std::string& v : wf.violations)
      std::cerr << "channel " << ch << " ill-formed: " << v << "\n";
    if (!wf.ok()) return kViolation;
  }
  try {
    Derivation d = Typecheck(gamma, {}, cfg.term(), delta);
    if (a.explain) std::cout << d.Explain();
  } catch (const TypeError& e) {
    std::cerr << "type error in " << name << ": " << e.what() << "\n";
    if (!e.expected().empty()) std::cerr << "  expected: " << e.expected() << "\n";
    if (!e.actual().empty()) std::cerr << "  actual:   " << e.actual() << "\n";
    return kViolation;
  }
  Coherence c = delta.empty() ? Coherence::kCoherent
                              : Coherent(gamma, delta, a.budget);
  std::cout << name << ": well-typed, " << CoherenceName(c) << "\n";
  return c == Coherence::kCoherent ? kOk : kViolation;
}

struct RunArgs {
  std::string file;
  std::string process;
  std::string patterns = "failure-free";
  std::string scheduler = "fair";
  std::optional<uint64_t> seed;
  int64_t max_steps = 1000;
  std::string trace_out;
  bool monitor = false;
  int n = 3;
};

int CmdRun(const RunArgs& a) {
  SourceFile file = ParseFile(a.file);
  Configuration cfg = LoadConfiguration(file, PickProcess(file, a.process));
  uint64_t seed = a.seed.value_or(DefaultSeed());
  auto fp = Patterns(a.patterns, seed, a.n);
  std::unique_ptr<Scheduler> sched;
  if (a.scheduler == "fair") {
    sched = std::make_unique<FairScheduler>(DeriveSeed(seed, 1));
  } else if (a.scheduler == "random") {
    sched = std::make_unique<RandomScheduler>(DeriveSeed(seed, 1));
  } else {
    throw UsageError("unknown scheduler '" + a.scheduler + "'");
  }
  RunOptions ro;
  ro.max_steps = a.max_steps;
  Trace tr = Run(cfg, *fp, *sched, ro);
  if (!a.trace_out.empty()) {
    std::ofstream out(a.trace_out);
    if (!out) throw UsageError("cannot write " + a.trace_out);
    out << tr.ToJsonl();
  }
  std::cout << "steps: " << tr.steps.size()
            << (tr.truncated ? " (truncated)" : "") << "\n";
  std::cout << "final: " << tr.final.ToString() << "\n";
  for (const ExitRecord& x : tr.final.exits()) {
    std::cout << "exit: " << x.actor.ToString() << " loop " << x.id.ToString()
              << " value " << x.value.ToString() << " counter " << x.counter
              << (x.initiated ? " initiated" : " adopted") << "\n";
  }
  int status = kOk;
  for (const TraceViolation& v : CheckTrace(tr)) {
    std::cout << "trace check: " << v.ToString() << "\n";
    status = kViolation;
  }
  if (a.monitor) {
    ConditionReport rep = MonitorCondition1(tr, fp.get());
    std::cout << "monitor: " << rep.ToString();
    if (!rep.ok()) status = kViolation;
  }
  return status;
}

struct ExploreArgs {
  std::string file;
  std::string process;
  std::string patterns = "failure-free";
  std::optional<uint64_t> seed;
  int depth = 10;
  size_t budget = 200000;
  bool print = false;
  int n = 3;
};

int CmdExplore(const ExploreArgs& a) {
  SourceFile file = ParseFile(a.file);
  Configuration cfg = LoadConfiguration(file, PickProcess(file, a.process));
  auto fp = Patterns(a.patterns, a.seed.value_or(DefaultSeed()), a.n);
  ExploreResult ex = Explore(cfg, *fp, a.depth, a.budget);
  size_t terminal = 0, stuck = 0, frontier = 0;
  for (size_t i = 0; i < ex.states.size(); ++i) {
    if (ex.frontier[i]) {
      ++frontier;
    } else if (ex.successors[i].empty()) {
      ++terminal;
      if (!IsPrefixFree(ex.states[i])) {
        ++stuck;
        std::cout << "stuck: " << ex.states[i].ToString() << "\n";
      }
    }
    if (a.print)
      std::cout << "[" << ex.depth[i] << "] " << ex.states[i].ToString()
                << "\n";
  }
  std::cout << "states: " << ex.states.size() << ", terminal: " << terminal
            << ", frontier: " << frontier << ", stuck: " << stuck
            << (ex.budget_exceeded ? ", budget exceeded" : "") << "\n";
  return stuck == 0 ? kOk : kViolation;
}

struct RcArgs {
  int n = 3;
  std::string beliefs = "0,1,1";
  int runs = 100;
  std::optional<uint64_t> seed;
  std::string patterns = "rc-diamond-s";
  int64_t max_steps = 20000;
  int round_bound = 0;
  int forced_crash = 0;
  int64_t forced_crash_step = 0;
  bool no_random_crashes = false;
  bool monitor = false;
  bool typecheck = false;
  bool multi_exit = false;
  bool source = false;
  bool verbose = false;
  int threads = 0;
};

int CmdRc(const RcArgs& a) {
  std::vector<int64_t> beliefs = ParseCsv(a.beliefs);
  RcSystem rc;
  try {
    rc = BuildRc(a.n, beliefs);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.source) {
    std::cout << RcSource(a.n, beliefs);
    return kOk;
  }
  uint64_t seed = a.seed.value_or(DefaultSeed());
  int status = kOk;
  if (a.typecheck) {
    std::string err = CheckRcTyping(rc);
    std::cout << "typing: " << (err.empty() ? "ok" : err) << "\n";
    if (!err.empty()) status = kViolation;
  }
  if (a.multi_exit) {
    MultiExitWitness w = FindMultiExit(rc, seed);
    std::cout << "multiple exits: "
              << (w.found ? "found" : "not found") << " after " << w.attempts
              << " attempt(s)";
    for (const Value& v : w.values) std::cout << " " << v.ToString();
    std::cout << "\n";
    if (!w.found) status = kViolation;
  }
  if (a.runs > 0) {
    RcRunOptions o;
    o.patterns = a.patterns;
    o.max_steps = a.max_steps;
    o.round_bound = a.round_bound;
    if (a.forced_crash > 0) o.forced_crash = a.forced_crash;
    o.forced_crash_step = a.forced_crash_step;
    o.random_crashes = !a.no_random_crashes;
    o.monitor = a.monitor;
    RcReport rep = RcExperiment(a.n, beliefs, a.runs, seed, o, a.threads);
    if (a.verbose) {
      for (const RcOutcome& out : rep.outcomes)
        std::cout << out.ToString() << "\n";
    }
    std::cout << rep.ToString();
    if (!rep.ok()) status = kViolation;
  }
  return status;
}

struct MetaArgs {
  std::string suite;
  int samples = 20;
  int systems = 50;
  int roles = 3;
  int depth = 6;
  int trace_depth = 30;
  std::optional<uint64_t> seed;
  std::string patterns;
  bool rc = false;
};

int CmdMeta(const MetaArgs& a) {
  uint64_t seed = a.seed.value_or(DefaultSeed());
  int status = kOk;
  if (a.suite == "sr") {
    std::vector<SystemUnderTest> suts = GenerateSystems(
        a.roles, a.depth, OperatorMix{}, seed, a.systems);
    if (a.rc) suts.push_back(RcSystemUnderTest(3, {0, 1, 1}));
    SrOptions so;
    so.depth = a.trace_depth;
    so.samples = a.samples;
    int64_t steps = 0;
    size_t bad = 0;
    for (size_t i = 0; i < suts.size(); ++i) {
      std::string pat = a.patterns;
      if (pat.empty()) pat = suts[i].name.rfind("rc", 0) == 0
                                 ? "rc-diamond-s"
                                 : "chaotic-c1";
      auto fp = Patterns(pat, DeriveSeed(seed, i), suts[i].roles);
      so.seed = DeriveSeed(seed, 1000 + i);
      SrReport rep = CheckSubjectReduction(suts[i], *fp, so);
      steps += rep.steps_checked;
      if (!rep.ok()) {
        ++bad;
        std::cout << suts[i].name << ": " << rep.ToString();
      }
    }
    std::cout << "subject reduction: " << suts.size() << " system(s), "
              << steps << " step(s) typed, " << bad << " failing\n";
    if (bad) status = kViolation;
  } else if (a.suite == "progress") {
    std::vector<SystemUnderTest> suts = GenerateSystems(
        a.roles, a.depth, OperatorMix::Finite(), seed, a.systems);
    size_t bad = 0, states = 0;
    for (size_t i = 0; i < suts.size(); ++i) {
      auto fp = Patterns(a.patterns.empty() ? "chaotic-c1" : a.patterns,
                         DeriveSeed(seed, i), suts[i].roles);
      ProgressReport rep = CheckProgress(suts[i], *fp, 4 * a.depth + 8);
      states += rep.states;
      if (!rep.ok() || rep.depth_insufficient || rep.budget_exceeded) {
        ++bad;
        std::cout << suts[i].name << ": " << rep.ToString();
      }
    }
    std::cout << "progress: " << suts.size() << " system(s), " << states
              << " state(s), " << bad << " failing\n";
    if (bad) status = kViolation;
  } else if (a.suite == "mutations") {
    std::vector<SystemUnderTest> suts = GenerateSystems(
        a.roles, a.depth, OperatorMix{}, seed, a.systems);
    suts.push_back(RcSystemUnderTest(3, {0, 1, 1}));
    MutationReport rep = RunMutationSuite(suts, a.samples, a.trace_depth, seed);
    std::cout << rep.ToString();
    if (!rep.ok()) status = kViolation;
  } else {
    throw UsageError("unknown suite '" + a.suite + "'");
  }
  return status;
}

int Main(int argc, char** argv) {
  CLI::App app{"Fault-tolerant multiparty session types: projection, typing, "
               "execution and property suites"};
  app.require_subcommand(1);

  ProjectArgs pa;
  auto* project = app.add_subcommand("project", "Project a global type");
  project->add_option("file", pa.file, "Source file")->required();
  project->add_option("--role,-r", pa.role, "Role to project onto");
  project->add_option("--global,-g", pa.global,
                      "Global declaration, channel or session name");
  project->add_flag("--all", pa.all, "Project onto every role");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Typecheck a process");
  check->add_option("file", ca.file, "Source file")->required();
  check->add_option("--process,-p", ca.process, "Process declaration");
  check->add_flag("--explain", ca.explain, "Print the derivation");
  check->add_option("--budget", ca.budget,
                    "Evolution steps for the coherence search");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run a process");
  run->add_option("file", ra.file, "Source file")->required();
  run->add_option("--process,-p", ra.process, "Process declaration");
  run->add_option("--patterns", ra.patterns,
                  "failure-free | chaotic | chaotic-c1 | rc-diamond-s");
  run->add_option("--scheduler", ra.scheduler, "fair | random");
  run->add_option("--seed", ra.seed, "Seed (default $FTMPST_SEED or 0)");
  run->add_option("--max-steps", ra.max_steps, "Step bound");
  run->add_option("--trace-out", ra.trace_out, "JSON-lines trace file");
  run->add_flag("--monitor", ra.monitor, "Check Condition 1 on the trace");
  run->add_option("--roles", ra.n, "Role count for rc-diamond-s");

  ExploreArgs ea;
  auto* explore = app.add_subcommand("explore", "Explore the state space");
  explore->add_option("file", ea.file, "Source file")->required();
  explore->add_option("--process,-p", ea.process, "Process declaration");
  explore->add_option("--patterns", ea.patterns, "Pattern set");
  explore->add_option("--seed", ea.seed, "Seed (default $FTMPST_SEED or 0)");
  explore->add_option("--depth,-d", ea.depth, "Depth bound");
  explore->add_option("--budget", ea.budget, "State budget");
  explore->add_flag("--print", ea.print, "Print every state");
  explore->add_option("--roles", ea.n, "Role count for rc-diamond-s");

  RcArgs rca;
  auto* rc = app.add_subcommand("rc", "Rotating-coordinator experiment");
  rc->add_option("--n", rca.n, "Role count (>= 3)");
  rc->add_option("--beliefs", rca.beliefs, "Comma separated 0/1 beliefs");
  rc->add_option("--runs", rca.runs, "Number of runs");
  rc->add_option("--seed", rca.seed, "Seed (default $FTMPST_SEED or 0)");
  rc->add_option("--patterns", rca.patterns, "Pattern set");
  rc->add_option("--max-steps", rca.max_steps, "Step bound per run");
  rc->add_option("--round-bound", rca.round_bound,
                 "Rounds allowed before deciding (0: 3n)");
  rc->add_option("--forced-crash", rca.forced_crash, "Role forced to crash");
  rc->add_option("--forced-crash-step", rca.forced_crash_step,
                 "Step from which the forced crash is offered");
  rc->add_flag("--no-random-crashes", rca.no_random_crashes,
               "Only forced crashes");
  rc->add_flag("--monitor", rca.monitor, "Check Condition 1 on every run");
  rc->add_flag("--typecheck", rca.typecheck, "Typecheck the system first");
  rc->add_flag("--multi-exit", rca.multi_exit,
               "Search a schedule with several initiated exits");
  rc->add_flag("--source", rca.source, "Print the system source and stop");
  rc->add_flag("--verbose,-v", rca.verbose, "Print every run");
  rc->add_option("--threads", rca.threads, "Workers (0: hardware)");

  MetaArgs ma;
  auto* meta = app.add_subcommand("meta", "Metatheory property suites");
  meta->add_option("suite", ma.suite, "sr | progress | mutations")
      ->required();
  meta->add_option("--samples", ma.samples, "Traces per system");
  meta->add_option("--systems", ma.systems, "Generated systems");
  meta->add_option("--roles", ma.roles, "Maximum roles per system");
  meta->add_option("--depth", ma.depth, "Maximum prefixes per path");
  meta->add_option("--trace-depth", ma.trace_depth, "Steps per trace");
  meta->add_option("--seed", ma.seed, "Seed (default $FTMPST_SEED or 0)");
  meta->add_option("--patterns", ma.patterns, "Pattern set override");
  meta->add_flag("--rc", ma.rc, "Add RC(3) to the subject reduction suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (*project) return CmdProject(pa);
    if (*check) return CmdCheck(ca);
    if (*run) return CmdRun(ra);
    if (*explore) return CmdExplore(ea);
    if (*rc) return CmdRc(rca);
    if (*meta) return CmdMeta(ma);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const LoadError& e) {
    std::cerr << "load error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  }
  return kUsage;
}

}  // namespace
}  // namespace ftmpst

int main(int argc, char** argv) { return ftmpst::Main(argc, argv); }
