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

#ifndef FTMPST_HARNESS_HH_
#define FTMPST_HARNESS_HH_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftmpst/failure_patterns.hh"
#include "ftmpst/parser.hh"
#include "ftmpst/semantics.hh"
#include "ftmpst/typesystem.hh"

namespace ftmpst {

/** Coordinator of round r among n roles: (r mod n) + 1. */
Role RcCoordinator(int64_t r, int n);

/** Most frequent non-bottom Bel entry, ties toward the smaller value;
 * throws EvalError when every entry is bottom. */
int64_t RcBest(const std::vector<Value>& K);

/** Number of entries equal to true. */
int64_t RcCountAck(const std::vector<Value>& K);

/** Majority threshold ceil((n - 1) / 2); no role sends to itself. */
int64_t RcThreshold(int n);

/** Source text of the rotating-coordinator system: labels, the global type
 * RC, the channel a : RC and the process RC_Sys. */
std::string RcSource(int n, const std::vector<int64_t>& beliefs);

struct RcSystem {
  int n = 0;
  std::vector<int64_t> beliefs;
  SourceFile file;
  GlobalEnv gamma;
  Global G;
  /** One request (role n) and n - 1 accepts. */
  Configuration cfg;
};

/** Throws std::invalid_argument unless n >= 3 and |beliefs| = n with
 * entries in {0, 1}. */
RcSystem BuildRc(int n, const std::vector<int64_t>& beliefs);

/** Typechecks the request/accept system and, after session initialization,
 * the running system against the projections of RC with a coherence check
 * at budget 0. Returns an empty string on success, the error otherwise. */
std::string CheckRcTyping(const RcSystem& rc);

struct RcRunOptions {
  std::string patterns = "rc-diamond-s";
  int64_t max_steps = 20000;
  /** Termination requires every correct role to decide before this many
   * rounds; 0 selects 3n. */
  int round_bound = 0;
  std::optional<Role> forced_crash;
  int64_t forced_crash_step = 0;
  bool random_crashes = true;
  int64_t max_stabilization = 200;
  /** Keep the trace in the outcome (memory heavy for long runs). */
  bool keep_trace = false;
  /** Run the Condition 1 monitor on the trace. */
  bool monitor = false;
};

struct RcOutcome {
  uint64_t seed = 0;
  /** Per role (index r - 1): decision, if the role left loop 1. */
  std::vector<std::optional<int64_t>> decision;
  std::vector<bool> crashed;
  /** Per role: loop counter when deciding, or the last counter reached. */
  std::vector<int64_t> rounds;
  /** Exits initiated by a coordinator, in trace order. */
  std::vector<ExitRecord> initiated;
  int64_t steps = 0;
  bool truncated = false;
  bool agreement = true;
  bool validity = true;
  bool termination = true;
  std::optional<ConditionReport> monitor;
  /** Wall time spent inside the monitor. */
  double monitor_seconds = 0;
  std::optional<Trace> trace;

  std::string ToString() const;
};

RcOutcome RunRc(const RcSystem& rc, uint64_t seed, const RcRunOptions& opts);

struct RcReport {
  int n = 0;
  std::vector<int64_t> beliefs;
  std::vector<RcOutcome> outcomes;
  int agreement_failures = 0;
  int validity_failures = 0;
  int termination_failures = 0;
  int monitor_failures = 0;
  int multi_exit_runs = 0;
  int crashed_runs = 0;

  bool ok() const {
    return agreement_failures == 0 && validity_failures == 0 &&
           termination_failures == 0 && monitor_failures == 0;
  }
  std::string ToString() const;
};

/** runs independent runs with seeds derived from seed, spread over
 * threads workers (0: hardware concurrency). */
RcReport RcExperiment(int n, const std::vector<int64_t>& beliefs, int runs,
                      uint64_t seed, const RcRunOptions& opts,
                      int threads = 0);

/** Per-run seed derived from the experiment seed and the run index. */
uint64_t DeriveSeed(uint64_t seed, uint64_t index);

struct MultiExitWitness {
  bool found = false;
  /** Values carried by the initiated exits of loop 1. */
  std::vector<Value> values;
  int64_t attempts = 0;
  Trace trace;
};

/**
 * Searches for a schedule of RC(3) under rc-diamond-s in which at least two
 * coordinators initiate the exit of loop 1. Each attempt is a seeded random
 * schedule without random crashes that postpones LExitG while any other
 * redex is enabled.
 */
MultiExitWitness FindMultiExit(const RcSystem& rc, uint64_t seed,
                               int64_t max_attempts = 2000,
                               int64_t max_steps = 400);

}  // namespace ftmpst

#endif  // FTMPST_HARNESS_HH_
