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

#ifndef FTMPST_METATHEORY_HH_
#define FTMPST_METATHEORY_HH_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ftmpst/failure_patterns.hh"
#include "ftmpst/semantics.hh"
#include "ftmpst/typesystem.hh"

namespace ftmpst {

/** Operator classes the generator may emit. */
struct OperatorMix {
  bool reliable = true;
  bool unreliable = true;
  bool branching = true;
  bool weak_branching = true;
  bool recursion = true;
  bool loops = true;

  /** Reliable and unreliable communication and both branchings only. */
  static OperatorMix Finite();
};

/** A closed system with one shared channel a : G: one request and the
 * accepts of every other role, each implementing its projection. */
struct SystemUnderTest {
  std::string name;
  GlobalEnv gamma;
  Configuration cfg;
  Global G;
  /** Declared global type per session; empty before initialization. */
  std::map<std::string, Global> sessions;
  int roles = 0;
  int depth = 0;
  bool recursion_free = true;
  /** Source text of labels, G and the channel; the process is cfg. */
  std::string source;
};

/**
 * count systems over 2 to roles roles with at most depth prefixes per path.
 * Branch continuations share their tail so that every role outside a
 * branching projects every branch equally. Deterministic in seed.
 */
std::vector<SystemUnderTest> GenerateSystems(int roles, int depth,
                                             const OperatorMix& mix,
                                             uint64_t seed, int count);

/** The canonical implementation of T by role p of session s: selections
 * pick a seeded branch, payloads and defaults are seeded literals, and the
 * lowest role of a loop leaves it after two iterations. */
Proc CanonicalProcess(const Local& T, const std::string& s, Role p,
                      uint64_t seed);

/** Rotating-coordinator instance as a system under test. */
SystemUnderTest RcSystemUnderTest(int n, const std::vector<int64_t>& beliefs);

// ---------------------------------------------------------------------------
// Trace-level checks.

struct TraceViolation {
  std::string check;
  int64_t step = 0;
  std::string detail;
  std::string ToString() const;
};

/**
 * Re-derives, step by step, properties the reduction rules promise: FIFO
 * dequeue against shadow queues, counter increments of LCall, one exit per
 * actor and loop, exit broadcasts of LExitS, delivery of the dequeued value
 * by RGet and UGet, true guards of failure rules, and crashes of nsr
 * components only.
 */
std::vector<TraceViolation> CheckTrace(const Trace& tr);

// ---------------------------------------------------------------------------
// Subject reduction.

struct SrOptions {
  int depth = 30;
  int samples = 100;
  uint64_t seed = 0;
  SemanticsOptions semantics;
  /** Also run CheckTrace on every sampled trace. */
  bool trace_checks = true;
};

struct SrViolation {
  int sample = 0;
  int64_t step = 0;
  std::string check;  // "subject-reduction" or a trace check name
  std::string detail;
  /** Rules of the trace prefix up to the violating step. */
  std::vector<std::string> prefix;
  std::string ToString() const;
};

struct SrReport {
  int samples = 0;
  int64_t steps_checked = 0;
  std::vector<SrViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string ToString() const;
};

/**
 * Samples random traces and types every configuration. The environment of
 * each restricted session is searched among its previous environment and
 * that environment's one-step evolutions.
 */
SrReport CheckSubjectReduction(const SystemUnderTest& sut,
                               const FailurePatternSet& fp,
                               const SrOptions& opts);

// ---------------------------------------------------------------------------
// Progress.

struct ProgressReport {
  size_t states = 0;
  /** Non-inert states without an enabled redex. */
  std::vector<std::string> stuck;
  /** Maximal paths ending in a state that still has prefixes (clause 2,
   * recursion- and loop-free systems only). */
  std::vector<std::string> not_prefix_free;
  /** The depth bound cut some path before it ended. */
  bool depth_insufficient = false;
  bool budget_exceeded = false;
  bool ok() const { return stuck.empty() && not_prefix_free.empty(); }
  std::string ToString() const;
};

ProgressReport CheckProgress(const SystemUnderTest& sut,
                             const FailurePatternSet& fp, int depth,
                             size_t state_budget = 200000,
                             const SemanticsOptions& semantics = {});

// ---------------------------------------------------------------------------
// Mutation sensitivity.

struct MutationResult {
  Mutation mutation = Mutation::kNone;
  bool detected = false;
  std::string by;  // check that caught it first
  std::string witness;
};

struct MutationReport {
  /** Violations found with the unmutated semantics (must be none). */
  std::vector<std::string> baseline;
  std::vector<MutationResult> results;
  bool ok() const;
  std::string ToString() const;
};

/**
 * Runs subject reduction and the trace checks on the given systems under
 * chaotic-c1, and, for the crash mutation, under unconstrained chaotic
 * patterns, once per mutation.
 */
MutationReport RunMutationSuite(const std::vector<SystemUnderTest>& suts,
                                int samples, int depth, uint64_t seed);

}  // namespace ftmpst

#endif  // FTMPST_METATHEORY_HH_
