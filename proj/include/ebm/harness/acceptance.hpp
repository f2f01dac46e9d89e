// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ebm::harness {

// One measured quantity against its threshold.
struct Check {
  std::string name;
  double measured = 0;
  std::string relation;  // "<=", ">=", "<", ">", "=="
  double threshold = 0;
  bool pass = false;
  std::string note;  // free text printed after the numbers
};

Check check_le(std::string name, double measured, double threshold, std::string note = {});
Check check_lt(std::string name, double measured, double threshold, std::string note = {});
Check check_ge(std::string name, double measured, double threshold, std::string note = {});
Check check_gt(std::string name, double measured, double threshold, std::string note = {});
// Informational row; always passes.
Check info(std::string name, double measured, std::string note = {});

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<Check> checks;
  bool pass() const;
};

struct Criterion {
  int id = 0;
  std::string name;
  std::vector<std::string> suites;  // every criterion is also in "all"
  double time_limit_seconds = 0;
  std::function<std::vector<Check>(std::uint64_t seed)> run;
};

// Criteria 1-11 in order. Criterion 12 (repeatability of the whole report)
// is checked by running the suite twice, so it is not a registry entry.
const std::vector<Criterion>& acceptance_criteria();

std::vector<std::string> suite_names();
// Throws std::invalid_argument for an unknown suite.
std::vector<const Criterion*> suite_members(const std::string& suite);

struct SuiteRun {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CriterionResult> results;
  std::vector<double> seconds;  // wall time per criterion; not part of the report
  bool pass() const;
};

// `progress` is called before each criterion starts.
SuiteRun run_suite(const std::string& suite, std::uint64_t seed,
                   const std::function<void(const Criterion&)>& progress = {});

// Deterministic CSV report (no timings): a header line, then
// criterion,name,check,measured,relation,threshold,status,note rows, one
// summary row per criterion, and a final total row.
void write_report(std::ostream& out, const SuiteRun& run, const std::string& header);

// Header line of a verify report: tool version, hash of (suite, seed), seed.
std::string verify_header(const std::string& suite, std::uint64_t seed);

// Six significant digits; nan and inf spelled out.
std::string format_number(double v);

// Individual criteria, exposed for focused tests.
std::vector<Check> criterion_oracle_equivalence(std::uint64_t seed);
std::vector<Check> criterion_gradient_suite(std::uint64_t seed);
std::vector<Check> criterion_samplers(std::uint64_t seed);
std::vector<Check> criterion_learners(std::uint64_t seed);
std::vector<Check> criterion_label_bias(std::uint64_t seed);
std::vector<Check> criterion_residual_bounds(std::uint64_t seed);
std::vector<Check> criterion_ising_phases(std::uint64_t seed);
std::vector<Check> criterion_ctc_crf(std::uint64_t seed);
std::vector<Check> criterion_jrf_ssl(std::uint64_t seed);
std::vector<Check> criterion_transducer(std::uint64_t seed);
std::vector<Check> criterion_appendix_invariants(std::uint64_t seed);

}  // namespace ebm::harness
