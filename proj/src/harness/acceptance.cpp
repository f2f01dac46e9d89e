// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/harness/acceptance.hpp"

#include "ebm/harness/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace ebm::harness {

namespace {

Check make(std::string name, double measured, std::string rel, double threshold, bool pass,
           std::string note) {
  return {std::move(name), measured, std::move(rel), threshold, pass, std::move(note)};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

// NaN never passes.
Check check_le(std::string name, double m, double t, std::string note) {
  return make(std::move(name), m, "<=", t, m <= t, std::move(note));
}
Check check_lt(std::string name, double m, double t, std::string note) {
  return make(std::move(name), m, "<", t, m < t, std::move(note));
}
Check check_ge(std::string name, double m, double t, std::string note) {
  return make(std::move(name), m, ">=", t, m >= t, std::move(note));
}
Check check_gt(std::string name, double m, double t, std::string note) {
  return make(std::move(name), m, ">", t, m > t, std::move(note));
}
Check info(std::string name, double m, std::string note) {
  return make(std::move(name), m, "", 0, true, std::move(note));
}

bool CriterionResult::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

bool SuiteRun::pass() const {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass(); });
}

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> all = {
      {1, "oracle-equivalence", {"oracle"}, 60, criterion_oracle_equivalence},
      {2, "gradient-suite", {"oracle", "gradients"}, 120, criterion_gradient_suite},
      {3, "sampler-correctness", {"samplers"}, 120, criterion_samplers},
      {4, "learner-consistency", {"learners"}, 300, criterion_learners},
      {5, "label-bias-example", {"seq-lm"}, 10, criterion_label_bias},
      {6, "residual-bounds", {"seq-lm"}, 120, criterion_residual_bounds},
      {7, "ising-phases", {"samplers"}, 60, criterion_ising_phases},
      {8, "ctc-crf-vs-ctc", {"seq-label"}, 300, criterion_ctc_crf},
      {9, "jrf-semi-supervised", {"seq-label"}, 600, criterion_jrf_ssl},
      {10, "crf-transducer", {"seq-label"}, 300, criterion_transducer},
      {11, "appendix-invariants", {"oracle"}, 30, criterion_appendix_invariants},
  };
  return all;
}

std::vector<std::string> suite_names() {
  return {"all", "empty", "oracle", "gradients", "samplers", "learners", "seq-lm", "seq-label"};
}

std::vector<const Criterion*> suite_members(const std::string& suite) {
  const auto names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw std::invalid_argument("unknown suite '" + suite + "'");
  std::vector<const Criterion*> out;
  for (const auto& c : acceptance_criteria())
    if (suite == "all" || std::find(c.suites.begin(), c.suites.end(), suite) != c.suites.end())
      out.push_back(&c);
  return out;
}

SuiteRun run_suite(const std::string& suite, std::uint64_t seed,
                   const std::function<void(const Criterion&)>& progress) {
  SuiteRun run;
  run.suite = suite;
  run.seed = seed;
  for (const auto* c : suite_members(suite)) {
    if (progress) progress(*c);
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r{c->id, c->name, {}};
    try {
      r.checks = c->run(seed);
    } catch (const std::exception& e) {
      r.checks = {make("exception", std::nan(""), "", 0, false, e.what())};
    }
    run.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    run.results.push_back(std::move(r));
  }
  return run;
}

std::string verify_header(const std::string& suite, std::uint64_t seed) {
  const auto cfg = make_config("verify", {{"seed", 0}, {"output_dir", ""}, {"suite", ""}},
                               {{"suite", suite}, {"seed", seed}});
  return header_line(cfg);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_report(std::ostream& out, const SuiteRun& run, const std::string& header) {
  out << header << "\n";
  out << "# suite=" << run.suite << " seed=" << run.seed << "\n";
  out << "criterion,name,check,measured,relation,threshold,status,note\n";
  std::size_t passed = 0;
  for (const auto& r : run.results) {
    for (const auto& c : r.checks)
      out << r.id << "," << r.name << "," << csv_field(c.name) << "," << format_number(c.measured) << ","
          << c.relation << "," << (c.relation.empty() ? "" : format_number(c.threshold)) << ","
          << (c.pass ? "ok" : "FAIL") << "," << csv_field(c.note) << "\n";
    out << r.id << "," << r.name << ",*,,,," << (r.pass() ? "PASS" : "FAIL") << ",\n";
    passed += r.pass();
  }
  out << "total,,," << passed << "/" << run.results.size() << ",,," << (run.pass() ? "PASS" : "FAIL")
      << ",\n";
}

}  // namespace ebm::harness
