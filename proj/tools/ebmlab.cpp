// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

// ebmlab: experiment runner.
//
//   ebmlab train  --config FILE    fit a CRF or CRF transducer on CoNLL data
//   ebmlab score  --config FILE    per-sentence scores of labeled data
//   ebmlab decode --config FILE    label raw token lines
//   ebmlab sample --config FILE    Ising or RBM Gibbs chains
//   ebmlab demo   --config FILE    bundled worked examples
//   ebmlab verify SUITE [--seed N] [--report FILE]
//
// Exit codes: 0 success, 1 runtime failure (or a failing verify), 2 bad
// command line or config.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebm/error.hpp"
#include "ebm/harness/acceptance.hpp"
#include "ebm/harness/config.hpp"
#include "ebm/models/ising.hpp"
#include "ebm/models/rbm.hpp"
#include "ebm/samplers.hpp"
#include "ebm/seq/conll.hpp"
#include "ebm/seq/crf.hpp"
#include "ebm/seq/crf_transducer.hpp"
#include "ebm/seq/label_bias.hpp"
#include "ebm/seq/vocab.hpp"
#include "ebm/tiny_net.hpp"

namespace {

using nlohmann::json;
using namespace ebm;
using harness::ConfigError;
using harness::ExperimentConfig;
using harness::OutputDir;

constexpr std::uint64_t kMaxExactLabelings = std::uint64_t{1} << 20;

// ---------------------------------------------------------------------------
// Schemas. Every key a config file may set, with its default.

json train_schema() {
  return {{"seed", 0},
          {"output_dir", "out/train"},
          {"task", "crf"},  // crf | crf-transducer
          {"train_file", nullptr},
          {"steps", 500},
          {"batch", 10},
          {"lr", 0.05},
          {"l2", 0.001},
          {"trace_every", 10},
          {"crf", {{"window", 1}, {"hidden", 0}}},
          {"transducer",
           {{"window", 1}, {"transcription_hidden", 0}, {"embedding", 4}, {"prediction_hidden", 8}, {"width", 4}}}};
}

json score_schema() {
  return {{"seed", 0}, {"output_dir", "out/score"}, {"model_file", nullptr}, {"data_file", nullptr}, {"width", 4}};
}

json decode_schema() {
  return {{"seed", 0}, {"output_dir", "out/decode"}, {"model_file", nullptr}, {"input_file", nullptr}, {"width", 4}};
}

json sample_schema() {
  return {{"seed", 0},
          {"output_dir", "out/sample"},
          {"model", "ising"},  // ising | rbm
          {"steps", 1000},
          {"burn_in", 0.1},
          {"trace_every", 10},
          {"ising",
           {{"side", 16}, {"temperature", 2.27}, {"coupling", 1.0}, {"field", 0.0}, {"snapshot_every", 0}, {"scale", 4}}},
          {"rbm", {{"visible", 16}, {"hidden", 8}, {"scale", 1.0}, {"chains", 4}}}};
}

json demo_schema() {
  return {{"seed", 0},
          {"output_dir", "out/demo"},
          {"demo", "none"},  // none | label-bias | ising
          {"steps", 0},      // 0: the demo's own default
          {"label_bias", {{"epsilon", 0.1}, {"steps", 5000}, {"lr", 1.0}, {"l2", 0.001}}},
          {"ising",
           {{"side", 64},
            {"sweeps", 1000},
            {"temperatures", {5.0, 2.5, 2.4, 2.3, 2.0}},
            {"snapshot_every", 100},
            {"coupling", 1.0},
            {"scale", 4}}}};
}

template <class T>
T get(const ExperimentConfig& cfg, const std::string& key) {
  return cfg.at(key).get<T>();
}

void require_one_of(const ExperimentConfig& cfg, const std::string& key, const std::vector<std::string>& allowed) {
  const auto v = get<std::string>(cfg, key);
  for (const auto& a : allowed)
    if (v == a) return;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  throw ConfigError(key + ": '" + v + "' is not one of " + list);
}

void require_positive(const ExperimentConfig& cfg, const std::string& key) {
  if (!(cfg.at(key).get<double>() > 0)) throw ConfigError(key + ": must be positive");
}

std::string format(double v) { return harness::format_number(v); }

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

// ---------------------------------------------------------------------------
// Tagging models and their on-disk form.

struct Tagger {
  std::string task;
  Vocab words, labels;
  json options;
  std::unique_ptr<LinearChainCrf> crf;
  std::unique_ptr<CrfTransducer> transducer;
  ParamVector params;

  void build() {
    if (task == "crf") {
      crf = std::make_unique<LinearChainCrf>(
          words.size(), labels.size(),
          CrfOptions{options.at("window").get<int>(), options.at("hidden").get<std::size_t>()});
      crf->add_blocks(params);
    } else {
      TransducerOptions o;
      o.window = options.at("window").get<int>();
      o.transcription_hidden = options.at("transcription_hidden").get<std::size_t>();
      o.embedding = options.at("embedding").get<std::size_t>();
      o.prediction_hidden = options.at("prediction_hidden").get<std::size_t>();
      transducer = std::make_unique<CrfTransducer>(words.size(), labels.size(), o);
      transducer->add_blocks(params);
    }
  }

  std::vector<int> decode(std::span<const int> x, std::size_t width) const {
    return crf ? crf->viterbi(params, x).labels : crft_decode(*transducer, params, x, width);
  }

  double score(std::span<const int> x, std::span<const int> y) const {
    return crf ? crf->score(params, x, y) : transducer->score(params, x, y);
  }

  // log p(y | x); NaN when the transducer normalizer is too large to enumerate.
  double log_prob(std::span<const int> x, std::span<const int> y) const {
    if (crf) return crf->log_conditional(params, x, y);
    if (std::pow(double(labels.size()), double(x.size())) > double(kMaxExactLabelings)) return std::nan("");
    return -crft_exact_loss(*transducer, params, x, y);
  }
};

std::vector<std::string> tokens_of(const Vocab& v) {
  std::vector<std::string> out;
  for (int i = 0; i < v.size(); ++i) out.push_back(v.token(i));
  return out;
}

json tagger_json(const Tagger& t) {
  std::ostringstream ck;
  save_checkpoint(ck, t.params);
  return {{"task", t.task},
          {"options", t.options},
          {"words", tokens_of(t.words)},
          {"labels", tokens_of(t.labels)},
          {"checkpoint", json::parse(ck.str())}};
}

Tagger load_tagger(const std::string& path) {
  auto in = open_input(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  Tagger t;
  try {
    t.task = j.at("task").get<std::string>();
    if (t.task != "crf" && t.task != "crf-transducer") throw Error(path + ": unknown task " + t.task);
    t.options = j.at("options");
    t.words = Vocab(j.at("words").get<std::vector<std::string>>());
    t.words.set_unk();
    t.labels = Vocab(j.at("labels").get<std::vector<std::string>>());
    t.build();
    std::istringstream ck(j.at("checkpoint").dump());
    const auto loaded = load_checkpoint(ck);
    if (loaded.size() != t.params.size()) throw Error(path + ": checkpoint does not match the model shape");
    t.params.assign(loaded.values());
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  return t;
}

// ---------------------------------------------------------------------------
// Commands.

// trace.csv: step,loss (mean training loss of the batch at that step)
// model.json: task, options, vocabularies and parameter checkpoint
void run_train(const ExperimentConfig& cfg) {
  require_one_of(cfg, "task", {"crf", "crf-transducer"});
  require_positive(cfg, "lr");
  if (get<std::size_t>(cfg, "batch") == 0) throw ConfigError("batch: must be positive");
  if (get<std::string>(cfg, "task") == "crf-transducer" && get<std::size_t>(cfg, "transducer.width") == 0)
    throw ConfigError("transducer.width: must be positive");

  Tagger t;
  t.task = get<std::string>(cfg, "task");
  t.words.set_unk();
  auto in = open_input(get<std::string>(cfg, "train_file"));
  const auto data = read_conll(in, t.words, t.labels, true);
  if (data.empty()) throw Error("no sentences in " + get<std::string>(cfg, "train_file"));
  t.options = t.task == "crf" ? cfg.at("crf") : cfg.at("transducer");
  t.build();

  const auto every = get<std::uint64_t>(cfg, "trace_every");
  std::ostringstream trace;
  trace << "step,loss\n";
  auto on_step = [&](std::uint64_t step, double loss) {
    if (every && (step + 1) % every == 0) trace << step + 1 << "," << format(loss) << "\n";
  };
  Rng init_rng(cfg.seed, 101);
  if (t.crf) {
    t.crf->init(t.params, init_rng, 0.1);
    CrfTrainConfig c;
    c.steps = get<std::uint64_t>(cfg, "steps");
    c.batch = get<std::size_t>(cfg, "batch");
    c.lr = get<double>(cfg, "lr");
    c.l2 = get<double>(cfg, "l2");
    c.seed = cfg.seed;
    c.on_step = on_step;
    crf_cml_train(*t.crf, t.params, data, c);
  } else {
    t.transducer->init(t.params, init_rng, 0.3);
    TransducerTrainConfig c;
    c.steps = get<std::uint64_t>(cfg, "steps");
    c.batch = get<std::size_t>(cfg, "batch");
    c.width = get<std::size_t>(cfg, "transducer.width");
    c.lr = get<double>(cfg, "lr");
    c.l2 = get<double>(cfg, "l2");
    c.seed = cfg.seed;
    c.on_step = on_step;
    crft_train_beam(*t.transducer, t.params, data, c);
  }
  OutputDir out(cfg);
  out.write_json("model.json", tagger_json(t));
  out.write_text("trace.csv", trace.str());
  out.write_manifest();
}

// scores.csv: sentence,length,score,log_prob,correct
//   score is the unnormalized potential of the gold labels, log_prob is
//   log p(gold | words) (nan for a transducer sentence with more than 2^20
//   labelings), correct counts positions where the decoded label is gold.
// summary.csv: sentences,tokens,token_accuracy,mean_log_prob
void run_score(const ExperimentConfig& cfg) {
  const auto t = load_tagger(get<std::string>(cfg, "model_file"));
  Vocab words = t.words, labels = t.labels;
  auto in = open_input(get<std::string>(cfg, "data_file"));
  const auto data = read_conll(in, words, labels, false);
  const auto width = get<std::size_t>(cfg, "width");
  if (width == 0) throw ConfigError("width: must be positive");

  std::ostringstream rows;
  rows << "sentence,length,score,log_prob,correct\n";
  std::size_t tokens = 0, correct = 0, scored = 0;
  double total_lp = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data[i];
    const auto pred = t.decode(s.words, width);
    std::size_t c = 0;
    for (std::size_t k = 0; k < pred.size(); ++k) c += pred[k] == s.labels[k];
    const double lp = t.log_prob(s.words, s.labels);
    if (!std::isnan(lp)) total_lp += lp, ++scored;
    tokens += s.words.size();
    correct += c;
    rows << i << "," << s.words.size() << "," << format(t.score(s.words, s.labels)) << "," << format(lp) << "," << c
         << "\n";
  }
  std::ostringstream summary;
  summary << "sentences,tokens,token_accuracy,mean_log_prob\n"
          << data.size() << "," << tokens << "," << format(tokens ? double(correct) / double(tokens) : 0.0) << ","
          << format(scored ? total_lp / double(scored) : std::nan("")) << "\n";
  OutputDir out(cfg);
  out.write_text("scores.csv", rows.str());
  out.write_text("summary.csv", summary.str());
  out.write_manifest();
}

// decoded.conll: token and predicted label per line, blank line between
// sentences. Unknown words keep their surface form.
void run_decode(const ExperimentConfig& cfg) {
  const auto t = load_tagger(get<std::string>(cfg, "model_file"));
  const auto width = get<std::size_t>(cfg, "width");
  if (width == 0) throw ConfigError("width: must be positive");
  auto in = open_input(get<std::string>(cfg, "input_file"));
  std::ostringstream body;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string w; ss >> w;) toks.push_back(w);
    if (toks.empty()) continue;
    std::vector<int> x;
    for (const auto& w : toks) x.push_back(t.words.id(w));
    const auto y = t.decode(x, width);
    for (std::size_t k = 0; k < toks.size(); ++k) body << toks[k] << " " << t.labels.token(y[k]) << "\n";
    body << "\n";
  }
  OutputDir out(cfg);
  out.write_text("decoded.conll", body.str());
  out.write_manifest();
}

// ising: trace.csv sweep,abs_magnetization; snapshot_NNNNNN.pgm (the final
//        state when snapshot_every is 0); summary.csv with the mean |m|
//        after burn-in.
// rbm:   trace.csv step,mean_free_energy (mean log p~(v) over the chains);
//        samples.txt with the final visible state of each chain.
void run_sample(const ExperimentConfig& cfg) {
  require_one_of(cfg, "model", {"ising", "rbm"});
  const auto steps = get<std::uint64_t>(cfg, "steps");
  const auto every = get<std::uint64_t>(cfg, "trace_every");
  const double burn = get<double>(cfg, "burn_in");
  if (!(burn >= 0 && burn < 1)) throw ConfigError("burn_in: must lie in [0, 1)");
  OutputDir out(cfg);
  std::ostringstream trace;
  if (get<std::string>(cfg, "model") == "ising") {
    const int side = get<int>(cfg, "ising.side");
    const double temp = get<double>(cfg, "ising.temperature");
    if (side < 2) throw ConfigError("ising.side: must be at least 2");
    if (!(temp > 0)) throw ConfigError("ising.temperature: must be positive");
    const auto snap = get<std::uint64_t>(cfg, "ising.snapshot_every");
    const IsingModel model(side, get<double>(cfg, "ising.coupling"), get<double>(cfg, "ising.field"), 1.0 / temp);
    const auto run = ising_sample_grid(model, steps, cfg.seed, snap, burn);
    trace << "sweep,abs_magnetization\n";
    for (std::size_t s = 0; s < run.abs_magnetization.size(); ++s)
      if (every && (s + 1) % every == 0) trace << s + 1 << "," << format(run.abs_magnetization[s]) << "\n";
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
      std::ostringstream pgm;
      write_spin_pgm(pgm, run.snapshots[i], side, get<int>(cfg, "ising.scale"));
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%06zu.pgm", snap ? (i + 1) * snap : steps);
      out.write_pgm(name, pgm.str());
    }
    out.write_text("summary.csv", "temperature,mean_abs_magnetization\n" + format(temp) + "," +
                                      format(run.mean_abs_magnetization) + "\n");
  } else {
    const int d = get<int>(cfg, "rbm.visible"), h = get<int>(cfg, "rbm.hidden");
    const auto chains = get<std::size_t>(cfg, "rbm.chains");
    if (d < 1 || h < 1 || chains == 0) throw ConfigError("rbm: visible, hidden and chains must be positive");
    Rbm rbm(d, h);
    Rng init(cfg.seed, 1);
    rbm.randomize(init, get<double>(cfg, "rbm.scale"));
    std::vector<std::vector<int>> v(chains, std::vector<int>(std::size_t(d))), hid(chains);
    std::vector<Rng> rngs;
    for (std::size_t c = 0; c < chains; ++c) {
      rngs.emplace_back(cfg.seed, 1000 + c);
      for (auto& b : v[c]) b = rngs[c].bernoulli(0.5);
      hid[c] = rbm.sample_hidden(v[c], rngs[c]);
    }
    trace << "step,mean_free_energy\n";
    for (std::uint64_t s = 1; s <= steps; ++s) {
      double mean = 0;
      for (std::size_t c = 0; c < chains; ++c) {
        rbm.block_gibbs(v[c], hid[c], rngs[c]);
        mean += rbm.potential(v[c]) / double(chains);
      }
      if (every && s % every == 0) trace << s << "," << format(mean) << "\n";
    }
    std::ostringstream samples;
    write_sample_dump(samples, "rbm", cfg.seed, std::vector<Config>(v.begin(), v.end()));
    out.write_text("samples.txt", samples.str());
  }
  out.write_text("trace.csv", trace.str());
  out.write_manifest();
}

// label-bias: label_bias.txt (ALM tie, trained ELM ordering and published
//             reference values).
// ising:      T_<temp>/sweep_NNNNNN.pgm per temperature, magnetization.csv
//             temperature,sweep,abs_magnetization and summary.csv
//             temperature,mean_abs_magnetization.
// none:       only the manifest.
void run_demo(const ExperimentConfig& cfg) {
  require_one_of(cfg, "demo", {"none", "label-bias", "ising"});
  const auto demo = get<std::string>(cfg, "demo");
  const auto steps = get<std::uint64_t>(cfg, "steps");
  OutputDir out(cfg);
  if (demo == "label-bias") {
    LabelBiasConfig c;
    c.epsilon = get<double>(cfg, "label_bias.epsilon");
    if (!(c.epsilon > 0 && c.epsilon < 1)) throw ConfigError("label_bias.epsilon: must lie in (0, 1)");
    c.steps = int(steps ? steps : get<std::uint64_t>(cfg, "label_bias.steps"));
    c.lr = get<double>(cfg, "label_bias.lr");
    c.l2 = get<double>(cfg, "label_bias.l2");
    std::ostringstream report;
    write_label_bias_report(report, label_bias_demo(c));
    out.write_text("label_bias.txt", report.str());
  } else if (demo == "ising") {
    const int side = get<int>(cfg, "ising.side");
    if (side < 2) throw ConfigError("ising.side: must be at least 2");
    const auto sweeps = steps ? steps : get<std::uint64_t>(cfg, "ising.sweeps");
    const auto snap = get<std::uint64_t>(cfg, "ising.snapshot_every");
    const auto temps = cfg.at("ising.temperatures").get<std::vector<double>>();
    for (double t : temps)
      if (!(t > 0)) throw ConfigError("ising.temperatures: must be positive");
    std::ostringstream mag, summary;
    mag << "temperature,sweep,abs_magnetization\n";
    summary << "temperature,mean_abs_magnetization\n";
    for (std::size_t i = 0; i < temps.size(); ++i) {
      // Each temperature gets its own stream derived from (seed, index).
      const auto seed = Rng(cfg.seed, i).next();
      const IsingModel model(side, get<double>(cfg, "ising.coupling"), 0.0, 1.0 / temps[i]);
      const auto run = ising_sample_grid(model, sweeps, seed, snap);
      const auto dir = "T_" + format(temps[i]);
      for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        std::ostringstream pgm;
        write_spin_pgm(pgm, run.snapshots[k], side, get<int>(cfg, "ising.scale"));
        char name[32];
        std::snprintf(name, sizeof name, "/sweep_%06llu.pgm",
                      static_cast<unsigned long long>(snap ? (k + 1) * snap : sweeps));
        out.write_pgm(dir + name, pgm.str());
      }
      for (std::size_t s = 0; s < run.abs_magnetization.size(); ++s)
        mag << format(temps[i]) << "," << s + 1 << "," << format(run.abs_magnetization[s]) << "\n";
      summary << format(temps[i]) << "," << format(run.mean_abs_magnetization) << "\n";
    }
    out.write_text("magnetization.csv", mag.str());
    out.write_text("summary.csv", summary.str());
  }
  out.write_manifest();
}

// Prints the report to stdout (and --report FILE); progress goes to stderr.
int run_verify(const std::string& suite, std::uint64_t seed, const std::string& report_file) {
  const auto members = harness::suite_members(suite);  // throws for an unknown suite
  std::size_t i = 0;
  const auto run = harness::run_suite(suite, seed, [&](const harness::Criterion& c) {
    std::cerr << "[" << ++i << "/" << members.size() << "] " << c.id << " " << c.name << "\n";
  });
  std::ostringstream report;
  harness::write_report(report, run, harness::verify_header(suite, seed));
  std::cout << report.str();
  if (!report_file.empty()) {
    std::ofstream f(report_file, std::ios::binary);
    f << report.str();
    if (!f) throw Error("cannot write " + report_file);
  }
  return run.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ebmlab: energy-based model experiments"};
  app.set_version_flag("--version", std::string(harness::kToolVersion));
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    json (*schema)();
    void (*run)(const ExperimentConfig&);
  };
  const Command commands[] = {
      {"train", "Train a CRF or CRF transducer on CoNLL data", train_schema, run_train},
      {"score", "Score labeled CoNLL data with a trained model", score_schema, run_score},
      {"decode", "Label whitespace-tokenized sentences", decode_schema, run_decode},
      {"sample", "Run Ising or RBM Gibbs chains", sample_schema, run_sample},
      {"demo", "Run a bundled worked example", demo_schema, run_demo},
  };
  std::string config_file;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_file, "JSON config file")->required();
    subs.emplace_back(sub, &c);
  }
  auto* verify = app.add_subcommand("verify", "Run an acceptance-criteria suite");
  std::string suite, report_file;
  std::uint64_t seed = 1;
  verify->add_option("suite", suite, "Suite name")->required();
  verify->add_option("--seed", seed, "Base seed")->capture_default_str();
  verify->add_option("--report", report_file, "Also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (verify->parsed()) return run_verify(suite, seed, report_file);
    for (const auto& [sub, cmd] : subs)
      if (sub->parsed()) {
        const auto cfg = harness::load_config(cmd->name, cmd->schema(), config_file);
        cmd->run(cfg);
        std::cerr << "wrote " << cfg.output_dir.string() << "/manifest.json\n";
      }
  } catch (const ConfigError& e) {
    std::cerr << "ebmlab: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ebmlab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ebmlab: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
