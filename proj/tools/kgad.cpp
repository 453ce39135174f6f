/*
 * Copyright 2026 The kgad Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// kgad: inject, train, eval, baseline, gradcheck, bench, grid.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgad/config.hpp"
#include "kgad/error.hpp"
#include "kgad/forward.hpp"
#include "kgad/gradcheck.hpp"
#include "kgad/log.hpp"
#include "kgad/manifest.hpp"
#include "kgad/pipeline.hpp"

namespace fs = std::filesystem;
using namespace kgad;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Options shared by the commands that build a TrainConfig.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> assignments;  // --set key=value
  std::optional<int> runs, epochs, dim, threads;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat `key = value` config file");
    cmd->add_option("--set", assignments, "override one config key (key=value), repeatable");
    cmd->add_option("--runs", runs, "independent runs");
    cmd->add_option("--epochs", epochs, "epochs per run");
    cmd->add_option("--dim", dim, "embedding width n");
    cmd->add_option("--threads", threads, "runs trained concurrently");
    cmd->add_option("--seed", seed, "base seed (run k uses seed + k)");
  }

  // Defaults < KGAD_SEED < config file < --set < dedicated flags.
  TrainConfig resolve() const {
    TrainConfig c = default_config();
    if (!config_path.empty()) c = load_config(config_path, c);
    for (const std::string& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + a + "'");
      c.set(a.substr(0, eq), a.substr(eq + 1));
    }
    if (runs) c.runs = *runs;
    if (epochs) c.epochs = *epochs;
    if (dim) c.dim = *dim;
    if (threads) c.threads = *threads;
    if (seed) c.seed = *seed;
    c.validate();
    return c;
  }
};

RunManifest start_manifest(const std::string& command, int argc, char** argv) {
  RunManifest m;
  m.command = command;
  for (int i = 1; i < argc; ++i) m.arguments.emplace_back(argv[i]);
  m.started = utc_timestamp();
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void finish_manifest(RunManifest& m, const fs::path& artifact) {
  m.finished = utc_timestamp();
  m.write_beside(artifact);
}

std::vector<fs::path> expand_checkpoints(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const std::string& a : args) {
    if (fs::is_directory(a)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() == ".ckpt") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(a);
    }
  }
  if (out.empty()) throw UsageError("no checkpoints given");
  return out;
}

void print_summary(const MetricsReport& report) {
  const RunMetrics mean = report.mean();
  std::cout << std::fixed << std::setprecision(4) << report.method << " (" << report.runs.size()
            << " runs)";
  for (const auto& [k, p] : mean.precision_at) std::cout << "  P@" << k << "%=" << p;
  std::cout << "  R@5%=" << mean.recall_at.at(5) << "  AUC=" << mean.auc << '\n';
  std::cout.unsetf(std::ios::fixed);
}

void write_report(const MetricsReport& report, const fs::path& out, const std::string& csv,
                  RunManifest& manifest) {
  write_text(out, dump(metrics_json(report)));
  manifest.add_output(out);
  if (!csv.empty()) {
    write_text(csv, metrics_csv(report));
    manifest.add_output(csv);
  }
  finish_manifest(manifest, out);
}

KnowledgeGraph random_graph(std::size_t entities, std::size_t relations, std::size_t triples, Rng& rng) {
  Vocabulary ev, rv;
  for (std::size_t e = 0; e < entities; ++e) ev.intern("e" + std::to_string(e));
  for (std::size_t r = 0; r < relations; ++r) rv.intern("r" + std::to_string(r));
  std::uniform_int_distribution<std::uint32_t> ent(0, static_cast<std::uint32_t>(entities - 1));
  std::uniform_int_distribution<std::uint32_t> rel(0, static_cast<std::uint32_t>(relations - 1));
  std::vector<Triple> list;
  for (std::size_t i = 0; i < triples; ++i) list.push_back({EntityId{ent(rng)}, RelationId{rel(rng)}, EntityId{ent(rng)}});
  return KnowledgeGraph(std::move(ev), std::move(rv), list);
}

}  // namespace

int main(int argc, char** argv) {
  kgad::tune_allocator();
  CLI::App app{"Knowledge-graph anomaly detection with dual-view BiLSTM encoders"};
  app.require_subcommand(1);
  bool quiet = false, verbose = false;
  app.add_flag("-q,--quiet", quiet, "only print results");
  app.add_flag("-v,--verbose", verbose, "per-epoch progress");

  // inject
  auto* inject = app.add_subcommand("inject", "add labeled synthetic anomalies to a triple file");
  std::string inject_input, inject_output;
  double inject_ratio = 0.05;
  std::optional<std::uint64_t> inject_seed;
  inject->add_option("--input", inject_input, "clean triple file")->required();
  inject->add_option("--ratio", inject_ratio, "injected / clean, in (0, 1)");
  inject->add_option("--seed", inject_seed, "rng seed");
  inject->add_option("--output", inject_output, "labeled corpus file")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train dual-view models, one checkpoint per run");
  std::string train_corpus, train_out = "runs";
  ConfigFlags train_flags;
  train_cmd->add_option("--corpus", train_corpus, "labeled corpus file")->required();
  train_cmd->add_option("--out-dir", train_out, "directory for run<k>.ckpt and histories");
  train_flags.attach(train_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score, rank and report metrics per checkpoint");
  std::string eval_corpus, eval_out = "metrics.json", eval_csv;
  std::vector<std::string> eval_ckpts;
  eval_cmd->add_option("--corpus", eval_corpus, "labeled corpus file")->required();
  eval_cmd->add_option("--checkpoints", eval_ckpts, "checkpoint files or directories")->required();
  eval_cmd->add_option("--out", eval_out, "metrics JSON");
  eval_cmd->add_option("--csv", eval_csv, "optional flat CSV");

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "train and evaluate TransE, DistMult or ComplEx");
  std::string base_method, base_corpus, base_out = "baseline.json", base_csv;
  ConfigFlags base_flags;
  base_cmd->add_option("--method", base_method, "transe | distmult | complex")->required();
  base_cmd->add_option("--corpus", base_corpus, "labeled corpus file")->required();
  base_cmd->add_option("--out", base_out, "metrics JSON");
  base_cmd->add_option("--csv", base_csv, "optional flat CSV");
  base_flags.attach(base_cmd);

  // config
  auto* config_cmd = app.add_subcommand("config", "print the resolved training config");
  ConfigFlags config_flags;
  config_flags.attach(config_cmd);

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of the full objective");
  GradcheckOptions grad_opts;
  std::optional<std::uint64_t> grad_seed;
  grad_cmd->add_option("--dim", grad_opts.dim, "embedding width");
  grad_cmd->add_option("--seed", grad_seed, "rng seed");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "encode + aggregate throughput");
  std::string bench_corpus;
  int bench_dim = 100, bench_batch = 256, bench_m = 0, bench_repeat = 5;
  bench_cmd->add_option("--corpus", bench_corpus, "labeled corpus (random graph when omitted)");
  bench_cmd->add_option("--dim", bench_dim, "embedding width");
  bench_cmd->add_option("--batch", bench_batch, "batch size");
  bench_cmd->add_option("--m", bench_m, "neighbors per side (0: mean neighbor count)");
  bench_cmd->add_option("--repeat", bench_repeat, "batches to time");

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "metrics for every (alpha, beta, gamma) cell");
  std::string grid_corpus, grid_out = "grid.json";
  std::vector<double> grid_alpha, grid_beta, grid_gamma;
  ConfigFlags grid_flags;
  grid_cmd->add_option("--corpus", grid_corpus, "labeled corpus file")->required();
  grid_cmd->add_option("--alpha", grid_alpha, "alpha values (default: config value)");
  grid_cmd->add_option("--beta", grid_beta, "beta values (default: config value)");
  grid_cmd->add_option("--gamma", grid_gamma, "gamma values (default: config value)");
  grid_cmd->add_option("--out", grid_out, "JSON with one entry per cell");
  grid_flags.attach(grid_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  log_level() = quiet ? LogLevel::kQuiet : verbose ? LogLevel::kDebug : LogLevel::kInfo;

  try {
    if (*inject) {
      if (!(inject_ratio > 0.0 && inject_ratio < 1.0)) throw UsageError("--ratio must lie in (0, 1)");
      std::uint64_t seed = kDefaultSeed;
      if (auto s = env_seed()) seed = *s;
      if (inject_seed) seed = *inject_seed;
      RunManifest manifest = start_manifest("inject", argc, argv);
      manifest.add_input(inject_input);
      manifest.seeds = {seed};
      const KnowledgeGraph clean = load_triples(inject_input);
      Rng rng = seeded_rng({seed, 0x1a7ec7ULL});
      const LabeledCorpus corpus = inject_anomalies(clean, inject_ratio, rng);
      save_labeled_corpus(corpus, inject_output);
      manifest.add_output(inject_output);
      finish_manifest(manifest, inject_output);
      std::cout << "wrote " << corpus.graph.size() << " triples (" << corpus.labels.anomaly_count()
                << " injected) to " << inject_output << '\n';
    } else if (*train_cmd) {
      const TrainConfig config = train_flags.resolve();
      const LabeledCorpus corpus = load_labeled_corpus(train_corpus);
      fs::create_directories(train_out);
      const auto runs = train_multi(corpus, config);
      for (const TrainedModel& t : runs) {
        RunManifest manifest = start_manifest("train", argc, argv);
        manifest.add_input(train_corpus);
        if (!train_flags.config_path.empty()) manifest.add_input(train_flags.config_path);
        manifest.config = t.config.to_text();
        manifest.seeds = {t.config.seed};
        const fs::path stem = fs::path(train_out) / ("run" + std::to_string(t.history.run));
        const fs::path ckpt = fs::path(stem).replace_extension(".ckpt");
        const fs::path hist = fs::path(stem).concat(".history.json");
        save_checkpoint(make_checkpoint(t, corpus.graph), ckpt);
        write_text(hist, dump(history_json(t.history)));
        manifest.add_output(ckpt);
        manifest.add_output(hist);
        finish_manifest(manifest, ckpt);
        std::cout << ckpt.string() << ": " << t.history.epochs.size() << " epochs, kept epoch "
                  << t.history.selected_epoch << '\n';
      }
    } else if (*eval_cmd) {
      RunManifest manifest = start_manifest("eval", argc, argv);
      const LabeledCorpus corpus = load_labeled_corpus(eval_corpus);
      manifest.add_input(eval_corpus);
      std::vector<TrainedModel> runs;
      for (const fs::path& p : expand_checkpoints(eval_ckpts)) {
        runs.push_back(restore_checkpoint(load_checkpoint(p), corpus.graph));
        runs.back().history.run = static_cast<int>(runs.size() - 1);
        manifest.add_input(p);
        manifest.seeds.push_back(runs.back().config.seed);
      }
      const MetricsReport report = evaluate_runs(runs, corpus);
      write_report(report, eval_out, eval_csv, manifest);
      print_summary(report);
    } else if (*base_cmd) {
      const BaselineMethod method = parse_baseline_method(base_method);
      const TrainConfig config = base_flags.resolve();
      RunManifest manifest = start_manifest("baseline", argc, argv);
      const LabeledCorpus corpus = load_labeled_corpus(base_corpus);
      manifest.add_input(base_corpus);
      manifest.config = config.to_text();
      for (int r = 0; r < config.runs; ++r) manifest.seeds.push_back(config.seed + r);
      const MetricsReport report = run_baseline(method, corpus, config);
      write_report(report, base_out, base_csv, manifest);
      print_summary(report);
    } else if (*config_cmd) {
      std::cout << config_flags.resolve().to_text();
    } else if (*grad_cmd) {
      grad_opts.seed = grad_seed ? *grad_seed : env_seed().value_or(kDefaultSeed);
      const GradcheckReport r = gradcheck(grad_opts);
      std::cout << "group                 max_rel_error  scalars\n";
      for (const GroupError& g : r.groups) {
        std::cout << std::left << std::setw(22) << g.group << std::scientific << std::setprecision(3)
                  << g.max_rel_error << "      " << g.scalars << '\n';
      }
      std::cout << "max relative error " << r.max_rel_error << " (tolerance " << grad_opts.tolerance
                << "), " << std::fixed << std::setprecision(2) << r.seconds << " s: "
                << (r.passed ? "PASS" : "FAIL") << '\n';
      return r.passed ? 0 : kExitRuntime;
    } else if (*bench_cmd) {
      Rng rng = seeded_rng({env_seed().value_or(kDefaultSeed), 0xbe7cULL});
      const KnowledgeGraph graph = bench_corpus.empty() ? random_graph(104, 25, 10000, rng)
                                                        : load_labeled_corpus(bench_corpus).graph;
      TrainConfig config;
      config.dim = bench_dim;
      config.batch_size = bench_batch;
      config.neighbor_count = bench_m;
      config.validate();
      const std::size_t m = resolve_neighbor_count(graph, config);
      const ModelDims dims{static_cast<Index>(graph.entity_count()), static_cast<Index>(graph.relation_count()),
                           bench_dim};
      ModelParams model = ModelParams::init(dims, rng);
      const EpochBatches batches(graph, static_cast<std::size_t>(bench_batch), m, rng());
      double forward_s = 0.0, backward_s = 0.0;
      std::size_t anchors = 0;
      const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(bench_repeat), batches.batch_count());
      for (std::size_t b = 0; b < n; ++b) {
        const Batch batch = batches.batch(b);
        Tape tape;
        const auto t0 = std::chrono::steady_clock::now();
        const BatchLoss loss = forward_batch(bind(tape, model), graph, batch, config);
        const auto t1 = std::chrono::steady_clock::now();
        tape.backward(loss.total);
        const auto t2 = std::chrono::steady_clock::now();
        forward_s += std::chrono::duration<double>(t1 - t0).count();
        backward_s += std::chrono::duration<double>(t2 - t1).count();
        anchors += batch.size();
        model.store.zero_grad();
      }
      std::cout << "graph " << graph.size() << " triples, n=" << bench_dim << ", m=" << m << ", batch="
                << bench_batch << '\n'
                << "forward  " << forward_s / n * 1e3 << " ms/batch\n"
                << "backward " << backward_s / n * 1e3 << " ms/batch\n"
                << "throughput " << anchors / (forward_s + backward_s) << " anchors/s\n";
    } else if (*grid_cmd) {
      const TrainConfig base = grid_flags.resolve();
      if (grid_alpha.empty()) grid_alpha = {base.alpha};
      if (grid_beta.empty()) grid_beta = {base.beta};
      if (grid_gamma.empty()) grid_gamma = {base.gamma};
      RunManifest manifest = start_manifest("grid", argc, argv);
      const LabeledCorpus corpus = load_labeled_corpus(grid_corpus);
      manifest.add_input(grid_corpus);
      manifest.config = base.to_text();
      nlohmann::ordered_json cells = nlohmann::ordered_json::array();
      for (double a : grid_alpha) {
        for (double b : grid_beta) {
          for (double g : grid_gamma) {
            TrainConfig c = base;
            c.alpha = a;
            c.beta = b;
            c.gamma = g;
            c.validate();
            const MetricsReport report = evaluate_runs(train_multi(corpus, c), corpus);
            nlohmann::ordered_json cell;
            cell["alpha"] = a;
            cell["beta"] = b;
            cell["gamma"] = g;
            cell["metrics"] = metrics_json(report);
            cells.push_back(std::move(cell));
            std::cout << "alpha=" << a << " beta=" << b << " gamma=" << g << ": ";
            print_summary(report);
          }
        }
      }
      write_text(grid_out, dump(cells));
      manifest.add_output(grid_out);
      finish_manifest(manifest, grid_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "kgad: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "kgad: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
