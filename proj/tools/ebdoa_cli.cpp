/*
Copyright 2026 The ebdoa Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Command-line entry point: dataset generation, training, inference,
// evaluation, classical spectra and self-checks.
//
// Exit codes: 0 success, 1 usage, 2 data/format/configuration error,
// 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config_json.hpp"
#include "ebdoa/dataset.hpp"
#include "ebdoa/dcnn.hpp"
#include "ebdoa/errors.hpp"
#include "ebdoa/eval.hpp"
#include "ebdoa/selftest.hpp"

namespace fs = std::filesystem;
using namespace ebdoa;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

fs::path sibling(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

DatasetRecord record_at(const fs::path& dataset, std::uint64_t index) {
  RecordReader reader(dataset);
  if (index >= reader.count())
    throw DomainError("record index " + std::to_string(index) + " out of range (dataset holds " +
                      std::to_string(reader.count()) + " records)");
  for (std::uint64_t i = 0;; ++i) {
    auto rec = reader.next();
    if (i == index) return std::move(*rec);
  }
}

void print_doas(const char* label, const DoaSet& doas) {
  std::printf("%s (%zu)\n", label, doas.size());
  for (const auto& d : doas)
    std::printf("  azimuth %8.2f  elevation %7.2f\n", d.dir.azimuth(), d.dir.elevation());
}

struct GenArgs {
  fs::path config, out;
  std::uint64_t seed = 0;
  std::optional<std::size_t> count;
  std::optional<unsigned> threads;
};

int run_gen(const GenArgs& a) {
  GenConfig cfg = cli::gen_config_from_json(cli::read_json(a.config));
  cfg.master_seed = a.seed;
  if (a.count) cfg.count = *a.count;
  if (a.threads) cfg.threads = *a.threads;
  cfg.validate();
  const auto records = generate_dataset(cfg, [&](std::size_t done) {
    if (done % 100 == 0 || done == cfg.count) std::fprintf(stderr, "\rgenerated %zu/%zu", done, cfg.count);
  });
  std::fprintf(stderr, "\n");
  write_records(a.out, records);
  write_text_file(sibling(a.out, ".manifest.txt"), manifest_text(cfg, records.size()));
  std::printf("wrote %zu records to %s\n", records.size(), a.out.string().c_str());
  return 0;
}

struct TrainArgs {
  fs::path data, config, out, history;
  std::uint64_t seed = 0;
  std::optional<int> epochs;
};

int run_train(const TrainArgs& a) {
  auto setup = cli::train_setup_from_json(cli::read_json(a.config));
  setup.train.seed = a.seed;
  if (a.epochs) setup.train.epochs = *a.epochs;
  setup.train.validate();
  const auto records = read_records(a.data);
  if (records.empty()) throw FormatError("training dataset " + a.data.string() + " holds no records");
  if (static_cast<int>(records.front().feature.size()) != setup.model.input_size())
    throw GeometryError("dataset features have " + std::to_string(records.front().feature.size()) +
                        " values, model expects " + std::to_string(setup.model.input_size()));
  auto model = build_model(setup.model, a.seed);
  auto [trained, history] = train(std::move(model), records, setup.train, [](const EpochStats& s) {
    std::fprintf(stderr, "epoch %d train_loss %.6f", s.epoch, s.train_loss);
    if (s.val_loss)
      std::fprintf(stderr, " val_loss %.6f val_recall %.3f val_precision %.3f", *s.val_loss,
                   s.val_recall.value_or(0.0), s.val_precision.value_or(0.0));
    std::fprintf(stderr, "\n");
  });
  save_model(trained, a.out);
  const fs::path hist = a.history.empty() ? sibling(a.out, ".history.txt") : a.history;
  write_text_file(hist, history.to_text());
  std::printf("wrote model %s (best epoch %d) and loss curve %s\n", a.out.string().c_str(), history.best_epoch,
              hist.string().c_str());
  return 0;
}

struct InferArgs {
  fs::path model, data, heatmap, truth;
  std::uint64_t index = 0;
  std::string format = "csv";
};

int run_infer(const InferArgs& a) {
  const auto format = parse_heatmap_format(a.format);
  const auto model = load_model(a.model, std::nullopt);
  const auto rec = record_at(a.data, a.index);
  if (static_cast<int>(rec.feature.size()) != model.config.input_size())
    throw GeometryError("record feature size does not match the model input");
  const SpsGrid sps = model_forward(model, rec.feature);
  emit_heatmap(sps, a.heatmap, format);
  const DoaSet& truth = rec.truth;
  if (!a.truth.empty()) emit_truth_overlay(truth, a.truth);
  print_doas("predicted", extract_peaks(normalize_map(sps)));
  print_doas("truth", truth);
  return 0;
}

struct EvalArgs {
  std::string method;
  fs::path model, data, report;
  bool by_t60 = false;
  int music_sources = 0;
};

int run_eval_cmd(const EvalArgs& a) {
  EvalOptions opt;
  opt.method = parse_method(a.method);
  opt.by_t60 = a.by_t60;
  opt.music_sources = a.music_sources;
  std::optional<Model<float>> model;
  if (opt.method == Method::Dcnn) {
    if (a.model.empty()) throw ConfigError("--model is required for method dcnn");
    model = load_model(a.model, std::nullopt);
    opt.model = &*model;
  }
  const EvalResult r = run_eval(a.data, opt);
  const std::string text = report_text(r);
  std::fputs(text.c_str(), stdout);
  if (!a.report.empty()) {
    write_text_file(a.report, text);
    write_text_file(sibling(a.report, ".kv"), report_key_values(r));
    write_text_file(sibling(a.report, ".records"), record_log(r));
  }
  return 0;
}

struct BaselineArgs {
  std::string method, format = "csv";
  fs::path data, heatmap, truth;
  std::uint64_t index = 0;
  int music_sources = 0;
};

int run_baseline(const BaselineArgs& a) {
  EvalOptions opt;
  opt.method = parse_method(a.method);
  if (opt.method != Method::EbMvdr && opt.method != Method::EbMusic)
    throw ConfigError("baseline-sps supports eb-mvdr and eb-music");
  opt.music_sources = a.music_sources;
  const auto rec = record_at(a.data, a.index);
  const SpsGrid sps = record_sps(rec, opt);
  emit_heatmap(sps, a.heatmap, parse_heatmap_format(a.format));
  const DoaSet& truth = rec.truth;
  if (!a.truth.empty()) emit_truth_overlay(truth, a.truth);
  print_doas("predicted", extract_peaks(normalize_map(sps)));
  print_doas("truth", truth);
  return 0;
}

int run_selftest(const fs::path& scratch) {
  fs::create_directories(scratch);
  bool all = true;
  const std::vector<std::function<selftest::CheckResult()>> checks{
      [] { return selftest::parseval_check(); },      [] { return selftest::gradient_checks(); },
      [] { return selftest::beamformer_oracles(); },  [] { return selftest::label_peak_roundtrip(); },
      [] { return selftest::reverberation_check(); }, [&] { return selftest::corruption_check(scratch); }};
  for (const auto& check : checks) {
    const auto r = check();
    std::puts(selftest::format_line(r).c_str());
    std::fflush(stdout);
    all = all && r.passed;
  }
  return all ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direction-of-arrival estimation of direct sound and first-order reflections"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Simulate a dataset of HOA covariance features and label maps");
  g->add_option("--config", gen.config, "JSON generation config")->required()->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "Master seed")->required();
  g->add_option("--out", gen.out, "Output dataset file")->required();
  g->add_option("--count", gen.count, "Override the record count");
  g->add_option("--threads", gen.threads, "Worker threads (output does not depend on it)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the deconvolution network");
  t->add_option("--data", tr.data, "Training dataset")->required()->check(CLI::ExistingFile);
  t->add_option("--config", tr.config, "JSON model/training config")->required()->check(CLI::ExistingFile);
  t->add_option("--seed", tr.seed, "Initialisation and shuffling seed")->required();
  t->add_option("--out", tr.out, "Output model file")->required();
  t->add_option("--history", tr.history, "Loss curve file (default <out>.history.txt)");
  t->add_option("--epochs", tr.epochs, "Override the epoch count");

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "Network spatial spectrum of one record");
  i->add_option("--model", inf.model, "Model file")->required()->check(CLI::ExistingFile);
  i->add_option("--data", inf.data, "Dataset file")->required()->check(CLI::ExistingFile);
  i->add_option("--index", inf.index, "Record index")->required();
  i->add_option("--heatmap", inf.heatmap, "Output heatmap")->required();
  i->add_option("--format", inf.format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));
  i->add_option("--truth", inf.truth, "Optional truth overlay csv");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Recall, precision and angular error over a dataset");
  e->add_option("--method", ev.method, "dcnn, eb-mvdr, eb-music or labels")
      ->required()
      ->check(CLI::IsMember({"dcnn", "eb-mvdr", "eb-music", "labels"}));
  e->add_option("--model", ev.model, "Model file (method dcnn)")->check(CLI::ExistingFile);
  e->add_option("--data", ev.data, "Dataset file")->required()->check(CLI::ExistingFile);
  e->add_flag("--by-t60", ev.by_t60, "Add a table grouped by reverberation time");
  e->add_option("--report", ev.report, "Report file; .kv and .records siblings are written too");
  e->add_option("--music-sources", ev.music_sources, "EB-MUSIC signal subspace size (0: per record)");

  BaselineArgs bl;
  auto* b = app.add_subcommand("baseline-sps", "Classical spatial spectrum of one record");
  b->add_option("--method", bl.method, "eb-mvdr or eb-music")
      ->required()
      ->check(CLI::IsMember({"eb-mvdr", "eb-music"}));
  b->add_option("--data", bl.data, "Dataset file")->required()->check(CLI::ExistingFile);
  b->add_option("--index", bl.index, "Record index")->required();
  b->add_option("--heatmap", bl.heatmap, "Output heatmap")->required();
  b->add_option("--format", bl.format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));
  b->add_option("--truth", bl.truth, "Optional truth overlay csv");
  b->add_option("--music-sources", bl.music_sources, "EB-MUSIC signal subspace size (0: per record)");

  fs::path scratch = fs::temp_directory_path() / "ebdoa_selftest";
  auto* s = app.add_subcommand("selftest", "Gradient, Parseval, oracle and file-robustness checks");
  s->add_option("--scratch", scratch, "Directory for temporary files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*g) return run_gen(gen);
    if (*t) return run_train(tr);
    if (*i) return run_infer(inf);
    if (*e) return run_eval_cmd(ev);
    if (*b) return run_baseline(bl);
    if (*s) return run_selftest(scratch);
  } catch (const NumericalError& err) {
    std::fprintf(stderr, "numerical error: %s\n", err.what());
    return kExitNumerical;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitData;
  }
  return kExitUsage;
}
