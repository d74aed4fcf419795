// Copyright 2026 The dxr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "dxr/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "dxr/enhance.hpp"
#include "dxr/error.hpp"
#include "dxr/kmeans.hpp"
#include "dxr/metrics.hpp"
#include "dxr/nnet/checkpoint.hpp"
#include "dxr/orient.hpp"
#include "dxr/pgm.hpp"
#include "dxr/rng.hpp"
#include "dxr/synth.hpp"
#include "dxr/trainer.hpp"

namespace dxr::cli {

namespace fs = std::filesystem;

namespace {

// Seed offsets for components that share the global --seed.
constexpr std::uint64_t kTestSplitStream = 100;

struct Global {
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  bool verbose = false;
};

struct ModelFlags {
  std::size_t input_size = 32;
  std::size_t branch_a = 66;
  std::size_t branch_b = 96;
  std::size_t fusion = 128;
  double dropout = 0.5;

  nn::ModelConfig config(std::size_t classes) const {
    nn::ModelConfig c;
    c.input_size = input_size;
    c.branch_a_dim = branch_a;
    c.branch_b_dim = branch_b;
    c.fusion_dim = fusion;
    c.num_classes = classes;
    c.dropout_rate = dropout;
    return c;
  }
};

struct TrainFlags {
  TrainConfig t;
  bool no_rotations = false;
  bool uniform_loss = false;
  std::string manifest;
};

void add_train_flags(CLI::App* sub, TrainFlags& f, ModelFlags& m) {
  sub->add_option("--manifest", f.manifest, "Training manifest CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--epochs", f.t.epochs, "Training epochs")->capture_default_str();
  sub->add_option("--batch-size", f.t.batch_size, "Mini-batch size")->capture_default_str();
  sub->add_option("--lr", f.t.lr, "Initial learning rate")->capture_default_str();
  sub->add_option("--momentum", f.t.momentum, "SGD momentum")->capture_default_str();
  sub->add_option("--lr-decay", f.t.lr_decay_factor, "Learning-rate decay factor")->capture_default_str();
  sub->add_option("--lr-decay-every", f.t.lr_decay_every, "Epochs between decays")->capture_default_str();
  sub->add_option("--val-fraction", f.t.validation_fraction, "Validation fraction")->capture_default_str();
  sub->add_flag("--no-rotations", f.no_rotations, "Disable quarter-turn augmentation");
  sub->add_flag("--flips", f.t.augment_flips, "Enable horizontal-flip augmentation");
  sub->add_option("--input-size", m.input_size, "Image side in pixels")->capture_default_str();
  sub->add_option("--branch-a", m.branch_a, "Branch A feature width")->capture_default_str();
  sub->add_option("--branch-b", m.branch_b, "Branch B feature width")->capture_default_str();
  sub->add_option("--fusion-dim", m.fusion, "Fused hidden width")->capture_default_str();
  sub->add_option("--dropout", m.dropout, "Dropout rate")->capture_default_str();
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".pgm") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw IoError("no such file or directory: " + in);
    }
  }
  if (files.empty()) throw InvalidArgument("no input images");
  return files;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

struct Predictions {
  std::vector<std::string> paths;
  std::vector<int> labels;
  std::vector<int> predicted;
  std::vector<double> scores;  // N x C
  std::size_t num_classes = 0;
};

std::string predictions_csv(const Predictions& p) {
  std::string out = "path,class_id,predicted";
  for (std::size_t c = 0; c < p.num_classes; ++c) out += ",p" + std::to_string(c);
  out += "\n";
  for (std::size_t i = 0; i < p.paths.size(); ++i) {
    out += p.paths[i] + "," + std::to_string(p.labels[i]) + "," + std::to_string(p.predicted[i]);
    for (std::size_t c = 0; c < p.num_classes; ++c) out += "," + fmt17(p.scores[i * p.num_classes + c]);
    out += "\n";
  }
  return out;
}

Predictions read_predictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(FormatError::Kind::kMissing, "predictions: empty file");
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "path" || header[1] != "class_id" || header[2] != "predicted")
    throw FormatError(FormatError::Kind::kMalformedHeader, "predictions: unexpected header in " + path.string());
  Predictions p;
  p.num_classes = header.size() - 3;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw FormatError(FormatError::Kind::kCorrupt, "predictions: wrong column count on line " + std::to_string(lineno));
    try {
      p.paths.push_back(cells[0]);
      p.labels.push_back(std::stoi(cells[1]));
      p.predicted.push_back(std::stoi(cells[2]));
      for (std::size_t c = 0; c < p.num_classes; ++c) p.scores.push_back(std::stod(cells[3 + c]));
    } catch (const std::logic_error&) {
      throw FormatError(FormatError::Kind::kCorrupt, "predictions: bad number on line " + std::to_string(lineno));
    }
  }
  return p;
}

Predictions predict_manifest(const nn::Model& model, const DatasetManifest& m) {
  const auto images = load_images(m, model.config().input_size);
  const auto probs = predict_proba(model, images);
  Predictions p;
  p.num_classes = model.config().num_classes;
  p.predicted = argmax_rows(probs);
  p.scores.assign(probs.data().begin(), probs.data().end());
  for (const auto& e : m.entries) {
    p.paths.push_back(e.path);
    p.labels.push_back(e.class_id);
  }
  return p;
}

void print_epoch(std::ostream& out, const EpochLog& e) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch %3zu  lr %.5f  train_loss %.4f  val_loss %.4f  val_acc %.4f\n", e.epoch, e.lr,
                e.train_loss, e.val_loss, e.val_acc);
  out << buf << std::flush;
}

int dispatch(CLI::App& app, const Global& g, std::ostream& out, const std::map<std::string, std::function<void()>>& handlers) {
  const CLI::App* sub = app.get_subcommands().front();
  out << "# effective configuration\n"
      << "seed=" << g.seed << "\nout-dir=\"" << g.out_dir << "\"\nverbose=" << (g.verbose ? "true" : "false") << "\n"
      << "[" << sub->get_name() << "]\n"
      << sub->config_to_str(true, false);
  if (g.verbose) out << "# out_dir resolves to " << fs::absolute(g.out_dir).string() << "\n";
  handlers.at(sub->get_name())();
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dental radiograph enhancement, orientation and region classification"};
  app.name("dxr");
  app.require_subcommand(1);
  app.fallthrough(true);
  Global g;
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--verbose", g.verbose, "Per-epoch progress and extra detail");

  std::map<std::string, std::function<void()>> handlers;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate the synthetic radiograph dataset");
  double scale = 0.2;
  SynthParams sp;
  double test_fraction = 0.2;
  std::vector<int> amplify;
  synth->add_option("--scale", scale, "Multiplier on the clinical class counts")->capture_default_str();
  synth->add_option("--image-size", sp.image_size, "Image side in pixels")->capture_default_str();
  synth->add_option("--impulse", sp.noise_impulse_prob, "Salt-and-pepper probability")->capture_default_str();
  synth->add_option("--test-fraction", test_fraction, "Held-out fraction per class")->capture_default_str();
  synth->add_option("--amplify", amplify, "Classes to duplicate with histogram equalization");
  handlers["synth"] = [&] {
    sp.rng_seed = g.seed;
    const fs::path dir(g.out_dir);
    fs::create_directories(dir);
    const auto specs = region_profile(scale);
    auto m = generate_dataset(specs, sp, dir);
    if (!amplify.empty()) {
      m = amplify_minority(m, amplify);
      write_manifest(m, dir / "manifest.csv");
    }
    auto [train_part, test_part] = stratified_split(m, test_fraction, derive_seed(g.seed, kTestSplitStream));
    write_manifest(train_part, dir / "train.csv");
    write_manifest(test_part, dir / "test.csv");
    out << "wrote " << m.size() << " images (" << train_part.size() << " train, " << test_part.size()
        << " test) to " << dir.string() << "\n";
  };

  // enhance
  auto* enh = app.add_subcommand("enhance", "Sharpen, median-filter and CLAHE-equalize images");
  std::vector<std::string> enh_inputs;
  std::size_t tiles = 8;
  double clip = 2.0;
  std::size_t median_radius = 1;
  std::string stage = "chain";
  enh->add_option("inputs", enh_inputs, "PGM files or directories")->required();
  enh->add_option("--tiles", tiles, "CLAHE tiles per axis")->capture_default_str();
  enh->add_option("--clip", clip, "CLAHE clip factor")->capture_default_str();
  enh->add_option("--median-radius", median_radius, "Median window radius")->capture_default_str();
  enh->add_option("--stage", stage, "Single stage instead of the full chain")
      ->check(CLI::IsMember({"chain", "sharpen", "median", "clahe", "equalize"}))
      ->capture_default_str();
  handlers["enhance"] = [&] {
    const auto files = expand_inputs(enh_inputs);
    const fs::path dir(g.out_dir);
    fs::create_directories(dir);
    ClaheParams cp;
    cp.tiles_x = cp.tiles_y = tiles;
    cp.clip_factor = clip;
    for (const auto& f : files) {
      const Image img = load_pgm(f);
      Image res;
      if (stage == "chain") res = enhance_chain(img, cp, median_radius);
      else if (stage == "sharpen") res = sharpen(img);
      else if (stage == "median") res = median_filter(img, median_radius);
      else if (stage == "clahe") res = clahe(img, cp);
      else res = hist_equalize(img);
      const fs::path target = dir / f.filename();
      if (fs::exists(target) && fs::equivalent(target, f))
        throw InvalidArgument("refusing to overwrite input " + f.string() + "; choose another --out-dir");
      save_pgm(res, target);
      if (g.verbose) out << f.string() << " -> " << target.string() << "\n";
    }
    out << "enhanced " << files.size() << " image(s) into " << dir.string() << "\n";
  };

  // cluster
  auto* clus = app.add_subcommand("cluster", "pHash + k-means distribution report");
  std::string clus_manifest;
  std::size_t k = 6;
  std::size_t max_iter = 100;
  clus->add_option("--manifest", clus_manifest, "Dataset manifest CSV")->required()->check(CLI::ExistingFile);
  clus->add_option("--k", k, "Number of clusters")->capture_default_str();
  clus->add_option("--max-iter", max_iter, "Lloyd iteration cap")->capture_default_str();
  handlers["cluster"] = [&] {
    const auto m = read_manifest(clus_manifest);
    const auto rep = cluster_report(m, k, g.seed, max_iter);
    rep.write(g.out_dir);
    out << "k-means: " << rep.clustering.iterations << " iterations, inertia " << rep.clustering.inertia << "\n";
  };

  // train
  auto* tr = app.add_subcommand("train", "Train the region classifier");
  TrainFlags tf;
  ModelFlags tm;
  add_train_flags(tr, tf, tm);
  tr->add_flag("--uniform-loss", tf.uniform_loss, "Plain cross-entropy instead of class-weighted");
  handlers["train"] = [&] {
    tf.t.seed = g.seed;
    tf.t.augment_rotations = !tf.no_rotations;
    tf.t.weighted_loss = !tf.uniform_loss;
    const auto m = read_manifest(tf.manifest);
    const fs::path dir(g.out_dir);
    fs::create_directories(dir);
    EpochCallback cb;
    if (g.verbose) cb = [&](const EpochLog& e) { print_epoch(out, e); };
    const auto res = train(m, tm.config(kNumRegionClasses), tf.t, cb);
    res.save_checkpoint(dir / "model.ckpt");
    res.log.write_csv(dir / "train_log.csv");
    const auto& best = res.log.epochs[res.log.best_epoch];
    out << "best epoch " << res.log.best_epoch << " val_acc " << best.val_acc << "; wrote "
        << (dir / "model.ckpt").string() << "\n";
  };

  // orient-train
  auto* otr = app.add_subcommand("orient-train", "Train the quarter-turn pose classifier");
  TrainFlags of;
  ModelFlags om;
  add_train_flags(otr, of, om);
  handlers["orient-train"] = [&] {
    of.t.seed = g.seed;
    of.t.augment_rotations = false;
    const auto m = read_manifest(of.manifest);
    const fs::path dir(g.out_dir);
    fs::create_directories(dir);
    EpochCallback cb;
    if (g.verbose) cb = [&](const EpochLog& e) { print_epoch(out, e); };
    const auto res = train_orient(m, om.config(kNumPoses), of.t, cb);
    res.save_checkpoint(dir / "orient.ckpt");
    res.log.write_csv(dir / "orient_log.csv");
    const auto& best = res.log.epochs[res.log.best_epoch];
    out << "best epoch " << res.log.best_epoch << " val_acc " << best.val_acc << "; wrote "
        << (dir / "orient.ckpt").string() << "\n";
  };

  // orient
  auto* ori = app.add_subcommand("orient", "Detect and undo quarter-turns");
  std::string ori_model;
  std::vector<std::string> ori_inputs;
  ori->add_option("--model", ori_model, "Pose checkpoint")->required()->check(CLI::ExistingFile);
  ori->add_option("inputs", ori_inputs, "PGM files or directories")->required();
  handlers["orient"] = [&] {
    const auto model = nn::load_checkpoint(ori_model).model();
    const auto files = expand_inputs(ori_inputs);
    const fs::path dir(g.out_dir);
    fs::create_directories(dir);
    std::string csv = "path,detected,confidence\n";
    for (const auto& f : files) {
      const auto c = correct_orientation(model, load_pgm(f));
      const fs::path target = dir / f.filename();
      if (fs::exists(target) && fs::equivalent(target, f))
        throw InvalidArgument("refusing to overwrite input " + f.string() + "; choose another --out-dir");
      save_pgm(c.image, target);
      csv += f.filename().string() + "," + std::to_string(c.detected.quarter_turns()) + "," + fmt17(c.confidence) + "\n";
    }
    write_text(dir / "orientation.csv", csv);
    out << "corrected " << files.size() << " image(s) into " << dir.string() << "\n";
  };

  // predict
  auto* pred = app.add_subcommand("predict", "Class probabilities for images");
  std::string pred_model, pred_manifest;
  std::vector<std::string> pred_inputs;
  pred->add_option("--model", pred_model, "Region checkpoint")->required()->check(CLI::ExistingFile);
  pred->add_option("--manifest", pred_manifest, "Manifest CSV (adds true labels)")->check(CLI::ExistingFile);
  pred->add_option("inputs", pred_inputs, "PGM files or directories");
  handlers["predict"] = [&] {
    const auto model = nn::load_checkpoint(pred_model).model();
    DatasetManifest m;
    if (!pred_manifest.empty()) {
      if (!pred_inputs.empty()) throw InvalidArgument("predict: give either --manifest or input images, not both");
      m = read_manifest(pred_manifest);
    } else {
      if (pred_inputs.empty()) throw InvalidArgument("predict: no input images");
      for (const auto& f : expand_inputs(pred_inputs)) m.entries.push_back({fs::absolute(f).string(), -1, Rotation()});
    }
    const auto p = predict_manifest(model, m);
    const fs::path dir(g.out_dir);
    fs::create_directories(dir);
    write_text(dir / "predictions.csv", predictions_csv(p));
    out << "wrote " << p.paths.size() << " predictions to " << (dir / "predictions.csv").string() << "\n";
  };

  // eval
  auto* ev = app.add_subcommand("eval", "Metrics report for a model or a predictions file");
  std::string ev_model, ev_manifest, ev_predictions;
  ev->add_option("--model", ev_model, "Region checkpoint")->check(CLI::ExistingFile);
  ev->add_option("--manifest", ev_manifest, "Labelled manifest CSV")->check(CLI::ExistingFile);
  ev->add_option("--predictions", ev_predictions, "predictions.csv from `predict`")->check(CLI::ExistingFile);
  handlers["eval"] = [&] {
    Predictions p;
    if (!ev_predictions.empty()) {
      if (!ev_model.empty() || !ev_manifest.empty())
        throw InvalidArgument("eval: --predictions excludes --model/--manifest");
      p = read_predictions(ev_predictions);
    } else {
      if (ev_model.empty() || ev_manifest.empty()) throw InvalidArgument("eval: need --model and --manifest, or --predictions");
      p = predict_manifest(nn::load_checkpoint(ev_model).model(), read_manifest(ev_manifest));
    }
    const auto rep = evaluate(p.labels, p.predicted, p.scores, p.num_classes);
    const fs::path dir(g.out_dir);
    fs::create_directories(dir);
    write_text(dir / "eval.json", to_json(rep).dump(2) + "\n");
    for (std::size_t c = 0; c < rep.roc.size(); ++c) write_roc_csv(rep.roc[c], dir / ("roc_class" + std::to_string(c) + ".csv"));
    write_text(dir / "class_metrics.csv", format_class_table(rep));
    char buf[160];
    std::snprintf(buf, sizeof buf, "accuracy %.4f  balanced_precision %.4f  weighted_sensitivity %.4f  macro_auc %.4f\n",
                  rep.accuracy, rep.balanced_precision, rep.weighted_sensitivity, rep.macro_auc);
    out << format_class_table(rep) << buf;
  };

  // report
  auto* rpt = app.add_subcommand("report", "Comparison table from evaluation reports");
  std::string rpt_model;
  std::vector<std::string> rpt_annotators;
  std::string model_name = "Muti-CNN";
  std::string annotator_name = "Doctors";
  rpt->add_option("model_report", rpt_model, "Model eval.json")->required()->check(CLI::ExistingFile);
  rpt->add_option("--annotator", rpt_annotators, "Annotator eval.json (repeatable)")->check(CLI::ExistingFile);
  rpt->add_option("--model-name", model_name, "Row label for the model")->capture_default_str();
  rpt->add_option("--annotator-name", annotator_name, "Row label for the annotator mean")->capture_default_str();
  handlers["report"] = [&] {
    auto load = [](const std::string& path) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw IoError("cannot read " + path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(FormatError::Kind::kCorrupt, path + ": " + e.what());
      }
      return report_from_json(j);
    };
    const auto model = load(rpt_model);
    std::vector<EvalReport> ann;
    for (const auto& a : rpt_annotators) ann.push_back(load(a));
    const auto rows = compare_report(model, ann, model_name, annotator_name);
    const auto table = format_comparison(rows);
    const fs::path dir(g.out_dir);
    fs::create_directories(dir);
    write_text(dir / "comparison.csv", table);
    out << table;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "dxr: error: " << e.what() << "\n";
    return e.get_exit_code();
  }
  try {
    return dispatch(app, g, out, handlers);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "dxr: error: " << msg << "\n";
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"dxr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dxr::cli
