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


#include "dxr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "dxr/error.hpp"

namespace dxr {

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < classes_; ++t) s += at(t, pred);
  return s;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t c = 0; c < classes_; ++c) s += at(c, c);
  return s;
}

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions, std::size_t num_classes) {
  if (labels.size() != predictions.size()) throw InvalidArgument("confusion: label and prediction counts differ");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i];
    const int p = predictions[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes || static_cast<std::size_t>(p) >= num_classes)
      throw InvalidArgument("confusion: class index out of range at sample " + std::to_string(i));
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassMetricsTable per_class_metrics(const ConfusionMatrix& cm) {
  ClassMetricsTable t;
  const std::size_t nc = cm.num_classes();
  const std::uint64_t total = cm.total();
  for (std::size_t c = 0; c < nc; ++c) {
    ClassMetrics m;
    m.class_id = c;
    m.tp = cm.at(c, c);
    m.fn = cm.row_sum(c) - m.tp;
    m.fp = cm.col_sum(c) - m.tp;
    m.tn = total - m.tp - m.fn - m.fp;
    m.support = m.tp + m.fn;
    m.precision = ratio(m.tp, m.tp + m.fp, m.precision_undefined);
    m.sensitivity = ratio(m.tp, m.tp + m.fn, m.sensitivity_undefined);
    m.specificity = ratio(m.tn, m.tn + m.fp, m.specificity_undefined);
    t.classes.push_back(m);
  }
  if (total > 0) {
    for (const auto& m : t.classes) {
      const double w = static_cast<double>(m.support) / static_cast<double>(total);
      t.weighted_precision += w * m.precision;
      t.weighted_sensitivity += w * m.sensitivity;
      t.weighted_specificity += w * m.specificity;
    }
  }
  if (nc > 0) {
    for (const auto& m : t.classes) t.macro_precision += m.precision;
    t.macro_precision /= static_cast<double>(nc);
  }
  return t;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("roc_curve: score and label counts differ");
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidArgument("roc_curve: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw InvalidArgument("roc_curve: NaN score");
    (labels[i] ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw InvalidArgument("roc_curve: need at least one positive and one negative");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0, prev_tp = 0, prev_fp = 0;
  // twice the area in units of (1 / (pos * neg))
  std::uint64_t area2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] ? tp : fp) += 1;
      ++i;
    }
    area2 += (fp - prev_fp) * (tp + prev_tp);
    roc.points.push_back(
        {threshold, static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos)});
    prev_tp = tp;
    prev_fp = fp;
  }
  roc.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return roc;
}

MulticlassAuc multiclass_auc(std::span<const double> scores, std::span<const int> labels, std::size_t num_classes) {
  if (num_classes == 0 || scores.size() != labels.size() * num_classes)
    throw InvalidArgument("multiclass_auc: score matrix must be N x C");
  MulticlassAuc out;
  std::vector<double> column(labels.size());
  std::vector<int> binary(labels.size());
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      column[i] = scores[i * num_classes + c];
      binary[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
    }
    try {
      out.per_class.push_back(roc_curve(column, binary).auc);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("multiclass_auc: class " + std::to_string(c) + " is degenerate (" + e.what() + ")");
    }
  }
  out.macro = std::accumulate(out.per_class.begin(), out.per_class.end(), 0.0) / static_cast<double>(num_classes);
  return out;
}

EvalReport evaluate(std::span<const int> labels, std::span<const int> predictions, std::span<const double> scores,
                    std::size_t num_classes) {
  EvalReport r;
  r.num_classes = num_classes;
  r.num_samples = labels.size();
  r.confusion = confusion(labels, predictions, num_classes);
  const auto table = per_class_metrics(r.confusion);
  r.classes = table.classes;
  r.accuracy = r.num_samples ? static_cast<double>(r.confusion.trace()) / static_cast<double>(r.num_samples) : 0.0;
  r.balanced_precision = table.macro_precision;
  r.weighted_precision = table.weighted_precision;
  r.weighted_sensitivity = table.weighted_sensitivity;
  r.weighted_specificity = table.weighted_specificity;
  if (!scores.empty()) {
    const auto auc = multiclass_auc(scores, labels, num_classes);
    r.has_auc = true;
    r.class_auc = auc.per_class;
    r.macro_auc = auc.macro;
    std::vector<double> column(labels.size());
    std::vector<int> binary(labels.size());
    for (std::size_t c = 0; c < num_classes; ++c) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        column[i] = scores[i * num_classes + c];
        binary[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
      }
      r.roc.push_back(roc_curve(column, binary));
    }
  }
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["num_classes"] = r.num_classes;
  j["num_samples"] = r.num_samples;
  j["accuracy"] = r.accuracy;
  j["balanced_precision"] = r.balanced_precision;
  j["weighted"] = {{"precision", r.weighted_precision},
                   {"sensitivity", r.weighted_sensitivity},
                   {"specificity", r.weighted_specificity}};
  if (r.has_auc) j["macro_auc"] = r.macro_auc;
  auto classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& m = r.classes[c];
    nlohmann::ordered_json e;
    e["class_id"] = m.class_id;
    e["support"] = m.support;
    e["tp"] = m.tp;
    e["fp"] = m.fp;
    e["fn"] = m.fn;
    e["tn"] = m.tn;
    e["precision"] = m.precision;
    e["sensitivity"] = m.sensitivity;
    e["specificity"] = m.specificity;
    if (r.has_auc) e["auc"] = r.class_auc.at(c);
    auto undefined = nlohmann::ordered_json::array();
    if (m.precision_undefined) undefined.push_back("precision");
    if (m.sensitivity_undefined) undefined.push_back("sensitivity");
    if (m.specificity_undefined) undefined.push_back("specificity");
    e["undefined"] = undefined;
    classes.push_back(e);
  }
  j["classes"] = classes;
  auto cm = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < r.confusion.num_classes(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < r.confusion.num_classes(); ++p) row.push_back(r.confusion.at(t, p));
    cm.push_back(row);
  }
  j["confusion"] = cm;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.num_classes = j.at("num_classes").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.balanced_precision = j.at("balanced_precision").get<double>();
    const auto& w = j.at("weighted");
    r.weighted_specificity = w.at("specificity").get<double>();
    r.weighted_precision = w.value("precision", 0.0);
    r.weighted_sensitivity = w.value("sensitivity", 0.0);
    r.num_samples = j.value("num_samples", std::size_t{0});
    if (j.contains("macro_auc")) {
      r.has_auc = true;
      r.macro_auc = j.at("macro_auc").get<double>();
    }
    if (j.contains("classes")) {
      for (const auto& e : j.at("classes")) {
        ClassMetrics m;
        m.class_id = e.at("class_id").get<std::size_t>();
        m.support = e.value("support", std::uint64_t{0});
        m.tp = e.value("tp", std::uint64_t{0});
        m.fp = e.value("fp", std::uint64_t{0});
        m.fn = e.value("fn", std::uint64_t{0});
        m.tn = e.value("tn", std::uint64_t{0});
        m.precision = e.value("precision", 0.0);
        m.sensitivity = e.value("sensitivity", 0.0);
        m.specificity = e.value("specificity", 0.0);
        for (const auto& u : e.value("undefined", nlohmann::json::array())) {
          const auto name = u.get<std::string>();
          m.precision_undefined |= name == "precision";
          m.sensitivity_undefined |= name == "sensitivity";
          m.specificity_undefined |= name == "specificity";
        }
        if (r.has_auc && e.contains("auc")) r.class_auc.push_back(e.at("auc").get<double>());
        r.classes.push_back(m);
      }
    }
    if (j.contains("confusion")) {
      r.confusion = ConfusionMatrix(r.num_classes);
      const auto& cm = j.at("confusion");
      for (std::size_t t = 0; t < r.num_classes; ++t)
        for (std::size_t p = 0; p < r.num_classes; ++p) r.confusion.at(t, p) = cm.at(t).at(p).get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::kMissing, std::string("eval report: ") + e.what());
  }
  return r;
}

void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "threshold,fpr,tpr\n";
  char buf[96];
  for (const auto& p : roc.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.fpr, p.tpr);
    out << buf;
  }
}

std::string format_class_table(const EvalReport& r) {
  std::string out = "Class ID,Precision,Sensitivity,Specificity\n";
  char buf[128];
  for (const auto& m : r.classes) {
    std::snprintf(buf, sizeof buf, "%zu,%.2f,%.2f,%.2f\n", m.class_id, m.precision, m.sensitivity, m.specificity);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "Weighted_avg,%.2f,%.2f,%.2f\n", r.weighted_precision, r.weighted_sensitivity,
                r.weighted_specificity);
  out += buf;
  return out;
}

std::vector<ComparisonRow> compare_report(const EvalReport& model, std::span<const EvalReport> annotators,
                                          const std::string& model_name, const std::string& annotator_name) {
  std::vector<ComparisonRow> rows;
  if (!annotators.empty()) {
    ComparisonRow mean{annotator_name};
    for (const auto& a : annotators) {
      if (a.num_classes != model.num_classes)
        throw InvalidArgument("compare_report: annotator report has " + std::to_string(a.num_classes) +
                              " classes, model has " + std::to_string(model.num_classes));
      mean.accuracy += a.accuracy;
      mean.balanced_precision += a.balanced_precision;
      mean.specificity += a.weighted_specificity;
    }
    const auto n = static_cast<double>(annotators.size());
    mean.accuracy /= n;
    mean.balanced_precision /= n;
    mean.specificity /= n;
    rows.push_back(mean);
  }
  rows.push_back({model_name, model.accuracy, model.balanced_precision, model.weighted_specificity});
  return rows;
}

std::string format_comparison(std::span<const ComparisonRow> rows) {
  std::string out = "Models,Accuracy,Balance_precision,Specificity\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.2f,%.2f,%.2f\n", r.name.c_str(), r.accuracy, r.balanced_precision,
                  r.specificity);
    out += buf;
  }
  return out;
}

}  // namespace dxr
