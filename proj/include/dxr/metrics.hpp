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


#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace dxr {

/// rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes = 0)
      : classes_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const noexcept { return classes_; }
  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * classes_ + pred]; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * classes_ + pred]; }
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t pred) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions, std::size_t num_classes);

/// One-vs-rest counts and rates for one class. A 0/0 ratio is reported as 0
/// with the matching `*_undefined` flag set.
struct ClassMetrics {
  std::size_t class_id = 0;
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::uint64_t support = 0;  // tp + fn
  double precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  bool precision_undefined = false;
  bool sensitivity_undefined = false;
  bool specificity_undefined = false;
};

/// Per-class metrics plus support-weighted averages.
struct ClassMetricsTable {
  std::vector<ClassMetrics> classes;
  double weighted_precision = 0.0;
  double weighted_sensitivity = 0.0;
  double weighted_specificity = 0.0;
  double macro_precision = 0.0;
};

ClassMetricsTable per_class_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double threshold;  // +inf for the leading (0, 0)
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Threshold sweep over every distinct score, highest first; a sample is
/// called positive when its score is >= the threshold. The area uses the
/// trapezoidal rule over integer TP/FP counts, so tied scores count half,
/// matching P(s+ > s-) + P(s+ = s-)/2. labels must be 0/1 and both present.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

struct MulticlassAuc {
  std::vector<double> per_class;
  double macro = 0.0;
};

/// One-vs-rest ROC per column of a row-major N x C score matrix; the macro
/// value is the unweighted mean.
MulticlassAuc multiclass_auc(std::span<const double> scores, std::span<const int> labels, std::size_t num_classes);

/// Everything reported for one evaluated model (or one annotator).
struct EvalReport {
  std::size_t num_classes = 0;
  std::size_t num_samples = 0;
  double accuracy = 0.0;
  /// Macro-averaged precision.
  double balanced_precision = 0.0;
  double weighted_precision = 0.0;
  double weighted_sensitivity = 0.0;
  double weighted_specificity = 0.0;
  std::vector<ClassMetrics> classes;
  ConfusionMatrix confusion;
  bool has_auc = false;
  std::vector<double> class_auc;
  double macro_auc = 0.0;
  std::vector<RocCurve> roc;  // not serialized
};

/// Metrics from hard predictions; AUC is added when `scores` (N x C) is
/// non-empty.
EvalReport evaluate(std::span<const int> labels, std::span<const int> predictions, std::span<const double> scores,
                    std::size_t num_classes);

nlohmann::ordered_json to_json(const EvalReport& r);
/// Needs num_classes, accuracy, balanced_precision and weighted.specificity;
/// the remaining fields are optional so that summary-only reports load.
EvalReport report_from_json(const nlohmann::json& j);

void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path);

/// Per-class precision / sensitivity / specificity rows plus a
/// Weighted_avg row, two decimals.
std::string format_class_table(const EvalReport& r);

struct ComparisonRow {
  std::string name;
  double accuracy = 0.0;
  double balanced_precision = 0.0;
  double specificity = 0.0;
};

/// Mean-of-annotators row (when there are annotators) followed by the model
/// row. Specificity is the support-weighted one-vs-rest specificity.
std::vector<ComparisonRow> compare_report(const EvalReport& model, std::span<const EvalReport> annotators,
                                          const std::string& model_name, const std::string& annotator_name);

/// "Models,Accuracy,Balance_precision,Specificity" CSV, two decimals.
std::string format_comparison(std::span<const ComparisonRow> rows);

}  // namespace dxr
