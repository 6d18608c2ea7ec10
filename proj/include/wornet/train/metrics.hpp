#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace wornet {

/// Binary confusion counts; the positive class is "worn".
struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Threshold a score vector against 0/1 labels; score >= threshold predicts
/// the positive class.
ConfusionCounts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold = 0.5);

/// Ratio metrics with 0/0 cases reported as absent rather than zero.
struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> specificity;
  std::optional<double> f1;
};

Metrics metrics_from(const ConfusionCounts& c);

/// Names of the Metrics fields, in reporting order.
const std::vector<std::string>& metric_names();
std::optional<double> metric_by_name(const Metrics& m, const std::string& name);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Threshold sweep over the distinct scores, descending. Starts at an
/// all-negative point (0,0) and ends at (1,1); the area under the curve by
/// the trapezoid rule equals pairwise concordance with ties counted half.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mean and sample (n-1) standard deviation; the deviation is absent for a
/// single value.
struct MetricSummary {
  double mean = 0.0;
  std::optional<double> stddev;
};

MetricSummary summarize(const std::vector<double>& values);

/// Percent formatting for report tables: "98.55 ± 0.35", or just "98.55" when
/// no deviation is available.
std::string format_percent(const MetricSummary& s);

struct FoldMetrics {
  int fold = 0;
  ConfusionCounts counts;
  Metrics metrics;
};

struct EvalReport {
  std::vector<FoldMetrics> folds;
  std::vector<std::pair<std::string, MetricSummary>> summary;
  RocCurve roc;
};

/// Summaries per metric over the folds where the metric is defined.
std::vector<std::pair<std::string, MetricSummary>> summarize_folds(
    const std::vector<FoldMetrics>& folds);

nlohmann::json report_to_json(const EvalReport& report);

/// One `fold,metric,value` row per fold per metric; undefined values print as
/// "nan".
std::string metrics_csv(const EvalReport& report);

/// `threshold,fpr,tpr` rows.
std::string roc_csv(const RocCurve& roc);

}  // namespace wornet
