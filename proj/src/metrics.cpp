#include "wornet/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "wornet/tensor.hpp"

namespace wornet {

namespace {

void check_scored_labels(const std::vector<double>& scores, const std::vector<int>& labels) {
  check(scores.size() == labels.size(), "scores and labels must have equal length");
  for (double s : scores) check(std::isfinite(s), "scores must be finite");
  for (int l : labels) check(l == 0 || l == 1, "labels must be 0 or 1");
}

std::optional<double> ratio(long num, long den) {
  if (den == 0) return std::nullopt;
  return double(num) / double(den);
}

}  // namespace

ConfusionCounts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold) {
  check_scored_labels(scores, labels);
  ConfusionCounts c;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual)
      ++c.tp;
    else if (predicted && !actual)
      ++c.fp;
    else if (!predicted && actual)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

Metrics metrics_from(const ConfusionCounts& c) {
  check(c.tp >= 0 && c.fp >= 0 && c.tn >= 0 && c.fn >= 0, "confusion counts must be non-negative");
  Metrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"accuracy", "precision", "recall", "specificity",
                                              "f1"};
  return names;
}

std::optional<double> metric_by_name(const Metrics& m, const std::string& name) {
  if (name == "accuracy") return m.accuracy;
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "specificity") return m.specificity;
  if (name == "f1") return m.f1;
  fail("unknown metric '" + name + "'");
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_scored_labels(scores, labels);
  const long pos = std::count(labels.begin(), labels.end(), 1);
  const long neg = long(labels.size()) - pos;
  check(pos > 0 && neg > 0, "ROC needs both classes present");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  const double top = *std::max_element(scores.begin(), scores.end()) + 1.0;
  curve.points.push_back({top, 0.0, 0.0});

  long tp = 0, fp = 0, prev_tp = 0, prev_fp = 0;
  long twice_area = 0;  // integer accumulation keeps the trapezoid rule exact
  size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    twice_area += (fp - prev_fp) * (tp + prev_tp);
    curve.points.push_back({s, double(fp) / double(neg), double(tp) / double(pos)});
    prev_tp = tp;
    prev_fp = fp;
  }
  curve.auc = double(twice_area) / (2.0 * double(pos) * double(neg));
  return curve;
}

MetricSummary summarize(const std::vector<double>& values) {
  check(!values.empty(), "cannot summarize an empty value list");
  MetricSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
  if (values.size() >= 2) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / double(values.size() - 1));
  }
  return s;
}

std::string format_percent(const MetricSummary& s) {
  char buf[64];
  if (s.stddev)
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", s.mean * 100.0, *s.stddev * 100.0);
  else
    std::snprintf(buf, sizeof(buf), "%.2f", s.mean * 100.0);
  return buf;
}

std::vector<std::pair<std::string, MetricSummary>> summarize_folds(
    const std::vector<FoldMetrics>& folds) {
  std::vector<std::pair<std::string, MetricSummary>> out;
  for (const std::string& name : metric_names()) {
    std::vector<double> values;
    for (const FoldMetrics& f : folds)
      if (const auto v = metric_by_name(f.metrics, name)) values.push_back(*v);
    if (!values.empty()) out.emplace_back(name, summarize(values));
  }
  return out;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const FoldMetrics& f : report.folds) {
    nlohmann::json metrics;
    for (const std::string& name : metric_names())
      metrics[name] = opt_json(metric_by_name(f.metrics, name));
    folds.push_back({{"fold", f.fold},
                     {"counts",
                      {{"tp", f.counts.tp},
                       {"fp", f.counts.fp},
                       {"tn", f.counts.tn},
                       {"fn", f.counts.fn}}},
                     {"metrics", std::move(metrics)}});
  }
  nlohmann::json summary;
  for (const auto& [name, s] : report.summary)
    summary[name] = {{"mean", s.mean},
                     {"stddev", opt_json(s.stddev)},
                     {"formatted", format_percent(s)}};
  nlohmann::json roc = nlohmann::json::array();
  for (const RocPoint& p : report.roc.points) roc.push_back({p.threshold, p.fpr, p.tpr});
  return {{"folds", std::move(folds)},
          {"summary", std::move(summary)},
          {"roc", std::move(roc)},
          {"auc", report.roc.auc}};
}

std::string metrics_csv(const EvalReport& report) {
  std::string out = "fold,metric,value\n";
  for (const FoldMetrics& f : report.folds)
    for (const std::string& name : metric_names()) {
      const auto v = metric_by_name(f.metrics, name);
      out += std::to_string(f.fold) + "," + name + "," + (v ? num(*v) : "nan") + "\n";
    }
  return out;
}

std::string roc_csv(const RocCurve& roc) {
  std::string out = "threshold,fpr,tpr\n";
  for (const RocPoint& p : roc.points)
    out += num(p.threshold) + "," + num(p.fpr) + "," + num(p.tpr) + "\n";
  return out;
}

}  // namespace wornet
