#include "vcml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "vcml/common.hpp"
#include "vcml/text.hpp"

namespace vcml {

double compute_roi(double tp, double fp, const RoiParams& params) {
  const double selected = tp + fp;
  if (selected <= 0.0) throw Error("compute_roi: empty portfolio (tp + fp == 0)");
  const double gain = tp * params.fiv_tp + fp * params.fiv_fp - selected * params.ic;
  return gain / (selected * params.ic) * 100.0;
}

std::optional<double> auroc_fraction(std::span<const int> y_true, std::span<const double> scores) {
  const std::size_t n = y_true.size();
  std::size_t n_pos = 0;
  for (int v : y_true) n_pos += static_cast<std::size_t>(v);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank sum over positives with average ranks for ties.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (y_true[order[k]] == 1) rank_sum += avg_rank;
    }
    i = j;
  }
  const double u = rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::optional<double> average_precision_fraction(std::span<const int> y_true,
                                                 std::span<const double> scores) {
  const std::size_t n = y_true.size();
  std::size_t n_pos = 0;
  for (int v : y_true) n_pos += static_cast<std::size_t>(v);
  if (n_pos == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, predicted = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      tp += static_cast<std::size_t>(y_true[order[k]]);
    }
    predicted += j - i;
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

MetricsReport compute_metrics(std::span<const int> y_true, std::span<const double> scores,
                              double threshold, const RoiParams& roi) {
  if (y_true.size() != scores.size()) throw Error("compute_metrics: y/scores length mismatch");
  MetricsReport report;
  report.threshold = threshold;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool positive = scores[i] >= threshold;
    if (y_true[i] == 1) {
      positive ? ++report.tp : ++report.fn;
    } else {
      positive ? ++report.fp : ++report.tn;
    }
  }
  const double tp = static_cast<double>(report.tp), fp = static_cast<double>(report.fp);
  const double tn = static_cast<double>(report.tn), fn = static_cast<double>(report.fn);

  std::optional<double> tpr, tnr;
  if (tp + fn > 0) tpr = tp / (tp + fn);
  if (tn + fp > 0) tnr = tn / (tn + fp);
  if (tpr && tnr) {
    report.balanced_accuracy = 50.0 * (*tpr + *tnr);
  } else {
    report.undefined.push_back("balanced_accuracy");
  }
  if (tpr) {
    report.recall = 100.0 * *tpr;
  } else {
    report.undefined.push_back("recall");
  }
  if (tp + fp > 0) {
    report.precision = 100.0 * tp / (tp + fp);
  } else {
    report.undefined.push_back("precision");
  }
  if (report.precision && report.recall && *report.precision + *report.recall > 0.0) {
    report.f1 = 2.0 * *report.precision * *report.recall / (*report.precision + *report.recall);
  } else {
    report.undefined.push_back("f1");
  }
  if (const auto auc = auroc_fraction(y_true, scores)) {
    report.auroc = 100.0 * *auc;
  } else {
    report.undefined.push_back("auroc");
  }
  if (const auto ap = average_precision_fraction(y_true, scores)) {
    report.aucpr = 100.0 * *ap;
  } else {
    report.undefined.push_back("aucpr");
  }
  if (tp + fp > 0) {
    report.roi = compute_roi(tp, fp, roi);
  } else {
    report.undefined.push_back("roi");
  }
  return report;
}

McNemarResult mcnemar_test(std::span<const int> pred_a, std::span<const int> pred_b,
                           std::span<const int> y_true) {
  if (pred_a.size() != pred_b.size() || pred_a.size() != y_true.size())
    throw Error("mcnemar_test: length mismatch");
  McNemarResult result;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool a_correct = pred_a[i] == y_true[i];
    const bool b_correct = pred_b[i] == y_true[i];
    if (a_correct && !b_correct) ++result.b;
    if (!a_correct && b_correct) ++result.c;
  }
  const double discordant = static_cast<double>(result.b + result.c);
  if (discordant == 0.0) {
    result.degenerate = true;
    result.chi2 = 0.0;
  } else {
    const double diff = static_cast<double>(result.b) - static_cast<double>(result.c);
    result.chi2 = diff * diff / discordant;
  }
  return result;
}

Grouping grouping_from_string(const std::string& s) {
  if (s == "sector") return Grouping::sector;
  if (s == "age_bucket") return Grouping::age_bucket;
  if (s == "length_bucket") return Grouping::length_bucket;
  if (s == "event_kind") return Grouping::event_kind;
  throw Error("unknown grouping key '" + s + "'");
}

const char* to_string(Grouping g) {
  switch (g) {
    case Grouping::sector: return "sector";
    case Grouping::age_bucket: return "age_bucket";
    case Grouping::length_bucket: return "length_bucket";
    case Grouping::event_kind: return "event_kind";
  }
  return "sector";
}

namespace {

std::string age_bucket(int age_months) {
  if (age_months >= 1 && age_months <= 12) return "1-12 months";
  if (age_months >= 13 && age_months <= 24) return "13-24 months";
  if (age_months >= 25 && age_months <= 36) return "25-36 months";
  return "other";
}

std::string length_bucket(std::size_t words) {
  if (words < 50) return "short";
  if (words <= 100) return "50-100 words";
  if (words <= 200) return "101-200 words";
  return ">=201 words";
}

std::string event_bucket(const StartupProfile& p, const Date& cutoff, int horizon_months) {
  bool ipo = false, acquisition = false, funding = false;
  for (const auto& e : p.events) {
    if (e.occurred_on > cutoff && months_between(cutoff, e.occurred_on) <= horizon_months) {
      if (e.kind == EventKind::ipo) ipo = true;
      if (e.kind == EventKind::acquisition) acquisition = true;
      if (e.kind == EventKind::funding) funding = true;
    }
  }
  if (ipo) return "ipo";
  if (acquisition) return "acquisition";
  if (funding) return "funding";
  return "non_successful";
}

}  // namespace

std::vector<SubgroupReport> subgroup_report(const std::vector<StartupProfile>& rows,
                                            std::span<const int> y_true,
                                            std::span<const double> scores, Grouping grouping,
                                            const Date& cutoff, int horizon_months, double threshold,
                                            const RoiParams& roi, std::size_t min_support) {
  if (rows.size() != y_true.size() || rows.size() != scores.size())
    throw Error("subgroup_report: length mismatch");

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    switch (grouping) {
      case Grouping::sector: {
        if (rows[i].sectors.empty()) {
          groups["(no sector)"].push_back(i);
        } else {
          for (const auto& s : rows[i].sectors) groups[s].push_back(i);
        }
        break;
      }
      case Grouping::age_bucket:
        groups[age_bucket(months_between(rows[i].founded_on, cutoff))].push_back(i);
        break;
      case Grouping::length_bucket:
        groups[length_bucket(tokenize(rows[i].description).size())].push_back(i);
        break;
      case Grouping::event_kind:
        groups[event_bucket(rows[i], cutoff, horizon_months)].push_back(i);
        break;
    }
  }

  std::vector<SubgroupReport> out;
  for (const auto& [name, indices] : groups) {
    SubgroupReport g;
    g.group = name;
    g.n = indices.size();
    g.low_support = indices.size() < min_support;
    std::vector<int> y;
    std::vector<double> s;
    y.reserve(indices.size());
    s.reserve(indices.size());
    for (std::size_t i : indices) {
      y.push_back(y_true[i]);
      s.push_back(scores[i]);
    }
    if (grouping == Grouping::event_kind) {
      // Event subsets are single-class by construction; only the rate of
      // correct classification is meaningful.
      std::size_t correct = 0;
      for (std::size_t k = 0; k < y.size(); ++k) {
        const int pred = s[k] >= threshold ? 1 : 0;
        if (pred == y[k]) ++correct;
      }
      g.correct_rate = 100.0 * static_cast<double>(correct) / static_cast<double>(y.size());
      MetricsReport counts_only;
      counts_only.threshold = threshold;
      for (std::size_t k = 0; k < y.size(); ++k) {
        const bool positive = s[k] >= threshold;
        if (y[k] == 1) {
          positive ? ++counts_only.tp : ++counts_only.fn;
        } else {
          positive ? ++counts_only.fp : ++counts_only.tn;
        }
      }
      g.metrics = counts_only;
    } else {
      g.metrics = compute_metrics(y, s, threshold, roi);
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace vcml
