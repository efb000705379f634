#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcml/common.hpp"
#include "vcml/profile.hpp"

namespace vcml {

// Portfolio constants in millions USD. ic bundles the average pre-success
// valuation with a 10% screening/monitoring surcharge.
struct RoiParams {
  double fiv_tp = 184.47;
  double fiv_fp = 0.0;
  double ic = 13.409;
};

// Percentage return of the selected portfolio. Throws when the portfolio is
// empty (tp + fp == 0); that case is reported as undefined upstream.
double compute_roi(double tp, double fp, const RoiParams& params);

// All rates in percent. Metrics that hit a zero denominator are left unset
// and named in `undefined`.
struct MetricsReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::optional<double> balanced_accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> auroc;
  std::optional<double> aucpr;
  std::optional<double> roi;
  double threshold = 0.5;
  std::vector<std::string> undefined;  // metric names with no defined value
};

MetricsReport compute_metrics(std::span<const int> y_true, std::span<const double> scores,
                              double threshold = 0.5, const RoiParams& roi = {});

// Rank-based AUROC (ties count 1/2), as a fraction in [0,1]; unset when a
// class is missing.
std::optional<double> auroc_fraction(std::span<const int> y_true, std::span<const double> scores);

// Average precision over unique descending thresholds, as a fraction.
std::optional<double> average_precision_fraction(std::span<const int> y_true,
                                                 std::span<const double> scores);

struct McNemarResult {
  double chi2 = 0.0;
  std::size_t b = 0;  // a correct, b wrong
  std::size_t c = 0;  // a wrong, b correct
  bool degenerate = false;  // b + c == 0
};

McNemarResult mcnemar_test(std::span<const int> pred_a, std::span<const int> pred_b,
                           std::span<const int> y_true);

enum class Grouping { sector, age_bucket, length_bucket, event_kind };

Grouping grouping_from_string(const std::string& s);
const char* to_string(Grouping g);

struct SubgroupReport {
  std::string group;
  std::size_t n = 0;
  bool low_support = false;
  MetricsReport metrics;                      // rate metrics omitted for event groups
  std::optional<double> correct_rate;         // event groups: % classified correctly
};

// Buckets: age {1-12, 13-24, 25-36 months}; description length {short(<50),
// 50-100, 101-200, >=201 words}; event groups partition by the first
// qualifying success event with priority ipo > acquisition > funding, plus
// "non_successful". Sector groups may overlap (multi-sector startups).
std::vector<SubgroupReport> subgroup_report(const std::vector<StartupProfile>& rows,
                                            std::span<const int> y_true,
                                            std::span<const double> scores, Grouping grouping,
                                            const Date& cutoff, int horizon_months,
                                            double threshold = 0.5, const RoiParams& roi = {},
                                            std::size_t min_support = 10);

}  // namespace vcml
