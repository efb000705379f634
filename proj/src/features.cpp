#include "vcml/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace vcml {

std::size_t FeatureLayout::total_dim() const {
  if (blocks.empty()) return 0;
  return blocks.back().offset + blocks.back().length;
}

const FeatureBlock* FeatureLayout::find(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::vector<std::string> FeatureLayout::slot_names() const {
  std::vector<std::string> names;
  names.reserve(total_dim());
  for (const auto& b : blocks) {
    if (b.length == 1) {
      names.push_back(b.name);
    } else {
      for (std::size_t i = 0; i < b.length; ++i) names.push_back(b.name + "[" + std::to_string(i) + "]");
    }
  }
  return names;
}

std::uint64_t FeatureLayout::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& b : blocks) {
    h = fnv1a64(b.name, h);
    h = fnv1a64_bytes(&b.offset, sizeof(b.offset), h);
    h = fnv1a64_bytes(&b.length, sizeof(b.length), h);
  }
  return h;
}

void FeatureLayout::validate() const {
  std::size_t expected = 0;
  for (const auto& b : blocks) {
    if (b.offset != expected) throw Error("FeatureLayout: block '" + b.name + "' not contiguous");
    if (b.length == 0) throw Error("FeatureLayout: block '" + b.name + "' is empty");
    expected = b.offset + b.length;
  }
}

const std::vector<std::string>& FundamentalEncoder::numeric_slot_names() {
  static const std::vector<std::string> names = {
      "age_months",
      "founders_count",
      "founders_country_count",
      "founders_male_count",
      "founders_female_count",
      "degree_count_total",
      "degree_count_max",
      "degree_count_mean",
      "n_rounds",
      "raised_total_musd",
      "last_round_raised_musd",
      "last_round_post_money_musd",
      "last_round_lag_months",
      "investor_count",
      "last_round_investor_count",
      "known_investor_count",
      "last_round_known_investor_count",
  };
  return names;
}

const std::vector<std::string>& FundamentalEncoder::indicator_slot_names() {
  static const std::vector<std::string> names = {
      "last_round_raised_musd_missing",
      "last_round_post_money_musd_missing",
      "last_round_lag_months_missing",
      "last_round_investor_count_missing",
      "last_round_known_investor_count_missing",
  };
  return names;
}

const std::vector<std::string>& FundamentalEncoder::boolean_slot_names() {
  static const std::vector<std::string> names = {"has_email", "has_phone", "has_facebook",
                                                 "has_twitter", "has_linkedin"};
  return names;
}

namespace {

const std::vector<InvestmentType>& investment_type_levels() {
  static const std::vector<InvestmentType> levels = {InvestmentType::seed, InvestmentType::series_a,
                                                     InvestmentType::series_b, InvestmentType::other_pre_c};
  return levels;
}

// Indices into numeric_slot_names() of the slots that carry indicators.
const std::vector<std::size_t>& imputable_slot_indices() {
  static const std::vector<std::size_t> idx = {10, 11, 12, 14, 16};
  return idx;
}

}  // namespace

NumericSlots extract_numeric_slots(const StartupProfile& profile, const Date& cutoff) {
  NumericSlots slots;
  slots.values.assign(FundamentalEncoder::numeric_slot_names().size(), std::nullopt);

  slots.values[0] = static_cast<double>(months_between(profile.founded_on, cutoff));
  slots.values[1] = profile.founders_count;
  slots.values[2] = profile.founders_country_count;
  slots.values[3] = profile.founders_male_count;
  slots.values[4] = profile.founders_female_count;
  slots.values[5] = profile.degree_count_total;
  slots.values[6] = profile.degree_count_max;
  slots.values[7] = profile.degree_count_mean;

  const auto& rounds = profile.funding_rounds;
  slots.values[8] = static_cast<double>(rounds.size());
  double raised_total = 0.0, investors = 0.0, known = 0.0;
  for (const auto& r : rounds) {
    raised_total += r.raised_musd;
    investors += r.investor_count;
    known += r.known_investor_count;
  }
  slots.values[9] = raised_total;
  slots.values[13] = investors;
  slots.values[15] = known;

  if (!rounds.empty()) {
    const auto& last = rounds.back();
    slots.values[10] = last.raised_musd;
    if (last.post_money_musd) slots.values[11] = *last.post_money_musd;
    slots.values[12] = static_cast<double>(months_between(last.announced_on, cutoff));
    slots.values[14] = last.investor_count;
    slots.values[16] = last.known_investor_count;
  }
  return slots;
}

FundamentalEncoder FundamentalEncoder::fit(const std::vector<StartupProfile>& train, const Date& cutoff) {
  if (train.empty()) throw Error("FundamentalEncoder::fit: empty training set");
  FundamentalEncoder enc;

  std::set<std::string> industries;
  for (const auto& p : train) industries.insert(p.industries.begin(), p.industries.end());
  enc.industry_vocabulary_.assign(industries.begin(), industries.end());

  const std::size_t n_slots = numeric_slot_names().size();
  std::vector<double> sums(n_slots, 0.0);
  std::vector<std::size_t> counts(n_slots, 0);
  for (const auto& p : train) {
    const auto slots = extract_numeric_slots(p, cutoff);
    for (std::size_t i = 0; i < n_slots; ++i) {
      if (slots.values[i]) {
        sums[i] += *slots.values[i];
        counts[i] += 1;
      }
    }
  }
  enc.imputation_means_.assign(n_slots, 0.0);
  for (std::size_t i = 0; i < n_slots; ++i) {
    if (counts[i] > 0) enc.imputation_means_[i] = sums[i] / static_cast<double>(counts[i]);
  }
  return enc;
}

std::size_t FundamentalEncoder::dim() const {
  return numeric_slot_names().size() + indicator_slot_names().size() + boolean_slot_names().size() +
         investment_type_levels().size() + industry_vocabulary_.size();
}

FeatureLayout FundamentalEncoder::layout() const {
  FeatureLayout layout;
  std::size_t offset = 0;
  auto add = [&](const std::string& name, std::size_t length) {
    layout.blocks.push_back({name, offset, length});
    offset += length;
  };
  for (const auto& n : numeric_slot_names()) add(n, 1);
  for (const auto& n : indicator_slot_names()) add(n, 1);
  for (const auto& n : boolean_slot_names()) add(n, 1);
  add("last_round_investment_type", investment_type_levels().size());
  if (!industry_vocabulary_.empty()) add("industries", industry_vocabulary_.size());
  return layout;
}

std::vector<double> FundamentalEncoder::encode(const StartupProfile& profile, const Date& cutoff) const {
  std::vector<double> x;
  x.reserve(dim());

  const auto slots = extract_numeric_slots(profile, cutoff);
  for (std::size_t i = 0; i < slots.values.size(); ++i) {
    x.push_back(slots.values[i] ? *slots.values[i] : imputation_means_[i]);
  }
  for (std::size_t i : imputable_slot_indices()) {
    x.push_back(slots.values[i] ? 0.0 : 1.0);
  }
  x.push_back(profile.has_email ? 1.0 : 0.0);
  x.push_back(profile.has_phone ? 1.0 : 0.0);
  x.push_back(profile.has_facebook ? 1.0 : 0.0);
  x.push_back(profile.has_twitter ? 1.0 : 0.0);
  x.push_back(profile.has_linkedin ? 1.0 : 0.0);

  const auto& levels = investment_type_levels();
  if (profile.funding_rounds.empty()) {
    for (std::size_t i = 0; i < levels.size(); ++i) x.push_back(0.0);
  } else {
    const auto last_type = profile.funding_rounds.back().investment_type;
    for (const auto level : levels) x.push_back(level == last_type ? 1.0 : 0.0);
  }

  for (const auto& industry : industry_vocabulary_) {
    x.push_back(profile.industries.count(industry) ? 1.0 : 0.0);
  }
  return x;
}

Standardizer Standardizer::fit(const Matrix& train, const std::vector<bool>& force_skip) {
  if (train.rows() == 0) throw Error("Standardizer::fit: empty matrix");
  if (!force_skip.empty() && force_skip.size() != train.cols())
    throw Error("Standardizer::fit: force_skip width mismatch");
  const std::size_t n = train.rows(), d = train.cols();
  Standardizer s;
  s.mean_.assign(d, 0.0);
  s.std_.assign(d, 0.0);
  s.skip_.assign(d, false);

  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    bool binary = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = train(i, j);
      if (!std::isfinite(v)) throw Error("Standardizer::fit: non-finite value in column " + std::to_string(j));
      sum += v;
      if (v != 0.0 && v != 1.0) binary = false;
    }
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = train(i, j) - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    s.mean_[j] = mean;
    s.std_[j] = sd;
    s.skip_[j] = binary || sd == 0.0 || (!force_skip.empty() && force_skip[j]);
  }
  return s;
}

void Standardizer::apply_in_place(Matrix& m) const {
  if (m.cols() != mean_.size()) throw Error("Standardizer::apply: width mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (skip_[j]) continue;
      const double v = m(i, j);
      if (!std::isfinite(v)) throw Error("Standardizer::apply: non-finite value");
      m(i, j) = (v - mean_[j]) / std_[j];
    }
  }
}

Matrix Standardizer::apply(const Matrix& m) const {
  Matrix out = m;
  apply_in_place(out);
  return out;
}

FusedVector fuse(const std::vector<double>& x_fv, const FeatureLayout& fv_layout,
                 const TextRepresentation& x_tsd) {
  if (x_fv.empty() && x_tsd.values.empty()) throw Error("fuse: both sides empty");
  if (x_fv.size() != fv_layout.total_dim()) throw Error("fuse: fundamental layout/vector mismatch");
  for (double v : x_fv) {
    if (!std::isfinite(v)) throw Error("fuse: non-finite fundamental value");
  }
  for (double v : x_tsd.values) {
    if (!std::isfinite(v)) throw Error("fuse: non-finite text value");
  }
  FusedVector out;
  out.values = x_fv;
  out.values.insert(out.values.end(), x_tsd.values.begin(), x_tsd.values.end());
  out.layout = fv_layout;
  if (!x_tsd.values.empty()) {
    out.layout.blocks.push_back({"TSD", x_fv.size(), x_tsd.values.size()});
  }
  out.layout.validate();
  return out;
}

void write_feature_matrix_csv(const std::string& path, const Matrix& m, const FeatureLayout& layout) {
  if (m.cols() != layout.total_dim()) throw Error("write_feature_matrix_csv: layout/matrix mismatch");
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const auto names = layout.slot_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) out << ",";
    out << names[j];
  }
  out << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << m(i, j);
    }
    out << "\n";
  }
}

void write_layout_json(const std::string& path, const FeatureLayout& layout) {
  nlohmann::json j;
  j["total_dim"] = layout.total_dim();
  auto blocks = nlohmann::json::array();
  for (const auto& b : layout.blocks) {
    blocks.push_back({{"name", b.name}, {"offset", b.offset}, {"length", b.length}});
  }
  j["blocks"] = blocks;
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

}  // namespace vcml
