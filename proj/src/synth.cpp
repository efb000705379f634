#include "vcml/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "vcml/common.hpp"
#include "vcml/features.hpp"

namespace vcml {

namespace {

// Moments used both to draw values and to standardize them inside the
// label model (matching the reference dataset's overall columns).
struct Moments {
  double mean, sd;
};
const std::map<std::string, Moments>& slot_moments() {
  static const std::map<std::string, Moments> m = {
      {"age_months", {18.14, 10.01}},
      {"founders_count", {1.83, 0.97}},
      {"degree_count_total", {1.16, 1.46}},
      {"raised_total_musd", {3.16, 21.45}},
      {"last_round_lag_months", {11.59, 8.55}},
      {"investor_count", {2.07, 3.82}},
      {"has_linkedin", {0.70, 0.46}},
  };
  return m;
}

double truncated_normal(std::mt19937_64& rng, double mean, double sd, double lo, double hi) {
  std::normal_distribution<double> normal(mean, sd);
  for (int i = 0; i < 256; ++i) {
    const double v = normal(rng);
    if (v >= lo && v <= hi) return v;
  }
  return std::clamp(mean, lo, hi);
}

// Non-negative count with roughly the requested mean/variance: negative
// binomial when overdispersed, Poisson otherwise.
int count_draw(std::mt19937_64& rng, double mean, double var) {
  if (mean <= 0.0) return 0;
  if (var > mean * 1.05) {
    const double k = std::max(1.0, std::round(mean * mean / (var - mean)));
    const double p = k / (k + mean);
    std::negative_binomial_distribution<int> nb(static_cast<int>(k), p);
    return nb(rng);
  }
  std::poisson_distribution<int> poisson(mean);
  return poisson(rng);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::string> pinned_industries() {
  return {"artificial intelligence", "analytics",   "biotechnology", "e-commerce",
          "education",               "fin tech",    "hardware",      "health care",
          "logistics",               "machine learning", "marketing", "mobile apps",
          "real estate",             "software"};
}

std::vector<std::string> pinned_sectors() {
  return {"Communication Services", "Consumer Discretionary", "Consumer Staples", "Energy",
          "Financials", "Health Care", "Industrials", "Information Technology", "Materials",
          "Real Estate", "Utilities"};
}

const std::vector<std::string>& filler_sentences() {
  static const std::vector<std::string> fillers = {
      "The company builds tools for small and medium businesses.",
      "Customers use the product to manage their daily operations.",
      "The service integrates with popular third party platforms.",
      "A mobile application complements the web offering.",
      "The team combines backgrounds in engineering and design.",
      "Data security and privacy are core parts of the offering.",
      "The company serves clients across several regions.",
      "Pricing follows a subscription model with tiered plans.",
      "An open interface lets partners extend the platform.",
      "The roadmap focuses on automation and reporting features.",
      "Support is available around the clock for enterprise plans.",
      "The founders started the company after years in the industry.",
      "Early adopters helped shape the current feature set.",
      "The onboarding process takes less than a day for most teams.",
      "A marketplace connects providers with potential customers.",
      "The technology processes large volumes of documents quickly.",
  };
  return fillers;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct RowDraw {
  StartupProfile profile;
  double raw_score = 0.0;  // planted logit before the calibrated intercept
};

RowDraw draw_row(const SynthConfig& config, std::size_t i) {
  RowDraw row;
  auto& p = row.profile;
  std::mt19937_64 rng(mix_seed(config.seed, i, 0xF0));

  char id[32];
  std::snprintf(id, sizeof(id), "synth-%06zu", i);
  p.id = id;

  const int age = static_cast<int>(std::lround(truncated_normal(rng, 18.14, 10.01, 1.0, 36.0)));
  p.founded_on = config.cutoff.plus_months(-age);
  p.founded_on.day = 1 + static_cast<int>(rng() % 28);

  p.has_email = uniform01(rng) < 0.77;
  p.has_phone = uniform01(rng) < 0.58;
  p.has_facebook = uniform01(rng) < 0.73;
  p.has_twitter = uniform01(rng) < 0.77;
  p.has_linkedin = uniform01(rng) < 0.70;

  p.founders_count = 1 + count_draw(rng, 0.83, 0.90);
  std::binomial_distribution<int> female(p.founders_count, 0.14);
  p.founders_female_count = female(rng);
  p.founders_male_count = p.founders_count - p.founders_female_count;
  std::binomial_distribution<int> extra_country(std::max(0, p.founders_count - 1), 0.2);
  p.founders_country_count = 1 + extra_country(rng);

  p.degree_count_total = count_draw(rng, 1.16, 2.13);
  if (p.degree_count_total > 0) {
    std::binomial_distribution<int> extra(p.degree_count_total - 1, 0.25);
    p.degree_count_max = 1 + extra(rng);
    p.degree_count_max = std::min(p.degree_count_max, p.degree_count_total);
  }
  p.degree_count_mean = p.founders_count > 0
                            ? static_cast<double>(p.degree_count_total) / p.founders_count
                            : 0.0;

  // Funding history; about one row in five has none.
  std::size_t n_rounds = uniform01(rng) < 0.2 ? 0 : 1 + static_cast<std::size_t>(count_draw(rng, 0.7, 1.1));
  n_rounds = std::min<std::size_t>(n_rounds, 6);
  std::vector<int> offsets;
  for (std::size_t r = 0; r < n_rounds; ++r) offsets.push_back(1 + static_cast<int>(rng() % std::max(1, age)));
  std::sort(offsets.begin(), offsets.end());
  std::lognormal_distribution<double> amount(-0.3, 1.5);
  static const InvestmentType progression[4] = {InvestmentType::seed, InvestmentType::series_a,
                                                InvestmentType::series_b, InvestmentType::other_pre_c};
  for (std::size_t r = 0; r < n_rounds; ++r) {
    FundingRound round;
    round.announced_on = p.founded_on.plus_months(offsets[r]);
    if (round.announced_on > config.cutoff) round.announced_on = config.cutoff;
    round.investment_type = progression[std::min<std::size_t>(r, 3)];
    round.raised_musd = amount(rng);
    if (uniform01(rng) < 0.6) round.post_money_musd = round.raised_musd * (2.0 + 6.0 * uniform01(rng));
    round.investor_count = 1 + count_draw(rng, 0.5, 1.2);
    std::binomial_distribution<int> known(round.investor_count, 0.7);
    round.known_investor_count = known(rng);
    p.funding_rounds.push_back(round);
  }

  const auto industries = pinned_industries();
  const std::size_t n_ind = 1 + rng() % 3;
  for (std::size_t k = 0; k < n_ind; ++k) p.industries.insert(industries[rng() % industries.size()]);
  const auto sectors = pinned_sectors();
  const std::size_t n_sec = 1 + rng() % 2;
  for (std::size_t k = 0; k < n_sec; ++k) p.sectors.insert(sectors[rng() % sectors.size()]);

  // Planted logit over standardized realized values plus the text latent.
  const auto slots = extract_numeric_slots(p, config.cutoff);
  const auto& names = FundamentalEncoder::numeric_slot_names();
  double score = 0.0;
  for (const auto& [slot, beta] : config.fundamental_effects) {
    const auto moments_it = slot_moments().find(slot);
    if (moments_it == slot_moments().end()) throw Error("synth: no moments pinned for slot '" + slot + "'");
    const auto& mm = moments_it->second;
    double value = 0.0;
    bool present = false;
    if (slot == "has_linkedin") {
      value = p.has_linkedin ? 1.0 : 0.0;
      present = true;
    } else {
      const auto it = std::find(names.begin(), names.end(), slot);
      if (it == names.end()) throw Error("synth: unknown effect slot '" + slot + "'");
      const auto idx = static_cast<std::size_t>(it - names.begin());
      if (slots.values[idx]) {
        value = *slots.values[idx];
        present = true;
      }
    }
    if (present) score += beta * (value - mm.mean) / mm.sd;
  }
  std::mt19937_64 latent_rng(mix_seed(config.seed, i, 0x7E));
  std::normal_distribution<double> normal(0.0, 1.0);
  score += config.text_latent_effect * normal(latent_rng);
  row.raw_score = score;
  return row;
}

void attach_outcome(const SynthConfig& config, std::size_t i, int label, StartupProfile& p,
                    std::vector<double>& embedding, const std::vector<double>& cluster_axis) {
  std::mt19937_64 rng(mix_seed(config.seed, i, 0x0E7));

  if (label == 1) {
    SuccessEvent e;
    const double kind = uniform01(rng);
    e.kind = kind < 0.903 ? EventKind::funding : (kind < 0.989 ? EventKind::acquisition : EventKind::ipo);
    e.occurred_on = config.cutoff.plus_months(1 + static_cast<int>(rng() % config.horizon_months));
    p.events.push_back(e);
  } else if (uniform01(rng) < 0.08) {
    // A success event just beyond the horizon keeps the boundary honest.
    SuccessEvent e;
    e.kind = EventKind::funding;
    e.occurred_on = config.cutoff.plus_months(config.horizon_months + 1 + static_cast<int>(rng() % 12));
    p.events.push_back(e);
  }

  // Description: neutral filler (successful rows run shorter) plus
  // class-correlated signal phrases.
  const auto& fillers = filler_sentences();
  std::normal_distribution<double> filler_count(label == 1 ? 7.6 : 9.0, 1.6);
  const int n_fill = std::max(1, static_cast<int>(std::lround(filler_count(rng))));
  std::string text;
  const double p_signal = label == 1 ? 0.75 : 0.20;
  const auto& on_phrases = config.success_phrases;
  const auto& off_phrases = config.struggle_phrases;
  for (int s = 0; s < n_fill; ++s) {
    if (!text.empty()) text += " ";
    text += fillers[rng() % fillers.size()];
  }
  for (int s = 0; s < 2; ++s) {
    const bool positive_phrase = uniform01(rng) < p_signal;
    const auto& pool = positive_phrase ? on_phrases : off_phrases;
    if (pool.empty()) continue;
    text += " ";
    text += pool[rng() % pool.size()];
  }
  p.description = text;

  // Embedding: class-cluster mean + isotropic noise.
  std::mt19937_64 emb_rng(mix_seed(config.seed, i, 0xE3B));
  std::normal_distribution<double> noise(0.0, config.embedding_noise_sd);
  embedding.resize(config.embedding_dim);
  const double shift = (label == 1 ? 0.5 : -0.5) * config.embedding_separation;
  for (std::size_t d = 0; d < config.embedding_dim; ++d) {
    embedding[d] = shift * cluster_axis[d] + noise(emb_rng);
  }
}

// Fixed unit direction derived from the master seed; the two class-cluster
// means sit at +-separation/2 along it.
std::vector<double> cluster_axis(const SynthConfig& config) {
  std::mt19937_64 rng(mix_seed(config.seed, 0xA815));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> axis(config.embedding_dim);
  double norm = 0.0;
  for (auto& a : axis) {
    a = normal(rng);
    norm += a * a;
  }
  norm = std::sqrt(norm);
  for (auto& a : axis) a /= norm;
  return axis;
}

}  // namespace

SynthDataset generate_synthetic(const SynthConfig& config) {
  SynthDataset out;
  out.config = config;
  out.true_effects = config.fundamental_effects;
  if (config.n == 0) return out;

  std::vector<RowDraw> rows(config.n);
  for (std::size_t i = 0; i < config.n; ++i) rows[i] = draw_row(config, i);

  // Calibrate the intercept so the mean success probability hits the
  // prevalence target.
  double lo = -20.0, hi = 20.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (const auto& r : rows) mean += sigmoid(r.raw_score + mid);
    mean /= static_cast<double>(rows.size());
    (mean < config.prevalence ? lo : hi) = mid;
  }
  const double intercept = 0.5 * (lo + hi);

  const auto axis = cluster_axis(config);
  out.profiles.reserve(config.n);
  out.labels.reserve(config.n);
  out.embeddings.resize(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    std::mt19937_64 label_rng(mix_seed(config.seed, i, 0x1AB));
    const int label = uniform01(label_rng) < sigmoid(rows[i].raw_score + intercept) ? 1 : 0;
    attach_outcome(config, i, label, rows[i].profile, out.embeddings[i], axis);
    out.profiles.push_back(std::move(rows[i].profile));
    out.labels.push_back(label);
  }
  return out;
}

void write_profiles_jsonl(const std::string& path, const std::vector<StartupProfile>& profiles) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (const auto& p : profiles) out << profile_to_json_line(p) << "\n";
}

void write_embedding_cache_file(const std::string& path, const SynthDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.close();
  std::vector<std::string> ids;
  ids.reserve(dataset.profiles.size());
  for (const auto& p : dataset.profiles) ids.push_back(p.id);
  append_embedding_cache(path, ids, dataset.embeddings);
}

EmbeddingStore embedding_store(const SynthDataset& dataset) {
  EmbeddingStore store;
  for (std::size_t i = 0; i < dataset.profiles.size(); ++i) {
    store[dataset.profiles[i].id] = dataset.embeddings[i];
  }
  return store;
}

}  // namespace vcml
