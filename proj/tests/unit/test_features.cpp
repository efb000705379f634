#include <doctest.h>

#include <random>

#include "vcml/experiment.hpp"
#include "vcml/features.hpp"

using namespace vcml;

namespace {

const Date kCutoff{2015, 12, 31};

StartupProfile make_profile(const std::string& id) {
  StartupProfile p;
  p.id = id;
  p.founded_on = {2014, 1, 10};
  return p;
}

double slot_value(const std::vector<double>& x, const FeatureLayout& layout, const std::string& name) {
  const auto* block = layout.find(name);
  REQUIRE(block != nullptr);
  REQUIRE(block->length == 1);
  return x[block->offset];
}

}  // namespace

TEST_CASE("encoder: industry vocabulary is the sorted union of training industries") {
  auto p1 = make_profile("p1");
  p1.industries = {"a", "b"};
  auto p2 = make_profile("p2");
  p2.industries = {"b", "c"};
  const auto enc = FundamentalEncoder::fit({p1, p2}, kCutoff);
  CHECK(enc.industry_vocabulary() == std::vector<std::string>{"a", "b", "c"});

  // Unseen industries map to an all-zero multi-hot block.
  auto p3 = make_profile("p3");
  p3.industries = {"zzz"};
  const auto x = enc.encode(p3, kCutoff);
  const auto layout = enc.layout();
  const auto* block = layout.find("industries");
  REQUIRE(block != nullptr);
  for (std::size_t j = 0; j < block->length; ++j) CHECK(x[block->offset + j] == 0.0);
}

TEST_CASE("encoder: all post_money missing gives imputation mean 0 and indicator always 1") {
  auto p1 = make_profile("p1");
  p1.funding_rounds = {{{2015, 1, 1}, InvestmentType::seed, 1.0, std::nullopt, 2, 1}};
  auto p2 = make_profile("p2");
  const auto enc = FundamentalEncoder::fit({p1, p2}, kCutoff);
  const auto layout = enc.layout();
  CHECK(slot_value(enc.encode(p1, kCutoff), layout, "last_round_post_money_musd") == 0.0);
  CHECK(slot_value(enc.encode(p1, kCutoff), layout, "last_round_post_money_musd_missing") == 1.0);
  CHECK(slot_value(enc.encode(p2, kCutoff), layout, "last_round_post_money_musd_missing") == 1.0);
}

TEST_CASE("encoder: imputation means match hand averages over a 5-profile fixture") {
  std::vector<StartupProfile> train;
  const double raised[] = {1.0, 2.0, 4.0, 8.0, 10.0};
  for (int i = 0; i < 5; ++i) {
    auto p = make_profile("p" + std::to_string(i));
    p.founders_count = i + 1;
    if (i < 3) {  // two profiles have no rounds at all
      p.funding_rounds = {{{2015, 2, 1}, InvestmentType::seed, raised[i], raised[i] * 3.0, 2, 1}};
    }
    train.push_back(p);
  }
  const auto enc = FundamentalEncoder::fit(train, kCutoff);
  const auto& names = FundamentalEncoder::numeric_slot_names();
  const auto& means = enc.imputation_means();
  const auto idx = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
  };
  CHECK(means[idx("founders_count")] == doctest::Approx((1 + 2 + 3 + 4 + 5) / 5.0));
  CHECK(means[idx("last_round_raised_musd")] == doctest::Approx((1.0 + 2.0 + 4.0) / 3.0));
  CHECK(means[idx("last_round_post_money_musd")] == doctest::Approx((3.0 + 6.0 + 12.0) / 3.0));
  CHECK(means[idx("n_rounds")] == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("encoder: fixture values") {
  auto p = make_profile("p");
  p.founded_on = {2014, 1, 20};
  p.has_linkedin = true;
  p.funding_rounds = {{{2015, 3, 1}, InvestmentType::series_a, 2.0, std::nullopt, 3, 2}};
  const auto enc = FundamentalEncoder::fit({p, make_profile("q")}, {2015, 12, 15});
  const auto layout = enc.layout();
  const auto x = enc.encode(p, {2015, 12, 15});

  CHECK(slot_value(x, layout, "age_months") == 23.0);  // 2014-01 -> 2015-12
  CHECK(slot_value(x, layout, "has_linkedin") == 1.0);
  CHECK(slot_value(x, layout, "last_round_lag_months") == 9.0);
  CHECK(slot_value(x, layout, "n_rounds") == 1.0);

  const auto* onehot = layout.find("last_round_investment_type");
  REQUIRE(onehot != nullptr);
  REQUIRE(onehot->length == 4);
  CHECK(x[onehot->offset + 0] == 0.0);  // seed
  CHECK(x[onehot->offset + 1] == 1.0);  // series_a

  SUBCASE("zero funding rounds: imputed last-round block with indicators set") {
    const auto q = make_profile("q");
    const auto xq = enc.encode(q, {2015, 12, 15});
    CHECK(slot_value(xq, layout, "n_rounds") == 0.0);
    CHECK(slot_value(xq, layout, "last_round_raised_musd_missing") == 1.0);
    CHECK(slot_value(xq, layout, "last_round_lag_months_missing") == 1.0);
    CHECK(slot_value(xq, layout, "last_round_raised_musd") ==
          doctest::Approx(2.0));  // imputed from the only training round
    for (std::size_t j = 0; j < 4; ++j) CHECK(xq[onehot->offset + j] == 0.0);
  }

  SUBCASE("encoding is pure") {
    CHECK(enc.encode(p, {2015, 12, 15}) == x);
  }
}

TEST_CASE("standardizer") {
  SUBCASE("constant column unchanged, {0,2} maps to {-1,+1}") {
    Matrix m(2, 2);
    m(0, 0) = 5.0;
    m(1, 0) = 5.0;
    m(0, 1) = 0.0;
    m(1, 1) = 2.0;
    const auto s = Standardizer::fit(m);
    const auto out = s.apply(m);
    CHECK(out(0, 0) == 5.0);
    CHECK(out(1, 0) == 5.0);
    CHECK(out(0, 1) == doctest::Approx(-1.0));
    CHECK(out(1, 1) == doctest::Approx(1.0));
  }

  SUBCASE("random 10x3 matrix: means vanish, stds are 1") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(3.0, 2.5);
    Matrix m(10, 3);
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 3; ++j) m(i, j) = normal(rng);
    }
    const auto out = Standardizer::fit(m).apply(m);
    for (std::size_t j = 0; j < 3; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < 10; ++i) mean += out(i, j);
      mean /= 10.0;
      CHECK(std::abs(mean) < 1e-12);
      double var = 0.0;
      for (std::size_t i = 0; i < 10; ++i) var += (out(i, j) - mean) * (out(i, j) - mean);
      CHECK(std::sqrt(var / 10.0) == doctest::Approx(1.0));
    }
  }

  SUBCASE("binary columns skipped, non-finite rejected") {
    Matrix m(3, 1);
    m(0, 0) = 0.0;
    m(1, 0) = 1.0;
    m(2, 0) = 1.0;
    const auto s = Standardizer::fit(m);
    CHECK(s.apply(m)(1, 0) == 1.0);

    Matrix bad(1, 1);
    bad(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Standardizer::fit(bad), Error);
  }
}

TEST_CASE("fuse") {
  FeatureLayout fv_layout;
  fv_layout.blocks = {{"a", 0, 1}, {"b", 1, 24}};
  std::vector<double> x_fv(25, 0.5);

  SUBCASE("lengths add and the TSD block is recorded") {
    TextRepresentation tsd{TextKind::doc_embedding, std::vector<double>(768, 0.25)};
    const auto fused = fuse(x_fv, fv_layout, tsd);
    CHECK(fused.values.size() == 793);
    const auto* block = fused.layout.find("TSD");
    REQUIRE(block != nullptr);
    CHECK(block->offset == 25);
    CHECK(block->length == 768);
  }

  SUBCASE("empty TSD is the FV identity (ablation)") {
    const auto fused = fuse(x_fv, fv_layout, TextRepresentation{});
    CHECK(fused.values == x_fv);
    CHECK(fused.layout.find("TSD") == nullptr);
  }

  SUBCASE("empty FV is the TSD identity") {
    TextRepresentation tsd{TextKind::bow, {1.0, 2.0}};
    const auto fused = fuse({}, FeatureLayout{}, tsd);
    CHECK(fused.values == tsd.values);
    CHECK(fused.layout.blocks.size() == 1);
  }

  SUBCASE("slot-by-slot equality with manual concatenation") {
    TextRepresentation tsd{TextKind::word_avg, {9.0, 8.0, 7.0}};
    const auto fused = fuse(x_fv, fv_layout, tsd);
    std::vector<double> manual = x_fv;
    manual.insert(manual.end(), tsd.values.begin(), tsd.values.end());
    CHECK(fused.values == manual);
  }

  SUBCASE("both sides empty is an error") {
    CHECK_THROWS_AS(fuse({}, FeatureLayout{}, TextRepresentation{}), Error);
  }
}

TEST_CASE("no statistic is fitted on test rows") {
  // Build a dataset where the test rows differ wildly; the fitted state of
  // the pipeline must be identical regardless of test-row content.
  auto make_dataset = [](double test_scale) {
    Dataset ds;
    for (int i = 0; i < 8; ++i) {
      auto p = make_profile("train" + std::to_string(i));
      p.founders_count = i;
      p.industries = {i % 2 == 0 ? "even" : "odd"};
      p.description = "alpha beta gamma delta";
      ds.profiles.push_back(p);
      ds.labels.push_back(i % 2);
    }
    for (int i = 0; i < 4; ++i) {
      auto p = make_profile("test" + std::to_string(i));
      p.founders_count = static_cast<int>(100 * test_scale) + i;
      p.industries = {"exotic" + std::to_string(i)};
      p.description = "unseen words everywhere " + std::to_string(test_scale);
      ds.profiles.push_back(p);
      ds.labels.push_back(i % 2);
    }
    return ds;
  };
  SplitIndices split;
  for (std::size_t i = 0; i < 8; ++i) split.train.push_back(i);
  for (std::size_t i = 8; i < 12; ++i) split.test.push_back(i);

  PipelineConfig pc;
  pc.mode = InputMode::fv_tsd;
  pc.text_kind = TextKind::bow;
  pc.cutoff = kCutoff;
  pc.bow_min_doc_fraction = 0.2;
  TextResources none;

  const auto a = featurize_split(make_dataset(1.0), split, pc, none);
  const auto b = featurize_split(make_dataset(-3.0), split, pc, none);
  CHECK(a.encoder.industry_vocabulary() == b.encoder.industry_vocabulary());
  CHECK(a.encoder.imputation_means() == b.encoder.imputation_means());
  CHECK(a.standardizer.means() == b.standardizer.means());
  CHECK(a.standardizer.stds() == b.standardizer.stds());
  REQUIRE(a.bow.has_value());
  CHECK(a.bow->terms == b.bow->terms);
  CHECK(a.bow->idf == b.bow->idf);
  CHECK(a.train_X.values() == b.train_X.values());
}

TEST_CASE("layout validates and fingerprints change with structure") {
  FeatureLayout good;
  good.blocks = {{"a", 0, 2}, {"b", 2, 1}};
  good.validate();
  CHECK(good.total_dim() == 3);

  FeatureLayout gap;
  gap.blocks = {{"a", 0, 2}, {"b", 3, 1}};
  CHECK_THROWS_AS(gap.validate(), Error);

  FeatureLayout renamed = good;
  renamed.blocks[1].name = "c";
  CHECK(good.fingerprint() != renamed.fingerprint());
}
