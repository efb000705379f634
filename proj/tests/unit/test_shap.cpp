#include <doctest.h>

#include <cmath>
#include <random>

#include "vcml/shap.hpp"

using namespace vcml;

namespace {

// Raw linear response, so closed-form Shapley values are exact.
class LinearProbe final : public TrainedClassifier {
 public:
  LinearProbe(std::vector<double> w, double b)
      : TrainedClassifier(Family::logistic, w.size(), 0, 0), w_(std::move(w)), b_(b) {}

 protected:
  void predict_impl(const Matrix& X, std::vector<double>& out) const override {
    for (std::size_t i = 0; i < X.rows(); ++i) {
      double z = b_;
      for (std::size_t j = 0; j < w_.size(); ++j) z += w_[j] * X(i, j);
      out[i] = z;
    }
  }

 private:
  std::vector<double> w_;
  double b_;
};

FeatureLayout single_slot_layout(std::size_t d, bool with_tsd = false) {
  FeatureLayout layout;
  for (std::size_t j = 0; j < d; ++j) {
    layout.blocks.push_back({with_tsd && j == d - 1 ? "TSD" : "f" + std::to_string(j), j, 1});
  }
  return layout;
}

Matrix random_background(std::size_t rows, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, d);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("shap: constant model attributes nothing") {
  MajorityModel constant(0.64, 0);
  const auto layout = single_slot_layout(4);
  const auto background = random_background(10, 4, 1);
  const std::vector<double> x = {1.0, -2.0, 3.0, 0.5};
  for (auto mode : {ShapMode::exact, ShapMode::sampled}) {
    const auto attr = shap_attributions(constant, background, x, layout, mode, 200, 3);
    for (double v : attr.values) CHECK(std::abs(v) < 1e-12);
    CHECK(attr.base_value == doctest::Approx(0.64));
  }
}

TEST_CASE("shap: linear model matches the closed form per block") {
  const std::vector<double> w = {0.7, -1.3, 0.4, 2.0, -0.6};
  LinearProbe model(w, 0.2);
  FeatureLayout layout;
  layout.blocks = {{"a", 0, 2}, {"b", 2, 1}, {"TSD", 3, 2}};
  const auto background = random_background(16, 5, 7);
  std::vector<double> x = {1.5, -0.5, 2.0, 0.3, -1.1};

  const auto attr = shap_attributions(model, background, x, layout, ShapMode::exact);
  std::vector<double> bg_mean(5, 0.0);
  for (std::size_t i = 0; i < background.rows(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) bg_mean[j] += background(i, j) / 16.0;
  }
  for (const auto& block : layout.blocks) {
    double expect = 0.0, got = 0.0;
    for (std::size_t j = 0; j < block.length; ++j) {
      expect += w[block.offset + j] * (x[block.offset + j] - bg_mean[block.offset + j]);
      got += attr.values[block.offset + j];
    }
    CHECK(std::abs(expect - got) < 1e-10);
  }

  SUBCASE("efficiency: contributions plus base reach f(x)") {
    double total = attr.base_value;
    for (double v : attr.values) total += v;
    CHECK(total == doctest::Approx(model.predict_one(x)).epsilon(1e-12));
  }

  SUBCASE("sampled mode converges with cycling background rows") {
    const auto sampled = shap_attributions(model, background, x, layout, ShapMode::sampled, 2000, 17);
    double total = sampled.base_value;
    for (double v : sampled.values) total += v;
    CHECK(std::abs(total - model.predict_one(x)) < 0.01);
  }
}

TEST_CASE("shap: symmetric duplicate blocks get equal attributions") {
  LinearProbe model({1.0, 1.0}, 0.0);
  const auto layout = single_slot_layout(2);
  Matrix background(2, 2);
  background(0, 0) = 0.0;
  background(0, 1) = 0.0;
  background(1, 0) = 1.0;
  background(1, 1) = 1.0;
  const std::vector<double> x = {0.7, 0.7};
  const auto attr = shap_attributions(model, background, x, layout, ShapMode::exact);
  CHECK(attr.values[0] == doctest::Approx(attr.values[1]).epsilon(1e-12));
}

TEST_CASE("shap: dummy block receives exactly zero in exact mode") {
  LinearProbe model({0.8, 0.0, -0.3}, 0.1);
  const auto layout = single_slot_layout(3);
  const auto background = random_background(8, 3, 5);
  const std::vector<double> x = {2.0, 5.0, -1.0};
  const auto attr = shap_attributions(model, background, x, layout, ShapMode::exact);
  CHECK(attr.values[1] == 0.0);
}

TEST_CASE("shap: linearity of attributions in exact mode") {
  const std::vector<double> w1 = {0.5, -0.2, 0.9};
  const std::vector<double> w2 = {-1.0, 0.4, 0.3};
  std::vector<double> w_sum(3);
  for (int j = 0; j < 3; ++j) w_sum[j] = w1[j] + w2[j];
  LinearProbe f(w1, 0.0), g(w2, 0.0), fg(w_sum, 0.0);
  const auto layout = single_slot_layout(3);
  const auto background = random_background(12, 3, 9);
  const std::vector<double> x = {0.4, 1.2, -0.7};
  const auto af = shap_attributions(f, background, x, layout, ShapMode::exact);
  const auto ag = shap_attributions(g, background, x, layout, ShapMode::exact);
  const auto afg = shap_attributions(fg, background, x, layout, ShapMode::exact);
  for (int j = 0; j < 3; ++j) {
    CHECK(afg.values[j] == doctest::Approx(af.values[j] + ag.values[j]).epsilon(1e-10));
  }
}

TEST_CASE("shap: exact mode rejects more than 15 blocks, empty background rejected") {
  LinearProbe model(std::vector<double>(16, 1.0), 0.0);
  const auto layout = single_slot_layout(16);
  const auto background = random_background(4, 16, 2);
  CHECK_THROWS_AS(shap_attributions(model, background, std::vector<double>(16, 0.0), layout,
                                    ShapMode::exact),
                  Error);
  CHECK_THROWS_AS(shap_attributions(model, Matrix(0, 3), std::vector<double>(3, 0.0),
                                    single_slot_layout(3), ShapMode::exact),
                  Error);
}

TEST_CASE("collapse_tsd") {
  SUBCASE("no TSD block is the identity") {
    Attribution attr{{0.2, -0.1}, 0.5};
    const auto layout = single_slot_layout(2);
    const auto [collapsed, new_layout] = collapse_tsd(attr, layout);
    CHECK(collapsed.values == attr.values);
    CHECK(new_layout.total_dim() == 2);
  }

  SUBCASE("hand sum of the TSD slots") {
    FeatureLayout layout;
    layout.blocks = {{"age", 0, 1}, {"TSD", 1, 3}};
    Attribution attr{{0.4, 0.1, -0.04, 0.23}, 0.0};
    const auto [collapsed, new_layout] = collapse_tsd(attr, layout);
    REQUIRE(collapsed.values.size() == 2);
    CHECK(collapsed.values[0] == 0.4);
    CHECK(collapsed.values[1] == doctest::Approx(0.29).epsilon(1e-12));
    const auto* block = new_layout.find("TSD");
    REQUIRE(block != nullptr);
    CHECK(block->length == 1);
  }

  SUBCASE("total attribution is conserved") {
    FeatureLayout layout;
    layout.blocks = {{"a", 0, 2}, {"TSD", 2, 4}, {"z", 6, 1}};
    Attribution attr{{0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7}, 1.0};
    const auto [collapsed, new_layout] = collapse_tsd(attr, layout);
    double before = 0.0, after = 0.0;
    for (double v : attr.values) before += v;
    for (double v : collapsed.values) after += v;
    CHECK(before == doctest::Approx(after).epsilon(1e-14));
    CHECK(collapsed.base_value == attr.base_value);
    CHECK(new_layout.blocks.back().name == "z");
    new_layout.validate();
  }
}

TEST_CASE("importance_ranking") {
  FeatureLayout layout;
  layout.blocks = {{"a", 0, 1}, {"b", 1, 1}, {"c", 2, 1}, {"d", 3, 1}};

  SUBCASE("single sample ranks by absolute value") {
    const std::vector<Attribution> attrs = {{{0.1, -0.9, 0.5, 0.0}, 0.0}};
    const auto ranking = importance_ranking(attrs, layout);
    REQUIRE(ranking.size() == 4);
    CHECK(ranking[0].block == "b");
    CHECK(ranking[0].mean_abs_shap == doctest::Approx(0.9));
    CHECK(ranking[1].block == "c");
    CHECK(ranking[3].block == "d");
  }

  SUBCASE("opposite signs average their magnitudes") {
    const std::vector<Attribution> attrs = {{{0.5, 0.0, 0.0, 0.0}, 0.0},
                                            {{-0.5, 0.0, 0.0, 0.0}, 0.0}};
    const auto ranking = importance_ranking(attrs, layout);
    CHECK(ranking[0].block == "a");
    CHECK(ranking[0].mean_abs_shap == doctest::Approx(0.5));
  }

  SUBCASE("3 samples x 4 blocks hand fixture with ties broken by name") {
    const std::vector<Attribution> attrs = {{{0.5, 0.25, -0.5, 0.25}, 0.0},
                                            {{-0.5, 0.5, 0.5, 0.25}, 0.0},
                                            {{0.5, 0.0, 0.5, 0.25}, 0.0}};
    const auto ranking = importance_ranking(attrs, layout);
    // means: a 0.5, b 0.25, c 0.5, d 0.25 -> a, c (tie a<c), then b, d.
    CHECK(ranking[0].block == "a");
    CHECK(ranking[1].block == "c");
    CHECK(ranking[2].block == "b");
    CHECK(ranking[3].block == "d");
  }

  SUBCASE("empty attribution list throws") {
    CHECK_THROWS_AS(importance_ranking({}, layout), Error);
  }
}
