#include <doctest.h>

#include <sstream>

#include "vcml/profile.hpp"

using namespace vcml;

namespace {

std::string round_json(const std::string& date, double raised = 1.0,
                       const std::string& type = "seed") {
  return R"({"announced_on":")" + date + R"(","investment_type":")" + type +
         R"(","raised_musd":)" + std::to_string(raised) + R"(,"investor_count":2,"known_investor_count":1})";
}

StartupProfile base_profile() {
  StartupProfile p;
  p.id = "s1";
  p.founded_on = {2014, 1, 15};
  return p;
}

}  // namespace

TEST_CASE("month arithmetic ignores day of month") {
  CHECK(months_between({2014, 1, 31}, {2015, 12, 1}) == 23);
  CHECK(months_between({2015, 12, 31}, {2020, 12, 1}) == 60);
  CHECK(months_between({2015, 6, 1}, {2015, 6, 30}) == 0);
  CHECK(months_between({2016, 3, 1}, {2015, 12, 1}) == -3);
  CHECK(Date{2015, 12, 31}.plus_months(2) == Date{2016, 2, 29});
  CHECK(Date{2016, 1, 1}.plus_months(-13) == Date{2014, 12, 1});
}

TEST_CASE("date parsing") {
  CHECK(Date::parse("2015-12-31") == Date{2015, 12, 31});
  CHECK_THROWS_AS(Date::parse("2015-13-01"), Error);
  CHECK_THROWS_AS(Date::parse("2015-02-30"), Error);
  CHECK_THROWS_AS(Date::parse("2015/01/01"), Error);
  CHECK(Date{2015, 1, 2}.to_string() == "2015-01-02");
}

TEST_CASE("parse_profiles: empty stream") {
  std::istringstream in("");
  const auto result = parse_profiles(in, /*strict=*/true);
  CHECK(result.profiles.empty());
  CHECK(result.diagnostics.empty());
}

TEST_CASE("parse_profiles: invariant violation becomes a diagnostic in lenient mode") {
  std::istringstream in(
      R"({"id":"a","founded_on":"2014-01-01","degree_count_max":3,"degree_count_total":2})"
      "\n");
  const auto result = parse_profiles(in, false);
  CHECK(result.profiles.empty());
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics[0].line == 1);
  CHECK(result.diagnostics[0].message.find("degree_count_max > total") != std::string::npos);

  std::istringstream again(
      R"({"id":"a","founded_on":"2014-01-01","degree_count_max":3,"degree_count_total":2})"
      "\n");
  CHECK_THROWS_AS(parse_profiles(again, true), Error);
}

TEST_CASE("parse_profiles: malformed JSON reports the line, strict aborts") {
  std::istringstream in("{\"id\":\"ok\",\"founded_on\":\"2014-01-01\"}\n{not json\n");
  const auto result = parse_profiles(in, false);
  CHECK(result.profiles.size() == 1);
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics[0].line == 2);
}

TEST_CASE("parse_profiles: unknown investment type and negative money") {
  std::istringstream bad_type(R"({"id":"a","founded_on":"2014-01-01","funding_rounds":[)" +
                              round_json("2014-05-01", 1.0, "series_z") + "]}\n");
  auto r1 = parse_profiles(bad_type, false);
  REQUIRE(r1.diagnostics.size() == 1);
  CHECK(r1.diagnostics[0].message.find("investment_type") != std::string::npos);

  std::istringstream negative(
      R"({"id":"a","founded_on":"2014-01-01","funding_rounds":[{"announced_on":"2014-05-01","investment_type":"seed","raised_musd":-2}]})"
      "\n");
  auto r2 = parse_profiles(negative, false);
  REQUIRE(r2.diagnostics.size() == 1);
  CHECK(r2.diagnostics[0].message.find("negative") != std::string::npos);
}

TEST_CASE("parse_profiles: shuffled funding rounds come out date-sorted") {
  std::string line = R"({"id":"a","founded_on":"2013-01-01","funding_rounds":[)" +
                     round_json("2015-03-01") + "," + round_json("2013-07-01") + "," +
                     round_json("2014-02-01") + "]}";
  std::istringstream in(line + "\n" + line + "\n" + line + "\n");
  const auto result = parse_profiles(in, true);
  REQUIRE(result.profiles.size() == 3);
  for (const auto& p : result.profiles) {
    REQUIRE(p.funding_rounds.size() == 3);
    CHECK(p.funding_rounds[0].announced_on == Date{2013, 7, 1});
    CHECK(p.funding_rounds[1].announced_on == Date{2014, 2, 1});
    CHECK(p.funding_rounds[2].announced_on == Date{2015, 3, 1});
  }
}

TEST_CASE("apply_cutoff drops post-cutoff rounds and keeps events") {
  auto p = base_profile();
  p.funding_rounds = {{{2015, 6, 1}, InvestmentType::seed, 1.0, {}, 1, 1},
                      {{2016, 3, 1}, InvestmentType::series_a, 2.0, {}, 2, 2}};
  p.events = {{EventKind::funding, {2016, 3, 1}}};
  const auto censored = apply_cutoff(p, {2015, 12, 31});
  REQUIRE(censored.funding_rounds.size() == 1);
  CHECK(censored.funding_rounds[0].announced_on == Date{2015, 6, 1});
  CHECK(censored.events.size() == 1);

  SUBCASE("no rounds: unchanged") {
    auto empty = base_profile();
    const auto out = apply_cutoff(empty, {2015, 12, 31});
    CHECK(out.funding_rounds.empty());
    CHECK(out.id == empty.id);
  }

  SUBCASE("five rounds straddling the cutoff: three remain") {
    auto five = base_profile();
    for (const auto& d : {Date{2014, 2, 1}, Date{2015, 1, 1}, Date{2015, 12, 31}, Date{2016, 1, 1},
                          Date{2017, 5, 1}}) {
      five.funding_rounds.push_back({d, InvestmentType::seed, 1.0, {}, 1, 0});
    }
    CHECK(apply_cutoff(five, {2015, 12, 31}).funding_rounds.size() == 3);
  }

  SUBCASE("cutoff before founding is an error") {
    CHECK_THROWS_AS(apply_cutoff(p, {2013, 12, 31}), Error);
  }

  SUBCASE("idempotent") {
    const auto once = apply_cutoff(p, {2015, 12, 31});
    const auto twice = apply_cutoff(once, {2015, 12, 31});
    CHECK(twice.funding_rounds.size() == once.funding_rounds.size());
  }
}

TEST_CASE("derive_label: horizon boundaries in whole months") {
  const Date cutoff{2015, 12, 31};
  auto p = base_profile();

  p.events = {{EventKind::funding, {2016, 6, 15}}};
  CHECK(derive_label(p, cutoff).value == 1);

  p.events = {{EventKind::funding, {2015, 6, 1}}};  // pre-cutoff funding is history, not outcome
  CHECK(derive_label(p, cutoff).value == 0);

  p.events = {{EventKind::acquisition, {2020, 12, 1}}};  // exactly +60 months
  CHECK(derive_label(p, cutoff).value == 1);

  p.events = {{EventKind::acquisition, {2021, 1, 1}}};  // +61 months
  CHECK(derive_label(p, cutoff).value == 0);

  p.events.clear();
  CHECK(derive_label(p, cutoff).value == 0);
}

TEST_CASE("derive_label is unaffected by funding-round censoring") {
  auto p = base_profile();
  p.funding_rounds = {{{2016, 3, 1}, InvestmentType::seed, 5.0, {}, 3, 1}};
  p.events = {{EventKind::ipo, {2017, 1, 1}}};
  const Date cutoff{2015, 12, 31};
  CHECK(derive_label(p, cutoff).value == derive_label(apply_cutoff(p, cutoff), cutoff).value);
}

TEST_CASE("assemble_dataset disqualifies pre-cutoff exits, keeps funding history") {
  const Date cutoff{2015, 12, 31};
  auto exited = base_profile();
  exited.id = "exited";
  exited.events = {{EventKind::acquisition, {2015, 5, 1}}};
  auto funded = base_profile();
  funded.id = "funded";
  funded.events = {{EventKind::funding, {2015, 5, 1}}, {EventKind::funding, {2016, 4, 1}}};
  auto quiet = base_profile();
  quiet.id = "quiet";

  const auto ds = assemble_dataset({exited, funded, quiet}, cutoff);
  REQUIRE(ds.profiles.size() == 2);
  CHECK(ds.profiles[0].id == "funded");
  CHECK(ds.labels[0] == 1);
  CHECK(ds.labels[1] == 0);
  REQUIRE(ds.diagnostics.size() == 1);
  CHECK(ds.diagnostics[0].message.find("exited") != std::string::npos);
}

TEST_CASE("profile JSONL round trip") {
  auto p = base_profile();
  p.description = "Builds things.";
  p.has_linkedin = true;
  p.industries = {"software", "analytics"};
  p.sectors = {"Information Technology"};
  p.funding_rounds = {{{2015, 6, 1}, InvestmentType::series_a, 2.5, 11.0, 4, 3}};
  p.events = {{EventKind::funding, {2016, 2, 1}}};

  std::istringstream in(profile_to_json_line(p) + "\n");
  const auto parsed = parse_profiles(in, true);
  REQUIRE(parsed.profiles.size() == 1);
  const auto& q = parsed.profiles[0];
  CHECK(q.id == p.id);
  CHECK(q.founded_on == p.founded_on);
  CHECK(q.has_linkedin);
  CHECK(q.industries == p.industries);
  REQUIRE(q.funding_rounds.size() == 1);
  CHECK(q.funding_rounds[0].post_money_musd == 11.0);
  CHECK(q.events[0].kind == EventKind::funding);
}
