#include "vcml/profile.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "vcml/common.hpp"

namespace vcml {

using nlohmann::json;

const char* to_string(InvestmentType t) {
  switch (t) {
    case InvestmentType::seed: return "seed";
    case InvestmentType::series_a: return "series_a";
    case InvestmentType::series_b: return "series_b";
    case InvestmentType::other_pre_c: return "other_pre_c";
  }
  return "other_pre_c";
}

InvestmentType investment_type_from_string(const std::string& s) {
  if (s == "seed") return InvestmentType::seed;
  if (s == "series_a") return InvestmentType::series_a;
  if (s == "series_b") return InvestmentType::series_b;
  if (s == "other_pre_c") return InvestmentType::other_pre_c;
  throw Error("unknown investment_type '" + s + "'");
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::ipo: return "ipo";
    case EventKind::acquisition: return "acquisition";
    case EventKind::funding: return "funding";
  }
  return "funding";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "ipo") return EventKind::ipo;
  if (s == "acquisition") return EventKind::acquisition;
  if (s == "funding") return EventKind::funding;
  throw Error("unknown event kind '" + s + "'");
}

namespace {

Date parse_date_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw Error(std::string("missing or non-string date field '") + key + "'");
  return Date::parse(j[key].get<std::string>());
}

int read_count(const json& j, const char* key, int fallback = 0) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() && !j[key].is_number_unsigned()) throw Error(std::string("field '") + key + "' must be an integer");
  const auto v = j[key].get<long long>();
  if (v < 0) throw Error(std::string("field '") + key + "' must be non-negative");
  return static_cast<int>(v);
}

double read_amount(const json& j, const char* key) {
  if (!j[key].is_number()) throw Error(std::string("field '") + key + "' must be a number");
  const double v = j[key].get<double>();
  if (v < 0.0) throw Error(std::string("negative monetary value in '") + key + "'");
  return v;
}

FundingRound parse_round(const json& j) {
  FundingRound r;
  r.announced_on = parse_date_field(j, "announced_on");
  if (!j.contains("investment_type") || !j["investment_type"].is_string())
    throw Error("funding round missing 'investment_type'");
  r.investment_type = investment_type_from_string(j["investment_type"].get<std::string>());
  if (!j.contains("raised_musd")) throw Error("funding round missing 'raised_musd'");
  r.raised_musd = read_amount(j, "raised_musd");
  if (j.contains("post_money_musd") && !j["post_money_musd"].is_null())
    r.post_money_musd = read_amount(j, "post_money_musd");
  r.investor_count = read_count(j, "investor_count");
  r.known_investor_count = read_count(j, "known_investor_count");
  if (r.known_investor_count > r.investor_count)
    throw Error("known_investor_count > investor_count in funding round");
  return r;
}

StartupProfile parse_profile_object(const json& j) {
  StartupProfile p;
  if (!j.contains("id") || !j["id"].is_string()) throw Error("missing or non-string 'id'");
  p.id = j["id"].get<std::string>();
  p.founded_on = parse_date_field(j, "founded_on");
  if (j.contains("description")) {
    if (!j["description"].is_string()) throw Error("'description' must be a string");
    p.description = j["description"].get<std::string>();
  }
  auto flag = [&](const char* key, bool& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_boolean()) throw Error(std::string("field '") + key + "' must be a boolean");
    out = j[key].get<bool>();
  };
  flag("has_email", p.has_email);
  flag("has_phone", p.has_phone);
  flag("has_facebook", p.has_facebook);
  flag("has_twitter", p.has_twitter);
  flag("has_linkedin", p.has_linkedin);
  p.founders_count = read_count(j, "founders_count");
  p.founders_country_count = read_count(j, "founders_country_count");
  p.founders_male_count = read_count(j, "founders_male_count");
  p.founders_female_count = read_count(j, "founders_female_count");
  p.degree_count_total = read_count(j, "degree_count_total");
  p.degree_count_max = read_count(j, "degree_count_max");
  if (j.contains("degree_count_mean")) {
    if (!j["degree_count_mean"].is_number()) throw Error("'degree_count_mean' must be a number");
    p.degree_count_mean = j["degree_count_mean"].get<double>();
    if (p.degree_count_mean < 0.0) throw Error("'degree_count_mean' must be non-negative");
  }
  if (p.degree_count_max > p.degree_count_total) throw Error("degree_count_max > total");
  for (const char* key : {"industries", "sectors"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_array()) throw Error(std::string("field '") + key + "' must be an array of strings");
    auto& target = std::string(key) == "industries" ? p.industries : p.sectors;
    for (const auto& item : j[key]) {
      if (!item.is_string()) throw Error(std::string("field '") + key + "' must contain only strings");
      target.insert(item.get<std::string>());
    }
  }
  if (j.contains("funding_rounds")) {
    if (!j["funding_rounds"].is_array()) throw Error("'funding_rounds' must be an array");
    for (const auto& rj : j["funding_rounds"]) p.funding_rounds.push_back(parse_round(rj));
  }
  std::stable_sort(p.funding_rounds.begin(), p.funding_rounds.end(),
                   [](const FundingRound& a, const FundingRound& b) { return a.announced_on < b.announced_on; });
  if (j.contains("events")) {
    if (!j["events"].is_array()) throw Error("'events' must be an array");
    for (const auto& ej : j["events"]) {
      SuccessEvent e;
      if (!ej.contains("kind") || !ej["kind"].is_string()) throw Error("event missing 'kind'");
      e.kind = event_kind_from_string(ej["kind"].get<std::string>());
      e.occurred_on = parse_date_field(ej, "occurred_on");
      p.events.push_back(e);
    }
  }
  return p;
}

}  // namespace

ParseResult parse_profiles(std::istream& source, bool strict) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw Error("line is not a JSON object");
      result.profiles.push_back(parse_profile_object(j));
    } catch (const json::parse_error& e) {
      const std::string msg = "malformed JSON: " + std::string(e.what());
      if (strict) throw Error("line " + std::to_string(line_no) + ": " + msg);
      result.diagnostics.push_back({line_no, msg});
    } catch (const Error& e) {
      if (strict) throw Error("line " + std::to_string(line_no) + ": " + e.what());
      result.diagnostics.push_back({line_no, e.what()});
    }
  }
  return result;
}

ParseResult parse_profiles_file(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open profiles file '" + path + "'");
  return parse_profiles(in, strict);
}

std::string profile_to_json_line(const StartupProfile& p) {
  json j;
  j["id"] = p.id;
  j["founded_on"] = p.founded_on.to_string();
  j["description"] = p.description;
  j["has_email"] = p.has_email;
  j["has_phone"] = p.has_phone;
  j["has_facebook"] = p.has_facebook;
  j["has_twitter"] = p.has_twitter;
  j["has_linkedin"] = p.has_linkedin;
  j["founders_count"] = p.founders_count;
  j["founders_country_count"] = p.founders_country_count;
  j["founders_male_count"] = p.founders_male_count;
  j["founders_female_count"] = p.founders_female_count;
  j["degree_count_total"] = p.degree_count_total;
  j["degree_count_max"] = p.degree_count_max;
  j["degree_count_mean"] = p.degree_count_mean;
  j["industries"] = p.industries;
  j["sectors"] = p.sectors;
  json rounds = json::array();
  for (const auto& r : p.funding_rounds) {
    json rj;
    rj["announced_on"] = r.announced_on.to_string();
    rj["investment_type"] = to_string(r.investment_type);
    rj["raised_musd"] = r.raised_musd;
    if (r.post_money_musd) rj["post_money_musd"] = *r.post_money_musd;
    rj["investor_count"] = r.investor_count;
    rj["known_investor_count"] = r.known_investor_count;
    rounds.push_back(rj);
  }
  j["funding_rounds"] = rounds;
  json events = json::array();
  for (const auto& e : p.events) {
    events.push_back({{"kind", to_string(e.kind)}, {"occurred_on", e.occurred_on.to_string()}});
  }
  j["events"] = events;
  return j.dump();
}

StartupProfile apply_cutoff(const StartupProfile& profile, const Date& cutoff) {
  if (cutoff < profile.founded_on)
    throw Error("cutoff " + cutoff.to_string() + " precedes founding date of '" + profile.id + "'");
  StartupProfile out = profile;
  out.funding_rounds.clear();
  for (const auto& r : profile.funding_rounds) {
    if (r.announced_on <= cutoff) out.funding_rounds.push_back(r);
  }
  return out;
}

Label derive_label(const StartupProfile& profile, const Date& cutoff, int horizon_months) {
  for (const auto& e : profile.events) {
    if (e.occurred_on > cutoff && months_between(cutoff, e.occurred_on) <= horizon_months) return Label{1};
  }
  return Label{0};
}

LabeledDataset assemble_dataset(const std::vector<StartupProfile>& raw, const Date& cutoff,
                                int horizon_months) {
  LabeledDataset out;
  for (const auto& p : raw) {
    const bool exited = std::any_of(p.events.begin(), p.events.end(), [&](const SuccessEvent& e) {
      return e.occurred_on <= cutoff && (e.kind == EventKind::ipo || e.kind == EventKind::acquisition);
    });
    if (exited) {
      out.diagnostics.push_back({0, "profile '" + p.id + "' disqualified: pre-cutoff ipo/acquisition"});
      continue;
    }
    out.profiles.push_back(apply_cutoff(p, cutoff));
    out.labels.push_back(derive_label(p, cutoff, horizon_months).value);
  }
  return out;
}

}  // namespace vcml
