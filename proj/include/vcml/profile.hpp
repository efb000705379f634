#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vcml/common.hpp"
#include "vcml/dates.hpp"

namespace vcml {

enum class InvestmentType { seed, series_a, series_b, other_pre_c };

const char* to_string(InvestmentType t);
InvestmentType investment_type_from_string(const std::string& s);  // throws Error

enum class EventKind { ipo, acquisition, funding };

const char* to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);  // throws Error

struct FundingRound {
  Date announced_on;
  InvestmentType investment_type = InvestmentType::other_pre_c;
  double raised_musd = 0.0;
  std::optional<double> post_money_musd;
  int investor_count = 0;
  int known_investor_count = 0;
};

struct SuccessEvent {
  EventKind kind = EventKind::funding;
  Date occurred_on;
};

// One startup's raw record. Immutable after ingestion; safe to share.
struct StartupProfile {
  std::string id;
  Date founded_on;
  std::string description;
  bool has_email = false;
  bool has_phone = false;
  bool has_facebook = false;
  bool has_twitter = false;
  bool has_linkedin = false;
  int founders_count = 0;
  int founders_country_count = 0;
  int founders_male_count = 0;
  int founders_female_count = 0;
  int degree_count_total = 0;
  int degree_count_max = 0;
  double degree_count_mean = 0.0;
  std::set<std::string> industries;
  std::set<std::string> sectors;  // GICS, reporting only
  std::vector<FundingRound> funding_rounds;  // sorted ascending by date after ingestion
  std::vector<SuccessEvent> events;
};

struct Label {
  int value = 0;  // {0,1}
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based input line; 0 when not line-scoped
  std::string message;
};

struct ParseResult {
  std::vector<StartupProfile> profiles;
  std::vector<Diagnostic> diagnostics;
};

// Reads one JSON object per line (see docs/profile.schema.json). In strict
// mode the first violation throws Error with the line number; in lenient
// mode violating lines become diagnostics and are skipped. Funding rounds
// come out sorted by announcement date.
ParseResult parse_profiles(std::istream& source, bool strict);
ParseResult parse_profiles_file(const std::string& path, bool strict);

std::string profile_to_json_line(const StartupProfile& p);

// Drops funding rounds announced after the cutoff. Events are preserved:
// they feed labels, never features. Throws if cutoff precedes founding.
StartupProfile apply_cutoff(const StartupProfile& profile, const Date& cutoff);

// 1 iff any success event lies in (cutoff, cutoff + horizon_months], using
// whole-month arithmetic for the horizon bound and full-date comparison at
// the cutoff itself.
Label derive_label(const StartupProfile& profile, const Date& cutoff, int horizon_months = 60);

struct LabeledDataset {
  std::vector<StartupProfile> profiles;  // censored at the cutoff
  std::vector<int> labels;
  std::vector<Diagnostic> diagnostics;   // disqualified records
};

// Censoring + labeling over a batch. Records with an ipo/acquisition event
// on or before the cutoff are disqualified (they are not startups to be
// predicted, they already exited); pre-cutoff funding events are kept as
// history.
LabeledDataset assemble_dataset(const std::vector<StartupProfile>& raw, const Date& cutoff,
                                int horizon_months = 60);

}  // namespace vcml
