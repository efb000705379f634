#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vcml/common.hpp"
#include "vcml/profile.hpp"
#include "vcml/text.hpp"

namespace vcml {

// Named contiguous block of feature slots. Blocks partition a vector; the
// "TSD" block covers the whole text representation and enables block-level
// attribution downstream.
struct FeatureBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct FeatureLayout {
  std::vector<FeatureBlock> blocks;

  std::size_t total_dim() const;
  const FeatureBlock* find(const std::string& name) const;
  std::vector<std::string> slot_names() const;  // one name per slot
  std::uint64_t fingerprint() const;
  void validate() const;  // contiguous, non-overlapping, ordered
};

struct FusedVector {
  std::vector<double> values;
  FeatureLayout layout;
};

// Encodes Table-2 style fundamentals. Numeric slot order is fixed; the five
// last-round slots carry paired missing indicators (no rounds, or an absent
// optional amount). Industries become a multi-hot block over the training
// vocabulary; the last round's investment type a 4-level one-hot.
class FundamentalEncoder {
 public:
  static const std::vector<std::string>& numeric_slot_names();   // 17 slots
  static const std::vector<std::string>& indicator_slot_names(); // 5 slots
  static const std::vector<std::string>& boolean_slot_names();   // 5 slots

  static FundamentalEncoder fit(const std::vector<StartupProfile>& train, const Date& cutoff);

  std::vector<double> encode(const StartupProfile& profile, const Date& cutoff) const;
  FeatureLayout layout() const;
  std::size_t dim() const;

  const std::vector<std::string>& industry_vocabulary() const { return industry_vocabulary_; }
  const std::vector<double>& imputation_means() const { return imputation_means_; }

 private:
  std::vector<std::string> industry_vocabulary_;
  std::vector<double> imputation_means_;  // aligned to numeric_slot_names()
};

// Per-slot numeric value with explicit missingness, prior to imputation.
struct NumericSlots {
  std::vector<std::optional<double>> values;  // aligned to numeric_slot_names()
};

NumericSlots extract_numeric_slots(const StartupProfile& profile, const Date& cutoff);

// Training-only centering/scaling. Slots whose training values all lie in
// {0,1} and slots with zero variance pass through unchanged; additional
// blocks can be forced through (tf-idf is already normalized).
class Standardizer {
 public:
  static Standardizer fit(const Matrix& train, const std::vector<bool>& force_skip = {});

  void apply_in_place(Matrix& m) const;
  Matrix apply(const Matrix& m) const;

  const std::vector<double>& means() const { return mean_; }
  const std::vector<double>& stds() const { return std_; }
  const std::vector<bool>& skip_mask() const { return skip_; }

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
  std::vector<bool> skip_;
};

// Concatenation [x_FV, x_TSD]. Either side may be empty (ablations); both
// empty is an error. The text side contributes a single "TSD" block.
FusedVector fuse(const std::vector<double>& x_fv, const FeatureLayout& fv_layout,
                 const TextRepresentation& x_tsd);

void write_feature_matrix_csv(const std::string& path, const Matrix& m, const FeatureLayout& layout);
void write_layout_json(const std::string& path, const FeatureLayout& layout);

}  // namespace vcml
