#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vcml {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a, used for config hashes, layout fingerprints and model checksums.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_bytes(const void* data, std::size_t n,
                                   std::uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a64(std::string_view(static_cast<const char*>(data), n), seed);
}

// splitmix64 finalizer; combines seeds for derived RNG streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ull)); }
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) { return mix_seed(mix_seed(a, b), c); }

// Dense row-major matrix of doubles. Rows are observations, columns features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  const std::vector<double>& values() const { return values_; }

  void set_row(std::size_t r, std::span<const double> v) {
    if (v.size() != cols_) throw Error("Matrix::set_row: width mismatch");
    std::copy(v.begin(), v.end(), values_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Runs fn(i) for i in [0, n). With workers <= 1 runs inline; otherwise
// splits the index range over a fixed pool. Callers own any output slots,
// so results never depend on scheduling.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

unsigned default_worker_count();

}  // namespace vcml
