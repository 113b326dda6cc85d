#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hpdet {

/// n x d sample set in row-major storage, optionally carrying unnormalised
/// density evaluations q(x) >= 0 per row.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(std::size_t n, std::size_t d)
      : n_(n), d_(d), values_(n * d, 0.0) {}

  std::size_t rows() const { return n_; }
  std::size_t dims() const { return d_; }

  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * d_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return values_[i * d_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * d_, d_};
  }

  const std::vector<double>& values() const { return values_; }

  bool has_q() const { return !q_.empty(); }
  const std::vector<double>& q_values() const { return q_; }
  double q_at(std::size_t i) const { return q_[i]; }
  void set_q(std::vector<double> q);

  /// Enforces the type invariants: n >= 1, d >= 1, all values finite, and
  /// when present q has length n with all entries >= 0.
  void validate() const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> values_;
  std::vector<double> q_;
};

struct LoadOptions {
  /// When set, the final CSV column is interpreted as q(x) rather than a
  /// sample coordinate.
  bool q_in_last_column = false;
};

/// Loads a comma-separated sample file (UTF-8, '.' decimal). A non-numeric
/// first row is treated as a header and skipped. Parse failures report the
/// 1-based row and column.
SampleMatrix load_samples(const std::string& path, const LoadOptions& opt = {});

/// Writes samples as CSV; appends the q column when present.
void save_csv(const SampleMatrix& samples, const std::string& path);

/// Deterministic disjoint split by a seeded uniform shuffle; q values are
/// carried along. Requires n_train < n, and n_train >= 1 unless
/// allow_empty_train is set.
std::pair<SampleMatrix, SampleMatrix> split_train_test(
    const SampleMatrix& samples, std::size_t n_train, std::uint64_t seed,
    bool allow_empty_train = false);

}  // namespace hpdet
