#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace screener {

// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const DenseMatrix&) const = default;
};

enum class FeatureKind { kTfidfSparse, kTopicDense, kEmbeddingDense, kClusterDistanceDense };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

// One matrix row; either a dense span or a sparse (index, value) list.
struct RowView {
  std::span<const std::uint32_t> indices;  // empty for dense rows
  std::span<const double> values;
  bool sparse = false;

  double dot(std::span<const double> dense) const;
  // y += alpha * row
  void axpy_into(double alpha, std::span<double> y) const;
  double squared_norm() const;
};

// n x p document representation consumed by the classifier and k-means.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  static FeatureMatrix from_dense(FeatureKind kind, DenseMatrix m);
  // CSR layout; indices must be strictly increasing within each row.
  static FeatureMatrix from_csr(FeatureKind kind, std::size_t rows, std::size_t cols,
                                std::vector<std::size_t> row_ptr, std::vector<std::uint32_t> indices,
                                std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  FeatureKind kind() const { return kind_; }
  bool is_sparse() const { return sparse_; }

  RowView row(std::size_t i) const;
  std::vector<double> dense_row(std::size_t i) const;
  double at(std::size_t r, std::size_t c) const;
  DenseMatrix to_dense() const;

  // Rows flagged during extraction (zero-token documents).
  const std::vector<std::size_t>& flagged_rows() const { return flagged_; }
  void set_flagged_rows(std::vector<std::size_t> rows) { flagged_ = std::move(rows); }

  // Raw storage (serialisation).
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const FeatureMatrix& other) const = default;

 private:
  FeatureKind kind_ = FeatureKind::kEmbeddingDense;
  bool sparse_ = false;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
  std::vector<std::size_t> flagged_;
};

// n x k matrix of per-document topic proportions; every row is a
// probability vector (non-negative, sums to 1 within 1e-6).
class TopicMatrix {
 public:
  TopicMatrix() = default;
  // Throws InvalidArgument if any row is not a distribution.
  explicit TopicMatrix(DenseMatrix v, std::vector<std::size_t> fallback_rows = {});

  std::size_t rows() const { return v_.rows; }
  std::size_t topics() const { return v_.cols; }
  std::span<const double> row(std::size_t i) const { return v_.row(i); }
  double operator()(std::size_t r, std::size_t c) const { return v_(r, c); }
  const DenseMatrix& matrix() const { return v_; }
  // Rows that received the uniform fallback (zero-token or all-OOV documents).
  const std::vector<std::size_t>& fallback_rows() const { return fallback_; }

  FeatureMatrix as_features() const;

 private:
  DenseMatrix v_;
  std::vector<std::size_t> fallback_;
};

}  // namespace screener
