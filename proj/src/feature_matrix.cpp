#include "screener/feature_matrix.hpp"

#include <cmath>

#include "screener/error.hpp"
#include "screener/kernels.hpp"

namespace screener {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kTfidfSparse: return "tfidf_sparse";
    case FeatureKind::kTopicDense: return "topic_dense";
    case FeatureKind::kEmbeddingDense: return "embedding_dense";
    case FeatureKind::kClusterDistanceDense: return "cluster_distance_dense";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "tfidf_sparse") return FeatureKind::kTfidfSparse;
  if (s == "topic_dense") return FeatureKind::kTopicDense;
  if (s == "embedding_dense") return FeatureKind::kEmbeddingDense;
  if (s == "cluster_distance_dense") return FeatureKind::kClusterDistanceDense;
  throw InvalidArgument("unknown feature kind \"" + s + "\"");
}

double RowView::dot(std::span<const double> dense) const {
  if (sparse) return kernels::sparse_dot(indices, values, dense);
  return kernels::dot(values, dense);
}

void RowView::axpy_into(double alpha, std::span<double> y) const {
  if (sparse) {
    for (std::size_t i = 0; i < indices.size(); ++i) y[indices[i]] += alpha * values[i];
  } else {
    kernels::axpy(alpha, values, y);
  }
}

double RowView::squared_norm() const { return kernels::dot(values, values); }

FeatureMatrix FeatureMatrix::from_dense(FeatureKind kind, DenseMatrix m) {
  if (m.data.size() != m.rows * m.cols) throw InvalidArgument("dense matrix storage size mismatch");
  FeatureMatrix f;
  f.kind_ = kind;
  f.sparse_ = false;
  f.rows_ = m.rows;
  f.cols_ = m.cols;
  f.values_ = std::move(m.data);
  return f;
}

FeatureMatrix FeatureMatrix::from_csr(FeatureKind kind, std::size_t rows, std::size_t cols,
                                      std::vector<std::size_t> row_ptr,
                                      std::vector<std::uint32_t> indices, std::vector<double> values) {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != indices.size() ||
      indices.size() != values.size()) {
    throw InvalidArgument("malformed CSR structure");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) throw InvalidArgument("CSR row pointers not monotone");
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      if (indices[k] >= cols || (k > row_ptr[r] && indices[k] <= indices[k - 1])) {
        throw InvalidArgument("CSR column indices out of range or unsorted");
      }
    }
  }
  FeatureMatrix f;
  f.kind_ = kind;
  f.sparse_ = true;
  f.rows_ = rows;
  f.cols_ = cols;
  f.row_ptr_ = std::move(row_ptr);
  f.indices_ = std::move(indices);
  f.values_ = std::move(values);
  return f;
}

RowView FeatureMatrix::row(std::size_t i) const {
  if (sparse_) {
    const std::size_t b = row_ptr_[i], e = row_ptr_[i + 1];
    return {std::span<const std::uint32_t>(indices_.data() + b, e - b),
            std::span<const double>(values_.data() + b, e - b), true};
  }
  return {{}, std::span<const double>(values_.data() + i * cols_, cols_), false};
}

std::vector<double> FeatureMatrix::dense_row(std::size_t i) const {
  std::vector<double> out(cols_, 0.0);
  row(i).axpy_into(1.0, out);
  return out;
}

double FeatureMatrix::at(std::size_t r, std::size_t c) const {
  if (!sparse_) return values_[r * cols_ + c];
  const RowView v = row(r);
  for (std::size_t k = 0; k < v.indices.size(); ++k)
    if (v.indices[k] == c) return v.values[k];
  return 0.0;
}

DenseMatrix FeatureMatrix::to_dense() const {
  DenseMatrix m(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) row(r).axpy_into(1.0, m.row(r));
  return m;
}

TopicMatrix::TopicMatrix(DenseMatrix v, std::vector<std::size_t> fallback_rows)
    : v_(std::move(v)), fallback_(std::move(fallback_rows)) {
  for (std::size_t r = 0; r < v_.rows; ++r) {
    double s = 0.0;
    for (double x : v_.row(r)) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("topic row has a negative or non-finite entry");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-6) {
      throw InvalidArgument("topic row " + std::to_string(r) + " does not sum to 1");
    }
  }
}

FeatureMatrix TopicMatrix::as_features() const {
  FeatureMatrix f = FeatureMatrix::from_dense(FeatureKind::kTopicDense, v_);
  f.set_flagged_rows(fallback_);
  return f;
}

}  // namespace screener
