#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "screener/feature_matrix.hpp"

namespace screener {

// L2-regularised binary logistic regression giving p(relevant | d).
struct Classifier {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 1.0;
  bool converged = false;
  std::size_t iterations_used = 0;

  std::size_t dim() const { return weights.size(); }
  bool operator==(const Classifier&) const = default;
};

struct TrainOptions {
  double lambda = 1.0;
  double tol = 1e-6;
  std::size_t max_iter = 1000;
};

// Mean logistic loss + (lambda / 2) * ||w||^2 (bias unregularised) and its
// gradient, over the listed rows. grad has dim + 1 entries; the last is d/dbias.
double logistic_objective(const FeatureMatrix& features, std::span<const std::size_t> rows,
                          std::span<const int> labels, double lambda, std::span<const double> weights,
                          double bias, std::span<double> grad);

// Deterministic L-BFGS from zero initialisation; stops when the gradient norm
// is <= tol or after max_iter iterations. Accepted steps never increase the
// objective; pass loss_history to record the objective after each one.
// Throws DegenerateInput when only one class is present.
Classifier train(const FeatureMatrix& features, std::span<const std::size_t> rows,
                 std::span<const int> labels, const TrainOptions& options = {},
                 std::vector<double>* loss_history = nullptr);
// Trains on every row of features.
Classifier train(const FeatureMatrix& features, std::span<const int> labels,
                 const TrainOptions& options = {}, std::vector<double>* loss_history = nullptr);

// sigmoid(w.x + b), clamped to [1e-12, 1 - 1e-12].
double predict_proba(const Classifier& clf, const RowView& row);
std::vector<double> predict_proba(const Classifier& clf, const FeatureMatrix& features,
                                  std::span<const std::size_t> rows);
std::vector<double> predict_proba(const Classifier& clf, const FeatureMatrix& features);

void save_classifier(const std::filesystem::path& path, const Classifier& clf);
Classifier load_classifier(const std::filesystem::path& path);

}  // namespace screener
