#pragma once

#include <cstdint>
#include <utility>

#include "screener/feature_matrix.hpp"

namespace screener {

enum class ClusterDistance { kEuclidean, kCosine };

struct ClusterModel {
  DenseMatrix centroids;  // c x p
  ClusterDistance distance = ClusterDistance::kEuclidean;
  std::size_t iterations_used = 0;

  std::size_t clusters() const { return centroids.rows; }
};

struct ClusterOptions {
  std::size_t clusters = 300;
  ClusterDistance distance = ClusterDistance::kEuclidean;
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0;
};

// k-means (k-means++ seeding, Lloyd iterations) over the rows of `matrix`.
// Each output row holds the document's distance to every centroid divided by
// the row's total distance, so rows sum to 1. Cosine mode clusters the
// L2-normalised rows and reports 1 - cos as the distance.
// Throws InvalidArgument (c < 2 or c > n) and DegenerateInput (all rows identical).
std::pair<ClusterModel, FeatureMatrix> cluster_topics(const FeatureMatrix& matrix,
                                                      const ClusterOptions& options);

// Normalised distance rows for arbitrary inputs against a fitted model.
FeatureMatrix cluster_distances(const ClusterModel& model, const FeatureMatrix& matrix);

}  // namespace screener
