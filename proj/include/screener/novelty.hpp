#pragma once

#include <span>
#include <vector>

#include "screener/feature_matrix.hpp"

namespace screener {

struct NoveltyOptions {
  std::size_t components = 3;
  // Subtract the labelled rows' mean before the decomposition (covariance
  // PCA). Off by default: the projector uses the uncentred Gram matrix S^T S.
  bool center = false;
};

// Top principal directions of the labelled documents' topic vectors.
struct NoveltyProjector {
  DenseMatrix basis;          // t x k; row j is the unit eigenvector u_j
  std::vector<double> mean;   // empty unless centred
  std::vector<double> eigenvalues;  // of the retained components, descending
  std::size_t source_count = 0;
  // Requested components exceeded |labelled| or rank(S^T S) and were reduced.
  bool reduced = false;

  std::size_t components() const { return basis.rows; }
  std::size_t topics() const { return basis.cols; }
};

// Builds S from the rows of V listed in labelled_rows and keeps the
// eigenvectors of S^T S for the largest eigenvalues. The component count is
// lowered to min(t, |labelled|, rank) when needed (and `reduced` set). Sign
// convention: the first non-negligible entry of every eigenvector is positive.
// Throws InvalidArgument when t == 0 or labelled_rows is empty.
NoveltyProjector fit_projector(const TopicMatrix& v, std::span<const std::size_t> labelled_rows,
                               const NoveltyOptions& options = {});

// p(n|d) = 1 - ||U U^T v|| / ||v||, clamped to [0, 1].
double novelty_score(const NoveltyProjector& projector, std::span<const double> v);

// argmax with ties to the lowest index.
std::size_t assign_topic(std::span<const double> v);

// Number of distinct argmax topics among the listed rows.
std::size_t topics_discovered(const TopicMatrix& v, std::span<const std::size_t> rows);
// Distinct argmax topics over the whole matrix.
std::size_t occupied_topics(const TopicMatrix& v);

}  // namespace screener
