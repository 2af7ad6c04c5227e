#include "screener/cluster_topics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "screener/error.hpp"
#include "screener/kernels.hpp"
#include "screener/rng.hpp"

namespace screener {

namespace {

// Densified (and for cosine, unit-normalised) copies of the input rows.
DenseMatrix prepare_rows(const FeatureMatrix& m, ClusterDistance distance) {
  DenseMatrix x = m.to_dense();
  if (distance == ClusterDistance::kCosine) {
    for (std::size_t r = 0; r < x.rows; ++r) {
      auto row = x.row(r);
      const double n2 = kernels::dot(row, row);
      if (n2 > 0.0) kernels::scale(1.0 / std::sqrt(n2), row);
    }
  }
  return x;
}

double distance_between(std::span<const double> a, std::span<const double> b, ClusterDistance d) {
  if (d == ClusterDistance::kEuclidean) return std::sqrt(kernels::squared_distance(a, b));
  const double na = std::sqrt(kernels::dot(a, a)), nb = std::sqrt(kernels::dot(b, b));
  if (na == 0.0 || nb == 0.0) return 1.0;
  return std::max(0.0, 1.0 - kernels::dot(a, b) / (na * nb));
}

FeatureMatrix normalised_distances(const DenseMatrix& x, const DenseMatrix& centroids, ClusterDistance d) {
  DenseMatrix out(x.rows, centroids.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    double total = 0.0;
    for (std::size_t j = 0; j < centroids.rows; ++j) {
      out(r, j) = distance_between(x.row(r), centroids.row(j), d);
      total += out(r, j);
    }
    if (total > 0.0) {
      for (std::size_t j = 0; j < centroids.rows; ++j) out(r, j) /= total;
    } else {
      for (std::size_t j = 0; j < centroids.rows; ++j) out(r, j) = 1.0 / static_cast<double>(centroids.rows);
    }
  }
  return FeatureMatrix::from_dense(FeatureKind::kClusterDistanceDense, std::move(out));
}

}  // namespace

std::pair<ClusterModel, FeatureMatrix> cluster_topics(const FeatureMatrix& matrix, const ClusterOptions& o) {
  const std::size_t n = matrix.rows(), c = o.clusters;
  if (c < 2) throw InvalidArgument("cluster count must be >= 2");
  if (c > n) throw InvalidArgument("cluster count exceeds number of documents");
  const DenseMatrix x = prepare_rows(matrix, o.distance);
  bool all_same = true;
  for (std::size_t r = 1; r < n && all_same; ++r) {
    all_same = std::equal(x.row(r).begin(), x.row(r).end(), x.row(0).begin());
  }
  if (all_same) throw DegenerateInput("all rows are identical; nothing to cluster");

  const std::size_t p = x.cols;
  Rng rng(o.seed);
  DenseMatrix centroids(c, p);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);

  // k-means++ seeding.
  std::size_t pick = rng.index(n);
  for (std::size_t j = 0; j < c; ++j) {
    if (j > 0) {
      double total = 0.0;
      for (std::size_t r = 0; r < n; ++r) total += chosen[r] ? 0.0 : d2[r];
      if (total > 0.0) {
        double u = rng.uniform() * total;
        pick = n;
        for (std::size_t r = 0; r < n; ++r) {
          if (chosen[r]) continue;
          u -= d2[r];
          if (u < 0.0) {
            pick = r;
            break;
          }
        }
        if (pick == n) {  // rounding at the tail
          for (std::size_t r = n; r-- > 0;)
            if (!chosen[r] && d2[r] > 0.0) {
              pick = r;
              break;
            }
        }
      } else {
        // Remaining points coincide with chosen centroids.
        std::vector<std::size_t> rest;
        for (std::size_t r = 0; r < n; ++r)
          if (!chosen[r]) rest.push_back(r);
        pick = rest[rng.index(rest.size())];
      }
    }
    chosen[pick] = 1;
    std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(j).begin());
    for (std::size_t r = 0; r < n; ++r) d2[r] = std::min(d2[r], kernels::squared_distance(x.row(r), centroids.row(j)));
  }

  std::vector<std::size_t> assign(n, c);
  std::vector<std::size_t> members(c);
  ClusterModel model;
  model.distance = o.distance;
  std::size_t it = 0;
  for (; it < o.max_iterations; ++it) {
    bool changed = false;
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c; ++j) {
        const double dj = kernels::squared_distance(x.row(r), centroids.row(j));
        if (dj < best_d) {
          best_d = dj;
          best = j;
        }
      }
      d2[r] = best_d;
      if (assign[r] != best) {
        assign[r] = best;
        changed = true;
      }
    }
    if (!changed) break;

    std::fill(centroids.data.begin(), centroids.data.end(), 0.0);
    std::fill(members.begin(), members.end(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      kernels::axpy(1.0, x.row(r), centroids.row(assign[r]));
      ++members[assign[r]];
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (members[j] > 0) {
        kernels::scale(1.0 / static_cast<double>(members[j]), centroids.row(j));
        continue;
      }
      // Empty cluster: move it to the point farthest from its centroid.
      const auto far = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
      std::copy(x.row(far).begin(), x.row(far).end(), centroids.row(j).begin());
      d2[far] = 0.0;
    }
  }
  model.iterations_used = it;
  model.centroids = std::move(centroids);
  FeatureMatrix out = normalised_distances(x, model.centroids, o.distance);
  return {std::move(model), std::move(out)};
}

FeatureMatrix cluster_distances(const ClusterModel& model, const FeatureMatrix& matrix) {
  if (matrix.cols() != model.centroids.cols) throw InvalidArgument("feature dimension does not match centroids");
  return normalised_distances(prepare_rows(matrix, model.distance), model.centroids, model.distance);
}

}  // namespace screener
