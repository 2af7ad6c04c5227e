#include "screener/novelty.hpp"

#include <algorithm>
#include <cmath>

#include "screener/eigen_sym.hpp"
#include "screener/error.hpp"
#include "screener/kernels.hpp"

namespace screener {

NoveltyProjector fit_projector(const TopicMatrix& v, std::span<const std::size_t> labelled_rows,
                               const NoveltyOptions& options) {
  if (options.components == 0) throw InvalidArgument("novelty projector needs t >= 1");
  if (labelled_rows.empty()) throw InvalidArgument("novelty projector needs labelled documents");
  const std::size_t k = v.topics();
  for (std::size_t r : labelled_rows)
    if (r >= v.rows()) throw InvalidArgument("labelled row outside topic matrix");

  NoveltyProjector proj;
  proj.source_count = labelled_rows.size();
  if (options.center) {
    proj.mean.assign(k, 0.0);
    for (std::size_t r : labelled_rows) kernels::axpy(1.0, v.row(r), proj.mean);
    kernels::scale(1.0 / static_cast<double>(labelled_rows.size()), proj.mean);
  }

  // Gram matrix S^T S, lower triangle.
  DenseMatrix gram(k, k);
  std::vector<double> centred(k);
  for (std::size_t r : labelled_rows) {
    std::span<const double> s = v.row(r);
    if (options.center) {
      for (std::size_t i = 0; i < k; ++i) centred[i] = s[i] - proj.mean[i];
      s = centred;
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (s[i] == 0.0) continue;
      kernels::axpy(s[i], s.first(i + 1), gram.row(i).first(i + 1));
    }
  }

  const SymmetricEigen eig = symmetric_eigen(gram);
  const double top = std::max(0.0, eig.values.empty() ? 0.0 : eig.values.front());
  const double tol = top * 1e-10 * static_cast<double>(std::max<std::size_t>(k, 1));
  std::size_t rank = 0;
  while (rank < eig.values.size() && eig.values[rank] > tol && eig.values[rank] > 0.0) ++rank;

  std::size_t t = std::min({options.components, labelled_rows.size(), k});
  proj.reduced = t < options.components;
  if (t > rank) {
    t = rank;
    proj.reduced = true;
  }

  proj.basis = DenseMatrix(t, k);
  for (std::size_t j = 0; j < t; ++j) {
    auto u = proj.basis.row(j);
    for (std::size_t i = 0; i < k; ++i) u[i] = eig.vectors(i, j);
    const double norm = std::sqrt(kernels::dot(u, u));
    kernels::scale(1.0 / norm, u);
    const auto first = std::find_if(u.begin(), u.end(), [](double x) { return std::abs(x) > 1e-12; });
    if (first != u.end() && *first < 0.0) kernels::scale(-1.0, u);
    proj.eigenvalues.push_back(eig.values[j]);
  }
  return proj;
}

double novelty_score(const NoveltyProjector& proj, std::span<const double> v) {
  if (v.size() != proj.topics()) throw InvalidArgument("topic vector dimension does not match projector");
  std::vector<double> centred;
  if (!proj.mean.empty()) {
    centred.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) centred[i] = v[i] - proj.mean[i];
    v = centred;
  }
  const double norm2 = kernels::dot(v, v);
  if (norm2 <= 0.0) {
    if (!proj.mean.empty()) return 0.0;  // coincides with the labelled mean
    throw InvalidArgument("novelty of a zero vector is undefined");
  }
  // The basis is orthonormal, so ||U U^T v|| = ||U^T v||.
  double proj2 = 0.0;
  for (std::size_t j = 0; j < proj.components(); ++j) {
    const double c = kernels::dot(proj.basis.row(j), v);
    proj2 += c * c;
  }
  return std::clamp(1.0 - std::sqrt(proj2 / norm2), 0.0, 1.0);
}

std::size_t assign_topic(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("assign_topic on an empty vector");
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t topics_discovered(const TopicMatrix& v, std::span<const std::size_t> rows) {
  std::vector<char> seen(v.topics(), 0);
  std::size_t count = 0;
  for (std::size_t r : rows) {
    const std::size_t t = assign_topic(v.row(r));
    if (!seen[t]) {
      seen[t] = 1;
      ++count;
    }
  }
  return count;
}

std::size_t occupied_topics(const TopicMatrix& v) {
  std::vector<std::size_t> all(v.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return topics_discovered(v, all);
}

}  // namespace screener
