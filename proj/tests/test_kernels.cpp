#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "screener/cluster_topics.hpp"
#include "screener/kernels.hpp"
#include "screener/logistic.hpp"
#include "screener/novelty.hpp"

using namespace screener;
namespace k = screener::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

double abs_sum_product(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
  return s;
}

bool have_avx2() { return k::cpu_supports(k::Isa::kAvx2); }

// Restores the process-wide table after a test pins one.
struct PinIsa {
  k::Isa saved = k::active().isa;
  explicit PinIsa(k::Isa isa) { k::set_active(isa); }
  ~PinIsa() { k::set_active(saved); }
};

}  // namespace

TEST_CASE("dispatch honours SCREENER_SIMD") {
  const char* env = std::getenv("SCREENER_SIMD");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") {
    CHECK(k::active().isa == k::Isa::kScalar);
  } else if (have_avx2()) {
    CHECK(k::active().isa == k::Isa::kAvx2);
  } else {
    CHECK(k::active().isa == k::Isa::kScalar);
  }
  CHECK(k::isa_name(k::Isa::kScalar) == "scalar");
  CHECK(k::table_for(k::Isa::kScalar).dot == &k::scalar::dot);
}

TEST_CASE("set_active rejects an unsupported ISA and switches otherwise") {
  {
    PinIsa pin(k::Isa::kScalar);
    CHECK(k::active().isa == k::Isa::kScalar);
  }
  if (have_avx2()) {
    PinIsa pin(k::Isa::kAvx2);
    CHECK(k::active().isa == k::Isa::kAvx2);
  } else {
    CHECK_THROWS(k::set_active(k::Isa::kAvx2));
  }
}

TEST_CASE("AVX2 kernels match the scalar reference for every tail length") {
  if (!have_avx2()) {
    MESSAGE("AVX2 unavailable; equivalence not exercised");
    return;
  }
  std::mt19937_64 gen(7);
  for (std::size_t n = 0; n <= 67; ++n) {
    CAPTURE(n);
    const auto a = random_vec(n, gen);
    const auto b = random_vec(n, gen);
    const double tol = 1e-14 * (1.0 + abs_sum_product(a, b));

    CHECK(std::abs(k::avx2::dot(a.data(), b.data(), n) - k::scalar::dot(a.data(), b.data(), n)) <= tol);

    double dist_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist_scale += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(std::abs(k::avx2::squared_distance(a.data(), b.data(), n) -
                   k::scalar::squared_distance(a.data(), b.data(), n)) <= 1e-14 * (1.0 + dist_scale));

    auto y1 = b, y2 = b;
    k::scalar::axpy(-1.7, a.data(), y1.data(), n);
    k::avx2::axpy(-1.7, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-14 * (1.0 + std::abs(y1[i])));

    auto s1 = a, s2 = a;
    k::scalar::scale(0.37, s1.data(), n);
    k::avx2::scale(0.37, s2.data(), n);
    CHECK(s1 == s2);
  }
}

TEST_CASE("AVX2 kernels handle unaligned pointers") {
  if (!have_avx2()) return;
  std::mt19937_64 gen(11);
  const auto a = random_vec(40, gen);
  const auto b = random_vec(40, gen);
  for (std::size_t off = 0; off < 4; ++off) {
    const std::size_t n = 33;
    CHECK(k::avx2::dot(a.data() + off, b.data() + 1, n) ==
          doctest::Approx(k::scalar::dot(a.data() + off, b.data() + 1, n)).epsilon(1e-13));
  }
}

TEST_CASE("classifier training agrees across kernel sets") {
  if (!have_avx2()) return;
  std::mt19937_64 gen(3);
  DenseMatrix x(60, 17);
  std::vector<int> y(60);
  std::normal_distribution<double> d;
  for (std::size_t i = 0; i < 60; ++i) {
    for (std::size_t j = 0; j < 17; ++j) x(i, j) = d(gen);
    y[i] = x(i, 0) + 0.5 * x(i, 3) + 0.3 * d(gen) > 0 ? 1 : 0;
  }
  const FeatureMatrix f = FeatureMatrix::from_dense(FeatureKind::kEmbeddingDense, x);
  Classifier scalar_clf, avx_clf;
  {
    PinIsa pin(k::Isa::kScalar);
    scalar_clf = train(f, y, {0.1, 1e-8, 1000});
  }
  {
    PinIsa pin(k::Isa::kAvx2);
    avx_clf = train(f, y, {0.1, 1e-8, 1000});
  }
  for (std::size_t j = 0; j < 17; ++j) CHECK(avx_clf.weights[j] == doctest::Approx(scalar_clf.weights[j]).epsilon(1e-6));
  CHECK(avx_clf.bias == doctest::Approx(scalar_clf.bias).epsilon(1e-6));
}

TEST_CASE("k-means and novelty agree across kernel sets") {
  if (!have_avx2()) return;
  std::mt19937_64 gen(5);
  DenseMatrix x(80, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < 80; ++i)
    for (std::size_t j = 0; j < 9; ++j) x(i, j) = u(gen) + (i % 3 == j % 3 ? 2.0 : 0.0);
  const FeatureMatrix f = FeatureMatrix::from_dense(FeatureKind::kEmbeddingDense, x);
  FeatureMatrix a, b;
  {
    PinIsa pin(k::Isa::kScalar);
    a = cluster_topics(f, {3, ClusterDistance::kEuclidean, 100, 1}).second;
  }
  {
    PinIsa pin(k::Isa::kAvx2);
    b = cluster_topics(f, {3, ClusterDistance::kEuclidean, 100, 1}).second;
  }
  for (std::size_t i = 0; i < 80; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(a.at(i, j) == doctest::Approx(b.at(i, j)).epsilon(1e-9));

  DenseMatrix v(10, 6);
  for (std::size_t i = 0; i < 10; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 6; ++j) s += v(i, j) = u(gen);
    for (std::size_t j = 0; j < 6; ++j) v(i, j) /= s;
  }
  const TopicMatrix topics(v);
  const std::vector<std::size_t> rows = {0, 1, 2, 3};
  const auto proj = fit_projector(topics, rows, {2, false});
  double n_scalar = 0.0, n_avx = 0.0;
  {
    PinIsa pin(k::Isa::kScalar);
    n_scalar = novelty_score(proj, topics.row(7));
  }
  {
    PinIsa pin(k::Isa::kAvx2);
    n_avx = novelty_score(proj, topics.row(7));
  }
  CHECK(n_avx == doctest::Approx(n_scalar).epsilon(1e-12));
}
