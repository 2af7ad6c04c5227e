#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>

#include "screener/eigen_sym.hpp"
#include "screener/error.hpp"
#include "screener/novelty.hpp"

using namespace screener;

namespace {

TopicMatrix random_topics(std::size_t n, std::size_t k, std::mt19937_64& gen, double shape = 0.3) {
  std::gamma_distribution<double> g(shape, 1.0);
  DenseMatrix v(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += v(i, j) = g(gen) + 1e-12;
    for (std::size_t j = 0; j < k; ++j) v(i, j) /= s;
  }
  return TopicMatrix(v);
}

TopicMatrix from_rows(std::vector<std::vector<double>> rows) {
  DenseMatrix v(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) v(i, j) = rows[i][j];
  return TopicMatrix(v);
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

// Sine of the largest principal angle between span(rows of a) and span(cols of b).
double max_principal_sine(const Eigen::MatrixXd& a_rows, const Eigen::MatrixXd& b_cols) {
  const Eigen::MatrixXd a = a_rows.transpose();
  const Eigen::MatrixXd residual = a - b_cols * (b_cols.transpose() * a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  return svd.singularValues()(0);
}

Eigen::MatrixXd basis_of(const NoveltyProjector& p) {
  Eigen::MatrixXd u(p.components(), p.topics());
  for (std::size_t i = 0; i < p.components(); ++i)
    for (std::size_t j = 0; j < p.topics(); ++j) u(i, j) = p.basis(i, j);
  return u;
}

// Top-t eigenvectors of S^T S from Eigen's self-adjoint solver.
Eigen::MatrixXd oracle_subspace(const TopicMatrix& v, const std::vector<std::size_t>& rows, std::size_t t,
                                Eigen::VectorXd* values = nullptr) {
  Eigen::MatrixXd s(rows.size(), v.topics());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < v.topics(); ++j) s(i, j) = v(rows[i], j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.transpose() * s);
  if (values) *values = es.eigenvalues().reverse();
  return es.eigenvectors().rightCols(static_cast<Eigen::Index>(t));
}

}  // namespace

TEST_SUITE("eigensolver") {
  TEST_CASE("symmetric_eigen agrees with Eigen on random matrices") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> d;
    for (std::size_t n : {1u, 2u, 3u, 7u, 20u, 45u}) {
      Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return d(gen); });
      a = (a + a.transpose()).eval();
      DenseMatrix m(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = a(i, j);
      const SymmetricEigen ours = symmetric_eigen(m);
      const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().reverse();
      for (std::size_t i = 0; i < n; ++i) CHECK(ours.values[i] == doctest::Approx(ref(i)).epsilon(1e-10).scale(1.0));
      for (std::size_t j = 0; j < n; ++j) {
        Eigen::VectorXd x(n);
        for (std::size_t i = 0; i < n; ++i) x(i) = ours.vectors(i, j);
        CHECK((a * x - ours.values[j] * x).norm() < 1e-9 * (1.0 + a.norm()));
        CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
    CHECK_THROWS_AS(symmetric_eigen(DenseMatrix(2, 3)), InvalidArgument);
  }
}

TEST_SUITE("novelty") {
  TEST_CASE("hand-computed score for U = [e1], v = (0.6, 0.4)") {
    const TopicMatrix v = from_rows({{1.0, 0.0}, {0.6, 0.4}});
    const std::vector<std::size_t> h = {0};
    const NoveltyProjector p = fit_projector(v, h, {1, false});
    CHECK(p.basis(0, 0) == doctest::Approx(1.0));
    CHECK(p.basis(0, 1) == doctest::Approx(0.0));
    CHECK(novelty_score(p, v.row(1)) == doctest::Approx(1.0 - 0.6 / std::sqrt(0.52)).epsilon(1e-12));
    CHECK(novelty_score(p, v.row(1)) == doctest::Approx(0.1679).epsilon(1e-4));
    const std::vector<double> inside = {0.3, 0.0}, outside = {0.0, 2.0};
    CHECK(std::abs(novelty_score(p, inside)) <= 1e-9);
    CHECK(std::abs(novelty_score(p, outside) - 1.0) <= 1e-9);
  }

  TEST_CASE("rank-one and orthogonal cases") {
    const TopicMatrix v = from_rows({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.2, 0.3, 0.5}});
    const std::vector<std::size_t> same = {0, 1};
    const NoveltyProjector p1 = fit_projector(v, same, {1, false});
    CHECK(p1.components() == 1);
    CHECK(p1.basis(0, 0) == doctest::Approx(1.0));

    const std::vector<std::size_t> orth = {0, 2};
    const NoveltyProjector p2 = fit_projector(v, orth, {2, false});
    REQUIRE(p2.components() == 2);
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(p2.basis(j, 2)) < 1e-12);
    const std::vector<double> e3 = {0, 0, 1}, mix = {0.5, 0.5, 0};
    CHECK(novelty_score(p2, e3) == doctest::Approx(1.0));
    CHECK(novelty_score(p2, mix) == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("component count is reduced to the rank and flagged") {
    const TopicMatrix v = from_rows({{1, 0, 0, 0}, {1, 0, 0, 0}, {0.5, 0.5, 0, 0}, {0, 0, 0.5, 0.5}});
    const std::vector<std::size_t> rank_two = {0, 1, 2};
    const NoveltyProjector p = fit_projector(v, rank_two, {3, false});
    CHECK(p.components() == 2);
    CHECK(p.reduced);
    const std::vector<std::size_t> one = {3};
    const NoveltyProjector q = fit_projector(v, one, {3, false});
    CHECK(q.components() == 1);
    CHECK(q.reduced);
    CHECK_FALSE(fit_projector(v, rank_two, {2, false}).reduced);
    CHECK_THROWS_AS(fit_projector(v, rank_two, {0, false}), InvalidArgument);
    CHECK_THROWS_AS(fit_projector(v, {}, {1, false}), InvalidArgument);
  }

  TEST_CASE("basis is orthonormal with positive leading components") {
    std::mt19937_64 gen(5);
    const TopicMatrix v = random_topics(30, 12, gen);
    const NoveltyProjector p = fit_projector(v, iota(20), {5, false});
    for (std::size_t a = 0; a < 5; ++a) {
      for (std::size_t b = 0; b < 5; ++b) {
        double dot = 0.0;
        for (std::size_t j = 0; j < 12; ++j) dot += p.basis(a, j) * p.basis(b, j);
        CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
      }
      std::size_t first = 0;
      while (std::abs(p.basis(a, first)) <= 1e-12) ++first;
      CHECK(p.basis(a, first) > 0.0);
    }
    for (std::size_t i = 1; i < p.eigenvalues.size(); ++i) CHECK(p.eigenvalues[i] <= p.eigenvalues[i - 1]);
  }

  TEST_CASE("subspace matches a dense eigendecomposition oracle") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t k = 5 + trial % 16;
      const std::size_t n = 10 + trial % 31;
      const std::size_t t = 1 + trial % 4;
      const TopicMatrix v = random_topics(n, k, gen, 0.5 + 0.1 * (trial % 5));
      const auto rows = iota(n);
      const NoveltyProjector p = fit_projector(v, rows, {t, false});
      REQUIRE(p.components() == t);
      Eigen::VectorXd values;
      const Eigen::MatrixXd oracle = oracle_subspace(v, rows, t, &values);
      CHECK(max_principal_sine(basis_of(p), oracle) < 1e-6);
      for (std::size_t i = 0; i < t; ++i) CHECK(p.eigenvalues[i] == doctest::Approx(values(i)).epsilon(1e-9));
    }
  }

  TEST_CASE("scores: range, scale invariance, monotone in t, zero on the labelled span") {
    std::mt19937_64 gen(13);
    const TopicMatrix v = random_topics(40, 8, gen);
    const auto h = iota(15);
    NoveltyProjector prev;
    for (std::size_t t = 1; t <= 8; ++t) {
      const NoveltyProjector p = fit_projector(v, h, {t, false});
      for (std::size_t d = 0; d < 40; ++d) {
        const double s = novelty_score(p, v.row(d));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        std::vector<double> scaled(v.row(d).begin(), v.row(d).end());
        for (auto& x : scaled) x *= 7.5;
        CHECK(novelty_score(p, scaled) == doctest::Approx(s).scale(1.0).epsilon(1e-12));
        if (t > 1) CHECK(s <= novelty_score(prev, v.row(d)) + 1e-12);
      }
      prev = p;
    }
    // With t equal to the rank of a 3-row S, the rows themselves score 0.
    const std::vector<std::size_t> three = {0, 1, 2};
    const NoveltyProjector p3 = fit_projector(v, three, {3, false});
    for (std::size_t d : three) CHECK(novelty_score(p3, v.row(d)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    const std::vector<double> wrong(5, 0.2);
    CHECK_THROWS_AS(novelty_score(p3, wrong), InvalidArgument);
  }

  TEST_CASE("centred mode uses the covariance of the labelled rows") {
    std::mt19937_64 gen(2);
    const TopicMatrix v = random_topics(25, 6, gen);
    const auto rows = iota(25);
    const NoveltyProjector p = fit_projector(v, rows, {2, true});
    REQUIRE(p.mean.size() == 6);
    Eigen::MatrixXd s(25, 6);
    for (std::size_t i = 0; i < 25; ++i)
      for (std::size_t j = 0; j < 6; ++j) s(i, j) = v(i, j);
    const Eigen::RowVectorXd mu = s.colwise().mean();
    for (std::size_t j = 0; j < 6; ++j) CHECK(p.mean[j] == doctest::Approx(mu(j)));
    const Eigen::MatrixXd c = s.rowwise() - mu;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.transpose() * c);
    const Eigen::MatrixXd oracle = es.eigenvectors().rightCols(2);
    CHECK(max_principal_sine(basis_of(p), oracle) < 1e-6);
  }

  TEST_CASE("topic assignment and discovery") {
    const std::vector<double> a = {0.1, 0.7, 0.2}, tie = {0.5, 0.5};
    CHECK(assign_topic(a) == 1);
    CHECK(assign_topic(tie) == 0);
    std::mt19937_64 gen(9);
    const TopicMatrix v = random_topics(60, 10, gen);
    for (std::size_t d = 0; d < 60; ++d) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < 10; ++j)
        if (v(d, j) > v(d, best)) best = j;
      CHECK(assign_topic(v.row(d)) == best);
    }
    CHECK(topics_discovered(v, {}) == 0);
    const TopicMatrix same = from_rows({{0, 0, 0, 1}, {0.1, 0, 0, 0.9}, {1, 0, 0, 0}});
    const std::vector<std::size_t> two = {0, 1};
    CHECK(topics_discovered(same, two) == 1);
    CHECK(occupied_topics(same) == 2);

    std::set<std::size_t> seen;
    std::size_t prev = 0;
    for (std::size_t n = 1; n <= 25; ++n) {
      seen.insert(assign_topic(v.row(n - 1)));
      const std::size_t got = topics_discovered(v, iota(n));
      CHECK(got == seen.size());
      CHECK(got >= prev);
      prev = got;
    }
  }
}
