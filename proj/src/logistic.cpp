#include "screener/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "screener/error.hpp"
#include "screener/kernels.hpp"

namespace screener {

namespace {

constexpr double kProbFloor = 1e-12;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_inputs(const FeatureMatrix& features, std::span<const std::size_t> rows, std::span<const int> labels) {
  if (rows.size() != labels.size()) throw InvalidArgument("row and label counts differ");
  for (std::size_t r : rows)
    if (r >= features.rows()) throw InvalidArgument("training row index out of range");
}

}  // namespace

double logistic_objective(const FeatureMatrix& features, std::span<const std::size_t> rows,
                          std::span<const int> labels, double lambda, std::span<const double> weights,
                          double bias, std::span<double> grad) {
  const std::size_t p = features.cols();
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  std::fill(grad.begin(), grad.end(), 0.0);
  std::span<double> gw = grad.first(p);
  double loss = 0.0, gb = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowView x = features.row(rows[i]);
    const double z = x.dot(weights) + bias;
    const double y = labels[i] ? 1.0 : 0.0;
    // -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
    loss += softplus(z) - y * z;
    const double r = (sigmoid(z) - y) * inv_m;
    x.axpy_into(r, gw);
    gb += r;
  }
  loss *= inv_m;
  loss += 0.5 * lambda * kernels::dot(weights, weights);
  kernels::axpy(lambda, weights, gw);
  grad[p] = gb;
  return loss;
}

Classifier train(const FeatureMatrix& features, std::span<const std::size_t> rows, std::span<const int> labels,
                 const TrainOptions& o, std::vector<double>* loss_history) {
  check_inputs(features, rows, labels);
  if (o.lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  const bool has_pos = std::any_of(labels.begin(), labels.end(), [](int y) { return y == 1; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(), [](int y) { return y == 0; });
  if (!has_pos || !has_neg) throw DegenerateInput("training set must contain both classes");

  const std::size_t p = features.cols(), n = p + 1;
  // Parameters packed as [w..., b].
  std::vector<double> x(n, 0.0), g(n), x_new(n), g_new(n), dir(n);
  auto eval = [&](std::span<const double> params, std::span<double> grad) {
    return logistic_objective(features, rows, labels, o.lambda, params.first(p), params[p], grad);
  };

  constexpr std::size_t kHistory = 10;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> alpha(kHistory);

  double f = eval(x, g);
  if (loss_history) loss_history->push_back(f);
  Classifier clf;
  clf.lambda = o.lambda;
  std::size_t iter = 0;
  for (; iter < o.max_iter; ++iter) {
    if (std::sqrt(kernels::dot(g, g)) <= o.tol) {
      clf.converged = true;
      break;
    }
    // Two-loop recursion: dir = -H g.
    std::copy(g.begin(), g.end(), dir.begin());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * kernels::dot(s_hist[k], dir);
      kernels::axpy(-alpha[k], y_hist[k], dir);
    }
    if (!s_hist.empty()) {
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      kernels::scale(kernels::dot(s, y) / kernels::dot(y, y), dir);
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * kernels::dot(y_hist[k], dir);
      kernels::axpy(alpha[k] - beta, s_hist[k], dir);
    }
    kernels::scale(-1.0, dir);

    double slope = kernels::dot(g, dir);
    if (slope >= 0.0) {
      // Not a descent direction; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      std::transform(g.begin(), g.end(), dir.begin(), [](double v) { return -v; });
      slope = kernels::dot(g, dir);
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / std::sqrt(kernels::dot(g, g))) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      std::copy(x.begin(), x.end(), x_new.begin());
      kernels::axpy(step, dir, x_new);
      f_new = eval(x_new, g_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || f_new > f) break;

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = kernels::dot(s, y);
    if (sy > 1e-12) {
      if (s_hist.size() == kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    if (loss_history) loss_history->push_back(f);
  }
  if (!clf.converged && std::sqrt(kernels::dot(g, g)) <= o.tol) clf.converged = true;
  clf.iterations_used = iter;
  clf.weights.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p));
  clf.bias = x[p];
  return clf;
}

Classifier train(const FeatureMatrix& features, std::span<const int> labels, const TrainOptions& options,
                 std::vector<double>* loss_history) {
  std::vector<std::size_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return train(features, rows, labels, options, loss_history);
}

double predict_proba(const Classifier& clf, const RowView& row) {
  const double p = sigmoid(row.dot(clf.weights) + clf.bias);
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

std::vector<double> predict_proba(const Classifier& clf, const FeatureMatrix& features,
                                  std::span<const std::size_t> rows) {
  if (features.cols() != clf.dim()) throw InvalidArgument("feature dimension does not match classifier");
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(predict_proba(clf, features.row(r)));
  return out;
}

std::vector<double> predict_proba(const Classifier& clf, const FeatureMatrix& features) {
  std::vector<std::size_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return predict_proba(clf, features, rows);
}

namespace {
constexpr int kClassifierFormatVersion = 1;
}

void save_classifier(const std::filesystem::path& path, const Classifier& clf) {
  nlohmann::json j = {{"format", "screener-classifier"},
                      {"version", kClassifierFormatVersion},
                      {"weights", clf.weights},
                      {"bias", clf.bias},
                      {"lambda", clf.lambda},
                      {"converged", clf.converged},
                      {"iterations_used", clf.iterations_used}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

Classifier load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format") != "screener-classifier" || j.at("version") != kClassifierFormatVersion) {
      throw ParseError("unsupported classifier format or version", 0);
    }
    Classifier clf;
    clf.weights = j.at("weights").get<std::vector<double>>();
    clf.bias = j.at("bias");
    clf.lambda = j.at("lambda");
    clf.converged = j.at("converged");
    clf.iterations_used = j.at("iterations_used");
    return clf;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed classifier file: ") + e.what(), 0);
  }
}

}  // namespace screener
