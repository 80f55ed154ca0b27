#include "mohin/fm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "mohin/error.hpp"
#include "mohin/text.hpp"

namespace mohin {

namespace {

void require_dim(const FmModel& model, std::span<const double> x) {
  if (x.size() != model.dim() || model.v.rows() != model.dim()) {
    throw ShapeError("fm: feature vector has length " + std::to_string(x.size()) +
                     " but the model expects " + std::to_string(model.dim()));
  }
}

// Writes ∂loss/∂θ into `g` (already sized) and returns the prediction.
double gradient_into(const FmModel& m, std::span<const double> x, double y,
                     double lambda_w, double lambda_v, std::vector<double>& sums,
                     FmGradient& g) {
  const std::size_t d = m.dim();
  const std::size_t k = m.k();
  std::fill(sums.begin(), sums.end(), 0.0);
  double linear = m.w0;
  double pair = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double xi = x[i];
    linear += m.w[i] * xi;
    if (xi == 0.0) continue;
    const auto vi = m.v.row(i);
    for (std::size_t f = 0; f < k; ++f) {
      sums[f] += vi[f] * xi;
      pair -= vi[f] * vi[f] * xi * xi;
    }
  }
  for (std::size_t f = 0; f < k; ++f) pair += sums[f] * sums[f];
  const double y_hat = linear + 0.5 * pair;
  const double r2 = 2.0 * (y_hat - y);
  g.w0 = r2;
  for (std::size_t i = 0; i < d; ++i) {
    const double xi = x[i];
    g.w[i] = r2 * xi + 2.0 * lambda_w * m.w[i];
    const auto vi = m.v.row(i);
    auto gi = g.v.row(i);
    for (std::size_t f = 0; f < k; ++f) {
      gi[f] = r2 * (xi * sums[f] - vi[f] * xi * xi) + 2.0 * lambda_v * vi[f];
    }
  }
  return y_hat;
}

}  // namespace

void FmConfig::validate() const {
  if (k_factors < 1) throw ValidationError("fm: k_factors must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("fm: learning rate must be positive");
  }
  if (epochs < 1) throw ValidationError("fm: epochs must be >= 1");
  if (!(lambda_w >= 0.0) || !(lambda_v >= 0.0) || !std::isfinite(lambda_w) ||
      !std::isfinite(lambda_v)) {
    throw ValidationError("fm: regularization must be non-negative");
  }
}

bool FmModel::all_finite() const noexcept {
  if (!std::isfinite(w0)) return false;
  for (double x : w) {
    if (!std::isfinite(x)) return false;
  }
  return v.all_finite();
}

FeatureVector assemble_features(std::span<const LatentFeatures> latents,
                                std::size_t u, std::size_t b) {
  FeatureVector out;
  if (latents.empty()) return out;
  const std::size_t rank = latents.front().user_factors.cols();
  out.x.reserve(2 * latents.size() * rank);
  for (const auto& lf : latents) {
    if (lf.user_factors.cols() != rank || lf.item_factors.cols() != rank) {
      throw ShapeError("assemble_features: latent feature groups disagree on rank");
    }
    if (u >= lf.user_factors.rows() || b >= lf.item_factors.rows()) {
      throw ShapeError("assemble_features: (" + std::to_string(u) + "," +
                       std::to_string(b) + ") outside the latent id spaces");
    }
    const auto uf = lf.user_factors.row(u);
    const auto bf = lf.item_factors.row(b);
    out.x.insert(out.x.end(), uf.begin(), uf.end());
    out.x.insert(out.x.end(), bf.begin(), bf.end());
  }
  return out;
}

double fm_predict(const FmModel& model, std::span<const double> x) {
  require_dim(model, x);
  const std::size_t k = model.k();
  double y = model.w0;
  for (std::size_t i = 0; i < x.size(); ++i) y += model.w[i] * x[i];
  double pair = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    double s = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = model.v(i, f) * x[i];
      s += t;
      sq += t * t;
    }
    pair += s * s - sq;
  }
  return y + 0.5 * pair;
}

FmGradient fm_gradient(const FmModel& model, std::span<const double> x, double y,
                       double lambda_w, double lambda_v) {
  require_dim(model, x);
  FmGradient g{0.0, std::vector<double>(model.dim()),
               DenseMatrix(model.dim(), model.k())};
  std::vector<double> sums(model.k());
  gradient_into(model, x, y, lambda_w, lambda_v, sums, g);
  return g;
}

double fm_objective(const FmModel& model, std::span<const FmSample> samples,
                    double lambda_w, double lambda_v) {
  double sse = 0.0;
  for (const auto& s : samples) {
    const double e = fm_predict(model, s.features) - s.rating;
    sse += e * e;
  }
  const double w_norm =
      std::inner_product(model.w.begin(), model.w.end(), model.w.begin(), 0.0);
  const double mse = samples.empty() ? 0.0 : sse / static_cast<double>(samples.size());
  return mse + lambda_w * w_norm + lambda_v * model.v.squared_norm();
}

FmTrainResult fm_train(std::span<const FmSample> samples, const FmConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw ValidationError("fm_train: no training samples");
  const std::size_t d = samples.front().features.x.size();
  for (const auto& s : samples) {
    if (s.features.x.size() != d) {
      throw ShapeError("fm_train: samples have inconsistent feature lengths");
    }
  }
  const std::size_t k = cfg.k_factors;
  FmTrainResult out;
  FmModel& m = out.model;
  m.w.assign(d, 0.0);
  m.v = DenseMatrix(d, k);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  for (double& x : m.v.data()) x = init(rng);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  FmGradient g{0.0, std::vector<double>(d), DenseMatrix(d, k)};
  std::vector<double> sums(k);
  const double lr = cfg.learning_rate;

  out.loss_history.reserve(cfg.epochs + 1);
  out.loss_history.push_back(fm_objective(m, samples, cfg.lambda_w, cfg.lambda_v));
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const auto& s = samples[idx];
      gradient_into(m, s.features.x, s.rating, cfg.lambda_w, cfg.lambda_v, sums, g);
      m.w0 -= lr * g.w0;
      for (std::size_t i = 0; i < d; ++i) m.w[i] -= lr * g.w[i];
      auto vd = m.v.data();
      const auto gd = g.v.data();
      for (std::size_t p = 0; p < vd.size(); ++p) vd[p] -= lr * gd[p];
    }
    const double loss = fm_objective(m, samples, cfg.lambda_w, cfg.lambda_v);
    if (!std::isfinite(loss)) {
      throw TrainingError("fm_train: objective diverged at epoch " +
                          std::to_string(epoch));
    }
    out.loss_history.push_back(loss);
  }
  return out;
}

void write_fm_model(std::ostream& out, const FmModel& model) {
  out << model.dim() << ' ' << model.k() << '\n';
  out << text::format_double(model.w0) << '\n';
  for (std::size_t i = 0; i < model.w.size(); ++i) {
    if (i > 0) out << ' ';
    out << text::format_double(model.w[i]);
  }
  out << '\n';
  for (std::size_t i = 0; i < model.v.rows(); ++i) {
    const auto r = model.v.row(i);
    for (std::size_t f = 0; f < r.size(); ++f) {
      if (f > 0) out << ' ';
      out << text::format_double(r[f]);
    }
    out << '\n';
  }
}

FmModel read_fm_model(std::istream& in) {
  std::size_t d = 0;
  std::size_t k = 0;
  if (!(in >> d >> k)) throw ParseError("missing `d K` header", 1);
  FmModel m;
  m.w.resize(d);
  m.v = DenseMatrix(d, k);
  std::string token;
  auto next = [&](std::size_t line) {
    if (!(in >> token)) throw ParseError("truncated model file", line);
    const auto v = text::parse_double(token);
    if (!v) throw ParseError("malformed value '" + token + "'", line);
    return *v;
  };
  m.w0 = next(2);
  for (auto& x : m.w) x = next(3);
  for (std::size_t p = 0; p < d * k; ++p) m.v.data()[p] = next(4 + p / k);
  return m;
}

}  // namespace mohin
