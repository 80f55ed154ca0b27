#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mohin/error.hpp"
#include "mohin/fm.hpp"

using namespace mohin;

namespace {

// Direct pairwise sum over i < j.
double naive_predict(const FmModel& m, const std::vector<double>& x) {
  double y = m.w0;
  for (std::size_t i = 0; i < x.size(); ++i) y += m.w[i] * x[i];
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double dot = 0.0;
      for (std::size_t f = 0; f < m.k(); ++f) dot += m.v(i, f) * m.v(j, f);
      y += dot * x[i] * x[j];
    }
  }
  return y;
}

double sample_objective(const FmModel& m, const std::vector<double>& x, double y,
                        double lw, double lv) {
  double ww = 0.0;
  for (double a : m.w) ww += a * a;
  const double r = naive_predict(m, x) - y;
  return r * r + lw * ww + lv * m.v.squared_norm();
}

FmModel random_model(std::size_t d, std::size_t k, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sd);
  FmModel m{g(rng), std::vector<double>(d), DenseMatrix(d, k)};
  for (auto& a : m.w) a = g(rng);
  for (auto& a : m.v.data()) a = g(rng);
  return m;
}

std::vector<double> random_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(d);
  for (auto& a : x) a = g(rng);
  return x;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

LatentFeatures latent(DenseMatrix u, DenseMatrix b) { return {std::move(u), std::move(b), {}, {}}; }

}  // namespace

TEST_CASE("assemble_features") {
  DenseMatrix u(1, 2), b(1, 2);
  u(0, 0) = 1;
  u(0, 1) = 2;
  b(0, 0) = 3;
  b(0, 1) = 4;
  const std::vector<LatentFeatures> one = {latent(u, b)};
  CHECK(assemble_features(one, 0, 0).x == std::vector<double>{1, 2, 3, 4});

  DenseMatrix u2(1, 2, 5.0), b2(1, 2, 6.0);
  const std::vector<LatentFeatures> two = {latent(u, b), latent(u2, b2)};
  CHECK(assemble_features(two, 0, 0).x == std::vector<double>{1, 2, 3, 4, 5, 5, 6, 6});

  const std::vector<LatentFeatures> zeros = {latent(DenseMatrix(3, 4), DenseMatrix(2, 4))};
  CHECK(assemble_features(zeros, 2, 1).x == std::vector<double>(8, 0.0));

  CHECK_THROWS_AS(assemble_features(zeros, 3, 0), ShapeError);
  CHECK_THROWS_AS(assemble_features(zeros, 0, 2), ShapeError);
  const std::vector<LatentFeatures> mixed = {latent(u, b), latent(DenseMatrix(1, 3), DenseMatrix(1, 3))};
  CHECK_THROWS_AS(assemble_features(mixed, 0, 0), ShapeError);
}

TEST_CASE("fm_predict") {
  FmModel bias{3.5, std::vector<double>(4), DenseMatrix(4, 2)};
  CHECK(fm_predict(bias, std::vector<double>{1, -2, 7, 0.5}) == 3.5);

  FmModel pair{0.0, {0.0, 0.0}, DenseMatrix(2, 1)};
  pair.v(0, 0) = 1.7;
  pair.v(1, 0) = -0.6;
  CHECK(fm_predict(pair, std::vector<double>{1, 1}) == doctest::Approx(1.7 * -0.6));

  CHECK_THROWS_AS(fm_predict(pair, std::vector<double>{1, 1, 1}), ShapeError);
}

TEST_CASE("factored pairwise term equals the direct double sum") {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> dim(1, 40), rank(1, 12);
  for (int trial = 0; trial < 1200; ++trial) {
    const std::size_t d = dim(rng);
    const auto m = random_model(d, rank(rng), 0.5, rng);
    const auto x = random_vector(d, rng);
    const double fast = fm_predict(m, x);
    const double slow = naive_predict(m, x);
    CHECK(std::abs(fast - slow) < 1e-10 * (1.0 + std::abs(slow)));
  }
}

TEST_CASE("fm_gradient") {
  SUBCASE("zero residual without regularization") {
    std::mt19937_64 rng(107);
    const auto m = random_model(6, 3, 0.3, rng);
    const auto x = random_vector(6, rng);
    const auto g = fm_gradient(m, x, fm_predict(m, x), 0.0, 0.0);
    CHECK(std::abs(g.w0) < 1e-12);
    for (double a : g.w) CHECK(std::abs(a) < 1e-12);
    for (double a : g.v.data()) CHECK(std::abs(a) < 1e-12);
  }
  SUBCASE("bias gradient") {
    std::mt19937_64 rng(109);
    const auto m = random_model(5, 2, 0.3, rng);
    const auto x = random_vector(5, rng);
    const auto g = fm_gradient(m, x, 4.0, 0.1, 0.1);
    CHECK(g.w0 == doctest::Approx(2.0 * (fm_predict(m, x) - 4.0)));
  }
  SUBCASE("central differences for every parameter group") {
    std::mt19937_64 rng(113);
    int probes = 0;
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t d = 3 + trial % 8, k = 1 + trial % 4;
      auto m = random_model(d, k, 0.5, rng);
      const auto x = random_vector(d, rng);
      const double y = 3.0;
      const double lw = trial % 2 ? 0.2 : 0.0, lv = trial % 3 ? 0.05 : 0.0;
      const auto g = fm_gradient(m, x, y, lw, lv);
      const double h = 1e-5;
      auto probe = [&](double& param, double analytic) {
        const double keep = param;
        param = keep + h;
        const double up = sample_objective(m, x, y, lw, lv);
        param = keep - h;
        const double dn = sample_objective(m, x, y, lw, lv);
        param = keep;
        CHECK(relative_error(analytic, (up - dn) / (2 * h)) < 1e-4);
        ++probes;
      };
      probe(m.w0, g.w0);
      for (std::size_t i = 0; i < d; ++i) probe(m.w[i], g.w[i]);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t f = 0; f < k; ++f) probe(m.v(i, f), g.v(i, f));
      }
    }
    CHECK(probes >= 100);
  }
}

TEST_CASE("fm_train") {
  std::mt19937_64 rng(127);
  SUBCASE("constant target") {
    std::vector<FmSample> samples;
    for (int n = 0; n < 200; ++n) samples.push_back({{random_vector(8, rng)}, 3.7});
    FmConfig cfg;
    cfg.k_factors = 4;
    cfg.epochs = 100;
    cfg.seed = 1;
    const auto r = fm_train(samples, cfg);
    double se = 0.0;
    for (const auto& s : samples) {
      const double e = fm_predict(r.model, s.features) - s.rating;
      se += e * e;
    }
    CHECK(std::sqrt(se / samples.size()) < 0.05);
    CHECK(r.loss_history.back() <= r.loss_history.front());
    CHECK(r.loss_history.size() == cfg.epochs + 1);
  }
  SUBCASE("single sample") {
    const std::vector<FmSample> one = {{{random_vector(6, rng)}, 4.2}};
    FmConfig cfg;
    cfg.lambda_w = cfg.lambda_v = 0.0;
    cfg.epochs = 2000;
    const auto r = fm_train(one, cfg);
    CHECK(std::abs(fm_predict(r.model, one[0].features) - 4.2) < 1e-2);
  }
  SUBCASE("determinism") {
    std::vector<FmSample> samples;
    for (int n = 0; n < 100; ++n) {
      samples.push_back({{random_vector(10, rng)}, 1.0 + double(n % 5)});
    }
    FmConfig cfg;
    cfg.epochs = 20;
    cfg.seed = 77;
    const auto a = fm_train(samples, cfg);
    const auto b = fm_train(samples, cfg);
    CHECK(a.model == b.model);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.loss_history.back() <= a.loss_history.front());
    cfg.seed = 78;
    CHECK_FALSE(fm_train(samples, cfg).model == a.model);
  }
  SUBCASE("errors") {
    FmConfig cfg;
    CHECK_THROWS_AS(fm_train({}, cfg), ValidationError);
    const std::vector<FmSample> ragged = {{{{1.0, 2.0}}, 3.0}, {{{1.0}}, 3.0}};
    CHECK_THROWS_AS(fm_train(ragged, cfg), ShapeError);
    cfg.k_factors = 0;
    CHECK_THROWS_AS(fm_train(std::vector<FmSample>{{{{1.0}}, 3.0}}, cfg), ValidationError);

    FmConfig hot;
    hot.learning_rate = 50.0;
    hot.epochs = 50;
    std::vector<FmSample> big;
    for (int n = 0; n < 50; ++n) big.push_back({{std::vector<double>(10, 30.0)}, 5.0});
    CHECK_THROWS_AS(fm_train(big, hot), TrainingError);
  }
}

TEST_CASE("model dump round trip") {
  std::mt19937_64 rng(131);
  const auto m = random_model(7, 3, 0.4, rng);
  std::stringstream s;
  write_fm_model(s, m);
  CHECK(read_fm_model(s) == m);
  std::istringstream bad("2 1\n0.5\n1\n");
  CHECK_THROWS_AS(read_fm_model(bad), ParseError);
}
