#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mohin/dense_matrix.hpp"
#include "mohin/factorization.hpp"

namespace mohin {

struct FmConfig {
  std::size_t k_factors = 10;
  double learning_rate = 0.005;
  std::size_t epochs = 200;
  double lambda_w = 0.01;
  double lambda_v = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

// Second-order factorization machine:
//   ŷ(x) = w0 + Σ_i w_i x_i + Σ_{i<j} <v_i, v_j> x_i x_j
struct FmModel {
  double w0 = 0.0;
  std::vector<double> w;  // length d
  DenseMatrix v;          // d x K

  std::size_t dim() const noexcept { return w.size(); }
  std::size_t k() const noexcept { return v.cols(); }
  bool all_finite() const noexcept;

  friend bool operator==(const FmModel&, const FmModel&) = default;
};

// Layout: for each similarity matrix in order, the F user factors of u
// followed by the F item factors of b. Length 2·L·F.
struct FeatureVector {
  std::vector<double> x;
};

FeatureVector assemble_features(std::span<const LatentFeatures> latents,
                                std::size_t u, std::size_t b);

// Pairwise term evaluated as ½ Σ_f [(Σ_i v_if x_i)² − Σ_i v_if² x_i²].
double fm_predict(const FmModel& model, std::span<const double> x);
inline double fm_predict(const FmModel& model, const FeatureVector& x) {
  return fm_predict(model, x.x);
}

struct FmGradient {
  double w0 = 0.0;
  std::vector<double> w;
  DenseMatrix v;
};

// Gradient of (ŷ − y)² + λ_w‖w‖² + λ_v‖v‖² for a single sample.
FmGradient fm_gradient(const FmModel& model, std::span<const double> x, double y,
                       double lambda_w, double lambda_v);

struct FmSample {
  FeatureVector features;
  double rating;
};

// Mean squared error over the samples plus λ_w‖w‖² + λ_v‖v‖².
double fm_objective(const FmModel& model, std::span<const FmSample> samples,
                    double lambda_w, double lambda_v);

struct FmTrainResult {
  FmModel model;
  // loss_history[0] is the objective before the first epoch.
  std::vector<double> loss_history;
};

// Plain SGD in a seeded shuffled order per epoch; w0 and w start at zero and
// v at N(0, 0.01²).
FmTrainResult fm_train(std::span<const FmSample> samples, const FmConfig& cfg);

// Header `d K`, then w0, then w on one line, then v row-major.
void write_fm_model(std::ostream& out, const FmModel& model);
FmModel read_fm_model(std::istream& in);

}  // namespace mohin
