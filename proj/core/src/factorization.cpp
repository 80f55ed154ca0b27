#include "mohin/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mohin/error.hpp"

namespace mohin {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) s += a[f] * b[f];
  return s;
}

void check_shapes(const SparseMatrix& sim, const LatentFeatures& features) {
  if (features.user_factors.rows() != sim.rows() ||
      features.item_factors.rows() != sim.cols() ||
      features.user_factors.cols() != features.item_factors.cols()) {
    throw ShapeError("latent factors do not match the similarity matrix shape");
  }
}

}  // namespace

void MfConfig::validate() const {
  if (rank < 1) throw ValidationError("mf: rank must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("mf: learning rate must be positive");
  }
  if (epochs < 1) throw ValidationError("mf: epochs must be >= 1");
  if (!(reg >= 0.0) || !std::isfinite(reg)) {
    throw ValidationError("mf: regularization must be non-negative");
  }
}

double mf_loss(const SparseMatrix& sim, const LatentFeatures& features, double reg) {
  check_shapes(sim, features);
  double loss = 0.0;
  for (std::size_t i = 0; i < sim.rows(); ++i) {
    const auto rc = sim.row_cols(i);
    const auto rv = sim.row_values(i);
    const auto u = features.user_factors.row(i);
    for (std::size_t p = 0; p < rc.size(); ++p) {
      const double e = rv[p] - dot(u, features.item_factors.row(rc[p]));
      loss += e * e;
    }
  }
  return loss + reg * (features.user_factors.squared_norm() +
                       features.item_factors.squared_norm());
}

MfEntryGradient mf_gradient(const SparseMatrix& sim, const LatentFeatures& features,
                            double reg, std::size_t i, std::size_t j) {
  check_shapes(sim, features);
  const double s = entry(sim, i, j);
  if (s == 0.0) {
    throw ValidationError("mf_gradient: entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") is not stored");
  }
  const auto u = features.user_factors.row(i);
  const auto v = features.item_factors.row(j);
  const double e = s - dot(u, v);
  MfEntryGradient g;
  g.d_user.resize(u.size());
  g.d_item.resize(v.size());
  for (std::size_t f = 0; f < u.size(); ++f) {
    g.d_user[f] = -2.0 * e * v[f] + 2.0 * reg * u[f];
    g.d_item[f] = -2.0 * e * u[f] + 2.0 * reg * v[f];
  }
  return g;
}

LatentFeatures factorize(const SimilarityMatrix& sim, const MfConfig& cfg) {
  cfg.validate();
  const SparseMatrix& m = sim.matrix;
  if (m.nnz() == 0) {
    throw ValidationError("factorize: similarity matrix " + sim.config.to_string() +
                          " has no stored entries");
  }
  const std::size_t rank = cfg.rank;
  LatentFeatures out{DenseMatrix(m.rows(), rank), DenseMatrix(m.cols(), rank),
                     sim.config, {}};

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  for (double& x : out.user_factors.data()) x = init(rng);
  for (double& x : out.item_factors.data()) x = init(rng);

  std::vector<bool> item_seen(m.cols(), false);
  for (Index j : m.col_indices()) item_seen[j] = true;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m.row_cols(i).empty()) std::fill_n(out.user_factors.row(i).begin(), rank, 0.0);
  }
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (!item_seen[j]) std::fill_n(out.item_factors.row(j).begin(), rank, 0.0);
  }

  struct Cell {
    Index row;
    Index col;
    double value;
  };
  std::vector<Cell> cells;
  cells.reserve(m.nnz());
  for (const auto& t : m.to_triplets()) cells.push_back({t.row, t.col, t.value});

  const double lr = cfg.learning_rate;
  const double reg = cfg.reg;
  std::vector<double> u_old(rank);
  out.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(cells.begin(), cells.end(), rng);
    for (const Cell& c : cells) {
      auto u = out.user_factors.row(c.row);
      auto v = out.item_factors.row(c.col);
      const double e = c.value - dot(u, v);
      std::copy(u.begin(), u.end(), u_old.begin());
      for (std::size_t f = 0; f < rank; ++f) {
        u[f] -= lr * (-2.0 * e * v[f] + 2.0 * reg * u[f]);
        v[f] -= lr * (-2.0 * e * u_old[f] + 2.0 * reg * v[f]);
      }
    }
    const double loss = mf_loss(m, out, reg);
    if (!std::isfinite(loss)) {
      throw TrainingError("factorize " + sim.config.to_string() +
                          ": objective diverged at epoch " + std::to_string(epoch));
    }
    out.loss_history.push_back(loss);
  }
  return out;
}

}  // namespace mohin
