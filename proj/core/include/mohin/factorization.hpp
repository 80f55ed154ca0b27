#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mohin/dense_matrix.hpp"
#include "mohin/memp.hpp"

namespace mohin {

struct MfConfig {
  std::size_t rank = 10;
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  double reg = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LatentFeatures {
  DenseMatrix user_factors;  // n_users x rank
  DenseMatrix item_factors;  // n_items x rank
  MempConfig source_config;
  // Objective after each epoch; loss_history[0] is the value after epoch 1.
  std::vector<double> loss_history;
};

// Σ over stored (i,j) of (s_ij − u_i·v_j)² + reg·(‖U‖² + ‖V‖²).
double mf_loss(const SparseMatrix& sim, const LatentFeatures& features, double reg);

struct MfEntryGradient {
  std::vector<double> d_user;  // ∂/∂u_i
  std::vector<double> d_item;  // ∂/∂v_j
};

// Gradients of (s_ij − u_i·v_j)² + reg·(‖u_i‖² + ‖v_j‖²) for a stored entry.
// Throws ValidationError when (i, j) is not stored.
MfEntryGradient mf_gradient(const SparseMatrix& sim, const LatentFeatures& features,
                            double reg, std::size_t i, std::size_t j);

// SGD over the stored entries of the similarity matrix, visited in a seeded
// shuffled order each epoch. Factors start as N(0, 0.01²); rows or columns
// with no stored entry are zero. Throws ValidationError for an empty matrix
// and TrainingError when the objective stops being finite.
LatentFeatures factorize(const SimilarityMatrix& sim, const MfConfig& cfg);

}  // namespace mohin
