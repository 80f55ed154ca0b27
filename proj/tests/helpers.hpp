#pragma once

// Shared fixtures and dense reference routines for the test suites. Nothing
// here calls the sparse kernels it is used to check.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mohin/ingestion.hpp"
#include "mohin/sparse_matrix.hpp"

namespace mohin::testing {

using Dense = std::vector<std::vector<double>>;

inline std::string data_path(const std::string& name) {
  return std::string(MOHIN_TEST_DATA_DIR) + "/" + name;
}

inline Dense dense_zero(std::size_t r, std::size_t c) {
  return Dense(r, std::vector<double>(c, 0.0));
}

inline Dense dense_mul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  const std::size_t inner = b.size();
  const std::size_t m = inner == 0 ? 0 : b[0].size();
  Dense out = dense_zero(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < inner; ++k) {
      for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

inline Dense dense_transpose(const Dense& a) {
  const std::size_t n = a.size();
  const std::size_t m = n == 0 ? 0 : a[0].size();
  Dense out = dense_zero(m, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[j][i] = a[i][j];
  }
  return out;
}

// Integer-valued matrix with entries 0..max_value, each non-zero w.p. density.
inline SparseMatrix random_matrix(std::size_t rows, std::size_t cols, double density,
                                  int max_value, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> value(1, max_value);
  Dense d = dense_zero(rows, cols);
  for (auto& row : d) {
    for (auto& x : row) {
      if (coin(rng) < density) x = value(rng);
    }
  }
  return SparseMatrix::from_dense(d);
}

// Binary loop-free digraph with independent edge probability p.
inline SparseMatrix random_digraph(std::size_t n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && coin(rng) < p) t.push_back({Index(i), Index(j), 1.0});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

// Edge list with 1-based node names v1..vn mapped to indices 0..n-1.
inline SparseMatrix digraph_from_edges(std::size_t n,
                                       std::vector<std::pair<int, int>> edges) {
  std::vector<Triplet> t;
  for (auto [a, b] : edges) t.push_back({Index(a - 1), Index(b - 1), 1.0});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

// The five-node example: v2 and v5 each point at the reciprocated pair
// v1 <-> v3, plus v3 -> v4 -> v5 -> v3 closing a directed cycle.
inline SparseMatrix five_node_graph() {
  return digraph_from_edges(
      5, {{2, 1}, {2, 3}, {1, 3}, {3, 1}, {5, 1}, {5, 3}, {4, 5}, {3, 4}});
}

// Four users u1..u4, items b1..b4: u1 trusts u2, u3, u4; u2 trusts u3; user k
// rated item k.
inline HinGraph toy_network() {
  std::ifstream r(data_path("toy_ratings.tsv"));
  std::ifstream t(data_path("toy_trust.tsv"));
  RatingDataset ratings = parse_ratings(r);
  const auto trust = parse_trust(t, *ratings.user_labels);
  return build_hin(std::move(ratings), trust.matrix);
}

// Random HIN over dense id spaces with a given trust and rating density.
inline HinGraph random_hin(std::size_t n_users, std::size_t n_items, double trust_p,
                           double rating_p, std::mt19937_64& rng) {
  std::ostringstream ratings_text;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  // Every user and item appears once up front so ids are dense and ordered.
  for (std::size_t u = 0; u < std::max(n_users, n_items); ++u) {
    ratings_text << "u" << (u % n_users) << "\ti" << (u % n_items) << "\t3\n";
  }
  for (std::size_t u = 0; u < n_users; ++u) {
    for (std::size_t i = 0; i < n_items; ++i) {
      if (coin(rng) < rating_p) ratings_text << "u" << u << "\ti" << i << "\t4\n";
    }
  }
  std::istringstream rin(ratings_text.str());
  RatingDataset ratings = parse_ratings(rin);
  return build_hin(std::move(ratings), random_digraph(n_users, trust_p, rng));
}

}  // namespace mohin::testing
