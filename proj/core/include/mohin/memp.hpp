#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mohin/ingestion.hpp"
#include "mohin/motif.hpp"
#include "mohin/sparse_matrix.hpp"

namespace mohin {

enum class NodeType { kUser, kItem };

// Ordered node types; starts at User, ends at Item, length >= 2.
class MetaPath {
 public:
  explicit MetaPath(std::vector<NodeType> types);

  // "U,U,B" style; U/User and B/I/Item/Business are accepted.
  static MetaPath parse(std::string_view spec);

  const std::vector<NodeType>& types() const noexcept { return types_; }
  std::size_t steps() const noexcept { return types_.size() - 1; }
  bool has_same_type_step() const noexcept;
  std::string to_string() const;

  friend bool operator==(const MetaPath&, const MetaPath&) = default;

 private:
  std::vector<NodeType> types_;
};

// P1 = (User, Item), P2 = (User, User, Item).
MetaPath user_item_path();
MetaPath user_user_item_path();

struct MempConfig {
  MetaPath meta_path = user_item_path();
  std::optional<MotifId> motif;
  double alpha = 0.0;

  // Throws ValidationError when alpha is outside [0,1] or a motif is set on a
  // path without a same-type step.
  void validate() const;
  std::string to_string() const;
};

struct SimilarityMatrix {
  SparseMatrix matrix;  // n_users x n_items
  MempConfig config;
};

// (1 - alpha)·w_edge + alpha·w_motif.
SparseMatrix blend(const SparseMatrix& w_edge, const SparseMatrix& w_motif,
                   double alpha);

// Memoizes motif adjacency matrices of a graph's User-User relation. Safe to
// share between threads.
class MotifCache {
 public:
  explicit MotifCache(const SparseMatrix& w_uu) : w_uu_(&w_uu) {}

  const SparseMatrix& get(MotifId m);

 private:
  const SparseMatrix* w_uu_;
  std::mutex mu_;
  std::map<MotifId, SparseMatrix> cache_;
};

struct SimilarityOptions {
  // Keep only the largest entries of each output row (ties: smaller column).
  // 0 keeps everything.
  std::size_t max_nnz_per_row = 0;
  MotifCache* motif_cache = nullptr;
};

// Left-to-right product of the per-step relation matrices along the meta-path.
// Same-type steps use the blended edge/motif matrix when a motif is set.
SimilarityMatrix commuting_matrix(const HinGraph& graph, const MempConfig& config,
                                  const SimilarityOptions& options = {});

// Counts concrete node sequences following `path` from user u to item b by
// depth-first enumeration over the edge-based relations.
std::size_t path_count_bruteforce(const HinGraph& graph, const MetaPath& path,
                                  std::size_t u, std::size_t b);

SparseMatrix truncate_rows(const SparseMatrix& m, std::size_t max_nnz_per_row);

}  // namespace mohin
