#pragma once

#include <array>
#include <string>
#include <string_view>

#include "mohin/sparse_matrix.hpp"

namespace mohin {

// Directed 3-node motifs. Edge patterns (a <-> b is a reciprocated pair):
//   M1  a -> b -> c -> a               directed cycle
//   M2  a <-> b, b -> c, c -> a         cycle with one reciprocated edge
//   M3  a <-> b, b <-> c, c -> a        cycle with two reciprocated edges
//   M4  a <-> b, b <-> c, c <-> a       fully reciprocated triangle
//   M5  a -> b, b -> c, a -> c          feed-forward loop
//   M6  a -> b, a -> c, b <-> c         source pointing at a reciprocated pair
//   M7  b -> a, c -> a, b <-> c         reciprocated pair pointing at a sink
enum class MotifId { kM1, kM2, kM3, kM4, kM5, kM6, kM7 };

inline constexpr std::array<MotifId, 7> kAllMotifs = {
    MotifId::kM1, MotifId::kM2, MotifId::kM3, MotifId::kM4,
    MotifId::kM5, MotifId::kM6, MotifId::kM7};

std::string to_string(MotifId m);
// Accepts "M1".."M7" (case-insensitive). Throws UsageError otherwise.
MotifId parse_motif(std::string_view name);

// Reciprocated and one-way parts of a directed adjacency matrix.
struct EdgeSplit {
  SparseMatrix bidir;
  SparseMatrix unidir;
};

// Throws ValidationError unless `a` is square, binary and loop-free.
void validate_simple_digraph(const SparseMatrix& a);

EdgeSplit split_edges(const SparseMatrix& a);

// Symmetric matrix whose (i, j) entry counts the instances of motif `m`
// (induced 3-node subgraphs) containing both i and j. Uses closed-form
// products of the reciprocated (B) and one-way (U) parts.
SparseMatrix motif_adjacency(const SparseMatrix& a, MotifId m);

// Same quantity by enumerating every node triple and testing the induced
// subgraph for isomorphism with the motif pattern. O(n^3); meant for small
// graphs and as a cross-check.
SparseMatrix motif_adjacency_bruteforce(const SparseMatrix& a, MotifId m);

}  // namespace mohin
