#pragma once

#include <cstddef>
#include <cstdint>

#include "mohin/ingestion.hpp"

namespace mohin {

// Generator for a trust + rating network where rating residuals follow
// community taste and community membership is visible mostly through closed,
// reciprocated trust triangles. One-way "noise" trust edges cross communities
// and rarely close triangles, so motif-weighted trust separates signal from
// noise better than raw edges.
struct SyntheticConfig {
  std::size_t n_users = 500;
  std::size_t n_items = 300;
  std::size_t n_ratings = 5000;
  std::size_t n_communities = 5;
  // Each user joins this many reciprocated friend groups inside its community.
  std::size_t groups_per_user = 2;
  std::size_t group_size = 4;
  // One-way trust edges per user to uniformly random users.
  std::size_t noise_edges_per_user = 6;
  // Probability that a rating targets an item of the user's own community.
  double own_community_rate = 0.3;
  double taste_strength = 1.0;
  double noise_sd = 0.6;
  std::uint64_t seed = 1;
};

HinGraph generate_synthetic(const SyntheticConfig& cfg);

}  // namespace mohin
