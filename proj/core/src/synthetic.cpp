#include "mohin/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mohin/error.hpp"

namespace mohin {

HinGraph generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n_users < 3 || cfg.n_items < 1 || cfg.n_communities < 1 ||
      cfg.n_ratings < cfg.n_users || cfg.group_size < 2) {
    throw ValidationError("synthetic: degenerate configuration");
  }
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n_comm = cfg.n_communities;

  std::vector<std::size_t> user_comm(cfg.n_users);
  std::vector<std::vector<Index>> members(n_comm);
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    user_comm[u] = u % n_comm;
    members[u % n_comm].push_back(static_cast<Index>(u));
  }
  std::vector<std::size_t> item_genre(cfg.n_items);
  std::vector<std::vector<Index>> genre_items(n_comm);
  std::normal_distribution<double> bias_dist(0.0, 0.3);
  std::vector<double> item_bias(cfg.n_items);
  for (std::size_t i = 0; i < cfg.n_items; ++i) {
    item_genre[i] = i % n_comm;
    genre_items[i % n_comm].push_back(static_cast<Index>(i));
    item_bias[i] = bias_dist(rng);
  }

  std::set<std::pair<Index, Index>> edges;
  auto add_edge = [&](Index a, Index b) {
    if (a != b) edges.emplace(a, b);
  };
  // Reciprocated friend groups inside a community: dense closed triangles.
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    const auto& pool = members[user_comm[u]];
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t g = 0; g < cfg.groups_per_user; ++g) {
      std::vector<Index> group{static_cast<Index>(u)};
      for (std::size_t tries = 0; group.size() < cfg.group_size && tries < 50; ++tries) {
        const Index v = pool[pick(rng)];
        if (std::find(group.begin(), group.end(), v) == group.end()) group.push_back(v);
      }
      for (Index a : group) {
        for (Index b : group) add_edge(a, b);
      }
    }
  }
  std::uniform_int_distribution<Index> any_user(0, static_cast<Index>(cfg.n_users - 1));
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    for (std::size_t k = 0; k < cfg.noise_edges_per_user; ++k) {
      add_edge(static_cast<Index>(u), any_user(rng));
    }
  }

  auto users = std::make_shared<LabelMap>();
  auto items = std::make_shared<LabelMap>();
  for (std::size_t u = 0; u < cfg.n_users; ++u) users->intern("u" + std::to_string(u));
  for (std::size_t i = 0; i < cfg.n_items; ++i) items->intern("i" + std::to_string(i));

  std::vector<Rating> triples;
  triples.reserve(cfg.n_ratings);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<Index> any_item(0, static_cast<Index>(cfg.n_items - 1));
  std::normal_distribution<double> noise(0.0, cfg.noise_sd);
  std::set<std::pair<Index, Index>> rated;
  for (std::size_t k = 0; k < cfg.n_ratings; ++k) {
    const auto u = static_cast<Index>(k % cfg.n_users);
    const std::size_t c = user_comm[u];
    Index item = 0;
    for (int tries = 0; tries < 100; ++tries) {
      if (coin(rng) < cfg.own_community_rate) {
        const auto& pool = genre_items[c];
        item = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      } else {
        item = any_item(rng);
      }
      if (!rated.count({u, item})) break;
    }
    if (!rated.emplace(u, item).second) continue;
    const std::size_t g = item_genre[item];
    double taste = 0.0;
    if (g == c) taste = cfg.taste_strength;
    if (g == (c + 1) % n_comm) taste = -cfg.taste_strength;
    const double raw = 3.2 + item_bias[item] + taste + noise(rng);
    triples.push_back({u, item, std::clamp(std::round(raw), 1.0, 5.0)});
  }

  std::vector<Triplet> trust;
  trust.reserve(edges.size());
  for (const auto& [a, b] : edges) trust.push_back({a, b, 1.0});

  RatingDataset ds;
  ds.triples = std::move(triples);
  ds.n_users = cfg.n_users;
  ds.n_items = cfg.n_items;
  ds.user_labels = std::move(users);
  ds.item_labels = std::move(items);
  return build_hin(std::move(ds),
                   SparseMatrix::from_triplets(cfg.n_users, cfg.n_users, std::move(trust)));
}

}  // namespace mohin
