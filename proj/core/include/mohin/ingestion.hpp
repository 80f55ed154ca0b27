#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mohin/sparse_matrix.hpp"

namespace mohin {

enum class Delimiter { kComma, kTab, kSpace };

// Accepts "comma"/",", "tab"/"\t", "space"/" ".
Delimiter parse_delimiter(std::string_view name);
char delimiter_char(Delimiter d) noexcept;

// External label <-> dense index, assigned in first-appearance order.
class LabelMap {
 public:
  Index intern(std::string_view label);
  std::optional<Index> find(std::string_view label) const;
  const std::string& label(Index i) const { return labels_.at(i); }
  std::size_t size() const noexcept { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Index> index_;
};

struct Rating {
  Index user;
  Index item;
  double rating;

  friend bool operator==(const Rating&, const Rating&) = default;
};

// Rating triples over dense id spaces. Subsets produced by splitting share the
// parent's id spaces and label maps.
struct RatingDataset {
  std::vector<Rating> triples;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::shared_ptr<const LabelMap> user_labels = std::make_shared<LabelMap>();
  std::shared_ptr<const LabelMap> item_labels = std::make_shared<LabelMap>();

  RatingDataset with_triples(std::vector<Rating> subset) const;
};

// Records are `user<sep>item<sep>rating[<sep>extra...]`; `#` lines and blank
// lines are skipped. A repeated (user, item) pair keeps its first position and
// takes the rating of the last occurrence.
RatingDataset parse_ratings(std::istream& in, Delimiter delim = Delimiter::kTab);

struct TrustParseResult {
  SparseMatrix matrix;
  std::size_t edges_read = 0;
  std::size_t dropped_unknown = 0;
  std::size_t dropped_self_loops = 0;
};

// Records are `truster<sep>trustee[<sep>weight...]`. Weights are ignored and
// the matrix is binary over `users`' index space.
TrustParseResult parse_trust(std::istream& in, const LabelMap& users,
                             Delimiter delim = Delimiter::kTab);

struct EdgeList {
  SparseMatrix matrix;
  LabelMap labels;
  std::size_t dropped_self_loops = 0;
};

// Standalone directed graph; nodes are labelled in first-appearance order.
EdgeList parse_edge_list(std::istream& in, Delimiter delim = Delimiter::kTab);

// Typed network: User-User trust and User-Item rating existence.
struct HinGraph {
  SparseMatrix w_uu;
  SparseMatrix w_ub;
  RatingDataset ratings;

  std::size_t n_users() const noexcept { return ratings.n_users; }
  std::size_t n_items() const noexcept { return ratings.n_items; }
  const LabelMap& user_labels() const { return *ratings.user_labels; }
  const LabelMap& item_labels() const { return *ratings.item_labels; }
};

// Binarizes `trust` and derives w_ub from the rating pairs. Throws ShapeError
// on a dimension mismatch and ValidationError on self-trust.
HinGraph build_hin(RatingDataset ratings, const SparseMatrix& trust);

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t ratings = 0;
  std::size_t social_relations = 0;
};

DatasetStats stats(const HinGraph& graph);

// Canonical dataset directory: ratings.tsv and trust.tsv (labelled, tab
// separated, re-parseable by parse_ratings/parse_trust), plus w_uu.coo and
// w_ub.coo matrix dumps.
void write_canonical(const std::filesystem::path& dir, const HinGraph& graph);
HinGraph load_canonical(const std::filesystem::path& dir);

}  // namespace mohin
