#include "mohin/memp.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "mohin/error.hpp"
#include "mohin/text.hpp"

namespace mohin {

namespace {

NodeType parse_node_type(std::string_view s) {
  std::string up;
  for (char c : text::trim(s)) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "U" || up == "USER") return NodeType::kUser;
  if (up == "B" || up == "I" || up == "ITEM" || up == "BUSINESS") return NodeType::kItem;
  throw UsageError("unknown node type '" + std::string(s) + "' (expected U or B)");
}

const char* type_code(NodeType t) { return t == NodeType::kUser ? "U" : "B"; }

SparseMatrix relation(const HinGraph& g, NodeType from, NodeType to) {
  if (from == NodeType::kUser && to == NodeType::kUser) return g.w_uu;
  if (from == NodeType::kUser && to == NodeType::kItem) return g.w_ub;
  if (from == NodeType::kItem && to == NodeType::kUser) return transpose(g.w_ub);
  throw ValidationError("no Item-Item relation in the network schema");
}

}  // namespace

MetaPath::MetaPath(std::vector<NodeType> types) : types_(std::move(types)) {
  if (types_.size() < 2) {
    throw ValidationError("meta-path needs at least two node types");
  }
  if (types_.front() != NodeType::kUser || types_.back() != NodeType::kItem) {
    throw ValidationError("meta-path must start at User and end at Item");
  }
}

MetaPath MetaPath::parse(std::string_view spec) {
  std::vector<NodeType> types;
  for (auto field : text::split(spec, ',')) types.push_back(parse_node_type(field));
  return MetaPath(std::move(types));
}

bool MetaPath::has_same_type_step() const noexcept {
  for (std::size_t i = 0; i + 1 < types_.size(); ++i) {
    if (types_[i] == types_[i + 1]) return true;
  }
  return false;
}

std::string MetaPath::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (i > 0) out += ',';
    out += type_code(types_[i]);
  }
  return out;
}

MetaPath user_item_path() { return MetaPath({NodeType::kUser, NodeType::kItem}); }

MetaPath user_user_item_path() {
  return MetaPath({NodeType::kUser, NodeType::kUser, NodeType::kItem});
}

void MempConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha " + text::format_double(alpha) + " outside [0,1]");
  }
  if (motif && !meta_path.has_same_type_step()) {
    throw ValidationError("motif " + mohin::to_string(*motif) +
                          " configured on meta-path " + meta_path.to_string() +
                          " which has no same-type step");
  }
}

std::string MempConfig::to_string() const {
  std::string out = meta_path.to_string();
  if (motif) out += "/" + mohin::to_string(*motif) + "@" + text::format_double(alpha);
  return out;
}

SparseMatrix blend(const SparseMatrix& w_edge, const SparseMatrix& w_motif,
                   double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("blend: alpha " + text::format_double(alpha) +
                          " outside [0,1]");
  }
  return add_scaled(w_edge, 1.0 - alpha, w_motif, alpha);
}

const SparseMatrix& MotifCache::get(MotifId m) {
  std::lock_guard lock(mu_);
  auto it = cache_.find(m);
  if (it == cache_.end()) it = cache_.emplace(m, motif_adjacency(*w_uu_, m)).first;
  return it->second;
}

SparseMatrix truncate_rows(const SparseMatrix& m, std::size_t max_nnz_per_row) {
  if (max_nnz_per_row == 0) return m;
  std::vector<std::size_t> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto rc = m.row_cols(i);
    const auto rv = m.row_values(i);
    order.resize(rc.size());
    for (std::size_t p = 0; p < rc.size(); ++p) order[p] = p;
    if (order.size() > max_nnz_per_row) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return rv[x] > rv[y]; });
      order.resize(max_nnz_per_row);
      std::sort(order.begin(), order.end());
    }
    for (std::size_t p : order) {
      cols.push_back(rc[p]);
      vals.push_back(rv[p]);
    }
    offsets.push_back(cols.size());
  }
  return SparseMatrix(m.rows(), m.cols(), std::move(offsets), std::move(cols),
                      std::move(vals));
}

SimilarityMatrix commuting_matrix(const HinGraph& graph, const MempConfig& config,
                                  const SimilarityOptions& options) {
  config.validate();
  const auto& types = config.meta_path.types();
  std::optional<MotifCache> local_cache;
  MotifCache* cache = options.motif_cache;

  auto step_matrix = [&](std::size_t s) {
    const NodeType from = types[s];
    const NodeType to = types[s + 1];
    SparseMatrix w = relation(graph, from, to);
    if (from == to && config.motif && config.alpha != 0.0) {
      if (cache == nullptr) cache = &local_cache.emplace(graph.w_uu);
      w = blend(w, cache->get(*config.motif), config.alpha);
    }
    return w;
  };

  SparseMatrix product = step_matrix(0);
  for (std::size_t s = 1; s < config.meta_path.steps(); ++s) {
    product = spmm(product, step_matrix(s));
  }
  return {truncate_rows(product, options.max_nnz_per_row), config};
}

std::size_t path_count_bruteforce(const HinGraph& graph, const MetaPath& path,
                                  std::size_t u, std::size_t b) {
  if (u >= graph.n_users() || b >= graph.n_items()) {
    throw ShapeError("path_count_bruteforce: (u, b) outside the id spaces");
  }
  std::vector<std::vector<Index>> trusts(graph.n_users());
  for (const auto& t : graph.w_uu.to_triplets()) trusts[t.row].push_back(t.col);
  std::vector<std::vector<Index>> rated_by_user(graph.n_users());
  std::vector<std::vector<Index>> raters_of_item(graph.n_items());
  for (const auto& r : graph.ratings.triples) {
    rated_by_user[r.user].push_back(r.item);
    raters_of_item[r.item].push_back(r.user);
  }
  const auto& types = path.types();
  auto neighbours = [&](NodeType from, NodeType to, Index node) -> const std::vector<Index>& {
    if (from == NodeType::kUser && to == NodeType::kUser) return trusts[node];
    if (from == NodeType::kUser && to == NodeType::kItem) return rated_by_user[node];
    if (from == NodeType::kItem && to == NodeType::kUser) return raters_of_item[node];
    throw ValidationError("no Item-Item relation in the network schema");
  };
  std::function<std::size_t(std::size_t, Index)> walk = [&](std::size_t pos,
                                                           Index node) -> std::size_t {
    if (pos + 1 == types.size()) return node == b ? 1 : 0;
    std::size_t total = 0;
    for (Index next : neighbours(types[pos], types[pos + 1], node)) {
      total += walk(pos + 1, next);
    }
    return total;
  };
  return walk(0, static_cast<Index>(u));
}

}  // namespace mohin
