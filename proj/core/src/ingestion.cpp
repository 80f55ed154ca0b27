#include "mohin/ingestion.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <utility>

#include "mohin/error.hpp"
#include "mohin/text.hpp"

namespace mohin {

namespace {

// Calls `fn(fields, line_no)` for every data record.
template <class Fn>
void for_each_record(std::istream& in, Delimiter delim, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  const char sep = delimiter_char(delim);
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    fn(text::split(body, sep), line_no);
  }
}

std::pair<Index, Index> ordered_pair(Index a, Index b) { return {a, b}; }

struct PairHash {
  std::size_t operator()(const std::pair<Index, Index>& p) const noexcept {
    return (static_cast<std::size_t>(p.first) << 32) ^ p.second;
  }
};

SparseMatrix binary_from_pairs(std::size_t n_rows, std::size_t n_cols,
                               const std::vector<std::pair<Index, Index>>& pairs) {
  std::vector<Triplet> trips;
  trips.reserve(pairs.size());
  for (const auto& [r, c] : pairs) trips.push_back({r, c, 1.0});
  auto m = SparseMatrix::from_triplets(n_rows, n_cols, std::move(trips));
  // Duplicates were summed; clamp back to 1.
  std::vector<double> ones(m.nnz(), 1.0);
  return SparseMatrix(
      m.rows(), m.cols(),
      std::vector<std::size_t>(m.row_offsets().begin(), m.row_offsets().end()),
      std::vector<Index>(m.col_indices().begin(), m.col_indices().end()),
      std::move(ones));
}

std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("cannot open " + p.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

}  // namespace

Delimiter parse_delimiter(std::string_view name) {
  if (name == "comma" || name == ",") return Delimiter::kComma;
  if (name == "tab" || name == "\t" || name == "\\t") return Delimiter::kTab;
  if (name == "space" || name == " ") return Delimiter::kSpace;
  throw UsageError("unknown delimiter '" + std::string(name) +
                   "' (expected comma, tab or space)");
}

char delimiter_char(Delimiter d) noexcept {
  switch (d) {
    case Delimiter::kComma:
      return ',';
    case Delimiter::kSpace:
      return ' ';
    case Delimiter::kTab:
      break;
  }
  return '\t';
}

Index LabelMap::intern(std::string_view label) {
  auto [it, inserted] =
      index_.try_emplace(std::string(label), static_cast<Index>(labels_.size()));
  if (inserted) labels_.emplace_back(label);
  return it->second;
}

std::optional<Index> LabelMap::find(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

RatingDataset RatingDataset::with_triples(std::vector<Rating> subset) const {
  RatingDataset out;
  out.triples = std::move(subset);
  out.n_users = n_users;
  out.n_items = n_items;
  out.user_labels = user_labels;
  out.item_labels = item_labels;
  return out;
}

RatingDataset parse_ratings(std::istream& in, Delimiter delim) {
  auto users = std::make_shared<LabelMap>();
  auto items = std::make_shared<LabelMap>();
  std::vector<Rating> triples;
  std::unordered_map<std::pair<Index, Index>, std::size_t, PairHash> seen;
  for_each_record(in, delim, [&](const auto& fields, std::size_t line_no) {
    if (fields.size() < 3) {
      throw ParseError("expected user, item and rating fields", line_no);
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError("empty user or item label", line_no);
    }
    const auto value = text::parse_double(fields[2]);
    if (!value) {
      throw ParseError("rating '" + std::string(fields[2]) + "' is not numeric",
                       line_no);
    }
    if (!(*value >= 1.0 && *value <= 5.0)) {
      throw ValidationError("line " + std::to_string(line_no) + ": rating " +
                            std::string(fields[2]) + " outside [1,5]");
    }
    const Index u = users->intern(fields[0]);
    const Index b = items->intern(fields[1]);
    const auto [it, inserted] = seen.try_emplace(ordered_pair(u, b), triples.size());
    if (inserted) {
      triples.push_back({u, b, *value});
    } else {
      triples[it->second].rating = *value;
    }
  });
  RatingDataset ds;
  ds.triples = std::move(triples);
  ds.n_users = users->size();
  ds.n_items = items->size();
  ds.user_labels = std::move(users);
  ds.item_labels = std::move(items);
  return ds;
}

TrustParseResult parse_trust(std::istream& in, const LabelMap& users,
                             Delimiter delim) {
  TrustParseResult result;
  std::vector<std::pair<Index, Index>> edges;
  for_each_record(in, delim, [&](const auto& fields, std::size_t line_no) {
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("expected truster and trustee fields", line_no);
    }
    ++result.edges_read;
    const auto from = users.find(fields[0]);
    const auto to = users.find(fields[1]);
    if (!from || !to) {
      ++result.dropped_unknown;
      return;
    }
    if (*from == *to) {
      ++result.dropped_self_loops;
      return;
    }
    edges.emplace_back(*from, *to);
  });
  result.matrix = binary_from_pairs(users.size(), users.size(), edges);
  return result;
}

EdgeList parse_edge_list(std::istream& in, Delimiter delim) {
  EdgeList out;
  std::vector<std::pair<Index, Index>> edges;
  for_each_record(in, delim, [&](const auto& fields, std::size_t line_no) {
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("expected source and target fields", line_no);
    }
    const Index from = out.labels.intern(fields[0]);
    const Index to = out.labels.intern(fields[1]);
    if (from == to) {
      ++out.dropped_self_loops;
      return;
    }
    edges.emplace_back(from, to);
  });
  const std::size_t n = out.labels.size();
  out.matrix = binary_from_pairs(n, n, edges);
  return out;
}

HinGraph build_hin(RatingDataset ratings, const SparseMatrix& trust) {
  if (trust.rows() != ratings.n_users || trust.cols() != ratings.n_users) {
    throw ShapeError("build_hin: trust matrix is " + std::to_string(trust.rows()) +
                     "x" + std::to_string(trust.cols()) + " but there are " +
                     std::to_string(ratings.n_users) + " users");
  }
  std::vector<std::pair<Index, Index>> trust_pairs;
  trust_pairs.reserve(trust.nnz());
  for (const auto& t : trust.to_triplets()) {
    if (t.row == t.col) {
      throw ValidationError("build_hin: self-trust on user " + std::to_string(t.row));
    }
    trust_pairs.emplace_back(t.row, t.col);
  }
  std::vector<std::pair<Index, Index>> rated;
  rated.reserve(ratings.triples.size());
  for (const auto& r : ratings.triples) {
    if (r.user >= ratings.n_users || r.item >= ratings.n_items) {
      throw ShapeError("build_hin: rating references id outside the id space");
    }
    rated.emplace_back(r.user, r.item);
  }
  HinGraph g;
  g.w_uu = binary_from_pairs(ratings.n_users, ratings.n_users, trust_pairs);
  g.w_ub = binary_from_pairs(ratings.n_users, ratings.n_items, rated);
  g.ratings = std::move(ratings);
  return g;
}

DatasetStats stats(const HinGraph& graph) {
  return {graph.n_users(), graph.n_items(), graph.ratings.triples.size(),
          graph.w_uu.nnz()};
}

void write_canonical(const std::filesystem::path& dir, const HinGraph& graph) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "ratings.tsv");
    for (const auto& r : graph.ratings.triples) {
      out << graph.user_labels().label(r.user) << '\t'
          << graph.item_labels().label(r.item) << '\t'
          << text::format_double(r.rating) << '\n';
    }
  }
  {
    auto out = open_output(dir / "trust.tsv");
    for (const auto& t : graph.w_uu.to_triplets()) {
      out << graph.user_labels().label(t.row) << '\t'
          << graph.user_labels().label(t.col) << '\n';
    }
  }
  {
    auto out = open_output(dir / "w_uu.coo");
    write_coo(out, graph.w_uu);
  }
  {
    auto out = open_output(dir / "w_ub.coo");
    write_coo(out, graph.w_ub);
  }
}

HinGraph load_canonical(const std::filesystem::path& dir) {
  auto rin = open_input(dir / "ratings.tsv");
  RatingDataset ratings = parse_ratings(rin, Delimiter::kTab);
  auto tin = open_input(dir / "trust.tsv");
  auto trust = parse_trust(tin, *ratings.user_labels, Delimiter::kTab);
  return build_hin(std::move(ratings), trust.matrix);
}

}  // namespace mohin
