#include "mohin/motif.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "mohin/error.hpp"

namespace mohin {

namespace {

// (X·Y) ∘ Z
SparseMatrix term(const SparseMatrix& x, const SparseMatrix& y,
                  const SparseMatrix& z) {
  return masked_spmm(x, y, z);
}

SparseMatrix sum(const SparseMatrix& a, const SparseMatrix& b) {
  return add_scaled(a, 1.0, b, 1.0);
}

SparseMatrix sum(const SparseMatrix& a, const SparseMatrix& b,
                 const SparseMatrix& c) {
  return sum(sum(a, b), c);
}

using Pattern = std::array<std::array<bool, 3>, 3>;

// pattern[x][y] is true when the motif has an edge from position x to y.
Pattern motif_pattern(MotifId m) {
  Pattern p{};
  auto edge = [&p](int x, int y) { p[x][y] = true; };
  auto both = [&p](int x, int y) { p[x][y] = p[y][x] = true; };
  switch (m) {
    case MotifId::kM1:
      edge(0, 1), edge(1, 2), edge(2, 0);
      break;
    case MotifId::kM2:
      both(0, 1), edge(1, 2), edge(2, 0);
      break;
    case MotifId::kM3:
      both(0, 1), both(1, 2), edge(2, 0);
      break;
    case MotifId::kM4:
      both(0, 1), both(1, 2), both(2, 0);
      break;
    case MotifId::kM5:
      edge(0, 1), edge(1, 2), edge(0, 2);
      break;
    case MotifId::kM6:
      edge(0, 1), edge(0, 2), both(1, 2);
      break;
    case MotifId::kM7:
      edge(1, 0), edge(2, 0), both(1, 2);
      break;
  }
  return p;
}

}  // namespace

std::string to_string(MotifId m) {
  return "M" + std::to_string(static_cast<int>(m) + 1);
}

MotifId parse_motif(std::string_view name) {
  if (name.size() == 2 && std::toupper(static_cast<unsigned char>(name[0])) == 'M' &&
      name[1] >= '1' && name[1] <= '7') {
    return static_cast<MotifId>(name[1] - '1');
  }
  throw UsageError("unknown motif '" + std::string(name) + "' (expected M1..M7)");
}

void validate_simple_digraph(const SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw ValidationError("motif: adjacency matrix must be square, got " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto rc = a.row_cols(i);
    const auto rv = a.row_values(i);
    for (std::size_t p = 0; p < rc.size(); ++p) {
      if (rc[p] == i) {
        throw ValidationError("motif: self-loop on node " + std::to_string(i));
      }
      if (rv[p] != 1.0) {
        throw ValidationError("motif: adjacency matrix must be binary");
      }
    }
  }
}

EdgeSplit split_edges(const SparseMatrix& a) {
  validate_simple_digraph(a);
  EdgeSplit s;
  s.bidir = hadamard(a, transpose(a));
  s.unidir = add_scaled(a, 1.0, s.bidir, -1.0);
  return s;
}

SparseMatrix motif_adjacency(const SparseMatrix& a, MotifId m) {
  const auto [b, u] = split_edges(a);
  const SparseMatrix ut = transpose(u);
  switch (m) {
    case MotifId::kM1: {
      const auto c = term(u, u, ut);
      return sum(c, transpose(c));
    }
    case MotifId::kM2: {
      const auto c = sum(term(b, u, ut), term(u, b, ut), term(u, u, b));
      return sum(c, transpose(c));
    }
    case MotifId::kM3: {
      const auto c = sum(term(b, b, u), term(b, u, b), term(u, b, b));
      return sum(c, transpose(c));
    }
    case MotifId::kM4:
      return term(b, b, b);
    case MotifId::kM5: {
      const auto c = sum(term(u, u, u), term(u, ut, u), term(ut, u, u));
      return sum(c, transpose(c));
    }
    case MotifId::kM6:
      return sum(term(u, b, u), term(b, ut, ut), term(ut, u, b));
    case MotifId::kM7:
      return sum(term(ut, b, ut), term(b, u, u), term(u, ut, b));
  }
  return SparseMatrix::zero(a.rows(), a.cols());
}

SparseMatrix motif_adjacency_bruteforce(const SparseMatrix& a, MotifId m) {
  validate_simple_digraph(a);
  const std::size_t n = a.rows();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const auto& t : a.to_triplets()) adj[t.row][t.col] = true;

  const Pattern pattern = motif_pattern(m);
  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        std::array<std::size_t, 3> nodes{i, j, k};
        bool match = false;
        // Try every assignment of the triple to the motif positions.
        do {
          bool same = true;
          for (int x = 0; x < 3 && same; ++x) {
            for (int y = 0; y < 3 && same; ++y) {
              if (x != y && adj[nodes[x]][nodes[y]] != pattern[x][y]) same = false;
            }
          }
          match = same;
        } while (!match && std::next_permutation(nodes.begin(), nodes.end()));
        if (!match) continue;
        for (auto [p, q] : {std::pair{i, j}, std::pair{i, k}, std::pair{j, k}}) {
          counts[p][q] += 1.0;
          counts[q][p] += 1.0;
        }
      }
    }
  }
  if (n == 0) return SparseMatrix::zero(0, 0);
  return SparseMatrix::from_dense(counts);
}

}  // namespace mohin
