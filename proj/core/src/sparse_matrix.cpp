#include "mohin/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "mohin/error.hpp"
#include "mohin/text.hpp"

namespace mohin {

namespace {

std::string shape_str(const SparseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const SparseMatrix& a, const SparseMatrix& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) +
                     " vs " + shape_str(b));
  }
}

// Output of a row-range kernel before it is stitched into a matrix.
struct RowBlock {
  std::vector<std::size_t> row_nnz;
  std::vector<Index> cols;
  std::vector<double> vals;
};

void spmm_rows(const SparseMatrix& a, const SparseMatrix& b, std::size_t begin,
               std::size_t end, RowBlock& out) {
  const std::size_t n = b.cols();
  std::vector<double> acc(n, 0.0);
  std::vector<std::size_t> stamp(n, std::numeric_limits<std::size_t>::max());
  std::vector<Index> touched;
  out.row_nnz.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    touched.clear();
    const auto acols = a.row_cols(i);
    const auto avals = a.row_values(i);
    for (std::size_t p = 0; p < acols.size(); ++p) {
      const double av = avals[p];
      const auto bcols = b.row_cols(acols[p]);
      const auto bvals = b.row_values(acols[p]);
      for (std::size_t q = 0; q < bcols.size(); ++q) {
        const Index j = bcols[q];
        if (stamp[j] != i) {
          stamp[j] = i;
          acc[j] = 0.0;
          touched.push_back(j);
        }
        acc[j] += av * bvals[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    std::size_t kept = 0;
    for (Index j : touched) {
      if (acc[j] != 0.0) {
        out.cols.push_back(j);
        out.vals.push_back(acc[j]);
        ++kept;
      }
    }
    out.row_nnz.push_back(kept);
  }
}

SparseMatrix stitch(std::size_t n_rows, std::size_t n_cols,
                    std::vector<RowBlock>& blocks) {
  std::vector<std::size_t> offsets;
  offsets.reserve(n_rows + 1);
  offsets.push_back(0);
  std::size_t total = 0;
  for (const auto& blk : blocks) total += blk.cols.size();
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(total);
  vals.reserve(total);
  for (auto& blk : blocks) {
    for (std::size_t r : blk.row_nnz) offsets.push_back(offsets.back() + r);
    cols.insert(cols.end(), blk.cols.begin(), blk.cols.end());
    vals.insert(vals.end(), blk.vals.begin(), blk.vals.end());
    blk = RowBlock{};
  }
  return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols),
                      std::move(vals));
}

// Row-wise merge of two matrices with identical shapes; `combine` receives
// (value_a, value_b) with 0 standing in for a missing entry.
template <class Combine>
SparseMatrix merge_rows(const SparseMatrix& a, const SparseMatrix& b,
                        bool intersect_only, Combine combine) {
  std::vector<std::size_t> offsets{0};
  offsets.reserve(a.rows() + 1);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    const auto bc = b.row_cols(i);
    const auto bv = b.row_values(i);
    std::size_t p = 0;
    std::size_t q = 0;
    auto emit = [&](Index j, double v) {
      if (v != 0.0) {
        cols.push_back(j);
        vals.push_back(v);
      }
    };
    while (p < ac.size() || q < bc.size()) {
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        if (!intersect_only) emit(ac[p], combine(av[p], 0.0));
        ++p;
      } else if (p == ac.size() || bc[q] < ac[p]) {
        if (!intersect_only) emit(bc[q], combine(0.0, bv[q]));
        ++q;
      } else {
        emit(ac[p], combine(av[p], bv[q]));
        ++p;
        ++q;
      }
    }
    offsets.push_back(cols.size());
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols),
                      std::move(vals));
}

}  // namespace

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<Index> col_indices,
                           std::vector<double> values)
    : n_rows_(n_rows), n_cols_(n_cols) {
  if (n_cols > std::numeric_limits<Index>::max()) {
    throw ValidationError("SparseMatrix: column count exceeds index range");
  }
  if (row_offsets.size() != n_rows + 1 || row_offsets.front() != 0) {
    throw ValidationError("SparseMatrix: row_offsets must have n_rows+1 "
                          "entries starting at 0");
  }
  if (col_indices.size() != values.size() ||
      row_offsets.back() != col_indices.size()) {
    throw ValidationError("SparseMatrix: row_offsets/col_indices/values "
                          "lengths disagree");
  }
  bool has_zero = false;
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (row_offsets[i + 1] < row_offsets[i]) {
      throw ValidationError("SparseMatrix: row_offsets not monotone at row " +
                            std::to_string(i));
    }
    for (std::size_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p) {
      if (col_indices[p] >= n_cols) {
        throw ValidationError("SparseMatrix: column index out of range in row " +
                              std::to_string(i));
      }
      if (p > row_offsets[i] && col_indices[p] <= col_indices[p - 1]) {
        throw ValidationError("SparseMatrix: columns not strictly increasing "
                              "in row " + std::to_string(i));
      }
      const double v = values[p];
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("SparseMatrix: negative or non-finite value at (" +
                              std::to_string(i) + "," +
                              std::to_string(col_indices[p]) + ")");
      }
      has_zero = has_zero || v == 0.0;
    }
  }
  if (has_zero) {
    std::size_t out = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < n_rows; ++i) {
      const std::size_t end = row_offsets[i + 1];
      for (std::size_t p = begin; p < end; ++p) {
        if (values[p] != 0.0) {
          col_indices[out] = col_indices[p];
          values[out] = values[p];
          ++out;
        }
      }
      begin = end;
      row_offsets[i + 1] = out;
    }
    col_indices.resize(out);
    values.resize(out);
  }
  row_offsets_ = std::move(row_offsets);
  col_indices_ = std::move(col_indices);
  values_ = std::move(values);
}

SparseMatrix SparseMatrix::zero(std::size_t n_rows, std::size_t n_cols) {
  return SparseMatrix(n_rows, n_cols, std::vector<std::size_t>(n_rows + 1, 0),
                      {}, {});
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::vector<Index> cols(n);
  for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = static_cast<Index>(i);
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols) {
      throw ShapeError("from_triplets: coordinate (" + std::to_string(t.row) +
                       "," + std::to_string(t.col) + ") outside " +
                       std::to_string(n_rows) + "x" + std::to_string(n_cols));
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& x, const Triplet& y) {
                     return x.row != y.row ? x.row < y.row : x.col < y.col;
                   });
  std::vector<std::size_t> offsets(n_rows + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t p = 0; p < triplets.size(); ++p) {
    const auto& t = triplets[p];
    if (p > 0 && triplets[p - 1].row == t.row && triplets[p - 1].col == t.col) {
      vals.back() += t.value;
      continue;
    }
    cols.push_back(t.col);
    vals.push_back(t.value);
    ++offsets[t.row + 1];
  }
  for (std::size_t i = 0; i < n_rows; ++i) offsets[i + 1] += offsets[i];
  return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(
    const std::vector<std::vector<double>>& rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows == 0 ? 0 : rows.front().size();
  std::vector<std::size_t> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  for (const auto& row : rows) {
    if (row.size() != n_cols) throw ShapeError("from_dense: ragged rows");
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (row[j] != 0.0) {
        cols.push_back(static_cast<Index>(j));
        vals.push_back(row[j]);
      }
    }
    offsets.push_back(cols.size());
  }
  return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols),
                      std::move(vals));
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> out(n_rows_, std::vector<double>(n_cols_));
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      out[i][col_indices_[p]] = values_[p];
    }
  }
  return out;
}

std::vector<Triplet> SparseMatrix::to_triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      out.push_back({static_cast<Index>(i), col_indices_[p], values_[p]});
    }
  }
  return out;
}

bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
  return a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ &&
         a.row_offsets_ == b.row_offsets_ && a.col_indices_ == b.col_indices_ &&
         a.values_ == b.values_;
}

SparseMatrix spmm(const SparseMatrix& a, const SparseMatrix& b,
                  unsigned threads) {
  if (a.cols() != b.rows()) {
    throw ShapeError("spmm: inner dimensions differ " + shape_str(a) + " · " +
                     shape_str(b));
  }
  const std::size_t n = a.rows();
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, n / 64 + 1));
  std::vector<RowBlock> blocks(workers);
  if (workers == 1) {
    spmm_rows(a, b, 0, n, blocks[0]);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] { spmm_rows(a, b, begin, end, blocks[w]); });
    }
  }
  return stitch(n, b.cols(), blocks);
}

SparseMatrix masked_spmm(const SparseMatrix& a, const SparseMatrix& b,
                         const SparseMatrix& mask) {
  if (a.cols() != b.rows()) {
    throw ShapeError("masked_spmm: inner dimensions differ " + shape_str(a) +
                     " · " + shape_str(b));
  }
  if (mask.rows() != a.rows() || mask.cols() != b.cols()) {
    throw ShapeError("masked_spmm: mask shape " + shape_str(mask) +
                     " does not match product shape");
  }
  const SparseMatrix bt = transpose(b);
  std::vector<std::size_t> offsets{0};
  offsets.reserve(mask.rows() + 1);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < mask.rows(); ++i) {
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    const auto mc = mask.row_cols(i);
    const auto mv = mask.row_values(i);
    for (std::size_t t = 0; t < mc.size(); ++t) {
      const auto bc = bt.row_cols(mc[t]);
      const auto bv = bt.row_values(mc[t]);
      double dot = 0.0;
      bool any = false;
      std::size_t p = 0;
      std::size_t q = 0;
      while (p < ac.size() && q < bc.size()) {
        if (ac[p] < bc[q]) {
          ++p;
        } else if (bc[q] < ac[p]) {
          ++q;
        } else {
          dot = any ? dot + av[p] * bv[q] : av[p] * bv[q];
          any = true;
          ++p;
          ++q;
        }
      }
      const double v = dot * mv[t];
      if (any && v != 0.0) {
        cols.push_back(mc[t]);
        vals.push_back(v);
      }
    }
    offsets.push_back(cols.size());
  }
  return SparseMatrix(mask.rows(), mask.cols(), std::move(offsets),
                      std::move(cols), std::move(vals));
}

SparseMatrix hadamard(const SparseMatrix& a, const SparseMatrix& b) {
  require_same_shape(a, b, "hadamard");
  return merge_rows(a, b, true, [](double x, double y) { return x * y; });
}

SparseMatrix add_scaled(const SparseMatrix& a, double alpha_a,
                        const SparseMatrix& b, double alpha_b) {
  require_same_shape(a, b, "add_scaled");
  if (!std::isfinite(alpha_a) || !std::isfinite(alpha_b)) {
    throw ValidationError("add_scaled: coefficients must be finite");
  }
  return merge_rows(a, b, false, [&](double x, double y) {
    return alpha_a * x + alpha_b * y;
  });
}

SparseMatrix transpose(const SparseMatrix& a) {
  std::vector<std::size_t> offsets(a.cols() + 1, 0);
  for (Index j : a.col_indices()) ++offsets[j + 1];
  for (std::size_t j = 0; j < a.cols(); ++j) offsets[j + 1] += offsets[j];
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<Index> cols(a.nnz());
  std::vector<double> vals(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto rc = a.row_cols(i);
    const auto rv = a.row_values(i);
    for (std::size_t p = 0; p < rc.size(); ++p) {
      const std::size_t dst = cursor[rc[p]]++;
      cols[dst] = static_cast<Index>(i);
      vals[dst] = rv[p];
    }
  }
  return SparseMatrix(a.cols(), a.rows(), std::move(offsets), std::move(cols),
                      std::move(vals));
}

double entry(const SparseMatrix& a, std::size_t i, std::size_t j) {
  if (i >= a.rows() || j >= a.cols()) {
    throw ShapeError("entry: (" + std::to_string(i) + "," + std::to_string(j) +
                     ") outside " + shape_str(a));
  }
  const auto rc = a.row_cols(i);
  const auto it = std::lower_bound(rc.begin(), rc.end(), static_cast<Index>(j));
  if (it == rc.end() || *it != j) return 0.0;
  return a.row_values(i)[static_cast<std::size_t>(it - rc.begin())];
}

bool is_symmetric(const SparseMatrix& a) {
  return a.rows() == a.cols() && transpose(a) == a;
}

void write_coo(std::ostream& out, const SparseMatrix& a) {
  out << "# " << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto rc = a.row_cols(i);
    const auto rv = a.row_values(i);
    for (std::size_t p = 0; p < rc.size(); ++p) {
      out << i << '\t' << rc[p] << '\t' << text::format_double(rv[p]) << '\n';
    }
  }
}

SparseMatrix read_coo(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  bool have_header = false;
  std::vector<Triplet> triplets;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      if (!have_header && triplets.empty()) {
        const auto fields = text::split(body.substr(1), ' ');
        if (fields.size() == 3) {
          const auto r = text::parse_unsigned(fields[0]);
          const auto c = text::parse_unsigned(fields[1]);
          if (r && c) {
            n_rows = *r;
            n_cols = *c;
            have_header = true;
          }
        }
      }
      continue;
    }
    const auto fields = text::split(body, '\t');
    if (fields.size() != 3) throw ParseError("expected row<TAB>col<TAB>value", line_no);
    const auto r = text::parse_unsigned(fields[0]);
    const auto c = text::parse_unsigned(fields[1]);
    const auto v = text::parse_double(fields[2]);
    if (!r || !c || !v) throw ParseError("malformed coordinate entry", line_no);
    if (*r > std::numeric_limits<Index>::max() ||
        *c > std::numeric_limits<Index>::max()) {
      throw ParseError("index out of range", line_no);
    }
    triplets.push_back({static_cast<Index>(*r), static_cast<Index>(*c), *v});
  }
  if (!have_header) {
    for (const auto& t : triplets) {
      n_rows = std::max<std::size_t>(n_rows, t.row + 1);
      n_cols = std::max<std::size_t>(n_cols, t.col + 1);
    }
  }
  return SparseMatrix::from_triplets(n_rows, n_cols, std::move(triplets));
}

}  // namespace mohin
