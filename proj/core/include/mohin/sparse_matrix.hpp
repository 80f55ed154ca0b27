#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace mohin {

using Index = std::uint32_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Compressed sparse row matrix of non-negative reals.
//
// Invariants enforced by every constructor:
//   - row_offsets has n_rows + 1 entries, starts at 0, ends at nnz, monotone
//   - column indices strictly increase within a row
//   - every stored value is finite, non-negative and non-zero
//
// Instances are immutable once built, so any kernel may read a shared matrix
// from several threads.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // Takes ownership of CSR arrays. Explicit zeros are compacted away; any
  // other invariant violation throws ValidationError.
  SparseMatrix(std::size_t n_rows, std::size_t n_cols,
               std::vector<std::size_t> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values);

  static SparseMatrix zero(std::size_t n_rows, std::size_t n_cols);
  static SparseMatrix identity(std::size_t n);
  // Duplicate coordinates are summed.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix from_dense(
      const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return n_rows_; }
  std::size_t cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept {
    return row_offsets_;
  }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const Index> row_cols(std::size_t i) const noexcept {
    return {col_indices_.data() + row_offsets_[i],
            row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const noexcept {
    return {values_.data() + row_offsets_[i],
            row_offsets_[i + 1] - row_offsets_[i]};
  }

  std::vector<std::vector<double>> to_dense() const;
  std::vector<Triplet> to_triplets() const;

  // Exact structural and value equality.
  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b);

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

// A·B using a per-row sparse accumulator. Rows are accumulated in ascending
// order of the inner index, so the result is independent of `threads`.
SparseMatrix spmm(const SparseMatrix& a, const SparseMatrix& b,
                  unsigned threads = 1);

// (A·B) ∘ M evaluated only at the stored positions of M. Bit-identical to
// hadamard(spmm(a, b), mask) since each dot product runs in ascending inner
// index order.
SparseMatrix masked_spmm(const SparseMatrix& a, const SparseMatrix& b,
                         const SparseMatrix& mask);

SparseMatrix hadamard(const SparseMatrix& a, const SparseMatrix& b);

// alpha_a·A + alpha_b·B. A negative result entry throws ValidationError.
SparseMatrix add_scaled(const SparseMatrix& a, double alpha_a,
                        const SparseMatrix& b, double alpha_b);

SparseMatrix transpose(const SparseMatrix& a);

// Stored value at (i, j) or 0. Throws ShapeError when out of range.
double entry(const SparseMatrix& a, std::size_t i, std::size_t j);

bool is_symmetric(const SparseMatrix& a);

// Coordinate-list dump: a `# n_rows n_cols nnz` header, then
// `row<TAB>col<TAB>value` per stored entry in row-major order. Values are
// written in shortest round-trip form.
void write_coo(std::ostream& out, const SparseMatrix& a);
SparseMatrix read_coo(std::istream& in);

}  // namespace mohin
