#include "mohin/dense_matrix.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "mohin/error.hpp"
#include "mohin/text.hpp"

namespace mohin {

double DenseMatrix::squared_norm() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

bool DenseMatrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void write_dense(std::ostream& out, const DenseMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j > 0) out << ' ';
      out << text::format_double(r[j]);
    }
    out << '\n';
  }
}

DenseMatrix read_dense(std::istream& in) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!(in >> rows >> cols)) throw ParseError("missing `n_rows n_cols` header", 1);
  DenseMatrix m(rows, cols);
  std::string token;
  for (std::size_t k = 0; k < rows * cols; ++k) {
    if (!(in >> token)) throw ParseError("truncated matrix body", 2 + k / (cols ? cols : 1));
    const auto v = text::parse_double(token);
    if (!v) throw ParseError("malformed value '" + token + "'", 2 + k / cols);
    m.data()[k] = *v;
  }
  return m;
}

}  // namespace mohin
