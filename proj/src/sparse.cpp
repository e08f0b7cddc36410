#include "nlmol/sparse.hpp"

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlmol {

double SparseMatrix::at(std::size_t i, int j) const {
  const auto c = row_cols(i);
  const auto it = std::lower_bound(c.begin(), c.end(), j);
  if (it == c.end() || *it != j) return 0.0;
  return vals[row_ptr[i] + static_cast<std::size_t>(it - c.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_rows; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  }
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : vals) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::inf_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += std::abs(vals[k]);
    m = std::max(m, s);
  }
  return m;
}

SparseMatrix transpose(const SparseMatrix& a) {
  SparseMatrix t;
  t.n_rows = a.n_cols;
  t.n_cols = a.n_rows;
  t.row_ptr.assign(t.n_rows + 1, 0);
  for (int c : a.cols) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < t.n_rows; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.cols.resize(a.nnz());
  t.vals.resize(a.nnz());
  std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t i = 0; i < a.n_rows; ++i)
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::size_t dst = next[a.cols[k]]++;
      t.cols[dst] = static_cast<int>(i);
      t.vals[dst] = a.vals[k];
    }
  return t;
}

namespace {

// Walks the union of the patterns of row i in a and b.
template <class F>
void merge_rows(const SparseMatrix& a, const SparseMatrix& b, std::size_t i, F&& f) {
  std::size_t ka = a.row_ptr[i], kb = b.row_ptr[i];
  const std::size_t ea = a.row_ptr[i + 1], eb = b.row_ptr[i + 1];
  while (ka < ea || kb < eb) {
    if (kb == eb || (ka < ea && a.cols[ka] < b.cols[kb])) {
      f(a.cols[ka], a.vals[ka], 0.0);
      ++ka;
    } else if (ka == ea || b.cols[kb] < a.cols[ka]) {
      f(b.cols[kb], 0.0, b.vals[kb]);
      ++kb;
    } else {
      f(a.cols[ka], a.vals[ka], b.vals[kb]);
      ++ka;
      ++kb;
    }
  }
}

}  // namespace

SparseMatrix symmetrize(const SparseMatrix& a) {
  if (a.n_rows != a.n_cols) throw std::invalid_argument("symmetrize needs a square matrix");
  const SparseMatrix t = transpose(a);
  SparseMatrix s;
  s.n_rows = a.n_rows;
  s.n_cols = a.n_cols;
  s.row_ptr.assign(1, 0);
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    merge_rows(a, t, i, [&](int c, double x, double y) {
      s.cols.push_back(c);
      s.vals.push_back(0.5 * (x + y));
    });
    s.row_ptr.push_back(s.cols.size());
  }
  return s;
}

double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.n_rows != b.n_rows || a.n_cols != b.n_cols) throw std::invalid_argument("matrix shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.n_rows; ++i)
    merge_rows(a, b, i, [&](int, double x, double y) { m = std::max(m, std::abs(x - y)); });
  return m;
}

double asymmetry_inf_norm(const SparseMatrix& a) {
  const SparseMatrix t = transpose(a);
  double m = 0.0;
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    double s = 0.0;
    merge_rows(a, t, i, [&](int, double x, double y) { s += std::abs(x - y); });
    m = std::max(m, s);
  }
  return m;
}

SparseMatrix extract(const SparseMatrix& a, std::span<const int> rows, std::span<const int> col_map,
                     std::size_t n_new_cols) {
  SparseMatrix out;
  out.n_rows = rows.size();
  out.n_cols = n_new_cols;
  out.row_ptr.assign(1, 0);
  for (int r : rows) {
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const int c = col_map[a.cols[k]];
      if (c < 0) continue;
      out.cols.push_back(c);
      out.vals.push_back(a.vals[k]);
    }
    out.row_ptr.push_back(out.cols.size());
  }
  return out;
}

RowAssembler::RowAssembler(std::size_t n_rows, std::size_t n_cols, std::vector<int> expected)
    : n_cols_(n_cols),
      remaining_(std::move(expected)),
      pending_(n_rows),
      row_cols_(n_rows),
      row_vals_(n_rows),
      scatter_(n_cols, 0.0),
      mark_(n_cols, 0) {
  if (remaining_.size() != n_rows) throw std::invalid_argument("expected-count size mismatch");
}

void RowAssembler::add(RowFragment fragment) {
  auto shared = std::make_shared<const RowFragment>(std::move(fragment));
  std::vector<std::size_t> done;
  for (std::size_t r = 0; r < shared->rows.size(); ++r) {
    const auto i = static_cast<std::size_t>(shared->rows[r]);
    pending_[i].push_back({shared, static_cast<int>(r)});
    if (--remaining_[i] == 0) done.push_back(i);
  }
  for (std::size_t i : done) finalize_row(i);
}

void RowAssembler::finalize_row(std::size_t i) {
  auto& pieces = pending_[i];
  std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    return a.fragment->source < b.fragment->source;
  });
  std::vector<int> touched;
  for (const auto& p : pieces) {
    const auto& f = *p.fragment;
    const double* v = f.vals.data() + static_cast<std::size_t>(p.local_row) * f.cols.size();
    for (std::size_t c = 0; c < f.cols.size(); ++c) {
      const int col = f.cols[c];
      if (!mark_[col]) {
        mark_[col] = 1;
        scatter_[col] = 0.0;
        touched.push_back(col);
      }
      scatter_[col] += v[c];
    }
  }
  std::sort(touched.begin(), touched.end());
  auto& rc = row_cols_[i];
  auto& rv = row_vals_[i];
  // Rows finalized twice (late fragments) keep their earlier entries.
  std::vector<int> old_cols;
  std::vector<double> old_vals;
  old_cols.swap(rc);
  old_vals.swap(rv);
  rc.reserve(old_cols.size() + touched.size());
  rv.reserve(old_cols.size() + touched.size());
  std::size_t k = 0;
  for (int col : touched) {
    while (k < old_cols.size() && old_cols[k] < col) {
      rc.push_back(old_cols[k]);
      rv.push_back(old_vals[k]);
      ++k;
    }
    double value = scatter_[col];
    if (k < old_cols.size() && old_cols[k] == col) value = old_vals[k++] + value;
    rc.push_back(col);
    rv.push_back(value);
    mark_[col] = 0;
  }
  for (; k < old_cols.size(); ++k) {
    rc.push_back(old_cols[k]);
    rv.push_back(old_vals[k]);
  }
  pieces.clear();
  pieces.shrink_to_fit();
}

SparseMatrix RowAssembler::finish() {
  for (std::size_t i = 0; i < pending_.size(); ++i)
    if (!pending_[i].empty()) finalize_row(i);
  SparseMatrix m;
  m.n_rows = pending_.size();
  m.n_cols = n_cols_;
  std::size_t nnz = 0;
  for (const auto& r : row_cols_) nnz += r.size();
  m.cols.reserve(nnz);
  m.vals.reserve(nnz);
  m.row_ptr.assign(1, 0);
  for (std::size_t i = 0; i < m.n_rows; ++i) {
    m.cols.insert(m.cols.end(), row_cols_[i].begin(), row_cols_[i].end());
    m.vals.insert(m.vals.end(), row_vals_[i].begin(), row_vals_[i].end());
    m.row_ptr.push_back(m.cols.size());
    std::vector<int>().swap(row_cols_[i]);
    std::vector<double>().swap(row_vals_[i]);
#ifdef __GLIBC__
    // Hand the freed row storage back so the copy does not double the peak.
    if (i % 4096 == 4095) malloc_trim(0);
#endif
  }
  return m;
}

}  // namespace nlmol
