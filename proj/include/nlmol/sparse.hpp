#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nlmol {

/// Compressed sparse rows with sorted, unique column indices per row.
struct SparseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<int> cols;
  std::vector<double> vals;

  [[nodiscard]] std::size_t nnz() const { return vals.size(); }
  [[nodiscard]] std::span<const int> row_cols(std::size_t i) const {
    return {cols.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }
  [[nodiscard]] std::span<const double> row_vals(std::size_t i) const {
    return {vals.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }
  /// Entry (i, j), zero when not stored.
  [[nodiscard]] double at(std::size_t i, int j) const;
  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const;
  [[nodiscard]] double max_abs() const;
  /// Maximum absolute row sum.
  [[nodiscard]] double inf_norm() const;
};

[[nodiscard]] SparseMatrix transpose(const SparseMatrix& a);
/// (A + A^T) / 2; requires a square matrix.
[[nodiscard]] SparseMatrix symmetrize(const SparseMatrix& a);
/// max |a_ij - b_ij| over the union of both patterns.
[[nodiscard]] double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b);
/// ||A - A^T||_inf.
[[nodiscard]] double asymmetry_inf_norm(const SparseMatrix& a);
/// Rows listed in `rows`, columns listed in `cols` (index maps of length
/// n_cols with -1 for dropped columns).
[[nodiscard]] SparseMatrix extract(const SparseMatrix& a, std::span<const int> rows,
                                   std::span<const int> col_map, std::size_t n_new_cols);

/// One inner element's contribution to a set of rows: a dense block over a
/// sorted column list.
struct RowFragment {
  int source = 0;  ///< inner element id; fragments are summed in this order
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> vals;  ///< rows.size() x cols.size(), row-major
};

/// Merges fragments row by row. A row is finalized as soon as every expected
/// fragment has arrived, which bounds the live fragment memory.
class RowAssembler {
 public:
  /// expected[i] = number of fragments that will touch row i.
  RowAssembler(std::size_t n_rows, std::size_t n_cols, std::vector<int> expected);

  void add(RowFragment fragment);
  /// Finalizes any remaining rows and returns the matrix.
  [[nodiscard]] SparseMatrix finish();

 private:
  struct Piece {
    std::shared_ptr<const RowFragment> fragment;
    int local_row;
  };
  void finalize_row(std::size_t i);

  std::size_t n_cols_;
  std::vector<int> remaining_;
  std::vector<std::vector<Piece>> pending_;
  std::vector<std::vector<int>> row_cols_;
  std::vector<std::vector<double>> row_vals_;
  std::vector<double> scatter_;
  std::vector<char> mark_;
};

}  // namespace nlmol
