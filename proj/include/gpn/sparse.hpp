#pragma once

#include <cstddef>
#include <vector>

namespace gpn {

// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;  // size rows + 1
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return col_idx.size(); }

  // Dense lookup, O(log row length). Zero when the entry is not stored.
  double at(std::size_t r, std::size_t c) const;

  std::vector<double> to_dense() const;
};

}  // namespace gpn
