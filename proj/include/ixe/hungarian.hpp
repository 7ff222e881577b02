#pragma once

#include <vector>

namespace ixe {

/// Result of a minimum-cost assignment. row_to_col[i] == -1 means row i is
/// unassigned (possible only when rows > cols). total_cost is the sum of the
/// original (unbiased) costs of the chosen pairs.
struct Assignment {
  std::vector<int> row_to_col;
  double total_cost = 0.0;
};

/// Minimum-cost rectangular assignment (shortest augmenting path, O(n^3)).
/// cost is row-major with n_rows * n_cols entries; all costs must be finite.
/// Among equal-cost optima the lowest (row, col) lexicographic assignment is
/// chosen via a tiny positional bias; for instances too large for the bias to
/// survive double rounding the solver still makes a fixed deterministic choice.
Assignment solve_assignment(const std::vector<double>& cost, int n_rows, int n_cols);

}  // namespace ixe
