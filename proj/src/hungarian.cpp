#include "ixe/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ixe {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One Dijkstra-style augmenting path from row i over the column potentials.
int augmenting_path(int nc, const std::vector<double>& cost, std::vector<double>& u,
                    std::vector<double>& v, std::vector<int>& path,
                    const std::vector<int>& row4col, std::vector<double>& shortest,
                    int i, std::vector<char>& sr, std::vector<char>& sc,
                    std::vector<int>& remaining, double* p_min_val) {
  double min_val = 0.0;
  int num_remaining = nc;
  for (int it = 0; it < nc; ++it) remaining[it] = nc - it - 1;
  std::fill(sr.begin(), sr.end(), 0);
  std::fill(sc.begin(), sc.end(), 0);
  std::fill(shortest.begin(), shortest.end(), kInf);

  int sink = -1;
  int cur = i;
  while (sink == -1) {
    int index = -1;
    double lowest = kInf;
    sr[cur] = 1;
    for (int it = 0; it < num_remaining; ++it) {
      const int j = remaining[it];
      const double r = min_val + cost[static_cast<size_t>(cur) * nc + j] - u[cur] - v[j];
      if (r < shortest[j]) {
        path[j] = cur;
        shortest[j] = r;
      }
      if (shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == -1)) {
        lowest = shortest[j];
        index = it;
      }
    }
    min_val = lowest;
    if (min_val == kInf) return -1;  // unreachable with finite costs
    const int j = remaining[index];
    if (row4col[j] == -1) {
      sink = j;
    } else {
      cur = row4col[j];
    }
    sc[j] = 1;
    remaining[index] = remaining[--num_remaining];
  }
  *p_min_val = min_val;
  return sink;
}

Assignment solve_impl(const std::vector<double>& cost, int nr, int nc) {
  std::vector<double> u(nr, 0.0), v(nc, 0.0), shortest(nc, 0.0);
  std::vector<int> path(nc, -1), col4row(nr, -1), row4col(nc, -1);
  std::vector<char> sr(nr, 0), sc(nc, 0);
  std::vector<int> remaining(nc, 0);

  for (int cur_row = 0; cur_row < nr; ++cur_row) {
    double min_val = 0.0;
    const int sink = augmenting_path(nc, cost, u, v, path, row4col, shortest, cur_row,
                                     sr, sc, remaining, &min_val);
    if (sink < 0) throw std::logic_error("assignment: infeasible instance");

    u[cur_row] += min_val;
    for (int i = 0; i < nr; ++i) {
      if (sr[i] && i != cur_row) u[i] += min_val - shortest[col4row[i]];
    }
    for (int j = 0; j < nc; ++j) {
      if (sc[j]) v[j] -= min_val - shortest[j];
    }

    int j = sink;
    while (true) {
      const int i = path[j];
      row4col[j] = i;
      std::swap(col4row[i], j);
      if (i == cur_row) break;
    }
  }

  Assignment out;
  out.row_to_col = std::move(col4row);
  return out;
}

}  // namespace

Assignment solve_assignment(const std::vector<double>& cost, int n_rows, int n_cols) {
  if (n_rows < 0 || n_cols < 0 ||
      cost.size() != static_cast<size_t>(n_rows) * static_cast<size_t>(n_cols)) {
    throw std::invalid_argument("assignment: cost size mismatch");
  }
  Assignment out;
  out.row_to_col.assign(n_rows, -1);
  if (n_rows == 0 || n_cols == 0) return out;

  const bool transpose = n_rows > n_cols;
  const int nr = transpose ? n_cols : n_rows;
  const int nc = transpose ? n_rows : n_cols;

  // Positional bias: lexicographic preference in the caller's (row, col)
  // order among equal-cost optima. eps * pow(K, -row) dominates all later
  // rows' contributions.
  const double eps = 1e-10;
  const double base = 1.0 / (n_cols + 1);
  std::vector<double> biased(static_cast<size_t>(nr) * nc);
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nc; ++j) {
      const int oi = transpose ? j : i;
      const int oj = transpose ? i : j;
      biased[static_cast<size_t>(i) * nc + j] =
          cost[static_cast<size_t>(oi) * n_cols + oj] +
          eps * std::pow(base, oi) * (oj + 1);
    }
  }

  Assignment sol = solve_impl(biased, nr, nc);
  double total = 0.0;
  for (int i = 0; i < nr; ++i) {
    const int j = sol.row_to_col[i];
    if (j < 0) continue;
    const int oi = transpose ? j : i;
    const int oj = transpose ? i : j;
    out.row_to_col[oi] = oj;
    total += cost[static_cast<size_t>(oi) * n_cols + oj];
  }
  out.total_cost = total;
  return out;
}

}  // namespace ixe
