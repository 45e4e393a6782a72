#pragma once

#include <string>
#include <vector>

#include "tabgraph/rng.hpp"
#include "tabgraph/table.hpp"

namespace tabgraph::testing {

// Random valid grid: start from span-1 cells, then merge random rectangles
// whose positions are all still unmerged singles.
inline TableGrid random_grid(SplitMix64& rng, int max_n = 6, int max_m = 6, int merges = 4) {
  int n = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_n)));
  int m = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_m)));
  std::vector<std::vector<bool>> merged(static_cast<std::size_t>(n),
                                        std::vector<bool>(static_cast<std::size_t>(m), false));
  std::vector<CellSpec> cells;

  static const char* words[] = {"project", "income",  "cost",  "alpha", "beta",
                                "42",      "3.5",     "12%",   "1,234", "main business",
                                "total",   "x",       "",      "north", "7.25"};

  for (int k = 0; k < merges; ++k) {
    int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m)));
    int rs = 1 + static_cast<int>(rng.next_below(3));
    int cs = 1 + static_cast<int>(rng.next_below(3));
    if (i + rs > n || j + cs > m || (rs == 1 && cs == 1)) continue;
    bool free = true;
    for (int r = i; r < i + rs && free; ++r)
      for (int c = j; c < j + cs && free; ++c)
        if (merged[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) free = false;
    if (!free) continue;
    for (int r = i; r < i + rs; ++r)
      for (int c = j; c < j + cs; ++c) merged[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = true;
    CellSpec cell;
    cell.row = i;
    cell.col = j;
    cell.row_span = rs;
    cell.col_span = cs;
    cell.text = words[rng.next_below(std::size(words))];
    cells.push_back(std::move(cell));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (merged[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
      CellSpec cell;
      cell.row = i;
      cell.col = j;
      cell.text = words[rng.next_below(std::size(words))];
      cells.push_back(std::move(cell));
    }
  }
  return TableGrid::from_cells(n, m, std::move(cells));
}

}  // namespace tabgraph::testing
