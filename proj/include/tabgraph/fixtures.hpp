#pragma once

#include <string>
#include <vector>

#include "tabgraph/table.hpp"

namespace tabgraph {

// The income-statement table used across tests and the default grad-check
// target: a two-row merged header over two data rows.
//
//   +---------+---------------------+
//   | project | detail              |
//   |         +----------+----------+
//   |         | income   | cost     |
//   +---------+----------+----------+
//   | main business | 53,196,521.18 | 10,032,097.50 |
//   | other business | 1,979,858.56 | 919,511.13    |
//
inline TableGrid income_table() {
  std::vector<CellSpec> cells;
  auto add = [&](int r, int c, int rs, int cs, const char* text) {
    CellSpec s;
    s.row = r;
    s.col = c;
    s.row_span = rs;
    s.col_span = cs;
    s.text = text;
    cells.push_back(std::move(s));
  };
  add(0, 0, 2, 1, "project");
  add(0, 1, 1, 2, "detail");
  add(1, 1, 1, 1, "income");
  add(1, 2, 1, 1, "cost");
  add(2, 0, 1, 1, "main business");
  add(2, 1, 1, 1, "53,196,521.18");
  add(2, 2, 1, 1, "10,032,097.50");
  add(3, 0, 1, 1, "other business");
  add(3, 1, 1, 1, "1,979,858.56");
  add(3, 2, 1, 1, "919,511.13");
  return TableGrid::from_cells(4, 3, std::move(cells));
}

// Vertical layout: labels run down the first column, data spreads right.
inline TableGrid vertical_table() {
  std::vector<CellSpec> cells;
  auto add = [&](int r, int c, const char* text) {
    CellSpec s;
    s.row = r;
    s.col = c;
    s.text = text;
    cells.push_back(std::move(s));
  };
  const char* grid[4][5] = {
      {"region", "1.5", "2.5", "3.5", "4.5"},
      {"alpha", "10", "20", "30", "40"},
      {"beta", "11", "21", "31", "41"},
      {"gamma", "12", "22", "32", "42"},
  };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) add(i, j, grid[i][j]);
  return TableGrid::from_cells(4, 5, std::move(cells));
}

// Uniform grid of span-1 cells with distinct texts r{i}c{j}.
inline TableGrid uniform_grid(int n, int m) {
  std::vector<CellSpec> cells;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      CellSpec s;
      s.row = i;
      s.col = j;
      s.text = "r" + std::to_string(i) + "c" + std::to_string(j);
      cells.push_back(std::move(s));
    }
  }
  return TableGrid::from_cells(n, m, std::move(cells));
}

}  // namespace tabgraph
