#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tabgraph/error.hpp"

namespace tabgraph {

using ordered_json = nlohmann::ordered_json;

// One (possibly merged) cell. (row, col) is the top-left coordinate of the
// span region; merged regions keep a single CellSpec.
struct CellSpec {
  int row = 0;
  int col = 0;
  int row_span = 1;
  int col_span = 1;
  std::string text;
  bool th_hint = false;  // parser hint only; role authority is structure analysis

  bool covers(int i, int j) const {
    return i >= row && i < row + row_span && j >= col && j < col + col_span;
  }

  friend bool operator==(const CellSpec& a, const CellSpec& b) {
    return a.row == b.row && a.col == b.col && a.row_span == b.row_span &&
           a.col_span == b.col_span && a.text == b.text;
  }
};

// Canonical rectangular grid. Construction validates full coverage: every
// position is owned by exactly one cell span, spans are disjoint rectangles.
class TableGrid {
 public:
  TableGrid() = default;

  static TableGrid from_cells(int n_rows, int n_cols, std::vector<CellSpec> cells) {
    if (n_rows < 1 || n_cols < 1) throw Error(Errc::empty_table, "grid must be at least 1x1");
    TableGrid g;
    g.n_rows_ = n_rows;
    g.n_cols_ = n_cols;
    std::sort(cells.begin(), cells.end(), [](const CellSpec& a, const CellSpec& b) {
      return std::pair(a.row, a.col) < std::pair(b.row, b.col);
    });
    g.cells_ = std::move(cells);
    g.owner_.assign(static_cast<std::size_t>(n_rows) * n_cols, -1);
    for (std::size_t idx = 0; idx < g.cells_.size(); ++idx) {
      const CellSpec& c = g.cells_[idx];
      if (c.row < 0 || c.col < 0 || c.row_span < 1 || c.col_span < 1 ||
          c.row + c.row_span > n_rows || c.col + c.col_span > n_cols) {
        throw Error(Errc::malformed_table,
                    "cell at (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                        ") spans outside the grid");
      }
      for (int i = c.row; i < c.row + c.row_span; ++i) {
        for (int j = c.col; j < c.col + c.col_span; ++j) {
          int& slot = g.owner_[static_cast<std::size_t>(i) * n_cols + j];
          if (slot != -1) {
            throw Error(Errc::malformed_table,
                        "overlapping spans at (" + std::to_string(i) + "," + std::to_string(j) + ")");
          }
          slot = static_cast<int>(idx);
        }
      }
    }
    for (int i = 0; i < n_rows; ++i) {
      for (int j = 0; j < n_cols; ++j) {
        if (g.owner_[static_cast<std::size_t>(i) * n_cols + j] == -1) {
          throw Error(Errc::malformed_table,
                      "uncovered position (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
      }
    }
    return g;
  }

  int n_rows() const { return n_rows_; }
  int n_cols() const { return n_cols_; }
  const std::vector<CellSpec>& cells() const { return cells_; }

  int owner_index(int i, int j) const {
    if (i < 0 || i >= n_rows_ || j < 0 || j >= n_cols_)
      throw Error(Errc::row_out_of_range,
                  "position (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    return owner_[static_cast<std::size_t>(i) * n_cols_ + j];
  }

  const CellSpec& owner(int i, int j) const { return cells_[owner_index(i, j)]; }

  // Distinct owning cells of row i, left to right.
  std::vector<int> row_owner_indices(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n_cols_; ++j) {
      int idx = owner_index(i, j);
      if (out.empty() || out.back() != idx) {
        if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
      }
    }
    return out;
  }

  // Distinct owning cells of column j, top to bottom.
  std::vector<int> col_owner_indices(int j) const {
    std::vector<int> out;
    for (int i = 0; i < n_rows_; ++i) {
      int idx = owner_index(i, j);
      if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
    }
    return out;
  }

  friend bool operator==(const TableGrid& a, const TableGrid& b) {
    return a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ && a.cells_ == b.cells_;
  }

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<CellSpec> cells_;  // sorted by (row, col)
  std::vector<int> owner_;       // position -> index into cells_
};

// Optional task labels carried next to a table.
struct TaskAnnotation {
  std::map<std::pair<int, int>, std::string> cell_labels;  // (row, col) of top-left -> label
  std::optional<std::string> table_label;
  std::vector<std::pair<std::string, std::string>> qa_pairs;

  bool has_cell_labels() const { return !cell_labels.empty(); }

  // When cell labels are present they must cover every cell exactly once.
  void validate_against(const TableGrid& grid) const {
    if (cell_labels.empty()) return;
    if (cell_labels.size() != grid.cells().size())
      throw Error(Errc::missing_annotation,
                  "cell_labels must cover every cell exactly once (got " +
                      std::to_string(cell_labels.size()) + " labels for " +
                      std::to_string(grid.cells().size()) + " cells)");
    for (const CellSpec& c : grid.cells()) {
      if (!cell_labels.count({c.row, c.col}))
        throw Error(Errc::missing_annotation, "no label for cell (" + std::to_string(c.row) + "," +
                                                  std::to_string(c.col) + ")");
    }
  }
};

// ---- canonical table JSON ----
// {n_rows, n_cols, cells: [{row, col, row_span, col_span, text}]} with cells
// sorted by (row, col). This exact shape and ordering is the fixture contract.

inline ordered_json table_to_json(const TableGrid& grid) {
  ordered_json j;
  j["n_rows"] = grid.n_rows();
  j["n_cols"] = grid.n_cols();
  ordered_json cells = ordered_json::array();
  for (const CellSpec& c : grid.cells()) {
    ordered_json jc;
    jc["row"] = c.row;
    jc["col"] = c.col;
    jc["row_span"] = c.row_span;
    jc["col_span"] = c.col_span;
    jc["text"] = c.text;
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline TableGrid table_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("n_rows") || !j.contains("n_cols") || !j.contains("cells"))
    throw Error(Errc::malformed_table, "table JSON must have n_rows, n_cols, cells");
  std::vector<CellSpec> cells;
  for (const auto& jc : j.at("cells")) {
    CellSpec c;
    c.row = jc.at("row").get<int>();
    c.col = jc.at("col").get<int>();
    c.row_span = jc.at("row_span").get<int>();
    c.col_span = jc.at("col_span").get<int>();
    c.text = jc.at("text").get<std::string>();
    cells.push_back(std::move(c));
  }
  return TableGrid::from_cells(j.at("n_rows").get<int>(), j.at("n_cols").get<int>(),
                               std::move(cells));
}

inline std::string table_to_canonical_string(const TableGrid& grid) {
  return table_to_json(grid).dump(2) + "\n";
}

// ---- annotation sidecar JSON ----
// {cell_labels: [{row, col, label}], table_label, qa_pairs: [{question, answer}]}

inline ordered_json annotation_to_json(const TaskAnnotation& a) {
  ordered_json j;
  if (!a.cell_labels.empty()) {
    ordered_json labels = ordered_json::array();
    for (const auto& [pos, label] : a.cell_labels) {
      ordered_json jl;
      jl["row"] = pos.first;
      jl["col"] = pos.second;
      jl["label"] = label;
      labels.push_back(std::move(jl));
    }
    j["cell_labels"] = std::move(labels);
  }
  if (a.table_label) j["table_label"] = *a.table_label;
  if (!a.qa_pairs.empty()) {
    ordered_json qa = ordered_json::array();
    for (const auto& [q, ans] : a.qa_pairs) {
      ordered_json jq;
      jq["question"] = q;
      jq["answer"] = ans;
      qa.push_back(std::move(jq));
    }
    j["qa_pairs"] = std::move(qa);
  }
  return j;
}

inline TaskAnnotation annotation_from_json(const ordered_json& j) {
  TaskAnnotation a;
  if (j.contains("cell_labels")) {
    for (const auto& jl : j.at("cell_labels")) {
      a.cell_labels[{jl.at("row").get<int>(), jl.at("col").get<int>()}] =
          jl.at("label").get<std::string>();
    }
  }
  if (j.contains("table_label") && !j.at("table_label").is_null())
    a.table_label = j.at("table_label").get<std::string>();
  if (j.contains("qa_pairs")) {
    for (const auto& jq : j.at("qa_pairs"))
      a.qa_pairs.emplace_back(jq.at("question").get<std::string>(),
                              jq.at("answer").get<std::string>());
  }
  return a;
}

}  // namespace tabgraph
