#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgraph/augment.hpp"
#include "tabgraph/error.hpp"
#include "tabgraph/table.hpp"

namespace tabgraph {

enum class RowType { HeaderRow, DataRow };
enum class CellRole { HeaderCell, DataCell };
enum class Orientation { Horizontal, Vertical };

inline const char* row_type_name(RowType t) {
  return t == RowType::HeaderRow ? "header" : "data";
}
inline const char* cell_role_name(CellRole r) {
  return r == CellRole::HeaderCell ? "header_cell" : "data_cell";
}
inline const char* orientation_name(Orientation o) {
  return o == Orientation::Horizontal ? "horizontal" : "vertical";
}

// Top header row number: the maximum row span among cells owning a position
// in the first row. Only row 0 is inspected.
inline int get_thrn(const TableGrid& grid) {
  int thrn = 0;
  for (int idx : grid.row_owner_indices(0)) {
    int rs = grid.cells()[idx].row_span;
    if (rs > thrn) thrn = rs;
  }
  return thrn;
}

// Row typing: rows below thrn are data rows unless the row's first cell
// (the owner of position (row, 0), span evaluated as-is) covers the full
// table width.
inline RowType identify_row_type(const TableGrid& grid, int row_index) {
  if (row_index < 0 || row_index >= grid.n_rows())
    throw Error(Errc::row_out_of_range, "row " + std::to_string(row_index) + " out of range");
  if (row_index < get_thrn(grid)) return RowType::HeaderRow;
  const CellSpec& first = grid.owner(row_index, 0);
  if (first.col_span == grid.n_cols()) return RowType::HeaderRow;
  return RowType::DataRow;
}

// Header cells are those owning a position in the top header rows, plus any
// cell spanning the entire table width.
inline std::vector<CellRole> classify_cell_roles(const TableGrid& grid) {
  int thrn = get_thrn(grid);
  std::vector<CellRole> roles(grid.cells().size(), CellRole::DataCell);
  for (std::size_t idx = 0; idx < grid.cells().size(); ++idx) {
    const CellSpec& c = grid.cells()[idx];
    if (c.row < thrn || c.col_span == grid.n_cols()) roles[idx] = CellRole::HeaderCell;
  }
  return roles;
}

// Rows and columns exchanged; spans swap axes. An involution.
inline TableGrid transpose(const TableGrid& grid) {
  std::vector<CellSpec> cells;
  cells.reserve(grid.cells().size());
  for (const CellSpec& c : grid.cells()) {
    CellSpec t = c;
    t.row = c.col;
    t.col = c.row;
    t.row_span = c.col_span;
    t.col_span = c.row_span;
    cells.push_back(std::move(t));
  }
  return TableGrid::from_cells(grid.n_cols(), grid.n_rows(), std::move(cells));
}

// ---- orientation classification ----

// Five hand-set features combined by a linear rule; the table is Vertical
// when the weighted score clears the threshold, so ties and weak evidence
// resolve to Horizontal.
//   f1  numeric fraction of row 0 minus numeric fraction of column 0
//       (data in the first row means the headers run down the side)
//   f2  typedness: mean majority-class fraction of rows minus columns
//   f3  normalized mean-text-length difference, row 0 vs column 0
//   f4  merge direction: fraction of cells with row-spanning merges below
//       the top header rows minus fraction with column-spanning merges
//   f5  aspect ratio (M - N) / (M + N)
struct OrientationWeights {
  double f1 = 1.0;
  double f2 = 0.1;
  double f3 = 0.1;
  double f4 = 0.5;
  double f5 = 0.05;
  double threshold = 0.05;
};

struct OrientationResult {
  Orientation orientation = Orientation::Horizontal;
  std::array<double, 5> features{};
  double score = 0.0;
};

namespace detail_orient {

// Majority-class fraction over a set of texts (numeric vs non-numeric),
// ignoring empties; trivially 1 when nothing remains.
inline double typedness(const std::vector<const std::string*>& texts) {
  int numeric = 0, total = 0;
  for (const std::string* t : texts) {
    if (t->empty()) continue;
    ++total;
    if (is_numeric_for_features(*t)) ++numeric;
  }
  if (total == 0) return 1.0;
  double f = static_cast<double>(numeric) / total;
  return f > 1.0 - f ? f : 1.0 - f;
}

inline double numeric_fraction(const std::vector<const std::string*>& texts) {
  int numeric = 0, total = 0;
  for (const std::string* t : texts) {
    if (t->empty()) continue;
    ++total;
    if (is_numeric_for_features(*t)) ++numeric;
  }
  return total == 0 ? 0.0 : static_cast<double>(numeric) / total;
}

inline double mean_length(const std::vector<const std::string*>& texts) {
  if (texts.empty()) return 0.0;
  double sum = 0;
  for (const std::string* t : texts) sum += static_cast<double>(t->size());
  return sum / static_cast<double>(texts.size());
}

}  // namespace detail_orient

inline OrientationResult classify_orientation(const TableGrid& grid,
                                              const OrientationWeights& w = {}) {
  using namespace detail_orient;
  const auto& cells = grid.cells();

  auto row_texts = [&](int i) {
    std::vector<const std::string*> out;
    for (int idx : grid.row_owner_indices(i)) out.push_back(&cells[idx].text);
    return out;
  };
  auto col_texts = [&](int j) {
    std::vector<const std::string*> out;
    for (int idx : grid.col_owner_indices(j)) out.push_back(&cells[idx].text);
    return out;
  };

  auto r0 = row_texts(0);
  auto c0 = col_texts(0);

  double f1 = numeric_fraction(r0) - numeric_fraction(c0);

  double row_typed = 0, col_typed = 0;
  for (int i = 0; i < grid.n_rows(); ++i) row_typed += typedness(row_texts(i));
  for (int j = 0; j < grid.n_cols(); ++j) col_typed += typedness(col_texts(j));
  row_typed /= grid.n_rows();
  col_typed /= grid.n_cols();
  double f2 = row_typed - col_typed;

  double len_r0 = mean_length(r0);
  double len_c0 = mean_length(c0);
  double f3 = (len_r0 - len_c0) / (len_r0 + len_c0 + 1.0);

  // Row-spanning merges inside the top header rows are normal for deep
  // horizontal headers, so only merges below them count as vertical evidence.
  int thrn = get_thrn(grid);
  int row_merges = 0, col_merges = 0;
  for (const CellSpec& c : cells) {
    if (c.row_span > 1 && c.row >= thrn) ++row_merges;
    if (c.col_span > 1) ++col_merges;
  }
  double f4 = static_cast<double>(row_merges - col_merges) /
              static_cast<double>(cells.size());

  double f5 = static_cast<double>(grid.n_cols() - grid.n_rows()) /
              static_cast<double>(grid.n_cols() + grid.n_rows());

  OrientationResult res;
  res.features = {f1, f2, f3, f4, f5};
  res.score = w.f1 * f1 + w.f2 * f2 + w.f3 * f3 + w.f4 * f4 + w.f5 * f5;
  res.orientation = res.score > w.threshold ? Orientation::Vertical : Orientation::Horizontal;
  return res;
}

// ---- the combined report ----

struct StructureReport {
  int thrn = 0;
  std::vector<RowType> row_types;            // length N
  std::vector<CellRole> cell_roles;          // aligned with grid.cells()
  Orientation orientation = Orientation::Horizontal;
  std::array<double, 5> orientation_features{};
  double orientation_score = 0.0;
};

inline StructureReport analyze_structure(const TableGrid& grid,
                                         const OrientationWeights& w = {}) {
  StructureReport rep;
  rep.thrn = get_thrn(grid);
  rep.row_types.reserve(grid.n_rows());
  for (int i = 0; i < grid.n_rows(); ++i) rep.row_types.push_back(identify_row_type(grid, i));
  rep.cell_roles = classify_cell_roles(grid);
  OrientationResult orient = classify_orientation(grid, w);
  rep.orientation = orient.orientation;
  rep.orientation_features = orient.features;
  rep.orientation_score = orient.score;
  return rep;
}

inline ordered_json report_to_json(const TableGrid& grid, const StructureReport& rep) {
  ordered_json j;
  j["thrn"] = rep.thrn;
  ordered_json types = ordered_json::array();
  for (RowType t : rep.row_types) types.push_back(row_type_name(t));
  j["row_types"] = std::move(types);
  ordered_json roles = ordered_json::array();
  for (std::size_t idx = 0; idx < grid.cells().size(); ++idx) {
    ordered_json jr;
    jr["row"] = grid.cells()[idx].row;
    jr["col"] = grid.cells()[idx].col;
    jr["role"] = cell_role_name(rep.cell_roles[idx]);
    roles.push_back(std::move(jr));
  }
  j["cell_roles"] = std::move(roles);
  j["orientation"] = orientation_name(rep.orientation);
  ordered_json feats = ordered_json::array();
  for (double f : rep.orientation_features) feats.push_back(f);
  j["orientation_features"] = std::move(feats);
  j["orientation_score"] = rep.orientation_score;
  return j;
}

}  // namespace tabgraph
