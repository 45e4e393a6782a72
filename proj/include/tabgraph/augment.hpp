#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tabgraph/error.hpp"
#include "tabgraph/table.hpp"

namespace tabgraph {

enum class NumericClass { None, Integer, Float, Percentage };

inline constexpr const char* kIntegerPrefix = "Integer Value: ";
inline constexpr const char* kFloatPrefix = "Float Value: ";
inline constexpr const char* kPercentagePrefix = "Percentage Value: ";

namespace detail_numeric {

// digits, optionally grouped as d{1,3}(,ddd)*; consumes from pos.
inline bool eat_int_part(std::string_view s, std::size_t& pos) {
  std::size_t start = pos;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  std::size_t lead = pos - start;
  if (lead == 0) return false;
  if (pos < s.size() && s[pos] == ',') {
    if (lead > 3) return false;  // "1234,567" is not a grouped number
    while (pos < s.size() && s[pos] == ',') {
      if (pos + 3 >= s.size()) return false;
      for (std::size_t k = 1; k <= 3; ++k)
        if (s[pos + k] < '0' || s[pos + k] > '9') return false;
      pos += 4;
    }
  }
  return true;
}

}  // namespace detail_numeric

// Classifies trimmed text: integers (optional sign, optional thousands
// separators), floats (one decimal point), and either followed by '%'.
inline NumericClass classify_numeric_text(std::string_view s) {
  using detail_numeric::eat_int_part;
  if (s.empty()) return NumericClass::None;
  std::size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') ++pos;
  if (!eat_int_part(s, pos)) return NumericClass::None;
  bool is_float = false;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t frac_start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == frac_start) return NumericClass::None;
    is_float = true;
  }
  if (pos == s.size()) return is_float ? NumericClass::Float : NumericClass::Integer;
  if (pos + 1 == s.size() && s[pos] == '%') return NumericClass::Percentage;
  return NumericClass::None;
}

inline bool has_numeric_prefix(std::string_view s) {
  return s.rfind(kIntegerPrefix, 0) == 0 || s.rfind(kFloatPrefix, 0) == 0 ||
         s.rfind(kPercentagePrefix, 0) == 0;
}

// Numeric-likeness check that sees through an already-applied prefix; used
// by orientation features so they behave the same pre- and post-prefixing.
inline bool is_numeric_for_features(std::string_view s) {
  for (const char* p : {kIntegerPrefix, kFloatPrefix, kPercentagePrefix}) {
    std::string_view pv(p);
    if (s.substr(0, pv.size()) == pv) return true;
  }
  return classify_numeric_text(s) != NumericClass::None;
}

inline std::string prefix_numeric_text(const std::string& text) {
  if (has_numeric_prefix(text)) return text;
  switch (classify_numeric_text(text)) {
    case NumericClass::Integer: return kIntegerPrefix + text;
    case NumericClass::Float: return kFloatPrefix + text;
    case NumericClass::Percentage: return kPercentagePrefix + text;
    case NumericClass::None: return text;
  }
  return text;
}

// Returns a new grid with numeric cells prefixed by their type. Idempotent;
// preserves N, M, spans, and coordinates.
inline TableGrid prefix_numeric_cells(const TableGrid& grid) {
  std::vector<CellSpec> cells = grid.cells();
  for (CellSpec& c : cells) c.text = prefix_numeric_text(c.text);
  return TableGrid::from_cells(grid.n_rows(), grid.n_cols(), std::move(cells));
}

inline constexpr const char* kDefaultFlattenSeparator = " | ";

// Collapses the first `thrn` rows into a single header row. Each output
// header cell's text joins the texts of the column's header path top to
// bottom, skipping empties and texts already on the path. Header cells whose
// span reaches below the header region keep covering those data positions.
inline TableGrid flatten_headers(const TableGrid& grid, const std::string& separator, int thrn) {
  if (thrn < 1) throw Error(Errc::no_header_rows, "top header row number is 0");
  if (thrn > grid.n_rows())
    throw Error(Errc::row_out_of_range, "thrn exceeds row count");
  if (thrn == 1) return grid;

  int shift = thrn - 1;  // data row i -> i - shift
  std::vector<CellSpec> out;

  for (int j = 0; j < grid.n_cols(); ++j) {
    std::vector<std::string> path;
    int deepest_bottom = thrn;  // first row index below the path cells
    for (int i = 0; i < thrn; ++i) {
      const CellSpec& c = grid.owner(i, j);
      if (c.row + c.row_span > deepest_bottom) deepest_bottom = c.row + c.row_span;
      if (c.text.empty()) continue;
      bool dup = false;
      for (const std::string& seen : path)
        if (seen == c.text) { dup = true; break; }
      if (!dup) path.push_back(c.text);
    }
    std::string joined;
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (k) joined += separator;
      joined += path[k];
    }
    CellSpec h;
    h.row = 0;
    h.col = j;
    h.row_span = 1 + (deepest_bottom - thrn);  // extends if a header cell straddled
    h.col_span = 1;
    h.text = std::move(joined);
    out.push_back(std::move(h));
  }

  for (const CellSpec& c : grid.cells()) {
    if (c.row < thrn) continue;  // header cells were folded into column paths
    CellSpec d = c;
    d.row -= shift;
    out.push_back(std::move(d));
  }

  return TableGrid::from_cells(grid.n_rows() - shift, grid.n_cols(), std::move(out));
}

}  // namespace tabgraph
