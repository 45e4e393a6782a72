#include <catch2/catch_amalgamated.hpp>

#include "tabgraph/fixtures.hpp"
#include "tabgraph/structure.hpp"
#include "tabgraph/table.hpp"

#include "helpers.hpp"

using namespace tabgraph;
using Catch::Matchers::WithinAbs;

namespace {

TableGrid grid_of(int n, int m, std::vector<CellSpec> cells) {
  return TableGrid::from_cells(n, m, std::move(cells));
}

CellSpec cell(int r, int c, int rs, int cs, const char* t) {
  CellSpec s;
  s.row = r;
  s.col = c;
  s.row_span = rs;
  s.col_span = cs;
  s.text = t;
  return s;
}

// Six rows, two columns, with a full-width divider at row 3 and a full-width
// merged cell at row 5.
TableGrid divider_table() {
  return grid_of(6, 2,
                 {cell(0, 0, 1, 1, "name"), cell(0, 1, 1, 1, "value"), cell(1, 0, 1, 1, "a"),
                  cell(1, 1, 1, 1, "1"), cell(2, 0, 1, 1, "b"), cell(2, 1, 1, 1, "2"),
                  cell(3, 0, 1, 2, "section two"), cell(4, 0, 1, 1, "c"), cell(4, 1, 1, 1, "3"),
                  cell(5, 0, 1, 2, "totals")});
}

}  // namespace

TEST_CASE("thrn: income table has a two-row header") {
  CHECK(get_thrn(income_table()) == 2);
}

TEST_CASE("thrn: all first-row spans of one give 1") {
  CHECK(get_thrn(uniform_grid(3, 3)) == 1);
  CHECK(get_thrn(uniform_grid(1, 1)) == 1);
}

TEST_CASE("thrn: max over first-row spans {1,3,2} is 3") {
  TableGrid g = grid_of(3, 3,
                        {cell(0, 0, 1, 1, "a"), cell(0, 1, 3, 1, "b"), cell(0, 2, 2, 1, "c"),
                         cell(1, 0, 1, 1, "d"), cell(2, 0, 1, 1, "e"), cell(2, 2, 1, 1, "f")});
  CHECK(get_thrn(g) == 3);
}

TEST_CASE("row types: income table (two header rows, two data rows)") {
  TableGrid g = income_table();
  CHECK(identify_row_type(g, 0) == RowType::HeaderRow);
  CHECK(identify_row_type(g, 1) == RowType::HeaderRow);
  CHECK(identify_row_type(g, 2) == RowType::DataRow);
  CHECK(identify_row_type(g, 3) == RowType::DataRow);
  CHECK_THROWS_MATCHES(identify_row_type(g, 4), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::row_out_of_range; }));
}

TEST_CASE("row types: single-row table is a header row") {
  CHECK(identify_row_type(uniform_grid(1, 3), 0) == RowType::HeaderRow);
}

TEST_CASE("row types: the first cell is the occupancy owner, span as-is") {
  // A full-width cell starting in row 1 also owns position (2, 0); row 2's
  // first cell therefore spans the table width and the row types header.
  TableGrid g = grid_of(4, 2,
                        {cell(0, 0, 1, 1, "h1"), cell(0, 1, 1, 1, "h2"),
                         cell(1, 0, 2, 2, "wide"), cell(3, 0, 1, 1, "a"),
                         cell(3, 1, 1, 1, "b")});
  CHECK(identify_row_type(g, 1) == RowType::HeaderRow);
  CHECK(identify_row_type(g, 2) == RowType::HeaderRow);
  CHECK(identify_row_type(g, 3) == RowType::DataRow);
}

TEST_CASE("row types: full-width cells make section rows header rows") {
  TableGrid g = divider_table();
  CHECK(identify_row_type(g, 0) == RowType::HeaderRow);
  CHECK(identify_row_type(g, 1) == RowType::DataRow);
  CHECK(identify_row_type(g, 3) == RowType::HeaderRow);  // divider
  CHECK(identify_row_type(g, 4) == RowType::DataRow);
  CHECK(identify_row_type(g, 5) == RowType::HeaderRow);  // trailing full-width merge
}

TEST_CASE("cell roles: income table") {
  TableGrid g = income_table();
  std::vector<CellRole> roles = classify_cell_roles(g);
  auto role_of = [&](int r, int c) { return roles[static_cast<std::size_t>(g.owner_index(r, c))]; };
  CHECK(role_of(0, 0) == CellRole::HeaderCell);  // project
  CHECK(role_of(0, 1) == CellRole::HeaderCell);  // detail
  CHECK(role_of(1, 1) == CellRole::HeaderCell);  // income
  CHECK(role_of(2, 1) == CellRole::DataCell);    // 53,196,521.18
  CHECK(role_of(3, 0) == CellRole::DataCell);
}

TEST_CASE("cell roles: 1x1 table cell is a header cell") {
  TableGrid g = uniform_grid(1, 1);
  CHECK(classify_cell_roles(g)[0] == CellRole::HeaderCell);
}

TEST_CASE("cell roles: full-width merged cell deep in the table") {
  TableGrid g = divider_table();
  std::vector<CellRole> roles = classify_cell_roles(g);
  CHECK(roles[static_cast<std::size_t>(g.owner_index(5, 0))] == CellRole::HeaderCell);
  CHECK(roles[static_cast<std::size_t>(g.owner_index(3, 1))] == CellRole::HeaderCell);
  CHECK(roles[static_cast<std::size_t>(g.owner_index(4, 1))] == CellRole::DataCell);
}

TEST_CASE("orientation: income table is horizontal (hand-scored)") {
  OrientationResult r = classify_orientation(income_table());
  CHECK_THAT(r.features[0], WithinAbs(0.0, 1e-12));
  CHECK_THAT(r.features[1], WithinAbs(1.0 / 6.0, 1e-12));
  CHECK_THAT(r.features[2], WithinAbs(-14.5 / 56.5, 1e-12));
  CHECK_THAT(r.features[3], WithinAbs(-0.1, 1e-12));
  CHECK_THAT(r.features[4], WithinAbs(-1.0 / 7.0, 1e-12));
  CHECK_THAT(r.score, WithinAbs(-0.0661399073, 1e-9));
  CHECK(r.orientation == Orientation::Horizontal);
}

TEST_CASE("orientation: data in row 0 with a text first column is vertical (hand-scored)") {
  OrientationResult r = classify_orientation(vertical_table());
  CHECK_THAT(r.features[0], WithinAbs(0.8, 1e-12));
  CHECK_THAT(r.features[1], WithinAbs(-0.2, 1e-12));
  CHECK_THAT(r.features[2], WithinAbs(-1.4 / 9.6, 1e-12));
  CHECK_THAT(r.features[3], WithinAbs(0.0, 1e-12));
  CHECK_THAT(r.features[4], WithinAbs(1.0 / 9.0, 1e-12));
  CHECK_THAT(r.score, WithinAbs(0.7709722222, 1e-9));
  CHECK(r.orientation == Orientation::Vertical);
}

TEST_CASE("orientation: 1x1 ties toward horizontal") {
  OrientationResult r = classify_orientation(uniform_grid(1, 1));
  CHECK(r.orientation == Orientation::Horizontal);
}

TEST_CASE("orientation is deterministic") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    TableGrid g = testing::random_grid(rng);
    OrientationResult a = classify_orientation(g);
    OrientationResult b = classify_orientation(g);
    CHECK(a.orientation == b.orientation);
    CHECK(a.score == b.score);
    CHECK(a.features == b.features);
  }
}

TEST_CASE("transpose: 2x3 grid of span-1 cells") {
  TableGrid g = uniform_grid(2, 3);
  TableGrid t = transpose(g);
  REQUIRE(t.n_rows() == 3);
  REQUIRE(t.n_cols() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(t.owner(j, i).text == g.owner(i, j).text);
}

TEST_CASE("transpose swaps spans") {
  TableGrid g = income_table();
  TableGrid t = transpose(g);
  const CellSpec& project = t.owner(0, 0);
  CHECK(project.row_span == 1);
  CHECK(project.col_span == 2);
}

TEST_CASE("transpose is an involution on canonical JSON") {
  CHECK(table_to_canonical_string(transpose(transpose(income_table()))) ==
        table_to_canonical_string(income_table()));
  SplitMix64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    TableGrid g = testing::random_grid(rng);
    CHECK(table_to_canonical_string(transpose(transpose(g))) == table_to_canonical_string(g));
  }
}

TEST_CASE("properties: thrn >= 1 and header rows below thrn") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    TableGrid g = testing::random_grid(rng);
    int thrn = get_thrn(g);
    CHECK(thrn >= 1);
    for (int i = 0; i < thrn && i < g.n_rows(); ++i)
      CHECK(identify_row_type(g, i) == RowType::HeaderRow);
    std::vector<CellRole> roles = classify_cell_roles(g);
    for (int j = 0; j < g.n_cols(); ++j)
      CHECK(roles[static_cast<std::size_t>(g.owner_index(0, j))] == CellRole::HeaderCell);
  }
}

TEST_CASE("analyze_structure report JSON shape") {
  TableGrid g = income_table();
  StructureReport rep = analyze_structure(g);
  ordered_json j = report_to_json(g, rep);
  CHECK(j.at("thrn") == 2);
  CHECK(j.at("row_types") == ordered_json::array({"header", "header", "data", "data"}));
  CHECK(j.at("orientation") == "horizontal");
  CHECK(j.at("cell_roles").size() == g.cells().size());
  CHECK(j.at("orientation_features").size() == 5);
}
