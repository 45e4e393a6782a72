#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "tabgraph/error.hpp"
#include "tabgraph/structure.hpp"
#include "tabgraph/table.hpp"

namespace tabgraph {

enum class NodeKind { Table, Row, HeaderCell, DataCell };

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Table: return "table";
    case NodeKind::Row: return "row";
    case NodeKind::HeaderCell: return "header_cell";
    case NodeKind::DataCell: return "data_cell";
  }
  return "?";
}

struct NodeId {
  NodeKind kind = NodeKind::Table;
  int row = -1;  // Row/cell nodes; -1 for the table node
  int col = -1;  // cell nodes only

  std::string to_string() const {
    switch (kind) {
      case NodeKind::Table: return "table";
      case NodeKind::Row: return "row:" + std::to_string(row);
      default: return "cell:" + std::to_string(row) + "," + std::to_string(col);
    }
  }

  friend bool operator==(const NodeId& a, const NodeId& b) {
    return a.kind == b.kind && a.row == b.row && a.col == b.col;
  }
};

// The seven relation types, in the order they are serialized.
enum class EdgeType {
  TableHeader = 0,
  TableData,
  HeaderRow,
  DataRow,
  HeaderData,
  DataData,
  HeaderHeader,
};

inline constexpr int kNumEdgeTypes = 7;

inline const char* edge_type_name(EdgeType t) {
  switch (t) {
    case EdgeType::TableHeader: return "table_header";
    case EdgeType::TableData: return "table_data";
    case EdgeType::HeaderRow: return "header_row";
    case EdgeType::DataRow: return "data_row";
    case EdgeType::HeaderData: return "header_data";
    case EdgeType::DataData: return "data_data";
    case EdgeType::HeaderHeader: return "header_header";
  }
  return "?";
}

inline EdgeType edge_type_from_name(const std::string& name) {
  for (int t = 0; t < kNumEdgeTypes; ++t) {
    if (name == edge_type_name(static_cast<EdgeType>(t))) return static_cast<EdgeType>(t);
  }
  throw Error(Errc::unknown_edge_type, name);
}

// Undirected edge; endpoints stored as canonical node indices with a < b.
struct Edge {
  int a = 0;
  int b = 0;
  EdgeType type = EdgeType::TableHeader;

  friend bool operator<(const Edge& x, const Edge& y) {
    return std::tuple(static_cast<int>(x.type), x.a, x.b) <
           std::tuple(static_cast<int>(y.type), y.a, y.b);
  }
  friend bool operator==(const Edge& x, const Edge& y) {
    return x.a == y.a && x.b == y.b && x.type == y.type;
  }
};

struct GraphNode {
  NodeId id;
  std::string init_text;
};

struct GraphOptions {
  // HeaderHeader edges: horizontal adjacency within header rows always;
  // hierarchy links (merged header parent to the header cells directly
  // below its span) when enabled.
  bool header_hierarchy = true;
};

// Typed heterogeneous graph of one table. Node order is canonical: the
// table node first, then row nodes by index, then cell nodes by (row, col).
struct TabularGraph {
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;  // sorted by (type, a, b); unique
  int n_rows = 0;
  int n_cols = 0;

  int table_node() const { return 0; }
  int row_node(int i) const { return 1 + i; }
  // Cell nodes start after the row block; cells follow grid.cells() order.
  int first_cell_node() const { return 1 + n_rows; }
  int cell_node(int cell_index) const { return 1 + n_rows + cell_index; }
  int num_cells() const { return static_cast<int>(nodes.size()) - 1 - n_rows; }

  std::map<EdgeType, int> edge_census() const {
    std::map<EdgeType, int> counts;
    for (int t = 0; t < kNumEdgeTypes; ++t) counts[static_cast<EdgeType>(t)] = 0;
    for (const Edge& e : edges) ++counts[e.type];
    return counts;
  }
};

// Initialization text for one node: cells carry their own (possibly
// prefixed) text; a row node joins the texts of the cells owning positions
// in that row, left to right, one entry per owning cell; the table node
// joins all header-cell texts in reading order.
inline std::string init_text(const NodeId& node, const TableGrid& grid,
                             const StructureReport& report) {
  static const std::string kJoin = "; ";
  switch (node.kind) {
    case NodeKind::Table: {
      std::string out;
      bool first = true;
      for (std::size_t idx = 0; idx < grid.cells().size(); ++idx) {
        if (report.cell_roles[idx] != CellRole::HeaderCell) continue;
        if (!first) out += kJoin;
        out += grid.cells()[idx].text;
        first = false;
      }
      return out;
    }
    case NodeKind::Row: {
      std::string out;
      bool first = true;
      for (int idx : grid.row_owner_indices(node.row)) {
        if (!first) out += kJoin;
        out += grid.cells()[idx].text;
        first = false;
      }
      return out;
    }
    default: {
      for (const CellSpec& c : grid.cells()) {
        if (c.row == node.row && c.col == node.col) return c.text;
      }
      throw Error(Errc::inconsistent_report, "no cell at " + node.to_string());
    }
  }
}

// Builds the typed graph from a grid and its structure report by the five
// linking rules:
//   R1  table node to every cell node (TableHeader / TableData by role)
//   R2  row node i to every cell owning a position in row i
//       (HeaderRow / DataRow by the cell's role)
//   R3  each data cell to the header cell owning position (thrn-1, j) for
//       every column j the data cell occupies (HeaderData)
//   R4  vertically adjacent data cells within each column (DataData)
//   R5  HeaderHeader: horizontally adjacent header cells within header rows,
//       plus hierarchy links from merged header cells to the header cells
//       directly below their span (when options.header_hierarchy)
// Full-width section cells are header cells by role but never act as column
// headers in R3.
inline TabularGraph build_graph(const TableGrid& grid, const StructureReport& report,
                                const GraphOptions& options = {}) {
  const int n = grid.n_rows();
  const int m = grid.n_cols();
  const auto& cells = grid.cells();
  if (static_cast<int>(report.row_types.size()) != n ||
      report.cell_roles.size() != cells.size()) {
    throw Error(Errc::inconsistent_report, "report does not match grid dimensions");
  }

  TabularGraph g;
  g.n_rows = n;
  g.n_cols = m;

  g.nodes.push_back({NodeId{NodeKind::Table, -1, -1}, ""});
  for (int i = 0; i < n; ++i) g.nodes.push_back({NodeId{NodeKind::Row, i, -1}, ""});
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    NodeKind kind = report.cell_roles[idx] == CellRole::HeaderCell ? NodeKind::HeaderCell
                                                                   : NodeKind::DataCell;
    g.nodes.push_back({NodeId{kind, cells[idx].row, cells[idx].col}, ""});
  }
  for (GraphNode& node : g.nodes) node.init_text = init_text(node.id, grid, report);

  std::set<Edge> edges;
  auto add_edge = [&](int x, int y, EdgeType t) {
    if (x == y) return;
    Edge e{std::min(x, y), std::max(x, y), t};
    edges.insert(e);
  };
  auto is_header = [&](std::size_t idx) {
    return report.cell_roles[idx] == CellRole::HeaderCell;
  };

  // R1 + R2.
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    const CellSpec& c = cells[idx];
    bool header = is_header(idx);
    add_edge(g.table_node(), g.cell_node(static_cast<int>(idx)),
             header ? EdgeType::TableHeader : EdgeType::TableData);
    for (int i = c.row; i < c.row + c.row_span; ++i) {
      add_edge(g.row_node(i), g.cell_node(static_cast<int>(idx)),
               header ? EdgeType::HeaderRow : EdgeType::DataRow);
    }
  }

  // R3: deepest header above each occupied column.
  if (report.thrn >= 1) {
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
      if (is_header(idx)) continue;
      const CellSpec& c = cells[idx];
      for (int j = c.col; j < c.col + c.col_span; ++j) {
        int h = grid.owner_index(report.thrn - 1, j);
        if (!is_header(static_cast<std::size_t>(h))) continue;
        add_edge(g.cell_node(static_cast<int>(idx)), g.cell_node(h), EdgeType::HeaderData);
      }
    }
  }

  // R4: vertical adjacency between distinct data cells, per occupied column.
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      int a = grid.owner_index(i, j);
      int b = grid.owner_index(i + 1, j);
      if (a == b) continue;
      if (is_header(static_cast<std::size_t>(a)) || is_header(static_cast<std::size_t>(b)))
        continue;
      add_edge(g.cell_node(a), g.cell_node(b), EdgeType::DataData);
    }
  }

  // R5a: horizontal adjacency inside header rows.
  for (int i = 0; i < n; ++i) {
    if (report.row_types[i] != RowType::HeaderRow) continue;
    for (int j = 0; j + 1 < m; ++j) {
      int a = grid.owner_index(i, j);
      int b = grid.owner_index(i, j + 1);
      if (a == b) continue;
      if (!is_header(static_cast<std::size_t>(a)) || !is_header(static_cast<std::size_t>(b)))
        continue;
      add_edge(g.cell_node(a), g.cell_node(b), EdgeType::HeaderHeader);
    }
  }

  // R5b: merged header parent to the header cells directly below its span.
  if (options.header_hierarchy) {
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
      if (!is_header(idx)) continue;
      const CellSpec& c = cells[idx];
      if (c.row_span == 1 && c.col_span == 1) continue;  // not merged
      int below = c.row + c.row_span;
      if (below >= n) continue;
      for (int j = c.col; j < c.col + c.col_span; ++j) {
        int child = grid.owner_index(below, j);
        if (child == static_cast<int>(idx)) continue;
        if (!is_header(static_cast<std::size_t>(child))) continue;
        add_edge(g.cell_node(static_cast<int>(idx)), g.cell_node(child),
                 EdgeType::HeaderHeader);
      }
    }
  }

  g.edges.assign(edges.begin(), edges.end());
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

// ---- graph JSON ----
// {nodes: [{id, kind, coord, init_text}], edges: [{src, dst, type}]} in
// canonical node order; edges sorted by (type, src, dst).

inline ordered_json graph_to_json(const TabularGraph& g) {
  ordered_json j;
  ordered_json nodes = ordered_json::array();
  for (const GraphNode& node : g.nodes) {
    ordered_json jn;
    jn["id"] = node.id.to_string();
    jn["kind"] = node_kind_name(node.id.kind);
    if (node.id.kind == NodeKind::Table) {
      jn["coord"] = ordered_json::array();
    } else if (node.id.kind == NodeKind::Row) {
      jn["coord"] = ordered_json::array({node.id.row});
    } else {
      jn["coord"] = ordered_json::array({node.id.row, node.id.col});
    }
    jn["init_text"] = node.init_text;
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const Edge& e : g.edges) {
    ordered_json je;
    je["src"] = g.nodes[e.a].id.to_string();
    je["dst"] = g.nodes[e.b].id.to_string();
    je["type"] = edge_type_name(e.type);
    edges.push_back(std::move(je));
  }
  j["edges"] = std::move(edges);
  return j;
}

inline TabularGraph graph_from_json(const ordered_json& j) {
  TabularGraph g;
  std::map<std::string, int> index;
  int max_row = -1;
  for (const auto& jn : j.at("nodes")) {
    GraphNode node;
    std::string kind = jn.at("kind").get<std::string>();
    const auto& coord = jn.at("coord");
    if (kind == "table") {
      node.id = {NodeKind::Table, -1, -1};
    } else if (kind == "row") {
      node.id = {NodeKind::Row, coord.at(0).get<int>(), -1};
      max_row = std::max(max_row, node.id.row);
    } else {
      NodeKind k = kind == "header_cell" ? NodeKind::HeaderCell : NodeKind::DataCell;
      node.id = {k, coord.at(0).get<int>(), coord.at(1).get<int>()};
    }
    node.init_text = jn.at("init_text").get<std::string>();
    index[node.id.to_string()] = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(node));
  }
  g.n_rows = max_row + 1;
  int max_col = -1;
  for (const GraphNode& node : g.nodes) {
    if (node.id.kind != NodeKind::Row && node.id.kind != NodeKind::Table)
      max_col = std::max(max_col, node.id.col);
  }
  g.n_cols = max_col + 1;
  for (const auto& je : j.at("edges")) {
    Edge e;
    auto src = index.find(je.at("src").get<std::string>());
    auto dst = index.find(je.at("dst").get<std::string>());
    if (src == index.end() || dst == index.end())
      throw Error(Errc::malformed_table, "edge references unknown node");
    e.a = std::min(src->second, dst->second);
    e.b = std::max(src->second, dst->second);
    e.type = edge_type_from_name(je.at("type").get<std::string>());
    g.edges.push_back(e);
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

inline std::string graph_to_canonical_string(const TabularGraph& g) {
  return graph_to_json(g).dump(2) + "\n";
}

}  // namespace tabgraph
