#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "tabgraph/rng.hpp"
#include "tabgraph/table.hpp"

namespace tabgraph {

// Synthetic table corpus for the row-type probe experiment. Cell texts come
// from fixed pools so the same strings recur across tables: header rows draw
// from the header-word pool, data rows from the numeric/word pools. That
// makes row types separable from surface statistics alone, which is the
// point of the probe.
namespace synth_pools {

inline const std::vector<std::string>& header_words() {
  static const std::vector<std::string> v = {
      "project", "income",  "cost",    "region",  "quarter",   "year",    "total",   "name",
      "category", "price",  "amount",  "status",  "rate",      "score",   "rank",    "type",
      "group",   "budget",  "target",  "actual",  "department", "product", "sales",  "profit",
      "margin",  "growth",  "share",   "index",   "volume",    "units",   "city",    "country",
      "segment", "channel", "period",  "balance", "revenue",   "expense", "tax",     "net"};
  return v;
}

inline const std::vector<std::string>& data_words() {
  static const std::vector<std::string> v = {
      "alpha",    "beta",     "gamma",    "delta",    "north",     "south",      "east",
      "west",     "main business", "other business", "retail",  "wholesale", "online",
      "offline",  "domestic", "export",   "services", "hardware",  "software",   "logistics",
      "consumer", "enterprise", "pending", "active",  "closed",    "open",       "new",
      "legacy",   "core",     "misc"};
  return v;
}

inline const std::vector<std::string>& numeric_values() {
  static const std::vector<std::string> v = {
      "0",       "1",        "2",         "5",        "7",        "10",       "12",
      "15",      "25",       "42",        "99",       "100",      "128",      "250",
      "365",     "512",      "1,024",     "2,048",    "4,096",    "10,000",   "3.5",
      "0.5",     "1.25",     "2.75",      "9.99",     "12.50",    "99.95",    "123.45",
      "678.90",  "1,234.56", "7,890.12",  "53,196,521.18", "3%",  "5%",       "12%",
      "25%",     "33%",      "50%",       "75%",      "99%",      "2.5%",     "7.5%",
      "12.5%",   "0.1",      "0.01",      "8",        "16",       "64",       "777",
      "88",      "1,000,000", "42.42",    "314.15",   "2.71",     "6.28",     "-5",
      "-12.5",   "+30",      "45.0",      "0.99"};
  return v;
}

}  // namespace synth_pools

struct SynthTable {
  std::string id;
  TableGrid grid;
};

namespace detail_synth {

inline const std::string& pick(SplitMix64& rng, const std::vector<std::string>& pool) {
  return pool[static_cast<std::size_t>(rng.next_below(pool.size()))];
}

}  // namespace detail_synth

inline SynthTable generate_synthetic_table(std::uint64_t corpus_seed, int index) {
  using namespace detail_synth;
  using namespace synth_pools;

  SynthTable out;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "synth-%05d", index);
  out.id = buf;
  SplitMix64 rng = table_stream(corpus_seed, out.id);

  int m = 2 + static_cast<int>(rng.next_below(5));          // 2..6 columns
  int data_rows = 2 + static_cast<int>(rng.next_below(6));  // 2..7 data rows
  bool two_row_header = rng.next_below(100) < 35;
  int header_rows = two_row_header ? 2 : 1;
  bool with_divider = rng.next_below(100) < 25;
  int divider_at = with_divider ? 1 + static_cast<int>(rng.next_below(
                                          static_cast<std::uint64_t>(data_rows)))
                                : -1;  // offset within the data block

  std::vector<CellSpec> cells;
  auto add = [&](int r, int c, int rs, int cs, std::string text) {
    CellSpec spec;
    spec.row = r;
    spec.col = c;
    spec.row_span = rs;
    spec.col_span = cs;
    spec.text = std::move(text);
    cells.push_back(std::move(spec));
  };

  // Header block. A two-row header anchors thrn = 2 with a row-spanning
  // first cell; remaining columns either merge a parent over two children
  // or span both rows directly.
  if (two_row_header) {
    add(0, 0, 2, 1, pick(rng, header_words()));
    int j = 1;
    while (j < m) {
      if (j + 1 < m && rng.next_below(2) == 0) {
        add(0, j, 1, 2, pick(rng, header_words()));
        add(1, j, 1, 1, pick(rng, header_words()));
        add(1, j + 1, 1, 1, pick(rng, header_words()));
        j += 2;
      } else {
        add(0, j, 2, 1, pick(rng, header_words()));
        j += 1;
      }
    }
  } else {
    for (int j = 0; j < m; ++j) add(0, j, 1, 1, pick(rng, header_words()));
  }

  // Column content classes: first column leans textual, others numeric.
  std::vector<bool> numeric_col(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    int p = j == 0 ? 20 : 75;
    numeric_col[static_cast<std::size_t>(j)] = rng.next_below(100) < static_cast<std::uint64_t>(p);
  }

  int n = header_rows + data_rows + (with_divider ? 1 : 0);
  std::vector<int> divider_rows;
  int r = header_rows;
  int emitted_data_rows = 0;
  while (emitted_data_rows < data_rows || (with_divider && divider_rows.empty())) {
    bool divider_here = with_divider && divider_rows.empty() && emitted_data_rows == divider_at;
    if (!divider_here && emitted_data_rows == data_rows) divider_here = true;
    if (divider_here) {
      add(r, 0, 1, m, pick(rng, header_words()) + " overview");
      divider_rows.push_back(r);
    } else {
      for (int j = 0; j < m; ++j) {
        const auto& pool = numeric_col[static_cast<std::size_t>(j)] ? numeric_values() : data_words();
        add(r, j, 1, 1, pick(rng, pool));
      }
      ++emitted_data_rows;
    }
    ++r;
  }

  // Occasional vertical merge of two data cells in one column.
  if (rng.next_below(100) < 30 && data_rows >= 2) {
    int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m)));
    for (std::size_t a = 0; a < cells.size(); ++a) {
      CellSpec& top = cells[a];
      if (top.row < header_rows || top.col != j || top.col_span != 1 || top.row_span != 1) continue;
      bool top_is_divider = false;
      for (int d : divider_rows)
        if (top.row == d) top_is_divider = true;
      if (top_is_divider) continue;
      // find the span-1 cell directly below in the same column
      std::size_t below = SIZE_MAX;
      for (std::size_t b = 0; b < cells.size(); ++b) {
        const CellSpec& c = cells[b];
        if (c.row == top.row + 1 && c.col == j && c.row_span == 1 && c.col_span == 1) below = b;
      }
      if (below == SIZE_MAX) continue;
      bool below_is_divider = false;
      for (int d : divider_rows)
        if (cells[below].row == d) below_is_divider = true;
      if (below_is_divider) continue;
      top.row_span = 2;
      cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(below));
      break;
    }
  }

  out.grid = TableGrid::from_cells(n, m, std::move(cells));
  return out;
}

inline std::vector<SynthTable> generate_synthetic_corpus(int count, std::uint64_t corpus_seed) {
  std::vector<SynthTable> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(generate_synthetic_table(corpus_seed, i));
  return out;
}

}  // namespace tabgraph
