#pragma once

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tabgraph/error.hpp"
#include "tabgraph/table.hpp"

namespace tabgraph {

struct ParseOptions {
  bool strict = false;  // reject ragged/padded tables instead of repairing
};

struct ParseDiagnostics {
  int padded_cells = 0;     // holes filled with empty cells
  int clamped_spans = 0;    // rowspan/colspan attributes < 1 clamped to 1
  int clipped_rowspans = 0; // rowspans reaching past the last row, clipped
  int th_cells = 0;

  std::vector<std::string> notes;
};

struct ParseResult {
  TableGrid grid;
  ParseDiagnostics diagnostics;
};

namespace detail_html {

struct Tag {
  std::string name;                         // lowercase
  bool closing = false;
  std::map<std::string, std::string> attrs; // lowercase keys
};

inline void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "amp") out.push_back('&');
    else if (name == "lt") out.push_back('<');
    else if (name == "gt") out.push_back('>');
    else if (name == "quot") out.push_back('"');
    else if (name == "apos") out.push_back('\'');
    else if (name == "nbsp") out.push_back(' ');
    else if (!name.empty() && name[0] == '#') {
      unsigned long cp = 0;
      bool ok = false;
      if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
        for (std::size_t k = 2; k < name.size(); ++k) {
          char c = name[k];
          int d = (c >= '0' && c <= '9')   ? c - '0'
                  : (c >= 'a' && c <= 'f') ? c - 'a' + 10
                  : (c >= 'A' && c <= 'F') ? c - 'A' + 10
                                           : -1;
          if (d < 0) { ok = false; break; }
          cp = cp * 16 + static_cast<unsigned long>(d);
          ok = true;
        }
      } else {
        for (std::size_t k = 1; k < name.size(); ++k) {
          if (!std::isdigit(static_cast<unsigned char>(name[k]))) { ok = false; break; }
          cp = cp * 10 + static_cast<unsigned long>(name[k] - '0');
          ok = true;
        }
      }
      if (ok && cp > 0 && cp <= 0x10FFFF) append_utf8(out, cp);
      else { out.push_back(s[i++]); continue; }
    } else {
      out.push_back(s[i++]);
      continue;
    }
    i = semi + 1;
  }
  return out;
}

// Trim and collapse internal whitespace runs to single spaces.
inline std::string normalize_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_run = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_run = true;
      continue;
    }
    if (in_run && !out.empty()) out.push_back(' ');
    in_run = false;
    out.push_back(c);
  }
  return out;
}

// Parses the tag starting at pos (s[pos] == '<'); advances pos past '>'.
// Returns false for constructs to skip entirely (comments, doctype).
inline bool parse_tag(std::string_view s, std::size_t& pos, Tag& tag) {
  std::size_t i = pos + 1;
  if (s.compare(i, 3, "!--") == 0) {
    std::size_t end = s.find("-->", i + 3);
    pos = (end == std::string_view::npos) ? s.size() : end + 3;
    return false;
  }
  if (i < s.size() && (s[i] == '!' || s[i] == '?')) {
    std::size_t end = s.find('>', i);
    pos = (end == std::string_view::npos) ? s.size() : end + 1;
    return false;
  }
  tag = Tag{};
  if (i < s.size() && s[i] == '/') {
    tag.closing = true;
    ++i;
  }
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-')) {
    tag.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
    ++i;
  }
  // Attributes: name, name=bare, name="quoted", name='quoted'.
  while (i < s.size() && s[i] != '>') {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size() || s[i] == '>' || s[i] == '/') {
      if (i < s.size() && s[i] == '/') ++i;
      continue;
    }
    std::string key;
    while (i < s.size() && s[i] != '=' && s[i] != '>' &&
           !std::isspace(static_cast<unsigned char>(s[i]))) {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
      ++i;
    }
    std::string value;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i < s.size() && s[i] == '=') {
      ++i;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
        char q = s[i++];
        while (i < s.size() && s[i] != q) value.push_back(s[i++]);
        if (i < s.size()) ++i;
      } else {
        while (i < s.size() && s[i] != '>' && !std::isspace(static_cast<unsigned char>(s[i])))
          value.push_back(s[i++]);
      }
    }
    if (!key.empty()) tag.attrs[key] = value;
  }
  pos = (i < s.size()) ? i + 1 : s.size();
  return !tag.name.empty();
}

inline int span_attr(const Tag& tag, const std::string& key, ParseDiagnostics& diag) {
  auto it = tag.attrs.find(key);
  if (it == tag.attrs.end()) return 1;
  long v = 0;
  bool any = false;
  for (char c : it->second) {
    if (!std::isdigit(static_cast<unsigned char>(c))) break;
    v = v * 10 + (c - '0');
    any = true;
    if (v > 10000) break;
  }
  if (!any || v < 1) {
    ++diag.clamped_spans;
    return 1;
  }
  return static_cast<int>(v > 10000 ? 10000 : v);
}

struct PendingCell {
  int row = 0;
  int row_span = 1;
  int col_span = 1;
  bool th = false;
  std::string raw_text;
};

}  // namespace detail_html

// Parses an HTML document containing exactly one <table>. Cell text is
// entity-decoded, trimmed, and internal whitespace runs collapse to single
// spaces. Ragged rows and interior holes are padded with empty span-1 cells
// unless opts.strict is set.
inline ParseResult parse_html_table_ex(std::string_view html, const ParseOptions& opts = {}) {
  using namespace detail_html;

  ParseDiagnostics diag;

  // Pass 1: tokenize into per-row lists of pending cells.
  std::vector<std::vector<PendingCell>> rows;
  bool seen_table = false;
  bool in_table = false;
  bool table_done = false;
  bool in_cell = false;
  std::string text_acc;
  PendingCell cur;

  auto close_cell = [&]() {
    if (!in_cell) return;
    cur.raw_text = text_acc;
    if (rows.empty()) rows.emplace_back();
    rows.back().push_back(cur);
    in_cell = false;
    text_acc.clear();
  };

  std::size_t pos = 0;
  while (pos < html.size()) {
    if (html[pos] == '<') {
      Tag tag;
      std::size_t tag_start = pos;
      if (!parse_tag(html, pos, tag)) continue;
      (void)tag_start;
      if (tag.name == "table") {
        if (!tag.closing) {
          if (seen_table) throw Error(Errc::multiple_tables, "more than one <table> element");
          seen_table = true;
          in_table = true;
        } else if (in_table) {
          close_cell();
          in_table = false;
          table_done = true;
        }
        continue;
      }
      if (!in_table || table_done) continue;
      if (tag.name == "tr") {
        close_cell();
        if (!tag.closing) rows.emplace_back();
      } else if (tag.name == "td" || tag.name == "th") {
        close_cell();
        if (!tag.closing) {
          if (rows.empty()) rows.emplace_back();
          cur = PendingCell{};
          cur.row_span = span_attr(tag, "rowspan", diag);
          cur.col_span = span_attr(tag, "colspan", diag);
          cur.th = (tag.name == "th");
          if (cur.th) ++diag.th_cells;
          in_cell = true;
        }
      }
      // Any other tag inside a cell is formatting; drop the tag, keep text.
    } else {
      std::size_t next = html.find('<', pos);
      if (next == std::string_view::npos) next = html.size();
      if (in_cell) text_acc.append(html.substr(pos, next - pos));
      pos = next;
    }
  }
  close_cell();
  if (!seen_table) throw Error(Errc::malformed_table, "no <table> element found");

  // Rows with no cells of their own stay: spans from earlier rows may cover
  // them, and anything left uncovered is padded below.
  int n_rows = static_cast<int>(rows.size());
  if (n_rows == 0) throw Error(Errc::empty_table, "table has no rows");

  // Pass 2: span expansion over a growing occupancy grid.
  int n_cols = 0;
  std::vector<std::vector<int>> occ(n_rows);  // -1 free, else index into cells
  std::vector<CellSpec> cells;
  auto ensure_cols = [&](int want) {
    if (want <= n_cols) return;
    for (auto& r : occ) r.resize(want, -1);
    n_cols = want;
  };

  for (int i = 0; i < n_rows; ++i) {
    int j = 0;
    for (PendingCell& pc : rows[i]) {
      ensure_cols(j + 1);
      while (j < n_cols && occ[i][j] != -1) ++j;
      ensure_cols(j + 1);
      int rs = pc.row_span;
      if (i + rs > n_rows) {
        rs = n_rows - i;
        ++diag.clipped_rowspans;
      }
      int cs = pc.col_span;
      ensure_cols(j + cs);
      CellSpec spec;
      spec.row = i;
      spec.col = j;
      spec.row_span = rs;
      spec.col_span = cs;
      spec.text = normalize_ws(decode_entities(pc.raw_text));
      spec.th_hint = pc.th;
      int idx = static_cast<int>(cells.size());
      for (int r = i; r < i + rs; ++r) {
        for (int c = j; c < j + cs; ++c) {
          if (occ[r][c] != -1) {
            throw Error(Errc::malformed_table,
                        "overlapping spans at (" + std::to_string(r) + "," + std::to_string(c) +
                            "): cell (" + std::to_string(i) + "," + std::to_string(j) +
                            ") collides with cell (" + std::to_string(cells[occ[r][c]].row) + "," +
                            std::to_string(cells[occ[r][c]].col) + ")");
          }
          occ[r][c] = idx;
        }
      }
      cells.push_back(std::move(spec));
      j += cs;
    }
  }

  if (n_cols == 0 || cells.empty()) throw Error(Errc::empty_table, "table has no cells");

  // Fill holes left by ragged rows with empty cells.
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < n_cols; ++j) {
      if (occ[i][j] != -1) continue;
      if (opts.strict) {
        throw Error(Errc::malformed_table, "ragged row: no cell covers (" + std::to_string(i) +
                                               "," + std::to_string(j) + ")");
      }
      CellSpec pad;
      pad.row = i;
      pad.col = j;
      occ[i][j] = static_cast<int>(cells.size());
      cells.push_back(std::move(pad));
      ++diag.padded_cells;
    }
  }
  if (diag.padded_cells > 0)
    diag.notes.push_back("padded " + std::to_string(diag.padded_cells) + " empty cell(s)");

  ParseResult result{TableGrid::from_cells(n_rows, n_cols, std::move(cells)), std::move(diag)};
  return result;
}

inline TableGrid parse_html_table(std::string_view html) {
  return parse_html_table_ex(html).grid;
}

inline std::string escape_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Canonical HTML writer; parse(write_html(g)) == g for every valid grid.
inline std::string write_html(const TableGrid& grid) {
  std::string out = "<table>\n";
  for (int i = 0; i < grid.n_rows(); ++i) {
    out += "  <tr>";
    for (const CellSpec& c : grid.cells()) {
      if (c.row != i) continue;
      out += "<td";
      if (c.row_span > 1) out += " rowspan=\"" + std::to_string(c.row_span) + "\"";
      if (c.col_span > 1) out += " colspan=\"" + std::to_string(c.col_span) + "\"";
      out += ">" + escape_html(c.text) + "</td>";
    }
    out += "</tr>\n";
  }
  out += "</table>\n";
  return out;
}

}  // namespace tabgraph
