#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabgraph/error.hpp"
#include "tabgraph/graph.hpp"
#include "tabgraph/rng.hpp"
#include "tabgraph/structure.hpp"
#include "tabgraph/table.hpp"

namespace tabgraph {

// Reserved placeholder tokens and their ids (appended after a 32000-token
// base vocabulary).
inline constexpr const char* kTabularNodeToken = "<tabular_node>";
inline constexpr const char* kTableStartToken = "<table_start>";
inline constexpr const char* kTableEndToken = "<table_end>";
inline constexpr int kTabularNodeTokenId = 32000;
inline constexpr int kTableStartTokenId = 32001;
inline constexpr int kTableEndTokenId = 32002;

inline ordered_json special_token_registry() {
  ordered_json j;
  ordered_json tokens = ordered_json::array();
  auto add = [&](const char* tok, int id) {
    ordered_json t;
    t["token"] = tok;
    t["id"] = id;
    tokens.push_back(std::move(t));
  };
  add(kTabularNodeToken, kTabularNodeTokenId);
  add(kTableStartToken, kTableStartTokenId);
  add(kTableEndToken, kTableEndTokenId);
  j["tokens"] = std::move(tokens);
  return j;
}

enum class TaskKind { TRC, TCM, TCG, CTC, TTC, TableQA };

inline const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::TRC: return "trc";
    case TaskKind::TCM: return "tcm";
    case TaskKind::TCG: return "tcg";
    case TaskKind::CTC: return "ctc";
    case TaskKind::TTC: return "ttc";
    case TaskKind::TableQA: return "qa";
  }
  return "?";
}

inline TaskKind task_from_name(const std::string& s) {
  for (TaskKind t : {TaskKind::TRC, TaskKind::TCM, TaskKind::TCG, TaskKind::CTC, TaskKind::TTC,
                     TaskKind::TableQA}) {
    if (s == task_name(t)) return t;
  }
  throw Error(Errc::bad_config, "unknown task " + s);
}

// Canonical prompt templates, version v1. The placeholder block
// <table_start> <tabular_node> x k <table_end> always precedes the task
// instruction.
inline constexpr const char* kTemplateVersion = "v1";
inline constexpr const char* kTrcInstruction =
    "The placeholders above are the row nodes of a table, in order from the first row to the "
    "last. Classify each row as 'Header Row' or 'Data Row'. Answer with one label per row, "
    "separated by commas.";
inline constexpr const char* kTcmInstruction =
    "The placeholders above are the cell nodes of a table in reading order. The following "
    "shuffled list contains the original text of every cell: {list}. For each placeholder "
    "position p, give the 1-based index i of its text in the list as p→i, separated by "
    "commas.";
inline constexpr const char* kTcgInstruction =
    "The placeholder above is the table node of a table. Generate the context surrounding this "
    "table.";
inline constexpr const char* kCtcInstruction =
    "The placeholders above are the cell nodes of a table in reading order. Classify the type of "
    "each cell. Answer with 'cell text': type pairs separated by semicolons.";
inline constexpr const char* kTtcInstruction =
    "The placeholder above is the table node of a table. Classify the type of this table.";
inline constexpr const char* kQaInstruction =
    "The placeholders above are the cell nodes of a table in reading order. Using the table, "
    "answer the question: {question}";

struct InstructionSample {
  std::string id;
  TaskKind task = TaskKind::TRC;
  std::string prompt;
  std::vector<NodeId> node_ids;
  std::string answer;
  std::string table_id;
  std::uint64_t seed = 0;
  bool weak_target = false;
};

inline int count_occurrences(std::string_view haystack, std::string_view needle) {
  int n = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

inline bool contains_reserved_token(std::string_view text) {
  return text.find(kTabularNodeToken) != std::string_view::npos ||
         text.find(kTableStartToken) != std::string_view::npos ||
         text.find(kTableEndToken) != std::string_view::npos;
}

// Placeholder protocol: one start token, k node placeholders, one end token,
// and k must equal |node_ids|. Checked at write and at load time.
inline void validate_sample(const InstructionSample& s) {
  int k = count_occurrences(s.prompt, kTabularNodeToken);
  if (k != static_cast<int>(s.node_ids.size()))
    throw Error(Errc::count_mismatch,
                "sample " + s.id + ": " + std::to_string(k) + " placeholders for " +
                    std::to_string(s.node_ids.size()) + " node ids");
  if (count_occurrences(s.prompt, kTableStartToken) != 1 ||
      count_occurrences(s.prompt, kTableEndToken) != 1)
    throw Error(Errc::count_mismatch, "sample " + s.id + ": start/end tokens must appear once");
  std::size_t start = s.prompt.find(kTableStartToken);
  std::size_t end = s.prompt.find(kTableEndToken);
  if (end < start) throw Error(Errc::count_mismatch, "sample " + s.id + ": end before start");
  std::size_t pos = s.prompt.find(kTabularNodeToken);
  while (pos != std::string::npos) {
    if (pos < start || pos > end)
      throw Error(Errc::count_mismatch, "sample " + s.id + ": placeholder outside block");
    pos = s.prompt.find(kTabularNodeToken, pos + 1);
  }
}

namespace detail_instr {

inline std::string placeholder_block(int k) {
  std::string out = kTableStartToken;
  for (int i = 0; i < k; ++i) {
    out += " ";
    out += kTabularNodeToken;
  }
  out += " ";
  out += kTableEndToken;
  return out;
}

inline std::string quote_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "'" + items[i] + "'";
  }
  return out;
}

inline std::string replace_once(std::string tmpl, std::string_view key, std::string_view value) {
  std::size_t pos = tmpl.find(key);
  if (pos != std::string::npos) tmpl.replace(pos, key.size(), value);
  return tmpl;
}

}  // namespace detail_instr

// ---- Stage-1 self-supervised generators ----

// Row-type classification: one sample per table, placeholders are the row
// nodes in row order, answer from the row-type algorithm.
inline InstructionSample gen_trc(const std::string& table_id, const TableGrid& grid,
                                 const StructureReport& report, const TabularGraph& graph,
                                 std::uint64_t seed) {
  InstructionSample s;
  s.id = table_id + ":trc";
  s.task = TaskKind::TRC;
  s.table_id = table_id;
  s.seed = seed;
  for (int i = 0; i < grid.n_rows(); ++i)
    s.node_ids.push_back(graph.nodes[static_cast<std::size_t>(graph.row_node(i))].id);
  s.prompt = detail_instr::placeholder_block(grid.n_rows()) + "\n" + kTrcInstruction;
  std::string answer;
  for (int i = 0; i < grid.n_rows(); ++i) {
    if (i) answer += ", ";
    answer += report.row_types[static_cast<std::size_t>(i)] == RowType::HeaderRow ? "Header Row"
                                                                                  : "Data Row";
  }
  s.answer = answer;
  validate_sample(s);
  return s;
}

// Cell matching: placeholders are all cell nodes in canonical order; the
// prompt carries a seeded shuffle of the cell texts; the answer maps each
// placeholder position to the first occurrence of its text in the list
// (1-based on both sides).
inline InstructionSample gen_tcm(const std::string& table_id, const TableGrid& grid,
                                 const StructureReport& report, const TabularGraph& graph,
                                 std::uint64_t seed) {
  (void)report;
  InstructionSample s;
  s.id = table_id + ":tcm";
  s.task = TaskKind::TCM;
  s.table_id = table_id;
  s.seed = seed;

  std::vector<std::string> texts;
  for (int c = 0; c < graph.num_cells(); ++c) {
    const GraphNode& node = graph.nodes[static_cast<std::size_t>(graph.cell_node(c))];
    s.node_ids.push_back(node.id);
    texts.push_back(node.init_text);
  }

  std::vector<std::string> shuffled = texts;
  SplitMix64 rng = table_stream(seed, table_id);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(shuffled[i - 1], shuffled[j]);
  }

  s.prompt = detail_instr::placeholder_block(static_cast<int>(texts.size())) + "\n" +
             detail_instr::replace_once(kTcmInstruction, "{list}",
                                        detail_instr::quote_list(shuffled));
  std::string answer;
  for (std::size_t p = 0; p < texts.size(); ++p) {
    std::size_t first = 0;
    while (shuffled[first] != texts[p]) ++first;
    if (p) answer += ", ";
    answer += std::to_string(p + 1) + "→" + std::to_string(first + 1);
  }
  s.answer = answer;
  validate_sample(s);
  return s;
}

// Context generation: one sample per table over the table node. Uses the
// corpus context when available; otherwise falls back to the table node's
// header concatenation, flagged as a weak target.
inline InstructionSample gen_tcg(const std::string& table_id, const TableGrid& grid,
                                 const StructureReport& report, const TabularGraph& graph,
                                 const std::optional<std::string>& context, std::uint64_t seed) {
  (void)grid;
  (void)report;
  InstructionSample s;
  s.id = table_id + ":tcg";
  s.task = TaskKind::TCG;
  s.table_id = table_id;
  s.seed = seed;
  s.node_ids.push_back(graph.nodes[static_cast<std::size_t>(graph.table_node())].id);
  s.prompt = detail_instr::placeholder_block(1) + "\n" + kTcgInstruction;
  if (context && !context->empty()) {
    s.answer = *context;
  } else {
    s.answer = graph.nodes[static_cast<std::size_t>(graph.table_node())].init_text;
    s.weak_target = true;
  }
  validate_sample(s);
  return s;
}

// ---- Stage-2 downstream generators ----

inline std::vector<InstructionSample> gen_downstream(const std::string& table_id,
                                                     const TableGrid& grid,
                                                     const StructureReport& report,
                                                     const TabularGraph& graph,
                                                     const TaskAnnotation& annotation,
                                                     TaskKind task, std::uint64_t seed) {
  (void)report;
  std::vector<InstructionSample> out;
  auto cell_node_ids = [&]() {
    std::vector<NodeId> ids;
    for (int c = 0; c < graph.num_cells(); ++c)
      ids.push_back(graph.nodes[static_cast<std::size_t>(graph.cell_node(c))].id);
    return ids;
  };

  switch (task) {
    case TaskKind::CTC: {
      if (!annotation.has_cell_labels())
        throw Error(Errc::missing_annotation, table_id + ": CTC requires cell labels");
      annotation.validate_against(grid);
      InstructionSample s;
      s.id = table_id + ":ctc";
      s.task = TaskKind::CTC;
      s.table_id = table_id;
      s.seed = seed;
      s.node_ids = cell_node_ids();
      s.prompt = detail_instr::placeholder_block(static_cast<int>(s.node_ids.size())) + "\n" +
                 kCtcInstruction;
      std::string answer;
      for (std::size_t c = 0; c < grid.cells().size(); ++c) {
        const CellSpec& cell = grid.cells()[c];
        if (c) answer += "; ";
        answer += "'" + cell.text + "': " + annotation.cell_labels.at({cell.row, cell.col});
      }
      s.answer = answer;
      validate_sample(s);
      out.push_back(std::move(s));
      break;
    }
    case TaskKind::TTC: {
      if (!annotation.table_label)
        throw Error(Errc::missing_annotation, table_id + ": TTC requires a table label");
      InstructionSample s;
      s.id = table_id + ":ttc";
      s.task = TaskKind::TTC;
      s.table_id = table_id;
      s.seed = seed;
      s.node_ids.push_back(graph.nodes[static_cast<std::size_t>(graph.table_node())].id);
      s.prompt = detail_instr::placeholder_block(1) + "\n" + kTtcInstruction;
      s.answer = *annotation.table_label;
      validate_sample(s);
      out.push_back(std::move(s));
      break;
    }
    case TaskKind::TableQA: {
      if (annotation.qa_pairs.empty())
        throw Error(Errc::missing_annotation, table_id + ": QA requires qa_pairs");
      for (std::size_t q = 0; q < annotation.qa_pairs.size(); ++q) {
        InstructionSample s;
        s.id = table_id + ":qa:" + std::to_string(q);
        s.task = TaskKind::TableQA;
        s.table_id = table_id;
        s.seed = seed;
        s.node_ids = cell_node_ids();
        s.prompt = detail_instr::placeholder_block(static_cast<int>(s.node_ids.size())) + "\n" +
                   detail_instr::replace_once(kQaInstruction, "{question}",
                                              annotation.qa_pairs[q].first);
        s.answer = annotation.qa_pairs[q].second;
        validate_sample(s);
        out.push_back(std::move(s));
      }
      break;
    }
    default:
      throw Error(Errc::bad_config, "gen_downstream only handles ctc/ttc/qa");
  }
  return out;
}

// ---- embedding splice ----

struct SplicedSequence {
  struct Slot {
    bool is_vector = false;
    int token_id = 0;         // text slot
    std::size_t vector_index = 0;  // vector slot: index into the supplied node vectors
  };
  std::vector<Slot> slots;
};

// Replaces each placeholder token slot, in order, with a reference to the
// corresponding node vector. Aborts on any count mismatch; never truncates
// or pads.
inline SplicedSequence splice(const std::vector<int>& prompt_tokens, int placeholder_token_id,
                              const std::vector<std::vector<double>>& node_vectors) {
  std::size_t placeholders = 0;
  for (int t : prompt_tokens)
    if (t == placeholder_token_id) ++placeholders;
  if (placeholders != node_vectors.size())
    throw Error(Errc::count_mismatch, std::to_string(placeholders) + " placeholders for " +
                                          std::to_string(node_vectors.size()) + " node vectors");
  SplicedSequence out;
  out.slots.reserve(prompt_tokens.size());
  std::size_t next_vec = 0;
  for (int t : prompt_tokens) {
    SplicedSequence::Slot slot;
    if (t == placeholder_token_id) {
      slot.is_vector = true;
      slot.vector_index = next_vec++;
    } else {
      slot.token_id = t;
    }
    out.slots.push_back(slot);
  }
  return out;
}

// ---- JSONL io ----
// Field order is fixed: id, task, prompt, node_ids, answer, meta.

inline ordered_json node_id_to_json(const NodeId& id) {
  ordered_json j;
  j["kind"] = node_kind_name(id.kind);
  if (id.kind == NodeKind::Table) j["coord"] = ordered_json::array();
  else if (id.kind == NodeKind::Row) j["coord"] = ordered_json::array({id.row});
  else j["coord"] = ordered_json::array({id.row, id.col});
  return j;
}

inline ordered_json sample_to_json(const InstructionSample& s) {
  ordered_json j;
  j["id"] = s.id;
  j["task"] = task_name(s.task);
  j["prompt"] = s.prompt;
  ordered_json ids = ordered_json::array();
  for (const NodeId& id : s.node_ids) ids.push_back(node_id_to_json(id));
  j["node_ids"] = std::move(ids);
  j["answer"] = s.answer;
  ordered_json meta;
  meta["table"] = s.table_id;
  meta["seed"] = s.seed;
  if (s.weak_target) meta["weak_target"] = true;
  j["meta"] = std::move(meta);
  return j;
}

inline InstructionSample sample_from_json(const ordered_json& j) {
  InstructionSample s;
  s.id = j.at("id").get<std::string>();
  s.task = task_from_name(j.at("task").get<std::string>());
  s.prompt = j.at("prompt").get<std::string>();
  for (const auto& ji : j.at("node_ids")) {
    NodeId id;
    std::string kind = ji.at("kind").get<std::string>();
    const auto& coord = ji.at("coord");
    if (kind == "table") id = {NodeKind::Table, -1, -1};
    else if (kind == "row") id = {NodeKind::Row, coord.at(0).get<int>(), -1};
    else if (kind == "header_cell") id = {NodeKind::HeaderCell, coord.at(0).get<int>(), coord.at(1).get<int>()};
    else id = {NodeKind::DataCell, coord.at(0).get<int>(), coord.at(1).get<int>()};
    s.node_ids.push_back(id);
  }
  s.answer = j.at("answer").get<std::string>();
  const auto& meta = j.at("meta");
  s.table_id = meta.at("table").get<std::string>();
  s.seed = meta.at("seed").get<std::uint64_t>();
  if (meta.contains("weak_target")) s.weak_target = meta.at("weak_target").get<bool>();
  validate_sample(s);
  return s;
}

inline void write_jsonl(const std::string& path, const std::vector<InstructionSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  for (const InstructionSample& s : samples) {
    validate_sample(s);
    out << sample_to_json(s).dump() << "\n";
  }
}

inline std::vector<InstructionSample> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::vector<InstructionSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error(Errc::io_error, path + ":" + std::to_string(lineno) + ": bad JSON");
    out.push_back(sample_from_json(j));
  }
  return out;
}

}  // namespace tabgraph
