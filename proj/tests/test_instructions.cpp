#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "tabgraph/fixtures.hpp"
#include "tabgraph/graph.hpp"
#include "tabgraph/instructions.hpp"
#include "tabgraph/structure.hpp"

using namespace tabgraph;

namespace {

struct Built {
  TableGrid grid;
  StructureReport report;
  TabularGraph graph;
};

Built build(const TableGrid& grid) {
  Built b{grid, analyze_structure(grid), {}};
  b.graph = build_graph(b.grid, b.report);
  return b;
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

// Parses "1→3, 2→1" into {1:3, 2:1}.
std::map<int, int> parse_mapping(const std::string& answer) {
  std::map<int, int> out;
  std::size_t pos = 0;
  while (pos < answer.size()) {
    std::size_t arrow = answer.find("→", pos);
    if (arrow == std::string::npos) break;
    int p = std::stoi(answer.substr(pos, arrow - pos));
    std::size_t comma = answer.find(", ", arrow);
    std::string rhs = answer.substr(arrow + 3, comma == std::string::npos
                                                    ? std::string::npos
                                                    : comma - arrow - 3);
    out[p] = std::stoi(rhs);
    if (comma == std::string::npos) break;
    pos = comma + 2;
  }
  return out;
}

// Extracts the single-quoted items of the shuffled list in a TCM prompt.
std::vector<std::string> parse_list(const std::string& prompt) {
  std::vector<std::string> out;
  std::size_t start = prompt.find("every cell: ");
  REQUIRE(start != std::string::npos);
  std::size_t pos = start;
  while (true) {
    std::size_t q1 = prompt.find('\'', pos);
    if (q1 == std::string::npos) break;
    std::size_t q2 = prompt.find('\'', q1 + 1);
    if (q2 == std::string::npos) break;
    out.push_back(prompt.substr(q1 + 1, q2 - q1 - 1));
    pos = q2 + 1;
    if (prompt.compare(pos, 2, ", ") != 0) break;
  }
  return out;
}

}  // namespace

TEST_CASE("trc: income table rows label header, header, data, data") {
  Built b = build(income_table());
  InstructionSample s = gen_trc("income", b.grid, b.report, b.graph, 5);
  CHECK(s.answer == "Header Row, Header Row, Data Row, Data Row");
  CHECK(s.node_ids.size() == 4);
  CHECK(count_occurrences(s.prompt, kTabularNodeToken) == 4);
  CHECK(s.node_ids[0].kind == NodeKind::Row);
  CHECK(s.prompt.rfind(kTableStartToken, 0) == 0);  // placeholder block leads
}

TEST_CASE("trc: single-row table is one header placeholder") {
  Built b = build(uniform_grid(1, 2));
  InstructionSample s = gen_trc("tiny", b.grid, b.report, b.graph, 1);
  CHECK(s.answer == "Header Row");
  CHECK(s.node_ids.size() == 1);
}

TEST_CASE("trc: full-width divider row is labeled header") {
  TableGrid g = TableGrid::from_cells(
      5, 2,
      {cell(0, 0, 1, 1, "name"), cell(0, 1, 1, 1, "value"), cell(1, 0, 1, 1, "a"),
       cell(1, 1, 1, 1, "1"), cell(2, 0, 1, 1, "b"), cell(2, 1, 1, 1, "2"),
       cell(3, 0, 1, 2, "section"), cell(4, 0, 1, 1, "c"), cell(4, 1, 1, 1, "3")});
  Built b = build(g);
  InstructionSample s = gen_trc("divided", b.grid, b.report, b.graph, 1);
  CHECK(s.answer == "Header Row, Data Row, Data Row, Header Row, Data Row");
}

TEST_CASE("tcm: income table has ten placeholders and income maps to 'income'") {
  Built b = build(income_table());
  InstructionSample s = gen_tcm("income", b.grid, b.report, b.graph, 99);
  CHECK(s.node_ids.size() == 10);
  CHECK(count_occurrences(s.prompt, kTabularNodeToken) == 10);

  std::vector<std::string> list = parse_list(s.prompt);
  REQUIRE(list.size() == 10);
  std::map<int, int> mapping = parse_mapping(s.answer);
  REQUIRE(mapping.size() == 10);

  // Placeholder p corresponds to the p-th cell node in canonical order;
  // cell (1,1) is "income" and must map to the list entry "income".
  int income_position = -1;
  for (std::size_t k = 0; k < s.node_ids.size(); ++k) {
    if (s.node_ids[k].row == 1 && s.node_ids[k].col == 1)
      income_position = static_cast<int>(k) + 1;
  }
  REQUIRE(income_position > 0);
  CHECK(list[static_cast<std::size_t>(mapping[income_position] - 1)] == "income");
}

TEST_CASE("tcm: single-cell table answers 1->1") {
  Built b = build(uniform_grid(1, 1));
  InstructionSample s = gen_tcm("one", b.grid, b.report, b.graph, 3);
  CHECK(s.answer == "1→1");
}

TEST_CASE("tcm: duplicates map to the first occurrence and reconstruct the cells") {
  TableGrid g = TableGrid::from_cells(
      2, 2,
      {cell(0, 0, 1, 1, "x"), cell(0, 1, 1, 1, "y"), cell(1, 0, 1, 1, "x"),
       cell(1, 1, 1, 1, "x")});
  Built b = build(g);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 17ULL}) {
    InstructionSample s = gen_tcm("dup", b.grid, b.report, b.graph, seed);
    std::vector<std::string> list = parse_list(s.prompt);
    std::map<int, int> mapping = parse_mapping(s.answer);
    REQUIRE(list.size() == 4);
    REQUIRE(mapping.size() == 4);
    std::vector<std::string> canonical = {"x", "y", "x", "x"};
    for (int p = 1; p <= 4; ++p) {
      int idx = mapping[p];
      // first-occurrence rule
      for (int earlier = 1; earlier < idx; ++earlier)
        CHECK(list[static_cast<std::size_t>(earlier - 1)] !=
              list[static_cast<std::size_t>(idx - 1)]);
      // applying the mapping reconstructs the canonical sequence
      CHECK(list[static_cast<std::size_t>(idx - 1)] == canonical[static_cast<std::size_t>(p - 1)]);
    }
  }
}

TEST_CASE("tcm: generation is a pure function of (table, seed)") {
  Built b = build(income_table());
  InstructionSample a = gen_tcm("income", b.grid, b.report, b.graph, 5);
  InstructionSample c = gen_tcm("income", b.grid, b.report, b.graph, 5);
  CHECK(sample_to_json(a).dump() == sample_to_json(c).dump());
  InstructionSample d = gen_tcm("income", b.grid, b.report, b.graph, 6);
  CHECK(sample_to_json(a).dump() != sample_to_json(d).dump());
}

TEST_CASE("tcg: context passes through; fallback flags a weak target") {
  Built b = build(income_table());
  InstructionSample with = gen_tcg("income", b.grid, b.report, b.graph,
                                   std::string("2023 annual income statement"), 1);
  CHECK(with.answer == "2023 annual income statement");
  CHECK_FALSE(with.weak_target);
  CHECK(with.node_ids.size() == 1);
  CHECK(with.node_ids[0].kind == NodeKind::Table);

  InstructionSample without = gen_tcg("income", b.grid, b.report, b.graph, std::nullopt, 1);
  CHECK(without.answer == "project; detail; income; cost");
  CHECK(without.weak_target);
  CHECK(sample_to_json(without)["meta"]["weak_target"] == true);
}

TEST_CASE("downstream ctc: per-cell labels in reading order") {
  Built b = build(income_table());
  TaskAnnotation ann;
  for (const CellSpec& c : b.grid.cells()) {
    bool header = c.row < 2;
    ann.cell_labels[{c.row, c.col}] = header ? "header cell" : "data cell";
  }
  auto samples = gen_downstream("income", b.grid, b.report, b.graph, ann, TaskKind::CTC, 1);
  REQUIRE(samples.size() == 1);
  const std::string& a = samples[0].answer;
  CHECK(a.rfind("'project': header cell; 'detail': header cell", 0) == 0);
  CHECK(a.find("'53,196,521.18': data cell") != std::string::npos);
  CHECK(samples[0].node_ids.size() == 10);
}

TEST_CASE("downstream ttc: one placeholder, label verbatim") {
  Built b = build(income_table());
  TaskAnnotation ann;
  ann.table_label = "financial report";
  auto samples = gen_downstream("income", b.grid, b.report, b.graph, ann, TaskKind::TTC, 1);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].node_ids.size() == 1);
  CHECK(count_occurrences(samples[0].prompt, kTabularNodeToken) == 1);
  CHECK(samples[0].answer == "financial report");
}

TEST_CASE("downstream qa: answer passes through verbatim") {
  Built b = build(income_table());
  TaskAnnotation ann;
  ann.qa_pairs.emplace_back("What is the income from main business?", "53,196,521.18");
  ann.qa_pairs.emplace_back("What is the cost of other business?", "919,511.13");
  auto samples = gen_downstream("income", b.grid, b.report, b.graph, ann, TaskKind::TableQA, 1);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].answer == "53,196,521.18");
  CHECK(samples[0].prompt.find("What is the income from main business?") != std::string::npos);
  CHECK(samples[0].node_ids.size() == 10);
  CHECK(samples[1].answer == "919,511.13");
}

TEST_CASE("downstream generators demand their annotations") {
  Built b = build(income_table());
  TaskAnnotation empty;
  for (TaskKind task : {TaskKind::CTC, TaskKind::TTC, TaskKind::TableQA}) {
    CHECK_THROWS_MATCHES(gen_downstream("income", b.grid, b.report, b.graph, empty, task, 1),
                         Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::missing_annotation;
                         }));
  }
}

TEST_CASE("splice: zero placeholders is the identity") {
  std::vector<int> tokens = {5, 6, 7};
  SplicedSequence s = splice(tokens, kTabularNodeTokenId, {});
  REQUIRE(s.slots.size() == 3);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    CHECK_FALSE(s.slots[i].is_vector);
    CHECK(s.slots[i].token_id == tokens[i]);
  }
}

TEST_CASE("splice: ten placeholders consume ten vectors in order") {
  std::vector<int> tokens;
  tokens.push_back(kTableStartTokenId);
  for (int i = 0; i < 10; ++i) {
    tokens.push_back(kTabularNodeTokenId);
    tokens.push_back(100 + i);  // interleaved text tokens
  }
  tokens.push_back(kTableEndTokenId);
  std::vector<std::vector<double>> vectors(10, std::vector<double>{1.0});
  SplicedSequence s = splice(tokens, kTabularNodeTokenId, vectors);
  REQUIRE(s.slots.size() == tokens.size());
  std::size_t expected_index = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == kTabularNodeTokenId) {
      CHECK(s.slots[i].is_vector);
      CHECK(s.slots[i].vector_index == expected_index++);
    } else {
      CHECK_FALSE(s.slots[i].is_vector);
      CHECK(s.slots[i].token_id == tokens[i]);
    }
  }
  CHECK(expected_index == 10);
}

TEST_CASE("splice: count mismatch aborts") {
  std::vector<int> tokens = {kTabularNodeTokenId, kTabularNodeTokenId, kTabularNodeTokenId};
  std::vector<std::vector<double>> two(2, std::vector<double>{1.0});
  CHECK_THROWS_MATCHES(splice(tokens, kTabularNodeTokenId, two), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::count_mismatch; }));
  std::vector<std::vector<double>> four(4, std::vector<double>{1.0});
  CHECK_THROWS_AS(splice(tokens, kTabularNodeTokenId, four), Error);
}

TEST_CASE("sample validation rejects protocol violations") {
  Built b = build(uniform_grid(1, 1));
  InstructionSample s = gen_trc("x", b.grid, b.report, b.graph, 1);
  InstructionSample broken = s;
  broken.prompt += " <tabular_node>";  // stray placeholder outside the block
  CHECK_THROWS_AS(validate_sample(broken), Error);
  InstructionSample missing = s;
  missing.node_ids.clear();
  CHECK_THROWS_AS(validate_sample(missing), Error);
}

TEST_CASE("jsonl: field order is pinned and the loader re-validates") {
  Built b = build(income_table());
  std::vector<InstructionSample> samples = {
      gen_trc("income", b.grid, b.report, b.graph, 5),
      gen_tcm("income", b.grid, b.report, b.graph, 5),
  };
  std::string line = sample_to_json(samples[0]).dump();
  CHECK(line.rfind("{\"id\":\"income:trc\",\"task\":\"trc\",\"prompt\":", 0) == 0);
  CHECK(line.find("\"node_ids\":") < line.find("\"answer\":"));
  CHECK(line.find("\"answer\":") < line.find("\"meta\":"));

  auto path = (std::filesystem::temp_directory_path() / "tabgraph_samples.jsonl").string();
  write_jsonl(path, samples);
  auto loaded = read_jsonl(path);
  REQUIRE(loaded.size() == 2);
  CHECK(sample_to_json(loaded[0]).dump() == sample_to_json(samples[0]).dump());
  CHECK(sample_to_json(loaded[1]).dump() == sample_to_json(samples[1]).dump());

  // Corrupt the node_ids so the placeholder count no longer matches.
  ordered_json j = sample_to_json(samples[0]);
  j["node_ids"].erase(0);
  std::ofstream out(path, std::ios::binary);
  out << j.dump() << "\n";
  out.close();
  CHECK_THROWS_AS(read_jsonl(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("special token registry lists the three reserved tokens") {
  ordered_json j = special_token_registry();
  REQUIRE(j.at("tokens").size() == 3);
  CHECK(j["tokens"][0]["token"] == "<tabular_node>");
  CHECK(j["tokens"][0]["id"] == 32000);
  CHECK(j["tokens"][1]["token"] == "<table_start>");
  CHECK(j["tokens"][2]["token"] == "<table_end>");
}

TEST_CASE("reserved-token detection") {
  CHECK(contains_reserved_token("ends with <table_end>"));
  CHECK_FALSE(contains_reserved_token("plain text"));
}
