#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgraph/augment.hpp"
#include "tabgraph/embed.hpp"
#include "tabgraph/embed_remote.hpp"
#include "tabgraph/error.hpp"
#include "tabgraph/graph.hpp"
#include "tabgraph/html.hpp"
#include "tabgraph/instructions.hpp"
#include "tabgraph/manifest.hpp"
#include "tabgraph/metrics.hpp"
#include "tabgraph/rgnn.hpp"
#include "tabgraph/structure.hpp"
#include "tabgraph/synth.hpp"
#include "tabgraph/table.hpp"
#include "tabgraph/train.hpp"

namespace tabgraph {

namespace fs = std::filesystem;

struct EmbedderSettings {
  std::string kind = "test";  // test | remote
  int dim = kDefaultEmbeddingDim;
  std::string endpoint;
  int batch_size = 32;
  std::string cache_path;

  ProviderConfig to_provider_config() const {
    ProviderConfig cfg;
    if (kind == "test") cfg.kind = ProviderKind::DeterministicTest;
    else if (kind == "remote") cfg.kind = ProviderKind::RemoteService;
    else throw Error(Errc::bad_config, "embedder kind must be test or remote");
    cfg.dim = dim;
    cfg.endpoint = endpoint;
    cfg.batch_size = batch_size;
    cfg.cache_path = cache_path;
    return cfg;
  }
};

struct ProbeSettings {
  bool enabled = false;
  int steps = 60;
  double lr = 0.01;
  int batch_size = 8;
  int num_layers = 2;
  int hidden_dim = 32;
  std::string activation = "relu";
  bool self_loop = false;
  double val_fraction = 0.2;
  int eval_every = 10;
  int synthetic_tables = 0;  // > 0 trains on the bundled generator instead of inputs
};

struct PipelineConfig {
  std::string input;  // file, directory, or pattern with '*'
  std::uint64_t seed = 1;
  bool strict = false;
  bool auto_orient = false;
  bool prefix_numeric = false;
  bool flatten = false;
  std::string flatten_separator = kDefaultFlattenSeparator;
  int max_cells = 150;
  int limit = 0;  // 0 = unlimited
  bool header_hierarchy = true;
  std::vector<std::string> pretrain_tasks = {"trc", "tcm", "tcg"};
  std::vector<std::string> downstream_tasks;
  std::string annotations_dir;
  std::string contexts_dir;
  EmbedderSettings embedder;
  ProbeSettings probe;
  OrientationWeights orientation;
};

// ---- config JSON (resolved form echoed into manifests) ----

inline ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["input"] = c.input;
  j["seed"] = c.seed;
  j["strict"] = c.strict;
  j["auto_orient"] = c.auto_orient;
  j["prefix_numeric"] = c.prefix_numeric;
  j["flatten"] = c.flatten;
  j["flatten_separator"] = c.flatten_separator;
  j["max_cells"] = c.max_cells;
  j["limit"] = c.limit;
  j["header_hierarchy"] = c.header_hierarchy;
  j["pretrain_tasks"] = c.pretrain_tasks;
  j["downstream_tasks"] = c.downstream_tasks;
  j["annotations_dir"] = c.annotations_dir;
  j["contexts_dir"] = c.contexts_dir;
  ordered_json je;
  je["kind"] = c.embedder.kind;
  je["dim"] = c.embedder.dim;
  je["endpoint"] = c.embedder.endpoint;
  je["batch_size"] = c.embedder.batch_size;
  je["cache_path"] = c.embedder.cache_path;
  j["embedder"] = std::move(je);
  ordered_json jp;
  jp["enabled"] = c.probe.enabled;
  jp["steps"] = c.probe.steps;
  jp["lr"] = c.probe.lr;
  jp["batch_size"] = c.probe.batch_size;
  jp["num_layers"] = c.probe.num_layers;
  jp["hidden_dim"] = c.probe.hidden_dim;
  jp["activation"] = c.probe.activation;
  jp["self_loop"] = c.probe.self_loop;
  jp["val_fraction"] = c.probe.val_fraction;
  jp["eval_every"] = c.probe.eval_every;
  jp["synthetic_tables"] = c.probe.synthetic_tables;
  j["probe"] = std::move(jp);
  ordered_json jo;
  jo["f1"] = c.orientation.f1;
  jo["f2"] = c.orientation.f2;
  jo["f3"] = c.orientation.f3;
  jo["f4"] = c.orientation.f4;
  jo["f5"] = c.orientation.f5;
  jo["threshold"] = c.orientation.threshold;
  j["orientation_weights"] = std::move(jo);
  return j;
}

inline void config_merge_json(PipelineConfig& c, const ordered_json& j) {
  auto get = [&](const char* key, auto& into) {
    if (j.contains(key)) into = j.at(key).get<std::decay_t<decltype(into)>>();
  };
  get("input", c.input);
  get("seed", c.seed);
  get("strict", c.strict);
  get("auto_orient", c.auto_orient);
  get("prefix_numeric", c.prefix_numeric);
  get("flatten", c.flatten);
  get("flatten_separator", c.flatten_separator);
  get("max_cells", c.max_cells);
  get("limit", c.limit);
  get("header_hierarchy", c.header_hierarchy);
  get("pretrain_tasks", c.pretrain_tasks);
  get("downstream_tasks", c.downstream_tasks);
  get("annotations_dir", c.annotations_dir);
  get("contexts_dir", c.contexts_dir);
  if (j.contains("embedder")) {
    const auto& je = j.at("embedder");
    auto gete = [&](const char* key, auto& into) {
      if (je.contains(key)) into = je.at(key).get<std::decay_t<decltype(into)>>();
    };
    gete("kind", c.embedder.kind);
    gete("dim", c.embedder.dim);
    gete("endpoint", c.embedder.endpoint);
    gete("batch_size", c.embedder.batch_size);
    gete("cache_path", c.embedder.cache_path);
  }
  if (j.contains("probe")) {
    const auto& jp = j.at("probe");
    auto getp = [&](const char* key, auto& into) {
      if (jp.contains(key)) into = jp.at(key).get<std::decay_t<decltype(into)>>();
    };
    getp("enabled", c.probe.enabled);
    getp("steps", c.probe.steps);
    getp("lr", c.probe.lr);
    getp("batch_size", c.probe.batch_size);
    getp("num_layers", c.probe.num_layers);
    getp("hidden_dim", c.probe.hidden_dim);
    getp("activation", c.probe.activation);
    getp("self_loop", c.probe.self_loop);
    getp("val_fraction", c.probe.val_fraction);
    getp("eval_every", c.probe.eval_every);
    getp("synthetic_tables", c.probe.synthetic_tables);
  }
  if (j.contains("orientation_weights")) {
    const auto& jo = j.at("orientation_weights");
    auto geto = [&](const char* key, double& into) {
      if (jo.contains(key)) into = jo.at(key).get<double>();
    };
    geto("f1", c.orientation.f1);
    geto("f2", c.orientation.f2);
    geto("f3", c.orientation.f3);
    geto("f4", c.orientation.f4);
    geto("f5", c.orientation.f5);
    geto("threshold", c.orientation.threshold);
  }
}

// ---- input expansion ----

inline std::string stem_of(const fs::path& p) {
  std::string name = p.filename().string();
  for (const char* suffix : {".report.json", ".graph.json", ".embeddings.json", ".json", ".html",
                             ".htm"}) {
    std::string s(suffix);
    if (name.size() > s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0)
      return name.substr(0, name.size() - s.size());
  }
  return fs::path(name).stem().string();
}

// Accepts a file, a directory (filtered by extensions), or a pattern whose
// final component contains '*'. Results are sorted for determinism.
inline std::vector<std::string> expand_inputs(const std::string& input,
                                              const std::vector<std::string>& extensions) {
  std::vector<std::string> out;
  auto matches_ext = [&](const fs::path& p) {
    std::string name = p.filename().string();
    for (const std::string& ext : extensions) {
      if (name.size() > ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0)
        return true;
    }
    return false;
  };
  fs::path path(input);
  std::string last = path.filename().string();
  if (last.find('*') != std::string::npos) {
    fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    std::size_t star = last.find('*');
    std::string prefix = last.substr(0, star);
    std::string suffix = last.substr(star + 1);
    if (!fs::is_directory(dir)) throw Error(Errc::io_error, "no such directory " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      std::string name = entry.path().filename().string();
      if (name.size() >= prefix.size() + suffix.size() && name.compare(0, prefix.size(), prefix) == 0 &&
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        out.push_back(entry.path().string());
    }
  } else if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && matches_ext(entry.path())) out.push_back(entry.path().string());
    }
  } else if (fs::is_regular_file(path)) {
    out.push_back(path.string());
  } else {
    throw Error(Errc::io_error, "no such input " + input);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Tables directories hold plain .json plus sidecar files; keep only the
// canonical table JSONs.
inline std::vector<std::string> expand_table_inputs(const std::string& input) {
  std::vector<std::string> files = expand_inputs(input, {".json"});
  std::vector<std::string> out;
  for (const std::string& f : files) {
    std::string name = fs::path(f).filename().string();
    if (name == "run_manifest.json" || name == "special_tokens.json" ||
        name == "metrics.json" || name == "checkpoint.json" || name == "trace.json")
      continue;
    if (name.size() > 16 && name.compare(name.size() - 16, 16, ".annotation.json") == 0) continue;
    if (name.size() > 12 && name.compare(name.size() - 12, 12, ".report.json") == 0) continue;
    if (name.size() > 11 && name.compare(name.size() - 11, 11, ".graph.json") == 0) continue;
    if (name.size() > 16 && name.compare(name.size() - 16, 16, ".embeddings.json") == 0) continue;
    out.push_back(f);
  }
  return out;
}

inline void apply_limit(std::vector<std::string>& files, int limit) {
  if (limit > 0 && static_cast<int>(files.size()) > limit)
    files.resize(static_cast<std::size_t>(limit));
}

// ---- stages ----

inline StageReport stage_ingest(const PipelineConfig& cfg, const std::vector<std::string>& files,
                                const std::string& out_dir) {
  StageReport rep;
  rep.name = "ingest";
  int parsed = 0, failed = 0, transposed = 0, padded = 0, prefixed_cells = 0, flattened = 0;
  for (const std::string& file : files) {
    std::string id = stem_of(file);
    try {
      ParseOptions popts;
      popts.strict = cfg.strict;
      ParseResult pr = parse_html_table_ex(read_file(file), popts);
      TableGrid grid = std::move(pr.grid);
      padded += pr.diagnostics.padded_cells;
      if (pr.diagnostics.padded_cells > 0)
        rep.diagnostics.push_back(id + ": padded " + std::to_string(pr.diagnostics.padded_cells) +
                                  " cell(s)");
      if (cfg.auto_orient) {
        OrientationResult orient = classify_orientation(grid, cfg.orientation);
        if (orient.orientation == Orientation::Vertical) {
          grid = transpose(grid);
          ++transposed;
          rep.diagnostics.push_back(id + ": vertical layout, transposed");
        }
      }
      if (cfg.prefix_numeric) {
        TableGrid before = grid;
        grid = prefix_numeric_cells(grid);
        for (std::size_t i = 0; i < grid.cells().size(); ++i)
          if (grid.cells()[i].text != before.cells()[i].text) ++prefixed_cells;
      }
      if (cfg.flatten) {
        int thrn = get_thrn(grid);
        if (thrn > 1) {
          grid = flatten_headers(grid, cfg.flatten_separator, thrn);
          ++flattened;
          rep.diagnostics.push_back(id + ": flattened " + std::to_string(thrn) + " header rows");
        }
      }
      std::string out_path = (fs::path(out_dir) / (id + ".json")).string();
      write_file(out_path, table_to_canonical_string(grid));
      rep.outputs.push_back(out_path);
      ++parsed;
    } catch (const Error& e) {
      ++failed;
      rep.diagnostics.push_back(id + ": " + e.what());
      if (cfg.strict) throw Error(e.code(), file + ": " + e.what());
    }
  }
  rep.counts["files"] = static_cast<int>(files.size());
  rep.counts["parsed"] = parsed;
  rep.counts["failed"] = failed;
  rep.counts["padded_cells"] = padded;
  rep.counts["transposed"] = transposed;
  rep.counts["prefixed_cells"] = prefixed_cells;
  rep.counts["flattened"] = flattened;
  return rep;
}

inline StageReport stage_analyze(const PipelineConfig& cfg, const std::vector<std::string>& files,
                                 const std::string& out_dir) {
  StageReport rep;
  rep.name = "analyze";
  int vertical = 0;
  for (const std::string& file : files) {
    std::string id = stem_of(file);
    TableGrid grid = table_from_json(ordered_json::parse(read_file(file)));
    StructureReport sr = analyze_structure(grid, cfg.orientation);
    if (sr.orientation == Orientation::Vertical) ++vertical;
    std::string out_path = (fs::path(out_dir) / (id + ".report.json")).string();
    write_file(out_path, report_to_json(grid, sr).dump(2) + "\n");
    rep.outputs.push_back(out_path);
  }
  rep.counts["tables"] = static_cast<int>(files.size());
  rep.counts["vertical"] = vertical;
  return rep;
}

inline StageReport stage_build_graph(const PipelineConfig& cfg,
                                     const std::vector<std::string>& files,
                                     const std::string& out_dir) {
  StageReport rep;
  rep.name = "build-graph";
  long long nodes = 0, edges = 0;
  for (const std::string& file : files) {
    std::string id = stem_of(file);
    TableGrid grid = table_from_json(ordered_json::parse(read_file(file)));
    StructureReport sr = analyze_structure(grid, cfg.orientation);
    GraphOptions gopts;
    gopts.header_hierarchy = cfg.header_hierarchy;
    TabularGraph g = build_graph(grid, sr, gopts);
    nodes += static_cast<long long>(g.nodes.size());
    edges += static_cast<long long>(g.edges.size());
    std::string out_path = (fs::path(out_dir) / (id + ".graph.json")).string();
    write_file(out_path, graph_to_canonical_string(g));
    rep.outputs.push_back(out_path);
  }
  rep.counts["tables"] = static_cast<int>(files.size());
  rep.counts["nodes"] = nodes;
  rep.counts["edges"] = edges;
  return rep;
}

inline StageReport stage_embed(const PipelineConfig& cfg, const std::vector<std::string>& files,
                               const std::string& out_dir) {
  StageReport rep;
  rep.name = "embed";
  ProviderConfig pc = cfg.embedder.to_provider_config();
  BatchEmbedFn provider = make_provider(pc);
  std::unique_ptr<EmbeddingCache> cache;
  if (!pc.cache_path.empty()) cache = std::make_unique<EmbeddingCache>(pc.cache_path);
  long long vectors = 0;
  for (const std::string& file : files) {
    std::string id = stem_of(file);
    TabularGraph g = graph_from_json(ordered_json::parse(read_file(file)));
    EmbeddingMatrix m = embed_graph(g, pc, provider, cache.get());
    vectors += static_cast<long long>(m.vectors.size());
    std::string out_path = (fs::path(out_dir) / (id + ".embeddings.json")).string();
    write_file(out_path, embeddings_to_json(m).dump() + "\n");
    rep.outputs.push_back(out_path);
  }
  rep.counts["graphs"] = static_cast<int>(files.size());
  rep.counts["vectors"] = vectors;
  if (cache) rep.counts["cache_entries"] = static_cast<long long>(cache->size());
  return rep;
}

namespace detail_pipeline {

struct LoadedTable {
  std::string id;
  TableGrid grid;
  StructureReport report;
  TabularGraph graph;
};

inline bool grid_has_reserved_tokens(const TableGrid& grid) {
  for (const CellSpec& c : grid.cells())
    if (contains_reserved_token(c.text)) return true;
  return false;
}

inline std::vector<LoadedTable> load_tables_for_generation(const PipelineConfig& cfg,
                                                           const std::vector<std::string>& files,
                                                           StageReport& rep) {
  std::vector<LoadedTable> out;
  int skipped_large = 0, skipped_reserved = 0;
  for (const std::string& file : files) {
    LoadedTable t;
    t.id = stem_of(file);
    t.grid = table_from_json(ordered_json::parse(read_file(file)));
    if (cfg.max_cells > 0 && static_cast<int>(t.grid.cells().size()) > cfg.max_cells) {
      ++skipped_large;
      rep.diagnostics.push_back(t.id + ": skipped, " + std::to_string(t.grid.cells().size()) +
                                " cells > max_cells " + std::to_string(cfg.max_cells));
      continue;
    }
    if (grid_has_reserved_tokens(t.grid)) {
      ++skipped_reserved;
      rep.diagnostics.push_back(t.id + ": skipped, cell text contains a reserved token");
      continue;
    }
    t.report = analyze_structure(t.grid, cfg.orientation);
    GraphOptions gopts;
    gopts.header_hierarchy = cfg.header_hierarchy;
    t.graph = build_graph(t.grid, t.report, gopts);
    out.push_back(std::move(t));
  }
  rep.counts["skipped_large"] = skipped_large;
  rep.counts["skipped_reserved"] = skipped_reserved;
  return out;
}

inline std::optional<std::string> load_context(const PipelineConfig& cfg, const std::string& id) {
  if (cfg.contexts_dir.empty()) return std::nullopt;
  fs::path p = fs::path(cfg.contexts_dir) / (id + ".context.txt");
  if (!fs::exists(p)) return std::nullopt;
  std::string text = read_file(p.string());
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

inline std::optional<TaskAnnotation> load_annotation(const PipelineConfig& cfg,
                                                     const std::string& id) {
  if (cfg.annotations_dir.empty()) return std::nullopt;
  fs::path p = fs::path(cfg.annotations_dir) / (id + ".annotation.json");
  if (!fs::exists(p)) return std::nullopt;
  return annotation_from_json(ordered_json::parse(read_file(p.string())));
}

}  // namespace detail_pipeline

inline StageReport stage_gen_pretrain(const PipelineConfig& cfg,
                                      const std::vector<std::string>& files,
                                      const std::string& out_dir) {
  StageReport rep;
  rep.name = "gen-pretrain-data";
  auto tables = detail_pipeline::load_tables_for_generation(cfg, files, rep);

  for (const std::string& task : cfg.pretrain_tasks) {
    std::vector<InstructionSample> samples;
    for (const auto& t : tables) {
      if (task == "trc") {
        samples.push_back(gen_trc(t.id, t.grid, t.report, t.graph, cfg.seed));
      } else if (task == "tcm") {
        samples.push_back(gen_tcm(t.id, t.grid, t.report, t.graph, cfg.seed));
      } else if (task == "tcg") {
        samples.push_back(
            gen_tcg(t.id, t.grid, t.report, t.graph, detail_pipeline::load_context(cfg, t.id),
                    cfg.seed));
      } else {
        throw Error(Errc::bad_config, "unknown pretrain task " + task);
      }
    }
    std::string out_path = (fs::path(out_dir) / (task + ".jsonl")).string();
    fs::create_directories(out_dir);
    write_jsonl(out_path, samples);
    rep.outputs.push_back(out_path);
    rep.counts[task + "_samples"] = static_cast<int>(samples.size());
  }

  std::string registry_path = (fs::path(out_dir) / "special_tokens.json").string();
  write_file(registry_path, special_token_registry().dump(2) + "\n");
  rep.outputs.push_back(registry_path);
  rep.counts["tables"] = static_cast<int>(tables.size());
  return rep;
}

inline StageReport stage_gen_task(const PipelineConfig& cfg, const std::vector<std::string>& files,
                                  const std::string& out_dir) {
  StageReport rep;
  rep.name = "gen-task-data";
  auto tables = detail_pipeline::load_tables_for_generation(cfg, files, rep);

  for (const std::string& task_str : cfg.downstream_tasks) {
    TaskKind task = task_from_name(task_str);
    if (task != TaskKind::CTC && task != TaskKind::TTC && task != TaskKind::TableQA)
      throw Error(Errc::bad_config, "downstream task must be ctc, ttc, or qa");
    std::vector<InstructionSample> samples;
    int missing = 0;
    for (const auto& t : tables) {
      auto annotation = detail_pipeline::load_annotation(cfg, t.id);
      bool usable = annotation.has_value();
      if (usable) {
        if (task == TaskKind::CTC) usable = annotation->has_cell_labels();
        else if (task == TaskKind::TTC) usable = annotation->table_label.has_value();
        else usable = !annotation->qa_pairs.empty();
      }
      if (!usable) {
        ++missing;
        if (cfg.strict)
          throw Error(Errc::missing_annotation, t.id + ": no annotation for task " + task_str);
        rep.diagnostics.push_back(t.id + ": no annotation for " + task_str + ", skipped");
        continue;
      }
      auto generated = gen_downstream(t.id, t.grid, t.report, t.graph, *annotation, task, cfg.seed);
      for (auto& s : generated) samples.push_back(std::move(s));
    }
    std::string out_path = (fs::path(out_dir) / (task_str + ".jsonl")).string();
    fs::create_directories(out_dir);
    write_jsonl(out_path, samples);
    rep.outputs.push_back(out_path);
    rep.counts[task_str + "_samples"] = static_cast<int>(samples.size());
    rep.counts[task_str + "_missing_annotation"] = missing;
  }
  // The pretrain stage may already have dropped the registry next to these.
  std::string registry_path = (fs::path(out_dir) / "special_tokens.json").string();
  if (!fs::exists(registry_path)) {
    write_file(registry_path, special_token_registry().dump(2) + "\n");
    rep.outputs.push_back(registry_path);
  }
  rep.counts["tables"] = static_cast<int>(tables.size());
  return rep;
}

inline RgnnConfig probe_rgnn_config(const PipelineConfig& cfg) {
  RgnnConfig rc;
  rc.num_layers = cfg.probe.num_layers;
  rc.input_dim = cfg.embedder.dim;
  rc.hidden_dim = cfg.probe.hidden_dim;
  rc.num_classes = 2;
  rc.activation = activation_from_name(cfg.probe.activation);
  rc.self_loop = cfg.probe.self_loop;
  rc.seed = cfg.seed;
  return rc;
}

inline StageReport stage_train_probe(const PipelineConfig& cfg,
                                     const std::vector<std::string>& files,
                                     const std::string& out_dir) {
  StageReport rep;
  rep.name = "train-probe";

  ProviderConfig pc = cfg.embedder.to_provider_config();
  BatchEmbedFn provider = make_provider(pc);
  std::unique_ptr<EmbeddingCache> cache;
  if (!pc.cache_path.empty()) cache = std::make_unique<EmbeddingCache>(pc.cache_path);

  std::vector<ProbeExample> examples;
  GraphOptions gopts;
  gopts.header_hierarchy = cfg.header_hierarchy;

  auto add_example = [&](const std::string& id, const TableGrid& grid) {
    if (cfg.max_cells > 0 && static_cast<int>(grid.cells().size()) > cfg.max_cells) {
      rep.diagnostics.push_back(id + ": skipped, too many cells");
      return;
    }
    StructureReport sr = analyze_structure(grid, cfg.orientation);
    TabularGraph g = build_graph(grid, sr, gopts);
    EmbeddingMatrix x = embed_graph(g, pc, provider, cache.get());
    examples.push_back(make_trc_example(id, grid, sr, g, std::move(x)));
  };

  if (cfg.probe.synthetic_tables > 0) {
    for (const SynthTable& t : generate_synthetic_corpus(cfg.probe.synthetic_tables, cfg.seed))
      add_example(t.id, t.grid);
  } else {
    for (const std::string& file : files) {
      add_example(stem_of(file), table_from_json(ordered_json::parse(read_file(file))));
    }
  }
  if (examples.empty()) throw Error(Errc::empty_mask, "no probe examples");

  RgnnConfig rc = probe_rgnn_config(cfg);
  TrainOptions topt;
  topt.lr = cfg.probe.lr;
  topt.steps = cfg.probe.steps;
  topt.seed = cfg.seed;
  topt.batch_size = cfg.probe.batch_size;
  topt.val_fraction = cfg.probe.val_fraction;
  topt.eval_every = cfg.probe.eval_every;
  TrainResult result = train(examples, rc, topt);

  fs::create_directories(out_dir);
  std::string trace_path = (fs::path(out_dir) / "trace.json").string();
  write_file(trace_path, trace_to_json(result).dump(2) + "\n");
  rep.outputs.push_back(trace_path);
  std::string ckpt_path = (fs::path(out_dir) / "checkpoint.json").string();
  rc.seed = topt.seed;
  write_file(ckpt_path, params_to_json(result.params, rc).dump() + "\n");
  rep.outputs.push_back(ckpt_path);

  rep.counts["examples"] = static_cast<int>(examples.size());
  rep.counts["train_examples"] = result.train_examples;
  rep.counts["val_examples"] = result.val_examples;
  rep.counts["steps"] = cfg.probe.steps;
  rep.counts["final_val_macro_f1"] = result.final_val_macro_f1;
  return rep;
}

// ---- evaluation ----
// Prediction/gold files are JSONL lines {"id": ..., "value": ...}; rows are
// aligned by id and both sets must match exactly.

inline std::vector<std::pair<std::string, std::string>> read_eval_file(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("value"))
      throw Error(Errc::alignment_error,
                  path + ":" + std::to_string(lineno) + ": expected {id, value}");
    out.emplace_back(j.at("id").get<std::string>(), j.at("value").get<std::string>());
  }
  return out;
}

inline ordered_json evaluate_files(const std::string& predictions_path,
                                   const std::string& gold_path, const std::string& task) {
  auto preds = read_eval_file(predictions_path);
  auto gold = read_eval_file(gold_path);
  std::map<std::string, std::string> pred_by_id;
  for (auto& [id, value] : preds) {
    if (!pred_by_id.emplace(id, value).second)
      throw Error(Errc::alignment_error, "duplicate prediction id " + id);
  }
  if (preds.size() != gold.size())
    throw Error(Errc::alignment_error,
                "prediction count " + std::to_string(preds.size()) + " != gold count " +
                    std::to_string(gold.size()));
  std::vector<std::string> p, g;
  for (auto& [id, value] : gold) {
    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) throw Error(Errc::alignment_error, "no prediction for id " + id);
    p.push_back(it->second);
    g.push_back(value);
  }

  ordered_json j;
  j["task"] = task;
  j["count"] = static_cast<int>(g.size());
  if (task == "ctc" || task == "ttc") {
    MacroF1Result r = macro_f1(p, g);
    j["metric"] = "macro_f1";
    j["value"] = r.macro_f1;
    ordered_json per_class;
    for (const auto& [cls, f1] : r.per_class_f1) per_class[cls] = f1;
    j["per_class_f1"] = std::move(per_class);
  } else if (task == "qa") {
    j["metric"] = "normalized_exact_match";
    j["value"] = exact_match_rate(p, g);
  } else {
    throw Error(Errc::bad_config, "eval task must be ctc, ttc, or qa");
  }
  return j;
}

// ---- the end-to-end pipeline ----

inline RunManifest run_pipeline(PipelineConfig cfg, const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.command = "pipeline";
  manifest.started_at = utc_timestamp();

  std::vector<std::string> html_files = expand_inputs(cfg.input, {".html", ".htm"});
  apply_limit(html_files, cfg.limit);
  if (html_files.empty()) throw Error(Errc::io_error, "no input tables under " + cfg.input);
  manifest.inputs = html_files;

  // Sidecar directories default to where the source tables live.
  std::string input_dir = fs::is_directory(cfg.input)
                              ? cfg.input
                              : fs::path(html_files.front()).parent_path().string();
  if (cfg.annotations_dir.empty()) cfg.annotations_dir = input_dir;
  if (cfg.contexts_dir.empty()) cfg.contexts_dir = input_dir;
  manifest.resolved_config = config_to_json(cfg);

  std::string tables_dir = (fs::path(out_dir) / "tables").string();
  std::string reports_dir = (fs::path(out_dir) / "reports").string();
  std::string graphs_dir = (fs::path(out_dir) / "graphs").string();
  std::string embeddings_dir = (fs::path(out_dir) / "embeddings").string();
  std::string datasets_dir = (fs::path(out_dir) / "datasets").string();
  std::string probe_dir = (fs::path(out_dir) / "probe").string();

  manifest.stages.push_back(stage_ingest(cfg, html_files, tables_dir));
  std::vector<std::string> tables = expand_table_inputs(tables_dir);
  manifest.stages.push_back(stage_analyze(cfg, tables, reports_dir));
  manifest.stages.push_back(stage_build_graph(cfg, tables, graphs_dir));
  std::vector<std::string> graphs = expand_inputs(graphs_dir, {".graph.json"});
  manifest.stages.push_back(stage_embed(cfg, graphs, embeddings_dir));
  if (!cfg.pretrain_tasks.empty())
    manifest.stages.push_back(stage_gen_pretrain(cfg, tables, datasets_dir));
  if (!cfg.downstream_tasks.empty())
    manifest.stages.push_back(stage_gen_task(cfg, tables, datasets_dir));
  if (cfg.probe.enabled) manifest.stages.push_back(stage_train_probe(cfg, tables, probe_dir));

  auto t1 = std::chrono::steady_clock::now();
  manifest.wall_clock_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  write_manifest(manifest, out_dir);
  return manifest;
}

}  // namespace tabgraph
