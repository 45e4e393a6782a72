// Command-line entry point for the table-to-graph pipeline.
//
// Subcommands: ingest, analyze, build-graph, embed, gen-pretrain-data,
// gen-task-data, train-probe, grad-check, eval, pipeline.
// Exit codes: 0 success, 1 usage, 2 data error, 3 provider error.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tabgraph/fixtures.hpp"
#include "tabgraph/pipeline.hpp"
#include "tabgraph/version.hpp"

namespace tg = tabgraph;

namespace {

struct CommonArgs {
  std::string input;
  std::string out_dir;
};

void add_embedder_flags(CLI::App* cmd, tg::EmbedderSettings& e) {
  cmd->add_option("--embedder", e.kind, "Embedding provider: test or remote")
      ->check(CLI::IsMember({"test", "remote"}));
  cmd->add_option("--dim", e.dim, "Embedding dimension");
  cmd->add_option("--endpoint", e.endpoint, "Remote embedder endpoint URL");
  cmd->add_option("--batch-size", e.batch_size, "Remote batch size");
  cmd->add_option("--cache", e.cache_path, "Persistent embedding cache file");
}

void apply_endpoint_env(tg::EmbedderSettings& e) {
  if (const char* env = std::getenv("TABGRAPH_EMBED_ENDPOINT")) {
    if (env[0] != '\0') e.endpoint = env;
  }
}

// Runs one stage as a complete CLI run: stage output plus its manifest.
int run_single_stage(const std::string& command, const tg::PipelineConfig& cfg,
                     const std::vector<std::string>& inputs, const std::string& out_dir,
                     const std::function<tg::StageReport()>& stage) {
  auto t0 = std::chrono::steady_clock::now();
  tg::RunManifest manifest;
  manifest.command = command;
  manifest.started_at = tg::utc_timestamp();
  manifest.resolved_config = tg::config_to_json(cfg);
  manifest.inputs = inputs;
  manifest.stages.push_back(stage());
  auto t1 = std::chrono::steady_clock::now();
  manifest.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  tg::write_manifest(manifest, out_dir);
  const tg::StageReport& rep = manifest.stages.back();
  std::cout << command << ": " << rep.counts.dump() << "\n";
  for (const std::string& d : rep.diagnostics) std::cerr << "  note: " << d << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convert complex tables into typed heterogeneous graphs, encode them with a "
               "relational GNN, and generate instruction datasets"};
  app.set_version_flag("--version", std::string(tg::kToolVersion));
  app.require_subcommand(1);

  tg::PipelineConfig cfg;
  CommonArgs args;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse HTML tables into canonical table JSON");
  ingest->add_option("-i,--input", args.input, "HTML file, directory, or pattern")->required();
  ingest->add_option("-o,--out", args.out_dir, "Output directory")->required();
  ingest->add_flag("--strict", cfg.strict, "Fail on ragged or malformed tables");
  ingest->add_flag("--auto-orient", cfg.auto_orient, "Transpose vertical tables");
  ingest->add_flag("--prefix-numeric", cfg.prefix_numeric, "Prefix numeric cells by type");
  ingest->add_flag("--flatten", cfg.flatten, "Flatten hierarchical header rows");
  ingest->add_option("--separator", cfg.flatten_separator, "Flatten join separator");
  ingest->add_option("--limit", cfg.limit, "Process at most N tables");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Emit structure reports for table JSON");
  analyze->add_option("-i,--input", args.input, "Table JSON file or directory")->required();
  analyze->add_option("-o,--out", args.out_dir, "Output directory")->required();

  // build-graph
  bool print_census = false;
  auto* build = app.add_subcommand("build-graph", "Convert table JSON into graph JSON");
  build->add_option("-i,--input", args.input, "Table JSON file or directory")->required();
  build->add_option("-o,--out", args.out_dir, "Output directory")->required();
  build->add_flag("--census", print_census, "Print per-type edge counts");
  build->add_flag("!--no-hierarchy", cfg.header_hierarchy,
                  "Disable merged-header hierarchy edges");

  // embed
  auto* embed = app.add_subcommand("embed", "Embed graph node texts");
  embed->add_option("-i,--input", args.input, "Graph JSON file or directory")->required();
  embed->add_option("-o,--out", args.out_dir, "Output directory")->required();
  add_embedder_flags(embed, cfg.embedder);

  // gen-pretrain-data
  std::string tasks_csv = "trc,tcm,tcg";
  auto* genpre = app.add_subcommand("gen-pretrain-data",
                                    "Generate self-supervised instruction datasets");
  genpre->add_option("-i,--input", args.input, "Table JSON file or directory")->required();
  genpre->add_option("-o,--out", args.out_dir, "Output directory")->required();
  genpre->add_option("--tasks", tasks_csv, "Comma-separated subset of trc,tcm,tcg");
  genpre->add_option("--seed", cfg.seed, "Corpus seed");
  genpre->add_option("--limit", cfg.limit, "Process at most N tables");
  genpre->add_option("--max-cells", cfg.max_cells, "Skip tables with more cells");
  genpre->add_option("--contexts", cfg.contexts_dir, "Directory of <id>.context.txt sidecars");

  // gen-task-data
  std::string task_csv;
  auto* gentask = app.add_subcommand("gen-task-data", "Generate downstream instruction datasets");
  gentask->add_option("-i,--input", args.input, "Table JSON file or directory")->required();
  gentask->add_option("-o,--out", args.out_dir, "Output directory")->required();
  gentask->add_option("--task", task_csv, "Comma-separated subset of ctc,ttc,qa")->required();
  gentask->add_option("--annotations", cfg.annotations_dir,
                      "Directory of <id>.annotation.json sidecars");
  gentask->add_option("--seed", cfg.seed, "Corpus seed");
  gentask->add_option("--limit", cfg.limit, "Process at most N tables");
  gentask->add_option("--max-cells", cfg.max_cells, "Skip tables with more cells");
  gentask->add_flag("--strict", cfg.strict, "Fail when an annotation is missing");

  // train-probe
  auto* probe = app.add_subcommand("train-probe", "Train the row-type probe");
  probe->add_option("-i,--input", args.input, "Table JSON file or directory");
  probe->add_option("-o,--out", args.out_dir, "Output directory")->required();
  probe->add_option("--synthetic", cfg.probe.synthetic_tables,
                    "Train on N generated synthetic tables instead of inputs");
  probe->add_option("--seed", cfg.seed, "Run seed");
  probe->add_option("--steps", cfg.probe.steps, "Optimizer steps");
  probe->add_option("--lr", cfg.probe.lr, "Learning rate");
  probe->add_option("--probe-batch", cfg.probe.batch_size, "Graphs per optimizer step");
  probe->add_option("--hidden-dim", cfg.probe.hidden_dim, "Hidden dimension");
  probe->add_option("--layers", cfg.probe.num_layers, "Aggregation layers");
  probe->add_option("--activation", cfg.probe.activation, "relu, tanh, or identity");
  probe->add_option("--val-fraction", cfg.probe.val_fraction, "Validation split fraction");
  probe->add_option("--eval-every", cfg.probe.eval_every, "Evaluate every N steps");
  probe->add_option("--max-cells", cfg.max_cells, "Skip tables with more cells");
  add_embedder_flags(probe, cfg.embedder);

  // grad-check
  double gc_step = 1e-4, gc_tol = 1e-4;
  tg::RgnnConfig gc_cfg;
  gc_cfg.input_dim = 16;
  gc_cfg.hidden_dim = 8;
  std::string gc_activation = "relu";
  auto* gradcheck = app.add_subcommand("grad-check",
                                       "Verify analytic gradients against finite differences");
  gradcheck->add_option("-i,--input", args.input,
                        "Table JSON to check on (defaults to a bundled fixture)");
  gradcheck->add_option("-o,--out", args.out_dir, "Output directory")->required();
  gradcheck->add_option("--step", gc_step, "Finite-difference step");
  gradcheck->add_option("--tol", gc_tol, "Max relative error tolerance");
  gradcheck->add_option("--dim", gc_cfg.input_dim, "Embedding dimension");
  gradcheck->add_option("--hidden-dim", gc_cfg.hidden_dim, "Hidden dimension");
  gradcheck->add_option("--layers", gc_cfg.num_layers, "Aggregation layers");
  gradcheck->add_option("--activation", gc_activation, "relu, tanh, or identity");
  gradcheck->add_flag("--self-loop", gc_cfg.self_loop, "Enable the self-loop matrix");
  gradcheck->add_option("--seed", cfg.seed, "Parameter init seed");

  // eval
  std::string predictions_path, gold_path, eval_task;
  auto* eval = app.add_subcommand("eval", "Score predictions against gold labels");
  eval->add_option("--predictions", predictions_path, "Predictions JSONL ({id, value} lines)")
      ->required();
  eval->add_option("--gold", gold_path, "Gold JSONL ({id, value} lines)")->required();
  eval->add_option("--task", eval_task, "ctc, ttc, or qa")
      ->required()
      ->check(CLI::IsMember({"ctc", "ttc", "qa"}));
  eval->add_option("-o,--out", args.out_dir, "Output directory")->required();

  // pipeline
  std::string config_path;
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  pipeline->add_option("--config", config_path, "Pipeline config JSON");
  pipeline->add_option("-i,--input", args.input, "HTML file, directory, or pattern");
  pipeline->add_option("-o,--out", args.out_dir, "Output directory")->required();
  pipeline->add_option("--seed", cfg.seed, "Run seed");
  pipeline->add_flag("--strict", cfg.strict, "Fail on malformed inputs");
  pipeline->add_flag("--auto-orient", cfg.auto_orient, "Transpose vertical tables");
  pipeline->add_flag("--prefix-numeric", cfg.prefix_numeric, "Prefix numeric cells by type");
  add_embedder_flags(pipeline, cfg.embedder);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    apply_endpoint_env(cfg.embedder);

    if (*ingest) {
      cfg.input = args.input;
      auto files = tg::expand_inputs(args.input, {".html", ".htm"});
      tg::apply_limit(files, cfg.limit);
      return run_single_stage("ingest", cfg, files, args.out_dir,
                              [&] { return tg::stage_ingest(cfg, files, args.out_dir); });
    }
    if (*analyze) {
      cfg.input = args.input;
      auto files = tg::expand_table_inputs(args.input);
      return run_single_stage("analyze", cfg, files, args.out_dir,
                              [&] { return tg::stage_analyze(cfg, files, args.out_dir); });
    }
    if (*build) {
      cfg.input = args.input;
      auto files = tg::expand_table_inputs(args.input);
      int rc = run_single_stage("build-graph", cfg, files, args.out_dir,
                                [&] { return tg::stage_build_graph(cfg, files, args.out_dir); });
      if (print_census) {
        for (const std::string& file : files) {
          tg::TableGrid grid = tg::table_from_json(tg::ordered_json::parse(tg::read_file(file)));
          tg::StructureReport sr = tg::analyze_structure(grid, cfg.orientation);
          tg::GraphOptions gopts;
          gopts.header_hierarchy = cfg.header_hierarchy;
          tg::TabularGraph g = tg::build_graph(grid, sr, gopts);
          std::cout << tg::stem_of(file) << ":";
          for (const auto& [type, count] : g.edge_census())
            std::cout << " " << tg::edge_type_name(type) << "=" << count;
          std::cout << "\n";
        }
      }
      return rc;
    }
    if (*embed) {
      cfg.input = args.input;
      auto files = tg::expand_inputs(args.input, {".graph.json"});
      return run_single_stage("embed", cfg, files, args.out_dir,
                              [&] { return tg::stage_embed(cfg, files, args.out_dir); });
    }
    if (*genpre) {
      cfg.input = args.input;
      cfg.pretrain_tasks.clear();
      for (auto&& part : CLI::detail::split(tasks_csv, ','))
        if (!part.empty()) cfg.pretrain_tasks.push_back(part);
      auto files = tg::expand_table_inputs(args.input);
      tg::apply_limit(files, cfg.limit);
      return run_single_stage("gen-pretrain-data", cfg, files, args.out_dir,
                              [&] { return tg::stage_gen_pretrain(cfg, files, args.out_dir); });
    }
    if (*gentask) {
      cfg.input = args.input;
      cfg.downstream_tasks.clear();
      for (auto&& part : CLI::detail::split(task_csv, ','))
        if (!part.empty()) cfg.downstream_tasks.push_back(part);
      if (cfg.annotations_dir.empty())
        cfg.annotations_dir = std::filesystem::is_directory(args.input)
                                  ? args.input
                                  : std::filesystem::path(args.input).parent_path().string();
      auto files = tg::expand_table_inputs(args.input);
      tg::apply_limit(files, cfg.limit);
      return run_single_stage("gen-task-data", cfg, files, args.out_dir,
                              [&] { return tg::stage_gen_task(cfg, files, args.out_dir); });
    }
    if (*probe) {
      cfg.input = args.input;
      std::vector<std::string> files;
      if (cfg.probe.synthetic_tables <= 0) {
        if (args.input.empty())
          throw tg::Error(tg::Errc::bad_config, "train-probe needs --input or --synthetic");
        files = tg::expand_table_inputs(args.input);
      }
      cfg.probe.enabled = true;
      return run_single_stage("train-probe", cfg, files, args.out_dir,
                              [&] { return tg::stage_train_probe(cfg, files, args.out_dir); });
    }
    if (*gradcheck) {
      gc_cfg.activation = tg::activation_from_name(gc_activation);
      gc_cfg.seed = cfg.seed;
      tg::TableGrid grid = args.input.empty()
                               ? tg::income_table()
                               : tg::table_from_json(
                                     tg::ordered_json::parse(tg::read_file(args.input)));
      tg::StructureReport sr = tg::analyze_structure(grid);
      tg::TabularGraph g = tg::build_graph(grid, sr);
      tg::ProviderConfig pc;
      pc.dim = gc_cfg.input_dim;
      tg::EmbeddingMatrix x = tg::embed_graph(g, pc);
      tg::RgnnParams params = tg::init_params(gc_cfg);
      tg::Adjacency adj = tg::Adjacency::from_graph(g);
      // Probe target: row nodes labeled by row type.
      std::vector<int> labels(g.nodes.size(), -1);
      std::vector<int> mask;
      for (int i = 0; i < grid.n_rows(); ++i) {
        labels[static_cast<std::size_t>(g.row_node(i))] =
            sr.row_types[static_cast<std::size_t>(i)] == tg::RowType::HeaderRow ? 0 : 1;
        mask.push_back(g.row_node(i));
      }
      tg::GradCheckReport report =
          tg::grad_check(adj, x, params, gc_cfg, labels, mask, gc_step, gc_tol);

      tg::RunManifest manifest;
      manifest.command = "grad-check";
      manifest.started_at = tg::utc_timestamp();
      manifest.resolved_config = tg::config_to_json(cfg);
      if (!args.input.empty()) manifest.inputs.push_back(args.input);
      tg::StageReport rep;
      rep.name = "grad-check";
      rep.counts["max_rel_err"] = report.max_rel_err;
      rep.counts["checked"] = report.total_checked;
      rep.counts["excluded"] = report.total_excluded;
      rep.counts["passed"] = report.passed;
      std::string report_path =
          (std::filesystem::path(args.out_dir) / "grad_check.json").string();
      tg::write_file(report_path, tg::grad_check_report_to_json(report).dump(2) + "\n");
      rep.outputs.push_back(report_path);
      manifest.stages.push_back(std::move(rep));
      tg::write_manifest(manifest, args.out_dir);

      std::cout << "grad-check: max_rel_err=" << report.max_rel_err
                << " checked=" << report.total_checked << " excluded=" << report.total_excluded
                << (report.passed ? " PASS" : " FAIL") << "\n";
      return report.passed ? 0 : 2;
    }
    if (*eval) {
      tg::RunManifest manifest;
      manifest.command = "eval";
      manifest.started_at = tg::utc_timestamp();
      manifest.resolved_config = tg::config_to_json(cfg);
      manifest.inputs = {predictions_path, gold_path};
      tg::StageReport rep;
      rep.name = "eval";
      tg::ordered_json metrics = tg::evaluate_files(predictions_path, gold_path, eval_task);
      std::string metrics_path = (std::filesystem::path(args.out_dir) / "metrics.json").string();
      tg::write_file(metrics_path, metrics.dump(2) + "\n");
      rep.outputs.push_back(metrics_path);
      rep.counts["count"] = metrics.at("count");
      rep.counts[metrics.at("metric").get<std::string>()] = metrics.at("value");
      manifest.stages.push_back(std::move(rep));
      tg::write_manifest(manifest, args.out_dir);
      std::cout << metrics.dump(2) << "\n";
      return 0;
    }
    if (*pipeline) {
      // Precedence: flags > config file > defaults. CLI11 already bound the
      // flag values into cfg, so stash them before the file merge and
      // restore whichever were explicitly passed.
      auto passed = [&](const char* name) { return pipeline->count(name) > 0; };
      tg::PipelineConfig flags = cfg;
      if (!config_path.empty())
        tg::config_merge_json(cfg, tg::ordered_json::parse(tg::read_file(config_path)));
      if (!args.input.empty()) cfg.input = args.input;
      if (passed("--seed")) cfg.seed = flags.seed;
      if (passed("--strict")) cfg.strict = flags.strict;
      if (passed("--auto-orient")) cfg.auto_orient = flags.auto_orient;
      if (passed("--prefix-numeric")) cfg.prefix_numeric = flags.prefix_numeric;
      if (passed("--embedder")) cfg.embedder.kind = flags.embedder.kind;
      if (passed("--dim")) cfg.embedder.dim = flags.embedder.dim;
      if (passed("--endpoint")) cfg.embedder.endpoint = flags.embedder.endpoint;
      if (passed("--batch-size")) cfg.embedder.batch_size = flags.embedder.batch_size;
      if (passed("--cache")) cfg.embedder.cache_path = flags.embedder.cache_path;
      apply_endpoint_env(cfg.embedder);
      if (cfg.input.empty())
        throw tg::Error(tg::Errc::bad_config, "pipeline needs --input or a config with one");
      tg::RunManifest manifest = tg::run_pipeline(cfg, args.out_dir);
      std::cout << "pipeline: " << manifest.stages.size() << " stages, outputs under "
                << args.out_dir << "\n";
      return 0;
    }
  } catch (const tg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tg::is_provider_error(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
