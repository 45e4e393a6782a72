#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgraph/digest.hpp"
#include "tabgraph/error.hpp"
#include "tabgraph/table.hpp"
#include "tabgraph/version.hpp"

namespace tabgraph {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out << content;
}

inline std::string file_sha256(const std::string& path) { return sha256_hex(read_file(path)); }

struct StageReport {
  std::string name;
  ordered_json counts = ordered_json::object();
  std::vector<std::string> diagnostics;
  std::vector<std::string> outputs;  // files written by this stage
};

// One manifest per CLI run: resolved config, input/output digests, per-stage
// counts and diagnostics. Only started_at and wall_clock_ms vary between
// identical runs.
struct RunManifest {
  std::string command;
  ordered_json resolved_config = ordered_json::object();
  std::vector<std::string> inputs;
  std::vector<StageReport> stages;
  std::string started_at;
  long long wall_clock_ms = 0;
};

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Output paths are recorded relative to the run directory so identical runs
// into different directories produce comparable manifests.
inline ordered_json manifest_to_json(const RunManifest& m, const std::string& out_dir) {
  ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["config"] = m.resolved_config;
  ordered_json inputs = ordered_json::array();
  for (const std::string& path : m.inputs) {
    ordered_json ji;
    ji["path"] = path;
    ji["sha256"] = file_sha256(path);
    inputs.push_back(std::move(ji));
  }
  j["inputs"] = std::move(inputs);
  ordered_json stages = ordered_json::array();
  ordered_json outputs = ordered_json::array();
  for (const StageReport& s : m.stages) {
    ordered_json js;
    js["name"] = s.name;
    js["counts"] = s.counts;
    js["diagnostics"] = s.diagnostics;
    stages.push_back(std::move(js));
    for (const std::string& path : s.outputs) {
      ordered_json jo;
      std::error_code ec;
      std::filesystem::path rel = std::filesystem::relative(path, out_dir, ec);
      jo["path"] = (ec || rel.empty()) ? path : rel.string();
      jo["sha256"] = file_sha256(path);
      outputs.push_back(std::move(jo));
    }
  }
  j["stages"] = std::move(stages);
  j["outputs"] = std::move(outputs);
  j["started_at"] = m.started_at;
  j["wall_clock_ms"] = m.wall_clock_ms;
  return j;
}

inline std::string write_manifest(const RunManifest& m, const std::string& out_dir) {
  std::string path = (std::filesystem::path(out_dir) / "run_manifest.json").string();
  write_file(path, manifest_to_json(m, out_dir).dump(2) + "\n");
  return path;
}

}  // namespace tabgraph
