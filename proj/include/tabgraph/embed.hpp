#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgraph/error.hpp"
#include "tabgraph/graph.hpp"
#include "tabgraph/rng.hpp"

namespace tabgraph {

inline constexpr int kDefaultEmbeddingDim = 768;

struct EmbeddingMatrix {
  int dim = kDefaultEmbeddingDim;
  std::string provider_id;
  std::vector<std::vector<double>> vectors;  // canonical node order
};

enum class ProviderKind { DeterministicTest, RemoteService };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::DeterministicTest;
  int dim = kDefaultEmbeddingDim;
  std::string endpoint;        // required for RemoteService
  int batch_size = 32;
  std::string cache_path;      // optional persistent cache

  std::string provider_id() const {
    if (kind == ProviderKind::DeterministicTest)
      return "deterministic-test/" + std::to_string(dim);
    return "remote/" + std::to_string(dim);
  }

  void validate() const {
    if (dim < 1) throw Error(Errc::bad_config, "embedding dim must be >= 1");
    if (batch_size < 1) throw Error(Errc::bad_config, "batch_size must be >= 1");
    if (kind == ProviderKind::RemoteService && endpoint.empty())
      throw Error(Errc::bad_config, "remote provider requires an endpoint");
  }
};

// Hermetic test embedder: a counter-based generator seeded with a stable
// 64-bit hash of the text draws `dim` standard normals, L2-normalized.
inline std::vector<double> deterministic_embed(std::string_view text, int dim) {
  if (dim < 1) throw Error(Errc::bad_config, "embedding dim must be >= 1");
  SplitMix64 rng(fnv1a64(text));
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm_sq = 0.0;
  for (double& x : v) {
    x = rng.next_normal();
    norm_sq += x * x;
  }
  double norm = std::sqrt(norm_sq);
  if (norm == 0.0) {
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

// Append-only JSONL cache keyed by (provider_id, dim, exact text). Safe for
// concurrent readers with a single writer within one process.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::string path) : path_(std::move(path)) { load(); }

  std::optional<std::vector<double>> lookup(const std::string& provider_id, int dim,
                                            const std::string& text) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key(provider_id, dim, text));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store(const std::string& provider_id, int dim, const std::string& text,
             const std::vector<double>& vec) {
    std::lock_guard lock(mu_);
    std::string k = key(provider_id, dim, text);
    if (entries_.count(k)) return;
    entries_[k] = vec;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(Errc::io_error, "cannot append to cache " + path_);
    ordered_json j;
    j["provider_id"] = provider_id;
    j["dim"] = dim;
    j["text"] = text;
    j["vector"] = vec;
    out << j.dump() << "\n";
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

 private:
  static std::string key(const std::string& provider_id, int dim, const std::string& text) {
    return provider_id + "\x1f" + std::to_string(dim) + "\x1f" + text;
  }

  void load() {
    std::ifstream in(path_);
    if (!in) return;  // fresh cache
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ordered_json j = ordered_json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;  // torn tail write
      entries_[key(j.at("provider_id").get<std::string>(), j.at("dim").get<int>(),
                   j.at("text").get<std::string>())] =
          j.at("vector").get<std::vector<double>>();
    }
  }

  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<double>> entries_;
};

// A provider maps a batch of texts to vectors, same order. The remote HTTP
// client and the deterministic embedder both fit this signature.
using BatchEmbedFn =
    std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)>;

inline BatchEmbedFn make_test_provider(int dim) {
  return [dim](const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(deterministic_embed(t, dim));
    return out;
  };
}

// Embeds every node init text in canonical node order, consulting the cache
// first and batching the misses.
inline EmbeddingMatrix embed_texts(const std::vector<std::string>& texts,
                                   const ProviderConfig& cfg, const BatchEmbedFn& provider,
                                   EmbeddingCache* cache) {
  cfg.validate();
  EmbeddingMatrix m;
  m.dim = cfg.dim;
  m.provider_id = cfg.provider_id();
  m.vectors.resize(texts.size());

  std::vector<std::size_t> miss_index;
  std::vector<std::string> miss_texts;
  std::map<std::string, std::size_t> first_miss;  // identical texts fetch once
  std::vector<std::size_t> dup_of(texts.size(), SIZE_MAX);

  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cache) {
      if (auto hit = cache->lookup(m.provider_id, cfg.dim, texts[i])) {
        m.vectors[i] = std::move(*hit);
        continue;
      }
    }
    auto it = first_miss.find(texts[i]);
    if (it != first_miss.end()) {
      dup_of[i] = it->second;
      continue;
    }
    first_miss[texts[i]] = i;
    miss_index.push_back(i);
    miss_texts.push_back(texts[i]);
  }

  for (std::size_t start = 0; start < miss_texts.size();
       start += static_cast<std::size_t>(cfg.batch_size)) {
    std::size_t end = std::min(miss_texts.size(), start + static_cast<std::size_t>(cfg.batch_size));
    std::vector<std::string> batch(miss_texts.begin() + static_cast<std::ptrdiff_t>(start),
                                   miss_texts.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::vector<double>> vecs = provider(batch);
    if (vecs.size() != batch.size())
      throw Error(Errc::provider_unavailable, "provider returned " + std::to_string(vecs.size()) +
                                                  " vectors for " + std::to_string(batch.size()) +
                                                  " texts");
    for (std::size_t k = 0; k < batch.size(); ++k) {
      if (static_cast<int>(vecs[k].size()) != cfg.dim)
        throw Error(Errc::dimension_mismatch,
                    "provider returned dim " + std::to_string(vecs[k].size()) + ", expected " +
                        std::to_string(cfg.dim));
      for (double x : vecs[k]) {
        if (!std::isfinite(x))
          throw Error(Errc::dimension_mismatch, "provider returned a non-finite component");
      }
      std::size_t i = miss_index[start + k];
      m.vectors[i] = std::move(vecs[k]);
      if (cache) cache->store(m.provider_id, cfg.dim, texts[i], m.vectors[i]);
    }
  }

  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (dup_of[i] != SIZE_MAX) m.vectors[i] = m.vectors[dup_of[i]];
  }
  return m;
}

inline EmbeddingMatrix embed_graph(const TabularGraph& graph, const ProviderConfig& cfg,
                                   const BatchEmbedFn& provider, EmbeddingCache* cache = nullptr) {
  std::vector<std::string> texts;
  texts.reserve(graph.nodes.size());
  for (const GraphNode& n : graph.nodes) texts.push_back(n.init_text);
  return embed_texts(texts, cfg, provider, cache);
}

// Convenience entry point for the deterministic provider.
inline EmbeddingMatrix embed_graph(const TabularGraph& graph, const ProviderConfig& cfg,
                                   EmbeddingCache* cache = nullptr) {
  if (cfg.kind != ProviderKind::DeterministicTest)
    throw Error(Errc::bad_config, "this overload only serves the deterministic provider");
  return embed_graph(graph, cfg, make_test_provider(cfg.dim), cache);
}

// ---- embedding matrix JSON ----

inline ordered_json embeddings_to_json(const EmbeddingMatrix& m) {
  ordered_json j;
  j["dim"] = m.dim;
  j["provider_id"] = m.provider_id;
  j["vectors"] = m.vectors;
  return j;
}

inline EmbeddingMatrix embeddings_from_json(const ordered_json& j) {
  EmbeddingMatrix m;
  m.dim = j.at("dim").get<int>();
  m.provider_id = j.at("provider_id").get<std::string>();
  m.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
  for (const auto& v : m.vectors) {
    if (static_cast<int>(v.size()) != m.dim)
      throw Error(Errc::dimension_mismatch, "stored vector has wrong dim");
  }
  return m;
}

}  // namespace tabgraph
