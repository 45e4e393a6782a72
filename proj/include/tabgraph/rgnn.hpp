#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgraph/embed.hpp"
#include "tabgraph/error.hpp"
#include "tabgraph/graph.hpp"
#include "tabgraph/rng.hpp"

namespace tabgraph {

enum class Activation { ReLU, Tanh, Identity };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "?";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw Error(Errc::bad_config, "unknown activation " + s);
}

struct RgnnConfig {
  int num_layers = 2;
  int input_dim = kDefaultEmbeddingDim;
  int hidden_dim = 1048;
  int num_classes = 2;
  Activation activation = Activation::ReLU;
  bool self_loop = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_layers < 1 || input_dim < 1 || hidden_dim < 1 || num_classes < 2)
      throw Error(Errc::bad_config, "rgnn dims must be positive (>=2 classes)");
  }

  int layer_in_dim(int layer) const { return layer == 0 ? input_dim : hidden_dim; }
};

// Dense row-major matrix. All reductions run in a fixed index order so runs
// are reproducible.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  void zero() { std::fill(a.begin(), a.end(), 0.0); }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline void matvec(const Matrix& w, const double* x, double* y) {
  for (int i = 0; i < w.rows; ++i) {
    double acc = 0.0;
    const double* row = &w.a[static_cast<std::size_t>(i) * w.cols];
    for (int j = 0; j < w.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

inline void matvec_transposed_acc(const Matrix& w, const double* y, double* x) {
  for (int i = 0; i < w.rows; ++i) {
    const double* row = &w.a[static_cast<std::size_t>(i) * w.cols];
    for (int j = 0; j < w.cols; ++j) x[j] += row[j] * y[i];
  }
}

inline void outer_acc(Matrix& g, const double* y, const double* x) {
  for (int i = 0; i < g.rows; ++i) {
    double* row = &g.a[static_cast<std::size_t>(i) * g.cols];
    for (int j = 0; j < g.cols; ++j) row[j] += y[i] * x[j];
  }
}

// Per-layer relation weights plus the classification head. Block order is
// fixed: layer by layer, edge types in enum order, optional self matrix,
// then the head.
struct RgnnParams {
  std::vector<std::array<Matrix, kNumEdgeTypes>> relation;  // [layer][edge type]
  std::vector<Matrix> self;                                 // [layer], empty if unused
  Matrix head;                                              // num_classes x hidden

  struct BlockRef {
    std::string name;
    Matrix* matrix;
  };

  std::vector<BlockRef> blocks() {
    std::vector<BlockRef> out;
    for (std::size_t l = 0; l < relation.size(); ++l) {
      for (int t = 0; t < kNumEdgeTypes; ++t) {
        out.push_back({"layer" + std::to_string(l) + "." +
                           edge_type_name(static_cast<EdgeType>(t)),
                       &relation[l][static_cast<std::size_t>(t)]});
      }
      if (!self.empty()) out.push_back({"layer" + std::to_string(l) + ".self", &self[l]});
    }
    out.push_back({"head", &head});
    return out;
  }
};

// Uniform init with bound 1/sqrt(in_dim), filled in fixed block order from
// the run seed.
inline RgnnParams init_params(const RgnnConfig& cfg) {
  cfg.validate();
  RgnnParams p;
  p.relation.resize(static_cast<std::size_t>(cfg.num_layers));
  if (cfg.self_loop) p.self.resize(static_cast<std::size_t>(cfg.num_layers));
  for (int l = 0; l < cfg.num_layers; ++l) {
    int in = cfg.layer_in_dim(l);
    for (int t = 0; t < kNumEdgeTypes; ++t)
      p.relation[l][static_cast<std::size_t>(t)] = Matrix(cfg.hidden_dim, in);
    if (cfg.self_loop) p.self[l] = Matrix(cfg.hidden_dim, in);
  }
  p.head = Matrix(cfg.num_classes, cfg.hidden_dim);

  SplitMix64 rng(cfg.seed);
  for (auto& block : p.blocks()) {
    double bound = 1.0 / std::sqrt(static_cast<double>(block.matrix->cols));
    for (double& x : block.matrix->a) x = rng.next_uniform(bound);
  }
  return p;
}

inline RgnnParams zeros_like(const RgnnParams& p) {
  RgnnParams g;
  g.relation.resize(p.relation.size());
  for (std::size_t l = 0; l < p.relation.size(); ++l) {
    for (int t = 0; t < kNumEdgeTypes; ++t) {
      const Matrix& m = p.relation[l][static_cast<std::size_t>(t)];
      g.relation[l][static_cast<std::size_t>(t)] = Matrix(m.rows, m.cols);
    }
  }
  g.self.resize(p.self.size());
  for (std::size_t l = 0; l < p.self.size(); ++l) g.self[l] = Matrix(p.self[l].rows, p.self[l].cols);
  g.head = Matrix(p.head.rows, p.head.cols);
  return g;
}

// Undirected adjacency bucketed by edge type; both directions are stored so
// neighbor sets are symmetric.
struct Adjacency {
  int num_nodes = 0;
  std::array<std::vector<std::vector<int>>, kNumEdgeTypes> nbrs;

  static Adjacency from_graph(const TabularGraph& g) {
    Adjacency adj;
    adj.num_nodes = static_cast<int>(g.nodes.size());
    for (auto& lists : adj.nbrs) lists.resize(g.nodes.size());
    for (const Edge& e : g.edges) {
      auto& lists = adj.nbrs[static_cast<std::size_t>(e.type)];
      lists[static_cast<std::size_t>(e.a)].push_back(e.b);
      lists[static_cast<std::size_t>(e.b)].push_back(e.a);
    }
    for (auto& lists : adj.nbrs)
      for (auto& l : lists) std::sort(l.begin(), l.end());
    return adj;
  }

  int degree(int type, int v) const {
    return static_cast<int>(nbrs[static_cast<std::size_t>(type)][static_cast<std::size_t>(v)].size());
  }
};

struct NodeStates {
  // states[l] holds h^(l): layer 0 is the input embedding matrix.
  std::vector<Matrix> states;
  // preacts[l] holds the pre-activation of layer l+1 (same shape as states[l+1]).
  std::vector<Matrix> preacts;

  const Matrix& final_states() const { return states.back(); }
};

namespace detail_rgnn {

inline void check_shapes(const Adjacency& adj, const EmbeddingMatrix& x, const RgnnParams& p,
                         const RgnnConfig& cfg) {
  cfg.validate();
  if (x.dim != cfg.input_dim)
    throw Error(Errc::shape_mismatch, "embedding dim " + std::to_string(x.dim) +
                                          " != input_dim " + std::to_string(cfg.input_dim));
  if (static_cast<int>(x.vectors.size()) != adj.num_nodes)
    throw Error(Errc::shape_mismatch, "embedding count != node count");
  if (static_cast<int>(p.relation.size()) != cfg.num_layers)
    throw Error(Errc::shape_mismatch, "params have wrong layer count");
  for (int l = 0; l < cfg.num_layers; ++l) {
    int in = cfg.layer_in_dim(l);
    for (int t = 0; t < kNumEdgeTypes; ++t) {
      const Matrix& w = p.relation[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
      if (w.rows != cfg.hidden_dim || w.cols != in)
        throw Error(Errc::shape_mismatch, "relation matrix shape mismatch at layer " +
                                              std::to_string(l));
    }
    if (cfg.self_loop) {
      if (static_cast<int>(p.self.size()) != cfg.num_layers)
        throw Error(Errc::shape_mismatch, "missing self-loop matrices");
      const Matrix& w = p.self[static_cast<std::size_t>(l)];
      if (w.rows != cfg.hidden_dim || w.cols != in)
        throw Error(Errc::shape_mismatch, "self matrix shape mismatch");
    }
  }
  if (p.head.rows != cfg.num_classes || p.head.cols != cfg.hidden_dim)
    throw Error(Errc::shape_mismatch, "head shape mismatch");
}

inline double activate(Activation a, double s) {
  switch (a) {
    case Activation::ReLU: return s > 0.0 ? s : 0.0;
    case Activation::Tanh: return std::tanh(s);
    case Activation::Identity: return s;
  }
  return s;
}

inline double activate_grad(Activation a, double s, double h) {
  switch (a) {
    case Activation::ReLU: return s > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - h * h;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

}  // namespace detail_rgnn

// Per-edge-type mean aggregation: for each node v,
//   h_v^(l+1) = sigma( sum_t (1/|N_v^t|) sum_{u in N_v^t} W_t^(l) h_u^(l) )
// with the optional self term W_self^(l) h_v^(l) inside the activation.
// Empty neighbor sets contribute nothing (no division by zero).
inline NodeStates forward(const Adjacency& adj, const EmbeddingMatrix& x, const RgnnParams& params,
                          const RgnnConfig& cfg) {
  detail_rgnn::check_shapes(adj, x, params, cfg);
  const int n = adj.num_nodes;

  NodeStates ns;
  ns.states.reserve(static_cast<std::size_t>(cfg.num_layers) + 1);
  Matrix h0(n, cfg.input_dim);
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < cfg.input_dim; ++j) h0(v, j) = x.vectors[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)];
  ns.states.push_back(std::move(h0));

  std::vector<double> msg(static_cast<std::size_t>(cfg.hidden_dim));
  for (int l = 0; l < cfg.num_layers; ++l) {
    const Matrix& h = ns.states.back();
    Matrix s(n, cfg.hidden_dim);
    for (int t = 0; t < kNumEdgeTypes; ++t) {
      const Matrix& w = params.relation[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
      const auto& lists = adj.nbrs[static_cast<std::size_t>(t)];
      for (int u = 0; u < n; ++u) {
        if (lists[static_cast<std::size_t>(u)].empty()) continue;
        matvec(w, &h.a[static_cast<std::size_t>(u) * h.cols], msg.data());
        for (int v : lists[static_cast<std::size_t>(u)]) {
          double inv = 1.0 / static_cast<double>(adj.degree(t, v));
          double* dst = &s.a[static_cast<std::size_t>(v) * s.cols];
          for (int j = 0; j < cfg.hidden_dim; ++j) dst[j] += inv * msg[j];
        }
      }
    }
    if (cfg.self_loop) {
      const Matrix& w = params.self[static_cast<std::size_t>(l)];
      for (int v = 0; v < n; ++v) {
        matvec(w, &h.a[static_cast<std::size_t>(v) * h.cols], msg.data());
        double* dst = &s.a[static_cast<std::size_t>(v) * s.cols];
        for (int j = 0; j < cfg.hidden_dim; ++j) dst[j] += msg[j];
      }
    }
    Matrix hn(n, cfg.hidden_dim);
    for (std::size_t i = 0; i < s.a.size(); ++i)
      hn.a[i] = detail_rgnn::activate(cfg.activation, s.a[i]);
    ns.preacts.push_back(std::move(s));
    ns.states.push_back(std::move(hn));
  }
  return ns;
}

inline NodeStates forward(const TabularGraph& g, const EmbeddingMatrix& x,
                          const RgnnParams& params, const RgnnConfig& cfg) {
  return forward(Adjacency::from_graph(g), x, params, cfg);
}

// Sign pattern of every pre-activation; used by the gradient checker to
// detect ReLU kink crossings between perturbed evaluations.
inline std::vector<std::uint8_t> relu_pattern(const NodeStates& ns) {
  std::vector<std::uint8_t> pattern;
  for (const Matrix& s : ns.preacts) {
    pattern.reserve(pattern.size() + s.a.size());
    for (double v : s.a) pattern.push_back(v > 0.0 ? 1 : 0);
  }
  return pattern;
}

struct LossResult {
  double loss = 0.0;
  RgnnParams grads;  // same shapes as the parameters
};

// Mean cross-entropy of head(h^(L)) over the masked nodes, with exact
// reverse-mode gradients for every parameter block.
inline LossResult loss_and_grads(const Adjacency& adj, const EmbeddingMatrix& x,
                                 const RgnnParams& params, const RgnnConfig& cfg,
                                 const std::vector<int>& labels, const std::vector<int>& mask,
                                 NodeStates* states_out = nullptr) {
  if (mask.empty()) throw Error(Errc::empty_mask, "mask must contain at least one node");
  for (int v : mask) {
    if (v < 0 || v >= adj.num_nodes) throw Error(Errc::shape_mismatch, "mask node out of range");
    if (labels[static_cast<std::size_t>(v)] < 0 ||
        labels[static_cast<std::size_t>(v)] >= cfg.num_classes)
      throw Error(Errc::shape_mismatch, "label out of range for masked node");
  }

  NodeStates ns = forward(adj, x, params, cfg);
  const Matrix& hl = ns.states.back();
  const int n = adj.num_nodes;

  LossResult res;
  res.grads = zeros_like(params);

  // Head + softmax cross-entropy.
  Matrix dh(n, cfg.hidden_dim);
  std::vector<double> logits(static_cast<std::size_t>(cfg.num_classes));
  std::vector<double> probs(static_cast<std::size_t>(cfg.num_classes));
  double inv_m = 1.0 / static_cast<double>(mask.size());
  double loss = 0.0;
  for (int v : mask) {
    matvec(params.head, &hl.a[static_cast<std::size_t>(v) * hl.cols], logits.data());
    double mx = logits[0];
    for (double z : logits) mx = std::max(mx, z);
    double sum = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
      probs[c] = std::exp(logits[c] - mx);
      sum += probs[c];
    }
    for (double& p : probs) p /= sum;
    int y = labels[static_cast<std::size_t>(v)];
    loss += -(logits[static_cast<std::size_t>(y)] - mx - std::log(sum));

    for (std::size_t c = 0; c < probs.size(); ++c) {
      double dz = (probs[c] - (static_cast<int>(c) == y ? 1.0 : 0.0)) * inv_m;
      // head grad: dz * h_v ; dh_v += head_row_c * dz
      double* grow = &res.grads.head.a[c * static_cast<std::size_t>(cfg.hidden_dim)];
      const double* prow = &params.head.a[c * static_cast<std::size_t>(cfg.hidden_dim)];
      const double* hv = &hl.a[static_cast<std::size_t>(v) * hl.cols];
      double* dhv = &dh.a[static_cast<std::size_t>(v) * dh.cols];
      for (int j = 0; j < cfg.hidden_dim; ++j) {
        grow[j] += dz * hv[j];
        dhv[j] += dz * prow[j];
      }
    }
  }
  res.loss = loss * inv_m;

  // Backprop through the aggregation layers.
  std::vector<double> agg(static_cast<std::size_t>(cfg.hidden_dim));
  for (int l = cfg.num_layers - 1; l >= 0; --l) {
    const Matrix& s = ns.preacts[static_cast<std::size_t>(l)];
    const Matrix& h_in = ns.states[static_cast<std::size_t>(l)];
    const Matrix& h_out = ns.states[static_cast<std::size_t>(l) + 1];
    int in_dim = cfg.layer_in_dim(l);

    Matrix ds(n, cfg.hidden_dim);
    for (std::size_t i = 0; i < ds.a.size(); ++i)
      ds.a[i] = dh.a[i] * detail_rgnn::activate_grad(cfg.activation, s.a[i], h_out.a[i]);

    Matrix dh_prev(n, in_dim);
    for (int t = 0; t < kNumEdgeTypes; ++t) {
      const Matrix& w = params.relation[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
      Matrix& gw = res.grads.relation[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
      const auto& lists = adj.nbrs[static_cast<std::size_t>(t)];
      for (int u = 0; u < n; ++u) {
        const auto& out_nbrs = lists[static_cast<std::size_t>(u)];
        if (out_nbrs.empty()) continue;
        std::fill(agg.begin(), agg.end(), 0.0);
        for (int v : out_nbrs) {
          double inv = 1.0 / static_cast<double>(adj.degree(t, v));
          const double* dsv = &ds.a[static_cast<std::size_t>(v) * ds.cols];
          for (int j = 0; j < cfg.hidden_dim; ++j) agg[j] += inv * dsv[j];
        }
        outer_acc(gw, agg.data(), &h_in.a[static_cast<std::size_t>(u) * h_in.cols]);
        matvec_transposed_acc(w, agg.data(), &dh_prev.a[static_cast<std::size_t>(u) * dh_prev.cols]);
      }
    }
    if (cfg.self_loop) {
      const Matrix& w = params.self[static_cast<std::size_t>(l)];
      Matrix& gw = res.grads.self[static_cast<std::size_t>(l)];
      for (int v = 0; v < n; ++v) {
        const double* dsv = &ds.a[static_cast<std::size_t>(v) * ds.cols];
        outer_acc(gw, dsv, &h_in.a[static_cast<std::size_t>(v) * h_in.cols]);
        matvec_transposed_acc(w, dsv, &dh_prev.a[static_cast<std::size_t>(v) * dh_prev.cols]);
      }
    }
    dh = std::move(dh_prev);
  }

  if (states_out) *states_out = std::move(ns);
  return res;
}

// ---- gradient check ----

struct GradCheckBlock {
  std::string name;
  double max_rel_err = 0.0;
  int checked = 0;
  int excluded = 0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_err = 0.0;
  int total_checked = 0;
  int total_excluded = 0;
  double step = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Central finite differences against the analytic gradients. Coordinates
// whose perturbation flips any ReLU pre-activation sign are reported as
// excluded rather than failed (subgradient ambiguity at the kink).
inline GradCheckReport grad_check(const Adjacency& adj, const EmbeddingMatrix& x, RgnnParams params,
                                  const RgnnConfig& cfg, const std::vector<int>& labels,
                                  const std::vector<int>& mask, double step = 1e-4,
                                  double tolerance = 1e-4) {
  LossResult analytic = loss_and_grads(adj, x, params, cfg, labels, mask);

  auto eval = [&](std::vector<std::uint8_t>* pattern) {
    NodeStates ns = forward(adj, x, params, cfg);
    const Matrix& hl = ns.states.back();
    std::vector<double> logits(static_cast<std::size_t>(cfg.num_classes));
    double loss = 0.0;
    for (int v : mask) {
      matvec(params.head, &hl.a[static_cast<std::size_t>(v) * hl.cols], logits.data());
      double mx = logits[0];
      for (double z : logits) mx = std::max(mx, z);
      double sum = 0.0;
      for (double z : logits) sum += std::exp(z - mx);
      int y = labels[static_cast<std::size_t>(v)];
      loss += -(logits[static_cast<std::size_t>(y)] - mx - std::log(sum));
    }
    if (pattern) *pattern = relu_pattern(ns);
    return loss / static_cast<double>(mask.size());
  };

  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;

  auto param_blocks = params.blocks();
  auto grad_blocks = analytic.grads.blocks();
  bool relu = cfg.activation == Activation::ReLU;

  for (std::size_t b = 0; b < param_blocks.size(); ++b) {
    GradCheckBlock blk;
    blk.name = param_blocks[b].name;
    Matrix& w = *param_blocks[b].matrix;
    const Matrix& gw = *grad_blocks[b].matrix;
    for (std::size_t i = 0; i < w.a.size(); ++i) {
      double saved = w.a[i];
      std::vector<std::uint8_t> pat_plus, pat_minus;
      w.a[i] = saved + step;
      double lp = eval(relu ? &pat_plus : nullptr);
      w.a[i] = saved - step;
      double lm = eval(relu ? &pat_minus : nullptr);
      w.a[i] = saved;
      if (relu && pat_plus != pat_minus) {
        ++blk.excluded;
        continue;
      }
      double numeric = (lp - lm) / (2.0 * step);
      double analytic_g = gw.a[i];
      double denom = std::max({std::fabs(numeric), std::fabs(analytic_g), 1e-6});
      double rel = std::fabs(numeric - analytic_g) / denom;
      blk.max_rel_err = std::max(blk.max_rel_err, rel);
      ++blk.checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, blk.max_rel_err);
    report.total_checked += blk.checked;
    report.total_excluded += blk.excluded;
    report.blocks.push_back(std::move(blk));
  }
  report.passed = report.max_rel_err <= tolerance;
  return report;
}

inline ordered_json grad_check_report_to_json(const GradCheckReport& r) {
  ordered_json j;
  j["step"] = r.step;
  j["tolerance"] = r.tolerance;
  j["max_rel_err"] = r.max_rel_err;
  j["total_checked"] = r.total_checked;
  j["total_excluded"] = r.total_excluded;
  j["passed"] = r.passed;
  ordered_json blocks = ordered_json::array();
  for (const GradCheckBlock& b : r.blocks) {
    ordered_json jb;
    jb["name"] = b.name;
    jb["max_rel_err"] = b.max_rel_err;
    jb["checked"] = b.checked;
    jb["excluded"] = b.excluded;
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

// ---- checkpoint io ----

inline ordered_json params_to_json(RgnnParams& params, const RgnnConfig& cfg) {
  ordered_json j;
  j["format"] = "tabgraph-rgnn-checkpoint";
  j["version"] = 1;
  ordered_json jc;
  jc["num_layers"] = cfg.num_layers;
  jc["input_dim"] = cfg.input_dim;
  jc["hidden_dim"] = cfg.hidden_dim;
  jc["num_classes"] = cfg.num_classes;
  jc["activation"] = activation_name(cfg.activation);
  jc["self_loop"] = cfg.self_loop;
  jc["seed"] = cfg.seed;
  j["config"] = std::move(jc);
  ordered_json blocks = ordered_json::array();
  for (auto& b : params.blocks()) {
    ordered_json jb;
    jb["name"] = b.name;
    jb["rows"] = b.matrix->rows;
    jb["cols"] = b.matrix->cols;
    jb["data"] = b.matrix->a;  // row-major
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

inline RgnnParams params_from_json(const ordered_json& j, const RgnnConfig& cfg) {
  if (!j.contains("format") || j.at("format") != "tabgraph-rgnn-checkpoint")
    throw Error(Errc::bad_config, "not a checkpoint file");
  RgnnParams p = init_params(cfg);  // shapes from config
  std::map<std::string, Matrix*> by_name;
  for (auto& b : p.blocks()) by_name[b.name] = b.matrix;
  std::size_t seen = 0;
  for (const auto& jb : j.at("blocks")) {
    auto it = by_name.find(jb.at("name").get<std::string>());
    if (it == by_name.end())
      throw Error(Errc::shape_mismatch, "unexpected block " + jb.at("name").get<std::string>());
    Matrix& m = *it->second;
    if (jb.at("rows").get<int>() != m.rows || jb.at("cols").get<int>() != m.cols)
      throw Error(Errc::shape_mismatch,
                  "block " + jb.at("name").get<std::string>() + " has wrong shape");
    m.a = jb.at("data").get<std::vector<double>>();
    if (m.a.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols))
      throw Error(Errc::shape_mismatch, "block data length mismatch");
    ++seen;
  }
  if (seen != by_name.size()) throw Error(Errc::shape_mismatch, "checkpoint is missing blocks");
  return p;
}

}  // namespace tabgraph
