#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgraph/embed.hpp"
#include "tabgraph/error.hpp"
#include "tabgraph/graph.hpp"
#include "tabgraph/metrics.hpp"
#include "tabgraph/rgnn.hpp"
#include "tabgraph/structure.hpp"

namespace tabgraph {

// One labeled graph for probe training: labels are class ids per node
// (-1 where undefined) and the mask selects the supervised nodes.
struct ProbeExample {
  std::string table_id;
  Adjacency adj;
  EmbeddingMatrix x;
  std::vector<int> labels;
  std::vector<int> mask;
};

inline constexpr int kRowClassHeader = 0;
inline constexpr int kRowClassData = 1;

// Row-type probe example: mask = the row nodes, labels from the row-type
// algorithm (self-supervised, no human labels).
inline ProbeExample make_trc_example(const std::string& table_id, const TableGrid& grid,
                                     const StructureReport& report, const TabularGraph& graph,
                                     EmbeddingMatrix x) {
  ProbeExample ex;
  ex.table_id = table_id;
  ex.adj = Adjacency::from_graph(graph);
  ex.x = std::move(x);
  ex.labels.assign(graph.nodes.size(), -1);
  for (int i = 0; i < grid.n_rows(); ++i) {
    ex.labels[static_cast<std::size_t>(graph.row_node(i))] =
        report.row_types[static_cast<std::size_t>(i)] == RowType::HeaderRow ? kRowClassHeader
                                                                            : kRowClassData;
    ex.mask.push_back(graph.row_node(i));
  }
  return ex;
}

struct TrainOptions {
  double lr = 0.01;
  int steps = 300;
  std::uint64_t seed = 1;
  int batch_size = 16;
  double val_fraction = 0.2;
  int eval_every = 25;
};

struct TraceEntry {
  int step = 0;
  double loss = 0.0;
  std::optional<double> val_macro_f1;
};

struct TrainResult {
  RgnnParams params;
  std::vector<TraceEntry> trace;
  double final_val_macro_f1 = 0.0;
  int train_examples = 0;
  int val_examples = 0;
};

namespace detail_train {

struct Adam {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  RgnnParams m, v;
  int t = 0;

  Adam(const RgnnParams& shape, double lr_) : lr(lr_), m(zeros_like(shape)), v(zeros_like(shape)) {}

  void step(RgnnParams& params, RgnnParams& grads) {
    ++t;
    double bc1 = 1.0 - std::pow(beta1, t);
    double bc2 = 1.0 - std::pow(beta2, t);
    auto pb = params.blocks();
    auto gb = grads.blocks();
    auto mb = m.blocks();
    auto vb = v.blocks();
    for (std::size_t b = 0; b < pb.size(); ++b) {
      auto& pa = pb[b].matrix->a;
      auto& ga = gb[b].matrix->a;
      auto& ma = mb[b].matrix->a;
      auto& va = vb[b].matrix->a;
      for (std::size_t i = 0; i < pa.size(); ++i) {
        ma[i] = beta1 * ma[i] + (1.0 - beta1) * ga[i];
        va[i] = beta2 * va[i] + (1.0 - beta2) * ga[i] * ga[i];
        double mhat = ma[i] / bc1;
        double vhat = va[i] / bc2;
        pa[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
};

inline void accumulate(RgnnParams& into, const RgnnParams& from, double scale) {
  auto ib = into.blocks();
  auto fb = const_cast<RgnnParams&>(from).blocks();
  for (std::size_t b = 0; b < ib.size(); ++b) {
    auto& ia = ib[b].matrix->a;
    const auto& fa = fb[b].matrix->a;
    for (std::size_t i = 0; i < ia.size(); ++i) ia[i] += scale * fa[i];
  }
}

}  // namespace detail_train

// Argmax predictions for the masked nodes of one example.
inline std::vector<int> predict(const ProbeExample& ex, const RgnnParams& params,
                                const RgnnConfig& cfg) {
  NodeStates ns = forward(ex.adj, ex.x, params, cfg);
  const Matrix& hl = ns.states.back();
  std::vector<double> logits(static_cast<std::size_t>(cfg.num_classes));
  std::vector<int> out;
  out.reserve(ex.mask.size());
  for (int v : ex.mask) {
    matvec(params.head, &hl.a[static_cast<std::size_t>(v) * hl.cols], logits.data());
    int best = 0;
    for (int c = 1; c < cfg.num_classes; ++c)
      if (logits[static_cast<std::size_t>(c)] > logits[static_cast<std::size_t>(best)]) best = c;
    out.push_back(best);
  }
  return out;
}

inline double eval_macro_f1(const std::vector<const ProbeExample*>& examples,
                            const RgnnParams& params, const RgnnConfig& cfg) {
  std::vector<int> pred, gold;
  for (const ProbeExample* ex : examples) {
    std::vector<int> p = predict(*ex, params, cfg);
    for (std::size_t k = 0; k < ex->mask.size(); ++k) {
      pred.push_back(p[k]);
      gold.push_back(ex->labels[static_cast<std::size_t>(ex->mask[k])]);
    }
  }
  return macro_f1(pred, gold).macro_f1;
}

// Deterministic Adam training: fixed parameter init from the run seed, fixed
// round-robin batch order, fixed gradient reduction order. Non-finite loss
// aborts with the partial trace available through `partial`.
inline TrainResult train(const std::vector<ProbeExample>& examples, RgnnConfig cfg,
                         const TrainOptions& opt, TrainResult* partial = nullptr) {
  if (examples.empty()) throw Error(Errc::empty_mask, "no training examples");
  if (opt.steps < 0 || opt.batch_size < 1) throw Error(Errc::bad_config, "bad optimizer options");

  cfg.seed = opt.seed;
  RgnnParams params = init_params(cfg);
  detail_train::Adam adam(params, opt.lr);

  std::size_t n = examples.size();
  std::size_t n_val = static_cast<std::size_t>(std::llround(opt.val_fraction * static_cast<double>(n)));
  if (n_val >= n) n_val = n > 1 ? n - 1 : 0;
  std::size_t n_train = n - n_val;

  std::vector<const ProbeExample*> train_set, val_set;
  for (std::size_t i = 0; i < n_train; ++i) train_set.push_back(&examples[i]);
  for (std::size_t i = n_train; i < n; ++i) val_set.push_back(&examples[i]);
  if (val_set.empty()) val_set = train_set;  // degenerate corpora evaluate in-sample

  TrainResult res;
  res.train_examples = static_cast<int>(train_set.size());
  res.val_examples = static_cast<int>(val_set.size());

  std::size_t cursor = 0;
  for (int s = 1; s <= opt.steps; ++s) {
    RgnnParams grads = zeros_like(params);
    double loss = 0.0;
    int in_batch = std::min<std::size_t>(static_cast<std::size_t>(opt.batch_size), train_set.size());
    for (int k = 0; k < in_batch; ++k) {
      const ProbeExample* ex = train_set[cursor];
      cursor = (cursor + 1) % train_set.size();
      LossResult lr = loss_and_grads(ex->adj, ex->x, params, cfg, ex->labels, ex->mask);
      loss += lr.loss;
      detail_train::accumulate(grads, lr.grads, 1.0 / static_cast<double>(in_batch));
    }
    loss /= static_cast<double>(in_batch);

    TraceEntry entry;
    entry.step = s;
    entry.loss = loss;
    if (!std::isfinite(loss)) {
      res.trace.push_back(entry);
      if (partial) *partial = std::move(res);
      throw Error(Errc::divergence, "non-finite loss at step " + std::to_string(s));
    }
    adam.step(params, grads);
    if (opt.eval_every > 0 && (s % opt.eval_every == 0 || s == opt.steps)) {
      entry.val_macro_f1 = eval_macro_f1(val_set, params, cfg);
    }
    res.trace.push_back(entry);
  }

  if (opt.steps == 0) {
    TraceEntry entry;
    entry.step = 0;
    entry.loss = 0.0;
    entry.val_macro_f1 = eval_macro_f1(val_set, params, cfg);
    res.trace.push_back(entry);
  }

  res.final_val_macro_f1 = 0.0;
  for (const TraceEntry& e : res.trace)
    if (e.val_macro_f1) res.final_val_macro_f1 = *e.val_macro_f1;
  res.params = std::move(params);
  return res;
}

inline ordered_json trace_to_json(const TrainResult& r) {
  ordered_json j;
  j["train_examples"] = r.train_examples;
  j["val_examples"] = r.val_examples;
  j["final_val_macro_f1"] = r.final_val_macro_f1;
  ordered_json steps = ordered_json::array();
  for (const TraceEntry& e : r.trace) {
    ordered_json je;
    je["step"] = e.step;
    je["loss"] = e.loss;
    if (e.val_macro_f1) je["val_macro_f1"] = *e.val_macro_f1;
    steps.push_back(std::move(je));
  }
  j["trace"] = std::move(steps);
  return j;
}

}  // namespace tabgraph
