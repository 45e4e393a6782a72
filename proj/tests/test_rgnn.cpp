#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "tabgraph/embed.hpp"
#include "tabgraph/fixtures.hpp"
#include "tabgraph/graph.hpp"
#include "tabgraph/rgnn.hpp"
#include "tabgraph/structure.hpp"
#include "tabgraph/synth.hpp"
#include "tabgraph/train.hpp"

using namespace tabgraph;
using Catch::Matchers::WithinAbs;

namespace {

Adjacency make_adj(int n, const std::vector<std::tuple<int, int, EdgeType>>& edges) {
  Adjacency a;
  a.num_nodes = n;
  for (auto& lists : a.nbrs) lists.resize(static_cast<std::size_t>(n));
  for (const auto& [u, v, t] : edges) {
    a.nbrs[static_cast<std::size_t>(t)][static_cast<std::size_t>(u)].push_back(v);
    a.nbrs[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& lists : a.nbrs)
    for (auto& l : lists) std::sort(l.begin(), l.end());
  return a;
}

EmbeddingMatrix make_x(const std::vector<std::vector<double>>& vectors) {
  EmbeddingMatrix m;
  m.dim = static_cast<int>(vectors.at(0).size());
  m.provider_id = "test";
  m.vectors = vectors;
  return m;
}

RgnnConfig tiny_cfg(int layers, int in, int hidden, Activation act, bool self_loop = false) {
  RgnnConfig cfg;
  cfg.num_layers = layers;
  cfg.input_dim = in;
  cfg.hidden_dim = hidden;
  cfg.num_classes = 2;
  cfg.activation = act;
  cfg.self_loop = self_loop;
  cfg.seed = 99;
  return cfg;
}

// The income-table probe setup used by several tests.
struct ProbeSetup {
  Adjacency adj;
  EmbeddingMatrix x;
  std::vector<int> labels;
  std::vector<int> mask;
};

ProbeSetup income_probe(int dim) {
  TableGrid grid = income_table();
  StructureReport rep = analyze_structure(grid);
  TabularGraph g = build_graph(grid, rep);
  ProviderConfig pc;
  pc.dim = dim;
  ProbeSetup s;
  s.adj = Adjacency::from_graph(g);
  s.x = embed_graph(g, pc);
  s.labels.assign(g.nodes.size(), -1);
  for (int i = 0; i < grid.n_rows(); ++i) {
    s.labels[static_cast<std::size_t>(g.row_node(i))] =
        rep.row_types[static_cast<std::size_t>(i)] == RowType::HeaderRow ? 0 : 1;
    s.mask.push_back(g.row_node(i));
  }
  return s;
}

}  // namespace

TEST_CASE("forward: isolated node yields the zero vector") {
  Adjacency adj = make_adj(3, {{1, 2, EdgeType::DataData}});
  EmbeddingMatrix x = make_x({{1.0, -2.0}, {0.5, 1.0}, {-0.5, 3.0}});
  RgnnConfig cfg = tiny_cfg(1, 2, 2, Activation::ReLU);
  RgnnParams p = init_params(cfg);
  NodeStates ns = forward(adj, x, p, cfg);
  CHECK(ns.final_states()(0, 0) == 0.0);
  CHECK(ns.final_states()(0, 1) == 0.0);
}

TEST_CASE("forward: two nodes with identity weights swap states") {
  Adjacency adj = make_adj(2, {{0, 1, EdgeType::TableHeader}});
  EmbeddingMatrix x = make_x({{1.0, 2.0}, {-3.0, 4.0}});
  RgnnConfig cfg = tiny_cfg(1, 2, 2, Activation::Identity);
  RgnnParams p = init_params(cfg);
  for (int t = 0; t < kNumEdgeTypes; ++t) p.relation[0][static_cast<std::size_t>(t)] = Matrix::identity(2);
  NodeStates ns = forward(adj, x, p, cfg);
  CHECK(ns.final_states()(0, 0) == -3.0);
  CHECK(ns.final_states()(0, 1) == 4.0);
  CHECK(ns.final_states()(1, 0) == 1.0);
  CHECK(ns.final_states()(1, 1) == 2.0);
}

TEST_CASE("forward: star center gets twice the neighbor mean with W = 2I") {
  Adjacency adj = make_adj(3, {{0, 1, EdgeType::HeaderData}, {0, 2, EdgeType::HeaderData}});
  EmbeddingMatrix x = make_x({{1.0, 0.0}, {0.5, 1.0}, {-0.5, 3.0}});
  RgnnConfig cfg = tiny_cfg(1, 2, 2, Activation::Identity);
  RgnnParams p = init_params(cfg);
  for (int t = 0; t < kNumEdgeTypes; ++t) {
    Matrix w = Matrix::identity(2);
    for (double& v : w.a) v *= 2.0;
    p.relation[0][static_cast<std::size_t>(t)] = w;
  }
  NodeStates ns = forward(adj, x, p, cfg);
  // center: 2 * mean([0.5,1], [-0.5,3]) = [0, 4]
  CHECK_THAT(ns.final_states()(0, 0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(ns.final_states()(0, 1), WithinAbs(4.0, 1e-15));
  // leaves see only the center
  CHECK_THAT(ns.final_states()(1, 0), WithinAbs(2.0, 1e-15));
  CHECK_THAT(ns.final_states()(2, 1), WithinAbs(0.0, 1e-15));
}

TEST_CASE("forward: shape validation") {
  Adjacency adj = make_adj(2, {{0, 1, EdgeType::TableHeader}});
  EmbeddingMatrix x = make_x({{1.0, 2.0, 3.0}, {0.0, 1.0, 0.0}});
  RgnnConfig cfg = tiny_cfg(1, 2, 2, Activation::ReLU);
  RgnnParams p = init_params(cfg);
  CHECK_THROWS_MATCHES(forward(adj, x, p, cfg), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::shape_mismatch; }));
}

TEST_CASE("loss: uniform head output gives ln k") {
  ProbeSetup s = income_probe(8);
  RgnnConfig cfg = tiny_cfg(2, 8, 6, Activation::ReLU);
  cfg.num_classes = 2;
  RgnnParams p = init_params(cfg);
  p.head.zero();  // all logits zero -> uniform softmax
  LossResult r = loss_and_grads(s.adj, s.x, p, cfg, s.labels, s.mask);
  CHECK_THAT(r.loss, WithinAbs(std::log(2.0), 1e-15));

  RgnnConfig cfg5 = cfg;
  cfg5.num_classes = 5;
  RgnnParams p5 = init_params(cfg5);
  p5.head.zero();
  LossResult r5 = loss_and_grads(s.adj, s.x, p5, cfg5, s.labels, s.mask);
  CHECK_THAT(r5.loss, WithinAbs(std::log(5.0), 1e-15));
}

TEST_CASE("loss: empty mask is rejected") {
  ProbeSetup s = income_probe(8);
  RgnnConfig cfg = tiny_cfg(1, 8, 4, Activation::ReLU);
  RgnnParams p = init_params(cfg);
  CHECK_THROWS_MATCHES(loss_and_grads(s.adj, s.x, p, cfg, s.labels, {}), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::empty_mask; }));
}

TEST_CASE("gradients match a hand-rolled finite-difference probe") {
  // Independent of grad_check: this test runs its own central differences on
  // sampled coordinates of a 13-node graph (3x3 grid).
  TableGrid grid = uniform_grid(3, 3);
  StructureReport rep = analyze_structure(grid);
  TabularGraph g = build_graph(grid, rep);
  Adjacency adj = Adjacency::from_graph(g);
  ProviderConfig pc;
  pc.dim = 6;
  EmbeddingMatrix x = embed_graph(g, pc);
  std::vector<int> labels(g.nodes.size(), -1);
  std::vector<int> mask;
  for (int i = 0; i < 3; ++i) {
    labels[static_cast<std::size_t>(g.row_node(i))] = i == 0 ? 0 : 1;
    mask.push_back(g.row_node(i));
  }
  RgnnConfig cfg = tiny_cfg(2, 6, 5, Activation::Tanh);
  RgnnParams params = init_params(cfg);
  LossResult analytic = loss_and_grads(adj, x, params, cfg, labels, mask);

  auto eval = [&]() {
    NodeStates ns = forward(adj, x, params, cfg);
    const Matrix& hl = ns.states.back();
    std::vector<double> logits(2);
    double loss = 0;
    for (int v : mask) {
      matvec(params.head, &hl.a[static_cast<std::size_t>(v) * hl.cols], logits.data());
      double mx = std::max(logits[0], logits[1]);
      double sum = std::exp(logits[0] - mx) + std::exp(logits[1] - mx);
      int y = labels[static_cast<std::size_t>(v)];
      loss += -(logits[static_cast<std::size_t>(y)] - mx - std::log(sum));
    }
    return loss / static_cast<double>(mask.size());
  };

  SplitMix64 rng(5);
  auto pblocks = params.blocks();
  auto gblocks = analytic.grads.blocks();
  const double step = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t b = rng.next_below(pblocks.size());
    Matrix& w = *pblocks[b].matrix;
    if (w.a.empty()) continue;
    std::size_t i = rng.next_below(w.a.size());
    double saved = w.a[i];
    w.a[i] = saved + step;
    double lp = eval();
    w.a[i] = saved - step;
    double lm = eval();
    w.a[i] = saved;
    double numeric = (lp - lm) / (2 * step);
    double expected = gblocks[b].matrix->a[i];
    CHECK_THAT(numeric, WithinAbs(expected, 1e-6 + 1e-4 * std::fabs(expected)));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("grad_check: full coverage on the income graph with ReLU") {
  ProbeSetup s = income_probe(10);
  RgnnConfig cfg = tiny_cfg(2, 10, 6, Activation::ReLU);
  RgnnParams params = init_params(cfg);
  GradCheckReport report = grad_check(s.adj, s.x, params, cfg, s.labels, s.mask, 1e-4, 1e-4);
  CHECK(report.passed);
  CHECK(report.max_rel_err <= 1e-4);
  CHECK(report.total_checked > 0);
}

TEST_CASE("grad_check: identity activation on the 3-node star is tight") {
  Adjacency adj = make_adj(3, {{0, 1, EdgeType::HeaderData}, {0, 2, EdgeType::HeaderData}});
  EmbeddingMatrix x = make_x({{1.0, 0.5}, {0.25, -1.0}, {-0.75, 2.0}});
  RgnnConfig cfg = tiny_cfg(1, 2, 3, Activation::Identity);
  RgnnParams params = init_params(cfg);
  std::vector<int> labels = {0, 1, -1};
  std::vector<int> mask = {0, 1};
  GradCheckReport report = grad_check(adj, x, params, cfg, labels, mask, 1e-5, 1e-7);
  CHECK(report.passed);
  CHECK(report.max_rel_err <= 1e-7);
  CHECK(report.total_excluded == 0);
}

TEST_CASE("grad_check: engineered ReLU kinks are excluded, not failed") {
  // Zero weights put every pre-activation exactly at the kink; perturbing a
  // coordinate flips signs between the +step and -step evaluations.
  Adjacency adj = make_adj(2, {{0, 1, EdgeType::TableHeader}});
  EmbeddingMatrix x = make_x({{1.0, 2.0}, {3.0, 4.0}});
  RgnnConfig cfg = tiny_cfg(1, 2, 2, Activation::ReLU);
  RgnnParams params = init_params(cfg);
  for (auto& block : params.blocks()) {
    if (block.name != "head") block.matrix->zero();
  }
  std::vector<int> labels = {0, 1};
  std::vector<int> mask = {0, 1};
  GradCheckReport report = grad_check(adj, x, params, cfg, labels, mask, 1e-4, 1e-4);
  CHECK(report.total_excluded > 0);
  CHECK(report.passed);  // excluded coordinates do not count as failures
}

TEST_CASE("saturated softmax has vanishing gradients") {
  Adjacency adj = make_adj(1, {});
  EmbeddingMatrix x = make_x({{1.0}});
  RgnnConfig cfg = tiny_cfg(1, 1, 1, Activation::Identity, /*self_loop=*/true);
  RgnnParams p = init_params(cfg);
  p.self[0](0, 0) = 1.0;  // h = x = 1
  p.head(0, 0) = 50.0;    // logit margin 50 toward class 0
  p.head(1, 0) = 0.0;
  std::vector<int> labels = {0};
  std::vector<int> mask = {0};
  LossResult r = loss_and_grads(adj, x, p, cfg, labels, mask);
  double norm = 0;
  for (auto& b : r.grads.blocks())
    for (double v : b.matrix->a) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-20);
  CHECK(r.loss < 1e-20);
}

TEST_CASE("permutation equivariance over 100 random permutations") {
  ProbeSetup s = income_probe(8);
  RgnnConfig cfg = tiny_cfg(2, 8, 6, Activation::ReLU);
  RgnnParams params = init_params(cfg);
  NodeStates base = forward(s.adj, s.x, params, cfg);
  int n = s.adj.num_nodes;

  SplitMix64 rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.next_below(i))]);

    Adjacency padj;
    padj.num_nodes = n;
    for (int t = 0; t < kNumEdgeTypes; ++t) {
      padj.nbrs[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(n));
      for (int v = 0; v < n; ++v) {
        for (int u : s.adj.nbrs[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)])
          padj.nbrs[static_cast<std::size_t>(t)][static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])]
              .push_back(perm[static_cast<std::size_t>(u)]);
      }
      for (auto& l : padj.nbrs[static_cast<std::size_t>(t)]) std::sort(l.begin(), l.end());
    }
    EmbeddingMatrix px = s.x;
    for (int v = 0; v < n; ++v)
      px.vectors[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])] =
          s.x.vectors[static_cast<std::size_t>(v)];

    NodeStates permuted = forward(padj, px, params, cfg);
    for (int v = 0; v < n; ++v) {
      for (int j = 0; j < cfg.hidden_dim; ++j) {
        CHECK_THAT(permuted.final_states()(perm[static_cast<std::size_t>(v)], j),
                   WithinAbs(base.final_states()(v, j), 1e-10));
      }
    }
  }
}

TEST_CASE("edge-type separation: zeroed weights make a type's edges inert") {
  ProbeSetup s = income_probe(8);
  RgnnConfig cfg = tiny_cfg(2, 8, 6, Activation::ReLU);
  RgnnParams params = init_params(cfg);
  for (int l = 0; l < cfg.num_layers; ++l)
    params.relation[static_cast<std::size_t>(l)][static_cast<std::size_t>(EdgeType::HeaderData)]
        .zero();

  Adjacency stripped = s.adj;
  for (auto& l : stripped.nbrs[static_cast<std::size_t>(EdgeType::HeaderData)]) l.clear();

  NodeStates a = forward(s.adj, s.x, params, cfg);
  NodeStates b = forward(stripped, s.x, params, cfg);
  CHECK(a.final_states().a == b.final_states().a);  // exact
}

TEST_CASE("identity activation is linear in x (exact for power-of-two scales)") {
  ProbeSetup s = income_probe(8);
  RgnnConfig cfg = tiny_cfg(2, 8, 6, Activation::Identity);
  RgnnParams params = init_params(cfg);
  NodeStates base = forward(s.adj, s.x, params, cfg);
  EmbeddingMatrix scaled = s.x;
  for (auto& v : scaled.vectors)
    for (double& c : v) c *= 2.0;
  NodeStates doubled = forward(s.adj, scaled, params, cfg);
  for (std::size_t i = 0; i < base.final_states().a.size(); ++i)
    CHECK(doubled.final_states().a[i] == 2.0 * base.final_states().a[i]);
}

TEST_CASE("deterministic init and training") {
  RgnnConfig cfg = tiny_cfg(2, 6, 5, Activation::ReLU);
  cfg.seed = 1234;
  RgnnParams a = init_params(cfg);
  RgnnParams b = init_params(cfg);
  for (std::size_t blk = 0; blk < a.blocks().size(); ++blk)
    CHECK(a.blocks()[blk].matrix->a == b.blocks()[blk].matrix->a);
  double bound = 1.0 / std::sqrt(6.0);
  for (double v : a.relation[0][0].a) {
    CHECK(v <= bound);
    CHECK(v >= -bound);
  }
}

TEST_CASE("train: lr = 0 leaves parameters at their initialization") {
  std::vector<ProbeExample> examples;
  ProviderConfig pc;
  pc.dim = 6;
  for (const SynthTable& t : generate_synthetic_corpus(6, 11)) {
    StructureReport rep = analyze_structure(t.grid);
    TabularGraph g = build_graph(t.grid, rep);
    examples.push_back(make_trc_example(t.id, t.grid, rep, g, embed_graph(g, pc)));
  }
  RgnnConfig cfg = tiny_cfg(2, 6, 5, Activation::ReLU);
  TrainOptions opt;
  opt.lr = 0.0;
  opt.steps = 7;
  opt.seed = 42;
  opt.eval_every = 0;
  TrainResult r = train(examples, cfg, opt);
  cfg.seed = opt.seed;
  RgnnParams fresh = init_params(cfg);
  for (std::size_t blk = 0; blk < fresh.blocks().size(); ++blk)
    CHECK(r.params.blocks()[blk].matrix->a == fresh.blocks()[blk].matrix->a);
}

TEST_CASE("train: same seed twice gives a bit-identical metric trace") {
  std::vector<ProbeExample> examples;
  ProviderConfig pc;
  pc.dim = 8;
  for (const SynthTable& t : generate_synthetic_corpus(12, 3)) {
    StructureReport rep = analyze_structure(t.grid);
    TabularGraph g = build_graph(t.grid, rep);
    examples.push_back(make_trc_example(t.id, t.grid, rep, g, embed_graph(g, pc)));
  }
  RgnnConfig cfg = tiny_cfg(2, 8, 8, Activation::ReLU);
  TrainOptions opt;
  opt.lr = 0.02;
  opt.steps = 30;
  opt.seed = 7;
  opt.batch_size = 4;
  opt.eval_every = 10;
  TrainResult a = train(examples, cfg, opt);
  TrainResult b = train(examples, cfg, opt);
  CHECK(trace_to_json(a).dump() == trace_to_json(b).dump());
  CHECK(a.trace.size() == 30);
  CHECK(a.trace.back().loss < a.trace.front().loss);  // it learns something
}

TEST_CASE("train: non-finite loss aborts with the partial trace") {
  ProbeExample ex;
  ex.table_id = "poisoned";
  ex.adj = make_adj(2, {{0, 1, EdgeType::TableHeader}});
  ex.x = make_x({{std::numeric_limits<double>::infinity(), 0.0}, {1.0, 1.0}});
  ex.labels = {0, 1};
  ex.mask = {0, 1};
  RgnnConfig cfg = tiny_cfg(1, 2, 2, Activation::Identity);
  TrainOptions opt;
  opt.steps = 5;
  opt.seed = 1;
  TrainResult partial;
  bool threw = false;
  try {
    train({ex}, cfg, opt, &partial);
  } catch (const Error& e) {
    threw = e.code() == Errc::divergence;
  }
  CHECK(threw);
  REQUIRE(partial.trace.size() == 1);  // aborted at the first step
  CHECK_FALSE(std::isfinite(partial.trace[0].loss));
}

TEST_CASE("checkpoint round trip validates shapes") {
  RgnnConfig cfg = tiny_cfg(2, 6, 5, Activation::Tanh, /*self_loop=*/true);
  RgnnParams p = init_params(cfg);
  ordered_json j = params_to_json(p, cfg);
  RgnnParams q = params_from_json(j, cfg);
  for (std::size_t blk = 0; blk < p.blocks().size(); ++blk)
    CHECK(p.blocks()[blk].matrix->a == q.blocks()[blk].matrix->a);

  RgnnConfig other = cfg;
  other.hidden_dim = 7;
  CHECK_THROWS_MATCHES(params_from_json(j, other), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::shape_mismatch; }));
}
