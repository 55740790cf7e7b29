#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "brl/backbone.hpp"
#include "brl/loss.hpp"
#include "test_util.hpp"

using namespace brl;

namespace {

// 0 is the root; 1 hangs off 0; 2 and 3 hang off 1.
SkeletonGraph star4() {
  SkeletonGraph g;
  g.num_joints = 4;
  g.parent = {0, 0, 1, 1};
  g.edges = {{0, 1}, {1, 2}, {1, 3}};
  g.upper = {1, 2, 3};
  g.lower = {0};
  g.validate();
  return g;
}

BackboneConfig tiny_config() {
  BackboneConfig cfg;
  cfg.input_channels = 2;
  cfg.joints = 4;
  cfg.frames = 8;
  cfg.num_classes = 3;
  cfg.block_channels = {4, 6};
  cfg.temporal_kernel = 3;
  cfg.temporal_strides = {1, 2};
  cfg.init_seed = 5;
  return cfg;
}

void fill_params(Backbone& net, Rng& rng) {
  std::normal_distribution<double> d(0.0, 0.4);
  for (auto& t : net.params().values)
    for (double& x : t.v) x = d(rng);
}

}  // namespace

TEST_CASE("normalized adjacency of a 2-joint edge") {
  SkeletonGraph g;
  g.num_joints = 2;
  g.parent = {0, 0};
  g.edges = {{0, 1}};
  g.upper = {0};
  g.lower = {1};
  const auto adj = build_adjacency(g);
  REQUIRE(adj.a.size() == 4);
  for (double x : adj.a) CHECK(x == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("normalized adjacency of a 3-joint chain, hand computed") {
  SkeletonGraph g;
  g.num_joints = 3;
  g.parent = {0, 0, 1};
  g.edges = {{0, 1}, {1, 2}};
  g.upper = {1, 2};
  g.lower = {0};
  const auto adj = build_adjacency(g);
  // degrees of A+I are (2, 3, 2)
  CHECK(adj.a[0 * 3 + 0] == doctest::Approx(1.0 / 2.0));
  CHECK(adj.a[0 * 3 + 1] == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(adj.a[0 * 3 + 2] == doctest::Approx(0.0));
  CHECK(adj.a[1 * 3 + 1] == doctest::Approx(1.0 / 3.0));
  CHECK(adj.a[1 * 3 + 2] == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(adj.a[2 * 3 + 2] == doctest::Approx(1.0 / 2.0));
  // symmetry
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(adj.a[i * 3 + j] == doctest::Approx(adj.a[j * 3 + i]));
}

TEST_CASE("zeroed network maps any input to the head bias") {
  const auto cfg = tiny_config();
  Backbone net(cfg, star4());
  for (auto& t : net.params().values)
    for (double& x : t.v) x = 0.0;
  auto& fcb = net.params().value("fc.b");
  fcb.v = {0.3, -1.2, 0.9};
  Rng rng = make_rng(1);
  const auto seq = testutil::random_sequence(1, cfg.frames, cfg.joints,
                                             cfg.input_channels, rng);
  ForwardCache cache;
  const auto logits = net.forward(seq, cache);
  REQUIRE(logits.size() == 3);
  CHECK(logits[0] == doctest::Approx(0.3));
  CHECK(logits[1] == doctest::Approx(-1.2));
  CHECK(logits[2] == doctest::Approx(0.9));
}

TEST_CASE("initialization and forward are deterministic") {
  const auto cfg = tiny_config();
  Backbone a(cfg, star4()), b(cfg, star4());
  REQUIRE(a.params().values.size() == b.params().values.size());
  for (std::size_t i = 0; i < a.params().values.size(); ++i)
    CHECK(a.params().values[i].v == b.params().values[i].v);

  Rng rng = make_rng(2);
  const auto seq = testutil::random_sequence(1, cfg.frames, cfg.joints,
                                             cfg.input_channels, rng);
  ForwardCache c1, c2;
  CHECK(a.forward(seq, c1) == b.forward(seq, c2));
  CHECK(a.forward(seq, c1) == a.forward(seq, c2));
}

TEST_CASE("forward is equivariant under a joint relabeling") {
  const auto cfg = tiny_config();
  const auto g = star4();
  // relabel joints with the permutation p: old -> new
  const std::vector<std::size_t> p = {2, 0, 3, 1};
  SkeletonGraph pg;
  pg.num_joints = 4;
  pg.parent.resize(4);
  for (std::size_t v = 0; v < 4; ++v) pg.parent[p[v]] = p[g.parent[v]];
  for (auto [u, v] : g.edges) pg.edges.emplace_back(p[u], p[v]);
  for (std::size_t v : g.upper) pg.upper.push_back(p[v]);
  for (std::size_t v : g.lower) pg.lower.push_back(p[v]);
  pg.validate();

  Backbone net(cfg, g), pnet(cfg, pg);  // same seed, graph-independent params
  Rng rng = make_rng(3);
  const auto seq = testutil::random_sequence(1, cfg.frames, cfg.joints,
                                             cfg.input_channels, rng);
  SkeletonSequence pseq = seq;
  for (std::size_t t = 0; t < cfg.frames; ++t)
    for (std::size_t v = 0; v < 4; ++v)
      for (std::size_t c = 0; c < cfg.input_channels; ++c)
        pseq.at(0, t, p[v], c) = seq.at(0, t, v, c);

  ForwardCache c1, c2;
  const auto z = net.forward(seq, c1);
  const auto pz = pnet.forward(pseq, c2);
  for (std::size_t c = 0; c < z.size(); ++c)
    CHECK(z[c] == doctest::Approx(pz[c]).epsilon(1e-10));
}

TEST_CASE("absent persons do not contribute to the pooled feature") {
  const auto cfg = tiny_config();
  Backbone net(cfg, star4());
  Rng rng = make_rng(4);
  const auto solo = testutil::random_sequence(1, cfg.frames, cfg.joints,
                                              cfg.input_channels, rng);
  SkeletonSequence duo(2, cfg.frames, cfg.joints, cfg.input_channels);
  std::copy(solo.data.begin(), solo.data.end(), duo.data.begin());
  // second body holds garbage but is masked out
  for (std::size_t i = solo.data.size(); i < duo.data.size(); ++i)
    duo.data[i] = 77.0;
  duo.person_mask = {1, 0};
  ForwardCache c1, c2;
  const auto z1 = net.forward(solo, c1);
  const auto z2 = net.forward(duo, c2);
  for (std::size_t c = 0; c < z1.size(); ++c)
    CHECK(z1[c] == doctest::Approx(z2[c]).epsilon(1e-12));
}

TEST_CASE("backward matches finite differences for every parameter") {
  const auto cfg = tiny_config();
  const auto g = star4();
  Backbone net(cfg, g);
  Rng rng = make_rng(5);
  fill_params(net, rng);
  const auto seq = testutil::random_sequence(2, cfg.frames, cfg.joints,
                                             cfg.input_channels, rng, 1);
  const SoftLabel y = SoftLabel::one_hot(1, int(cfg.num_classes));

  ForwardCache cache;
  const auto logits = net.forward(seq, cache);
  const auto loss = softmax_ce(logits, y);
  net.params().zero_grad();
  net.backward(seq, cache, loss.grad);

  for (const auto& tensor : net.params().values) {
    const std::string name = tensor.name;
    const auto fd = testutil::finite_difference(
        [&](const std::vector<double>& v) {
          Backbone probe(cfg, g);
          for (const auto& t : net.params().values)
            probe.params().value(t.name).v = t.v;
          probe.params().value(name).v = v;
          ForwardCache c;
          return softmax_ce(probe.forward(seq, c), y).value;
        },
        tensor.v, 1e-5);
    const auto& analytic = net.params().grad(name).v;
    INFO("parameter ", name);
    CHECK(testutil::grad_close(analytic, fd, 1e-4, 1e-6));
  }
}

TEST_CASE("backward accumulates across samples") {
  const auto cfg = tiny_config();
  Backbone net(cfg, star4());
  Rng rng = make_rng(6);
  fill_params(net, rng);
  const auto a = testutil::random_sequence(1, cfg.frames, cfg.joints,
                                           cfg.input_channels, rng, 0);
  const auto b = testutil::random_sequence(1, cfg.frames, cfg.joints,
                                           cfg.input_channels, rng, 2);

  auto grads_for = [&](const SkeletonSequence& s) {
    ForwardCache c;
    const auto z = net.forward(s, c);
    const auto l = softmax_ce(z, SoftLabel::one_hot(s.label, 3));
    net.params().zero_grad();
    net.backward(s, c, l.grad);
    std::vector<std::vector<double>> out;
    for (const auto& t : net.params().grads) out.push_back(t.v);
    return out;
  };
  const auto ga = grads_for(a);
  const auto gb = grads_for(b);

  ForwardCache ca, cb;
  const auto za = net.forward(a, ca);
  const auto zb = net.forward(b, cb);
  net.params().zero_grad();
  net.backward(a, ca, softmax_ce(za, SoftLabel::one_hot(0, 3)).grad);
  net.backward(b, cb, softmax_ce(zb, SoftLabel::one_hot(2, 3)).grad);
  for (std::size_t i = 0; i < net.params().grads.size(); ++i)
    for (std::size_t j = 0; j < net.params().grads[i].v.size(); ++j)
      CHECK(net.params().grads[i].v[j] ==
            doctest::Approx(ga[i][j] + gb[i][j]).epsilon(1e-10));
}

TEST_CASE("sgd step follows the Nesterov momentum recipe") {
  const auto cfg = tiny_config();
  Backbone net(cfg, star4());
  const double p0 = 0.5, g0 = 0.2, lr = 0.1, mu = 0.9, wd = 0.01;
  for (auto& t : net.params().values)
    for (double& x : t.v) x = p0;
  auto set_grads = [&](double g) {
    for (auto& t : net.params().grads)
      for (double& x : t.v) x = g;
  };

  set_grads(g0);
  net.sgd_step(lr, mu, wd, true);
  const double d1 = g0 + wd * p0;        // buf1 = d1
  const double p1 = p0 - lr * (d1 + mu * d1);
  CHECK(net.params().values[0].v[0] == doctest::Approx(p1).epsilon(1e-12));
  // gradients are cleared by the step
  for (const auto& t : net.params().grads)
    for (double x : t.v) CHECK(x == 0.0);

  set_grads(g0);
  net.sgd_step(lr, mu, wd, true);
  const double d2 = g0 + wd * p1;
  const double buf2 = mu * d1 + d2;
  const double p2 = p1 - lr * (d2 + mu * buf2);
  CHECK(net.params().values[0].v[0] == doctest::Approx(p2).epsilon(1e-12));

  // plain momentum variant
  Backbone net2(cfg, star4());
  for (auto& t : net2.params().values)
    for (double& x : t.v) x = p0;
  for (auto& t : net2.params().grads)
    for (double& x : t.v) x = g0;
  net2.sgd_step(lr, mu, wd, false);
  CHECK(net2.params().values[0].v[0] == doctest::Approx(p0 - lr * d1));
}

TEST_CASE("cosine schedule endpoints and a late-epoch value") {
  CHECK(cosine_lr(0, 120, 0.1) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(cosine_lr(60, 120, 0.1) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_lr(120, 120, 0.1), DomainError);
  const double s = std::sin(M_PI / 240.0);
  CHECK(cosine_lr(119, 120, 0.1) == doctest::Approx(0.1 * s * s).epsilon(1e-10));
  CHECK(cosine_lr(119, 120, 0.1) == doctest::Approx(1.713e-5).epsilon(1e-3));
}

TEST_CASE("config validation rejects inconsistent shapes") {
  auto cfg = tiny_config();
  cfg.temporal_strides = {1};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = tiny_config();
  cfg.temporal_kernel = 4;  // even kernels cannot pad symmetrically
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = tiny_config();
  cfg.block_channels.clear();
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("forward rejects shape mismatches") {
  const auto cfg = tiny_config();
  Backbone net(cfg, star4());
  SkeletonSequence bad(1, cfg.frames, cfg.joints + 1, cfg.input_channels);
  ForwardCache c;
  CHECK_THROWS_AS(net.forward(bad, c), ShapeError);
}
