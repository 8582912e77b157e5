#include "doctest.h"

#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "bcast/expander.hpp"
#include "bcast/sim.hpp"

using namespace bcast;

namespace {

// Recursive subset enumeration with set-based neighbourhoods.
std::int64_t reference_min_neighbourhood(const BipartiteRegularGraph& g, std::int64_t s) {
  std::vector<std::set<std::int64_t>> adj(static_cast<std::size_t>(g.n));
  for (std::int64_t v = 0; v < g.n; ++v)
    for (std::int64_t i = 0; i < g.d; ++i) adj[g.edges[v * g.d + i]].insert(v);
  std::int64_t best = g.n + 1;
  std::vector<std::int64_t> chosen;
  std::function<void(std::int64_t)> rec = [&](std::int64_t start) {
    if (static_cast<std::int64_t>(chosen.size()) == s) {
      std::set<std::int64_t> nb;
      for (auto u : chosen) nb.insert(adj[u].begin(), adj[u].end());
      best = std::min<std::int64_t>(best, static_cast<std::int64_t>(nb.size()));
      return;
    }
    for (std::int64_t u = start; u < g.n; ++u) {
      chosen.push_back(u);
      rec(u + 1);
      chosen.pop_back();
    }
  };
  rec(0);
  return best;
}

BipartiteRegularGraph complete(std::int64_t n) {
  BipartiteRegularGraph g{n, static_cast<int>(n), {}};
  for (std::int64_t v = 0; v < n; ++v)
    for (std::int64_t u = 0; u < n; ++u) g.edges.push_back(static_cast<std::uint32_t>(u));
  return g;
}

}  // namespace

TEST_CASE("configuration model samples are regular") {
  auto one = sample_regular_bipartite(1, 4, 3);
  CHECK(one.edges == std::vector<std::uint32_t>{0, 0, 0, 0});
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto g = sample_regular_bipartite(32, 5, seed);
    REQUIRE(g.regular());
  }
  CHECK(sample_regular_bipartite(32, 5, 7) == sample_regular_bipartite(32, 5, 7));
}

TEST_CASE("configuration model is uniform over matchings") {
  std::map<std::vector<std::uint32_t>, int> freq;
  const int n = 100000;
  Rng rng = stream_rng(5, 0);
  for (int i = 0; i < n; ++i) ++freq[sample_regular_bipartite(3, 1, rng).edges];
  CHECK(freq.size() == 6);
  double chi2 = 0.0;
  for (auto& [k, c] : freq) chi2 += (c - n / 6.0) * (c - n / 6.0) / (n / 6.0);
  CHECK(chi2 < 15.086);  // 99th percentile, 5 degrees of freedom
}

TEST_CASE("expansion verification") {
  auto k5 = complete(5);
  for (int s = 1; s <= 5; ++s) CHECK(verify_expansion(k5, s, 5).min_neighborhood == 5);
  // each right vertex clones one left vertex
  BipartiteRegularGraph clones{4, 3, {0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3}};
  auto c = verify_expansion(clones, 2, 3);
  CHECK(c.min_neighborhood == 2);
  CHECK_FALSE(c.pass);
  CHECK(c.witness == std::vector<std::uint32_t>{0, 1});
  auto g = sample_regular_bipartite(25, 5, 11);
  auto one = verify_expansion(g, 1, 1);
  std::int64_t direct = 25;
  for (std::uint32_t u = 0; u < 25; ++u) {
    std::set<std::int64_t> nb;
    for (std::int64_t v = 0; v < 25; ++v)
      for (auto x : g.right_neighbors(v))
        if (x == u) nb.insert(v);
    direct = std::min<std::int64_t>(direct, static_cast<std::int64_t>(nb.size()));
  }
  CHECK(one.min_neighborhood == direct);
  CHECK_THROWS_AS(verify_expansion(sample_regular_bipartite(60, 3, 1), 30, 1), size_error);
}

TEST_CASE("verification agrees with an independent enumerator") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    for (std::int64_t n : {6, 9, 12, 14}) {
      for (int d : {1, 2, 3, 5}) {
        auto g = sample_regular_bipartite(n, d, seed * 100 + n * 10 + d);
        for (std::int64_t s = 1; s <= n; ++s) {
          if (binomial_count(n, s) > 1e4) continue;
          auto cert = verify_expansion(g, s, 0, 2);
          REQUIRE(cert.min_neighborhood == reference_min_neighbourhood(g, s));
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("deterministic search") {
  auto g = deterministic_search(4, 2, 1, 2);
  CHECK(g.regular());
  for (std::uint32_t u = 0; u < 4; ++u) {
    std::set<std::int64_t> nb;
    for (std::int64_t v = 0; v < 4; ++v)
      for (auto x : g.right_neighbors(v))
        if (x == u) nb.insert(v);
    CHECK(nb.size() == 2);
  }
  CHECK(deterministic_search(4, 2, 1, 2) == g);
  auto full = deterministic_search(3, 3, 1, 3);
  CHECK(verify_expansion(full, 1, 3).pass);
  CHECK_THROWS_AS(deterministic_search(3, 2, 1, 4), not_found_error);
  CHECK_THROWS_AS(deterministic_search(20, 5, 1, 1), size_error);
}

TEST_CASE("degree condition") {
  // the first term alone: 8 / d^(1/5) <= 1/2 iff d >= 16^5
  CHECK(8.0 * std::pow(1048576.0, -0.2) == doctest::Approx(0.5));
  CHECK(8.0 * std::pow(1048575.0, -0.2) > 0.5);
  CHECK(min_degree_for_noise(0.1) == 1048577);
  CHECK(min_degree_for_noise(0.49) >= min_degree_for_noise(0.1));
  const auto high = min_degree_for_noise(0.499);
  CHECK(high > min_degree_for_noise(0.1));
  CHECK(high % 2 == 1);
  CHECK(degree_condition_lhs(0.499, static_cast<double>(high)) <= 0.5);
  CHECK(degree_condition_lhs(0.499, static_cast<double>(high - 2)) > 0.5);
  for (double dl : {0.0, 0.2, 0.3, 0.45, 0.49, 0.495, 0.499})
    CHECK(min_degree_for_noise(dl) > 1000000);
}

TEST_CASE("expander dag assembly") {
  const int d = 3;
  const std::int64_t n = 40;  // M = exp(40 / (4 * 3^2.4)) ~ 2.06
  auto sched = LayerSchedule::expander(n, d);
  auto dag = assemble_expander_dag(n, d, 50, GraphProvider::sampled(9));
  CHECK(dag.layer_size(1) == n);
  for (int k = 0; k <= 50; ++k) CHECK(dag.layer_size(k) == sched.layer_size(k));
  CHECK(dag.indegree(1) == 1);
  for (std::int64_t j = 0; j < n; ++j) CHECK(dag.parents_of(1, j)[0] == 0);
  std::int64_t max_out = 0;
  for (int k = 1; k < 50; ++k) {
    CHECK(dag.indegree(k + 1) == d);
    for (auto o : dag.outdegrees(k)) max_out = std::max(max_out, o);
  }
  CHECK(max_out <= 2 * d);
  CHECK(dag_from_string(dag_to_string(dag)) == dag);
  // doubling level: both halves share one bipartite graph
  int doubling = 0;
  for (int k = 1; k < 50; ++k) {
    if (dag.layer_size(k + 1) != 2 * dag.layer_size(k)) continue;
    ++doubling;
    const auto w = dag.layer_size(k);
    for (std::int64_t j = 0; j < w; ++j) {
      auto a = dag.parents_of(k + 1, j), b = dag.parents_of(k + 1, j + w);
      CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
  }
  CHECK(doubling >= 1);
  CHECK_THROWS_AS(assemble_expander_dag(8, 3, 5, GraphProvider::sampled(1)), config_error);
  std::map<std::int64_t, BipartiteRegularGraph> only{{n, sample_regular_bipartite(n, d, 1)}};
  CHECK_NOTHROW(assemble_expander_dag(n, d, 2, GraphProvider::injected(only)));
  CHECK_THROWS_AS(assemble_expander_dag(n, d, 50, GraphProvider::injected(only)), missing_graph_error);
}

TEST_CASE("assembly with deterministic graphs on a small schedule") {
  auto sched = LayerSchedule::explicit_widths({4, 4, 8});
  auto dag = assemble_expander_dag(sched, 2, 3, GraphProvider::deterministic(0.5));
  CHECK(dag.layer_size(3) == 8);
  CHECK(dag.indegree(2) == 2);
  CHECK_THROWS_AS(assemble_expander_dag(LayerSchedule::explicit_widths({4, 5}), 2, 2, GraphProvider::sampled(1)),
                  config_error);
}

TEST_CASE("success probability bound") {
  const int d = 3;
  const double zero = success_bound_zero(d);
  const auto at = success_probability_bound(static_cast<std::int64_t>(std::ceil(zero)), d, 0);
  CHECK(at.value >= 0.0);
  CHECK(at.assumption_holds);
  const double a3 = std::pow(3.0, -1.2);
  CHECK(std::abs(1 - std::exp(1.0) / ((2 - std::sqrt(2.0)) * M_PI * std::sqrt(a3 * (1 - a3) * zero))) < 1e-12);
  const auto below = success_probability_bound(static_cast<std::int64_t>(std::floor(zero)), d, 0);
  CHECK(below.value <= 0.0);
  CHECK_FALSE(below.assumption_holds);
  CHECK(success_probability_bound(1000, d, 0).value == success_probability_bound(1000, d, 7).value);
  CHECK(success_probability_bound(1000000000000, d, 0).value > 0.999);
  // closed form evaluated independently at N = 1000
  const double a = std::pow(3.0, -1.2);
  const double expect = 1 - std::exp(1.0) / ((2 - std::sqrt(2.0)) * M_PI * std::sqrt(a * (1 - a) * 1000));
  CHECK(success_probability_bound(1000, d, 2).value == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("one-step minority shrinkage on a certified graph") {
  auto g = deterministic_search(4, 3, 1, 3);
  auto cert = verify_expansion(g, 1, 3);
  REQUIRE(cert.pass);
  auto big = sample_regular_bipartite(64, 3, 2);
  auto r = one_step_minority_mc(big, 8, NoiseLevel(0.02), 5000, 3);
  CHECK(r.mean_right_fraction < r.left_fraction);
  auto small = one_step_minority_mc(g, 1, NoiseLevel(0.02), 5000, 3);
  CHECK(small.mean_right_fraction < small.left_fraction);
}

TEST_CASE("graph text round trip") {
  auto g = sample_regular_bipartite(12, 4, 3);
  auto text = graph_to_string(g);
  CHECK(graph_from_string(text) == g);
  CHECK(graph_to_string(graph_from_string(text)) == text);
  CHECK(graph_to_string(BipartiteRegularGraph{2, 1, {1, 0}}) == "2 1\n1\n0\n");
  CHECK_THROWS_AS(graph_from_string("2 1\n1\n"), input_error);
  CHECK_THROWS_AS(graph_from_string("2 1\n1 0\n0\n"), input_error);
  CHECK_THROWS_AS(graph_from_string("2 1\n5\n0\n"), input_error);
}
