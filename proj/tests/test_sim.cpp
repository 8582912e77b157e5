#include "doctest.h"

#include <cmath>
#include <map>

#include "bcast/chain.hpp"
#include "bcast/gfun.hpp"
#include "bcast/sim.hpp"

using namespace bcast;

namespace {

// Enumerates every edge-noise pattern of the whole DAG; ties are split into two weighted branches.
void brute_laws(const LayeredDag& dag, double dl, const RulePlan& rules, int k, int root,
                std::vector<double>& law) {
  struct Frame {
    std::vector<std::vector<std::uint8_t>> layers;
    double weight;
  };
  std::vector<Frame> frames{{{{static_cast<std::uint8_t>(root)}}, 1.0}};
  for (int level = 1; level <= k; ++level) {
    const int deg = dag.indegree(level);
    for (std::int64_t j = 0; j < dag.layer_size(level); ++j) {
      std::vector<Frame> next;
      for (auto& f : frames) {
        for (unsigned noise = 0; noise < (1u << deg); ++noise) {
          std::vector<std::uint8_t> in;
          double w = f.weight;
          auto par = dag.parents_of(level, j);
          for (int i = 0; i < deg; ++i) {
            bool flip = (noise >> i) & 1;
            w *= flip ? dl : 1 - dl;
            in.push_back(f.layers[level - 1][par[i]] ^ flip);
          }
          double q = rules.at(level).output_probability(in);
          for (int out = 0; out <= 1; ++out) {
            double wo = w * (out ? q : 1 - q);
            if (wo == 0) continue;
            Frame g = f;
            if (static_cast<int>(g.layers.size()) <= level) g.layers.emplace_back();
            g.layers[level].push_back(static_cast<std::uint8_t>(out));
            g.weight = wo;
            next.push_back(std::move(g));
          }
        }
      }
      frames = std::move(next);
    }
  }
  law.assign(std::size_t{1} << dag.layer_size(k), 0.0);
  for (auto& f : frames) {
    std::size_t x = 0;
    for (std::size_t j = 0; j < f.layers[k].size(); ++j) x |= std::size_t{f.layers[k][j]} << j;
    law[x] += f.weight;
  }
}

}  // namespace

TEST_CASE("random dag sampling") {
  auto dag = sample_random_dag(LayerSchedule::constant(5), 3, 1, 1);
  for (int j = 0; j < 5; ++j)
    for (auto p : dag.parents_of(1, j)) CHECK(p == 0);
  auto a = sample_random_dag(LayerSchedule::constant(7), 3, 6, 99);
  auto b = sample_random_dag(LayerSchedule::constant(7), 3, 6, 99);
  CHECK(a == b);
  auto c = sample_random_dag(LayerSchedule::constant(7), 3, 6, 100);
  CHECK_FALSE(a == c);
}

TEST_CASE("parent indices are uniform") {
  const int width = 10;
  auto big = sample_random_dag(LayerSchedule::constant(width * 2000), 5, 2, 2024);
  // level 2 of `big` draws 10^4 * 5 indices from 2 * 10^4 vertices; fold to 10 bins
  std::vector<double> counts(width, 0.0);
  const auto& par = big.level_parents(2);
  for (auto p : par) counts[p % width] += 1;
  const double expected = static_cast<double>(par.size()) / width;
  double chi2 = 0.0;
  for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(par.size() >= 100000);
  CHECK(chi2 < 21.666);  // 99th percentile of chi-square with 9 degrees of freedom
}

TEST_CASE("broadcast basics") {
  auto dag = sample_random_dag(LayerSchedule::constant(9), 3, 8, 5);
  auto rules = RulePlan::uniform(ProcessingRule::majority(3));
  auto states = run_broadcast(dag, NoiseLevel(1e-15), rules, 1, 7);
  for (auto& s : states)
    for (auto b : s.bits) CHECK(b == 1);
  CHECK(run_broadcast(dag, NoiseLevel(0.2), rules, 1, 7)[8].bits == run_broadcast(dag, NoiseLevel(0.2), rules, 1, 7)[8].bits);
  CHECK_THROWS_AS(run_broadcast(dag, NoiseLevel(0.2), RulePlan::uniform(ProcessingRule::majority(5)), 1, 7),
                  input_error);
}

TEST_CASE("identity gate transmits through one BSC") {
  auto dag = sample_random_dag(LayerSchedule::constant(1), 1, 1, 3);
  auto rules = RulePlan::uniform(ProcessingRule::identity(1));
  const double dl = 0.23;
  const int n = 100000;
  Rng rng = stream_rng(77, 0);
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += run_broadcast(dag, NoiseLevel(dl), rules, 1, rng)[1].bits[0];
  const double se = std::sqrt(dl * (1 - dl) / n);
  CHECK(std::abs(ones / double(n) - (1 - dl)) < 3 * se);
}

TEST_CASE("coupled runs are monotone") {
  for (double dl : {0.1, 0.3}) {
    McConfig c;
    c.schedule = LayerSchedule::constant(12);
    c.d = 3;
    c.rules = RulePlan::uniform(ProcessingRule::majority(3));
    c.delta = NoiseLevel(dl);
    c.depth = 10;
    c.trials = 10000;
    c.seed = 8;
    auto stats = coupled_statistics(c);
    CHECK(stats.violations == 0);
    CHECK(stats.disagreement[0] == 1.0);
    CHECK(stats.mean_sigma_gap[0] == 1.0);
  }
  McConfig ao;
  ao.schedule = LayerSchedule::constant(12);
  ao.d = 2;
  ao.rules = RulePlan::alternating(ProcessingRule::and_gate(2), ProcessingRule::or_gate(2));
  ao.delta = NoiseLevel(0.1);
  ao.depth = 10;
  ao.trials = 10000;
  CHECK(coupled_statistics(ao).violations == 0);
  // even-arity majority exercises shared tie bits
  McConfig even = ao;
  even.d = 4;
  even.rules = RulePlan::uniform(ProcessingRule::majority(4));
  CHECK(coupled_statistics(even).violations == 0);
}

TEST_CASE("coupling marginals match independent broadcasts") {
  auto dag = sample_random_dag(LayerSchedule::constant(1), 1, 1, 3);
  auto rules = RulePlan::uniform(ProcessingRule::identity(1));
  const double dl = 0.2;
  int plus_ones = 0, minus_ones = 0;
  Rng rng = stream_rng(12, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto run = run_coupled(dag, NoiseLevel(dl), rules, rng);
    plus_ones += run.plus[1].bits[0];
    minus_ones += run.minus[1].bits[0];
  }
  const double se = std::sqrt(dl * (1 - dl) / n);
  CHECK(std::abs(plus_ones / double(n) - (1 - dl)) < 3 * se);
  CHECK(std::abs(minus_ones / double(n) - dl) < 3 * se);
}

TEST_CASE("supercritical disagreement decreases with depth") {
  McConfig c;
  c.schedule = LayerSchedule::constant(8);
  c.d = 3;
  c.rules = RulePlan::uniform(ProcessingRule::majority(3));
  c.delta = NoiseLevel(0.3);
  c.depth = 20;
  c.trials = 4000;
  auto stats = coupled_statistics(c);
  CHECK(stats.disagreement[20] < stats.disagreement[5]);
  CHECK(stats.disagreement[20] < 0.2);
}

TEST_CASE("monte carlo error matches the exact chain") {
  McConfig c;
  c.schedule = LayerSchedule::constant(16);
  c.d = 3;
  c.rules = RulePlan::uniform(ProcessingRule::majority(3));
  c.delta = NoiseLevel(0.2);
  c.depth = 6;
  c.trials = 20000;
  c.seed = 4;
  c.threads = 2;
  auto est = mc_error_estimate(c);
  auto fam = ChainFamily::majority(3, LayerSchedule::constant(16), NoiseLevel(0.2));
  const double exact = decoder_error(evolve_pair(fam, 6), 0.5);
  CHECK(std::abs(est.estimate - exact) <= est.half_width);
  c.threads = 1;
  auto again = mc_error_estimate(c);
  CHECK(again.errors == est.errors);

  McConfig quiet = c;
  quiet.delta = NoiseLevel(1e-12);
  quiet.trials = 2000;
  CHECK(mc_error_estimate(quiet).estimate == 0.0);

  McConfig bad = c;
  bad.trials = 0;
  CHECK_THROWS_AS(mc_error_estimate(bad), input_error);
}

TEST_CASE("single-vertex decoder error equals half of one minus the mean gap") {
  McConfig c;
  c.schedule = LayerSchedule::constant(10);
  c.d = 3;
  c.rules = RulePlan::uniform(ProcessingRule::majority(3));
  c.delta = NoiseLevel(0.12);
  c.depth = 8;
  c.trials = 40000;
  c.seed = 21;
  c.decoder = Decoder::single_vertex();
  auto est = mc_error_estimate(c);
  c.seed = 22;
  auto stats = coupled_statistics(c);
  const double via_gap = 0.5 * (1 - stats.mean_sigma_gap[8]);
  const double via_vertex = 0.5 * (1 - stats.mean_vertex_gap[8]);
  // two independent estimates; the gap estimate has range 2
  CHECK(std::abs(est.estimate - via_gap) <= est.half_width + stats.half_width);
  CHECK(std::abs(est.estimate - via_vertex) <= est.half_width + 2 * stats.half_width);
}

TEST_CASE("fixed dag model") {
  auto dag = sample_random_dag(LayerSchedule::constant(3), 3, 4, 9);
  McConfig c;
  c.model = DagModel::FixedDag;
  c.dag = dag;
  c.rules = RulePlan::uniform(ProcessingRule::majority(3));
  c.delta = NoiseLevel(0.15);
  c.depth = 4;
  c.trials = 40000;
  c.seed = 2;
  auto est = mc_error_estimate(c);
  auto laws = exact_layer_inference(dag, NoiseLevel(0.15), c.rules, 4);
  const double exact = decoder_error(laws.sigma_marginals(), 0.5);
  CHECK(std::abs(est.estimate - exact) <= est.half_width);
  McConfig missing = c;
  missing.dag.reset();
  CHECK_THROWS_AS(mc_error_estimate(missing), input_error);
}

TEST_CASE("exact inference on a single identity vertex") {
  LayeredDag dag({1, 1}, {1}, {{0}});
  auto laws = exact_layer_inference(dag, NoiseLevel(0.2), RulePlan::uniform(ProcessingRule::identity(1)), 1);
  CHECK(laws.plus[0] == doctest::Approx(0.2));
  CHECK(laws.plus[1] == doctest::Approx(0.8));
  CHECK(laws.tv() == doctest::Approx(0.6));
}

TEST_CASE("exact inference matches exhaustive enumeration") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto dag = sample_random_dag(LayerSchedule::explicit_widths({2, 3, 2}), 2, 3, seed);
    auto rules = RulePlan::uniform(ProcessingRule::majority(2));
    auto laws = exact_layer_inference(dag, NoiseLevel(0.17), rules, 3);
    std::vector<double> plus, minus;
    brute_laws(dag, 0.17, rules, 3, 1, plus);
    brute_laws(dag, 0.17, rules, 3, 0, minus);
    for (std::size_t x = 0; x < plus.size(); ++x) {
      CHECK(laws.plus[x] == doctest::Approx(plus[x]).epsilon(1e-12));
      CHECK(laws.minus[x] == doctest::Approx(minus[x]).epsilon(1e-12));
    }
  }
  auto dag = sample_random_dag(LayerSchedule::explicit_widths({2, 2}), 2, 2, 5);
  auto plan = RulePlan::alternating(ProcessingRule::and_gate(2), ProcessingRule::or_gate(2));
  auto laws = exact_layer_inference(dag, NoiseLevel(0.1), plan, 2);
  std::vector<double> plus;
  brute_laws(dag, 0.1, plan, 2, 1, plus);
  for (std::size_t x = 0; x < plus.size(); ++x) CHECK(laws.plus[x] == doctest::Approx(plus[x]).epsilon(1e-12));
}

TEST_CASE("exact inference on tiny dags") {
  auto rules = RulePlan::uniform(ProcessingRule::majority(3));
  Rng rng = stream_rng(31, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> widths;
    for (int k = 0; k < 4; ++k) widths.push_back(1 + static_cast<std::int64_t>(rng() % 4));
    auto dag = sample_random_dag(LayerSchedule::explicit_widths(widths), 3, 4, rng);
    double prev = 1.0;
    for (int k = 0; k <= 4; ++k) {
      auto laws = exact_layer_inference(dag, NoiseLevel(0.3), rules, k);
      const double tv = laws.tv();
      CHECK(tv <= 1.0 + 1e-12);
      CHECK(tv <= prev + 1e-12);
      CHECK(tv + 1e-12 >= tv_distance(laws.sigma_marginals()));
      prev = tv;
    }
  }
}

TEST_CASE("exact inference guard") {
  auto dag = sample_random_dag(LayerSchedule::constant(17), 3, 2, 1);
  CHECK_THROWS_AS(exact_layer_inference(dag, NoiseLevel(0.1), RulePlan::uniform(ProcessingRule::majority(3)), 2),
                  size_error);
  auto wide = sample_random_dag(LayerSchedule::constant(16), 3, 3, 1);
  CHECK_THROWS_AS(exact_layer_inference(wide, NoiseLevel(0.1), RulePlan::uniform(ProcessingRule::majority(3)), 3),
                  size_error);
}

TEST_CASE("averaging exact sigma laws over dags recovers the chain") {
  const double dl = 0.2;
  const int trials = 1000;
  auto sched = LayerSchedule::constant(3);
  auto rules = RulePlan::uniform(ProcessingRule::majority(3));
  std::vector<double> avg(4, 0.0);
  Rng rng = stream_rng(5, 0);
  for (int i = 0; i < trials; ++i) {
    auto dag = sample_random_dag(sched, 3, 3, rng);
    auto m = exact_layer_inference(dag, NoiseLevel(dl), rules, 3).sigma_marginals();
    for (int j = 0; j <= 3; ++j) avg[j] += m.plus.probs[j] / trials;
  }
  auto exact = evolve_pair(ChainFamily::majority(3, sched, NoiseLevel(dl)), 3);
  for (int j = 0; j <= 3; ++j) CHECK(std::abs(avg[j] - exact.plus.probs[j]) <= hoeffding_half_width(trials));
}

TEST_CASE("site percolation") {
  const double dl = 0.2;
  auto r = percolation_site_sim(LayerSchedule::constant(20), 3, NoiseLevel(dl), 30, 20000, 3, 2);
  CHECK(r.mean_lambda[0] == 1.0);
  CHECK(std::abs(r.mean_lambda[1] - 0.36) <= r.half_width);
  for (int k = 1; k <= 30; ++k) {
    CHECK(std::abs(r.mean_lambda[k] - r.mean_recursion[k]) <= r.difference_half_width);
    CHECK(r.hit_frequency[k] <= 20 * std::pow(0.36 * 3, k) + 3 * r.half_width);
  }
  auto again = percolation_site_sim(LayerSchedule::constant(20), 3, NoiseLevel(dl), 30, 20000, 3, 1);
  CHECK(again.mean_recursion == r.mean_recursion);
  CHECK(again.mean_lambda == r.mean_lambda);
}

TEST_CASE("critical site percolation stays under the 2/((d-1)k) envelope") {
  const int d = 4;
  const double dl = 0.5 - 0.5 / std::sqrt(static_cast<double>(d));
  auto r = percolation_site_sim(LayerSchedule::constant(200), d, NoiseLevel(dl), 100, 2000, 17, 2);
  for (int k = 1; k <= 100; ++k) CHECK(r.mean_lambda[k] <= 2.0 / ((d - 1) * k) + r.half_width);
}

TEST_CASE("tree event frequency") {
  auto sched = LayerSchedule::constant(400);
  auto est = tree_event_mc(sched, 2, 10, 3, 20000, 1, 2);
  double exact = 1.0;
  for (int r = 1; r <= 3; ++r)
    for (int s = 1; s < (1 << r); ++s) exact *= 1.0 - s / 400.0;
  CHECK(std::abs(est.estimate - exact) <= est.half_width);
}

TEST_CASE("dag text round trip") {
  auto dag = sample_random_dag(LayerSchedule::linear(2, 3), 3, 6, 44);
  auto text = dag_to_string(dag);
  auto back = dag_from_string(text);
  CHECK(back == dag);
  CHECK(dag_to_string(back) == text);
  LayeredDag mixed({1, 2, 3}, {1, 2}, {{0, 0}, {0, 1, 1, 1, 0, 0}});
  CHECK(dag_from_string(dag_to_string(mixed)) == mixed);
  CHECK(dag_to_string(mixed) == "2 2\n0 0\n0,1 1,1 0,0\n");
  CHECK_THROWS_AS(dag_from_string("2 2\n0 0\n"), input_error);
  CHECK_THROWS_AS(dag_from_string("1 2\n0,0 0\n"), input_error);
  CHECK_THROWS_AS(dag_from_string("1 1\n1\n"), input_error);
  CHECK_THROWS_AS(dag_from_string("1 1\nx\n"), input_error);
}
