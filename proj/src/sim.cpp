#include "bcast/sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "bcast/parallel.hpp"

namespace bcast {

namespace {

std::uint32_t uniform_index(Rng& rng, std::int64_t n) {
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
  return pick(rng);
}

void check_rules(const LayeredDag& dag, const RulePlan& rules) {
  for (int k = 1; k <= dag.depth(); ++k) {
    if (rules.at(k).arity() != dag.indegree(k)) {
      std::ostringstream msg;
      msg << "rule " << rules.at(k).name() << " at level " << k << " does not match indegree "
          << dag.indegree(k);
      throw input_error(msg.str());
    }
  }
}

std::int64_t count_ones(const std::vector<std::uint8_t>& bits) {
  std::int64_t n = 0;
  for (auto b : bits) n += b;
  return n;
}

}  // namespace

LayeredDag sample_random_dag(const LayerSchedule& schedule, int d, int depth, Rng& rng) {
  if (depth < 1) throw input_error("depth must be at least 1");
  if (d < 1) throw input_error("indegree must be at least 1");
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(depth) + 1);
  for (int k = 0; k <= depth; ++k) sizes[static_cast<std::size_t>(k)] = schedule.layer_size(k);
  std::vector<int> indeg(static_cast<std::size_t>(depth), d);
  std::vector<std::vector<std::uint32_t>> parents(static_cast<std::size_t>(depth));
  for (int k = 1; k <= depth; ++k) {
    const std::int64_t prev = sizes[static_cast<std::size_t>(k - 1)];
    auto& p = parents[static_cast<std::size_t>(k - 1)];
    p.resize(static_cast<std::size_t>(sizes[static_cast<std::size_t>(k)] * d));
    for (auto& x : p) x = uniform_index(rng, prev);
  }
  return LayeredDag(std::move(sizes), std::move(indeg), std::move(parents));
}

LayeredDag sample_random_dag(const LayerSchedule& schedule, int d, int depth, std::uint64_t seed) {
  Rng rng = stream_rng(seed, 0);
  return sample_random_dag(schedule, d, depth, rng);
}

std::vector<LayerState> run_broadcast(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules,
                                      int root_bit, Rng& rng) {
  if (root_bit != 0 && root_bit != 1) throw input_error("root bit must be 0 or 1");
  check_rules(dag, rules);
  std::vector<LayerState> states;
  states.reserve(static_cast<std::size_t>(dag.depth()) + 1);
  states.push_back({0, {static_cast<std::uint8_t>(root_bit)}});
  std::vector<std::uint8_t> inputs;
  for (int k = 1; k <= dag.depth(); ++k) {
    const auto& rule = rules.at(k);
    const auto& prev = states.back().bits;
    const auto& par = dag.level_parents(k);
    const auto deg = static_cast<std::size_t>(dag.indegree(k));
    inputs.resize(deg);
    LayerState next{k, std::vector<std::uint8_t>(static_cast<std::size_t>(dag.layer_size(k)))};
    for (std::size_t j = 0; j < next.bits.size(); ++j) {
      for (std::size_t i = 0; i < deg; ++i)
        inputs[i] = prev[par[j * deg + i]] ^ static_cast<std::uint8_t>(bernoulli(rng, delta.value()));
      next.bits[j] = apply_rule(rule, inputs, rng) ? 1 : 0;
    }
    states.push_back(std::move(next));
  }
  return states;
}

std::vector<LayerState> run_broadcast(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules,
                                      int root_bit, std::uint64_t seed) {
  Rng rng = stream_rng(seed, 0);
  return run_broadcast(dag, delta, rules, root_bit, rng);
}

CoupledRun run_coupled(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules, Rng& rng) {
  check_rules(dag, rules);
  CoupledRun run;
  run.plus.push_back({0, {1}});
  run.minus.push_back({0, {0}});
  const double fresh = 2.0 * delta.value();
  std::vector<std::uint8_t> in_plus, in_minus;
  for (int k = 1; k <= dag.depth(); ++k) {
    const auto& rule = rules.at(k);
    const auto& prev_plus = run.plus.back().bits;
    const auto& prev_minus = run.minus.back().bits;
    const auto& par = dag.level_parents(k);
    const auto deg = static_cast<std::size_t>(dag.indegree(k));
    in_plus.resize(deg);
    in_minus.resize(deg);
    const auto width = static_cast<std::size_t>(dag.layer_size(k));
    LayerState next_plus{k, std::vector<std::uint8_t>(width)};
    LayerState next_minus{k, std::vector<std::uint8_t>(width)};
    for (std::size_t j = 0; j < width; ++j) {
      for (std::size_t i = 0; i < deg; ++i) {
        const auto p = par[j * deg + i];
        if (uniform01(rng) < fresh) {
          const std::uint8_t z = fair_bit(rng) ? 1 : 0;
          in_plus[i] = z;
          in_minus[i] = z;
        } else {
          in_plus[i] = prev_plus[p];
          in_minus[i] = prev_minus[p];
        }
      }
      const double qp = rule.output_probability(in_plus);
      const double qm = rule.output_probability(in_minus);
      bool tie = false;
      if (qp == 0.5 || qm == 0.5) tie = fair_bit(rng);
      const std::uint8_t xp = qp == 0.5 ? tie : (qp == 1.0);
      const std::uint8_t xm = qm == 0.5 ? tie : (qm == 1.0);
      next_plus.bits[j] = xp;
      next_minus.bits[j] = xm;
      if (xp < xm) ++run.violations;
    }
    run.plus.push_back(std::move(next_plus));
    run.minus.push_back(std::move(next_minus));
  }
  return run;
}

CoupledRun run_coupled(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules, std::uint64_t seed) {
  Rng rng = stream_rng(seed, 0);
  return run_coupled(dag, delta, rules, rng);
}

bool Decoder::decide(const LayerState& state) const {
  const auto ones = static_cast<double>(count_ones(state.bits));
  const auto width = static_cast<double>(state.bits.size());
  switch (kind) {
    case DecoderKind::Majority:
      return 2.0 * ones >= width;
    case DecoderKind::Biased:
      return ones >= threshold * width - 1e-12;
    case DecoderKind::SingleVertex:
      return state.bits.at(0) != 0;
  }
  return false;
}

std::string Decoder::name() const {
  switch (kind) {
    case DecoderKind::Majority:
      return "majority";
    case DecoderKind::Biased: {
      std::ostringstream out;
      out.precision(12);
      out << "biased:" << threshold;
      return out.str();
    }
    case DecoderKind::SingleVertex:
      return "single-vertex";
  }
  return "";
}

double hoeffding_half_width(std::int64_t n, double alpha, double range) {
  if (n < 1) throw input_error("need at least one trial");
  return range * std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

namespace {

void check_config(const McConfig& c) {
  if (c.trials < 1) throw input_error("trials must be at least 1");
  if (c.depth < 1) throw input_error("depth must be at least 1");
  if (c.model == DagModel::FixedDag) {
    if (!c.dag) throw input_error("fixed-dag model needs a DAG");
    if (c.dag->depth() < c.depth) throw input_error("DAG is shallower than the requested depth");
  }
  if (c.decoder.kind == DecoderKind::Biased && !(c.decoder.threshold > 0.0 && c.decoder.threshold < 1.0))
    throw input_error("decoder threshold must lie in (0, 1)");
}

LayeredDag truncated(const LayeredDag& dag, int depth) {
  if (dag.depth() == depth) return dag;
  std::vector<std::int64_t> sizes(dag.layer_sizes().begin(), dag.layer_sizes().begin() + depth + 1);
  std::vector<int> indeg;
  std::vector<std::vector<std::uint32_t>> parents;
  for (int k = 1; k <= depth; ++k) {
    indeg.push_back(dag.indegree(k));
    parents.push_back(dag.level_parents(k));
  }
  return LayeredDag(std::move(sizes), std::move(indeg), std::move(parents));
}

}  // namespace

McEstimate mc_error_estimate(const McConfig& config) {
  check_config(config);
  std::optional<LayeredDag> fixed;
  if (config.model == DagModel::FixedDag) {
    fixed = truncated(*config.dag, config.depth);
    check_rules(*fixed, config.rules);
  }
  auto body = [&](std::int64_t& errors, std::int64_t trial) {
    Rng rng = stream_rng(config.seed, static_cast<std::uint64_t>(trial));
    const int root = fair_bit(rng) ? 1 : 0;
    std::vector<LayerState> states;
    if (fixed) {
      states = run_broadcast(*fixed, config.delta, config.rules, root, rng);
    } else {
      LayeredDag dag = sample_random_dag(config.schedule, config.d, config.depth, rng);
      states = run_broadcast(dag, config.delta, config.rules, root, rng);
    }
    if (static_cast<int>(config.decoder.decide(states.back())) != root) ++errors;
  };
  const std::int64_t errors = parallel_accumulate<std::int64_t>(
      config.trials, config.threads, 0, body, [](std::int64_t& a, std::int64_t b) { a += b; });
  McEstimate est;
  est.errors = errors;
  est.trials = config.trials;
  est.estimate = static_cast<double>(errors) / static_cast<double>(config.trials);
  est.half_width = hoeffding_half_width(config.trials);
  return est;
}

CoupledStats coupled_statistics(const McConfig& config) {
  check_config(config);
  std::optional<LayeredDag> fixed;
  if (config.dag) {
    fixed = truncated(*config.dag, config.depth);
    check_rules(*fixed, config.rules);
  }
  const auto levels = static_cast<std::size_t>(config.depth) + 1;
  struct Acc {
    std::int64_t violations = 0;
    std::vector<double> sigma_gap;
    std::vector<std::int64_t> disagree;
    std::vector<std::int64_t> vertex_gap;
  };
  Acc zero{0, std::vector<double>(levels, 0.0), std::vector<std::int64_t>(levels, 0),
           std::vector<std::int64_t>(levels, 0)};
  auto body = [&](Acc& acc, std::int64_t trial) {
    Rng rng = stream_rng(config.seed, static_cast<std::uint64_t>(trial));
    CoupledRun run;
    if (fixed) {
      run = run_coupled(*fixed, config.delta, config.rules, rng);
    } else {
      LayeredDag dag = sample_random_dag(config.schedule, config.d, config.depth, rng);
      run = run_coupled(dag, config.delta, config.rules, rng);
    }
    acc.violations += run.violations;
    for (std::size_t k = 0; k < levels; ++k) {
      const auto& p = run.plus[k].bits;
      const auto& m = run.minus[k].bits;
      acc.sigma_gap[k] += static_cast<double>(count_ones(p) - count_ones(m)) / static_cast<double>(p.size());
      acc.disagree[k] += p != m;
      acc.vertex_gap[k] += static_cast<int>(p[0]) - static_cast<int>(m[0]);
    }
  };
  auto merge = [](Acc& a, const Acc& b) {
    a.violations += b.violations;
    for (std::size_t k = 0; k < a.sigma_gap.size(); ++k) {
      a.sigma_gap[k] += b.sigma_gap[k];
      a.disagree[k] += b.disagree[k];
      a.vertex_gap[k] += b.vertex_gap[k];
    }
  };
  Acc total = parallel_accumulate<Acc>(config.trials, config.threads, zero, body, merge);
  CoupledStats stats;
  stats.trials = config.trials;
  stats.violations = total.violations;
  const auto n = static_cast<double>(config.trials);
  for (std::size_t k = 0; k < levels; ++k) {
    stats.mean_sigma_gap.push_back(total.sigma_gap[k] / n);
    stats.disagreement.push_back(static_cast<double>(total.disagree[k]) / n);
    stats.mean_vertex_gap.push_back(static_cast<double>(total.vertex_gap[k]) / n);
  }
  stats.half_width = hoeffding_half_width(config.trials);
  return stats;
}

double ExactLaws::tv() const {
  double s = 0.0;
  for (std::size_t x = 0; x < plus.size(); ++x) s += std::abs(plus[x] - minus[x]);
  return 0.5 * s;
}

SigmaPair ExactLaws::sigma_marginals() const {
  SigmaPair pair{{level, width, std::vector<double>(static_cast<std::size_t>(width) + 1, 0.0)},
                 {level, width, std::vector<double>(static_cast<std::size_t>(width) + 1, 0.0)}};
  for (std::size_t x = 0; x < plus.size(); ++x) {
    const auto ones = static_cast<std::size_t>(__builtin_popcountll(x));
    pair.plus.probs[ones] += plus[x];
    pair.minus.probs[ones] += minus[x];
  }
  return pair;
}

ExactLaws exact_layer_inference(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules, int k) {
  if (k < 0 || k > dag.depth()) throw input_error("level out of range");
  double work = 0.0;
  for (int j = 1; j <= k; ++j) {
    const auto width = dag.layer_size(j);
    if (width > 16) {
      std::ostringstream msg;
      msg << "exact inference refuses level " << j << " of width " << width << " (limit 16)";
      throw size_error(msg.str());
    }
    const int deg = dag.indegree(j);
    if (deg > 20) throw size_error("exact inference refuses indegree above 20");
    work += std::ldexp(1.0, static_cast<int>(dag.layer_size(j - 1))) *
            (std::ldexp(1.0, static_cast<int>(width)) + static_cast<double>(width) * std::ldexp(1.0, deg) * deg);
  }
  if (work > 1e8) {
    std::ostringstream msg;
    msg << "exact inference needs about " << work << " steps (limit 1e8)";
    throw size_error(msg.str());
  }
  for (int j = 1; j <= k; ++j)
    if (rules.at(j).arity() != dag.indegree(j)) throw input_error("rule arity does not match indegree");

  const double dl = delta.value();
  std::vector<double> plus{0.0, 1.0}, minus{1.0, 0.0};
  std::vector<std::uint8_t> inputs;
  for (int level = 1; level <= k; ++level) {
    const auto& rule = rules.at(level);
    const int deg = dag.indegree(level);
    const auto width = static_cast<std::size_t>(dag.layer_size(level));
    const auto& par = dag.level_parents(level);
    inputs.resize(static_cast<std::size_t>(deg));
    std::vector<double> next_plus(std::size_t{1} << width, 0.0), next_minus(std::size_t{1} << width, 0.0);
    std::vector<double> q(width);
    std::vector<double> prod;
    for (std::size_t x = 0; x < plus.size(); ++x) {
      const double wp = plus[x], wm = minus[x];
      if (wp == 0.0 && wm == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) {
        double s = 0.0;
        for (unsigned noise = 0; noise < (1u << deg); ++noise) {
          int flips = 0;
          for (int i = 0; i < deg; ++i) {
            const bool parent_bit = (x >> par[j * static_cast<std::size_t>(deg) + static_cast<std::size_t>(i)]) & 1u;
            const bool flip = (noise >> i) & 1u;
            flips += flip;
            inputs[static_cast<std::size_t>(i)] = parent_bit != flip;
          }
          s += std::pow(dl, flips) * std::pow(1.0 - dl, deg - flips) * rule.output_probability(inputs);
        }
        q[j] = s;
      }
      prod.assign(1, 1.0);
      for (std::size_t j = 0; j < width; ++j) {
        const std::size_t half = prod.size();
        prod.resize(2 * half);
        for (std::size_t y = 0; y < half; ++y) {
          prod[half + y] = prod[y] * q[j];
          prod[y] *= 1.0 - q[j];
        }
      }
      for (std::size_t y = 0; y < prod.size(); ++y) {
        next_plus[y] += wp * prod[y];
        next_minus[y] += wm * prod[y];
      }
    }
    plus = std::move(next_plus);
    minus = std::move(next_minus);
  }
  ExactLaws laws;
  laws.level = k;
  laws.width = static_cast<int>(dag.layer_size(k));
  laws.plus = std::move(plus);
  laws.minus = std::move(minus);
  return laws;
}

PercolationResult percolation_site_sim(const LayerSchedule& schedule, int d, NoiseLevel delta, int depth,
                                       std::int64_t trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw input_error("trials must be at least 1");
  if (depth < 0) throw input_error("depth must be non-negative");
  if (d < 1) throw input_error("indegree must be at least 1");
  const auto levels = static_cast<std::size_t>(depth) + 1;
  std::vector<std::int64_t> widths(levels);
  for (std::size_t k = 0; k < levels; ++k) widths[k] = schedule.layer_size(static_cast<std::int64_t>(k));
  const double keep = (1.0 - 2.0 * delta.value()) * (1.0 - 2.0 * delta.value());
  struct Acc {
    std::vector<std::int64_t> open;
    std::vector<double> recursion;
    std::vector<std::int64_t> hits;
  };
  Acc zero{std::vector<std::int64_t>(levels, 0), std::vector<double>(levels, 0.0),
           std::vector<std::int64_t>(levels, 0)};
  auto body = [&](Acc& acc, std::int64_t trial) {
    Rng rng = stream_rng(seed, static_cast<std::uint64_t>(trial));
    std::vector<std::uint8_t> prev{1}, next;
    acc.open[0] += 1;
    acc.hits[0] += 1;
    acc.recursion[0] += 1.0;
    for (std::size_t k = 1; k < levels; ++k) {
      const double lambda_prev = static_cast<double>(count_ones(prev)) / static_cast<double>(prev.size());
      acc.recursion[k] += keep * (1.0 - std::pow(1.0 - lambda_prev, d));
      next.assign(static_cast<std::size_t>(widths[k]), 0);
      for (auto& v : next) {
        const bool open = bernoulli(rng, keep);
        bool reached = false;
        for (int i = 0; i < d; ++i) reached = prev[uniform_index(rng, static_cast<std::int64_t>(prev.size()))] || reached;
        v = open && reached;
      }
      const auto ones = count_ones(next);
      acc.open[k] += ones;
      acc.hits[k] += ones > 0;
      prev.swap(next);
    }
  };
  auto merge = [](Acc& a, const Acc& b) {
    for (std::size_t k = 0; k < a.open.size(); ++k) {
      a.open[k] += b.open[k];
      a.recursion[k] += b.recursion[k];
      a.hits[k] += b.hits[k];
    }
  };
  Acc total = parallel_accumulate<Acc>(trials, threads, zero, body, merge);
  PercolationResult r;
  r.trials = trials;
  const auto n = static_cast<double>(trials);
  for (std::size_t k = 0; k < levels; ++k) {
    r.mean_lambda.push_back(static_cast<double>(total.open[k]) / (n * static_cast<double>(widths[k])));
    r.mean_recursion.push_back(total.recursion[k] / n);
    r.hit_frequency.push_back(static_cast<double>(total.hits[k]) / n);
  }
  r.half_width = hoeffding_half_width(trials);
  r.difference_half_width = hoeffding_half_width(trials, 0.01, 2.0);
  return r;
}

TreeEventEstimate tree_event_mc(const LayerSchedule& schedule, int d, int k, int m, std::int64_t trials,
                                std::uint64_t seed, int threads) {
  if (trials < 1) throw input_error("trials must be at least 1");
  if (d < 1 || m < 1 || k < m) throw input_error("tree event needs d >= 1 and 1 <= m <= k");
  double count = std::pow(static_cast<double>(d), m);
  if (count > 1e7) throw size_error("ancestry too large to sample");
  auto body = [&](std::int64_t& hits, std::int64_t trial) {
    Rng rng = stream_rng(seed, static_cast<std::uint64_t>(trial));
    std::vector<std::uint32_t> frontier;
    std::size_t needed = 1;
    bool tree = true;
    for (int r = 1; r <= m && tree; ++r) {
      needed *= static_cast<std::size_t>(d);
      const auto width = schedule.layer_size(k - r);
      frontier.resize(needed);
      for (auto& x : frontier) x = uniform_index(rng, width);
      std::sort(frontier.begin(), frontier.end());
      tree = std::adjacent_find(frontier.begin(), frontier.end()) == frontier.end();
    }
    hits += tree;
  };
  const auto hits = parallel_accumulate<std::int64_t>(trials, threads, 0, body,
                                                      [](std::int64_t& a, std::int64_t b) { a += b; });
  return {static_cast<double>(hits) / static_cast<double>(trials), hoeffding_half_width(trials), trials};
}

void write_dag(std::ostream& out, const LayeredDag& dag) {
  int max_deg = 0;
  for (int k = 1; k <= dag.depth(); ++k) max_deg = std::max(max_deg, dag.indegree(k));
  out << dag.depth() << ' ' << max_deg << '\n';
  for (int k = 1; k <= dag.depth(); ++k) {
    const auto& par = dag.level_parents(k);
    const auto deg = static_cast<std::size_t>(dag.indegree(k));
    for (std::size_t j = 0; j < par.size() / deg; ++j) {
      if (j) out << ' ';
      for (std::size_t i = 0; i < deg; ++i) {
        if (i) out << ',';
        out << par[j * deg + i];
      }
    }
    out << '\n';
  }
}

LayeredDag read_dag(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw input_error("DAG file is empty");
  std::istringstream header(line);
  int levels = -1, nominal = -1;
  if (!(header >> levels >> nominal) || levels < 1 || nominal < 1)
    throw input_error("DAG header must be 'levels d' with positive integers");
  std::vector<std::int64_t> sizes{1};
  std::vector<int> indeg;
  std::vector<std::vector<std::uint32_t>> parents;
  for (int k = 1; k <= levels; ++k) {
    if (!std::getline(in, line)) {
      std::ostringstream msg;
      msg << "DAG file ends before level " << k;
      throw input_error(msg.str());
    }
    std::istringstream row(line);
    std::string tuple;
    std::vector<std::uint32_t> flat;
    int deg = -1;
    std::int64_t count = 0;
    while (row >> tuple) {
      std::istringstream items(tuple);
      std::string item;
      int n = 0;
      while (std::getline(items, item, ',')) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
          v = std::stoul(item, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != item.size() || item.empty()) {
          std::ostringstream msg;
          msg << "bad parent index '" << item << "' at level " << k;
          throw input_error(msg.str());
        }
        flat.push_back(static_cast<std::uint32_t>(v));
        ++n;
      }
      if (deg < 0) deg = n;
      if (n != deg || n == 0) {
        std::ostringstream msg;
        msg << "level " << k << " mixes parent tuples of different lengths";
        throw input_error(msg.str());
      }
      ++count;
    }
    if (count == 0) {
      std::ostringstream msg;
      msg << "level " << k << " has no vertices";
      throw input_error(msg.str());
    }
    sizes.push_back(count);
    indeg.push_back(deg);
    parents.push_back(std::move(flat));
  }
  return LayeredDag(std::move(sizes), std::move(indeg), std::move(parents));
}

std::string dag_to_string(const LayeredDag& dag) {
  std::ostringstream out;
  write_dag(out, dag);
  return out.str();
}

LayeredDag dag_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_dag(in);
}

}  // namespace bcast
