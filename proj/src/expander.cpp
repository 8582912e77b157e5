#include "bcast/expander.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "bcast/parallel.hpp"

namespace bcast {

std::span<const std::uint32_t> BipartiteRegularGraph::right_neighbors(std::int64_t v) const {
  if (v < 0 || v >= n) throw input_error("right vertex out of range");
  const auto dd = static_cast<std::size_t>(d);
  return std::span<const std::uint32_t>(edges).subspan(static_cast<std::size_t>(v) * dd, dd);
}

std::vector<std::int64_t> BipartiteRegularGraph::left_degrees() const {
  std::vector<std::int64_t> deg(static_cast<std::size_t>(n), 0);
  for (auto u : edges) {
    if (static_cast<std::int64_t>(u) >= n) throw input_error("left index out of range");
    ++deg[u];
  }
  return deg;
}

bool BipartiteRegularGraph::regular() const {
  if (n < 1 || d < 1) return false;
  if (edges.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(d)) return false;
  for (auto u : edges)
    if (static_cast<std::int64_t>(u) >= n) return false;
  for (auto c : left_degrees())
    if (c != d) return false;
  return true;
}

BipartiteRegularGraph sample_regular_bipartite(std::int64_t n, int d, Rng& rng) {
  if (n < 1 || d < 1) throw input_error("bipartite graph needs n >= 1 and d >= 1");
  if (n > std::int64_t{0xffffffff}) throw size_error("graph too large");
  BipartiteRegularGraph g;
  g.n = n;
  g.d = d;
  const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(d);
  g.edges.resize(total);
  // half-edge i belongs to left vertex i / d
  for (std::size_t i = 0; i < total; ++i) g.edges[i] = static_cast<std::uint32_t>(i / static_cast<std::size_t>(d));
  for (std::size_t i = total; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(g.edges[i - 1], g.edges[pick(rng)]);
  }
  return g;
}

BipartiteRegularGraph sample_regular_bipartite(std::int64_t n, int d, std::uint64_t seed) {
  Rng rng = stream_rng(seed, 0);
  return sample_regular_bipartite(n, d, rng);
}

double binomial_count(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

namespace {

using Bits = std::vector<std::uint64_t>;

std::vector<Bits> left_neighbourhoods(const BipartiteRegularGraph& g) {
  const std::size_t words = (static_cast<std::size_t>(g.n) + 63) / 64;
  std::vector<Bits> nb(static_cast<std::size_t>(g.n), Bits(words, 0));
  for (std::int64_t v = 0; v < g.n; ++v)
    for (auto u : g.right_neighbors(v)) nb[u][static_cast<std::size_t>(v) / 64] |= std::uint64_t{1} << (v % 64);
  return nb;
}

struct Best {
  std::int64_t value = -1;
  std::vector<std::uint32_t> witness;
};

// All s-subsets whose smallest element is `first`, in lexicographic order.
Best scan_from(const std::vector<Bits>& nb, std::int64_t n, std::int64_t s, std::uint32_t first) {
  const std::size_t words = nb.empty() ? 0 : nb[0].size();
  const auto ss = static_cast<std::size_t>(s);
  std::vector<Bits> prefix(ss, Bits(words, 0));
  std::vector<std::uint32_t> pick(ss);
  Best best;
  pick[0] = first;
  prefix[0] = nb[first];
  if (s == 1) {
    std::int64_t c = 0;
    for (auto w : prefix[0]) c += std::popcount(w);
    best.value = c;
    best.witness = pick;
    return best;
  }
  if (static_cast<std::int64_t>(first) + s > n) return best;
  // depth-first over positions 1..s-1
  std::size_t pos = 1;
  pick[1] = first;
  for (;;) {
    ++pick[pos];
    const std::int64_t room = n - static_cast<std::int64_t>(ss - pos);
    if (static_cast<std::int64_t>(pick[pos]) > room) {
      if (pos == 1) break;
      --pos;
      continue;
    }
    for (std::size_t w = 0; w < words; ++w) prefix[pos][w] = prefix[pos - 1][w] | nb[pick[pos]][w];
    if (pos + 1 == ss) {
      std::int64_t c = 0;
      for (auto w : prefix[pos]) c += std::popcount(w);
      if (best.value < 0 || c < best.value) {
        best.value = c;
        best.witness = pick;
      }
    } else {
      ++pos;
      pick[pos] = pick[pos - 1];
    }
  }
  return best;
}

}  // namespace

ExpansionCertificate verify_expansion(const BipartiteRegularGraph& graph, std::int64_t s,
                                      std::int64_t beta_required, int threads) {
  if (!graph.regular()) throw input_error("graph is not d-regular on both sides");
  if (s < 1 || s > graph.n) throw input_error("subset size must lie in [1, n]");
  const double count = binomial_count(graph.n, s);
  if (count > 1e8) {
    std::ostringstream msg;
    msg << "C(" << graph.n << ", " << s << ") = " << count << " subsets exceeds the limit 1e8";
    throw size_error(msg.str());
  }
  const auto nb = left_neighbourhoods(graph);
  const std::int64_t firsts = graph.n - s + 1;
  std::vector<Best> per_first(static_cast<std::size_t>(firsts));
  parallel_accumulate<int>(
      firsts, threads, 0,
      [&](int&, std::int64_t i) { per_first[static_cast<std::size_t>(i)] = scan_from(nb, graph.n, s, static_cast<std::uint32_t>(i)); },
      [](int&, int) {}, 1);
  ExpansionCertificate cert;
  cert.subset_size = s;
  cert.required = beta_required;
  cert.min_neighborhood = -1;
  for (auto& b : per_first) {
    if (b.value < 0) continue;
    if (cert.min_neighborhood < 0 || b.value < cert.min_neighborhood) {
      cert.min_neighborhood = b.value;
      cert.witness = b.witness;
    }
  }
  cert.pass = cert.min_neighborhood >= beta_required;
  return cert;
}

BipartiteRegularGraph deterministic_search(std::int64_t n, int d, std::int64_t s, std::int64_t beta_required) {
  if (n < 1 || d < 1) throw input_error("bipartite graph needs n >= 1 and d >= 1");
  if (s < 1 || s > n) throw input_error("subset size must lie in [1, n]");
  // (nd)! / (d!)^n label sequences
  double log_count = std::lgamma(static_cast<double>(n * d) + 1.0) -
                     static_cast<double>(n) * std::lgamma(static_cast<double>(d) + 1.0);
  if (log_count > std::log(1e8)) {
    std::ostringstream msg;
    msg << "deterministic search over about " << std::exp(log_count) << " sequences exceeds the limit 1e8";
    throw size_error(msg.str());
  }
  BipartiteRegularGraph g;
  g.n = n;
  g.d = d;
  g.edges.resize(static_cast<std::size_t>(n * d));
  for (std::size_t i = 0; i < g.edges.size(); ++i) g.edges[i] = static_cast<std::uint32_t>(i / static_cast<std::size_t>(d));
  const auto dd = static_cast<std::size_t>(d);
  do {
    bool canonical = true;
    for (std::size_t v = 0; v < static_cast<std::size_t>(n) && canonical; ++v)
      canonical = std::is_sorted(g.edges.begin() + static_cast<std::ptrdiff_t>(v * dd),
                                 g.edges.begin() + static_cast<std::ptrdiff_t>((v + 1) * dd));
    if (!canonical) continue;
    if (verify_expansion(g, s, beta_required).pass) return g;
  } while (std::next_permutation(g.edges.begin(), g.edges.end()));
  std::ostringstream msg;
  msg << "no " << d << "-regular bipartite graph on n = " << n << " has min |Gamma(S)| >= " << beta_required
      << " over subsets of size " << s;
  throw not_found_error(msg.str());
}

namespace {

double degree_term1(double d) { return 8.0 * std::pow(d, -0.2); }

double degree_term2(double delta, double d) {
  const double a = (1.0 - 2.0 * delta) * (1.0 - 2.0 * delta);
  return std::exp(1.2 * std::log(d) - a * (d - 4.0) * (d - 4.0) / (8.0 * d));
}

}  // namespace

double degree_condition_lhs(double delta, double d) { return degree_term1(d) + degree_term2(delta, d); }

std::int64_t min_degree_for_noise(double delta) {
  if (!(delta >= 0.0 && delta < 0.5)) throw input_error("noise level must lie in [0, 1/2)");
  auto ok = [delta](std::int64_t d) { return degree_condition_lhs(delta, static_cast<double>(d)) <= 0.5; };
  auto odd_up = [](double x) {
    auto v = static_cast<std::int64_t>(std::ceil(x));
    return v % 2 == 0 ? v + 1 : v;
  };
  // 8 d^(-1/5) <= 1/2 forces d >= 16^5
  std::int64_t lo = odd_up(std::pow(16.0, 5.0) + 0.5);
  const double a = (1.0 - 2.0 * delta) * (1.0 - 2.0 * delta);
  // the second term increases up to about 9.6/a and decreases afterwards
  const double turn = 9.6 / a + 4.0;
  if (turn > static_cast<double>(lo)) {
    const std::int64_t top = odd_up(turn);
    // on [lo, top] the first term is at least its value at top, the second at least its value at lo
    const double floor_bound = degree_term1(static_cast<double>(top)) + degree_term2(delta, static_cast<double>(lo));
    if (floor_bound <= 0.5) {
      for (std::int64_t d = lo; d < top; d += 2)
        if (ok(d)) return d;
    }
    lo = top;
  }
  if (ok(lo)) return lo;
  // gallop over odd d in the decreasing region, then bisect
  std::int64_t step = 2;
  std::int64_t hi = lo + step;
  while (!ok(hi)) {
    lo = hi;
    step *= 2;
    hi = lo + step;
    if (hi > std::int64_t{1} << 60) throw domain_error("degree condition not met below 2^60");
  }
  // invariant: !ok(lo), ok(hi), both odd
  while (hi - lo > 2) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (mid % 2 == 0) ++mid;
    if (mid >= hi) mid = hi - 2;
    if (ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

GraphProvider GraphProvider::sampled(std::uint64_t seed) {
  return GraphProvider("sampled", [seed](std::int64_t n, int d) {
    Rng rng = stream_rng(seed, static_cast<std::uint64_t>(n));
    return sample_regular_bipartite(n, d, rng);
  });
}

GraphProvider GraphProvider::deterministic(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw config_error("epsilon must lie in [0, 1)");
  return GraphProvider("deterministic", [epsilon](std::int64_t n, int d) {
    const std::int64_t s = expansion_subset_size(n, d);
    if (s < 1) return deterministic_search(n, d, 1, 1);
    const auto required = static_cast<std::int64_t>(std::ceil((1.0 - epsilon) * static_cast<double>(d * s) - 1e-9));
    return deterministic_search(n, d, s, required);
  });
}

GraphProvider GraphProvider::injected(std::map<std::int64_t, BipartiteRegularGraph> graphs) {
  return GraphProvider("injected", [graphs = std::move(graphs)](std::int64_t n, int d) {
    auto it = graphs.find(n);
    if (it == graphs.end()) {
      std::ostringstream msg;
      msg << "no bipartite graph supplied for width " << n;
      throw missing_graph_error(msg.str());
    }
    if (it->second.n != n || it->second.d != d || !it->second.regular()) {
      std::ostringstream msg;
      msg << "supplied graph for width " << n << " is not " << d << "-regular on " << n << " vertices";
      throw input_error(msg.str());
    }
    return it->second;
  });
}

BipartiteRegularGraph GraphProvider::graph(std::int64_t n, int d) const { return source_(n, d); }

LayeredDag assemble_expander_dag(const LayerSchedule& schedule, int d, int depth, const GraphProvider& provider) {
  if (depth < 1) throw input_error("depth must be at least 1");
  if (d < 1) throw input_error("degree must be at least 1");
  std::vector<std::int64_t> sizes{1};
  std::vector<int> indeg;
  std::vector<std::vector<std::uint32_t>> parents;
  std::map<std::int64_t, BipartiteRegularGraph> cache;
  const std::int64_t first = schedule.layer_size(1);
  sizes.push_back(first);
  indeg.push_back(1);
  parents.emplace_back(static_cast<std::size_t>(first), 0u);
  for (int k = 1; k < depth; ++k) {
    const std::int64_t cur = schedule.layer_size(k);
    const std::int64_t next = schedule.layer_size(k + 1);
    if (next != cur && next != 2 * cur) {
      std::ostringstream msg;
      msg << "widths must stay equal or double; level " << k << " has " << cur << " and level " << k + 1 << " has "
          << next;
      throw config_error(msg.str());
    }
    auto it = cache.find(cur);
    if (it == cache.end()) {
      auto g = provider.graph(cur, d);
      if (g.n != cur || g.d != d || !g.regular()) throw input_error("provider returned a graph of the wrong shape");
      it = cache.emplace(cur, std::move(g)).first;
    }
    const auto& edges = it->second.edges;
    std::vector<std::uint32_t> p;
    p.reserve(static_cast<std::size_t>(next * d));
    p.insert(p.end(), edges.begin(), edges.end());
    if (next == 2 * cur) p.insert(p.end(), edges.begin(), edges.end());
    sizes.push_back(next);
    indeg.push_back(d);
    parents.push_back(std::move(p));
  }
  return LayeredDag(std::move(sizes), std::move(indeg), std::move(parents));
}

LayeredDag assemble_expander_dag(std::int64_t base_width, int d, int depth, const GraphProvider& provider) {
  return assemble_expander_dag(LayerSchedule::expander(base_width, d), d, depth, provider);
}

namespace {

double bound_constant(int d) {
  const double a = std::pow(static_cast<double>(d), -1.2);
  return a * (1.0 - a);
}

}  // namespace

SuccessBound success_probability_bound(std::int64_t base_width, int d, int m) {
  if (base_width < 1 || d < 2 || m < 0) throw input_error("bound needs N >= 1, d >= 2, m >= 0");
  const double pi = std::numbers::pi, e = std::numbers::e, r2 = std::numbers::sqrt2;
  const double n = static_cast<double>(base_width);
  SuccessBound b;
  b.value = 1.0 - e / ((2.0 - r2) * pi * std::sqrt(bound_constant(d) * n));
  b.assumption_holds = n > success_bound_zero(d);
  return b;
}

double success_bound_zero(int d) {
  if (d < 2) throw input_error("bound needs d >= 2");
  const double pi = std::numbers::pi, e = std::numbers::e, r2 = std::numbers::sqrt2;
  return e * e / ((6.0 - 4.0 * r2) * pi * pi * bound_constant(d));
}

MinorityStep one_step_minority_mc(const BipartiteRegularGraph& graph, std::int64_t ones, NoiseLevel delta,
                                  std::int64_t trials, std::uint64_t seed) {
  if (!graph.regular()) throw input_error("graph is not d-regular on both sides");
  if (ones < 0 || ones > graph.n) throw input_error("number of ones out of range");
  if (trials < 1) throw input_error("trials must be at least 1");
  const auto rule = ProcessingRule::majority(graph.d);
  std::vector<std::uint32_t> order(static_cast<std::size_t>(graph.n));
  std::vector<std::uint8_t> left(static_cast<std::size_t>(graph.n)), in(static_cast<std::size_t>(graph.d));
  double fraction_sum = 0.0;
  std::int64_t exceed = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng = stream_rng(seed, static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    std::shuffle(order.begin(), order.end(), rng);
    std::fill(left.begin(), left.end(), 0);
    for (std::int64_t i = 0; i < ones; ++i) left[order[static_cast<std::size_t>(i)]] = 1;
    std::int64_t right = 0;
    for (std::int64_t v = 0; v < graph.n; ++v) {
      auto nb = graph.right_neighbors(v);
      for (std::size_t i = 0; i < nb.size(); ++i)
        in[i] = left[nb[i]] ^ static_cast<std::uint8_t>(bernoulli(rng, delta.value()));
      right += apply_rule(rule, in, rng);
    }
    fraction_sum += static_cast<double>(right) / static_cast<double>(graph.n);
    exceed += right > ones;
  }
  MinorityStep r;
  r.trials = trials;
  r.left_fraction = static_cast<double>(ones) / static_cast<double>(graph.n);
  r.mean_right_fraction = fraction_sum / static_cast<double>(trials);
  r.exceed_frequency = static_cast<double>(exceed) / static_cast<double>(trials);
  r.half_width = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(trials)));
  return r;
}

void write_graph(std::ostream& out, const BipartiteRegularGraph& graph) {
  out << graph.n << ' ' << graph.d << '\n';
  for (std::int64_t v = 0; v < graph.n; ++v) {
    auto nb = graph.right_neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i) out << (i ? " " : "") << nb[i];
    out << '\n';
  }
}

BipartiteRegularGraph read_graph(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw input_error("graph file is empty");
  std::istringstream header(line);
  BipartiteRegularGraph g;
  if (!(header >> g.n >> g.d) || g.n < 1 || g.d < 1) throw input_error("graph header must be 'n d' with positive integers");
  for (std::int64_t v = 0; v < g.n; ++v) {
    if (!std::getline(in, line)) {
      std::ostringstream msg;
      msg << "graph file ends before right vertex " << v;
      throw input_error(msg.str());
    }
    std::istringstream row(line);
    std::int64_t u;
    int count = 0;
    while (row >> u) {
      if (u < 0 || u >= g.n) {
        std::ostringstream msg;
        msg << "left index " << u << " out of range on line " << v + 2;
        throw input_error(msg.str());
      }
      g.edges.push_back(static_cast<std::uint32_t>(u));
      ++count;
    }
    if (!row.eof() || count != g.d) {
      std::ostringstream msg;
      msg << "line " << v + 2 << " must hold " << g.d << " left indices";
      throw input_error(msg.str());
    }
  }
  return g;
}

std::string graph_to_string(const BipartiteRegularGraph& graph) {
  std::ostringstream out;
  write_graph(out, graph);
  return out.str();
}

BipartiteRegularGraph graph_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_graph(in);
}

}  // namespace bcast
