#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bcast/core.hpp"

namespace bcast {

/// d-regular bipartite multigraph on U = V = [n]; right vertex v owns the
/// left indices edges[v*d .. v*d + d).
struct BipartiteRegularGraph {
  std::int64_t n = 0;
  int d = 0;
  std::vector<std::uint32_t> edges;

  std::span<const std::uint32_t> right_neighbors(std::int64_t v) const;
  std::vector<std::int64_t> left_degrees() const;
  // Both sides have degree exactly d.
  bool regular() const;

  bool operator==(const BipartiteRegularGraph&) const = default;
};

/// Configuration model: a uniform permutation of the dn half-edges (Fisher-Yates),
/// consecutive blocks of d forming the right vertices.
BipartiteRegularGraph sample_regular_bipartite(std::int64_t n, int d, std::uint64_t seed);
BipartiteRegularGraph sample_regular_bipartite(std::int64_t n, int d, Rng& rng);

struct ExpansionCertificate {
  std::int64_t subset_size = 0;
  std::int64_t min_neighborhood = 0;
  std::int64_t required = 0;
  bool pass = false;
  std::vector<std::uint32_t> witness;  // lexicographically first subset attaining the minimum
};

/// Minimum of |Gamma(S)| (distinct right vertices) over all left subsets of size s.
/// Throws size_error when C(n, s) exceeds 1e8.
ExpansionCertificate verify_expansion(const BipartiteRegularGraph& graph, std::int64_t s,
                                      std::int64_t beta_required, int threads = 1);

double binomial_count(std::int64_t n, std::int64_t k);

/// First graph, in lexicographic order of the half-edge label sequence, whose
/// expansion certificate passes. Throws not_found_error when none does and
/// size_error when the enumeration exceeds 1e8 sequences.
BipartiteRegularGraph deterministic_search(std::int64_t n, int d, std::int64_t s, std::int64_t beta_required);

/// 8/d^(1/5) + d^(6/5) exp(-(1-2 delta)^2 (d-4)^2 / (8d)).
double degree_condition_lhs(double delta, double d);
/// Smallest odd d >= 5 with degree_condition_lhs(delta, d) <= 1/2.
std::int64_t min_degree_for_noise(double delta);

/// Supplies the bipartite graph B_n for every layer width n in use.
class GraphProvider {
 public:
  using Source = std::function<BipartiteRegularGraph(std::int64_t n, int d)>;

  // Independent configuration-model sample per width, keyed by (seed, n).
  static GraphProvider sampled(std::uint64_t seed);
  // deterministic_search with s = floor(n d^(-6/5)) and required neighbourhood
  // ceil((1 - epsilon) d s); widths with s = 0 take the first sequence.
  static GraphProvider deterministic(double epsilon = 0.5);
  // Caller-supplied graphs; a missing width raises missing_graph_error.
  static GraphProvider injected(std::map<std::int64_t, BipartiteRegularGraph> graphs);

  BipartiteRegularGraph graph(std::int64_t n, int d) const;
  const std::string& name() const { return name_; }

 private:
  GraphProvider(std::string name, Source source) : name_(std::move(name)), source_(std::move(source)) {}
  std::string name_;
  Source source_;
};

/// Expander DAG: level 1 copies the root, equal consecutive widths reuse B_{L_k},
/// and a doubling level feeds both halves from the same B_{L_k}.
LayeredDag assemble_expander_dag(std::int64_t base_width, int d, int depth, const GraphProvider& provider);
/// Same construction over any schedule whose widths stay equal or double from level 1 on.
LayeredDag assemble_expander_dag(const LayerSchedule& schedule, int d, int depth, const GraphProvider& provider);

struct SuccessBound {
  double value = 0.0;
  bool assumption_holds = false;
};

/// 1 - e / ((2 - sqrt 2) pi sqrt(a (1 - a) N)) with a = d^(-6/5); independent of m.
SuccessBound success_probability_bound(std::int64_t base_width, int d, int m);
/// The N at which the bound is exactly zero.
double success_bound_zero(int d);

struct MinorityStep {
  double left_fraction = 0.0;
  double mean_right_fraction = 0.0;
  double exceed_frequency = 0.0;  // P(right ones > left ones)
  double half_width = 0.0;
  std::int64_t trials = 0;
};

/// One noisy majority step through B: `ones` random left vertices hold 1, each
/// edge passes a BSC(delta), and every right vertex takes the majority.
MinorityStep one_step_minority_mc(const BipartiteRegularGraph& graph, std::int64_t ones, NoiseLevel delta,
                                  std::int64_t trials, std::uint64_t seed);

/// Text format: header "n d", then n lines of d left indices.
void write_graph(std::ostream& out, const BipartiteRegularGraph& graph);
BipartiteRegularGraph read_graph(std::istream& in);
std::string graph_to_string(const BipartiteRegularGraph& graph);
BipartiteRegularGraph graph_from_string(const std::string& text);

}  // namespace bcast
