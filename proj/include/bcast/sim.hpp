#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bcast/chain.hpp"
#include "bcast/core.hpp"

namespace bcast {

/// Every vertex at level k >= 1 picks d parents i.i.d. uniform over level k-1.
LayeredDag sample_random_dag(const LayerSchedule& schedule, int d, int depth, std::uint64_t seed);
LayeredDag sample_random_dag(const LayerSchedule& schedule, int d, int depth, Rng& rng);

/// Levels 0..depth of one broadcast; each edge passes through an independent BSC(delta).
std::vector<LayerState> run_broadcast(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules,
                                      int root_bit, std::uint64_t seed);
std::vector<LayerState> run_broadcast(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules,
                                      int root_bit, Rng& rng);

struct CoupledRun {
  std::vector<LayerState> plus;   // root 1
  std::vector<LayerState> minus;  // root 0
  std::int64_t violations = 0;    // vertices with X+ < X-
};

/// Monotone coupling: each edge copies the parent bit in both chains with
/// probability 1 - 2 delta, otherwise feeds one shared fresh fair bit to both;
/// tie-break bits are shared as well.
CoupledRun run_coupled(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules, std::uint64_t seed);
CoupledRun run_coupled(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules, Rng& rng);

enum class DagModel { RandomDag, FixedDag };
enum class DecoderKind { Majority, Biased, SingleVertex };

struct Decoder {
  DecoderKind kind = DecoderKind::Majority;
  double threshold = 0.5;

  static Decoder majority() { return {DecoderKind::Majority, 0.5}; }
  static Decoder biased(double t) { return {DecoderKind::Biased, t}; }
  static Decoder single_vertex() { return {DecoderKind::SingleVertex, 0.5}; }
  bool decide(const LayerState& state) const;
  std::string name() const;
};

struct McConfig {
  DagModel model = DagModel::RandomDag;
  Decoder decoder;
  LayerSchedule schedule = LayerSchedule::constant(16);
  int d = 3;
  RulePlan rules = RulePlan::uniform(ProcessingRule::majority(3));
  NoiseLevel delta{0.1};
  int depth = 1;
  std::int64_t trials = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<LayeredDag> dag;  // required for FixedDag
};

struct McEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // 99% Hoeffding interval
  std::int64_t errors = 0;
  std::int64_t trials = 0;
};

/// Half-width sqrt(range^2 log(2/alpha) / (2 n)) of a Hoeffding interval.
double hoeffding_half_width(std::int64_t n, double alpha = 0.01, double range = 1.0);

/// Fraction of trials in which the decoder at `depth` misreads a uniform root bit.
/// Trial i uses stream_rng(seed, i), so the result does not depend on `threads`.
McEstimate mc_error_estimate(const McConfig& config);

struct CoupledStats {
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  std::vector<double> mean_sigma_gap;   // E[sigma+_k - sigma-_k]
  std::vector<double> disagreement;     // P(X+_k != X-_k)
  std::vector<double> mean_vertex_gap;  // E[X+_{k,0} - X-_{k,0}]
  double half_width = 0.0;
};

/// Coupled runs averaged over trials (random DAG resampled per trial unless config.dag is set).
CoupledStats coupled_statistics(const McConfig& config);

struct ExactLaws {
  int level = 0;
  int width = 1;
  std::vector<double> plus;   // P(X_k = x | root 1, G), x read as a bit mask
  std::vector<double> minus;  // P(X_k = x | root 0, G)

  double tv() const;
  double ml_error() const { return 0.5 * (1.0 - tv()); }
  SigmaPair sigma_marginals() const;
};

/// Exact conditional laws of X_k given the DAG, by forward passes over layer states.
/// Throws size_error when a level is wider than 16 or the work exceeds 1e8 steps.
ExactLaws exact_layer_inference(const LayeredDag& dag, NoiseLevel delta, const RulePlan& rules, int k);

struct PercolationResult {
  std::vector<double> mean_lambda;     // E[lambda_k]
  std::vector<double> mean_recursion;  // E[(1-2 delta)^2 (1 - (1 - lambda_{k-1})^d)]
  std::vector<double> hit_frequency;   // P(lambda_k >= 1/L_k)
  std::int64_t trials = 0;
  double half_width = 0.0;             // for a mean of [0,1] values
  double difference_half_width = 0.0;  // for a mean of [-1,1] values
};

/// Site percolation on the random DAG: the root is open, every other vertex is
/// open with probability (1-2 delta)^2 and counts when it is open and has an
/// open-connected parent.
PercolationResult percolation_site_sim(const LayerSchedule& schedule, int d, NoiseLevel delta, int depth,
                                       std::int64_t trials, std::uint64_t seed, int threads = 1);

struct TreeEventEstimate {
  double estimate = 0.0;
  double half_width = 0.0;
  std::int64_t trials = 0;
};

/// MC frequency of the event that the m-level ancestry of X_{k,0} in the random DAG is a tree.
TreeEventEstimate tree_event_mc(const LayerSchedule& schedule, int d, int k, int m, std::int64_t trials,
                                std::uint64_t seed, int threads = 1);

/// Text format: header "levels d", then one line per level of space-separated
/// comma-joined parent tuples.
void write_dag(std::ostream& out, const LayeredDag& dag);
LayeredDag read_dag(std::istream& in);
std::string dag_to_string(const LayeredDag& dag);
LayeredDag dag_from_string(const std::string& text);

}  // namespace bcast
