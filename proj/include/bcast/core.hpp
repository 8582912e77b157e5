#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bcast/errors.hpp"
#include "bcast/random.hpp"

#ifdef BCAST_HIGH_PRECISION
#include <boost/multiprecision/cpp_bin_float.hpp>
#endif

namespace bcast {

#ifdef BCAST_HIGH_PRECISION
using real = boost::multiprecision::cpp_bin_float_50;
#else
using real = double;
#endif

/// Crossover probability of a binary symmetric channel, strictly inside (0, 1/2).
class NoiseLevel {
 public:
  explicit NoiseLevel(double delta);
  double value() const { return delta_; }
  operator double() const { return delta_; }

 private:
  double delta_;
};

/// sigma * delta = sigma(1 - delta) + delta(1 - sigma): the probability that a
/// Bernoulli(sigma) bit reads as 1 after a BSC(delta).
template <class T>
T bsc_convolve(const T& sigma, const T& delta) {
  return sigma * (1 - delta) + delta * (1 - sigma);
}

inline double bsc_convolve(double sigma, NoiseLevel delta) {
  return bsc_convolve<double>(sigma, delta.value());
}

enum class RuleKind { MajorityRandomTie, And, Or, Nand, Identity, TruthTable };

/// A d-input Boolean gate. Majority with even arity breaks exact ties with a
/// fair random bit; every other kind is deterministic.
class ProcessingRule {
 public:
  static ProcessingRule majority(int arity);
  static ProcessingRule and_gate(int arity);
  static ProcessingRule or_gate(int arity);
  static ProcessingRule nand_gate(int arity);
  // Copies its first input.
  static ProcessingRule identity(int arity = 1);
  // table[i] is the output for the input whose bit j is (i >> j) & 1.
  static ProcessingRule truth_table(int arity, std::vector<std::uint8_t> table);

  RuleKind kind() const { return kind_; }
  int arity() const { return arity_; }
  const std::vector<std::uint8_t>& table() const { return table_; }

  // True for majority, AND and OR: the rules for which the monotone coupling
  // is guaranteed to preserve X+ >= X-.
  bool monotone_symmetric() const;

  // P(output = 1 | inputs): 0, 1, or 1/2 on a randomized tie.
  double output_probability(std::span<const std::uint8_t> inputs) const;

  std::string name() const;

 private:
  ProcessingRule(RuleKind kind, int arity, std::vector<std::uint8_t> table = {});

  RuleKind kind_;
  int arity_;
  std::vector<std::uint8_t> table_;
};

/// Applies the rule. A randomized tie consumes exactly one draw from rng;
/// nothing else touches rng.
bool apply_rule(const ProcessingRule& rule, std::span<const std::uint8_t> inputs, Rng& rng);

/// Same, with the tie bit supplied by the caller (used when two chains must
/// share their tie-break randomness).
bool apply_rule(const ProcessingRule& rule, std::span<const std::uint8_t> inputs,
                const std::function<bool()>& tie_bit);

/// Which rule runs at each level k >= 1.
class RulePlan {
 public:
  static RulePlan uniform(ProcessingRule rule);
  // AND at even levels and OR at odd levels is alternating(and_gate(2), or_gate(2)).
  static RulePlan alternating(ProcessingRule even, ProcessingRule odd);
  // Identity at level 1 and majority(d) afterwards (the expander DAG).
  static RulePlan expander(int d);

  const ProcessingRule& at(int level) const;
  bool monotone_symmetric() const;

 private:
  RulePlan(ProcessingRule even, ProcessingRule odd, std::optional<ProcessingRule> first);

  ProcessingRule even_;
  ProcessingRule odd_;
  std::optional<ProcessingRule> first_;
};

enum class Rounding { Floor, Nearest };

/// n * d^(-6/5) rounded by the chosen convention (default floor).
std::int64_t expansion_subset_size(std::int64_t n, int d, Rounding mode = Rounding::Floor);

/// Rule producing the level size L_k for every depth k; L_0 = 1 always.
class LayerSchedule {
 public:
  struct Constant {
    std::int64_t width;
  };
  // L_k = max(min_width, ceil(coefficient * log k)) for k >= 1.
  struct LogGrowth {
    double coefficient;
    std::int64_t min_width;
  };
  // L_k = slope * k + offset for k >= 1.
  struct Linear {
    std::int64_t slope;
    std::int64_t offset;
  };
  // L_k = N for 1 <= k <= floor(M); L_k = 2^m N for M^(2^(m-1)) < k <= M^(2^m).
  struct Expander {
    std::int64_t base_width;
    double m_constant;
    int degree;  // 0 when M was given directly
  };
  // widths[i] is L_{i+1}.
  struct Explicit {
    std::vector<std::int64_t> widths;
  };

  static LayerSchedule constant(std::int64_t width);
  static LayerSchedule log_growth(double coefficient, std::int64_t min_width = 1);
  static LayerSchedule linear(std::int64_t slope, std::int64_t offset);
  // M = exp(N / (4 d^(12/5))); throws config_error when M < 2.
  static LayerSchedule expander(std::int64_t base_width, int degree);
  static LayerSchedule expander_with_m(std::int64_t base_width, double m_constant);
  static LayerSchedule explicit_widths(std::vector<std::int64_t> widths);

  std::int64_t layer_size(std::int64_t k) const;
  // Largest L_k over 0 <= k <= depth.
  std::int64_t max_width(std::int64_t depth) const;
  std::string describe() const;
  // Inverse of describe(); throws input_error on malformed text.
  static LayerSchedule parse(const std::string& text);

  const auto& spec() const { return spec_; }

 private:
  using Spec = std::variant<Constant, LogGrowth, Linear, Expander, Explicit>;
  explicit LayerSchedule(Spec spec) : spec_(std::move(spec)) {}
  Spec spec_;
};

inline std::int64_t layer_size(const LayerSchedule& schedule, std::int64_t k) {
  return schedule.layer_size(k);
}

/// Explicit layered multigraph. Level 0 is the single root; every vertex at
/// level k >= 1 has an ordered list of indegree(k) parents in level k-1
/// (repetitions allowed).
class LayeredDag {
 public:
  // parents[k-1] is the flattened parent table of level k: vertex j owns
  // entries [j * indegree[k-1], (j+1) * indegree[k-1]).
  LayeredDag(std::vector<std::int64_t> layer_sizes, std::vector<int> indegrees,
             std::vector<std::vector<std::uint32_t>> parents);

  int depth() const { return static_cast<int>(sizes_.size()) - 1; }
  std::int64_t layer_size(int k) const { return sizes_.at(static_cast<std::size_t>(k)); }
  const std::vector<std::int64_t>& layer_sizes() const { return sizes_; }
  int indegree(int k) const { return indegrees_.at(static_cast<std::size_t>(k - 1)); }
  std::span<const std::uint32_t> parents_of(int k, std::int64_t j) const;
  const std::vector<std::uint32_t>& level_parents(int k) const {
    return parents_.at(static_cast<std::size_t>(k - 1));
  }

  // Number of children of every vertex at level k (edges counted with multiplicity).
  std::vector<std::int64_t> outdegrees(int k) const;

  bool operator==(const LayeredDag&) const = default;

 private:
  std::vector<std::int64_t> sizes_;
  std::vector<int> indegrees_;
  std::vector<std::vector<std::uint32_t>> parents_;
};

struct LayerState {
  int level = 0;
  std::vector<std::uint8_t> bits;

  double sigma() const;
};

}  // namespace bcast
