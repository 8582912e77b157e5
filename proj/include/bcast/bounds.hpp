#pragma once

#include <cstdint>
#include <vector>

#include "bcast/core.hpp"
#include "bcast/sim.hpp"

namespace bcast {

/// L_k ((1-2 delta)^2 d)^k, in bits; delta may be 1/2.
double es_mi_bound(double width, double delta, int d, int k);

/// 1/2 - 1/(2 sqrt d)
double es_threshold(int d);
/// 1/2 - 1/(2d)
double bond_threshold(int d);

/// (1-2 delta)^2 (1 - (1 - lambda)^d)
double site_recursion(double lambda, double delta, int d);
/// The recursion iterated k times from lambda_0 = 1.
double site_recursion_iterate(double delta, int d, int k);
bool site_is_critical(double delta, int d);
/// Upper envelope for E[lambda_k]: min(1, ((1-2 delta)^2 d)^k), or 2/((d-1)k) at exact criticality.
double site_critical_envelope(double delta, int d, int k);

/// log(k) / (d log(1/(2 delta)))
double slow_growth_limit(double delta, int d, std::int64_t k);
/// True when L_k <= slow_growth_limit(delta, d, k) for every k in [k_from, k_to].
bool schedule_within_slow_growth(const LayerSchedule& schedule, double delta, int d, std::int64_t k_from,
                                 std::int64_t k_to);
/// (2 delta)^(d L): every edge into a level of width L carries a fresh bit.
double all_fresh_probability(double delta, int d, double width);

struct UnboundedConstants {
  double a;  // 256 / (21 (1 - 2 delta))
  double b;  // 1 / sqrt(log(1/(2 delta)))
};

UnboundedConstants unbounded_constants(double delta);
/// 2 / ((1 - 2 delta) eps sqrt(1 - 2 eps)) for eps in (0, 1/4).
double unbounded_a_general(double epsilon, double delta);

/// Joint law of (X_0, X_k): row0[x] = P(X_0 = 0, X_k = x), row1[x] = P(X_0 = 1, X_k = x).
struct JointDistribution {
  std::vector<double> row0;
  std::vector<double> row1;
};

/// Uniform root bit combined with the conditional laws.
JointDistribution joint_from_laws(const ExactLaws& laws);

/// I(X_0; X_k) in bits with 0 log 0 = 0. Throws input_error when the joint
/// has negative entries or does not sum to 1 within 1e-9.
double exact_mutual_information(const JointDistribution& joint);

/// P(the m-level ancestry of X_{k,0} is a tree) = prod_r prod_{s < d^r} (1 - s / L_{k-r}).
double tree_probability_exact(const LayerSchedule& schedule, int d, int k, int m);
/// 1 - d^2/(2(d^2-1)) d^(2m) / R with R the smallest width among levels k-m..k-1.
double tree_probability_lower_bound(const LayerSchedule& schedule, int d, int k, int m);

}  // namespace bcast
