#include "bcast/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bcast {

namespace {

void require_delta_closed(double delta) {
  if (!(delta >= 0.0 && delta <= 0.5)) throw input_error("noise level must lie in [0, 1/2]");
}

void require_delta_open(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw input_error("noise level must lie in (0, 1/2)");
}

}  // namespace

double es_mi_bound(double width, double delta, int d, int k) {
  require_delta_closed(delta);
  if (width < 1 || d < 1 || k < 0) throw input_error("bound needs L >= 1, d >= 1, k >= 0");
  if (k == 0) return width;
  const double a = (1.0 - 2.0 * delta) * (1.0 - 2.0 * delta) * d;
  return width * std::pow(a, k);
}

double es_threshold(int d) {
  if (d < 2) throw input_error("threshold needs d >= 2");
  return 0.5 - 0.5 / std::sqrt(static_cast<double>(d));
}

double bond_threshold(int d) {
  if (d < 2) throw input_error("threshold needs d >= 2");
  return 0.5 - 0.5 / static_cast<double>(d);
}

double site_recursion(double lambda, double delta, int d) {
  require_delta_closed(delta);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw input_error("lambda must lie in [0, 1]");
  if (d < 1) throw input_error("degree must be at least 1");
  return (1.0 - 2.0 * delta) * (1.0 - 2.0 * delta) * (1.0 - std::pow(1.0 - lambda, d));
}

double site_recursion_iterate(double delta, int d, int k) {
  if (k < 0) throw input_error("depth must be non-negative");
  double lambda = 1.0;
  for (int i = 0; i < k; ++i) lambda = site_recursion(lambda, delta, d);
  return lambda;
}

bool site_is_critical(double delta, int d) {
  return std::abs((1.0 - 2.0 * delta) * (1.0 - 2.0 * delta) * d - 1.0) < 1e-12;
}

double site_critical_envelope(double delta, int d, int k) {
  require_delta_closed(delta);
  if (d < 2 || k < 1) throw input_error("envelope needs d >= 2 and k >= 1");
  if (site_is_critical(delta, d)) return std::min(1.0, 2.0 / ((d - 1.0) * k));
  const double a = (1.0 - 2.0 * delta) * (1.0 - 2.0 * delta) * d;
  return std::min(1.0, std::pow(a, k));
}

double slow_growth_limit(double delta, int d, std::int64_t k) {
  require_delta_open(delta);
  if (d < 1 || k < 2) throw input_error("slow growth limit needs d >= 1 and k >= 2");
  return std::log(static_cast<double>(k)) / (d * std::log(1.0 / (2.0 * delta)));
}

bool schedule_within_slow_growth(const LayerSchedule& schedule, double delta, int d, std::int64_t k_from,
                                 std::int64_t k_to) {
  for (std::int64_t k = std::max<std::int64_t>(2, k_from); k <= k_to; ++k)
    if (static_cast<double>(schedule.layer_size(k)) > slow_growth_limit(delta, d, k)) return false;
  return true;
}

double all_fresh_probability(double delta, int d, double width) {
  require_delta_closed(delta);
  return std::pow(2.0 * delta, d * width);
}

UnboundedConstants unbounded_constants(double delta) {
  require_delta_open(delta);
  return {256.0 / (21.0 * (1.0 - 2.0 * delta)), 1.0 / std::sqrt(std::log(1.0 / (2.0 * delta)))};
}

double unbounded_a_general(double epsilon, double delta) {
  require_delta_open(delta);
  if (!(epsilon > 0.0 && epsilon < 0.25)) throw input_error("epsilon must lie in (0, 1/4)");
  return 2.0 / ((1.0 - 2.0 * delta) * epsilon * std::sqrt(1.0 - 2.0 * epsilon));
}

JointDistribution joint_from_laws(const ExactLaws& laws) {
  JointDistribution j;
  j.row0.reserve(laws.minus.size());
  j.row1.reserve(laws.plus.size());
  for (auto v : laws.minus) j.row0.push_back(0.5 * v);
  for (auto v : laws.plus) j.row1.push_back(0.5 * v);
  return j;
}

double exact_mutual_information(const JointDistribution& joint) {
  if (joint.row0.size() != joint.row1.size()) throw input_error("joint rows have different lengths");
  double total = 0.0, p0 = 0.0, p1 = 0.0;
  for (std::size_t y = 0; y < joint.row0.size(); ++y) {
    if (joint.row0[y] < 0.0 || joint.row1[y] < 0.0) throw input_error("joint has negative entries");
    p0 += joint.row0[y];
    p1 += joint.row1[y];
  }
  total = p0 + p1;
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "joint sums to " << total << ", not 1";
    throw input_error(msg.str());
  }
  double mi = 0.0;
  for (std::size_t y = 0; y < joint.row0.size(); ++y) {
    const double py = joint.row0[y] + joint.row1[y];
    if (joint.row0[y] > 0.0) mi += joint.row0[y] * std::log2(joint.row0[y] / (p0 * py));
    if (joint.row1[y] > 0.0) mi += joint.row1[y] * std::log2(joint.row1[y] / (p1 * py));
  }
  return std::max(0.0, mi);
}

namespace {

void check_tree_args(int d, int k, int m) {
  if (d < 2 || m < 1 || k < m) throw input_error("tree probability needs d >= 2 and 1 <= m <= k");
}

}  // namespace

double tree_probability_exact(const LayerSchedule& schedule, int d, int k, int m) {
  check_tree_args(d, k, m);
  double p = 1.0;
  double count = 1.0;
  for (int r = 1; r <= m; ++r) {
    count *= d;
    const double width = static_cast<double>(schedule.layer_size(k - r));
    if (count > width) return 0.0;
    for (double s = 1.0; s < count; s += 1.0) p *= 1.0 - s / width;
  }
  return p;
}

double tree_probability_lower_bound(const LayerSchedule& schedule, int d, int k, int m) {
  check_tree_args(d, k, m);
  double r = static_cast<double>(schedule.layer_size(k - m));
  for (int i = k - m; i < k; ++i) r = std::min(r, static_cast<double>(schedule.layer_size(i)));
  const double d2 = static_cast<double>(d) * d;
  return 1.0 - d2 / (2.0 * (d2 - 1.0)) * std::pow(d2, m) / r;
}

}  // namespace bcast
