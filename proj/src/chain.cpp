#include "bcast/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "bcast/gfun.hpp"

namespace bcast {

namespace {

constexpr double flush_floor = 1e-300;
constexpr double drift_limit = 1e-9;

std::vector<double> log_factorials(std::int64_t n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t i = 1; i <= n; ++i)
    lf[static_cast<std::size_t>(i)] = lf[static_cast<std::size_t>(i - 1)] + std::log(static_cast<double>(i));
  return lf;
}

// Binomial(n, p) pmf from a log-factorial table.
std::vector<double> binomial_row(std::int64_t n, double p, const std::vector<double>& lf) {
  std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
  if (p <= 0.0) {
    row[0] = 1.0;
    return row;
  }
  if (p >= 1.0) {
    row[static_cast<std::size_t>(n)] = 1.0;
    return row;
  }
  const double lp = std::log(p), lq = std::log1p(-p);
  for (std::int64_t m = 0; m <= n; ++m) {
    double v = lf[static_cast<std::size_t>(n)] - lf[static_cast<std::size_t>(m)] -
               lf[static_cast<std::size_t>(n - m)] + static_cast<double>(m) * lp +
               static_cast<double>(n - m) * lq;
    row[static_cast<std::size_t>(m)] = std::exp(v);
  }
  return row;
}

void flush_and_renormalize(std::vector<double>& probs) {
  double s = 0.0;
  for (auto& v : probs) {
    if (v < flush_floor) v = 0.0;
    s += v;
  }
  if (!(std::abs(s - 1.0) < drift_limit)) {
    std::ostringstream msg;
    msg << "probability mass drifted to " << s;
    throw domain_error(msg.str());
  }
  for (auto& v : probs) v /= s;
}

}  // namespace

SigmaDistribution SigmaDistribution::point_mass(int level, std::int64_t size, std::int64_t ones) {
  if (size < 1 || ones < 0 || ones > size) throw input_error("point mass out of range");
  SigmaDistribution d;
  d.level = level;
  d.size = size;
  d.probs.assign(static_cast<std::size_t>(size) + 1, 0.0);
  d.probs[static_cast<std::size_t>(ones)] = 1.0;
  return d;
}

double SigmaDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    m += probs[i] * static_cast<double>(i) / static_cast<double>(size);
  return m;
}

double SigmaDistribution::total() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

ChainFamily ChainFamily::majority(int d, LayerSchedule schedule, NoiseLevel delta) {
  if (d < 1) throw input_error("majority degree must be >= 1");
  return ChainFamily{FamilyKind::MajorityRandomDag, d, std::move(schedule), delta};
}

ChainFamily ChainFamily::andor(LayerSchedule schedule, NoiseLevel delta) {
  return ChainFamily{FamilyKind::AndOrRandomDag, 2, std::move(schedule), delta};
}

ChainFamily ChainFamily::unbounded(LayerSchedule schedule, NoiseLevel delta) {
  return ChainFamily{FamilyKind::UnboundedMajority, 0, std::move(schedule), delta};
}

double ChainFamily::success_probability(int target, std::int64_t ones, std::int64_t prev_size) const {
  const double sigma = static_cast<double>(ones) / static_cast<double>(prev_size);
  const double dl = delta.value();
  switch (kind) {
    case FamilyKind::MajorityRandomDag:
      return majority_g(sigma, dl, degree);
    case FamilyKind::AndOrRandomDag:
      return target % 2 == 0 ? andor_g0(sigma, dl) : andor_g1(sigma, dl);
    case FamilyKind::UnboundedMajority:
      return unbounded_transition(ones, dl, prev_size);
  }
  return 0.0;
}

double ChainFamily::lipschitz() const {
  switch (kind) {
    case FamilyKind::MajorityRandomDag:
      return lipschitz_maj(delta.value(), degree);
    case FamilyKind::AndOrRandomDag:
      return lipschitz_andor(delta.value());
    case FamilyKind::UnboundedMajority:
      return -1.0;
  }
  return -1.0;
}

bool ChainFamily::reported_level(int k) const {
  return kind != FamilyKind::AndOrRandomDag || k % 2 == 0;
}

SigmaDistribution step(const SigmaDistribution& dist, const ChainFamily& family) {
  const int target = dist.level + 1;
  const std::int64_t prev = dist.size;
  if (prev != family.schedule.layer_size(dist.level))
    throw input_error("distribution size does not match the schedule");
  const std::int64_t next = family.schedule.layer_size(target);
  const auto lf = log_factorials(next);
  SigmaDistribution out;
  out.level = target;
  out.size = next;
  out.probs.assign(static_cast<std::size_t>(next) + 1, 0.0);
  for (std::int64_t m = 0; m <= prev; ++m) {
    const double w = dist.probs[static_cast<std::size_t>(m)];
    if (w == 0.0) continue;
    const auto row = binomial_row(next, family.success_probability(target, m, prev), lf);
    for (std::size_t j = 0; j < row.size(); ++j) out.probs[j] += w * row[j];
  }
  flush_and_renormalize(out.probs);
  return out;
}

std::vector<SigmaPair> evolve_pairs(const ChainFamily& family, int depth) {
  if (depth < 0) throw input_error("depth must be non-negative");
  std::vector<SigmaPair> pairs;
  pairs.reserve(static_cast<std::size_t>(depth) + 1);
  pairs.push_back({SigmaDistribution::point_mass(0, 1, 1), SigmaDistribution::point_mass(0, 1, 0)});
  for (int k = 1; k <= depth; ++k) {
    const auto& last = pairs.back();
    SigmaPair next{step(last.plus, family), step(last.minus, family)};
    pairs.push_back(std::move(next));
  }
  return pairs;
}

SigmaPair evolve_pair(const ChainFamily& family, int depth) {
  if (depth < 0) throw input_error("depth must be non-negative");
  SigmaPair pair{SigmaDistribution::point_mass(0, 1, 1), SigmaDistribution::point_mass(0, 1, 0)};
  for (int k = 1; k <= depth; ++k) {
    pair.plus = step(pair.plus, family);
    pair.minus = step(pair.minus, family);
  }
  return pair;
}

double tv_distance(const SigmaDistribution& p, const SigmaDistribution& q) {
  if (p.probs.size() != q.probs.size()) throw input_error("distributions have different supports");
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) s += std::abs(p.probs[i] - q.probs[i]);
  return 0.5 * s;
}

double tv_distance(const SigmaPair& pair) { return tv_distance(pair.plus, pair.minus); }

double decoder_error(const SigmaPair& pair, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw input_error("threshold must lie in (0, 1)");
  const auto& p = pair.plus;
  const auto& q = pair.minus;
  if (p.probs.size() != q.probs.size()) throw input_error("distributions have different supports");
  double miss = 0.0, false_alarm = 0.0;
  for (std::size_t m = 0; m < p.probs.size(); ++m) {
    // sigma >= t  <=>  m >= t L, compared without division
    const bool decide_one = static_cast<double>(m) >= threshold * static_cast<double>(p.size) - 1e-12;
    if (decide_one)
      false_alarm += q.probs[m];
    else
      miss += p.probs[m];
  }
  return 0.5 * miss + 0.5 * false_alarm;
}

double ml_error_on_sigma(const SigmaPair& pair) { return 0.5 * (1.0 - tv_distance(pair)); }

double unbounded_transition(std::int64_t ones, double delta, std::int64_t prev_size) {
  if (prev_size < 1) throw input_error("previous level size must be >= 1");
  if (ones < 0 || ones > prev_size) throw input_error("number of ones out of range");
  if (!(delta >= 0.0 && delta <= 0.5)) throw input_error("noise level must lie in [0, 1/2]");
  const auto lf = log_factorials(prev_size);
  const auto a = binomial_row(ones, 1.0 - delta, lf);
  const auto b = binomial_row(prev_size - ones, delta, lf);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (2 * static_cast<std::int64_t>(i + j) >= prev_size) s += a[i] * b[j];
    }
  }
  return std::min(1.0, s);
}

double unbounded_transition_sigma(double sigma, double delta, std::int64_t prev_size) {
  if (prev_size < 1) throw input_error("previous level size must be >= 1");
  const double x = sigma * static_cast<double>(prev_size);
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9 || r < 0 || r > static_cast<double>(prev_size))
    throw input_error("sigma * L_prev must be an integer in [0, L_prev]");
  return unbounded_transition(static_cast<std::int64_t>(r), delta, prev_size);
}

double tv_bound(const ChainFamily& family, int k) {
  if (k < 0) throw input_error("depth must be non-negative");
  const double width = static_cast<double>(family.schedule.layer_size(k));
  switch (family.kind) {
    case FamilyKind::MajorityRandomDag:
      return std::min(1.0, width * std::pow(family.lipschitz(), k));
    case FamilyKind::AndOrRandomDag: {
      if (k % 2 != 0) return -1.0;
      double prod = 1.0;
      const double dl = family.lipschitz();
      for (int i = 1; 2 * i <= k; ++i)
        prod *= dl + 2.0 / static_cast<double>(family.schedule.layer_size(2 * i - 1));
      return std::min(1.0, width * prod);
    }
    case FamilyKind::UnboundedMajority:
      return -1.0;
  }
  return -1.0;
}

std::vector<ChainRow> chain_table(const ChainFamily& family, int depth, double threshold,
                                  bool include_odd_levels) {
  double t = threshold;
  if (t <= 0.0) {
    t = 0.5;
    if (family.kind == FamilyKind::AndOrRandomDag) {
      const auto fp = fixed_points_andor(family.delta.value());
      t = fp.points[fp.size() == 3 ? 1 : 0];
    }
  }
  std::vector<ChainRow> rows;
  SigmaPair pair{SigmaDistribution::point_mass(0, 1, 1), SigmaDistribution::point_mass(0, 1, 0)};
  for (int k = 0; k <= depth; ++k) {
    if (k > 0) {
      pair.plus = step(pair.plus, family);
      pair.minus = step(pair.minus, family);
    }
    if (!include_odd_levels && !family.reported_level(k)) continue;
    rows.push_back({k, pair.plus.size, tv_distance(pair), decoder_error(pair, t),
                    ml_error_on_sigma(pair), tv_bound(family, k)});
  }
  return rows;
}

std::vector<double> sample_chain_path(const ChainFamily& family, int depth, std::uint64_t seed,
                                      int root_bit) {
  if (depth < 0) throw input_error("depth must be non-negative");
  if (root_bit != 0 && root_bit != 1) throw input_error("root bit must be 0 or 1");
  Rng rng = stream_rng(seed, 0);
  std::vector<double> path;
  path.reserve(static_cast<std::size_t>(depth) + 1);
  std::int64_t ones = root_bit;
  std::int64_t prev = 1;
  path.push_back(static_cast<double>(root_bit));
  for (int k = 1; k <= depth; ++k) {
    const std::int64_t next = family.schedule.layer_size(k);
    const double p = family.success_probability(k, ones, prev);
    std::binomial_distribution<std::int64_t> draw(next, std::clamp(p, 0.0, 1.0));
    ones = draw(rng);
    prev = next;
    path.push_back(static_cast<double>(ones) / static_cast<double>(next));
  }
  return path;
}

}  // namespace bcast
