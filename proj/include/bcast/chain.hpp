#pragma once

#include <cstdint>
#include <vector>

#include "bcast/core.hpp"

namespace bcast {

/// Law of sigma_k = (number of ones in level k) / L_k; probs[m] = P(L_k sigma_k = m).
struct SigmaDistribution {
  int level = 0;
  std::int64_t size = 1;
  std::vector<double> probs;

  static SigmaDistribution point_mass(int level, std::int64_t size, std::int64_t ones);
  double mean() const;
  double total() const;
};

enum class FamilyKind { MajorityRandomDag, AndOrRandomDag, UnboundedMajority };

struct ChainFamily {
  FamilyKind kind;
  int degree;  // arity of the majority gate; 2 for AND-OR; unused for unbounded
  LayerSchedule schedule;
  NoiseLevel delta;

  static ChainFamily majority(int d, LayerSchedule schedule, NoiseLevel delta);
  static ChainFamily andor(LayerSchedule schedule, NoiseLevel delta);
  static ChainFamily unbounded(LayerSchedule schedule, NoiseLevel delta);

  // P(a vertex of level `target` outputs 1 | L_{target-1} sigma_{target-1} = ones).
  double success_probability(int target, std::int64_t ones, std::int64_t prev_size) const;
  // Lipschitz constant of the level-to-level mean map (two-level map for AND-OR).
  double lipschitz() const;
  // Levels reported by default: every level, except AND-OR which reports even levels.
  bool reported_level(int k) const;
};

SigmaDistribution step(const SigmaDistribution& dist, const ChainFamily& family);

struct SigmaPair {
  SigmaDistribution plus;   // root bit 1
  SigmaDistribution minus;  // root bit 0
};

SigmaPair evolve_pair(const ChainFamily& family, int depth);
// Pairs for every level 0..depth.
std::vector<SigmaPair> evolve_pairs(const ChainFamily& family, int depth);

double tv_distance(const SigmaDistribution& p, const SigmaDistribution& q);
double tv_distance(const SigmaPair& pair);

// 1/2 P+(sigma < t) + 1/2 P-(sigma >= t)
double decoder_error(const SigmaPair& pair, double threshold);
double ml_error_on_sigma(const SigmaPair& pair);

// P(Bin(ones, 1-delta) + Bin(L - ones, delta) >= L/2)
double unbounded_transition(std::int64_t ones, double delta, std::int64_t prev_size);
double unbounded_transition_sigma(double sigma, double delta, std::int64_t prev_size);

// Upper bound on the TV distance at level k: L_k D^k for majority,
// L_{2j} prod_{i<=j} (D + 2/L_{2i-1}) at even level 2j for AND-OR. Negative when no bound applies.
double tv_bound(const ChainFamily& family, int k);

struct ChainRow {
  int k;
  std::int64_t width;
  double tv;
  double decoder_error;
  double ml_error;
  double tv_bound;  // negative when unavailable
};

// Per-level exact quantities. The decoder threshold defaults to 1/2 for majority
// families and to the central AND-OR fixed point t for AND-OR.
std::vector<ChainRow> chain_table(const ChainFamily& family, int depth, double threshold = -1.0,
                                  bool include_odd_levels = false);

// sigma_0..sigma_depth drawn from the Markov kernel (binomial draws).
std::vector<double> sample_chain_path(const ChainFamily& family, int depth, std::uint64_t seed,
                                      int root_bit = 1);

}  // namespace bcast
