#include <cmath>
#include <memory>

#include "bcast/bounds.hpp"
#include "bcast/chain.hpp"
#include "bcast/errors.hpp"
#include "bcast/gfun.hpp"
#include "commands.hpp"

namespace bcast::cli {

namespace {

constexpr std::int64_t max_chain_width = 4096;

// "a:b" or "a"; a > b gives an empty range.
std::pair<int, int> parse_range(const std::string& text) {
  auto parse_one = [&](const std::string& part) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw usage_error("malformed degree range '" + text + "'");
    return v;
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    int v = parse_one(text);
    return {v, v};
  }
  return {parse_one(text.substr(0, colon)), parse_one(text.substr(colon + 1))};
}

Cell maybe(double v) { return v < 0 ? Cell{} : Cell{v}; }

struct ThresholdArgs {
  std::string range = "2:10";
};

void run_thresholds(Context& ctx, const ThresholdArgs& a) {
  auto [lo, hi] = parse_range(a.range);
  if (lo <= hi && lo < 2) throw usage_error("degrees start at 2");
  auto r = ctx.report();
  r.table.columns = {"d", "delta_maj", "delta_es", "delta_bond", "delta_andor"};
  for (int d = lo; d <= hi; ++d) {
    Cell maj = d >= 3 ? Cell{delta_maj(d)} : Cell{};
    r.table.add({std::int64_t{d}, maj, es_threshold(d), bond_threshold(d), delta_andor()});
  }
  ctx.emit(std::move(r));
}

struct FixedPointArgs {
  std::string family = "majority";
  int d = 3;
  std::vector<double> deltas{0.1};
};

void run_fixedpoints(Context& ctx, const FixedPointArgs& a) {
  auto r = ctx.report();
  r.table.columns = {"family", "d", "delta", "count", "index", "point", "derivative", "stable"};
  for (double delta : a.deltas) {
    if (!(delta >= 0.0 && delta < 0.5)) throw usage_error("noise levels must lie in [0, 1/2)");
    auto fp = a.family == "majority" ? fixed_points_maj(delta, a.d) : fixed_points_andor(delta);
    const int d = a.family == "majority" ? a.d : 2;
    for (std::size_t i = 0; i < fp.size(); ++i)
      r.table.add({a.family, std::int64_t{d}, delta, static_cast<std::int64_t>(fp.size()),
                   static_cast<std::int64_t>(i), fp.points[i], fp.derivative_at_each[i],
                   static_cast<bool>(fp.stable_flags[i])});
  }
  ctx.emit(std::move(r));
}

struct ChainArgs {
  std::string family = "majority";
  int d = 3;
  std::string schedule = "const:64";
  double delta = 0.1;
  int depth = 100;
  double threshold = -1.0;
  bool include_odd = false;
};

ChainFamily make_family(const std::string& family, int d, const LayerSchedule& schedule, NoiseLevel delta) {
  if (family == "majority") return ChainFamily::majority(d, schedule, delta);
  if (family == "andor") return ChainFamily::andor(schedule, delta);
  return ChainFamily::unbounded(schedule, delta);
}

void run_chain(Context& ctx, const ChainArgs& a) {
  if (a.depth < 0) throw usage_error("depth must be >= 0");
  auto schedule = schedule_arg(a.schedule);
  const auto widest = schedule.max_width(a.depth);
  if (widest > max_chain_width)
    throw size_error("chain width " + std::to_string(widest) + " exceeds the limit of " +
                     std::to_string(max_chain_width));
  auto family = make_family(a.family, a.d, schedule, delta_arg(a.delta));
  auto rows = chain_table(family, a.depth, a.threshold, a.include_odd);
  auto r = ctx.report();
  r.table.columns = {"k", "width", "tv", "decoder_error", "ml_error", "tv_bound"};
  for (const auto& row : rows)
    r.table.add({std::int64_t{row.k}, row.width, row.tv, row.decoder_error, row.ml_error, maybe(row.tv_bound)});
  ctx.emit(std::move(r));
}

struct BoundsArgs {
  int d = 3;
  double delta = 0.25;
  std::string schedule = "const:10";
  int depth = 10;
};

void run_bounds(Context& ctx, const BoundsArgs& a) {
  if (a.depth < 0) throw usage_error("depth must be >= 0");
  if (a.d < 2) throw usage_error("bounds need d >= 2");
  auto schedule = schedule_arg(a.schedule);
  const double delta = delta_arg(a.delta);
  auto r = ctx.report();
  auto u = unbounded_constants(delta);
  r.summary = {{"es_threshold", es_threshold(a.d)},
               {"bond_threshold", bond_threshold(a.d)},
               {"critical", site_is_critical(delta, a.d)},
               {"unbounded_a", u.a},
               {"unbounded_b", u.b}};
  r.table.columns = {"k", "width", "es_mi_bound", "site_recursion", "site_envelope", "slow_growth_limit",
                     "within_slow_growth"};
  double lambda = 1.0;
  for (int k = 0; k <= a.depth; ++k) {
    if (k > 0) lambda = site_recursion(lambda, delta, a.d);
    const auto width = schedule.layer_size(k);
    Cell envelope = k >= 1 ? Cell{site_critical_envelope(delta, a.d, k)} : Cell{};
    Cell limit, within;
    if (k >= 2) {
      const double lim = slow_growth_limit(delta, a.d, k);
      limit = lim;
      within = static_cast<double>(width) <= lim;
    }
    r.table.add({std::int64_t{k}, width, es_mi_bound(static_cast<double>(width), delta, a.d, k), lambda, envelope,
                 limit, within});
  }
  ctx.emit(std::move(r));
}

}  // namespace

void add_analysis_commands(CLI::App& app, Commands& commands) {
  {
    auto a = std::make_shared<ThresholdArgs>();
    auto* sub = app.add_subcommand("thresholds", "Noise thresholds per degree");
    sub->add_option("--d-range", a->range, "Degrees as lo:hi or a single d");
    commands.push_back({sub, [a](Context& ctx) { run_thresholds(ctx, *a); }});
  }
  {
    auto a = std::make_shared<FixedPointArgs>();
    auto* sub = app.add_subcommand("fixedpoints", "Fixed points of the majority or AND-OR map");
    sub->add_option("--family", a->family)->check(CLI::IsMember({"majority", "andor"}));
    sub->add_option("--d", a->d, "Majority arity");
    sub->add_option("--delta", a->deltas, "Noise levels")->delimiter(',');
    commands.push_back({sub, [a](Context& ctx) { run_fixedpoints(ctx, *a); }});
  }
  {
    auto a = std::make_shared<ChainArgs>();
    auto* sub = app.add_subcommand("chain", "Exact per-level chain quantities");
    sub->add_option("--family", a->family)->check(CLI::IsMember({"majority", "andor", "unbounded"}));
    sub->add_option("--d", a->d, "Majority arity");
    sub->add_option("--schedule", a->schedule, "const:L, log:C:Lmin, linear:a:b, expander:N:d, list:w1,w2,..");
    sub->add_option("--delta", a->delta, "Noise level");
    sub->add_option("--depth", a->depth);
    sub->add_option("--threshold", a->threshold, "Decoder threshold; negative picks the family default");
    sub->add_flag("--include-odd", a->include_odd, "Keep odd AND-OR levels");
    commands.push_back({sub, [a](Context& ctx) { run_chain(ctx, *a); }});
  }
  {
    auto a = std::make_shared<BoundsArgs>();
    auto* sub = app.add_subcommand("bounds", "Impossibility bounds per level");
    sub->add_option("--d", a->d);
    sub->add_option("--delta", a->delta);
    sub->add_option("--schedule", a->schedule);
    sub->add_option("--depth", a->depth);
    commands.push_back({sub, [a](Context& ctx) { run_bounds(ctx, *a); }});
  }
}

}  // namespace bcast::cli
