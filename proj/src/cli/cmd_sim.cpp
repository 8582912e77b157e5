#include <algorithm>
#include <memory>

#include "bcast/bounds.hpp"
#include "bcast/errors.hpp"
#include "bcast/gfun.hpp"
#include "bcast/random.hpp"
#include "bcast/sim.hpp"
#include "commands.hpp"

namespace bcast::cli {

namespace {

struct ModelArgs {
  std::string model = "random";
  std::string dag_path;
  std::string family = "majority";
  int d = 3;
  std::string schedule = "const:16";
  double delta = 0.1;
  int depth = 20;
  std::int64_t trials = 10000;
};

void add_model_options(CLI::App* sub, ModelArgs& a) {
  sub->add_option("--model", a.model, "random resamples the DAG per trial; fixed keeps one")
      ->check(CLI::IsMember({"random", "fixed"}));
  sub->add_option("--dag", a.dag_path, "DAG file for the fixed model; sampled from the seed when absent");
  sub->add_option("--family", a.family, "Gate family")->check(CLI::IsMember({"majority", "andor"}));
  sub->add_option("--d", a.d, "Indegree (forced to 2 for andor)");
  sub->add_option("--schedule", a.schedule);
  sub->add_option("--delta", a.delta);
  sub->add_option("--depth", a.depth);
  sub->add_option("--trials", a.trials);
}

McConfig model_config(Context& ctx, const ModelArgs& a) {
  if (a.trials < 1) throw usage_error("--trials must be at least 1");
  if (a.depth < 1) throw usage_error("--depth must be at least 1");
  McConfig c;
  c.d = family_degree(a.family, a.d);
  c.schedule = schedule_arg(a.schedule);
  c.rules = rules_for(a.family, c.d);
  c.delta = delta_arg(a.delta);
  c.depth = a.depth;
  c.trials = a.trials;
  c.seed = ctx.common.seed;
  c.threads = ctx.threads();
  if (a.model == "fixed") {
    c.model = DagModel::FixedDag;
    if (!a.dag_path.empty()) {
      c.dag = dag_from_string(read_file(a.dag_path));
    } else {
      Rng rng = stream_rng(ctx.common.seed, 0xda9);
      c.dag = sample_random_dag(c.schedule, c.d, a.depth, rng);
    }
  } else if (!a.dag_path.empty()) {
    throw usage_error("--dag needs --model fixed");
  }
  return c;
}

struct SimulateArgs {
  ModelArgs model;
  std::string decoder = "majority";
  double threshold = -1.0;
};

}  // namespace

Report estimate_report(Context& ctx, const McEstimate& e) {
  auto r = ctx.report();
  const double lo = std::max(0.0, e.estimate - e.half_width);
  const double hi = std::min(1.0, e.estimate + e.half_width);
  r.table.columns = {"estimate", "half_width", "ci_low", "ci_high", "errors", "trials", "seed"};
  r.table.add({e.estimate, e.half_width, lo, hi, e.errors, e.trials, std::to_string(ctx.common.seed)});
  r.extra["estimate"] = cell_json(e.estimate);
  r.extra["ci"] = {cell_json(lo), cell_json(hi)};
  r.extra["seed"] = ctx.common.seed;
  return r;
}

namespace {

void run_simulate(Context& ctx, const SimulateArgs& a) {
  auto c = model_config(ctx, a.model);
  if (a.decoder == "majority") {
    c.decoder = Decoder::majority();
  } else if (a.decoder == "single") {
    c.decoder = Decoder::single_vertex();
  } else {
    double t = a.threshold;
    if (t <= 0.0) {
      t = 0.5;
      if (a.model.family == "andor") {
        auto fp = fixed_points_andor(a.model.delta);
        t = fp.points[fp.size() == 3 ? 1 : 0];
      }
    }
    c.decoder = Decoder::biased(t);
  }
  ctx.emit(estimate_report(ctx, mc_error_estimate(c)));
}

void run_coupled(Context& ctx, const ModelArgs& a) {
  auto c = model_config(ctx, a);
  auto s = coupled_statistics(c);
  auto r = ctx.report();
  r.summary = {{"trials", s.trials}, {"violations", s.violations}, {"half_width", s.half_width}};
  r.table.columns = {"k", "mean_sigma_gap", "disagreement", "mean_vertex_gap"};
  for (std::size_t k = 0; k < s.mean_sigma_gap.size(); ++k)
    r.table.add({static_cast<std::int64_t>(k), s.mean_sigma_gap[k], s.disagreement[k], s.mean_vertex_gap[k]});
  ctx.emit(std::move(r));
}

struct PercolateArgs {
  int d = 3;
  std::string schedule = "const:20";
  double delta = 0.2;
  int depth = 30;
  std::int64_t trials = 10000;
};

void run_percolate(Context& ctx, const PercolateArgs& a) {
  if (a.trials < 1) throw usage_error("--trials must be at least 1");
  if (a.depth < 1) throw usage_error("--depth must be at least 1");
  if (a.d < 2) throw usage_error("percolation needs d >= 2");
  auto schedule = schedule_arg(a.schedule);
  auto delta = delta_arg(a.delta);
  auto p = percolation_site_sim(schedule, a.d, delta, a.depth, a.trials, ctx.common.seed, ctx.threads());
  auto r = ctx.report();
  r.summary = {{"trials", p.trials},
               {"half_width", p.half_width},
               {"difference_half_width", p.difference_half_width},
               {"critical", site_is_critical(delta, a.d)}};
  r.table.columns = {"k", "width", "mean_lambda", "mean_recursion", "envelope", "hit_frequency"};
  for (int k = 0; k <= a.depth; ++k) {
    Cell env = k >= 1 ? Cell{site_critical_envelope(delta, a.d, k)} : Cell{};
    r.table.add({std::int64_t{k}, schedule.layer_size(k), p.mean_lambda[k], p.mean_recursion[k], env,
                 p.hit_frequency[k]});
  }
  ctx.emit(std::move(r));
}

}  // namespace

void add_sim_commands(CLI::App& app, Commands& commands) {
  {
    auto a = std::make_shared<SimulateArgs>();
    auto* sub = app.add_subcommand("simulate", "Monte Carlo decoder error");
    add_model_options(sub, a->model);
    sub->add_option("--decoder", a->decoder)->check(CLI::IsMember({"majority", "biased", "single"}));
    sub->add_option("--threshold", a->threshold, "Biased decoder threshold; negative picks the family default");
    commands.push_back({sub, [a](Context& ctx) { run_simulate(ctx, *a); }});
  }
  {
    auto a = std::make_shared<ModelArgs>();
    auto* sub = app.add_subcommand("coupled", "Monotone coupling of the two root values");
    a->trials = 1000;
    add_model_options(sub, *a);
    commands.push_back({sub, [a](Context& ctx) { run_coupled(ctx, *a); }});
  }
  {
    auto a = std::make_shared<PercolateArgs>();
    auto* sub = app.add_subcommand("percolate", "Site percolation on the random DAG");
    sub->add_option("--d", a->d);
    sub->add_option("--schedule", a->schedule);
    sub->add_option("--delta", a->delta);
    sub->add_option("--depth", a->depth);
    sub->add_option("--trials", a->trials);
    commands.push_back({sub, [a](Context& ctx) { run_percolate(ctx, *a); }});
  }
}

}  // namespace bcast::cli
