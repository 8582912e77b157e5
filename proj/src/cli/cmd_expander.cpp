#include <algorithm>
#include <cmath>
#include <memory>

#include "bcast/errors.hpp"
#include "bcast/expander.hpp"
#include "bcast/sim.hpp"
#include "commands.hpp"

namespace bcast::cli {

namespace {

struct GenArgs {
  std::int64_t n = 32;
  int d = 5;
};

struct ExpansionArgs {
  std::int64_t s = -1;         // negative: floor(n d^(-6/5))
  double epsilon = 0.5;
  std::int64_t required = -1;  // negative: ceil((1 - epsilon) d s)
};

struct VerifyArgs {
  std::string graph;
  ExpansionArgs expansion;
};

struct SearchArgs {
  GenArgs size;
  ExpansionArgs expansion;
};

struct AssembleArgs {
  std::int64_t base_width = 40;
  int d = 3;
  int depth = 50;
  double m = 0.0;  // 0: M from N and d
  std::string provider = "sampled";
};

struct ExpanderSimArgs {
  AssembleArgs dag;
  double delta = 0.05;
  std::int64_t trials = 10000;
};

void add_expansion_options(CLI::App* sub, ExpansionArgs& a) {
  sub->add_option("--s", a.s, "Subset size; negative uses floor(n d^(-6/5))");
  sub->add_option("--epsilon", a.epsilon, "Required neighbourhood is ceil((1 - epsilon) d s)");
  sub->add_option("--required", a.required, "Explicit neighbourhood requirement; negative uses --epsilon");
}

void add_assemble_options(CLI::App* sub, AssembleArgs& a) {
  sub->add_option("--base-width", a.base_width, "N");
  sub->add_option("--d", a.d);
  sub->add_option("--depth", a.depth);
  sub->add_option("--m", a.m, "Schedule constant M; 0 derives it from N and d");
  sub->add_option("--provider", a.provider)->check(CLI::IsMember({"sampled", "deterministic"}));
}

std::pair<std::int64_t, std::int64_t> expansion_targets(const ExpansionArgs& a, std::int64_t n, int d) {
  const std::int64_t s = a.s >= 0 ? a.s : expansion_subset_size(n, d);
  if (s < 1 || s > n) throw usage_error("subset size must lie in [1, n], got " + std::to_string(s));
  if (a.required >= 0) return {s, a.required};
  if (!(a.epsilon >= 0.0 && a.epsilon <= 1.0)) throw usage_error("--epsilon must lie in [0, 1]");
  return {s, static_cast<std::int64_t>(std::ceil((1.0 - a.epsilon) * d * s - 1e-9))};
}

std::string join(const std::vector<std::uint32_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

void run_gen(Context& ctx, const GenArgs& a) {
  auto g = sample_regular_bipartite(a.n, a.d, ctx.common.seed);
  auto r = ctx.report();
  r.table.columns = {"n", "d", "regular"};
  r.table.add({g.n, std::int64_t{g.d}, g.regular()});
  ctx.emit_payload(graph_to_string(g), std::move(r));
}

void run_verify(Context& ctx, const VerifyArgs& a) {
  if (a.graph.empty()) throw usage_error("--graph is required");
  auto g = graph_from_string(read_file(a.graph));
  auto [s, required] = expansion_targets(a.expansion, g.n, g.d);
  auto cert = verify_expansion(g, s, required, ctx.threads());
  auto r = ctx.report();
  r.table.columns = {"n", "d", "s", "min_neighborhood", "required", "pass", "witness"};
  r.table.add({g.n, std::int64_t{g.d}, cert.subset_size, cert.min_neighborhood, cert.required, cert.pass,
               join(cert.witness)});
  ctx.emit(std::move(r));
}

void run_search(Context& ctx, const SearchArgs& a) {
  auto [s, required] = expansion_targets(a.expansion, a.size.n, a.size.d);
  auto g = deterministic_search(a.size.n, a.size.d, s, required);
  auto cert = verify_expansion(g, s, required);
  auto r = ctx.report();
  r.table.columns = {"n", "d", "s", "min_neighborhood", "required"};
  r.table.add({g.n, std::int64_t{g.d}, s, cert.min_neighborhood, required});
  ctx.emit_payload(graph_to_string(g), std::move(r));
}

GraphProvider provider_for(const Context& ctx, const std::string& name) {
  return name == "deterministic" ? GraphProvider::deterministic() : GraphProvider::sampled(ctx.common.seed);
}

LayeredDag assemble(const Context& ctx, const AssembleArgs& a, LayerSchedule& schedule) {
  if (a.depth < 1) throw usage_error("--depth must be at least 1");
  schedule = a.m > 0.0 ? LayerSchedule::expander_with_m(a.base_width, a.m)
                       : LayerSchedule::expander(a.base_width, a.d);
  return assemble_expander_dag(schedule, a.d, a.depth, provider_for(ctx, a.provider));
}

void run_assemble(Context& ctx, const AssembleArgs& a) {
  LayerSchedule schedule = LayerSchedule::constant(1);
  auto dag = assemble(ctx, a, schedule);
  std::int64_t max_out = 0;
  int max_in = 0;
  for (int k = 1; k <= dag.depth(); ++k) {
    max_in = std::max(max_in, dag.indegree(k));
    if (k < dag.depth())
      for (auto v : dag.outdegrees(k)) max_out = std::max(max_out, v);
  }
  auto r = ctx.report();
  r.table.columns = {"depth", "max_width", "max_indegree", "max_outdegree", "schedule"};
  r.table.add({std::int64_t{dag.depth()}, schedule.max_width(a.depth), std::int64_t{max_in}, max_out,
               schedule.describe()});
  ctx.emit_payload(dag_to_string(dag), std::move(r));
}

void run_expander_sim(Context& ctx, const ExpanderSimArgs& a) {
  if (a.trials < 1) throw usage_error("--trials must be at least 1");
  McConfig c;
  c.dag = assemble(ctx, a.dag, c.schedule);
  c.model = DagModel::FixedDag;
  c.decoder = Decoder::majority();
  c.d = a.dag.d;
  c.rules = RulePlan::expander(a.dag.d);
  c.delta = delta_arg(a.delta);
  c.depth = a.dag.depth;
  c.trials = a.trials;
  c.seed = ctx.common.seed;
  c.threads = ctx.threads();
  ctx.emit(estimate_report(ctx, mc_error_estimate(c)));
}

}  // namespace

void add_expander_commands(CLI::App& app, Commands& commands) {
  auto* group = app.add_subcommand("expander", "Bipartite expanders and the expander DAG");
  group->require_subcommand(1);
  {
    auto a = std::make_shared<GenArgs>();
    auto* sub = group->add_subcommand("gen", "Sample a d-regular bipartite graph");
    sub->add_option("--n", a->n);
    sub->add_option("--d", a->d);
    commands.push_back({sub, [a](Context& ctx) { run_gen(ctx, *a); }});
  }
  {
    auto a = std::make_shared<VerifyArgs>();
    auto* sub = group->add_subcommand("verify", "Exhaustive expansion check of a graph file");
    sub->add_option("--graph", a->graph, "Graph file");
    add_expansion_options(sub, a->expansion);
    commands.push_back({sub, [a](Context& ctx) { run_verify(ctx, *a); }});
  }
  {
    auto a = std::make_shared<SearchArgs>();
    auto* sub = group->add_subcommand("search", "First graph in lexicographic order that expands");
    sub->add_option("--n", a->size.n);
    sub->add_option("--d", a->size.d);
    add_expansion_options(sub, a->expansion);
    commands.push_back({sub, [a](Context& ctx) { run_search(ctx, *a); }});
  }
  {
    auto a = std::make_shared<AssembleArgs>();
    auto* sub = group->add_subcommand("assemble", "Build the expander DAG");
    add_assemble_options(sub, *a);
    commands.push_back({sub, [a](Context& ctx) { run_assemble(ctx, *a); }});
  }
  {
    auto a = std::make_shared<ExpanderSimArgs>();
    auto* sub = group->add_subcommand("simulate", "Majority decoder error on the expander DAG");
    add_assemble_options(sub, a->dag);
    sub->add_option("--delta", a->delta);
    sub->add_option("--trials", a->trials);
    commands.push_back({sub, [a](Context& ctx) { run_expander_sim(ctx, *a); }});
  }
}

}  // namespace bcast::cli
