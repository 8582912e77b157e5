#include "bcast/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "bcast/errors.hpp"
#include "bcast/parallel.hpp"
#include "commands.hpp"

namespace bcast {

namespace cli {

void Context::emit(Report report) {
  const auto format = parse_format(common.format);
  if (common.out.empty()) {
    write_report(out_, report, format);
    return;
  }
  std::ostringstream text;
  write_report(text, report, format);
  write_file(common.out, text.str());
}

void Context::emit_payload(const std::string& payload, Report report) {
  const auto format = parse_format(common.format);
  if (common.out.empty()) {
    out_ << payload;
    write_report(err_, report, format);
    return;
  }
  write_file(common.out, payload);
  write_report(out_, report, format);
}

Report Context::report() const {
  Report r;
  r.command = command;
  r.metadata = metadata;
  return r;
}

int Context::threads() const { return resolve_threads(common.threads); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write " + path);
  out << text;
  if (!out) throw input_error("write failed for " + path);
}

LayerSchedule schedule_arg(const std::string& text) { return LayerSchedule::parse(text); }

NoiseLevel delta_arg(double delta) { return NoiseLevel(delta); }

RulePlan rules_for(const std::string& family, int d) {
  if (family == "majority") return RulePlan::uniform(ProcessingRule::majority(d));
  if (family == "andor") return RulePlan::alternating(ProcessingRule::and_gate(2), ProcessingRule::or_gate(2));
  throw usage_error("unknown rule family '" + family + "'");
}

int family_degree(const std::string& family, int d) { return family == "andor" ? 2 : d; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<CLI::App*> app_chain(CLI::App* leaf) {
  std::vector<CLI::App*> chain;
  for (auto* a = leaf; a != nullptr; a = a->get_parent()) chain.insert(chain.begin(), a);
  return chain;
}

// Values from the file fill options that were not given on the command line.
void apply_config(const std::string& path, const std::vector<CLI::App*>& chain) {
  std::istringstream in(read_file(path));
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw usage_error("config line " + std::to_string(number) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config")
      throw usage_error("config line " + std::to_string(number) + ": bad key '" + key + "'");
    CLI::Option* opt = nullptr;
    for (auto it = chain.rbegin(); it != chain.rend() && opt == nullptr; ++it)
      opt = (*it)->get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw usage_error("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::vector<std::pair<std::string, std::string>> resolved_config(const std::vector<CLI::App*>& chain) {
  std::vector<std::pair<std::string, std::string>> meta;
  meta.emplace_back("version", BCAST_VERSION);
  for (auto* app : chain) {
    for (const auto* opt : app->get_options()) {
      const auto name = opt->get_single_name();
      // threads and paths never change results
      if (name == "help" || name == "config" || name == "threads" || name == "out") continue;
      std::string value;
      if (opt->get_expected_max() == 0) {
        value = opt->count() > 0 ? "true" : "false";
      } else if (opt->count() > 0) {
        const auto& res = opt->results();
        for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
      } else {
        value = opt->get_default_str();
      }
      meta.emplace_back(name, value);
    }
  }
  return meta;
}

}  // namespace

}  // namespace cli

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli;
  CLI::App app{"Broadcasting a bit through layered noisy DAGs", "bcast"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx(out, err);
  auto& c = ctx.common;
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--threads", c.threads, "Worker threads, 0 for all cores");
  app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", c.out, "Write output to this path");
  app.add_option("--config", c.config, "key = value file; command line flags win");

  Commands commands;
  add_analysis_commands(app, commands);
  add_sim_commands(app, commands);
  add_expander_commands(app, commands);
  add_sweep_command(app, commands);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    const Command* selected = nullptr;
    for (const auto& cmd : commands)
      if (cmd.app->parsed()) selected = &cmd;
    if (selected == nullptr) throw usage_error("no command given");
    const auto chain = app_chain(selected->app);
    if (!c.config.empty()) apply_config(c.config, chain);
    parse_format(c.format);
    if (c.threads < 0) throw usage_error("--threads must be >= 0");
    std::string name;
    for (std::size_t i = 1; i < chain.size(); ++i) name += (i > 1 ? " " : "") + chain[i]->get_name();
    ctx.command = name;
    ctx.metadata = resolved_config(chain);
    selected->run(ctx);
    return exit_ok;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const size_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_guard;
  } catch (const not_found_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_infeasible;
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const input_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const domain_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const config_error& e) {
    err << "configuration error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace bcast
