#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcast/core.hpp"
#include "bcast/sim.hpp"
#include "report.hpp"

namespace bcast::cli {

// Bad invocation discovered after parsing; maps to exit code 2.
class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string format = "csv";
  std::string out;
  std::string config;
};

class Context {
 public:
  Context(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  Common common;
  std::string command;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::ostream& err() { return err_; }
  // Report goes to --out when given, else to standard output.
  void emit(Report report);
  // Payload text (graph or DAG file) goes to --out or standard output; the report
  // then goes to standard output, or to standard error when the payload took it.
  void emit_payload(const std::string& payload, Report report);
  Report report() const;
  int threads() const;

 private:
  std::ostream& out_;
  std::ostream& err_;
};

struct Command {
  CLI::App* app;
  std::function<void(Context&)> run;
};

using Commands = std::vector<Command>;

void add_analysis_commands(CLI::App& app, Commands& commands);
void add_sim_commands(CLI::App& app, Commands& commands);
void add_expander_commands(CLI::App& app, Commands& commands);
void add_sweep_command(CLI::App& app, Commands& commands);

// Shared parsing helpers.
LayerSchedule schedule_arg(const std::string& text);
NoiseLevel delta_arg(double delta);
// AND-OR alternates AND (even levels) and OR (odd levels) with fan-in 2.
RulePlan rules_for(const std::string& family, int d);
int family_degree(const std::string& family, int d);
// One-row report of a Monte Carlo error estimate with its 99% interval.
Report estimate_report(Context& ctx, const McEstimate& e);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace bcast::cli
