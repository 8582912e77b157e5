#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "bcast/chain.hpp"
#include "bcast/errors.hpp"
#include "bcast/random.hpp"
#include "bcast/sim.hpp"
#include "commands.hpp"

namespace bcast::cli {

namespace {

constexpr std::int64_t max_chain_width = 4096;

struct Grid {
  std::string mode = "chain";
  std::string family = "majority";
  std::vector<double> deltas;
  std::vector<int> degrees{3};
  std::vector<std::int64_t> widths;
  std::vector<int> depths;
  std::int64_t trials = 10000;
  std::string decoder = "majority";
  double threshold = -1.0;
};

struct GridCell {
  std::size_t index;
  double delta;
  int d;
  std::int64_t width;
  int depth;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_line(int line, const std::string& what) {
  throw usage_error("grid line " + std::to_string(line) + ": " + what);
}

template <class T>
T parse_number(const std::string& text, int line) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (!in || !in.eof()) bad_line(line, "bad number '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& value, int line) {
  std::vector<T> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number<T>(trim(item), line));
  if (out.empty()) bad_line(line, "empty list");
  return out;
}

Grid parse_grid(const std::string& text) {
  Grid g;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) bad_line(line, "expected key = value");
    const auto key = trim(raw.substr(0, eq));
    const auto value = trim(raw.substr(eq + 1));
    if (!seen.insert(key).second) bad_line(line, "duplicate key '" + key + "'");
    if (value.empty()) bad_line(line, "missing value for '" + key + "'");
    if (key == "mode") {
      if (value != "chain" && value != "simulate") bad_line(line, "mode must be chain or simulate");
      g.mode = value;
    } else if (key == "family") {
      if (value != "majority" && value != "andor" && value != "unbounded")
        bad_line(line, "family must be majority, andor or unbounded");
      g.family = value;
    } else if (key == "delta") {
      g.deltas = parse_list<double>(value, line);
      for (double v : g.deltas)
        if (!(v > 0.0 && v < 0.5)) bad_line(line, "noise levels must lie in (0, 1/2)");
    } else if (key == "d") {
      g.degrees = parse_list<int>(value, line);
    } else if (key == "width") {
      g.widths = parse_list<std::int64_t>(value, line);
      for (auto w : g.widths)
        if (w < 1) bad_line(line, "widths must be >= 1");
    } else if (key == "depth") {
      g.depths = parse_list<int>(value, line);
      for (auto k : g.depths)
        if (k < 1) bad_line(line, "depths must be >= 1");
    } else if (key == "trials") {
      g.trials = parse_number<std::int64_t>(value, line);
      if (g.trials < 1) bad_line(line, "trials must be >= 1");
    } else if (key == "decoder") {
      if (value != "majority" && value != "biased" && value != "single")
        bad_line(line, "decoder must be majority, biased or single");
      g.decoder = value;
    } else if (key == "threshold") {
      g.threshold = parse_number<double>(value, line);
    } else {
      bad_line(line, "unknown key '" + key + "'");
    }
  }
  for (const char* key : {"delta", "width", "depth"})
    if (!seen.count(key)) throw usage_error(std::string("grid: missing key '") + key + "'");
  if (g.mode == "simulate" && g.family == "unbounded")
    throw usage_error("grid: the unbounded family has no simulator");
  return g;
}

std::vector<GridCell> cells_of(const Grid& g) {
  std::vector<GridCell> cells;
  for (double delta : g.deltas)
    for (int d : g.degrees)
      for (auto w : g.widths)
        for (int k : g.depths) cells.push_back({cells.size(), delta, d, w, k});
  return cells;
}

std::string cell_key(const Grid& g, const GridCell& c, std::uint64_t seed) {
  std::string key = "mode=" + g.mode + " family=" + g.family + " delta=" + format_real(c.delta) +
                    " d=" + std::to_string(c.d) + " L=" + std::to_string(c.width) +
                    " depth=" + std::to_string(c.depth) + " threshold=" + format_real(g.threshold);
  if (g.mode == "simulate")
    key += " trials=" + std::to_string(g.trials) + " decoder=" + g.decoder + " seed=" + std::to_string(seed) +
           " cell=" + std::to_string(c.index);
  return key;
}

std::vector<std::string> chain_columns() { return {"k", "width", "tv", "decoder_error", "ml_error", "tv_bound"}; }
std::vector<std::string> sim_columns() { return {"estimate", "half_width", "errors", "trials"}; }

// Formatted tail fields of one cell's row.
std::vector<std::string> compute_cell(const Grid& g, const GridCell& c, std::uint64_t seed) {
  const auto schedule = LayerSchedule::constant(c.width);
  const NoiseLevel delta(c.delta);
  if (g.mode == "chain") {
    if (c.width > max_chain_width)
      throw size_error("chain width " + std::to_string(c.width) + " exceeds the limit of " +
                       std::to_string(max_chain_width));
    ChainFamily family = g.family == "majority" ? ChainFamily::majority(c.d, schedule, delta)
                         : g.family == "andor"  ? ChainFamily::andor(schedule, delta)
                                                : ChainFamily::unbounded(schedule, delta);
    const auto row = chain_table(family, c.depth, g.threshold).back();
    return {std::to_string(row.k),       std::to_string(row.width),
            format_real(row.tv),         format_real(row.decoder_error),
            format_real(row.ml_error),   row.tv_bound < 0 ? "" : format_real(row.tv_bound)};
  }
  McConfig m;
  m.d = family_degree(g.family, c.d);
  m.schedule = schedule;
  m.rules = rules_for(g.family, m.d);
  m.delta = delta;
  m.depth = c.depth;
  m.trials = g.trials;
  m.seed = mix64(seed) ^ mix64(c.index + 1);
  m.threads = 1;
  if (g.decoder == "majority") {
    m.decoder = Decoder::majority();
  } else if (g.decoder == "single") {
    m.decoder = Decoder::single_vertex();
  } else {
    m.decoder = Decoder::biased(g.threshold > 0 ? g.threshold : 0.5);
  }
  const auto e = mc_error_estimate(m);
  return {format_real(e.estimate), format_real(e.half_width), std::to_string(e.errors), std::to_string(e.trials)};
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
  std::map<std::string, std::string> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;  // torn last line from an interrupted run
    done[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return done;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string f;
  while (std::getline(in, f, ',')) out.push_back(f);
  if (!text.empty() && text.back() == ',') out.emplace_back();
  return out;
}

struct SweepArgs {
  std::string grid;
  std::string manifest;
};

void run_sweep(Context& ctx, const SweepArgs& a) {
  if (a.grid.empty()) throw usage_error("--grid is required");
  if (ctx.common.format != "csv") throw usage_error("sweep writes CSV only");
  const auto grid = parse_grid(read_file(a.grid));
  const auto cells = cells_of(grid);
  const auto seed = ctx.common.seed;
  const auto tail_columns = grid.mode == "chain" ? chain_columns() : sim_columns();

  std::vector<std::string> keys;
  for (const auto& c : cells) keys.push_back(cell_key(grid, c, seed));
  auto done = a.manifest.empty() ? std::map<std::string, std::string>{} : read_manifest(a.manifest);

  std::vector<std::vector<std::string>> tails(cells.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto it = done.find(keys[i]);
    if (it != done.end() && split_csv(it->second).size() == tail_columns.size())
      tails[i] = split_csv(it->second);
    else
      todo.push_back(i);
  }

  // single collector for the manifest
  std::mutex collector;
  std::ofstream manifest;
  if (!a.manifest.empty()) {
    manifest.open(a.manifest, std::ios::app);
    if (!manifest) throw input_error("cannot write " + a.manifest);
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const auto slot = next.fetch_add(1);
      if (slot >= todo.size()) return;
      const auto i = todo[slot];
      try {
        auto tail = compute_cell(grid, cells[i], seed);
        std::lock_guard<std::mutex> lock(collector);
        tails[i] = tail;
        if (manifest.is_open()) manifest << keys[i] << '\t' << csv_line(tail) << std::endl;
      } catch (...) {
        std::lock_guard<std::mutex> lock(collector);
        if (!failure) failure = std::current_exception();
        next = todo.size();
      }
    }
  };
  const int n = std::max(1, std::min<int>(ctx.threads(), static_cast<int>(todo.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  ctx.err() << "sweep: " << todo.size() << " cells computed, " << cells.size() - todo.size()
            << " reused from manifest\n";

  auto r = ctx.report();
  r.table.columns = {"cell", "delta", "d", "L", "depth"};
  r.table.columns.insert(r.table.columns.end(), tail_columns.begin(), tail_columns.end());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    std::vector<Cell> row{static_cast<std::int64_t>(c.index), c.delta, std::int64_t{c.d}, c.width,
                               std::int64_t{c.depth}};
    for (auto& f : tails[i]) row.emplace_back(f);
    r.table.add(std::move(row));
  }
  ctx.emit(std::move(r));
}

}  // namespace

void add_sweep_command(CLI::App& app, Commands& commands) {
  auto a = std::make_shared<SweepArgs>();
  auto* sub = app.add_subcommand("sweep", "Cartesian sweep over (delta, d, L, depth)");
  sub->add_option("--grid", a->grid, "Grid file of key = value lines");
  sub->add_option("--manifest", a->manifest, "Completed-cell manifest; existing entries are reused");
  commands.push_back({sub, [a](Context& ctx) { run_sweep(ctx, *a); }});
}

}  // namespace bcast::cli
