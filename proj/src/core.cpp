#include "bcast/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bcast {

NoiseLevel::NoiseLevel(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    std::ostringstream msg;
    msg << "noise level must lie in (0, 1/2), got " << delta;
    throw input_error(msg.str());
  }
}

ProcessingRule::ProcessingRule(RuleKind kind, int arity, std::vector<std::uint8_t> table)
    : kind_(kind), arity_(arity), table_(std::move(table)) {
  if (arity < 1) throw input_error("rule arity must be at least 1");
  if (kind == RuleKind::TruthTable) {
    if (arity > 20) throw input_error("truth table arity too large");
    if (table_.size() != (std::size_t{1} << arity))
      throw input_error("truth table length must equal 2^arity");
    for (auto& b : table_) b = b ? 1 : 0;
  }
}

ProcessingRule ProcessingRule::majority(int arity) { return {RuleKind::MajorityRandomTie, arity}; }
ProcessingRule ProcessingRule::and_gate(int arity) { return {RuleKind::And, arity}; }
ProcessingRule ProcessingRule::or_gate(int arity) { return {RuleKind::Or, arity}; }
ProcessingRule ProcessingRule::nand_gate(int arity) { return {RuleKind::Nand, arity}; }
ProcessingRule ProcessingRule::identity(int arity) { return {RuleKind::Identity, arity}; }
ProcessingRule ProcessingRule::truth_table(int arity, std::vector<std::uint8_t> table) {
  return {RuleKind::TruthTable, arity, std::move(table)};
}

bool ProcessingRule::monotone_symmetric() const {
  return kind_ == RuleKind::MajorityRandomTie || kind_ == RuleKind::And ||
         kind_ == RuleKind::Or;
}

std::string ProcessingRule::name() const {
  std::string base;
  switch (kind_) {
    case RuleKind::MajorityRandomTie: base = "majority"; break;
    case RuleKind::And: base = "and"; break;
    case RuleKind::Or: base = "or"; break;
    case RuleKind::Nand: base = "nand"; break;
    case RuleKind::Identity: base = "identity"; break;
    case RuleKind::TruthTable: base = "table"; break;
  }
  return base + "/" + std::to_string(arity_);
}

namespace {

void check_arity(const ProcessingRule& rule, std::span<const std::uint8_t> inputs) {
  if (static_cast<int>(inputs.size()) != rule.arity()) {
    std::ostringstream msg;
    msg << "rule " << rule.name() << " expects " << rule.arity() << " inputs, got "
        << inputs.size();
    throw input_error(msg.str());
  }
}

// -1: output 0, 1: output 1, 0: randomized tie
int evaluate(const ProcessingRule& rule, std::span<const std::uint8_t> inputs) {
  check_arity(rule, inputs);
  int ones = 0;
  for (auto b : inputs) ones += b ? 1 : 0;
  const int d = rule.arity();
  switch (rule.kind()) {
    case RuleKind::MajorityRandomTie:
      if (2 * ones > d) return 1;
      if (2 * ones < d) return -1;
      return 0;
    case RuleKind::And:
      return ones == d ? 1 : -1;
    case RuleKind::Or:
      return ones > 0 ? 1 : -1;
    case RuleKind::Nand:
      return ones == d ? -1 : 1;
    case RuleKind::Identity:
      return inputs[0] ? 1 : -1;
    case RuleKind::TruthTable: {
      std::size_t index = 0;
      for (int j = 0; j < d; ++j)
        if (inputs[static_cast<std::size_t>(j)]) index |= std::size_t{1} << j;
      return rule.table()[index] ? 1 : -1;
    }
  }
  return -1;
}

}  // namespace

double ProcessingRule::output_probability(std::span<const std::uint8_t> inputs) const {
  int v = evaluate(*this, inputs);
  return v > 0 ? 1.0 : (v < 0 ? 0.0 : 0.5);
}

bool apply_rule(const ProcessingRule& rule, std::span<const std::uint8_t> inputs, Rng& rng) {
  int v = evaluate(rule, inputs);
  if (v == 0) return fair_bit(rng);
  return v > 0;
}

bool apply_rule(const ProcessingRule& rule, std::span<const std::uint8_t> inputs,
                const std::function<bool()>& tie_bit) {
  int v = evaluate(rule, inputs);
  if (v == 0) return tie_bit();
  return v > 0;
}

RulePlan::RulePlan(ProcessingRule even, ProcessingRule odd, std::optional<ProcessingRule> first)
    : even_(std::move(even)), odd_(std::move(odd)), first_(std::move(first)) {}

RulePlan RulePlan::uniform(ProcessingRule rule) { return {rule, rule, std::nullopt}; }

RulePlan RulePlan::alternating(ProcessingRule even, ProcessingRule odd) {
  return {std::move(even), std::move(odd), std::nullopt};
}

RulePlan RulePlan::expander(int d) {
  auto maj = ProcessingRule::majority(d);
  return {maj, maj, ProcessingRule::identity(1)};
}

const ProcessingRule& RulePlan::at(int level) const {
  if (level < 1) throw input_error("rules are defined for levels k >= 1");
  if (level == 1 && first_) return *first_;
  return level % 2 == 0 ? even_ : odd_;
}

bool RulePlan::monotone_symmetric() const {
  bool ok = even_.monotone_symmetric() && odd_.monotone_symmetric();
  if (first_) ok = ok && (first_->monotone_symmetric() || first_->kind() == RuleKind::Identity);
  return ok;
}

std::int64_t expansion_subset_size(std::int64_t n, int d, Rounding mode) {
  if (n < 1 || d < 1) throw input_error("subset size needs n >= 1 and d >= 1");
  double x = static_cast<double>(n) * std::pow(static_cast<double>(d), -1.2);
  // guard against representation error just below an integer
  double r = mode == Rounding::Floor ? std::floor(x + 1e-9) : std::round(x);
  return static_cast<std::int64_t>(r);
}

LayerSchedule LayerSchedule::constant(std::int64_t width) {
  if (width < 1) throw config_error("constant width must be >= 1");
  return LayerSchedule(Constant{width});
}

LayerSchedule LayerSchedule::log_growth(double coefficient, std::int64_t min_width) {
  if (!(coefficient > 0.0) || min_width < 1)
    throw config_error("log schedule needs C > 0 and L_min >= 1");
  return LayerSchedule(LogGrowth{coefficient, min_width});
}

LayerSchedule LayerSchedule::linear(std::int64_t slope, std::int64_t offset) {
  if (slope < 0 || slope + offset < 1) throw config_error("linear schedule must give L_k >= 1");
  return LayerSchedule(Linear{slope, offset});
}

LayerSchedule LayerSchedule::expander(std::int64_t base_width, int degree) {
  if (base_width < 1 || degree < 1) throw config_error("expander schedule needs N >= 1, d >= 1");
  double m = std::exp(static_cast<double>(base_width) /
                      (4.0 * std::pow(static_cast<double>(degree), 2.4)));
  if (!(m >= 2.0)) {
    std::ostringstream msg;
    msg << "expander schedule needs M = exp(N / (4 d^(12/5))) >= 2, got M = " << m << " for N = "
        << base_width << ", d = " << degree;
    throw config_error(msg.str());
  }
  return LayerSchedule(Expander{base_width, m, degree});
}

LayerSchedule LayerSchedule::expander_with_m(std::int64_t base_width, double m_constant) {
  if (base_width < 1) throw config_error("expander schedule needs N >= 1");
  if (!(m_constant >= 2.0)) throw config_error("expander schedule constant M must be >= 2");
  return LayerSchedule(Expander{base_width, m_constant, 0});
}

LayerSchedule LayerSchedule::explicit_widths(std::vector<std::int64_t> widths) {
  for (auto w : widths)
    if (w < 1) throw config_error("explicit widths must be >= 1");
  if (widths.empty()) throw config_error("explicit schedule needs at least one width");
  return LayerSchedule(Explicit{std::move(widths)});
}

namespace {

std::int64_t expander_width(const LayerSchedule::Expander& e, std::int64_t k) {
  if (static_cast<double>(k) <= std::floor(e.m_constant)) return e.base_width;
  const double logk = std::log(static_cast<double>(k));
  const double logm = std::log(e.m_constant);
  std::int64_t width = e.base_width;
  double bound = logm;  // log of M^(2^m)
  for (int m = 1; m < 62; ++m) {
    bound *= 2.0;
    width *= 2;
    // exact check for integer powers avoids rounding at the boundary
    double power = std::pow(e.m_constant, std::ldexp(1.0, m));
    if (std::isfinite(power) && power < 9.0e15) {
      if (static_cast<double>(k) <= power) return width;
    } else if (logk <= bound) {
      return width;
    }
  }
  throw size_error("expander schedule width overflow");
}

}  // namespace

std::int64_t LayerSchedule::layer_size(std::int64_t k) const {
  if (k < 0) throw input_error("depth must be non-negative");
  if (k == 0) return 1;
  return std::visit(
      [k](const auto& s) -> std::int64_t {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Constant>) {
          return s.width;
        } else if constexpr (std::is_same_v<S, LogGrowth>) {
          double v = std::ceil(s.coefficient * std::log(static_cast<double>(k)) - 1e-12);
          return std::max<std::int64_t>(s.min_width, static_cast<std::int64_t>(v));
        } else if constexpr (std::is_same_v<S, Linear>) {
          return s.slope * k + s.offset;
        } else if constexpr (std::is_same_v<S, Expander>) {
          return expander_width(s, k);
        } else {
          if (k > static_cast<std::int64_t>(s.widths.size()))
            throw input_error("depth beyond explicit schedule");
          return s.widths[static_cast<std::size_t>(k - 1)];
        }
      },
      spec_);
}

std::int64_t LayerSchedule::max_width(std::int64_t depth) const {
  std::int64_t best = 1;
  for (std::int64_t k = 1; k <= depth; ++k) best = std::max(best, layer_size(k));
  return best;
}

namespace {

std::vector<std::string> split_fields(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(text);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::int64_t parse_int(const std::string& text, const std::string& whole) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw input_error("bad integer '" + text + "' in schedule '" + whole + "'");
  return v;
}

double parse_real(const std::string& text, const std::string& whole) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw input_error("bad number '" + text + "' in schedule '" + whole + "'");
  return v;
}

}  // namespace

LayerSchedule LayerSchedule::parse(const std::string& text) {
  auto parts = split_fields(text, ':');
  if (parts.empty()) throw input_error("empty schedule");
  const auto& kind = parts[0];
  auto need = [&](std::size_t n) {
    if (parts.size() != n) throw input_error("schedule '" + text + "' has the wrong number of fields");
  };
  if (kind == "const") {
    need(2);
    return constant(parse_int(parts[1], text));
  }
  if (kind == "log") {
    need(3);
    return log_growth(parse_real(parts[1], text), parse_int(parts[2], text));
  }
  if (kind == "linear") {
    need(3);
    return linear(parse_int(parts[1], text), parse_int(parts[2], text));
  }
  if (kind == "expander") {
    need(3);
    return expander(parse_int(parts[1], text), static_cast<int>(parse_int(parts[2], text)));
  }
  if (kind == "expander-m") {
    need(3);
    return expander_with_m(parse_int(parts[1], text), parse_real(parts[2], text));
  }
  if (kind == "list") {
    need(2);
    std::vector<std::int64_t> widths;
    for (auto& f : split_fields(parts[1], ',')) widths.push_back(parse_int(f, text));
    return explicit_widths(std::move(widths));
  }
  throw input_error("unknown schedule kind '" + kind + "'");
}

std::string LayerSchedule::describe() const {
  std::ostringstream out;
  out.precision(12);
  std::visit(
      [&out](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Constant>) {
          out << "const:" << s.width;
        } else if constexpr (std::is_same_v<S, LogGrowth>) {
          out << "log:" << s.coefficient << ":" << s.min_width;
        } else if constexpr (std::is_same_v<S, Linear>) {
          out << "linear:" << s.slope << ":" << s.offset;
        } else if constexpr (std::is_same_v<S, Expander>) {
          if (s.degree > 0)
            out << "expander:" << s.base_width << ":" << s.degree;
          else
            out << "expander-m:" << s.base_width << ":" << s.m_constant;
        } else {
          out << "list:";
          for (std::size_t i = 0; i < s.widths.size(); ++i)
            out << (i ? "," : "") << s.widths[i];
        }
      },
      spec_);
  return out.str();
}

LayeredDag::LayeredDag(std::vector<std::int64_t> layer_sizes, std::vector<int> indegrees,
                       std::vector<std::vector<std::uint32_t>> parents)
    : sizes_(std::move(layer_sizes)), indegrees_(std::move(indegrees)), parents_(std::move(parents)) {
  if (sizes_.empty() || sizes_[0] != 1) throw input_error("level 0 must have exactly one vertex");
  const std::size_t depth = sizes_.size() - 1;
  if (indegrees_.size() != depth || parents_.size() != depth)
    throw input_error("indegree and parent tables must cover levels 1..depth");
  for (std::size_t k = 1; k <= depth; ++k) {
    if (sizes_[k] < 1) throw input_error("every level needs at least one vertex");
    if (sizes_[k] > std::int64_t{0xffffffff}) throw size_error("level too wide");
    const int deg = indegrees_[k - 1];
    if (deg < 1) throw input_error("indegree must be >= 1");
    const auto& p = parents_[k - 1];
    if (p.size() != static_cast<std::size_t>(sizes_[k]) * static_cast<std::size_t>(deg)) {
      std::ostringstream msg;
      msg << "level " << k << " has " << p.size() << " parent entries, expected "
          << sizes_[k] * deg;
      throw input_error(msg.str());
    }
    for (auto idx : p)
      if (static_cast<std::int64_t>(idx) >= sizes_[k - 1]) {
        std::ostringstream msg;
        msg << "parent index " << idx << " out of range at level " << k;
        throw input_error(msg.str());
      }
  }
}

std::span<const std::uint32_t> LayeredDag::parents_of(int k, std::int64_t j) const {
  if (k < 1 || k > depth()) throw input_error("level out of range");
  if (j < 0 || j >= layer_size(k)) throw input_error("vertex out of range");
  const auto deg = static_cast<std::size_t>(indegree(k));
  const auto& p = parents_[static_cast<std::size_t>(k - 1)];
  return std::span<const std::uint32_t>(p).subspan(static_cast<std::size_t>(j) * deg, deg);
}

std::vector<std::int64_t> LayeredDag::outdegrees(int k) const {
  if (k < 0 || k > depth()) throw input_error("level out of range");
  std::vector<std::int64_t> out(static_cast<std::size_t>(layer_size(k)), 0);
  if (k == depth()) return out;
  for (auto idx : parents_[static_cast<std::size_t>(k)]) ++out[idx];
  return out;
}

double LayerState::sigma() const {
  if (bits.empty()) return 0.0;
  std::int64_t ones = 0;
  for (auto b : bits) ones += b ? 1 : 0;
  return static_cast<double>(ones) / static_cast<double>(bits.size());
}

}  // namespace bcast
