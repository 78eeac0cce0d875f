#pragma once

#include "ada2ms/bench.hpp"
#include "ada2ms/core.hpp"
#include "ada2ms/optim.hpp"
#include "ada2ms/schedule.hpp"
#include "ada2ms/statlab.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ada2ms {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One value in the flat config format: bool, integer, real, string or a
// flat list of those. Types survive a write/parse round trip.
struct ConfigValue {
  using List = std::vector<ConfigValue>;
  std::variant<bool, std::int64_t, double, std::string, List> v;

  ConfigValue() : v(false) {}
  ConfigValue(bool b) : v(b) {}
  ConfigValue(std::int64_t i) : v(i) {}
  ConfigValue(int i) : v(static_cast<std::int64_t>(i)) {}
  ConfigValue(double d) : v(d) {}
  ConfigValue(const char* s) : v(std::string(s)) {}
  ConfigValue(std::string s) : v(std::move(s)) {}
  ConfigValue(List l) : v(std::move(l)) {}

  bool as_bool() const;
  std::int64_t as_int() const;
  double as_double() const;  // integers promote
  const std::string& as_string() const;
  const List& as_list() const;
  bool is_list() const { return std::holds_alternative<List>(v); }

  std::string to_text() const;
  bool operator==(const ConfigValue& other) const { return v == other.v; }
};

using ConfigMap = std::map<std::string, ConfigValue>;

// Grammar: one `key.path = value` per line; `#` starts a comment; values are
// true/false, integers, reals, bare or double-quoted strings, or
// `[v1, v2, ...]` lists. Keys are sorted on write.
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);  // ConfigError on missing/bad file
std::string write_config_text(const ConfigMap& map);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

enum class ProblemKind { NoisyQuadratic, Rosenbrock, Logistic, Mlp, GradModel };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& text);

struct ProblemConfig {
  ProblemKind kind = ProblemKind::NoisyQuadratic;
  Index dim = 100;
  double condition = 100.0;
  double noise = 0.01;
  Index samples = 400;
  Index batch_size = 32;
  double separation = 6.0;
  Index hidden = 32;
  GradModel model{};
};

Problem build_problem(const ProblemConfig& config, std::uint64_t seed);

struct RunConfig {
  ProblemConfig problem{};
  OptimKind optimizer = OptimKind::Ada2MS;
  HyperParams hp{};
  LrKind lr_kind = LrKind::WSDS;
  double eta_init = 1e-7;
  double eta_peak = 1e-3;
  double eta_min = 1e-5;
  std::int64_t t1 = 0, t2 = 0, t3 = 0;  // resolved breakpoints
  double switch_frac = 0.6;
  std::optional<double> fixed_alpha;
  std::int64_t T = 1000;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  bool ema_best = false;
  double ema_decay = 0.9;
};

RunConfig resolve_run_config(const ConfigMap& map);
ConfigMap run_config_to_map(const RunConfig& config);
LrSchedule lr_schedule_from(const RunConfig& config);
AlphaSchedule alpha_schedule_from(const RunConfig& config);
TrainOptions train_options_from(const RunConfig& config);

struct StatsConfig {
  std::vector<McQuantity> quantities;      // absent key -> full default grid
  std::vector<double> mu{0.0, 0.3};
  double sigma_f = 1.0;
  double sigma = 0.5;
  Index d = 1000;
  double beta1 = 0.9;
  double beta2 = 0.99;
  std::vector<std::int64_t> t{1, 10, 200};
  std::int64_t t_ratio = 500;              // step for the ratio-approximation targets
  std::vector<double> alpha{0.0, 0.25, 0.5, 0.75, 1.0};
  std::int64_t chains = 100000;
  double tol = 0.02;
  double tol_ratio = 0.03;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

StatsConfig resolve_stats_config(const ConfigMap& map);

struct AlignConfig {
  OptimKind reference = OptimKind::AdamW;
  OptimKind target = OptimKind::SgdW;
  double eta1 = 5.34e-4;
  double lambda1 = 0.01;
  int probe_steps = 100;
  double probe_eta = 1e-4;
  double probe_alpha = 1.0;
  HyperParams hp{};
  ProblemConfig problem{};
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

AlignConfig resolve_align_config(const ConfigMap& map);

struct SweepConfig {
  ConfigMap base;                                  // run-config keys
  std::vector<std::pair<std::string, ConfigValue::List>> axes;
  std::string out_dir = "out";
};

SweepConfig resolve_sweep_config(const ConfigMap& map);

// Cross product of the sweep axes applied to the base map, in axis order.
std::vector<ConfigMap> expand_sweep_cells(const SweepConfig& config);

}  // namespace ada2ms
