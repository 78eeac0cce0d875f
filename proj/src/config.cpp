#include "ada2ms/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ada2ms {

namespace {

bool is_identifier(const std::string& text) {
  if (text.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(text[0])) && text[0] != '_') return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == '/';
  });
}

bool is_integer_text(const std::string& text) {
  std::size_t i = (text[0] == '+' || text[0] == '-') ? 1 : 0;
  if (i >= text.size()) return false;
  for (; i < text.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  return true;
}

std::string trim(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

ConfigValue parse_scalar(const std::string& raw, int line_no) {
  const std::string text = trim(raw);
  if (text.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value");
  if (text == "true") return ConfigValue(true);
  if (text == "false") return ConfigValue(false);
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"')
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) ++i;
      out.push_back(text[i]);
    }
    return ConfigValue(out);
  }
  if (is_integer_text(text)) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size()) return ConfigValue(value);
  }
  {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size()) return ConfigValue(value);
  }
  if (is_identifier(text)) return ConfigValue(text);
  throw ConfigError("line " + std::to_string(line_no) + ": cannot parse value '" + text + "'");
}

ConfigValue parse_value(const std::string& raw, int line_no) {
  const std::string text = trim(raw);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']')
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated list");
    ConfigValue::List list;
    const std::string body = text.substr(1, text.size() - 2);
    std::string item;
    bool in_quotes = false;
    for (char c : body) {
      if (c == '"') in_quotes = !in_quotes;
      if (c == ',' && !in_quotes) {
        list.push_back(parse_scalar(item, line_no));
        item.clear();
      } else {
        item.push_back(c);
      }
    }
    if (!trim(item).empty()) list.push_back(parse_scalar(item, line_no));
    return ConfigValue(std::move(list));
  }
  return parse_scalar(text, line_no);
}

std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

}  // namespace

bool ConfigValue::as_bool() const {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  throw ConfigError("expected a boolean value");
}

std::int64_t ConfigValue::as_int() const {
  if (const std::int64_t* i = std::get_if<std::int64_t>(&v)) return *i;
  throw ConfigError("expected an integer value");
}

double ConfigValue::as_double() const {
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (const std::int64_t* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw ConfigError("expected a numeric value");
}

const std::string& ConfigValue::as_string() const {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError("expected a string value");
}

const ConfigValue::List& ConfigValue::as_list() const {
  if (const List* l = std::get_if<List>(&v)) return *l;
  throw ConfigError("expected a list value");
}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  std::string text(buffer, ptr);
  // Keep the real type visible so the text re-parses as a double.
  if (text.find_first_of(".eE") == std::string::npos &&
      text.find_first_of("0123456789") != std::string::npos)
    text += ".0";
  return text;
}

std::string ConfigValue::to_text() const {
  struct Visitor {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(const std::string& s) const {
      if (is_identifier(s) && s != "true" && s != "false" && !is_integer_text(s))
        return s;
      std::string out = "\"";
      for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      out.push_back('"');
      return out;
    }
    std::string operator()(const List& list) const {
      std::string out = "[";
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out += ", ";
        out += list[i].to_text();
      }
      out += "]";
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string meat = trim(strip_comment(line));
    if (meat.empty()) continue;
    const std::size_t eq = meat.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(meat.substr(0, eq));
    if (key.empty() || !is_identifier(key))
      throw ConfigError("line " + std::to_string(line_no) + ": bad key '" + key + "'");
    if (map.count(key))
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    map.emplace(key, parse_value(meat.substr(eq + 1), line_no));
  }
  return map;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str());
}

std::string write_config_text(const ConfigMap& map) {
  std::string out;
  for (const auto& [key, value] : map) {
    out += key;
    out += " = ";
    out += value.to_text();
    out += "\n";
  }
  return out;
}

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::NoisyQuadratic: return "noisy_quadratic";
    case ProblemKind::Rosenbrock: return "rosenbrock";
    case ProblemKind::Logistic: return "logistic";
    case ProblemKind::Mlp: return "mlp";
    case ProblemKind::GradModel: return "grad_model";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& text) {
  if (text == "noisy_quadratic") return ProblemKind::NoisyQuadratic;
  if (text == "rosenbrock") return ProblemKind::Rosenbrock;
  if (text == "logistic") return ProblemKind::Logistic;
  if (text == "mlp") return ProblemKind::Mlp;
  if (text == "grad_model") return ProblemKind::GradModel;
  throw ConfigError("unknown problem kind '" + text + "'");
}

Problem build_problem(const ProblemConfig& config, std::uint64_t seed) {
  switch (config.kind) {
    case ProblemKind::NoisyQuadratic:
      return noisy_quadratic(config.dim, config.condition, config.noise, seed);
    case ProblemKind::Rosenbrock:
      return rosenbrock();
    case ProblemKind::Logistic:
      return logistic_problem(config.samples, config.dim, seed, config.batch_size,
                              config.separation);
    case ProblemKind::Mlp:
      return mlp_problem(config.hidden, config.samples, seed, config.batch_size);
    case ProblemKind::GradModel:
      return grad_model_problem(config.model, seed);
  }
  throw ConfigError("unknown problem kind");
}

namespace {

// Pulls typed values out of a ConfigMap while recording which keys were
// consumed, so unknown keys can be rejected afterwards.
class KeyReader {
 public:
  explicit KeyReader(const ConfigMap& map) : map_(map) {}

  const ConfigValue* find(const std::string& key) {
    used_.insert(key);
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }

  template <typename T, typename Getter>
  T get_or(const std::string& key, T fallback, Getter getter) {
    const ConfigValue* value = find(key);
    if (!value) return fallback;
    try {
      return getter(*value);
    } catch (const ConfigError& err) {
      throw ConfigError("key '" + key + "': " + err.what());
    }
  }

  double number(const std::string& key, double fallback) {
    return get_or(key, fallback, [](const ConfigValue& v) { return v.as_double(); });
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    return get_or(key, fallback, [](const ConfigValue& v) { return v.as_int(); });
  }
  std::string text(const std::string& key, std::string fallback) {
    return get_or(key, std::move(fallback),
                  [](const ConfigValue& v) { return v.as_string(); });
  }
  bool boolean(const std::string& key, bool fallback) {
    return get_or(key, fallback, [](const ConfigValue& v) { return v.as_bool(); });
  }

  void reject_unknown(const std::string& context) const {
    for (const auto& [key, value] : map_)
      if (!used_.count(key))
        throw ConfigError(context + ": unknown key '" + key + "'");
  }

 private:
  const ConfigMap& map_;
  std::set<std::string> used_;
};

ProblemConfig read_problem(KeyReader& reader) {
  ProblemConfig problem;
  problem.kind = problem_kind_from_string(reader.text("problem.kind", "noisy_quadratic"));
  problem.dim = reader.integer("problem.dim", problem.dim);
  problem.condition = reader.number("problem.condition", problem.condition);
  problem.noise = reader.number("problem.noise", problem.noise);
  problem.samples = reader.integer("problem.samples", problem.samples);
  problem.batch_size = reader.integer("problem.batch_size", problem.batch_size);
  problem.separation = reader.number("problem.separation", problem.separation);
  problem.hidden = reader.integer("problem.hidden", problem.hidden);
  problem.model.mu = reader.number("problem.mu", problem.model.mu);
  problem.model.sigma_f = reader.number("problem.sigma_f", problem.model.sigma_f);
  problem.model.sigma = reader.number("problem.sigma", problem.model.sigma);
  problem.model.d = problem.dim;
  return problem;
}

HyperParams read_hyperparams(KeyReader& reader) {
  HyperParams hp;
  hp.beta1 = reader.number("optimizer.beta1", hp.beta1);
  hp.beta2 = reader.number("optimizer.beta2", hp.beta2);
  hp.epsilon = reader.number("optimizer.epsilon", hp.epsilon);
  hp.lambda = reader.number("optimizer.lambda", hp.lambda);
  return hp;
}

std::int64_t default_breakpoint(double frac, std::int64_t T, std::int64_t lo) {
  std::int64_t step = static_cast<std::int64_t>(std::ceil(frac * static_cast<double>(T) - 0.5));
  return std::clamp(step, lo, T);
}

}  // namespace

RunConfig resolve_run_config(const ConfigMap& map) {
  KeyReader reader(map);
  RunConfig config;
  config.problem = read_problem(reader);
  config.optimizer = [&] {
    try {
      return optim_kind_from_string(reader.text("optimizer.kind", "ada2ms"));
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
  }();
  config.hp = read_hyperparams(reader);

  config.T = reader.integer("run.steps", config.T);
  if (config.T < 1) throw ConfigError("run.steps must be >= 1");
  config.hp.T = config.T;
  config.seed = static_cast<std::uint64_t>(reader.integer("run.seed", 1));
  config.out_dir = reader.text("run.out_dir", config.out_dir);
  config.ema_best = reader.boolean("run.ema_best", config.ema_best);
  config.ema_decay = reader.number("run.ema_decay", config.ema_decay);

  config.lr_kind = [&] {
    try {
      return lr_kind_from_string(reader.text("lr.kind", "wsds"));
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
  }();
  config.eta_peak = reader.number("lr.eta_peak", config.eta_peak);
  config.eta_init = reader.number("lr.eta_init", 1e-7);
  config.eta_min = reader.number("lr.eta_min", 0.01 * config.eta_peak);
  config.t1 = reader.integer("lr.t1", default_breakpoint(0.05, config.T, 1));
  config.t2 = reader.integer("lr.t2", default_breakpoint(0.60, config.T, config.t1));
  const std::int64_t t3_default =
      config.lr_kind == LrKind::WSD ? config.T : default_breakpoint(0.90, config.T, config.t2);
  config.t3 = reader.integer("lr.t3", t3_default);

  config.switch_frac = reader.number("alpha.switch_frac", config.switch_frac);
  if (const ConfigValue* fixed = reader.find("alpha.fixed"))
    config.fixed_alpha = fixed->as_double();

  reader.reject_unknown("run config");

  try {
    validate(lr_schedule_from(config));
    if (!config.fixed_alpha) validate(alpha_schedule_from(config));
    validate(config.hp);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
  return config;
}

ConfigMap run_config_to_map(const RunConfig& config) {
  ConfigMap map;
  map["problem.kind"] = std::string(to_string(config.problem.kind));
  map["problem.dim"] = config.problem.dim;
  map["problem.condition"] = config.problem.condition;
  map["problem.noise"] = config.problem.noise;
  map["problem.samples"] = config.problem.samples;
  map["problem.batch_size"] = config.problem.batch_size;
  map["problem.separation"] = config.problem.separation;
  map["problem.hidden"] = config.problem.hidden;
  map["problem.mu"] = config.problem.model.mu;
  map["problem.sigma_f"] = config.problem.model.sigma_f;
  map["problem.sigma"] = config.problem.model.sigma;
  map["optimizer.kind"] = std::string(to_string(config.optimizer));
  map["optimizer.beta1"] = config.hp.beta1;
  map["optimizer.beta2"] = config.hp.beta2;
  map["optimizer.epsilon"] = config.hp.epsilon;
  map["optimizer.lambda"] = config.hp.lambda;
  map["lr.kind"] = std::string(to_string(config.lr_kind));
  map["lr.eta_init"] = config.eta_init;
  map["lr.eta_peak"] = config.eta_peak;
  map["lr.eta_min"] = config.eta_min;
  map["lr.t1"] = config.t1;
  map["lr.t2"] = config.t2;
  map["lr.t3"] = config.t3;
  map["alpha.switch_frac"] = config.switch_frac;
  if (config.fixed_alpha) map["alpha.fixed"] = *config.fixed_alpha;
  map["run.steps"] = config.T;
  map["run.seed"] = static_cast<std::int64_t>(config.seed);
  map["run.out_dir"] = config.out_dir;
  map["run.ema_best"] = config.ema_best;
  map["run.ema_decay"] = config.ema_decay;
  return map;
}

LrSchedule lr_schedule_from(const RunConfig& config) {
  LrSchedule schedule;
  schedule.kind = config.lr_kind;
  schedule.eta_init = config.eta_init;
  schedule.eta_peak = config.eta_peak;
  schedule.eta_min = config.eta_min;
  schedule.t1 = config.t1;
  schedule.t2 = config.t2;
  schedule.t3 = config.t3;
  schedule.T = config.T;
  return schedule;
}

AlphaSchedule alpha_schedule_from(const RunConfig& config) {
  AlphaSchedule schedule;
  schedule.T = config.T;
  schedule.switch_frac = config.switch_frac;
  return schedule;
}

TrainOptions train_options_from(const RunConfig& config) {
  TrainOptions opts;
  opts.kind = config.optimizer;
  opts.hp = config.hp;
  opts.lr = lr_schedule_from(config);
  opts.alpha = alpha_schedule_from(config);
  opts.T = config.T;
  opts.seed = config.seed;
  opts.fixed_alpha = config.fixed_alpha;
  opts.ema_best = config.ema_best;
  opts.ema_decay = config.ema_decay;
  return opts;
}

StatsConfig resolve_stats_config(const ConfigMap& map) {
  KeyReader reader(map);
  StatsConfig config;

  if (const ConfigValue* quantities = reader.find("stats.quantities")) {
    const ConfigValue::List& list = quantities->as_list();
    if (list.empty()) throw ConfigError("stats.quantities must not be empty");
    for (const ConfigValue& item : list) {
      try {
        config.quantities.push_back(mc_quantity_from_string(item.as_string()));
      } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
      }
    }
  } else {
    config.quantities = {McQuantity::SgdmMean,        McQuantity::SgdmVar,
                         McQuantity::SgdmRms,         McQuantity::AdamMomentMean,
                         McQuantity::AdamMomentVar,   McQuantity::AdamSecondMomentMean,
                         McQuantity::GlobalSecondMomentMean, McQuantity::AdamUpdateRms,
                         McQuantity::Alpha0UpdateRms, McQuantity::Ada2msUpdateRms};
  }

  auto read_double_list = [&](const std::string& key, std::vector<double> fallback) {
    const ConfigValue* value = reader.find(key);
    if (!value) return fallback;
    std::vector<double> out;
    for (const ConfigValue& item : value->as_list()) out.push_back(item.as_double());
    if (out.empty()) throw ConfigError(key + " must not be empty");
    return out;
  };
  auto read_int_list = [&](const std::string& key, std::vector<std::int64_t> fallback) {
    const ConfigValue* value = reader.find(key);
    if (!value) return fallback;
    std::vector<std::int64_t> out;
    for (const ConfigValue& item : value->as_list()) out.push_back(item.as_int());
    if (out.empty()) throw ConfigError(key + " must not be empty");
    return out;
  };

  config.mu = read_double_list("stats.mu", config.mu);
  config.sigma_f = reader.number("stats.sigma_f", config.sigma_f);
  config.sigma = reader.number("stats.sigma", config.sigma);
  config.d = reader.integer("stats.d", config.d);
  config.beta1 = reader.number("stats.beta1", config.beta1);
  config.beta2 = reader.number("stats.beta2", config.beta2);
  config.t = read_int_list("stats.t", config.t);
  config.t_ratio = reader.integer("stats.t_ratio", config.t_ratio);
  config.alpha = read_double_list("stats.alpha", config.alpha);
  config.chains = reader.integer("stats.chains", config.chains);
  config.tol = reader.number("stats.tol", config.tol);
  config.tol_ratio = reader.number("stats.tol_ratio", config.tol_ratio);
  config.seed = static_cast<std::uint64_t>(reader.integer("run.seed", 1));
  config.out_dir = reader.text("run.out_dir", config.out_dir);

  reader.reject_unknown("stats config");
  if (config.chains < 2) throw ConfigError("stats.chains must be >= 2");
  return config;
}

AlignConfig resolve_align_config(const ConfigMap& map) {
  KeyReader reader(map);
  AlignConfig config;
  try {
    config.reference = optim_kind_from_string(reader.text("align.reference", "adamw"));
    config.target = optim_kind_from_string(reader.text("align.target", "sgdw"));
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
  config.eta1 = reader.number("align.eta", config.eta1);
  config.lambda1 = reader.number("align.lambda", config.lambda1);
  config.probe_steps = static_cast<int>(reader.integer("align.probe_steps", config.probe_steps));
  config.probe_eta = reader.number("align.probe_eta", config.probe_eta);
  config.probe_alpha = reader.number("align.probe_alpha", config.probe_alpha);
  config.hp = read_hyperparams(reader);
  config.problem = read_problem(reader);
  config.seed = static_cast<std::uint64_t>(reader.integer("run.seed", 1));
  config.out_dir = reader.text("run.out_dir", config.out_dir);
  reader.reject_unknown("align config");
  if (config.probe_steps < 1) throw ConfigError("align.probe_steps must be >= 1");
  return config;
}

SweepConfig resolve_sweep_config(const ConfigMap& map) {
  SweepConfig config;
  for (const auto& [key, value] : map) {
    if (key.rfind("sweep.", 0) == 0) {
      const std::string target = key.substr(6);
      if (target.empty()) throw ConfigError("bad sweep key '" + key + "'");
      if (!value.is_list()) throw ConfigError("sweep key '" + key + "' must hold a list");
      if (value.as_list().empty()) throw ConfigError("sweep key '" + key + "' must not be empty");
      config.axes.emplace_back(target, value.as_list());
    } else {
      config.base.emplace(key, value);
    }
  }
  if (config.axes.empty()) throw ConfigError("sweep config needs at least one sweep.* axis");
  if (auto it = config.base.find("run.out_dir"); it != config.base.end())
    config.out_dir = it->second.as_string();
  // Validate the base against the first cell so errors surface before any run.
  resolve_run_config(expand_sweep_cells(config).front());
  return config;
}

std::vector<ConfigMap> expand_sweep_cells(const SweepConfig& config) {
  std::vector<ConfigMap> cells{config.base};
  for (const auto& [key, values] : config.axes) {
    std::vector<ConfigMap> next;
    next.reserve(cells.size() * values.size());
    for (const ConfigMap& cell : cells)
      for (const ConfigValue& value : values) {
        ConfigMap expanded = cell;
        expanded[key] = value;
        next.push_back(std::move(expanded));
      }
    cells = std::move(next);
  }
  return cells;
}

}  // namespace ada2ms
