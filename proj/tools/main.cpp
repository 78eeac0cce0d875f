#include "ada2ms/commands.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Ada2MS optimizer lab: training runs, schedule/statistics "
               "verification, sweeps and hyperparameter alignment"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string fixture;
  std::string fixture_model = "swinv2s";
  std::string fixture_opt = "sgdm";

  bool out_set = false;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* config = sub->add_option("--config", config_path, "path to a config file");
    if (config_required) config->required();
    sub->add_option("--out", out_dir, "output directory (overrides env and config)")
        ->each([&](const std::string&) { out_set = true; });
    sub->add_option("--seed", seed, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* train = app.add_subcommand("train", "run one training job");
  add_common(train, true);

  CLI::App* verify = app.add_subcommand("verify-stats",
                                        "verify closed-form statistics against Monte Carlo");
  add_common(verify, true);

  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of training jobs");
  add_common(sweep, true);

  CLI::App* align = app.add_subcommand("align", "align hyperparameters across optimizers");
  add_common(align, false);
  align->add_option("--fixture", fixture, "use published values (table2)");
  align->add_option("--model", fixture_model, "fixture model: swinv2s|yolov7tiny|unet");
  align->add_option("--opt", fixture_opt, "fixture optimizer: sgdm|adamw|radam|adai|lion|sophiag|ada2ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : ada2ms::exit_code::config_error;
  }

  ada2ms::CliOverrides overrides;
  if (out_set) overrides.out_dir = out_dir;
  if (seed_set) overrides.seed = seed;

  if (train->parsed()) return ada2ms::cmd_train(config_path, overrides);
  if (verify->parsed()) return ada2ms::cmd_verify_stats(config_path, overrides);
  if (sweep->parsed()) return ada2ms::cmd_sweep(config_path, overrides);
  if (align->parsed()) {
    if (!fixture.empty()) {
      if (fixture != "table2") {
        std::fprintf(stderr, "config error: unknown fixture '%s'\n", fixture.c_str());
        return ada2ms::exit_code::config_error;
      }
      return ada2ms::cmd_align_fixture(fixture_model, fixture_opt);
    }
    if (config_path.empty()) {
      std::fprintf(stderr, "config error: align needs --config or --fixture table2\n");
      return ada2ms::exit_code::config_error;
    }
    return ada2ms::cmd_align(config_path, overrides);
  }
  return ada2ms::exit_code::config_error;
}
