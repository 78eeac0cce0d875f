#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ada2ms {

// Stable process exit codes shared by every subcommand.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int divergence = 2;
inline constexpr int verification_failure = 3;
}  // namespace exit_code

// Flag-level overrides. Output directory precedence: --out flag, then the
// ADA2MS_OUT_DIR environment variable, then the config's run.out_dir.
struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const std::string& config_path, const CliOverrides& overrides = {});
int cmd_verify_stats(const std::string& config_path, const CliOverrides& overrides = {});
int cmd_sweep(const std::string& config_path, const CliOverrides& overrides = {});
int cmd_align(const std::string& config_path, const CliOverrides& overrides = {});

// `align --fixture table2`: print a published peak learning rate verbatim.
int cmd_align_fixture(const std::string& model, const std::string& optimizer);

}  // namespace ada2ms
