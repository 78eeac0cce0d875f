#pragma once

#include "ada2ms/bench.hpp"
#include "ada2ms/config.hpp"
#include "ada2ms/core.hpp"

#include <json.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ada2ms {

std::uint64_t fnv1a64(std::string_view text);

// 16-hex-digit FNV-1a hash of the canonical config text.
std::string config_hash(const ConfigMap& map);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Streams training records as CSV: a schema comment line, a header row and
// one row per step. Doubles use their shortest round-trip representation so
// reruns are byte-identical.
class RecordCsvWriter {
 public:
  RecordCsvWriter(std::ostream& out, const std::vector<std::string>& tensor_names);
  void write(const RunRecord& record);

 private:
  std::ostream& out_;
  std::size_t tensor_count_;
};

nlohmann::json params_to_json(const ParamSet& params);
ParamSet params_from_json(const nlohmann::json& json);

nlohmann::json state_to_json(const OptimizerState& state, const ParamSet& params);
OptimizerState state_from_json(const nlohmann::json& json, const ParamSet& params);

}  // namespace ada2ms
