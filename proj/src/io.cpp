#include "ada2ms/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ada2ms {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string config_hash(const ConfigMap& map) {
  const std::uint64_t hash = fnv1a64(write_config_text(map));
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write file '" + path + "'");
  file << text;
}

RecordCsvWriter::RecordCsvWriter(std::ostream& out, const std::vector<std::string>& tensor_names)
    : out_(out), tensor_count_(tensor_names.size()) {
  out_ << "# schema: ada2ms.records.v1\n";
  out_ << "t,lr,alpha,loss,best_loss";
  for (const std::string& name : tensor_names) out_ << ",rms_" << name;
  out_ << "\n";
}

void RecordCsvWriter::write(const RunRecord& record) {
  if (record.update_rms.size() != tensor_count_)
    throw std::invalid_argument("record column count does not match header");
  out_ << record.t << ',' << format_double(record.lr) << ',' << format_double(record.alpha)
       << ',' << format_double(record.loss) << ',' << format_double(record.best_loss);
  for (double rms : record.update_rms) out_ << ',' << format_double(rms);
  out_ << "\n";
}

nlohmann::json params_to_json(const ParamSet& params) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const ParamTensor& tensor : params) {
    nlohmann::json entry;
    entry["name"] = tensor.name;
    entry["shape"] = tensor.shape;
    entry["values"] = std::vector<double>(tensor.values.data(),
                                          tensor.values.data() + tensor.values.size());
    tensors.push_back(std::move(entry));
  }
  return {{"schema", "ada2ms.params.v1"}, {"tensors", std::move(tensors)}};
}

ParamSet params_from_json(const nlohmann::json& json) {
  ParamSet params;
  for (const nlohmann::json& entry : json.at("tensors")) {
    const std::vector<double> values = entry.at("values").get<std::vector<double>>();
    Array array(static_cast<Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) array[static_cast<Index>(i)] = values[i];
    params.push_back(make_tensor(entry.at("name").get<std::string>(),
                                 entry.at("shape").get<std::vector<Index>>(), std::move(array)));
  }
  return params;
}

nlohmann::json state_to_json(const OptimizerState& state, const ParamSet& params) {
  if (state.slots.size() != params.size())
    throw std::invalid_argument("state/param tensor count mismatch");
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < state.slots.size(); ++i) {
    const TensorState& slot = state.slots[i];
    nlohmann::json entry;
    entry["name"] = params[i].name;
    entry["m"] = std::vector<double>(slot.m.data(), slot.m.data() + slot.m.size());
    entry["v"] = std::vector<double>(slot.v.data(), slot.v.data() + slot.v.size());
    entry["n"] = slot.n;
    tensors.push_back(std::move(entry));
  }
  return {{"schema", "ada2ms.state.v1"}, {"t", state.t}, {"tensors", std::move(tensors)}};
}

OptimizerState state_from_json(const nlohmann::json& json, const ParamSet& params) {
  const nlohmann::json& tensors = json.at("tensors");
  if (tensors.size() != params.size())
    throw std::invalid_argument("state/param tensor count mismatch");
  OptimizerState state;
  state.t = json.at("t").get<std::int64_t>();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const nlohmann::json& entry = tensors[i];
    if (entry.at("name").get<std::string>() != params[i].name)
      throw std::invalid_argument("state tensor order does not match params");
    TensorState slot;
    auto to_array = [](const nlohmann::json& list) {
      Array array(static_cast<Index>(list.size()));
      for (std::size_t k = 0; k < list.size(); ++k)
        array[static_cast<Index>(k)] = list[k].get<double>();
      return array;
    };
    slot.m = to_array(entry.at("m"));
    slot.v = to_array(entry.at("v"));
    slot.n = entry.at("n").get<double>();
    if (slot.m.size() != params[i].values.size() || slot.v.size() != params[i].values.size())
      throw std::invalid_argument("state moment size mismatch for '" + params[i].name + "'");
    state.slots.push_back(std::move(slot));
  }
  return state;
}

}  // namespace ada2ms
