#include "ada2ms/core.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace ada2ms {

Index ParamTensor::size() const {
  Index prod = 1;
  for (Index extent : shape) prod *= extent;
  return prod;
}

void validate(const ParamTensor& tensor) {
  if (tensor.name.empty())
    throw std::invalid_argument("tensor has an empty name");
  for (Index extent : tensor.shape)
    if (extent <= 0)
      throw std::invalid_argument("tensor '" + tensor.name + "' has a non-positive extent");
  if (tensor.values.size() != tensor.size())
    throw std::invalid_argument("tensor '" + tensor.name + "': value count " +
                                std::to_string(tensor.values.size()) +
                                " does not match shape product " + std::to_string(tensor.size()));
  if (!tensor.values.isFinite().all())
    throw std::invalid_argument("tensor '" + tensor.name + "' contains non-finite values");
}

ParamTensor make_tensor(std::string name, std::vector<Index> shape, Array values) {
  ParamTensor tensor{std::move(name), std::move(shape), std::move(values)};
  validate(tensor);
  return tensor;
}

ParamTensor zeros_tensor(std::string name, std::vector<Index> shape) {
  ParamTensor tensor{std::move(name), std::move(shape), Array()};
  tensor.values = Array::Zero(tensor.size());
  validate(tensor);
  return tensor;
}

void validate(const HyperParams& hp) {
  if (!(hp.beta1 >= 0.0 && hp.beta1 < 1.0))
    throw std::invalid_argument("beta1 must lie in [0,1)");
  if (!(hp.beta2 >= 0.0 && hp.beta2 < 1.0))
    throw std::invalid_argument("beta2 must lie in [0,1)");
  if (!(hp.epsilon > 0.0) || !std::isfinite(hp.epsilon))
    throw std::invalid_argument("epsilon must be positive");
  if (!(hp.lambda >= 0.0) || !std::isfinite(hp.lambda))
    throw std::invalid_argument("lambda must be nonnegative");
  if (hp.T < 1)
    throw std::invalid_argument("T must be positive");
}

void validate(const GradModel& model) {
  if (!std::isfinite(model.mu))
    throw std::invalid_argument("grad model mu must be finite");
  if (!(model.sigma_f >= 0.0) || !(model.sigma >= 0.0))
    throw std::invalid_argument("grad model noise scales must be nonnegative");
  if (model.d < 1)
    throw std::invalid_argument("grad model dimension must be positive");
}

double decay_mask(const ParamTensor& tensor, double lambda) {
  return tensor.rank() >= 2 ? lambda : 0.0;
}

OptimizerState init_state(const ParamSet& params) {
  std::unordered_set<std::string> names;
  OptimizerState state;
  state.slots.reserve(params.size());
  for (const ParamTensor& tensor : params) {
    validate(tensor);
    if (!names.insert(tensor.name).second)
      throw std::invalid_argument("duplicate tensor name '" + tensor.name + "'");
    TensorState slot;
    slot.m = Array::Zero(tensor.values.size());
    slot.v = Array::Zero(tensor.values.size());
    slot.n = 0.0;
    state.slots.push_back(std::move(slot));
  }
  state.t = 0;
  return state;
}

}  // namespace ada2ms
