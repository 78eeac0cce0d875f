#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace ada2ms {

using Array = Eigen::ArrayXd;
using Index = Eigen::Index;

// A named, shaped block of parameters. Values are stored flat in
// column-major order; `shape` carries the rank used by the weight-decay
// mask (rank >= 2 counts as a matrix parameter).
struct ParamTensor {
  std::string name;
  std::vector<Index> shape;
  Array values;

  Index size() const;
  int rank() const { return static_cast<int>(shape.size()); }
};

using ParamSet = std::vector<ParamTensor>;
using GradSet = std::vector<Array>;  // one gradient array per tensor, same order

// Throws std::invalid_argument if the tensor violates its invariants
// (shape/value length mismatch, non-positive extent, non-finite value).
void validate(const ParamTensor& tensor);

ParamTensor make_tensor(std::string name, std::vector<Index> shape, Array values);
ParamTensor zeros_tensor(std::string name, std::vector<Index> shape);

// Moment estimates for one tensor. The steppers that use the reformulated
// decay rates store m and v already bias-corrected; the alpha=0 reference
// stepper stores plain exponential moving averages instead.
struct TensorState {
  Array m;        // first moment
  Array v;        // elementwise second moment
  double n = 0.0; // global second moment (scalar per tensor)
};

struct OptimizerState {
  std::vector<TensorState> slots;
  std::int64_t t = 0;
};

struct HyperParams {
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-12;
  double lambda = 0.01;    // weight-decay rate, masked to matrix parameters
  std::int64_t T = 1000;   // total iterations
};

void validate(const HyperParams& hp);

// Synthetic stochastic-gradient generator: each of the d components is
// mu + sigma_f * a + sigma * b with a, b independent standard normals
// drawn fresh at every step.
struct GradModel {
  double mu = 0.0;
  double sigma_f = 1.0;
  double sigma = 0.5;
  Index d = 1000;
};

void validate(const GradModel& model);

// lambda for matrix parameters (rank >= 2), 0 otherwise.
double decay_mask(const ParamTensor& tensor, double lambda);

// Zeroed state with one slot per tensor, t = 0. The initial moment values
// never leak into updates because the reformulated decay rate is 0 at t = 1.
// Throws std::invalid_argument on duplicate tensor names.
OptimizerState init_state(const ParamSet& params);

}  // namespace ada2ms
