#pragma once

#include "ada2ms/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ada2ms {

struct Problem;  // bench.hpp

enum class OptimKind { SgdW, AdamW, Ada2MS, Ada2MSAlpha0Ref };

const char* to_string(OptimKind kind);
OptimKind optim_kind_from_string(const std::string& text);

// Diagnostics for one tensor's step. `u` is the vector multiplied by -eta,
// excluding the decay term; rms = l2 / sqrt(element count).
struct TensorUpdate {
  std::string name;
  Array u;
  double l2 = 0.0;
  double rms = 0.0;
};

struct UpdateReport {
  std::int64_t t = 0;
  std::vector<TensorUpdate> tensors;

  double global_l2() const;   // l2 norm of the concatenated update
  double global_rms() const;  // global_l2 / sqrt(total element count)
};

// Reformulated decay rate (beta - beta^t) / (1 - beta^t); 0 at t = 1.
// Running the EMA with this rate stores the bias-corrected estimate directly.
double beta_hat(double beta, std::int64_t t);

// Momentum SGDW: m <- beta*m + g; theta <- theta - eta*m - eta*lambda_l*theta.
// lambda is masked per tensor by decay_mask.
UpdateReport sgdw_step(ParamSet& params, OptimizerState& state, const GradSet& grads,
                       double eta, double beta, double lambda);

// AdamW with bias correction folded into the recurrences: m and v are stored
// already corrected, and the update is m / (eps + sqrt(v)).
UpdateReport adamw_step(ParamSet& params, OptimizerState& state, const GradSet& grads,
                        double eta, const HyperParams& hp);

// Ada2MS: mixes the elementwise second moment v with the per-tensor global
// second moment n through s = v^alpha * (n/d)^(1-alpha). alpha = 1 and
// alpha = 0 take exact branches instead of the power formula.
UpdateReport ada2ms_step(ParamSet& params, OptimizerState& state, const GradSet& grads,
                         double eta, double alpha, const HyperParams& hp);

// Literal form of the alpha = 0 update with explicit bias-correction
// divisions (plain EMAs stored in state, no weight decay). Serves as an
// independent oracle for ada2ms_step at alpha = 0.
UpdateReport ada2ms_alpha0_reference_step(ParamSet& params, OptimizerState& state,
                                          const GradSet& grads, double eta,
                                          const HyperParams& hp);

// Dispatch on kind; alpha is consulted only by Ada2MS, beta1 doubles as the
// SGDW momentum coefficient.
UpdateReport optimizer_step(OptimKind kind, ParamSet& params, OptimizerState& state,
                            const GradSet& grads, double eta, double alpha,
                            const HyperParams& hp);

// Hyperparameter alignment through update norms: eta2 = eta1 * norm1/norm2
// and lambda2 = lambda1 * norm2/norm1, so eta*lambda is preserved.
struct AlignedHyperParams {
  double eta2 = 0.0;
  double lambda2 = 0.0;
};

AlignedHyperParams align_hyperparams(double eta1, double lambda1, double norm1, double norm2);

// Mean update norms over a short reference run at a fixed small learning
// rate. Deterministic given (problem, seed). A probe whose updates are all
// zero is flagged degenerate instead of failing.
struct ProbeResult {
  double mean_l2 = 0.0;
  double mean_rms = 0.0;
  bool degenerate = false;
};

struct ProbeOptions {
  int steps = 100;
  std::uint64_t seed = 0;
  double eta = 1e-4;
  double alpha = 1.0;  // fixed switching exponent for Ada2MS probes
  HyperParams hp{};
};

ProbeResult measure_update_norm(OptimKind kind, const Problem& problem, const ProbeOptions& opts);

// Published peak learning rates used as alignment fixtures.
enum class FixtureModel { SwinV2S, Yolov7Tiny, UNet };
enum class FixtureOpt { Sgdm, AdamW, RAdam, AdaI, Lion, SophiaG, Ada2MS };

FixtureModel fixture_model_from_string(const std::string& text);
FixtureOpt fixture_opt_from_string(const std::string& text);
const char* to_string(FixtureModel model);
const char* to_string(FixtureOpt opt);

double table2_peak_lr(FixtureModel model, FixtureOpt opt);

}  // namespace ada2ms
