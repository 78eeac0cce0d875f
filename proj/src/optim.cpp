#include "ada2ms/optim.hpp"

#include "ada2ms/bench.hpp"
#include "ada2ms/statlab.hpp"

#include <cmath>
#include <stdexcept>

namespace ada2ms {

namespace {

void check_step_inputs(const ParamSet& params, const OptimizerState& state,
                       const GradSet& grads, double eta) {
  if (params.size() != grads.size() || params.size() != state.slots.size())
    throw std::invalid_argument("step: params, grads and state slots must align");
  if (!std::isfinite(eta)) throw std::invalid_argument("step: learning rate must be finite");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].values.size())
      throw std::invalid_argument("step: gradient shape mismatch for tensor '" +
                                  params[i].name + "'");
    if (!grads[i].isFinite().all())
      throw std::invalid_argument("step: non-finite gradient for tensor '" +
                                  params[i].name + "'");
  }
}

TensorUpdate make_update(const std::string& name, Array u) {
  TensorUpdate upd;
  upd.name = name;
  upd.l2 = std::sqrt(u.square().sum());
  upd.rms = upd.l2 / std::sqrt(static_cast<double>(u.size()));
  upd.u = std::move(u);
  return upd;
}

// theta <- theta - eta*u - eta*lambda_l*theta_prev. The decay term is a
// separate subtraction so a lambda = 0 step is bitwise identical to the
// undecayed step.
void apply_update(ParamTensor& tensor, const Array& u, double eta, double lambda_l) {
  if (lambda_l != 0.0) {
    const Array prev = tensor.values;
    tensor.values -= eta * u;
    tensor.values -= (eta * lambda_l) * prev;
  } else {
    tensor.values -= eta * u;
  }
}

}  // namespace

const char* to_string(OptimKind kind) {
  switch (kind) {
    case OptimKind::SgdW: return "sgdw";
    case OptimKind::AdamW: return "adamw";
    case OptimKind::Ada2MS: return "ada2ms";
    case OptimKind::Ada2MSAlpha0Ref: return "ada2ms_alpha0_ref";
  }
  return "unknown";
}

OptimKind optim_kind_from_string(const std::string& text) {
  if (text == "sgdw" || text == "sgdm") return OptimKind::SgdW;
  if (text == "adamw") return OptimKind::AdamW;
  if (text == "ada2ms") return OptimKind::Ada2MS;
  if (text == "ada2ms_alpha0_ref") return OptimKind::Ada2MSAlpha0Ref;
  throw std::invalid_argument("unknown optimizer kind '" + text + "'");
}

double UpdateReport::global_l2() const {
  double sq = 0.0;
  for (const TensorUpdate& upd : tensors) sq += upd.l2 * upd.l2;
  return std::sqrt(sq);
}

double UpdateReport::global_rms() const {
  Index count = 0;
  for (const TensorUpdate& upd : tensors) count += upd.u.size();
  if (count == 0) return 0.0;
  return global_l2() / std::sqrt(static_cast<double>(count));
}

double beta_hat(double beta, std::int64_t t) {
  const double bt = std::pow(beta, static_cast<double>(t));
  return (beta - bt) / (1.0 - bt);
}

UpdateReport sgdw_step(ParamSet& params, OptimizerState& state, const GradSet& grads,
                       double eta, double beta, double lambda) {
  check_step_inputs(params, state, grads, eta);
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("sgdw: beta must lie in [0,1)");

  UpdateReport report;
  state.t += 1;
  report.t = state.t;
  for (std::size_t i = 0; i < params.size(); ++i) {
    TensorState& slot = state.slots[i];
    slot.m = beta * slot.m + grads[i];
    report.tensors.push_back(make_update(params[i].name, slot.m));
    apply_update(params[i], slot.m, eta, decay_mask(params[i], lambda));
  }
  return report;
}

UpdateReport adamw_step(ParamSet& params, OptimizerState& state, const GradSet& grads,
                        double eta, const HyperParams& hp) {
  check_step_inputs(params, state, grads, eta);

  UpdateReport report;
  state.t += 1;
  report.t = state.t;
  const double bh1 = beta_hat(hp.beta1, state.t);
  const double bh2 = beta_hat(hp.beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    TensorState& slot = state.slots[i];
    slot.m = bh1 * slot.m + (1.0 - bh1) * grads[i];
    slot.v = (bh2 * slot.v + (1.0 - bh2) * grads[i].square()).max(0.0);
    Array u = slot.m / (hp.epsilon + slot.v.sqrt());
    apply_update(params[i], u, eta, decay_mask(params[i], hp.lambda));
    report.tensors.push_back(make_update(params[i].name, std::move(u)));
  }
  return report;
}

UpdateReport ada2ms_step(ParamSet& params, OptimizerState& state, const GradSet& grads,
                         double eta, double alpha, const HyperParams& hp) {
  check_step_inputs(params, state, grads, eta);
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("ada2ms: alpha must lie in [0,1]");

  UpdateReport report;
  state.t += 1;
  report.t = state.t;
  const double bh1 = beta_hat(hp.beta1, state.t);
  const double bh2 = beta_hat(hp.beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    TensorState& slot = state.slots[i];
    const Array& g = grads[i];
    const double dim = static_cast<double>(g.size());

    slot.m = bh1 * slot.m + (1.0 - bh1) * g;
    slot.v = (bh2 * slot.v + (1.0 - bh2) * g.square()).max(0.0);
    slot.n = bh2 * slot.n + (1.0 - bh2) * g.matrix().squaredNorm();
    if (slot.n < 0.0) slot.n = 0.0;

    Array u;
    if (alpha == 1.0) {
      u = slot.m / (hp.epsilon + slot.v.sqrt());
    } else if (alpha == 0.0) {
      u = slot.m / (hp.epsilon + std::sqrt(slot.n / dim));
    } else {
      const Array s = slot.v.pow(alpha) * std::pow(slot.n / dim, 1.0 - alpha);
      u = slot.m / (hp.epsilon + s.sqrt());
    }
    apply_update(params[i], u, eta, decay_mask(params[i], hp.lambda));
    report.tensors.push_back(make_update(params[i].name, std::move(u)));
  }
  return report;
}

UpdateReport ada2ms_alpha0_reference_step(ParamSet& params, OptimizerState& state,
                                          const GradSet& grads, double eta,
                                          const HyperParams& hp) {
  check_step_inputs(params, state, grads, eta);

  UpdateReport report;
  state.t += 1;
  report.t = state.t;
  const double t = static_cast<double>(state.t);
  const double corr1 = 1.0 - std::pow(hp.beta1, t);
  const double corr2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    TensorState& slot = state.slots[i];
    const Array& g = grads[i];
    const double dim = static_cast<double>(g.size());

    slot.m = hp.beta1 * slot.m + (1.0 - hp.beta1) * g;
    slot.n = hp.beta2 * slot.n + (1.0 - hp.beta2) * g.matrix().squaredNorm();

    const Array m_hat = slot.m / corr1;
    const double n_hat = slot.n / corr2;
    Array u = m_hat / (hp.epsilon + std::sqrt(n_hat / dim));
    apply_update(params[i], u, eta, 0.0);
    report.tensors.push_back(make_update(params[i].name, std::move(u)));
  }
  return report;
}

UpdateReport optimizer_step(OptimKind kind, ParamSet& params, OptimizerState& state,
                            const GradSet& grads, double eta, double alpha,
                            const HyperParams& hp) {
  switch (kind) {
    case OptimKind::SgdW:
      return sgdw_step(params, state, grads, eta, hp.beta1, hp.lambda);
    case OptimKind::AdamW:
      return adamw_step(params, state, grads, eta, hp);
    case OptimKind::Ada2MS:
      return ada2ms_step(params, state, grads, eta, alpha, hp);
    case OptimKind::Ada2MSAlpha0Ref:
      return ada2ms_alpha0_reference_step(params, state, grads, eta, hp);
  }
  throw std::invalid_argument("unknown optimizer kind");
}

AlignedHyperParams align_hyperparams(double eta1, double lambda1, double norm1, double norm2) {
  if (!(norm1 > 0.0) || !(norm2 > 0.0) || !std::isfinite(norm1) || !std::isfinite(norm2))
    throw std::invalid_argument("align: update norms must be positive and finite");
  const double ratio = norm1 / norm2;
  return {eta1 * ratio, lambda1 / ratio};
}

ProbeResult measure_update_norm(OptimKind kind, const Problem& problem,
                                const ProbeOptions& opts) {
  if (opts.steps < 1) throw std::invalid_argument("probe: steps must be >= 1");

  ParamSet params = problem.init_params;
  OptimizerState state = init_state(params);
  ProbeResult result;
  double sum_l2 = 0.0;
  double sum_rms = 0.0;
  for (int step = 1; step <= opts.steps; ++step) {
    const std::uint64_t batch_seed = mix_seed(opts.seed, static_cast<std::uint64_t>(step));
    const double loss = problem.loss(params, batch_seed);
    if (!std::isfinite(loss))
      throw std::runtime_error("probe: divergent run on '" + problem.name + "' at step " +
                               std::to_string(step));
    const GradSet grads = problem.grad(params, batch_seed);
    const UpdateReport report =
        optimizer_step(kind, params, state, grads, opts.eta, opts.alpha, opts.hp);
    sum_l2 += report.global_l2();
    sum_rms += report.global_rms();
  }
  result.mean_l2 = sum_l2 / opts.steps;
  result.mean_rms = sum_rms / opts.steps;
  result.degenerate = result.mean_l2 == 0.0;
  return result;
}

FixtureModel fixture_model_from_string(const std::string& text) {
  if (text == "swinv2s") return FixtureModel::SwinV2S;
  if (text == "yolov7tiny") return FixtureModel::Yolov7Tiny;
  if (text == "unet") return FixtureModel::UNet;
  throw std::invalid_argument("unknown fixture model '" + text + "'");
}

FixtureOpt fixture_opt_from_string(const std::string& text) {
  if (text == "sgdm" || text == "sgdw") return FixtureOpt::Sgdm;
  if (text == "adamw") return FixtureOpt::AdamW;
  if (text == "radam") return FixtureOpt::RAdam;
  if (text == "adai") return FixtureOpt::AdaI;
  if (text == "lion") return FixtureOpt::Lion;
  if (text == "sophiag") return FixtureOpt::SophiaG;
  if (text == "ada2ms") return FixtureOpt::Ada2MS;
  throw std::invalid_argument("unknown fixture optimizer '" + text + "'");
}

const char* to_string(FixtureModel model) {
  switch (model) {
    case FixtureModel::SwinV2S: return "swinv2s";
    case FixtureModel::Yolov7Tiny: return "yolov7tiny";
    case FixtureModel::UNet: return "unet";
  }
  return "unknown";
}

const char* to_string(FixtureOpt opt) {
  switch (opt) {
    case FixtureOpt::Sgdm: return "sgdm";
    case FixtureOpt::AdamW: return "adamw";
    case FixtureOpt::RAdam: return "radam";
    case FixtureOpt::AdaI: return "adai";
    case FixtureOpt::Lion: return "lion";
    case FixtureOpt::SophiaG: return "sophiag";
    case FixtureOpt::Ada2MS: return "ada2ms";
  }
  return "unknown";
}

double table2_peak_lr(FixtureModel model, FixtureOpt opt) {
  // Published peak learning rates, stored verbatim.
  static constexpr double kTable[3][7] = {
      // sgdm,   adamw,   radam,   adai, lion,      sophiag,   ada2ms
      {2.67e-2, 5.34e-4, 5.34e-4, 1.0, 1.068e-4, 1.068e-4, 5.34e-4},  // SwinV2-S
      {0.349, 3.49e-3, 3.49e-3, 1.0, 6.98e-4, 6.98e-4, 3.49e-3},      // YOLOv7-tiny
      {0.116, 1.16e-3, 1.16e-3, 1.0, 2.32e-4, 2.32e-4, 1.16e-3},      // U-Net
  };
  return kTable[static_cast<int>(model)][static_cast<int>(opt)];
}

}  // namespace ada2ms
