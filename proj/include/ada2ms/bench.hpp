#pragma once

#include "ada2ms/core.hpp"
#include "ada2ms/optim.hpp"
#include "ada2ms/schedule.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ada2ms {

// A desk-scale optimization problem. `loss` and `grad` are evaluated on the
// mini-batch identified by an opaque batch seed; the same seed selects the
// same batch, so `grad` is the exact gradient of `loss` for that seed.
struct Problem {
  std::string name;
  ParamSet init_params;
  std::function<double(const ParamSet&, std::uint64_t)> loss;
  std::function<GradSet(const ParamSet&, std::uint64_t)> grad;
  double batch_noise_scale = 0.0;
  std::function<double(const ParamSet&)> accuracy;  // classification problems only
};

// f(theta) = 0.5 * sum_i kappa_i theta_i^2 with kappa log-spaced in
// [1, condition], plus a seeded linear noise term xi(batch).theta so the
// stochastic gradient is kappa*theta + xi while grad stays the exact
// gradient of loss per batch seed.
Problem noisy_quadratic(Index d, double condition, double noise_sigma, std::uint64_t seed);

// f(x, y) = (1-x)^2 + 100 (y - x^2)^2, deterministic, started at (-1.2, 1).
Problem rosenbrock();

// Two-Gaussian binary classification with mini-batch cross-entropy. The
// weight matrix has shape [d, 1] (decayed); the bias is rank 1 (not decayed).
Problem logistic_problem(Index n_samples, Index d, std::uint64_t seed,
                         Index batch_size = 32, double separation = 6.0);

// One-hidden-layer tanh network on a deterministic two-arm spiral with
// softmax cross-entropy and manual backpropagation.
Problem mlp_problem(Index hidden_width, Index n_samples, std::uint64_t seed,
                    Index batch_size = 32);

// Stationary stochastic-gradient problem backed by a GradModel: the gradient
// is a fresh model draw regardless of the parameters.
Problem grad_model_problem(const GradModel& model, std::uint64_t seed);

struct RunRecord {
  std::int64_t t = 0;
  double lr = 0.0;
  double alpha = 0.0;
  double loss = 0.0;
  double best_loss = 0.0;
  std::vector<double> update_rms;  // one entry per tensor, problem order
};

struct TrainOptions {
  OptimKind kind = OptimKind::Ada2MS;
  HyperParams hp{};
  LrSchedule lr{};
  AlphaSchedule alpha{};
  std::int64_t T = 1000;
  std::uint64_t seed = 0;
  std::optional<double> fixed_alpha;  // bypasses the alpha schedule when set
  bool ema_best = false;              // smooth the best-loss tracker (off: track raw loss)
  double ema_decay = 0.9;
};

struct TrainResult {
  ParamSet best_params;  // parameters right after the improving step
  double best_loss = 0.0;
  std::int64_t best_step = 0;
  ParamSet final_params;
  std::vector<RunRecord> records;
  bool diverged = false;
};

using RecordSink = std::function<void(const RunRecord&)>;

// Runs T steps: draw batch, evaluate loss and gradient, look up the
// schedules, apply the stepper, and keep the parameters that produced the
// lowest tracked loss. A non-finite loss or gradient aborts the run with the
// records collected so far and the diverged flag set.
TrainResult train(const Problem& problem, const TrainOptions& opts,
                  const RecordSink& sink = {});

// Batch seed used by train at step t for a given run seed.
std::uint64_t train_batch_seed(std::uint64_t run_seed, std::int64_t t);

}  // namespace ada2ms
