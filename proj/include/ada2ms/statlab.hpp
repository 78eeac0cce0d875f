#pragma once

#include "ada2ms/core.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace ada2ms {

// Seed derivation. All randomness in the library flows from a master seed
// through these helpers, so reruns reproduce results bit for bit.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);
std::mt19937_64 make_rng(std::uint64_t seed);

// One stochastic gradient draw: mu + sigma_f * a + sigma * b per component,
// a and b standard normal, fresh at every call.
Array sample_gradient(const GradModel& model, std::mt19937_64& rng);

// Generalized signal-to-noise ratio mu^2 / (sigma_f^2 + sigma^2).
// Throws std::domain_error when the total noise is zero.
double snr(const GradModel& model);

struct SgdmMoments {
  double mean = 0.0;
  double variance = 0.0;
  double rms = 0.0;  // sqrt(mean^2 + variance)
};

SgdmMoments cf_sgdm_moments(double beta, const GradModel& model, std::int64_t t);

struct AdamMoments {
  double mean = 0.0;
  double variance = 0.0;
  double rms_update = 0.0;
};

AdamMoments cf_adam_moments(double beta1, const GradModel& model, std::int64_t t);

struct GlobalMoments {
  double expected_g_sq_norm = 0.0;
  double expected_n = 0.0;
  double rms_alpha0 = 0.0;  // same closed form as the AdamW update RMS
};

GlobalMoments cf_global_moments(double beta1, double beta2, const GradModel& model,
                                std::int64_t t);

// Closed-form RMS of the normalized update,
// sqrt((c_t + SNR) / (1 + SNR)) with c_t = (1-b1)(1+b1^t) / ((1+b1)(1-b1^t)).
// Shared by the AdamW and alpha = 0 forms.
double cf_update_rms(double beta1, const GradModel& model, std::int64_t t);

enum class McQuantity {
  SgdmMean,
  SgdmVar,
  SgdmRms,
  AdamMomentMean,
  AdamMomentVar,
  AdamSecondMomentMean,
  GlobalSecondMomentMean,
  AdamUpdateRms,
  Alpha0UpdateRms,
  Ada2msUpdateRms,
};

const char* to_string(McQuantity quantity);
McQuantity mc_quantity_from_string(const std::string& text);

struct McParams {
  double beta = 0.9;   // sgdm momentum coefficient, or beta1
  double beta2 = 0.99;
  double alpha = 1.0;  // Ada2msUpdateRms only
  std::int64_t t = 1;
  std::int64_t chains = 100000;
  std::uint64_t seed = 0;
};

struct McEstimate {
  McQuantity quantity{};
  std::int64_t chains = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
};

// Simulates independent accumulation chains of the gradient model to step t
// and returns the empirical statistic the quantity calls for (mean, variance
// or RMS) with its standard error. Chains are seeded from (seed, chain index)
// and reduced in chain order, so estimates are reproducible bit for bit.
// Epsilon is taken as 0 inside these recurrences.
McEstimate mc_rms(McQuantity quantity, const McParams& params, const GradModel& model);

// Closed-form prediction for the same quantity, as verified by mc_rms.
double cf_predict(McQuantity quantity, const McParams& params, const GradModel& model);

// Natural comparison scale for pass/fail checks: |prediction| where it is
// nonzero, otherwise the RMS of the same family (mean targets at mu = 0).
double cf_scale(McQuantity quantity, const McParams& params, const GradModel& model);

}  // namespace ada2ms
