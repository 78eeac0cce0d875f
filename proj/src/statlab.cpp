#include "ada2ms/statlab.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ada2ms {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ (0x632be59bd9b4e019ULL + index * 0x9e3779b97f4a7c15ULL);
  return splitmix64(state);
}

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

Array sample_gradient(const GradModel& model, std::mt19937_64& rng) {
  validate(model);
  std::normal_distribution<double> normal(0.0, 1.0);
  Array g(model.d);
  for (Index i = 0; i < model.d; ++i) {
    const double a = normal(rng);
    const double b = normal(rng);
    g[i] = model.mu + model.sigma_f * a + model.sigma * b;
  }
  return g;
}

double snr(const GradModel& model) {
  const double total = model.sigma_f * model.sigma_f + model.sigma * model.sigma;
  if (total <= 0.0) throw std::domain_error("snr: total gradient noise is zero");
  return model.mu * model.mu / total;
}

namespace {

void check_cf_inputs(double beta, std::int64_t t) {
  if (!(beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument("closed form: beta must lie in [0,1)");
  if (t < 1) throw std::invalid_argument("closed form: t must be >= 1");
}

double total_noise(const GradModel& model) {
  return model.sigma_f * model.sigma_f + model.sigma * model.sigma;
}

}  // namespace

SgdmMoments cf_sgdm_moments(double beta, const GradModel& model, std::int64_t t) {
  check_cf_inputs(beta, t);
  const double bt = std::pow(beta, static_cast<double>(t));
  SgdmMoments out;
  out.mean = (1.0 - bt) / (1.0 - beta) * model.mu;
  out.variance = (1.0 - bt * bt) / (1.0 - beta * beta) * total_noise(model);
  out.rms = std::sqrt(out.mean * out.mean + out.variance);
  return out;
}

AdamMoments cf_adam_moments(double beta1, const GradModel& model, std::int64_t t) {
  check_cf_inputs(beta1, t);
  const double bt = std::pow(beta1, static_cast<double>(t));
  AdamMoments out;
  out.mean = (1.0 - bt) * model.mu;
  out.variance = (1.0 - beta1) / (1.0 + beta1) * (1.0 - bt * bt) * total_noise(model);
  out.rms_update = cf_update_rms(beta1, model, t);
  return out;
}

double cf_update_rms(double beta1, const GradModel& model, std::int64_t t) {
  check_cf_inputs(beta1, t);
  const double bt = std::pow(beta1, static_cast<double>(t));
  const double c_t = (1.0 - beta1) * (1.0 + bt) / ((1.0 + beta1) * (1.0 - bt));
  const double s = snr(model);
  return std::sqrt((c_t + s) / (1.0 + s));
}

GlobalMoments cf_global_moments(double beta1, double beta2, const GradModel& model,
                                std::int64_t t) {
  check_cf_inputs(beta2, t);
  validate(model);
  const double d = static_cast<double>(model.d);
  GlobalMoments out;
  out.expected_g_sq_norm = d * (total_noise(model) + model.mu * model.mu);
  out.expected_n = (1.0 - std::pow(beta2, static_cast<double>(t))) * out.expected_g_sq_norm;
  out.rms_alpha0 = cf_update_rms(beta1, model, t);
  return out;
}

const char* to_string(McQuantity quantity) {
  switch (quantity) {
    case McQuantity::SgdmMean: return "sgdm_mean";
    case McQuantity::SgdmVar: return "sgdm_var";
    case McQuantity::SgdmRms: return "sgdm_rms";
    case McQuantity::AdamMomentMean: return "adam_m_mean";
    case McQuantity::AdamMomentVar: return "adam_m_var";
    case McQuantity::AdamSecondMomentMean: return "adam_v_mean";
    case McQuantity::GlobalSecondMomentMean: return "global_n_mean";
    case McQuantity::AdamUpdateRms: return "adam_update_rms";
    case McQuantity::Alpha0UpdateRms: return "alpha0_update_rms";
    case McQuantity::Ada2msUpdateRms: return "ada2ms_update_rms";
  }
  return "unknown";
}

McQuantity mc_quantity_from_string(const std::string& text) {
  for (McQuantity q :
       {McQuantity::SgdmMean, McQuantity::SgdmVar, McQuantity::SgdmRms,
        McQuantity::AdamMomentMean, McQuantity::AdamMomentVar,
        McQuantity::AdamSecondMomentMean, McQuantity::GlobalSecondMomentMean,
        McQuantity::AdamUpdateRms, McQuantity::Alpha0UpdateRms, McQuantity::Ada2msUpdateRms})
    if (text == to_string(q)) return q;
  throw std::invalid_argument("unknown statistics quantity '" + text + "'");
}

namespace {

struct Stat {
  double estimate = 0.0;
  double se = 0.0;
};

Stat stat_mean(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double m2 = 0.0;
  for (double x : xs) m2 += (x - mean) * (x - mean);
  return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

Stat stat_variance(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double c = (x - mean) * (x - mean);
    m2 += c;
    m4 += c * c;
  }
  const double var = m2 / (n - 1.0);
  m2 /= n;
  m4 /= n;
  const double se_sq = (m4 - m2 * m2) / n;
  return {var, se_sq > 0.0 ? std::sqrt(se_sq) : 0.0};
}

Stat stat_rms(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x * x;
  const double mean_sq = sum / n;
  if (mean_sq == 0.0) return {0.0, 0.0};
  double m2 = 0.0;
  for (double x : xs) {
    const double c = x * x - mean_sq;
    m2 += c * c;
  }
  const double se_mean_sq = std::sqrt(m2 / (n - 1.0) / n);
  const double rms = std::sqrt(mean_sq);
  return {rms, se_mean_sq / (2.0 * rms)};
}

// ||g||^2 summed over `dims` i.i.d. components g_j ~ N(mu, tau^2), drawn
// through the exact noncentral chi-square decomposition
// (z + sqrt(lambda))^2 + chisq(dims - 1) so the cost per draw is O(1).
class NormSqSampler {
 public:
  NormSqSampler(const GradModel& model, Index dims)
      : dims_(dims),
        tau2_(model.sigma_f * model.sigma_f + model.sigma * model.sigma),
        gamma_(dims >= 2 ? (static_cast<double>(dims) - 1.0) / 2.0 : 1.0, 2.0) {
    if (tau2_ > 0.0)
      sqrt_lambda_ = std::sqrt(static_cast<double>(dims) * model.mu * model.mu / tau2_);
    mu_ = model.mu;
  }

  double operator()(std::mt19937_64& rng, std::normal_distribution<double>& normal) {
    if (dims_ == 0) return 0.0;
    if (tau2_ == 0.0) return static_cast<double>(dims_) * mu_ * mu_;
    const double z = normal(rng) + sqrt_lambda_;
    double x = z * z;
    if (dims_ >= 2) x += gamma_(rng);
    return tau2_ * x;
  }

 private:
  Index dims_;
  double tau2_;
  double mu_ = 0.0;
  double sqrt_lambda_ = 0.0;
  std::gamma_distribution<double> gamma_;
};

double component_draw(const GradModel& model, std::mt19937_64& rng,
                      std::normal_distribution<double>& normal) {
  const double a = normal(rng);
  const double b = normal(rng);
  return model.mu + model.sigma_f * a + model.sigma * b;
}

}  // namespace

McEstimate mc_rms(McQuantity quantity, const McParams& params, const GradModel& model) {
  validate(model);
  if (params.chains < 2) throw std::invalid_argument("mc: need at least 2 chains");
  if (params.t < 1) throw std::invalid_argument("mc: t must be >= 1");
  if (!(params.beta >= 0.0 && params.beta < 1.0) || !(params.beta2 >= 0.0 && params.beta2 < 1.0))
    throw std::invalid_argument("mc: decay rates must lie in [0,1)");
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0))
    throw std::invalid_argument("mc: alpha must lie in [0,1]");

  const double b1 = params.beta;
  const double b2 = params.beta2;
  const double d = static_cast<double>(model.d);
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(params.t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(params.t));

  std::vector<double> values(static_cast<std::size_t>(params.chains));
  for (std::int64_t chain = 0; chain < params.chains; ++chain) {
    const std::uint64_t chain_seed = mix_seed(params.seed, static_cast<std::uint64_t>(chain));
    std::mt19937_64 rng = make_rng(chain_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double value = 0.0;

    switch (quantity) {
      case McQuantity::SgdmMean:
      case McQuantity::SgdmVar:
      case McQuantity::SgdmRms: {
        double m = 0.0;
        for (std::int64_t step = 0; step < params.t; ++step)
          m = b1 * m + component_draw(model, rng, normal);
        value = m;
        break;
      }
      case McQuantity::AdamMomentMean:
      case McQuantity::AdamMomentVar: {
        double m = 0.0;
        for (std::int64_t step = 0; step < params.t; ++step)
          m = b1 * m + (1.0 - b1) * component_draw(model, rng, normal);
        value = m;
        break;
      }
      case McQuantity::AdamSecondMomentMean: {
        double v = 0.0;
        for (std::int64_t step = 0; step < params.t; ++step) {
          const double g = component_draw(model, rng, normal);
          v = b2 * v + (1.0 - b2) * g * g;
        }
        value = v;
        break;
      }
      case McQuantity::GlobalSecondMomentMean: {
        NormSqSampler norm_sq(model, model.d);
        double n = 0.0;
        for (std::int64_t step = 0; step < params.t; ++step)
          n = b2 * n + (1.0 - b2) * norm_sq(rng, normal);
        value = n;
        break;
      }
      case McQuantity::AdamUpdateRms: {
        double m = 0.0, v = 0.0;
        for (std::int64_t step = 0; step < params.t; ++step) {
          const double g = component_draw(model, rng, normal);
          m = b1 * m + (1.0 - b1) * g;
          v = b2 * v + (1.0 - b2) * g * g;
        }
        const double v_hat = v / corr2;
        value = v_hat > 0.0 ? (m / corr1) / std::sqrt(v_hat) : 0.0;
        break;
      }
      case McQuantity::Alpha0UpdateRms:
      case McQuantity::Ada2msUpdateRms: {
        // One component of the d-dimensional update has the exact joint law
        // of (m_1, v_1, n): the other d-1 components enter only through
        // ||g||^2, whose tail is an independent noncentral chi-square.
        NormSqSampler tail(model, model.d - 1);
        double m = 0.0, v = 0.0, n = 0.0;
        for (std::int64_t step = 0; step < params.t; ++step) {
          const double g = component_draw(model, rng, normal);
          const double g_sq_norm = g * g + tail(rng, normal);
          m = b1 * m + (1.0 - b1) * g;
          v = b2 * v + (1.0 - b2) * g * g;
          n = b2 * n + (1.0 - b2) * g_sq_norm;
        }
        const double m_hat = m / corr1;
        const double global = (n / corr2) / d;
        double denom_sq;
        if (quantity == McQuantity::Alpha0UpdateRms || params.alpha == 0.0) {
          denom_sq = global;
        } else if (params.alpha == 1.0) {
          denom_sq = v / corr2;
        } else {
          denom_sq = std::pow(v / corr2, params.alpha) * std::pow(global, 1.0 - params.alpha);
        }
        value = denom_sq > 0.0 ? m_hat / std::sqrt(denom_sq) : 0.0;
        break;
      }
    }

    if (!std::isfinite(value))
      throw std::runtime_error("mc: non-finite accumulation in chain with seed " +
                               std::to_string(chain_seed));
    values[static_cast<std::size_t>(chain)] = value;
  }

  Stat stat;
  switch (quantity) {
    case McQuantity::SgdmMean:
    case McQuantity::AdamMomentMean:
    case McQuantity::AdamSecondMomentMean:
    case McQuantity::GlobalSecondMomentMean:
      stat = stat_mean(values);
      break;
    case McQuantity::SgdmVar:
    case McQuantity::AdamMomentVar:
      stat = stat_variance(values);
      break;
    default:
      stat = stat_rms(values);
      break;
  }

  McEstimate est;
  est.quantity = quantity;
  est.chains = params.chains;
  est.estimate = stat.estimate;
  est.std_error = stat.se;
  est.seed = params.seed;
  return est;
}

double cf_predict(McQuantity quantity, const McParams& params, const GradModel& model) {
  switch (quantity) {
    case McQuantity::SgdmMean: return cf_sgdm_moments(params.beta, model, params.t).mean;
    case McQuantity::SgdmVar: return cf_sgdm_moments(params.beta, model, params.t).variance;
    case McQuantity::SgdmRms: return cf_sgdm_moments(params.beta, model, params.t).rms;
    case McQuantity::AdamMomentMean: return cf_adam_moments(params.beta, model, params.t).mean;
    case McQuantity::AdamMomentVar:
      return cf_adam_moments(params.beta, model, params.t).variance;
    case McQuantity::AdamSecondMomentMean: {
      const double bt = std::pow(params.beta2, static_cast<double>(params.t));
      const double tau2 = model.sigma_f * model.sigma_f + model.sigma * model.sigma;
      return (1.0 - bt) * (model.mu * model.mu + tau2);
    }
    case McQuantity::GlobalSecondMomentMean:
      return cf_global_moments(params.beta, params.beta2, model, params.t).expected_n;
    case McQuantity::AdamUpdateRms:
    case McQuantity::Alpha0UpdateRms:
      return cf_update_rms(params.beta, model, params.t);
    case McQuantity::Ada2msUpdateRms:
      // No closed form in the mixed regime; the endpoints share the
      // update-RMS form, which doubles as the boundedness reference.
      return cf_update_rms(params.beta, model, params.t);
  }
  throw std::invalid_argument("unknown statistics quantity");
}

double cf_scale(McQuantity quantity, const McParams& params, const GradModel& model) {
  const double pred = cf_predict(quantity, params, model);
  if (pred != 0.0) return std::abs(pred);
  switch (quantity) {
    case McQuantity::SgdmMean: return cf_sgdm_moments(params.beta, model, params.t).rms;
    case McQuantity::AdamMomentMean: {
      const AdamMoments m = cf_adam_moments(params.beta, model, params.t);
      return std::sqrt(m.mean * m.mean + m.variance);
    }
    default: return 1.0;
  }
}

}  // namespace ada2ms
