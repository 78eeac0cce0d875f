#include "ada2ms/bench.hpp"

#include "ada2ms/statlab.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace ada2ms {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::Map<const MatrixXd> as_matrix(const ParamTensor& tensor, Index rows, Index cols) {
  return Eigen::Map<const MatrixXd>(tensor.values.data(), rows, cols);
}

// First `batch` entries of a seeded partial Fisher-Yates shuffle of [0, n).
std::vector<Index> sample_batch(Index n, Index batch, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (batch >= n) return idx;
  for (Index i = 0; i < batch; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(batch));
  return idx;
}

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Problem noisy_quadratic(Index d, double condition, double noise_sigma, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("noisy_quadratic: d must be >= 1");
  if (!(condition >= 1.0)) throw std::invalid_argument("noisy_quadratic: condition must be >= 1");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noisy_quadratic: noise must be >= 0");

  auto kappa = std::make_shared<Array>(d);
  for (Index i = 0; i < d; ++i)
    (*kappa)[i] = d > 1 ? std::exp(std::log(condition) * static_cast<double>(i) /
                                   static_cast<double>(d - 1))
                        : 1.0;

  std::mt19937_64 init_rng = make_rng(mix_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  Array theta0(d);
  for (Index i = 0; i < d; ++i) theta0[i] = normal(init_rng);

  const std::uint64_t noise_seed = mix_seed(seed, 2);
  auto draw_noise = [noise_seed, noise_sigma, d](std::uint64_t batch_seed) {
    Array xi = Array::Zero(d);
    if (noise_sigma > 0.0) {
      std::mt19937_64 rng = make_rng(mix_seed(noise_seed, batch_seed));
      std::normal_distribution<double> n01(0.0, 1.0);
      for (Index i = 0; i < d; ++i) xi[i] = noise_sigma * n01(rng);
    }
    return xi;
  };

  Problem p;
  p.name = "noisy_quadratic";
  p.init_params = {make_tensor("theta", {d}, theta0)};
  p.batch_noise_scale = noise_sigma;
  p.loss = [kappa, draw_noise](const ParamSet& params, std::uint64_t batch_seed) {
    const Array& theta = params[0].values;
    const Array xi = draw_noise(batch_seed);
    return 0.5 * (*kappa * theta.square()).sum() + (xi * theta).sum();
  };
  p.grad = [kappa, draw_noise](const ParamSet& params, std::uint64_t batch_seed) {
    const Array& theta = params[0].values;
    GradSet g;
    g.push_back(*kappa * theta + draw_noise(batch_seed));
    return g;
  };
  return p;
}

Problem rosenbrock() {
  Problem p;
  p.name = "rosenbrock";
  Array start(2);
  start << -1.2, 1.0;
  p.init_params = {make_tensor("xy", {2}, start)};
  p.loss = [](const ParamSet& params, std::uint64_t) {
    const double x = params[0].values[0];
    const double y = params[0].values[1];
    return (1.0 - x) * (1.0 - x) + 100.0 * (y - x * x) * (y - x * x);
  };
  p.grad = [](const ParamSet& params, std::uint64_t) {
    const double x = params[0].values[0];
    const double y = params[0].values[1];
    Array g(2);
    g[0] = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
    g[1] = 200.0 * (y - x * x);
    return GradSet{g};
  };
  return p;
}

namespace {

struct LogisticData {
  MatrixXd x;   // n x d
  VectorXd y;   // +-1 labels
  Index batch;
};

}  // namespace

Problem logistic_problem(Index n_samples, Index d, std::uint64_t seed, Index batch_size,
                         double separation) {
  if (n_samples < 1 || d < 1)
    throw std::invalid_argument("logistic_problem: n and d must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("logistic_problem: batch size must be >= 1");

  auto data = std::make_shared<LogisticData>();
  data->x.resize(n_samples, d);
  data->y.resize(n_samples);
  data->batch = batch_size;

  std::mt19937_64 rng = make_rng(mix_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double mean_scale = 0.5 * separation / std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < n_samples; ++i) {
    const double label = (i % 2 == 0) ? -1.0 : 1.0;
    data->y[i] = label;
    for (Index j = 0; j < d; ++j) data->x(i, j) = label * mean_scale + normal(rng);
  }

  const std::uint64_t batch_stream = mix_seed(seed, 2);
  auto pick_batch = [data, batch_stream](std::uint64_t batch_seed) {
    std::mt19937_64 rng = make_rng(mix_seed(batch_stream, batch_seed));
    return sample_batch(data->x.rows(), data->batch, rng);
  };

  Problem p;
  p.name = "logistic";
  p.init_params = {zeros_tensor("weight", {d, 1}), zeros_tensor("bias", {1})};
  p.loss = [data, pick_batch](const ParamSet& params, std::uint64_t batch_seed) {
    const auto w = as_matrix(params[0], params[0].shape[0], 1);
    const double b = params[1].values[0];
    double total = 0.0;
    const std::vector<Index> batch = pick_batch(batch_seed);
    for (Index i : batch) {
      const double score = data->x.row(i).dot(w.col(0)) + b;
      total += stable_softplus(-data->y[i] * score);
    }
    return total / static_cast<double>(batch.size());
  };
  p.grad = [data, pick_batch](const ParamSet& params, std::uint64_t batch_seed) {
    const auto w = as_matrix(params[0], params[0].shape[0], 1);
    const double b = params[1].values[0];
    const std::vector<Index> batch = pick_batch(batch_seed);
    Array gw = Array::Zero(params[0].values.size());
    double gb = 0.0;
    for (Index i : batch) {
      const double score = data->x.row(i).dot(w.col(0)) + b;
      const double coeff = -data->y[i] * sigmoid(-data->y[i] * score);
      gw += coeff * data->x.row(i).transpose().array();
      gb += coeff;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    Array gbias(1);
    gbias[0] = gb * inv;
    return GradSet{gw * inv, gbias};
  };
  p.accuracy = [data](const ParamSet& params) {
    const auto w = as_matrix(params[0], params[0].shape[0], 1);
    const double b = params[1].values[0];
    Index correct = 0;
    for (Index i = 0; i < data->x.rows(); ++i) {
      const double score = data->x.row(i).dot(w.col(0)) + b;
      if ((score >= 0.0 ? 1.0 : -1.0) == data->y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data->x.rows());
  };
  return p;
}

namespace {

struct MlpData {
  MatrixXd x;          // 2 x n
  std::vector<int> y;  // class 0/1
  Index batch;
};

struct MlpViews {
  Eigen::Map<const MatrixXd> w1, w2;
  Eigen::Map<const VectorXd> b1, b2;
};

MlpViews mlp_views(const ParamSet& params) {
  const Index h = params[0].shape[0];
  return {Eigen::Map<const MatrixXd>(params[0].values.data(), h, 2),
          Eigen::Map<const MatrixXd>(params[2].values.data(), 2, h),
          Eigen::Map<const VectorXd>(params[1].values.data(), h),
          Eigen::Map<const VectorXd>(params[3].values.data(), 2)};
}

// Column scores -> per-column softmax cross-entropy pieces.
struct MlpForward {
  MatrixXd a1;     // h x B
  MatrixXd probs;  // 2 x B
  double loss = 0.0;
};

MlpForward mlp_forward(const MlpData& data, const MlpViews& views,
                       const std::vector<Index>& batch) {
  const Index bsz = static_cast<Index>(batch.size());
  MatrixXd xb(2, bsz);
  for (Index c = 0; c < bsz; ++c) xb.col(c) = data.x.col(batch[static_cast<std::size_t>(c)]);

  MlpForward fwd;
  fwd.a1 = ((views.w1 * xb).colwise() + views.b1).array().tanh().matrix();
  MatrixXd z2 = (views.w2 * fwd.a1).colwise() + views.b2;
  fwd.probs.resize(2, bsz);
  double total = 0.0;
  for (Index c = 0; c < bsz; ++c) {
    const double zmax = z2.col(c).maxCoeff();
    const Eigen::Vector2d e = (z2.col(c).array() - zmax).exp();
    const double denom = e.sum();
    fwd.probs.col(c) = e / denom;
    const int label = data.y[static_cast<std::size_t>(batch[static_cast<std::size_t>(c)])];
    total += -(z2(label, c) - zmax - std::log(denom));
  }
  fwd.loss = total / static_cast<double>(bsz);
  return fwd;
}

}  // namespace

Problem mlp_problem(Index hidden_width, Index n_samples, std::uint64_t seed, Index batch_size) {
  if (hidden_width < 1) throw std::invalid_argument("mlp_problem: width must be >= 1");
  if (n_samples < 2) throw std::invalid_argument("mlp_problem: need at least 2 samples");
  if (batch_size < 1) throw std::invalid_argument("mlp_problem: batch size must be >= 1");

  auto data = std::make_shared<MlpData>();
  data->x.resize(2, n_samples);
  data->y.resize(static_cast<std::size_t>(n_samples));
  data->batch = batch_size;
  const Index half = (n_samples + 1) / 2;
  for (Index i = 0; i < n_samples; ++i) {
    const int cls = i < half ? 0 : 1;
    const Index within = cls == 0 ? i : i - half;
    const Index arm = cls == 0 ? half : n_samples - half;
    const double u = arm > 1 ? static_cast<double>(within) / static_cast<double>(arm - 1) : 0.5;
    const double r = 0.2 + 0.8 * u;
    const double phi = M_PI * cls + 3.0 * M_PI * u;
    data->x(0, i) = r * std::cos(phi);
    data->x(1, i) = r * std::sin(phi);
    data->y[static_cast<std::size_t>(i)] = cls;
  }

  const Index h = hidden_width;
  std::mt19937_64 rng = make_rng(mix_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  Array w1(h * 2), w2(2 * h);
  for (Index i = 0; i < w1.size(); ++i) w1[i] = normal(rng) / std::sqrt(2.0);
  for (Index i = 0; i < w2.size(); ++i) w2[i] = normal(rng) / std::sqrt(static_cast<double>(h));

  const std::uint64_t batch_stream = mix_seed(seed, 2);
  auto pick_batch = [data, batch_stream](std::uint64_t batch_seed) {
    std::mt19937_64 rng = make_rng(mix_seed(batch_stream, batch_seed));
    return sample_batch(data->x.cols(), data->batch, rng);
  };

  Problem p;
  p.name = "mlp";
  p.init_params = {make_tensor("w1", {h, 2}, w1), zeros_tensor("b1", {h}),
                   make_tensor("w2", {2, h}, w2), zeros_tensor("b2", {2})};
  p.loss = [data, pick_batch](const ParamSet& params, std::uint64_t batch_seed) {
    return mlp_forward(*data, mlp_views(params), pick_batch(batch_seed)).loss;
  };
  p.grad = [data, pick_batch](const ParamSet& params, std::uint64_t batch_seed) {
    const MlpViews views = mlp_views(params);
    const std::vector<Index> batch = pick_batch(batch_seed);
    const Index bsz = static_cast<Index>(batch.size());
    MatrixXd xb(2, bsz);
    for (Index c = 0; c < bsz; ++c) xb.col(c) = data->x.col(batch[static_cast<std::size_t>(c)]);

    const MlpForward fwd = mlp_forward(*data, views, batch);
    MatrixXd dz2 = fwd.probs;
    for (Index c = 0; c < bsz; ++c)
      dz2(data->y[static_cast<std::size_t>(batch[static_cast<std::size_t>(c)])], c) -= 1.0;
    dz2 /= static_cast<double>(bsz);

    const MatrixXd gw2 = dz2 * fwd.a1.transpose();
    const VectorXd gb2 = dz2.rowwise().sum();
    const MatrixXd da1 = views.w2.transpose() * dz2;
    const MatrixXd dz1 =
        (da1.array() * (1.0 - fwd.a1.array().square())).matrix();
    const MatrixXd gw1 = dz1 * xb.transpose();
    const VectorXd gb1 = dz1.rowwise().sum();

    GradSet grads;
    grads.push_back(Eigen::Map<const Array>(gw1.data(), gw1.size()));
    grads.push_back(Eigen::Map<const Array>(gb1.data(), gb1.size()));
    grads.push_back(Eigen::Map<const Array>(gw2.data(), gw2.size()));
    grads.push_back(Eigen::Map<const Array>(gb2.data(), gb2.size()));
    return grads;
  };
  p.accuracy = [data](const ParamSet& params) {
    const MlpViews views = mlp_views(params);
    std::vector<Index> all(static_cast<std::size_t>(data->x.cols()));
    std::iota(all.begin(), all.end(), Index{0});
    const MlpForward fwd = mlp_forward(*data, views, all);
    Index correct = 0;
    for (Index c = 0; c < data->x.cols(); ++c) {
      const int pred = fwd.probs(1, c) > fwd.probs(0, c) ? 1 : 0;
      if (pred == data->y[static_cast<std::size_t>(c)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data->x.cols());
  };
  return p;
}

Problem grad_model_problem(const GradModel& model, std::uint64_t seed) {
  validate(model);
  Problem p;
  p.name = "grad_model";
  p.init_params = {zeros_tensor("theta", {model.d})};
  p.loss = [](const ParamSet& params, std::uint64_t) {
    return 0.5 * params[0].values.square().sum();
  };
  p.grad = [model, seed](const ParamSet&, std::uint64_t batch_seed) {
    std::mt19937_64 rng = make_rng(mix_seed(seed, batch_seed));
    return GradSet{sample_gradient(model, rng)};
  };
  return p;
}

std::uint64_t train_batch_seed(std::uint64_t run_seed, std::int64_t t) {
  return mix_seed(run_seed, static_cast<std::uint64_t>(t));
}

TrainResult train(const Problem& problem, const TrainOptions& opts, const RecordSink& sink) {
  if (opts.T < 1) throw std::invalid_argument("train: T must be >= 1");
  validate(opts.hp);
  validate(opts.lr);
  if (opts.lr.T != opts.T)
    throw std::invalid_argument("train: lr schedule horizon must equal T");
  if (!opts.fixed_alpha) {
    validate(opts.alpha);
    if (opts.alpha.T != opts.T)
      throw std::invalid_argument("train: alpha schedule horizon must equal T");
  }

  TrainResult result;
  ParamSet params = problem.init_params;
  OptimizerState state = init_state(params);
  double tracked_best = std::numeric_limits<double>::infinity();
  result.best_loss = std::numeric_limits<double>::infinity();
  double ema = 0.0;
  bool ema_started = false;
  result.records.reserve(static_cast<std::size_t>(opts.T));

  for (std::int64_t t = 1; t <= opts.T; ++t) {
    const std::uint64_t batch_seed = train_batch_seed(opts.seed, t);
    const double loss = problem.loss(params, batch_seed);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
    const GradSet grads = problem.grad(params, batch_seed);
    bool finite_grads = true;
    for (const Array& g : grads) finite_grads = finite_grads && g.isFinite().all();
    if (!finite_grads) {
      result.diverged = true;
      break;
    }

    const double lr = lr_at(opts.lr, t);
    const double alpha = opts.fixed_alpha ? *opts.fixed_alpha : alpha_at(opts.alpha, t);
    const UpdateReport report = optimizer_step(opts.kind, params, state, grads, lr, alpha, opts.hp);

    double tracked = loss;
    if (opts.ema_best) {
      ema = ema_started ? opts.ema_decay * ema + (1.0 - opts.ema_decay) * loss : loss;
      ema_started = true;
      tracked = ema;
    }
    if (tracked < tracked_best) {
      tracked_best = tracked;
      result.best_loss = tracked;
      result.best_step = t;
      result.best_params = params;  // parameters after the improving step
    }

    RunRecord record;
    record.t = t;
    record.lr = lr;
    record.alpha = alpha;
    record.loss = loss;
    record.best_loss = tracked_best;
    record.update_rms.reserve(report.tensors.size());
    for (const TensorUpdate& upd : report.tensors) record.update_rms.push_back(upd.rms);
    if (sink) sink(record);
    result.records.push_back(std::move(record));
  }

  result.final_params = std::move(params);
  return result;
}

}  // namespace ada2ms
