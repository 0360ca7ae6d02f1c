#include "dfr/fdm.hpp"

#include <cmath>
#include <numbers>

namespace dfr::fdm {
namespace {

// Box-Muller on the platform-independent uniform source.
double gaussian(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix<double> gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev,
                               std::mt19937_64& rng) {
  Matrix<double> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = stddev * gaussian(rng);
  }
  return m;
}

// d(loss_i)/d(logit_i) for the binary focal term, zero where the clamp is active.
double forgery_logit_grad(double prob, double label, double alpha, double gamma) {
  if (prob < kProbFloor || prob > 1.0 - kProbFloor) return 0.0;
  const double g = prob;
  const double q = 1.0 - g;
  const double pos = -alpha * (-gamma * std::pow(q, gamma) * g * std::log(g) + std::pow(q, gamma + 1.0));
  const double neg =
      -(1.0 - alpha) * (gamma * std::pow(g, gamma) * q * std::log(q) - std::pow(g, gamma + 1.0));
  return label * pos + (1.0 - label) * neg;
}

}  // namespace

LossBreakdown gradient(const Batch& batch, const Params<double>& p, const FocalParams& fp,
                       const LossWeights& w, Params<double>& grad) {
  const auto f = forward(batch.features, p);
  const auto n = batch.features.cols();
  const auto dims = p.dims();
  fp.validate(static_cast<std::size_t>(dims.identities));
  if (static_cast<Eigen::Index>(batch.identity.size()) != n || batch.forged.size() != n) {
    throw ValidationError("fdm gradient: label count mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  LossBreakdown loss = combine_losses(identity_focal_loss(f.identity_probs, batch.identity, fp),
                                      forgery_focal_loss(f.forgery_probs, batch.forged, fp),
                                      recon_loss(batch.features, f.reconstruction), w);

  // Identity head: dL/dz = (dl/dp * p) (onehot - probs).
  Matrix<double> g_id_logits(dims.identities, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = batch.identity[static_cast<std::size_t>(i)];
    const auto [value, dpp] = detail::identity_focal_term(
        f.identity_probs(y, i),
        fp.alpha_for(static_cast<std::size_t>(y), static_cast<std::size_t>(dims.identities)),
        fp.identity_gamma);
    (void)value;
    g_id_logits.col(i) = -dpp * f.identity_probs.col(i);
    g_id_logits(y, i) += dpp;
  }
  g_id_logits *= w.identity * inv_n;

  Vector<double> g_fg_logits(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g_fg_logits[i] = forgery_logit_grad(f.forgery_probs[i], batch.forged[i], fp.forgery_alpha,
                                        fp.forgery_gamma);
  }
  g_fg_logits *= w.forgery * inv_n;

  const Matrix<double> g_recon = (2.0 * w.recon * inv_n) * (f.reconstruction - batch.features);

  grad = Params<double>::zeros(dims);
  grad.decoder = g_recon * f.latent.transpose();
  grad.decoder_bias = g_recon.rowwise().sum();
  const Matrix<double> g_latent = p.decoder.transpose() * g_recon;

  Matrix<double> g_identity = g_latent.topRows(dims.identity) + p.identity_head.transpose() * g_id_logits;
  Matrix<double> g_structural = g_latent.middleRows(dims.identity, dims.structural);
  Matrix<double> g_forgery = g_latent.bottomRows(dims.forgery) + p.forgery_head * g_fg_logits.transpose();

  grad.identity_head = g_id_logits * f.identity.transpose();
  grad.identity_bias = g_id_logits.rowwise().sum();
  grad.forgery_head = f.forgery * g_fg_logits;
  grad.forgery_bias[0] = g_fg_logits.sum();

  const auto& x = batch.features;
  grad.proj_identity = g_identity * x.transpose();
  grad.bias_identity = g_identity.rowwise().sum();
  grad.proj_structural = g_structural * x.transpose();
  grad.bias_structural = g_structural.rowwise().sum();
  grad.proj_forgery = g_forgery * x.transpose();
  grad.bias_forgery = g_forgery.rowwise().sum();
  return loss;
}

GradCheckResult grad_check(const Params<double>& p, const Batch& batch, const FocalParams& fp,
                           const LossWeights& w, double h) {
  if (!(h >= 1e-6 && h <= 1e-3)) throw ValidationError("grad_check: h must lie in [1e-6, 1e-3]");
  Params<double> analytic;
  gradient(batch, p, fp, w, analytic);
  const Vector<double> a = analytic.flatten();

  Params<double> probe = p;
  Vector<double> theta = p.flatten();
  GradCheckResult result;
  result.analytic_norm = a.norm();
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + h;
    probe.assign(theta);
    const double up = total_loss(batch, probe, fp, w).total;
    theta[k] = saved - h;
    probe.assign(theta);
    const double down = total_loss(batch, probe, fp, w).total;
    theta[k] = saved;

    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(a[k]), std::abs(numeric), 1e-8});
    const double rel = std::abs(a[k] - numeric) / denom;
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = k;
    }
  }
  return result;
}

Params<double> random_params(const Dims& d, std::mt19937_64& rng, double scale, bool zero_heads) {
  d.validate();
  auto p = Params<double>::zeros(d);
  const double in_std = scale / std::sqrt(static_cast<double>(d.feature));
  p.proj_identity = gaussian_matrix(d.identity, d.feature, in_std, rng);
  p.proj_structural = gaussian_matrix(d.structural, d.feature, in_std, rng);
  p.proj_forgery = gaussian_matrix(d.forgery, d.feature, in_std, rng);
  p.decoder = gaussian_matrix(d.feature, d.latent(), scale / std::sqrt(static_cast<double>(d.latent())), rng);
  if (!zero_heads) {
    p.identity_head = gaussian_matrix(d.identities, d.identity, scale / std::sqrt(double(d.identity)), rng);
    p.forgery_head = gaussian_matrix(d.forgery, 1, scale / std::sqrt(double(d.forgery)), rng);
  }
  return p;
}

SynthWorld make_world(Eigen::Index feature, Eigen::Index identities, std::uint64_t seed) {
  if (feature < 2 || identities < 2) throw ValidationError("synthetic world needs F >= 2 and M >= 2");
  std::mt19937_64 rng(seed);
  SynthWorld world;
  world.forgery_direction = gaussian_matrix(feature, 1, 1.0, rng);
  world.forgery_direction.normalize();
  world.prototypes = gaussian_matrix(feature, identities, 1.0, rng);
  const auto& u = world.forgery_direction;
  world.prototypes -= u * (u.transpose() * world.prototypes);
  return world;
}

Batch synth_dataset(const SynthWorld& world, Eigen::Index samples, double forgery_shift, double noise,
                    std::uint64_t seed) {
  const auto m = world.prototypes.cols();
  const auto feature = world.prototypes.rows();
  if (samples < m) throw ValidationError("synthetic dataset needs n >= M");
  std::mt19937_64 rng(seed);
  Batch b;
  b.features = gaussian_matrix(feature, samples, noise, rng);
  b.identity.resize(static_cast<std::size_t>(samples));
  b.forged.resize(samples);
  for (Eigen::Index k = 0; k < samples; ++k) {
    const auto id = k % m;
    const bool forged = (k / m) % 2 == 1;
    b.identity[static_cast<std::size_t>(k)] = static_cast<int>(id);
    b.forged[k] = forged ? 1.0 : 0.0;
    b.features.col(k) += world.prototypes.col(id);
    if (forged) b.features.col(k) += forgery_shift * world.forgery_direction;
  }
  return b;
}

Batch synth_dataset(Eigen::Index feature, Eigen::Index identities, Eigen::Index samples,
                    double forgery_shift, double noise, std::uint64_t seed) {
  return synth_dataset(make_world(feature, identities, seed), samples, forgery_shift, noise, seed + 1);
}

void TrainConfig::validate() const {
  dims.validate();
  focal.validate(static_cast<std::size_t>(dims.identities));
  if (samples < dims.identities) throw ValidationError("fdm.samples: must be >= identities");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ValidationError("fdm.holdout_fraction: must lie in (0, 1)");
  }
  if (steps == 0) throw ValidationError("fdm.steps: must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("fdm.learning_rate: must be > 0");
  if (!(noise >= 0.0)) throw ValidationError("fdm.noise: must be >= 0");
}

std::pair<double, double> evaluate(const Params<double>& p, const Batch& batch) {
  const auto f = forward(batch.features, p);
  const auto n = batch.features.cols();
  std::size_t forgery_hits = 0;
  std::size_t identity_hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool predicted = f.forgery_probs[i] >= 0.5;
    if (predicted == (batch.forged[i] > 0.5)) ++forgery_hits;
    Eigen::Index best = 0;
    f.identity_probs.col(i).maxCoeff(&best);
    if (best == batch.identity[static_cast<std::size_t>(i)]) ++identity_hits;
  }
  return {static_cast<double>(forgery_hits) / static_cast<double>(n),
          static_cast<double>(identity_hits) / static_cast<double>(n)};
}

TrainResult train(const TrainConfig& config) {
  config.validate();
  const auto& d = config.dims;
  const auto world = make_world(d.feature, d.identities, config.seed);
  const Batch all = synth_dataset(world, config.samples, config.forgery_shift, config.noise, config.seed + 1);

  const auto n_test = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(config.holdout_fraction * double(config.samples))));
  const auto n_train = config.samples - n_test;
  if (n_train < 1) throw ValidationError("fdm: holdout leaves no training samples");
  auto slice = [&all](Eigen::Index from, Eigen::Index count) {
    Batch b;
    b.features = all.features.middleCols(from, count);
    b.identity.assign(all.identity.begin() + from, all.identity.begin() + from + count);
    b.forged = all.forged.segment(from, count);
    return b;
  };
  const Batch train_set = slice(0, n_train);
  const Batch test_set = slice(n_train, n_test);

  std::mt19937_64 init_rng(config.seed + 2);
  TrainResult result;
  result.params = random_params(d, init_rng, config.init_scale);

  Params<double> grad;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto loss = gradient(train_set, result.params, config.focal, config.weights, grad);
    if (!std::isfinite(loss.total)) {
      throw TrainingDiverged("fdm training diverged at step " + std::to_string(step));
    }
    result.trajectory.push_back(loss);
    result.params.assign(result.params.flatten() - config.learning_rate * grad.flatten());
  }
  const auto final_loss = total_loss(train_set, result.params, config.focal, config.weights);
  if (!std::isfinite(final_loss.total)) throw TrainingDiverged("fdm training diverged at the final step");
  result.trajectory.push_back(final_loss);

  std::tie(result.forgery_accuracy, result.identity_accuracy) = evaluate(result.params, test_set);
  result.train_forgery_accuracy = evaluate(result.params, train_set).first;
  return result;
}

}  // namespace dfr::fdm
