#pragma once

// Forgery disentanglement at desk scale: a shared feature is projected into
// identity, structural and forgery parts, each supervised as follows
//   identity  -> softmax classifier, multi-class focal loss
//   forgery   -> logistic classifier, binary focal loss
//   all three -> linear decoder, squared reconstruction error
// Samples are stored column-wise (features x batch).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dfr/types.hpp"

namespace dfr::fdm {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kProbFloor = 1e-12;

struct Dims {
  Eigen::Index feature = 64;
  Eigen::Index identity = 24;
  Eigen::Index structural = 24;
  Eigen::Index forgery = 16;
  Eigen::Index identities = 8;

  Eigen::Index latent() const { return identity + structural + forgery; }
  void validate() const {
    if (feature <= 0 || identity <= 0 || structural <= 0 || forgery <= 0) {
      throw ValidationError("fdm dims must be positive");
    }
    if (identities < 2) throw ValidationError("fdm.identities: must be >= 2");
  }
};

template <typename Scalar>
struct Params {
  Matrix<Scalar> proj_identity, proj_structural, proj_forgery;  // dim x F
  Vector<Scalar> bias_identity, bias_structural, bias_forgery;
  Matrix<Scalar> identity_head;  // M x dim_I
  Vector<Scalar> identity_bias;  // M
  Vector<Scalar> forgery_head;   // dim_f
  Vector<Scalar> forgery_bias;   // 1
  Matrix<Scalar> decoder;        // F x (dim_I + dim_s + dim_f)
  Vector<Scalar> decoder_bias;   // F

  static Params zeros(const Dims& d) {
    Params p;
    p.proj_identity = Matrix<Scalar>::Zero(d.identity, d.feature);
    p.proj_structural = Matrix<Scalar>::Zero(d.structural, d.feature);
    p.proj_forgery = Matrix<Scalar>::Zero(d.forgery, d.feature);
    p.bias_identity = Vector<Scalar>::Zero(d.identity);
    p.bias_structural = Vector<Scalar>::Zero(d.structural);
    p.bias_forgery = Vector<Scalar>::Zero(d.forgery);
    p.identity_head = Matrix<Scalar>::Zero(d.identities, d.identity);
    p.identity_bias = Vector<Scalar>::Zero(d.identities);
    p.forgery_head = Vector<Scalar>::Zero(d.forgery);
    p.forgery_bias = Vector<Scalar>::Zero(1);
    p.decoder = Matrix<Scalar>::Zero(d.feature, d.latent());
    p.decoder_bias = Vector<Scalar>::Zero(d.feature);
    return p;
  }

  Dims dims() const {
    return {proj_identity.cols(), proj_identity.rows(), proj_structural.rows(),
            proj_forgery.rows(), identity_head.rows()};
  }

  /// Calls fn(tensor) on every parameter block in a fixed order.
  template <typename Fn>
  void for_each(Fn&& fn) {
    visit(*this, fn);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    visit(*this, fn);
  }

  Eigen::Index size() const {
    Eigen::Index n = 0;
    for_each([&n](const auto& t) { n += t.size(); });
    return n;
  }

  Vector<Scalar> flatten() const {
    Vector<Scalar> out(size());
    Eigen::Index at = 0;
    for_each([&](const auto& t) {
      out.segment(at, t.size()) = t.reshaped();
      at += t.size();
    });
    return out;
  }

  void assign(const Vector<Scalar>& flat) {
    if (flat.size() != size()) throw ValidationError("fdm params: flat vector size mismatch");
    Eigen::Index at = 0;
    for_each([&](auto& t) {
      t.reshaped() = flat.segment(at, t.size());
      at += t.size();
    });
  }

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    fn(self.proj_identity);
    fn(self.proj_structural);
    fn(self.proj_forgery);
    fn(self.bias_identity);
    fn(self.bias_structural);
    fn(self.bias_forgery);
    fn(self.identity_head);
    fn(self.identity_bias);
    fn(self.forgery_head);
    fn(self.forgery_bias);
    fn(self.decoder);
    fn(self.decoder_bias);
  }

  /// Throws ValidationError when block shapes disagree with each other.
  void check_shapes() const {
    const auto d = dims();
    auto expect = [](bool ok) {
      if (!ok) throw ValidationError("fdm params: inconsistent shapes");
    };
    expect(proj_structural.cols() == d.feature && proj_forgery.cols() == d.feature);
    expect(bias_identity.size() == d.identity && bias_structural.size() == d.structural &&
           bias_forgery.size() == d.forgery);
    expect(identity_head.cols() == d.identity && identity_bias.size() == d.identities);
    expect(forgery_head.size() == d.forgery && forgery_bias.size() == 1);
    expect(decoder.rows() == d.feature && decoder.cols() == d.latent() &&
           decoder_bias.size() == d.feature);
  }
};

/// Disentangled features and head outputs for a batch.
template <typename Scalar>
struct Forward {
  Matrix<Scalar> identity, structural, forgery;  // dim x N
  Matrix<Scalar> identity_logits;                // M x N
  Matrix<Scalar> identity_probs;                 // M x N, columns sum to 1
  Vector<Scalar> forgery_logits;                 // N
  Vector<Scalar> forgery_probs;                  // N, logistic of the logits
  Matrix<Scalar> latent;                         // concat(identity, structural, forgery)
  Matrix<Scalar> reconstruction;                 // F x N
};

template <typename Scalar>
Matrix<Scalar> softmax_columns(const Matrix<Scalar>& logits) {
  Matrix<Scalar> out = logits.rowwise() - logits.colwise().maxCoeff();
  out = out.array().exp().matrix();
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

template <typename Scalar>
Forward<Scalar> forward(const Matrix<Scalar>& x, const Params<Scalar>& p) {
  p.check_shapes();
  if (x.rows() != p.proj_identity.cols()) throw ValidationError("fdm forward: feature size mismatch");
  Forward<Scalar> f;
  f.identity = (p.proj_identity * x).colwise() + p.bias_identity;
  f.structural = (p.proj_structural * x).colwise() + p.bias_structural;
  f.forgery = (p.proj_forgery * x).colwise() + p.bias_forgery;
  f.identity_logits = (p.identity_head * f.identity).colwise() + p.identity_bias;
  f.identity_probs = softmax_columns(f.identity_logits);
  f.forgery_logits = ((f.forgery.transpose() * p.forgery_head).array() + p.forgery_bias[0]).matrix();
  f.forgery_probs = (Scalar(1) / (Scalar(1) + (-f.forgery_logits.array()).exp())).matrix();
  f.latent.resize(f.identity.rows() + f.structural.rows() + f.forgery.rows(), x.cols());
  f.latent << f.identity, f.structural, f.forgery;
  f.reconstruction = (p.decoder * f.latent).colwise() + p.decoder_bias;
  return f;
}

/// Focusing/balancing parameters. An empty identity_alpha means uniform 1/M.
struct FocalParams {
  std::vector<double> identity_alpha;
  double identity_gamma = 2.0;
  double forgery_alpha = 0.5;
  double forgery_gamma = 2.0;

  double alpha_for(std::size_t cls, std::size_t classes) const {
    if (identity_alpha.empty()) return 1.0 / static_cast<double>(classes);
    return identity_alpha.at(cls);
  }
  void validate(std::size_t classes) const {
    if (!identity_alpha.empty() && identity_alpha.size() != classes) {
      throw ValidationError("fdm.focal.identity_alpha: need one weight per identity");
    }
    for (double a : identity_alpha) {
      if (!(a > 0.0)) throw ValidationError("fdm.focal.identity_alpha: weights must be > 0");
    }
    if (!(forgery_alpha > 0.0 && forgery_alpha < 1.0)) {
      throw ValidationError("fdm.focal.forgery_alpha: must lie in (0, 1)");
    }
    if (!(identity_gamma >= 0.0) || !(forgery_gamma >= 0.0)) {
      throw ValidationError("fdm.focal: gammas must be >= 0");
    }
  }
};

struct LossWeights {
  double identity = 1e-4;
  double forgery = 1.0;
  double recon = 1e-4;
};

struct LossBreakdown {
  double total = 0.0;
  double identity = 0.0;
  double forgery = 0.0;
  double recon = 0.0;
};

namespace detail {

// Per-sample identity focal term and its derivative times p, where p is the
// true-class probability: d(loss)/dp * p.
template <typename Scalar>
std::pair<Scalar, Scalar> identity_focal_term(Scalar p, Scalar alpha, Scalar gamma) {
  using std::log;
  using std::pow;
  const Scalar floor = Scalar(kProbFloor);
  const Scalar lp = log(std::max(p, floor));
  const Scalar q = Scalar(1) - p;
  const Scalar mod = gamma == Scalar(0) ? Scalar(1) : pow(q, gamma);
  const Scalar value = -alpha * mod * lp;
  Scalar dp_times_p = 0;
  if (gamma > Scalar(0) && q > Scalar(0)) dp_times_p += alpha * gamma * pow(q, gamma - 1) * p * lp;
  if (p >= floor) dp_times_p -= alpha * mod;
  return {value, dp_times_p};
}

}  // namespace detail

/// Multi-class focal loss averaged over samples. `probs` is M x N with
/// columns summing to 1; `labels` holds the true class per column.
template <typename Scalar>
Scalar identity_focal_loss(const Matrix<Scalar>& probs, const std::vector<int>& labels,
                           const FocalParams& fp) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.cols() || probs.cols() == 0) {
    throw ValidationError("identity focal loss: label count mismatch");
  }
  const auto classes = static_cast<std::size_t>(probs.rows());
  Scalar total = 0;
  for (Eigen::Index i = 0; i < probs.cols(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= probs.rows()) throw ValidationError("identity focal loss: label out of range");
    total += detail::identity_focal_term<Scalar>(probs(y, i),
                                                 Scalar(fp.alpha_for(static_cast<std::size_t>(y), classes)),
                                                 Scalar(fp.identity_gamma))
                 .first;
  }
  return total / Scalar(probs.cols());
}

template <typename Scalar>
Scalar clamp_prob(Scalar g) {
  return std::clamp(g, Scalar(kProbFloor), Scalar(1) - Scalar(kProbFloor));
}

/// Binary focal loss; labels are 1 for forged, 0 for authentic.
template <typename Scalar>
Scalar forgery_focal_loss(const Vector<Scalar>& probs, const Vector<Scalar>& labels,
                          const FocalParams& fp) {
  if (labels.size() != probs.size() || probs.size() == 0) {
    throw ValidationError("forgery focal loss: label count mismatch");
  }
  using std::log;
  using std::pow;
  const Scalar a = Scalar(fp.forgery_alpha);
  const Scalar gamma = Scalar(fp.forgery_gamma);
  Scalar total = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const Scalar g = clamp_prob(probs[i]);
    const Scalar y = labels[i];
    total += y * a * pow(Scalar(1) - g, gamma) * log(g) +
             (Scalar(1) - y) * (Scalar(1) - a) * pow(g, gamma) * log(Scalar(1) - g);
  }
  return -total / Scalar(probs.size());
}

/// Mean over samples of the squared L2 norm of the residual.
template <typename Scalar>
Scalar recon_loss(const Matrix<Scalar>& shared, const Matrix<Scalar>& reconstructed) {
  if (shared.rows() != reconstructed.rows() || shared.cols() != reconstructed.cols() ||
      shared.cols() == 0) {
    throw ValidationError("reconstruction loss: shape mismatch");
  }
  return (shared - reconstructed).squaredNorm() / Scalar(shared.cols());
}

/// A labelled batch of shared features (F x N).
struct Batch {
  Matrix<double> features;
  std::vector<int> identity;
  Vector<double> forged;  // 1 = forged, 0 = authentic
};

inline LossBreakdown combine_losses(double li, double lf, double lr, const LossWeights& w) {
  return {w.identity * li + w.forgery * lf + w.recon * lr, li, lf, lr};
}

inline LossBreakdown total_loss(const Batch& batch, const Params<double>& p, const FocalParams& fp,
                                const LossWeights& w) {
  const auto f = forward(batch.features, p);
  return combine_losses(identity_focal_loss(f.identity_probs, batch.identity, fp),
                        forgery_focal_loss(f.forgery_probs, batch.forged, fp),
                        recon_loss(batch.features, f.reconstruction), w);
}

/// Analytic gradient of the weighted total loss with respect to every
/// parameter block. Returns the loss breakdown at `p`.
LossBreakdown gradient(const Batch& batch, const Params<double>& p, const FocalParams& fp,
                       const LossWeights& w, Params<double>& grad);

struct GradCheckResult {
  double max_relative_error = 0.0;
  Eigen::Index worst_index = 0;
  double analytic_norm = 0.0;
};

/// Central finite differences on every parameter, h in [1e-6, 1e-3].
/// Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const Params<double>& p, const Batch& batch, const FocalParams& fp,
                           const LossWeights& w, double h);

/// Draws projections and decoder from N(0, scale^2 / fan_in); heads start at zero.
Params<double> random_params(const Dims& d, std::mt19937_64& rng, double scale = 1.0,
                             bool zero_heads = true);

/// Synthetic factorized features: identity prototype + isotropic noise, plus
/// `forgery_shift` along a fixed unit direction for forged samples. Identity
/// is k mod M and forgery is (k / M) mod 2, so classes are balanced.
struct SynthWorld {
  Matrix<double> prototypes;  // F x M, orthogonal to the forgery direction
  Vector<double> forgery_direction;
};

SynthWorld make_world(Eigen::Index feature, Eigen::Index identities, std::uint64_t seed);
Batch synth_dataset(const SynthWorld& world, Eigen::Index samples, double forgery_shift,
                    double noise, std::uint64_t seed);
/// Convenience overload generating its own world from `seed`.
Batch synth_dataset(Eigen::Index feature, Eigen::Index identities, Eigen::Index samples,
                    double forgery_shift, double noise, std::uint64_t seed);

struct TrainConfig {
  Dims dims;
  FocalParams focal;
  LossWeights weights;
  Eigen::Index samples = 2048;
  double forgery_shift = 2.0;
  double noise = 0.5;
  double holdout_fraction = 0.2;
  std::size_t steps = 500;
  double learning_rate = 1.0;
  double init_scale = 1.0;
  std::uint64_t seed = 7;

  void validate() const;
};

struct TrainResult {
  Params<double> params;
  std::vector<LossBreakdown> trajectory;  // loss before each step, then final
  double forgery_accuracy = 0.0;          // held-out
  double identity_accuracy = 0.0;         // held-out
  double train_forgery_accuracy = 0.0;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

/// Full-batch gradient descent on the weighted loss. Throws TrainingDiverged
/// if the loss becomes non-finite.
TrainResult train(const TrainConfig& config);

/// Forgery accuracy (prob >= 0.5 means forged) and identity accuracy (argmax).
std::pair<double, double> evaluate(const Params<double>& p, const Batch& batch);

}  // namespace dfr::fdm
