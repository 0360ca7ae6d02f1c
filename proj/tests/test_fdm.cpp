#include <doctest.h>

#include <cmath>
#include <random>

#include "dfr/fdm.hpp"

using namespace dfr;
using namespace dfr::fdm;

namespace {

Dims small_dims() { return {8, 3, 3, 2, 3}; }

Batch random_batch(const Dims& d, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Batch b;
  b.features = Matrix<double>::NullaryExpr(d.feature, n, [&] { return g(rng); });
  b.forged.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.identity.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(d.identities)));
    b.forged[i] = static_cast<double>(rng() % 2);
  }
  return b;
}

}  // namespace

TEST_CASE("zero parameters give symmetric outputs") {
  const Dims d = small_dims();
  const auto p = Params<double>::zeros(d);
  const auto f = forward(Matrix<double>(Matrix<double>::Zero(d.feature, 2)), p);
  CHECK((f.identity_probs.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
  CHECK((f.forgery_probs.array() - 0.5).abs().maxCoeff() == 0.0);
  CHECK(f.reconstruction.norm() == 0.0);
}

TEST_CASE("pseudo-inverse decoder reconstructs the input") {
  // Projections are the rows of a random orthogonal matrix split 3/3/2; the
  // oracle decoder is the pseudo-inverse of their stack.
  const Dims d = small_dims();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const Matrix<double> a = Matrix<double>::NullaryExpr(8, 8, [&] { return g(rng); });
  const Matrix<double> q = Eigen::HouseholderQR<Matrix<double>>(a).householderQ();

  auto p = Params<double>::zeros(d);
  p.proj_identity = q.topRows(3);
  p.proj_structural = q.middleRows(3, 3);
  p.proj_forgery = q.bottomRows(2);
  p.decoder = q.completeOrthogonalDecomposition().pseudoInverse();

  const Matrix<double> x = Matrix<double>::NullaryExpr(8, 5, [&] { return g(rng); });
  const auto f = forward(x, p);
  CHECK((f.reconstruction - x).norm() < 1e-10);
  CHECK(recon_loss(x, f.reconstruction) < 1e-20);
}

TEST_CASE("forward works for float parameters") {
  Dims d = small_dims();
  auto p = Params<float>::zeros(d);
  p.decoder.setIdentity();
  const auto f = forward(Matrix<float>(Matrix<float>::Ones(d.feature, 3)), p);
  CHECK(f.identity_probs.cols() == 3);
  CHECK(f.forgery_probs[0] == 0.5f);
}

TEST_CASE("identity focal loss") {
  Matrix<double> probs(3, 1);
  probs << 0.0, 1.0, 0.0;
  CHECK(identity_focal_loss(probs, {1}, FocalParams{}) == 0.0);

  FocalParams ce;
  ce.identity_gamma = 0.0;
  ce.identity_alpha = {1.0, 1.0};
  Matrix<double> half(2, 1);
  half << 0.5, 0.5;
  CHECK(identity_focal_loss(half, {0}, ce) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(identity_focal_loss(half, {2}, ce), ValidationError);
  CHECK_THROWS_AS(identity_focal_loss(half, {0, 1}, ce), ValidationError);
}

TEST_CASE("forgery focal loss") {
  FocalParams fp;
  Vector<double> one(1), zero(1), half(1);
  one << 1.0;
  zero << 0.0;
  half << 0.5;
  CHECK(forgery_focal_loss(one, one, fp) < 1e-20);
  CHECK(forgery_focal_loss(zero, zero, fp) < 1e-20);

  fp.forgery_gamma = 0.0;
  fp.forgery_alpha = 0.5;
  CHECK(forgery_focal_loss(half, one, fp) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("reconstruction loss is the per-sample mean of squared norms") {
  const Matrix<double> shared = Matrix<double>::Zero(4, 1);
  const Matrix<double> recon = Matrix<double>::Ones(4, 1);
  CHECK(recon_loss(shared, recon) == 4.0);
  CHECK(recon_loss(shared, shared) == 0.0);
  CHECK(recon_loss<double>(Matrix<double>::Zero(4, 2), Matrix<double>::Ones(4, 2)) == 4.0);
}

TEST_CASE("loss weighting") {
  const LossWeights w;
  CHECK(combine_losses(0, 0, 0, w).total == 0.0);
  CHECK(combine_losses(1, 1, 1, w).total == doctest::Approx(1.0002).epsilon(1e-15));
}

TEST_CASE("analytic gradient matches finite differences") {
  const Dims d = small_dims();
  std::mt19937_64 rng(21);
  const auto p = random_params(d, rng, 1.0, /*zero_heads=*/false);
  const auto batch = random_batch(d, 12, 5);
  const auto r = grad_check(p, batch, FocalParams{}, LossWeights{}, 1e-5);
  CHECK(r.max_relative_error < 1e-4);
  CHECK(r.analytic_norm > 0.0);

  // Unit weights exercise all three terms at comparable scale.
  FocalParams fp;
  fp.identity_alpha = {0.2, 0.5, 0.3};
  fp.forgery_alpha = 0.25;
  fp.identity_gamma = 1.5;
  const auto r2 = grad_check(p, batch, fp, LossWeights{1.0, 1.0, 1.0}, 1e-5);
  CHECK(r2.max_relative_error < 1e-4);

  CHECK_THROWS_AS(grad_check(p, batch, fp, LossWeights{}, 1e-2), ValidationError);
}

TEST_CASE("gradient vanishes when every label is satisfied exactly") {
  // F = 4 split 2/1/1; the decoder copies the latent back, the identity head
  // sees a one-hot feature and the forgery head a +-1 feature, both scaled so
  // the probabilities saturate.
  const Dims d{4, 2, 1, 1, 2};
  auto p = Params<double>::zeros(d);
  p.proj_identity = Matrix<double>::Identity(4, 4).topRows(2);
  p.proj_structural = Matrix<double>::Identity(4, 4).row(2);
  p.proj_forgery = Matrix<double>::Identity(4, 4).row(3);
  p.decoder = Matrix<double>::Identity(4, 4);
  p.identity_head = 1000.0 * Matrix<double>::Identity(2, 2);
  p.forgery_head << 1000.0;

  Batch b;
  b.features.resize(4, 4);
  b.features << 1, 0, 1, 0,
                0, 1, 0, 1,
                0.3, -0.2, 0.7, 0.1,
                1, 1, -1, -1;
  b.identity = {0, 1, 0, 1};
  b.forged.resize(4);
  b.forged << 1, 1, 0, 0;

  Params<double> grad;
  const auto loss = gradient(b, p, FocalParams{}, LossWeights{}, grad);
  CHECK(loss.recon == 0.0);
  CHECK(loss.identity == 0.0);
  CHECK(grad.flatten().norm() < 1e-8);
}

TEST_CASE("synthetic data") {
  const auto world = make_world(16, 4, 3);
  CHECK(world.forgery_direction.norm() == doctest::Approx(1.0));
  CHECK((world.prototypes.transpose() * world.forgery_direction).cwiseAbs().maxCoeff() < 1e-12);

  const auto b = synth_dataset(world, 400, 2.0, 0.5, 4);
  CHECK(b.features.cols() == 400);
  CHECK(b.identity[5] == 1);
  CHECK(b.forged[5] == 1.0);
  CHECK(b.forged.sum() == 200.0);

  // Large shift relative to noise: projections onto the forgery direction
  // separate the classes with a margin.
  const auto sep = synth_dataset(world, 400, 10.0, 0.1, 4);
  const Vector<double> proj = sep.features.transpose() * world.forgery_direction;
  double fake_min = 1e9, real_max = -1e9;
  for (Eigen::Index i = 0; i < 400; ++i) {
    if (sep.forged[i] == 1.0) fake_min = std::min(fake_min, proj[i]);
    else real_max = std::max(real_max, proj[i]);
  }
  CHECK(fake_min > real_max);

  // No shift: class means along the direction agree within sampling error.
  const auto flat = synth_dataset(world, 4000, 0.0, 0.5, 4);
  const Vector<double> fp = flat.features.transpose() * world.forgery_direction;
  double mf = 0, mr = 0;
  for (Eigen::Index i = 0; i < 4000; ++i) (flat.forged[i] == 1.0 ? mf : mr) += fp[i] / 2000.0;
  CHECK(std::abs(mf - mr) < 4 * 0.5 * std::sqrt(2.0 / 2000.0));

  // Prototypes are pairwise further apart than the noise can bridge.
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = i + 1; j < 4; ++j) {
      CHECK((world.prototypes.col(i) - world.prototypes.col(j)).norm() > 4 * 0.1 * std::sqrt(16.0));
    }
  }
}

TEST_CASE("training on the default configuration") {
  const TrainConfig cfg;
  const auto r = train(cfg);
  CHECK(r.forgery_accuracy >= 0.95);
  CHECK(r.identity_accuracy > 0.9);
  REQUIRE(r.trajectory.size() == cfg.steps + 1);
  for (std::size_t i = r.trajectory.size() - 50; i < r.trajectory.size(); ++i) {
    CHECK(r.trajectory[i].total <= r.trajectory[i - 1].total);
  }
}

TEST_CASE("training is deterministic and reports divergence") {
  TrainConfig cfg;
  cfg.samples = 256;
  cfg.steps = 40;
  const auto a = train(cfg), b = train(cfg);
  CHECK(a.params.flatten() == b.params.flatten());

  cfg.learning_rate = 1e6;
  cfg.weights = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(train(cfg), TrainingDiverged);

  TrainConfig bad;
  bad.focal.forgery_alpha = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
