#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dfr/embedding.hpp"
#include "dfr/lexicon.hpp"
#include "dfr/rewards.hpp"
#include "dfr/types.hpp"

namespace dfr {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Numerically stable softmax of a column vector.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

/// Group-normalized advantages (r - mean) / (population std + eps).
/// A constant group yields exact zeros. Throws ValidationError for fewer
/// than two rewards or eps <= 0.
template <typename Derived>
VectorX<typename Derived::Scalar> group_advantages(const Eigen::MatrixBase<Derived>& rewards,
                                                   typename Derived::Scalar eps = 1e-8) {
  using Scalar = typename Derived::Scalar;
  if (rewards.size() < 2) throw ValidationError("group must contain at least two rewards");
  if (!(eps > Scalar(0))) throw ValidationError("advantage epsilon must be > 0");
  if (rewards.maxCoeff() == rewards.minCoeff()) return VectorX<Scalar>::Zero(rewards.size());

  VectorX<Scalar> centered = (rewards.array() - rewards.mean()).matrix();
  // Second centering pass removes the rounding left by the first mean.
  centered.array() -= centered.mean();
  const Scalar stddev = std::sqrt(centered.squaredNorm() / Scalar(rewards.size()));
  return centered / (stddev + eps);
}

inline Eigen::VectorXd group_advantages(std::span<const double> rewards, double eps = 1e-8) {
  return group_advantages(
      Eigen::Map<const Eigen::VectorXd>(rewards.data(), static_cast<Eigen::Index>(rewards.size())),
      eps);
}

/// Categorical policy over a fixed pool of response templates.
template <typename Scalar>
struct BasicToyPolicy {
  VectorX<Scalar> logits;
  std::vector<std::string> pool;

  BasicToyPolicy() = default;
  explicit BasicToyPolicy(std::vector<std::string> templates)
      : logits(VectorX<Scalar>::Zero(static_cast<Eigen::Index>(templates.size()))),
        pool(std::move(templates)) {
    if (pool.empty()) throw ValidationError("policy template pool must be nonempty");
  }

  VectorX<Scalar> probabilities() const { return softmax(logits); }
  Eigen::Index size() const { return logits.size(); }
};

using ToyPolicy = BasicToyPolicy<double>;

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// K independent categorical draws by inverse CDF.
std::vector<std::size_t> sample_group(const ToyPolicy& policy, std::size_t k, std::mt19937_64& rng);

/// Score-function step: logits += lr * sum_k A_k (onehot(i_k) - pi).
template <typename Scalar>
BasicToyPolicy<Scalar> policy_update(const BasicToyPolicy<Scalar>& policy,
                                     std::span<const std::size_t> indices,
                                     const VectorX<Scalar>& advantages, Scalar lr) {
  if (static_cast<Eigen::Index>(indices.size()) != advantages.size()) {
    throw ValidationError("policy_update: indices and advantages differ in length");
  }
  const VectorX<Scalar> pi = policy.probabilities();
  VectorX<Scalar> grad = VectorX<Scalar>::Zero(policy.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(indices[k]);
    if (i >= policy.size()) throw ValidationError("policy_update: template index out of range");
    const Scalar a = advantages[static_cast<Eigen::Index>(k)];
    grad -= a * pi;
    grad[i] += a;
  }
  BasicToyPolicy<Scalar> next = policy;
  next.logits += lr * grad;
  return next;
}

struct SimConfig {
  std::size_t group_size = 8;
  std::size_t iterations = 200;
  double learning_rate = 0.5;
  std::uint64_t seed = 7;
  double advantage_epsilon = 1e-8;
  RewardWeights weights;

  void validate() const;
};

struct TrajectoryPoint {
  std::size_t iteration = 0;
  /// Mean combined reward of the sampled group.
  double mean_reward = 0.0;
  /// Combined reward expected under the policy before the update.
  double expected_reward = 0.0;
  RewardVector component_means;
  /// Probability of the highest-scoring template before the update.
  double best_template_probability = 0.0;
};

struct SimResult {
  std::vector<TrajectoryPoint> trajectory;
  std::vector<RewardVector> template_scores;
  Eigen::VectorXd initial_probabilities;
  Eigen::VectorXd final_probabilities;
  std::size_t best_template = 0;
};

/// sample -> score -> group advantages -> update, repeated. Deterministic per seed.
SimResult run_simulation(const SimConfig& config, const DmaRecord& record,
                         std::vector<std::string> pool, const TextEmbedder& embedder,
                         const Lexicon& lexicon);

struct SimFixture {
  DmaRecord record;
  std::vector<std::string> pool;
};

/// One perfect template and one malformed template for a fixed fake record.
SimFixture default_sim_fixture();
/// The default record with a larger pool: the perfect template plus wrong
/// label, misaligned regions, displaced boxes and malformed variants.
SimFixture demo_sim_fixture();

}  // namespace dfr
