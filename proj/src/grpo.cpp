#include "dfr/grpo.hpp"

#include "dfr/response.hpp"

namespace dfr {

void SimConfig::validate() const {
  if (group_size < 2) throw ValidationError("sim.group_size: must be >= 2");
  if (!(learning_rate >= 0.0)) throw ValidationError("sim.learning_rate: must be >= 0");
  if (!(advantage_epsilon > 0.0)) throw ValidationError("sim.advantage_epsilon: must be > 0");
  weights.validate();
}

std::vector<std::size_t> sample_group(const ToyPolicy& policy, std::size_t k, std::mt19937_64& rng) {
  const Eigen::VectorXd pi = policy.probabilities();
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t n = 0; n < k; ++n) {
    const double u = uniform01(rng);
    double cdf = 0.0;
    auto pick = static_cast<std::size_t>(pi.size() - 1);
    for (Eigen::Index i = 0; i < pi.size(); ++i) {
      cdf += pi[i];
      if (u < cdf) {
        pick = static_cast<std::size_t>(i);
        break;
      }
    }
    out.push_back(pick);
  }
  return out;
}

SimResult run_simulation(const SimConfig& config, const DmaRecord& record,
                         std::vector<std::string> pool, const TextEmbedder& embedder,
                         const Lexicon& lexicon) {
  config.validate();
  record.validate();
  ToyPolicy policy(std::move(pool));

  SimResult result;
  // score_response is a pure function of the template text, so each template
  // is scored once and sampled candidates look their vector up.
  Eigen::VectorXd combined(policy.size());
  for (Eigen::Index i = 0; i < policy.size(); ++i) {
    result.template_scores.push_back(score_response(policy.pool[static_cast<std::size_t>(i)], record,
                                                    config.weights, embedder, lexicon));
    combined[i] = result.template_scores.back().combined;
  }
  Eigen::Index best = 0;
  combined.maxCoeff(&best);
  result.best_template = static_cast<std::size_t>(best);
  result.initial_probabilities = policy.probabilities();

  std::mt19937_64 rng(config.seed);
  const auto k = config.group_size;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const Eigen::VectorXd pi = policy.probabilities();
    auto indices = sample_group(policy, k, rng);

    Eigen::VectorXd rewards(static_cast<Eigen::Index>(k));
    TrajectoryPoint point;
    point.iteration = it;
    for (std::size_t n = 0; n < k; ++n) {
      const auto& v = result.template_scores[indices[n]];
      rewards[static_cast<Eigen::Index>(n)] = v.combined;
      point.component_means.format += v.format;
      point.component_means.accuracy += v.accuracy;
      point.component_means.text += v.text;
      point.component_means.roi += v.roi;
      point.component_means.align += v.align;
      point.component_means.combined += v.combined;
    }
    const double inv_k = 1.0 / static_cast<double>(k);
    auto& m = point.component_means;
    m.format *= inv_k;
    m.accuracy *= inv_k;
    m.text *= inv_k;
    m.roi *= inv_k;
    m.align *= inv_k;
    m.combined *= inv_k;
    point.mean_reward = m.combined;
    point.expected_reward = pi.dot(combined);
    point.best_template_probability = pi[static_cast<Eigen::Index>(result.best_template)];
    result.trajectory.push_back(point);

    const Eigen::VectorXd adv = group_advantages(rewards, config.advantage_epsilon);
    policy = policy_update(policy, std::span<const std::size_t>(indices), adv, config.learning_rate);
  }
  result.final_probabilities = policy.probabilities();
  return result;
}

namespace {

DmaRecord fixture_record() {
  DmaRecord r;
  r.image_ref = "fixture/face_0001.png";
  r.question = "Is this face real or fake? Explain and localize the evidence.";
  r.gt_text = "The image is fake: the mouth is blurred and the nose edges are blended.";
  r.gt_label = Label::Fake;
  r.gt_boxes = {{RegionId::Nose, Box{0.42, 0.40, 0.58, 0.60}},
                {RegionId::Mouth, Box{0.38, 0.62, 0.62, 0.78}}};
  return r;
}

std::string perfect_template(const DmaRecord& r) {
  return format_response("Blending seams around the lower face point to manipulation.", r.gt_text,
                         r.gt_boxes);
}

}  // namespace

SimFixture default_sim_fixture() {
  SimFixture f;
  f.record = fixture_record();
  f.pool = {perfect_template(f.record),
            "The face looks real to me, nothing unusual about the mouth."};
  return f;
}

SimFixture demo_sim_fixture() {
  SimFixture f = default_sim_fixture();
  const auto& r = f.record;
  f.pool.push_back(format_response("Texture looks natural.",
                                   "The image is real: the mouth and nose look natural.",
                                   r.gt_boxes));
  f.pool.push_back(format_response("Edges near the ear.",
                                   "The image is fake: the ear and hairline are inconsistent.",
                                   r.gt_boxes));
  f.pool.push_back(format_response("Mouth artifacts.", r.gt_text,
                                   {{RegionId::Nose, Box{0.05, 0.05, 0.20, 0.20}},
                                    {RegionId::Mouth, Box{0.70, 0.80, 0.95, 0.95}}}));
  f.pool.push_back("<think>mouth blur</think><answer>{\"explanation\": \"fake\"}</answer>");
  return f;
}

}  // namespace dfr
