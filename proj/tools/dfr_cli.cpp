// dfr: reward scoring, dataset building and desk-scale simulators for
// explainable deepfake detection.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "dfr/app.hpp"
#include "dfr/dma_builder.hpp"
#include "dfr/metrics.hpp"
#include "dfr/records.hpp"

namespace {

using namespace dfr;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta_f, beta_a, beta_t, beta_r, beta_align, align_eps;
};

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig c = g.config_path.empty() ? RunConfig::from_json(nlohmann::json::object())
                                      : RunConfig::load(g.config_path);
  if (g.seed) c.set_seed(*g.seed);
  if (g.beta_f) c.weights.beta_format = *g.beta_f;
  if (g.beta_a) c.weights.beta_accuracy = *g.beta_a;
  if (g.beta_t) c.weights.beta_text = *g.beta_t;
  if (g.beta_r) c.weights.beta_roi = *g.beta_r;
  if (g.beta_align) c.weights.beta_align = *g.beta_align;
  if (g.align_eps) c.weights.align_epsilon = *g.align_eps;
  c.sim.weights = c.weights;
  c.validate();
  return c;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

// Writes to `path`, or stdout when empty.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  auto out = open_output(path);
  fn(out);
  out.flush();
  if (!out) throw IoError("error writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rewards, dataset building and toy simulators for explainable deepfake detection"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--seed", g.seed, "Seed for the simulators");
  app.add_option("--weights-beta-f", g.beta_f, "Format reward weight");
  app.add_option("--weights-beta-a", g.beta_a, "Accuracy reward weight");
  app.add_option("--weights-beta-t", g.beta_t, "Text relevance reward weight");
  app.add_option("--weights-beta-r", g.beta_r, "ROI reward weight");
  app.add_option("--weights-beta-align", g.beta_align, "Alignment reward weight");
  app.add_option("--align-eps", g.align_eps, "Alignment reward epsilon");

  std::string responses_path, dma_path, out_path;
  auto* score = app.add_subcommand("score", "Score candidate responses against DMA records");
  score->add_option("--responses", responses_path, "Responses JSONL")->required();
  score->add_option("--dma", dma_path, "DMA dataset JSONL")->required();
  score->add_option("-o,--out", out_path, "Output JSONL (default stdout)");

  std::string src_path, landmarks_path, report_path;
  std::optional<double> pad;
  auto* build = app.add_subcommand("build-dma", "Build a text-spatially aligned dataset");
  build->add_option("--source", src_path, "Source records JSONL")->required();
  build->add_option("--landmarks", landmarks_path, "Landmark fixture JSONL (overrides config)");
  build->add_option("-o,--out", out_path, "Output DMA JSONL")->required();
  build->add_option("--pad", pad, "Box padding as a fraction of the frame");
  build->add_option("--report", report_path, "Build report JSON (default stdout)");

  std::string pool_name = "default";
  std::optional<std::size_t> iterations;
  auto* simulate = app.add_subcommand("simulate", "Run the group-relative toy policy loop");
  simulate->add_option("--pool", pool_name, "Template pool: default or demo")
      ->check(CLI::IsMember({"default", "demo"}));
  simulate->add_option("--iterations", iterations, "Override iteration count");
  simulate->add_option("-o,--out", out_path, "Trajectory JSONL (default stdout)");

  auto* fdm_train = app.add_subcommand("fdm-train", "Train the disentanglement toy on synthetic features");
  fdm_train->add_option("-o,--out", out_path, "Metrics JSONL (default stdout)");

  std::string predictions_path;
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy, F1 and AUC of a prediction file");
  evaluate->add_option("--predictions", predictions_path, "Predictions JSONL")
      ->required();
  evaluate->add_option("-o,--out", out_path, "Metrics JSON (default stdout)");

  auto* serve_cmd = app.add_subcommand("serve", "Line-delimited scoring sidecar on stdin/stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    const RunConfig config = resolve_config(g);

    if (*score) {
      const Scorer scorer(config);
      const auto records = load_dma_file(dma_path);
      std::ifstream responses(responses_path);
      if (!responses) throw IoError("cannot open " + responses_path);
      emit(out_path, [&](std::ostream& out) { score_responses(responses, records, scorer, out); });
    } else if (*build) {
      std::filesystem::path lm = landmarks_path;
      if (lm.empty()) {
        if (!config.landmarks_path) throw ValidationError("landmarks: no landmark fixture given");
        lm = *config.landmarks_path;
      }
      const Lexicon lexicon =
          config.lexicon_path ? load_lexicon(*config.lexicon_path) : default_lexicon();
      const auto report = build_dataset(src_path, lm, out_path, lexicon, pad.value_or(config.pad));
      emit(report_path, [&](std::ostream& out) { out << dump_line(report.to_json()) << '\n'; });
    } else if (*simulate) {
      const Scorer scorer(config);
      auto sim = config.sim;
      if (iterations) sim.iterations = *iterations;
      auto fixture = pool_name == "demo" ? demo_sim_fixture() : default_sim_fixture();
      const auto result = run_simulation(sim, fixture.record, fixture.pool, scorer.embedder(), scorer.lexicon());
      emit(out_path, [&](std::ostream& out) { write_simulation(result, sim, out); });
    } else if (*fdm_train) {
      const auto result = fdm::train(config.fdm);
      emit(out_path, [&](std::ostream& out) { write_fdm_report(result, config.fdm, out); });
    } else if (*evaluate) {
      const auto report = evaluate_predictions(std::filesystem::path(predictions_path));
      emit(out_path, [&](std::ostream& out) { out << dump_line(report.to_json()) << '\n'; });
    } else if (*serve_cmd) {
      const Scorer scorer(config);
      std::ios::sync_with_stdio(false);
      return serve(std::cin, std::cout, scorer);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
