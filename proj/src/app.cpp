#include "dfr/app.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "dfr/records.hpp"
#include "dfr/response.hpp"

namespace dfr {

using nlohmann::json;

namespace {

// Reads fields of one JSON object, rejecting unknown keys. Errors carry the
// dotted field path.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (auto* v = get(key)) {
      if (!v->is_number()) fail(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (auto* v = get(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        fail(field(key), "expected a non-negative integer");
      }
      out = static_cast<Int>(v->get<long long>());
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (auto* v = get(key)) {
      if (!v->is_boolean()) fail(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (auto* v = get(key)) {
      if (!v->is_string()) fail(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) fail(field(key), "unknown field");
    }
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& what) {
    throw ValidationError(field + ": " + what);
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_weights(FieldReader& r, RewardWeights& w) {
  r.number("beta_f", w.beta_format);
  r.number("beta_a", w.beta_accuracy);
  r.number("beta_t", w.beta_text);
  r.number("beta_r", w.beta_roi);
  r.number("beta_align", w.beta_align);
  r.number("align_epsilon", w.align_epsilon);
  r.finish();
}

void read_fdm(FieldReader& r, fdm::TrainConfig& c) {
  if (auto* dims = r.get("dims")) {
    FieldReader d(*dims, r.field("dims"));
    d.integer("feature", c.dims.feature);
    d.integer("identity", c.dims.identity);
    d.integer("structural", c.dims.structural);
    d.integer("forgery", c.dims.forgery);
    d.integer("identities", c.dims.identities);
    d.finish();
  }
  if (auto* focal = r.get("focal")) {
    FieldReader f(*focal, r.field("focal"));
    if (auto* alpha = f.get("identity_alpha")) {
      if (!alpha->is_array()) FieldReader::fail(f.field("identity_alpha"), "expected an array");
      c.focal.identity_alpha.clear();
      for (const auto& a : *alpha) {
        if (!a.is_number()) FieldReader::fail(f.field("identity_alpha"), "expected numbers");
        c.focal.identity_alpha.push_back(a.get<double>());
      }
    }
    f.number("identity_gamma", c.focal.identity_gamma);
    f.number("forgery_alpha", c.focal.forgery_alpha);
    f.number("forgery_gamma", c.focal.forgery_gamma);
    f.finish();
  }
  if (auto* lambda = r.get("lambda")) {
    FieldReader l(*lambda, r.field("lambda"));
    l.number("identity", c.weights.identity);
    l.number("forgery", c.weights.forgery);
    l.number("recon", c.weights.recon);
    l.finish();
  }
  r.integer("samples", c.samples);
  r.number("forgery_shift", c.forgery_shift);
  r.number("noise", c.noise);
  r.number("holdout_fraction", c.holdout_fraction);
  r.integer("steps", c.steps);
  r.number("learning_rate", c.learning_rate);
  r.number("init_scale", c.init_scale);
  r.finish();
}

// Re-raises a ValidationError with a field prefix.
template <typename Fn>
void with_field(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    std::string what = e.what();
    if (what.rfind(field, 0) == 0) throw;
    throw ValidationError(field + ": " + what);
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  FieldReader root(j, "");
  if (auto* seed = root.get("seed")) {
    if (!seed->is_number_integer()) FieldReader::fail("seed", "expected an integer");
    c.seed = seed->get<std::uint64_t>();
  }
  if (auto* rewards = root.get("rewards")) {
    FieldReader r(*rewards, "rewards");
    read_weights(r, c.weights);
  }
  if (auto* lex = root.get("lexicon")) {
    if (!lex->is_string()) FieldReader::fail("lexicon", "expected a file path");
    c.lexicon_path = lex->get<std::string>();
  }
  if (auto* emb = root.get("embedder")) {
    FieldReader e(*emb, "embedder");
    std::string kind = "builtin";
    e.string("kind", kind);
    if (kind == "builtin") {
      c.embedder.kind = EmbedderConfig::Kind::Builtin;
    } else if (kind == "remote") {
      c.embedder.kind = EmbedderConfig::Kind::Remote;
    } else {
      FieldReader::fail("embedder.kind", "expected 'builtin' or 'remote'");
    }
    e.integer("dim", c.embedder.dim);
    e.string("endpoint", c.embedder.endpoint);
    e.boolean("cache", c.embedder.cache);
    e.boolean("fallback", c.embedder.fallback);
    e.finish();
  }
  if (auto* lm = root.get("landmarks")) {
    if (!lm->is_string()) FieldReader::fail("landmarks", "expected a file path");
    c.landmarks_path = lm->get<std::string>();
  }
  root.number("pad", c.pad);
  if (auto* sim = root.get("sim")) {
    FieldReader s(*sim, "sim");
    s.integer("group_size", c.sim.group_size);
    s.integer("iterations", c.sim.iterations);
    s.number("learning_rate", c.sim.learning_rate);
    s.number("advantage_epsilon", c.sim.advantage_epsilon);
    s.finish();
  }
  if (auto* f = root.get("fdm")) {
    FieldReader r(*f, "fdm");
    read_fdm(r, c.fdm);
  }
  root.finish();
  c.set_seed(c.seed);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  auto doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ValidationError("config: " + path.string() + " is not valid JSON");
  return from_json(doc);
}

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  sim.seed = s;
  fdm.seed = s;
}

void RunConfig::validate() const {
  weights.validate();
  if (!(pad >= 0.0 && pad <= 0.5)) throw ValidationError("pad: must lie in [0, 0.5]");
  if (embedder.dim == 0 && embedder.kind == EmbedderConfig::Kind::Builtin) {
    throw ValidationError("embedder.dim: must be positive");
  }
  if (embedder.kind == EmbedderConfig::Kind::Remote && embedder.endpoint.empty()) {
    throw ValidationError("embedder.endpoint: required for the remote embedder");
  }
  with_field("sim", [&] {
    auto s = sim;
    s.weights = weights;
    s.validate();
  });
  with_field("fdm", [&] { fdm.validate(); });
  if (lexicon_path && !std::filesystem::exists(*lexicon_path)) {
    throw IoError("lexicon: file not found: " + lexicon_path->string());
  }
  if (landmarks_path && !std::filesystem::exists(*landmarks_path)) {
    throw IoError("landmarks: file not found: " + landmarks_path->string());
  }
}

json RunConfig::provenance() const {
  return {{"weights", to_json(weights)},
          {"fdm_lambda",
           {{"identity", fdm.weights.identity}, {"forgery", fdm.weights.forgery}, {"recon", fdm.weights.recon}}},
          {"seed", seed}};
}

Scorer::Scorer(const RunConfig& config) : weights_(config.weights) {
  weights_.validate();
  if (config.lexicon_path) {
    lexicon_ = std::make_shared<const Lexicon>(load_lexicon(*config.lexicon_path));
  } else {
    lexicon_ = std::shared_ptr<const Lexicon>(&default_lexicon(), [](const Lexicon*) {});
  }
  auto builtin = std::make_shared<const HashedBagEmbedder>(
      config.embedder.dim == 0 ? HashedBagEmbedder::kDefaultDim : config.embedder.dim);
  if (config.embedder.kind == EmbedderConfig::Kind::Remote) {
    embedder_ = std::make_shared<const RemoteEmbedder>(config.embedder.endpoint, config.embedder.dim,
                                                       config.embedder.cache,
                                                       config.embedder.fallback ? builtin : nullptr);
  } else {
    embedder_ = builtin;
  }
}

RewardVector Scorer::score(std::string_view raw, const DmaRecord& record) const {
  return score_response(raw, record, weights_, *embedder_, *lexicon_);
}

json Scorer::score_json(std::string_view raw, const DmaRecord& record) const {
  const auto parsed = parse_response(raw);
  const auto v = score_parsed(parsed, record, weights_, *embedder_, *lexicon_);
  return {{"components", to_json(v)},
          {"combined", v.combined},
          {"well_formed", parsed.well_formed},
          {"diagnostic", to_string(parsed.diagnostic)},
          {"pred_label", to_string(parsed.pred_label)}};
}

json Scorer::provenance() const {
  return {{"weights", to_json(weights_)}, {"embedder", embedder_->name()}, {"lexicon_hash", lexicon_->hash()}};
}

std::size_t score_responses(std::istream& responses, const std::vector<DmaRecord>& records,
                            const Scorer& scorer, std::ostream& out) {
  std::map<std::string, const DmaRecord*, std::less<>> by_id;
  for (const auto& r : records) by_id.emplace(r.image_ref, &r);

  out << dump_line({{"score_header", scorer.provenance()}}) << '\n';
  std::string line;
  std::size_t line_no = 0;
  std::size_t scored = 0;
  while (std::getline(responses, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "responses line " + std::to_string(line_no) + ": ";
    auto doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) throw ValidationError(where + "not a JSON object");
    if (!doc.contains("record_id") || !doc["record_id"].is_string()) {
      throw ValidationError(where + "missing string field 'record_id'");
    }
    if (!doc.contains("response") || !doc["response"].is_string()) {
      throw ValidationError(where + "missing string field 'response'");
    }
    const auto& id = doc["record_id"].get_ref<const std::string&>();
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError(where + "unknown record id '" + id + "'");

    json reply = scorer.score_json(doc["response"].get_ref<const std::string&>(), *it->second);
    reply["line"] = line_no;
    reply["record_id"] = id;
    if (doc.contains("id")) reply["id"] = doc["id"];
    out << dump_line(reply) << '\n';
    ++scored;
  }
  if (responses.bad()) throw IoError("error reading responses");
  return scored;
}

int serve(std::istream& in, std::ostream& out, const Scorer& scorer) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json id = nullptr;
    json reply;
    try {
      auto doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (doc.is_discarded() || !doc.is_object()) throw ValidationError("request is not a JSON object");
      if (doc.contains("id")) id = doc["id"];
      if (!doc.contains("raw_response") || !doc["raw_response"].is_string()) {
        throw ValidationError("missing string field 'raw_response'");
      }
      if (!doc.contains("record")) throw ValidationError("missing field 'record'");
      const auto record = dma_record_from_json(doc["record"]);
      reply = scorer.score_json(doc["raw_response"].get_ref<const std::string&>(), record);
    } catch (const Error& e) {
      reply = {{"error", e.what()}};
    } catch (const std::exception& e) {
      reply = {{"error", std::string("internal: ") + e.what()}};
    }
    reply["id"] = id;
    out << dump_line(reply) + "\n" << std::flush;
  }
  return kExitOk;
}

json simulation_summary(const SimResult& result) {
  const auto& t = result.trajectory;
  if (t.empty()) return {{"iterations", 0}};
  const std::size_t window = std::max<std::size_t>(1, t.size() / 10);
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    head += t[i].mean_reward;
    tail += t[t.size() - 1 - i].mean_reward;
  }
  head /= static_cast<double>(window);
  tail /= static_cast<double>(window);
  const double delta = tail - head;
  const char* trend = delta > 1e-9 ? "increasing" : delta < -1e-9 ? "decreasing" : "flat";
  const auto best = static_cast<Eigen::Index>(result.best_template);
  return {{"iterations", t.size()},
          {"initial_mean_reward", t.front().mean_reward},
          {"final_mean_reward", t.back().mean_reward},
          {"head_window_mean", head},
          {"tail_window_mean", tail},
          {"trend", trend},
          {"best_template", result.best_template},
          {"best_template_initial_probability", result.initial_probabilities[best]},
          {"best_template_final_probability", result.final_probabilities[best]}};
}

void write_simulation(const SimResult& result, const SimConfig& config, std::ostream& out) {
  json scores = json::array();
  for (const auto& v : result.template_scores) {
    json s = to_json(v);
    s["combined"] = v.combined;
    scores.push_back(std::move(s));
  }
  out << dump_line({{"sim_header",
                     {{"group_size", config.group_size},
                      {"iterations", config.iterations},
                      {"learning_rate", config.learning_rate},
                      {"seed", config.seed},
                      {"weights", to_json(config.weights)},
                      {"template_scores", std::move(scores)}}}})
      << '\n';
  for (const auto& p : result.trajectory) {
    out << dump_line({{"iteration", p.iteration},
                      {"mean_reward", p.mean_reward},
                      {"expected_reward", p.expected_reward},
                      {"best_template_probability", p.best_template_probability},
                      {"components", to_json(p.component_means)}})
        << '\n';
  }
  out << dump_line({{"summary", simulation_summary(result)}}) << '\n';
}

void write_fdm_report(const fdm::TrainResult& result, const fdm::TrainConfig& config, std::ostream& out) {
  const auto& d = config.dims;
  out << dump_line({{"fdm_header",
                     {{"dims",
                       {{"feature", d.feature},
                        {"identity", d.identity},
                        {"structural", d.structural},
                        {"forgery", d.forgery},
                        {"identities", d.identities}}},
                      {"lambda",
                       {{"identity", config.weights.identity},
                        {"forgery", config.weights.forgery},
                        {"recon", config.weights.recon}}},
                      {"focal",
                       {{"identity_gamma", config.focal.identity_gamma},
                        {"forgery_alpha", config.focal.forgery_alpha},
                        {"forgery_gamma", config.focal.forgery_gamma}}},
                      {"samples", config.samples},
                      {"steps", config.steps},
                      {"learning_rate", config.learning_rate},
                      {"seed", config.seed}}}})
      << '\n';
  for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
    const auto& l = result.trajectory[i];
    out << dump_line({{"step", i},
                      {"loss", l.total},
                      {"identity", l.identity},
                      {"forgery", l.forgery},
                      {"recon", l.recon}})
        << '\n';
  }
  out << dump_line({{"summary",
                     {{"forgery_accuracy", result.forgery_accuracy},
                      {"identity_accuracy", result.identity_accuracy},
                      {"train_forgery_accuracy", result.train_forgery_accuracy},
                      {"final_loss", result.trajectory.back().total}}}})
      << '\n';
}

}  // namespace dfr
