#include "pacrf/trainer.hpp"

#include <cmath>
#include <thread>

#include <json.hpp>

#include "pacrf/errors.hpp"

namespace pacrf {

using nlohmann::json;

void TrainingConfig::validate() const {
  if (way == 0 || shot == 0 || query_per_type == 0) {
    throw InvalidConfigError("config: way, shot and query must be > 0");
  }
  if (learning_rate <= 0.0) {
    throw InvalidConfigError("config: learning rate must be > 0");
  }
  if (weight_decay < 0.0) {
    throw InvalidConfigError("config: weight decay must be >= 0");
  }
  if (mc_samples < 1) {
    throw InvalidConfigError("config: mc_samples must be >= 1");
  }
  if (d_h == 0) {
    throw InvalidConfigError("config: d_h must be > 0");
  }
  if (mix_lambda < 0.0 || mix_lambda > 1.0) {
    throw InvalidConfigError("config: lambda must be in [0, 1]");
  }
  parse_variant(variant);
}

std::string TrainingConfig::to_json() const {
  json j;
  j["way"] = way;
  j["shot"] = shot;
  j["query_per_type"] = query_per_type;
  j["train_iterations"] = train_iterations;
  j["eval_episodes"] = eval_episodes;
  j["mc_samples"] = mc_samples;
  j["learning_rate"] = learning_rate;
  j["weight_decay"] = weight_decay;
  j["seed"] = seed;
  j["variant"] = variant;
  j["d_h"] = d_h;
  j["mix_lambda"] = mix_lambda;
  j["max_sentence_len"] = max_sentence_len;
  j["decode_marginals"] = decode_marginals;
  j["train_path"] = train_path;
  j["test_path"] = test_path;
  j["vocab_path"] = vocab_path;
  j["embeddings_path"] = embeddings_path;
  return j.dump();
}

TrainingConfig TrainingConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config json: ") + e.what());
  }
  TrainingConfig c;
  c.way = j.value("way", c.way);
  c.shot = j.value("shot", c.shot);
  c.query_per_type = j.value("query_per_type", c.query_per_type);
  c.train_iterations = j.value("train_iterations", c.train_iterations);
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  c.mc_samples = j.value("mc_samples", c.mc_samples);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.seed = j.value("seed", c.seed);
  c.variant = j.value("variant", c.variant);
  c.d_h = j.value("d_h", c.d_h);
  c.mix_lambda = j.value("mix_lambda", c.mix_lambda);
  c.max_sentence_len = j.value("max_sentence_len", c.max_sentence_len);
  c.decode_marginals = j.value("decode_marginals", c.decode_marginals);
  c.train_path = j.value("train_path", c.train_path);
  c.test_path = j.value("test_path", c.test_path);
  c.vocab_path = j.value("vocab_path", c.vocab_path);
  c.embeddings_path = j.value("embeddings_path", c.embeddings_path);
  return c;
}

ModelConfig TrainingConfig::model_config() const {
  ModelConfig m;
  m.variant = parse_variant(variant);
  m.d_h = d_h;
  m.mix_lambda = mix_lambda;
  m.mc_samples = mc_samples;
  m.way = way;
  m.decode_marginals = decode_marginals;
  return m;
}

std::shared_ptr<Encoder> make_encoder(const TrainingConfig& config,
                                      std::vector<std::string> vocabulary) {
  if (!config.embeddings_path.empty()) {
    auto enc = std::make_shared<PrecomputedEncoder>(
        PrecomputedEncoder::load(config.embeddings_path));
    if (enc->hidden_dim() != config.d_h) {
      throw InvalidShapeError(
          "embedding file dimension " + std::to_string(enc->hidden_dim()) +
          " vs configured d_h " + std::to_string(config.d_h));
    }
    return enc;
  }
  return std::make_shared<TrainableEncoder>(std::move(vocabulary),
                                            config.d_h, config.mix_lambda);
}

TrainResult train_model(Model& model, const Corpus& corpus,
                        const TrainingConfig& config, Rng& rng,
                        AdamW& optimizer) {
  config.validate();
  TrainResult result;
  result.loss_trace.reserve(config.train_iterations);
  NormalEpsilon eps(rng);

  for (std::size_t it = 0; it < config.train_iterations; ++it) {
    const Episode episode =
        sample_episode(corpus, config.way, config.shot,
                       config.query_per_type, rng);
    try {
      Tape tape;
      const NodeId loss = model.episode_loss(tape, episode, eps);
      const double value = tape.value(loss).scalar_value();
      if (!std::isfinite(value)) {
        throw NumericError("loss is not finite");
      }
      const GradientMap grads = tape.backward(loss);
      optimizer.step(model.parameters(), grads);
      result.loss_trace.push_back(value);
    } catch (const NumericError& e) {
      throw NumericError("training diverged at iteration " +
                         std::to_string(it + 1) + ": " + e.what());
    }
  }
  return result;
}

namespace {

struct Moments {
  double mean = 0;
  double stddev = 0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return m;
}

}  // namespace

EvalReport evaluate_model(const EpisodeDecoder& decoder, const Corpus& corpus,
                          std::size_t way, std::size_t shot,
                          std::size_t query_per_type, std::size_t episodes,
                          std::uint64_t seed, int threads) {
  if (episodes == 0) {
    throw InvalidConfigError("evaluate: episode count must be >= 1");
  }
  Rng sampler(seed);
  std::vector<Episode> tasks;
  tasks.reserve(episodes);
  for (std::size_t i = 0; i < episodes; ++i) {
    tasks.push_back(
        sample_episode(corpus, way, shot, query_per_type, sampler));
  }

  std::vector<F1Result> results(episodes);
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Rng decode_rng(Rng::derive_seed(seed, 0x9000 + i));
      const EpisodeDecode decoded = decoder.decode_episode(tasks[i], decode_rng);
      std::vector<std::vector<TriggerSpan>> predicted, gold;
      const auto queries = tasks[i].query_flat();
      for (std::size_t q = 0; q < queries.size(); ++q) {
        TaggedSentence pred;
        pred.tokens = queries[q]->tokens;
        pred.labels = decoded.predictions[q];
        predicted.push_back(labels_to_spans(pred, tasks[i].labels));
        gold.push_back(labels_to_spans(*queries[q], tasks[i].labels));
      }
      results[i] = micro_f1(predicted, gold);
    }
  };

  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(episodes)));
  if (workers == 1) {
    run_range(0, episodes);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (episodes + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(episodes, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  std::vector<double> ps, rs, fs;
  for (const F1Result& r : results) {
    ps.push_back(r.precision);
    rs.push_back(r.recall);
    fs.push_back(r.f1);
  }
  EvalReport report;
  report.episodes = episodes;
  const Moments mp = moments(ps), mr = moments(rs), mf = moments(fs);
  report.precision_mean = mp.mean;
  report.precision_std = mp.stddev;
  report.recall_mean = mr.mean;
  report.recall_std = mr.stddev;
  report.f1_mean = mf.mean;
  report.f1_std = mf.stddev;
  return report;
}

CheckpointData make_checkpoint(const Model& model, const TrainingConfig& cfg,
                               const std::vector<std::string>& vocabulary,
                               const std::string& rng_state) {
  json j;
  j["config"] = json::parse(cfg.to_json());
  j["vocabulary"] = vocabulary;
  j["encoder"] = cfg.embeddings_path.empty() ? "trainable" : "precomputed";

  CheckpointData data;
  data.config_json = j.dump();
  data.rng_state = rng_state;
  for (const auto& [name, tensor] : model.parameters()) {
    data.tensors.emplace(name, tensor);
  }
  return data;
}

RestoredModel restore_model(const CheckpointData& data,
                            const std::string& variant_override,
                            std::size_t d_h_override) {
  json j;
  try {
    j = json::parse(data.config_json);
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("corrupt checkpoint config: ") +
                          e.what());
  }
  RestoredModel out;
  out.config = TrainingConfig::from_json(j.at("config").dump());
  out.vocabulary = j.value("vocabulary", std::vector<std::string>{});
  out.rng_state = data.rng_state;

  if (d_h_override != 0 && d_h_override != out.config.d_h) {
    throw InvalidShapeError(
        "checkpoint was trained with d_h " + std::to_string(out.config.d_h) +
        ", requested " + std::to_string(d_h_override));
  }
  if (!variant_override.empty()) {
    out.config.variant = variant_override;
  }

  auto encoder = make_encoder(out.config, out.vocabulary);
  auto model =
      std::make_unique<Model>(out.config.model_config(), std::move(encoder));
  Rng init_rng(out.config.seed);
  model->init_parameters(init_rng);

  for (auto& [name, tensor] : model->parameters()) {
    auto it = data.tensors.find(name);
    if (it == data.tensors.end()) {
      throw CheckpointError("checkpoint missing parameter: " + name);
    }
    if (!it->second.same_shape(tensor)) {
      throw InvalidShapeError("checkpoint parameter " + name + " has shape " +
                              it->second.shape_str() + ", expected " +
                              tensor.shape_str());
    }
    tensor = it->second;
  }
  out.model = std::move(model);
  return out;
}

}  // namespace pacrf
