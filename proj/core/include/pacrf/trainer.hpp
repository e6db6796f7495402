#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pacrf/checkpoint.hpp"
#include "pacrf/model.hpp"
#include "pacrf/optimizer.hpp"

namespace pacrf {

struct TrainingConfig {
  std::size_t way = 5;
  std::size_t shot = 5;
  std::size_t query_per_type = 5;
  std::size_t train_iterations = 2000;
  std::size_t eval_episodes = 200;
  int mc_samples = 5;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  std::uint64_t seed = 42;
  std::string variant = "pa-crf";
  std::size_t d_h = 32;
  double mix_lambda = 0.5;
  std::size_t max_sentence_len = 128;
  bool decode_marginals = false;
  std::string train_path;
  std::string test_path;
  std::string vocab_path;       // word list for the trainable encoder
  std::string embeddings_path;  // nonempty selects the precomputed encoder

  void validate() const;
  std::string to_json() const;
  static TrainingConfig from_json(const std::string& text);

  ModelConfig model_config() const;
};

// Encoder per config: precomputed when embeddings_path is set, otherwise a
// trainable encoder over `vocabulary`.
std::shared_ptr<Encoder> make_encoder(const TrainingConfig& config,
                                      std::vector<std::string> vocabulary);

struct TrainResult {
  std::vector<double> loss_trace;  // one entry per iteration
};

// Episodic training: sample an episode, build the loss, backpropagate, and
// apply one optimizer step per iteration. Raises NumericError naming the
// iteration if the loss stops being finite.
TrainResult train_model(Model& model, const Corpus& corpus,
                        const TrainingConfig& config, Rng& rng,
                        AdamW& optimizer);

struct EvalReport {
  std::size_t episodes = 0;
  double precision_mean = 0, precision_std = 0;
  double recall_mean = 0, recall_std = 0;
  double f1_mean = 0, f1_std = 0;
};

// Per-episode micro F1, aggregated as mean and population standard
// deviation. Episodes are pre-sampled with `seed`, so results do not depend
// on the thread count.
EvalReport evaluate_model(const EpisodeDecoder& decoder, const Corpus& corpus,
                          std::size_t way, std::size_t shot,
                          std::size_t query_per_type, std::size_t episodes,
                          std::uint64_t seed, int threads = 1);

// Checkpoint glue. The config snapshot plus the encoder vocabulary travel in
// the checkpoint's config text.
CheckpointData make_checkpoint(const Model& model, const TrainingConfig& cfg,
                               const std::vector<std::string>& vocabulary,
                               const std::string& rng_state);

struct RestoredModel {
  std::unique_ptr<Model> model;
  TrainingConfig config;
  std::vector<std::string> vocabulary;
  std::string rng_state;
};

// Rebuilds a model (optionally as a different variant sharing the stored
// parameters) from a checkpoint. Parameter shapes are validated against the
// stored config; a different requested d_h is an InvalidShapeError.
RestoredModel restore_model(const CheckpointData& data,
                            const std::string& variant_override = "",
                            std::size_t d_h_override = 0);

}  // namespace pacrf
