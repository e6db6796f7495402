#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pacrf/corpus.hpp"
#include "pacrf/crf.hpp"
#include "pacrf/emission.hpp"
#include "pacrf/encoder.hpp"
#include "pacrf/transition.hpp"

namespace pacrf {

// Model assemblies. The full model scores sequences with prototype-based
// emissions and episode-conditioned Gaussian transition scores; the others
// drop or replace pieces of that pipeline.
enum class Variant {
  PaCrf,          // full pipeline, Monte-Carlo loss over sampled transitions
  PointEstimate,  // transition means only, no sampling
  NoInteraction,  // approximator applied to raw prototypes
  EmissionOnly,   // per-token softmax over dot-product emissions
  VanillaCrf,     // one globally learned transition matrix
  Match,          // per-token softmax, cosine similarity
  Proto,          // per-token softmax, negative squared Euclidean
  ProtoDot,       // per-token softmax, dot product (alias of EmissionOnly)
};

Variant parse_variant(const std::string& name);
std::string variant_name(Variant variant);
bool variant_uses_crf(Variant variant);

struct ModelConfig {
  Variant variant = Variant::PaCrf;
  std::size_t d_h = 32;
  double mix_lambda = 0.5;
  int mc_samples = 5;
  std::size_t way = 5;  // sizes the shared matrix of VanillaCrf
  bool decode_marginals = false;
};

struct EpisodeDecode {
  // Predicted label sequences for query_flat() order.
  std::vector<std::vector<int>> predictions;
  std::vector<std::string> zero_prototype_labels;
};

// Decode-facing interface; evaluation runs against this.
class EpisodeDecoder {
 public:
  virtual ~EpisodeDecoder() = default;
  virtual EpisodeDecode decode_episode(const Episode& episode,
                                       Rng& rng) const = 0;
};

class Model : public EpisodeDecoder {
 public:
  Model(ModelConfig config, std::shared_ptr<Encoder> encoder);

  void init_parameters(Rng& rng);
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  const ModelConfig& config() const { return config_; }
  Encoder& encoder() { return *encoder_; }
  const Encoder& encoder() const { return *encoder_; }

  // Scalar training loss for one episode on the given tape.
  NodeId episode_loss(Tape& tape, const Episode& episode,
                      EpsilonSource& eps) const;

  EpisodeDecode decode_episode(const Episode& episode,
                               Rng& rng) const override;

 private:
  struct Forward {
    PrototypeSet prototypes;
    NodeId interacted = -1;
    std::vector<NodeId> query_emissions;  // flat, type-major
    std::vector<const std::vector<int>*> query_gold;
  };
  Forward run_forward(Tape& tape, const Episode& episode) const;
  Similarity similarity() const;

  ModelConfig config_;
  std::shared_ptr<Encoder> encoder_;
  ParameterStore params_;
};

}  // namespace pacrf
