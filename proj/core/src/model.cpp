#include "pacrf/model.hpp"

#include <algorithm>
#include <cmath>

#include "pacrf/errors.hpp"

namespace pacrf {

Variant parse_variant(const std::string& name) {
  if (name == "pa-crf") return Variant::PaCrf;
  if (name == "point-estimate") return Variant::PointEstimate;
  if (name == "no-interaction") return Variant::NoInteraction;
  if (name == "emission-only") return Variant::EmissionOnly;
  if (name == "vanilla-crf") return Variant::VanillaCrf;
  if (name == "match") return Variant::Match;
  if (name == "proto") return Variant::Proto;
  if (name == "proto-dot") return Variant::ProtoDot;
  throw InvalidConfigError("unknown variant: " + name);
}

std::string variant_name(Variant variant) {
  switch (variant) {
    case Variant::PaCrf: return "pa-crf";
    case Variant::PointEstimate: return "point-estimate";
    case Variant::NoInteraction: return "no-interaction";
    case Variant::EmissionOnly: return "emission-only";
    case Variant::VanillaCrf: return "vanilla-crf";
    case Variant::Match: return "match";
    case Variant::Proto: return "proto";
    case Variant::ProtoDot: return "proto-dot";
  }
  throw InvalidConfigError("unknown variant value");
}

bool variant_uses_crf(Variant variant) {
  switch (variant) {
    case Variant::PaCrf:
    case Variant::PointEstimate:
    case Variant::NoInteraction:
    case Variant::VanillaCrf:
      return true;
    default:
      return false;
  }
}

Model::Model(ModelConfig config, std::shared_ptr<Encoder> encoder)
    : config_(config), encoder_(std::move(encoder)) {
  if (!encoder_) {
    throw InvalidConfigError("model: encoder is null");
  }
  if (encoder_->hidden_dim() != config_.d_h) {
    throw InvalidShapeError(
        "model: encoder hidden dim " +
        std::to_string(encoder_->hidden_dim()) + " vs configured " +
        std::to_string(config_.d_h));
  }
  if (config_.mc_samples < 1) {
    throw InvalidConfigError("model: mc_samples must be >= 1");
  }
}

void Model::init_parameters(Rng& rng) {
  encoder_->init_parameters(params_, rng);
  switch (config_.variant) {
    case Variant::PaCrf:
    case Variant::PointEstimate:
      init_interaction_params(params_, config_.d_h, rng);
      init_approximator_params(params_, config_.d_h, rng);
      break;
    case Variant::NoInteraction:
      init_approximator_params(params_, config_.d_h, rng);
      break;
    case Variant::VanillaCrf: {
      const std::size_t L = 2 * config_.way + 1;
      params_.add("vanilla.transitions", Tensor::zeros(L, L));
      break;
    }
    default:
      break;  // softmax variants carry only the encoder
  }
}

Similarity Model::similarity() const {
  switch (config_.variant) {
    case Variant::Match: return Similarity::Cosine;
    case Variant::Proto: return Similarity::NegSqEuclidean;
    default: return Similarity::Dot;
  }
}

Model::Forward Model::run_forward(Tape& tape, const Episode& episode) const {
  Forward fwd;

  std::vector<NodeId> hidden;
  std::vector<const std::vector<int>*> labels;
  for (const TaggedSentence* s : episode.support_flat()) {
    hidden.push_back(encoder_->encode(tape, params_, *s));
    labels.push_back(&s->labels);
  }
  fwd.prototypes =
      compute_prototypes(tape, hidden, labels, episode.labels.num_labels());

  switch (config_.variant) {
    case Variant::PaCrf:
    case Variant::PointEstimate:
      fwd.interacted = interact(tape, fwd.prototypes.node, params_);
      break;
    case Variant::NoInteraction:
      fwd.interacted = fwd.prototypes.node;
      break;
    default:
      break;
  }

  const Similarity sim = similarity();
  for (const TaggedSentence* q : episode.query_flat()) {
    const NodeId h = encoder_->encode(tape, params_, *q);
    fwd.query_emissions.push_back(
        emission_scores(tape, h, fwd.prototypes.node, sim));
    fwd.query_gold.push_back(&q->labels);
  }
  return fwd;
}

namespace {

// Mean over sentences of the per-token cross-entropy sum.
NodeId softmax_nll(Tape& tape, const std::vector<NodeId>& emissions,
                   const std::vector<const std::vector<int>*>& gold) {
  NodeId total = tape.constant(Tensor::scalar(0.0));
  for (std::size_t q = 0; q < emissions.size(); ++q) {
    const Tensor& e = tape.value(emissions[q]);
    const NodeId lse = tape.logsumexp_rows(emissions[q]);  // n x 1
    const NodeId log_probs = tape.add(emissions[q], tape.scale(lse, -1.0));
    Tensor onehot(e.rows(), e.cols());
    for (std::size_t i = 0; i < gold[q]->size(); ++i) {
      onehot.at(i, (*gold[q])[i]) = 1.0;
    }
    const NodeId picked =
        tape.sum_all(tape.mul(log_probs, tape.constant(std::move(onehot))));
    total = tape.add(total, picked);
  }
  return tape.scale(total, -1.0 / static_cast<double>(emissions.size()));
}

}  // namespace

NodeId Model::episode_loss(Tape& tape, const Episode& episode,
                           EpsilonSource& eps) const {
  const Forward fwd = run_forward(tape, episode);

  std::vector<QueryScore> queries(fwd.query_emissions.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    queries[q] = {fwd.query_emissions[q], fwd.query_gold[q]};
  }

  switch (config_.variant) {
    case Variant::PaCrf:
    case Variant::NoInteraction: {
      const TransitionDistribution dist =
          approximate_distribution(tape, fwd.interacted, params_);
      return mc_nll(tape, queries, dist, config_.mc_samples, eps);
    }
    case Variant::PointEstimate: {
      const NodeId mu = approximate_mean(tape, fwd.interacted, params_);
      return crf_nll(tape, queries, mu);
    }
    case Variant::VanillaCrf: {
      const NodeId t = tape.parameter("vanilla.transitions", params_);
      const Tensor& tv = tape.value(t);
      if (tv.rows() != episode.labels.num_labels()) {
        throw InvalidShapeError(
            "vanilla transitions sized for " + std::to_string(tv.rows()) +
            " labels, episode has " +
            std::to_string(episode.labels.num_labels()));
      }
      return crf_nll(tape, queries, t);
    }
    default:
      return softmax_nll(tape, fwd.query_emissions, fwd.query_gold);
  }
}

EpisodeDecode Model::decode_episode(const Episode& episode, Rng& rng) const {
  Tape tape;
  const Forward fwd = run_forward(tape, episode);

  EpisodeDecode out;
  for (std::size_t y : fwd.prototypes.zero_labels) {
    out.zero_prototype_labels.push_back(episode.labels.label_name(y));
  }

  // Resolve transition scores by variant; empty tensor means token argmax.
  Tensor transitions;
  Tensor sigma2;
  switch (config_.variant) {
    case Variant::PaCrf:
    case Variant::NoInteraction: {
      const TransitionDistribution dist =
          approximate_distribution(tape, fwd.interacted, params_);
      transitions = tape.value(dist.mu);
      sigma2 = tape.value(dist.sigma2);
      break;
    }
    case Variant::PointEstimate:
      transitions = tape.value(approximate_mean(tape, fwd.interacted, params_));
      break;
    case Variant::VanillaCrf: {
      const Tensor& tv = params_.get("vanilla.transitions");
      if (tv.rows() != episode.labels.num_labels()) {
        throw InvalidShapeError(
            "vanilla transitions sized for " + std::to_string(tv.rows()) +
            " labels, episode has " +
            std::to_string(episode.labels.num_labels()));
      }
      transitions = tv;
      break;
    }
    default:
      break;
  }

  for (NodeId em : fwd.query_emissions) {
    const Tensor& e = tape.value(em);
    if (transitions.empty()) {
      // Per-token argmax; softmax is monotone so scores suffice.
      std::vector<int> pred(e.rows());
      for (std::size_t i = 0; i < e.rows(); ++i) {
        int arg = 0;
        for (std::size_t j = 1; j < e.cols(); ++j) {
          if (e.at(i, j) > e.at(i, arg)) arg = static_cast<int>(j);
        }
        pred[i] = arg;
      }
      out.predictions.push_back(std::move(pred));
    } else if (config_.decode_marginals && !sigma2.empty()) {
      // Average posterior marginals over sampled transition matrices.
      Tensor avg(e.rows(), e.cols());
      for (int s = 0; s < config_.mc_samples; ++s) {
        Tensor sample = transitions;
        for (std::size_t k = 0; k < sample.size(); ++k) {
          sample.data()[k] += rng.normal() * std::sqrt(sigma2.data()[k]);
        }
        const Tensor m = posterior_marginals(e, sample);
        for (std::size_t k = 0; k < avg.size(); ++k) {
          avg.data()[k] += m.data()[k] / config_.mc_samples;
        }
      }
      std::vector<int> pred(e.rows());
      for (std::size_t i = 0; i < e.rows(); ++i) {
        int arg = 0;
        for (std::size_t j = 1; j < e.cols(); ++j) {
          if (avg.at(i, j) > avg.at(i, arg)) arg = static_cast<int>(j);
        }
        pred[i] = arg;
      }
      out.predictions.push_back(std::move(pred));
    } else {
      out.predictions.push_back(viterbi(e, transitions));
    }
  }
  return out;
}

}  // namespace pacrf
