#pragma once

#include <memory>
#include <vector>

#include "pacrf/rng.hpp"
#include "pacrf/tape.hpp"

namespace pacrf {

// Registers the prototype-interaction attention parameters (d_h x d_h
// projections, 1 x d_h biases) under "interact.*".
void init_interaction_params(ParameterStore& store, std::size_t d_h,
                             Rng& rng);

// Registers the distribution approximator heads (1 x 2d_h weights, scalar
// biases) under "approx.*".
void init_approximator_params(ParameterStore& store, std::size_t d_h,
                              Rng& rng);

// Self-attention over prototype rows with unscaled dot-product scores:
// queries/keys/values are affine maps of the prototypes, and row i of the
// output is the attention-weighted sum of value rows.
NodeId interact(Tape& tape, NodeId prototypes, const ParameterStore& store);

// Per-label-pair Gaussian parameters over transition scores.
struct TransitionDistribution {
  NodeId mu = -1;      // L x L
  NodeId sigma2 = -1;  // L x L, strictly positive
  bool clamped = false;  // exp argument hit the [-30, 30] guard
};

// mu_ij and sigma2_ij from the concatenated prototype pair [c_i || c_j];
// sigma2 goes through exp, with its argument clamped to [-30, 30].
TransitionDistribution approximate_distribution(Tape& tape,
                                                NodeId interacted,
                                                const ParameterStore& store);

// The mean head alone; used when transition scores are point estimates.
NodeId approximate_mean(Tape& tape, NodeId interacted,
                        const ParameterStore& store);

// Source of standard-normal draws; injectable for deterministic tests.
class EpsilonSource {
 public:
  virtual ~EpsilonSource() = default;
  virtual Tensor draw(std::size_t rows, std::size_t cols) = 0;
};

class NormalEpsilon : public EpsilonSource {
 public:
  explicit NormalEpsilon(Rng& rng) : rng_(&rng) {}
  Tensor draw(std::size_t rows, std::size_t cols) override;

 private:
  Rng* rng_;
};

// Every entry equal to one fixed value.
class FixedEpsilon : public EpsilonSource {
 public:
  explicit FixedEpsilon(double value) : value_(value) {}
  Tensor draw(std::size_t rows, std::size_t cols) override;

 private:
  double value_;
};

// Replays a pre-drawn sequence of matrices; reset() rewinds to the start.
class ReplayEpsilon : public EpsilonSource {
 public:
  explicit ReplayEpsilon(std::vector<Tensor> draws)
      : draws_(std::move(draws)) {}
  Tensor draw(std::size_t rows, std::size_t cols) override;
  void reset() { next_ = 0; }

 private:
  std::vector<Tensor> draws_;
  std::size_t next_ = 0;
};

// One reparameterized sample: T_ij = mu_ij + eps_ij * sigma_ij. Gradients
// flow to mu and sigma2; the draw itself is a constant.
NodeId sample_transitions(Tape& tape, const TransitionDistribution& dist,
                          EpsilonSource& eps);

// Sum of T[y_i][y_{i+1}] over consecutive pairs; zero for length-1 input.
NodeId sequence_transition(Tape& tape, NodeId transitions,
                           const std::vector<int>& labels);

}  // namespace pacrf
