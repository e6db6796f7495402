#pragma once

#include <vector>

#include "pacrf/tape.hpp"
#include "pacrf/transition.hpp"

namespace pacrf {

// Linear-chain scoring: position scores from an n x L emission matrix plus
// an L x L matrix of label-to-label transition scores. No start/end terms;
// a length-1 sequence is scored by its emission alone.

// log sum over all label sequences of exp(total score), via the forward
// recursion in log space.
NodeId log_partition(Tape& tape, NodeId emissions, NodeId transitions);

// Score of `gold` minus the log partition.
NodeId sequence_log_prob(Tape& tape, NodeId emissions, NodeId transitions,
                         const std::vector<int>& gold);

struct QueryScore {
  NodeId emissions = -1;
  const std::vector<int>* gold = nullptr;
};

// Monte-Carlo negative log-likelihood: mean over queries and samples of
// -log p(gold), with one transition sample per sample index shared across
// queries. Gradients reach the emission path and the distribution
// parameters; the epsilon draws are constants.
NodeId mc_nll(Tape& tape, const std::vector<QueryScore>& queries,
              const TransitionDistribution& dist, int samples,
              EpsilonSource& eps);

// Deterministic NLL under a fixed transition matrix (used by the
// point-estimate and shared-matrix model variants).
NodeId crf_nll(Tape& tape, const std::vector<QueryScore>& queries,
               NodeId transitions);

// Max-product decode with backpointers. Ties break toward the lowest label
// index at every step, making the result unique.
std::vector<int> viterbi(const Tensor& emissions, const Tensor& transitions);

// Total score of one label sequence under plain matrices.
double sequence_score(const Tensor& emissions, const Tensor& transitions,
                      const std::vector<int>& labels);

// n x L posterior marginals P(y_t = l) by forward-backward in log space.
Tensor posterior_marginals(const Tensor& emissions, const Tensor& transitions);

}  // namespace pacrf
