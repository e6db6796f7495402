#pragma once

#include <string>
#include <vector>

#include "pacrf/tape.hpp"

namespace pacrf {

// Per-label prototype matrix on the tape, plus support-token bookkeeping.
// Labels with no support tokens get an all-zero row.
struct PrototypeSet {
  NodeId node = -1;                        // (2N+1) x d_h
  std::vector<std::size_t> support_counts;  // per label index
  std::vector<std::size_t> zero_labels;     // label indices with no support
};

// Mean of the support token vectors per label, across all support sentences.
// `hidden[i]` is the encoded matrix for the sentence carrying `labels[i]`.
PrototypeSet compute_prototypes(Tape& tape,
                                const std::vector<NodeId>& hidden,
                                const std::vector<const std::vector<int>*>& labels,
                                std::size_t num_labels);

enum class Similarity { Dot, Cosine, NegSqEuclidean };

// n x (2N+1) score matrix between query token vectors and prototypes.
NodeId emission_scores(Tape& tape, NodeId query_hidden, NodeId prototypes,
                       Similarity similarity = Similarity::Dot);

// Sum of the emission entries selected by a label sequence.
NodeId sequence_emission(Tape& tape, NodeId emissions,
                         const std::vector<int>& labels);

}  // namespace pacrf
