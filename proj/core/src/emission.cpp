#include "pacrf/emission.hpp"

#include "pacrf/errors.hpp"

namespace pacrf {

PrototypeSet compute_prototypes(
    Tape& tape, const std::vector<NodeId>& hidden,
    const std::vector<const std::vector<int>*>& labels,
    std::size_t num_labels) {
  if (hidden.size() != labels.size()) {
    throw InvalidShapeError("compute_prototypes: " +
                            std::to_string(hidden.size()) + " matrices for " +
                            std::to_string(labels.size()) + " label lists");
  }
  if (hidden.empty()) {
    throw EmptyInputError("compute_prototypes: no support sentences");
  }
  const std::size_t d_h = tape.value(hidden[0]).cols();
  std::size_t total_rows = 0;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const Tensor& h = tape.value(hidden[i]);
    if (h.cols() != d_h) {
      throw InvalidShapeError(
          "compute_prototypes: hidden dimensions differ: " +
          std::to_string(d_h) + " vs " + std::to_string(h.cols()));
    }
    if (h.rows() != labels[i]->size()) {
      throw InvalidShapeError(
          "compute_prototypes: sentence " + std::to_string(i) + " has " +
          std::to_string(h.rows()) + " vectors for " +
          std::to_string(labels[i]->size()) + " labels");
    }
    total_rows += h.rows();
  }

  // Stack all support tokens once, then gather per label.
  const NodeId stacked = tape.concat_rows(hidden);
  std::vector<std::vector<std::size_t>> rows_per_label(num_labels);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const std::vector<int>& ls = *labels[i];
    for (std::size_t j = 0; j < ls.size(); ++j) {
      const int y = ls[j];
      if (y < 0 || y >= static_cast<int>(num_labels)) {
        throw InvalidLabelError("support label out of range: " +
                                std::to_string(y));
      }
      rows_per_label[y].push_back(offset + j);
    }
    offset += ls.size();
  }
  (void)total_rows;

  PrototypeSet protos;
  std::vector<NodeId> parts;
  parts.reserve(num_labels);
  for (std::size_t y = 0; y < num_labels; ++y) {
    protos.support_counts.push_back(rows_per_label[y].size());
    if (rows_per_label[y].empty()) {
      protos.zero_labels.push_back(y);
      parts.push_back(tape.constant(Tensor::zeros(1, d_h)));
    } else {
      parts.push_back(
          tape.mean_rows(tape.select_rows(stacked, rows_per_label[y])));
    }
  }
  protos.node = tape.concat_rows(parts);
  return protos;
}

NodeId emission_scores(Tape& tape, NodeId query_hidden, NodeId prototypes,
                       Similarity similarity) {
  const Tensor& h = tape.value(query_hidden);
  const Tensor& c = tape.value(prototypes);
  if (h.cols() != c.cols()) {
    throw InvalidShapeError("emission_scores: hidden dim " +
                            std::to_string(h.cols()) + " vs prototype dim " +
                            std::to_string(c.cols()));
  }

  const NodeId dot = tape.matmul(query_hidden, tape.transpose(prototypes));
  if (similarity == Similarity::Dot) return dot;

  // Row-wise squared norms, as n x 1 columns.
  auto sq_norms = [&](NodeId m) {
    const NodeId sq = tape.mul(m, m);
    const NodeId ones =
        tape.constant(Tensor::full(tape.value(m).cols(), 1, 1.0));
    return tape.matmul(sq, ones);
  };

  if (similarity == Similarity::NegSqEuclidean) {
    // -(|h|^2 - 2 h.c + |c|^2)
    const NodeId h2 = sq_norms(query_hidden);           // n x 1
    const NodeId c2 = tape.transpose(sq_norms(prototypes));  // 1 x L
    const NodeId sum = tape.add(tape.add(h2, tape.scale(dot, -2.0)), c2);
    return tape.scale(sum, -1.0);
  }

  // Cosine; zero rows (absent prototypes) are guarded by the norm floor.
  auto inv_norms = [&](NodeId m) {
    const NodeId n2 = sq_norms(m);
    const NodeId n1 = tape.exp(tape.scale(
        tape.log(tape.clamp(n2, 1e-24, 1e300)), 0.5));
    return tape.exp(tape.scale(tape.log(n1), -1.0));
  };
  const NodeId hinv = inv_norms(query_hidden);            // n x 1
  const NodeId cinv = tape.transpose(inv_norms(prototypes));  // 1 x L
  return tape.mul(tape.mul(dot, hinv), cinv);
}

NodeId sequence_emission(Tape& tape, NodeId emissions,
                         const std::vector<int>& labels) {
  const Tensor& e = tape.value(emissions);
  if (labels.size() != e.rows()) {
    throw InvalidLabelError("sequence_emission: " +
                            std::to_string(labels.size()) + " labels for " +
                            std::to_string(e.rows()) + " tokens");
  }
  Tensor picks(e.rows(), e.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= static_cast<int>(e.cols())) {
      throw InvalidLabelError("sequence_emission: label index " +
                              std::to_string(y) + " out of range");
    }
    picks.at(i, y) = 1.0;
  }
  return tape.sum_all(tape.mul(emissions, tape.constant(std::move(picks))));
}

}  // namespace pacrf
