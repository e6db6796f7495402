#include "pacrf/crf.hpp"

#include <algorithm>
#include <cmath>

#include "pacrf/emission.hpp"
#include "pacrf/errors.hpp"

namespace pacrf {

namespace {

void check_square(const Tensor& emissions, const Tensor& transitions) {
  if (transitions.rows() != transitions.cols() ||
      transitions.rows() != emissions.cols()) {
    throw InvalidShapeError("crf: emissions " + emissions.shape_str() +
                            " incompatible with transitions " +
                            transitions.shape_str());
  }
  if (emissions.rows() == 0) {
    throw EmptyInputError("crf: empty sentence");
  }
}

double logsumexp(const std::vector<double>& xs) {
  double m = xs[0];
  for (double x : xs) m = std::max(m, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

NodeId log_partition(Tape& tape, NodeId emissions, NodeId transitions) {
  const Tensor& e = tape.value(emissions);
  const Tensor& t = tape.value(transitions);
  check_square(e, t);

  const std::size_t n = e.rows();
  const std::size_t L = e.cols();

  // alpha_t[j] = logsumexp_i(alpha_{t-1}[i] + T[i][j]) + E[t][j].
  // Broadcasting alpha over rows of T^T puts the reduction on rows.
  NodeId alpha = tape.select_rows(emissions, {0});  // 1 x L
  const NodeId t_t = n > 1 ? tape.transpose(transitions) : transitions;
  for (std::size_t step = 1; step < n; ++step) {
    const NodeId m = tape.add(t_t, alpha);                 // L x L
    const NodeId reduced = tape.logsumexp_rows(m);         // L x 1
    alpha = tape.add(tape.reshape(reduced, 1, L),
                     tape.select_rows(emissions, {step}));
  }
  return tape.logsumexp_rows(alpha);  // 1 x 1
}

NodeId sequence_log_prob(Tape& tape, NodeId emissions, NodeId transitions,
                         const std::vector<int>& gold) {
  const Tensor& e = tape.value(emissions);
  if (gold.size() != e.rows()) {
    throw InvalidLabelError("sequence_log_prob: " +
                            std::to_string(gold.size()) + " labels for " +
                            std::to_string(e.rows()) + " tokens");
  }
  const NodeId score = tape.add(sequence_emission(tape, emissions, gold),
                                sequence_transition(tape, transitions, gold));
  return tape.add(score, tape.scale(log_partition(tape, emissions, transitions), -1.0));
}

NodeId mc_nll(Tape& tape, const std::vector<QueryScore>& queries,
              const TransitionDistribution& dist, int samples,
              EpsilonSource& eps) {
  if (samples < 1) {
    throw InvalidConfigError("mc_nll: sample count must be >= 1");
  }
  if (queries.empty()) {
    throw EmptyInputError("mc_nll: no queries");
  }
  NodeId total = tape.constant(Tensor::scalar(0.0));
  for (int s = 0; s < samples; ++s) {
    const NodeId sampled = sample_transitions(tape, dist, eps);
    for (const QueryScore& q : queries) {
      total = tape.add(
          total, sequence_log_prob(tape, q.emissions, sampled, *q.gold));
    }
  }
  const double denom = static_cast<double>(queries.size()) * samples;
  return tape.scale(total, -1.0 / denom);
}

NodeId crf_nll(Tape& tape, const std::vector<QueryScore>& queries,
               NodeId transitions) {
  if (queries.empty()) {
    throw EmptyInputError("crf_nll: no queries");
  }
  NodeId total = tape.constant(Tensor::scalar(0.0));
  for (const QueryScore& q : queries) {
    total = tape.add(total,
                     sequence_log_prob(tape, q.emissions, transitions, *q.gold));
  }
  return tape.scale(total, -1.0 / static_cast<double>(queries.size()));
}

std::vector<int> viterbi(const Tensor& emissions, const Tensor& transitions) {
  check_square(emissions, transitions);
  const std::size_t n = emissions.rows();
  const std::size_t L = emissions.cols();

  std::vector<double> score(L), next(L);
  for (std::size_t j = 0; j < L; ++j) score[j] = emissions.at(0, j);

  std::vector<std::vector<int>> back(n, std::vector<int>(L, 0));
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < L; ++j) {
      double best = score[0] + transitions.at(0, j);
      int arg = 0;
      for (std::size_t i = 1; i < L; ++i) {
        const double s = score[i] + transitions.at(i, j);
        if (s > best) {  // strict: ties keep the lowest previous index
          best = s;
          arg = static_cast<int>(i);
        }
      }
      next[j] = best + emissions.at(t, j);
      back[t][j] = arg;
    }
    std::swap(score, next);
  }

  int last = 0;
  for (std::size_t j = 1; j < L; ++j) {
    if (score[j] > score[last]) last = static_cast<int>(j);
  }

  std::vector<int> path(n);
  path[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) {
    path[t - 1] = back[t][path[t]];
  }
  return path;
}

double sequence_score(const Tensor& emissions, const Tensor& transitions,
                      const std::vector<int>& labels) {
  check_square(emissions, transitions);
  if (labels.size() != emissions.rows()) {
    throw InvalidLabelError("sequence_score: length mismatch");
  }
  double s = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    s += emissions.at(t, labels[t]);
    if (t + 1 < labels.size()) {
      s += transitions.at(labels[t], labels[t + 1]);
    }
  }
  return s;
}

Tensor posterior_marginals(const Tensor& emissions,
                           const Tensor& transitions) {
  check_square(emissions, transitions);
  const std::size_t n = emissions.rows();
  const std::size_t L = emissions.cols();

  std::vector<std::vector<double>> fwd(n, std::vector<double>(L));
  std::vector<std::vector<double>> bwd(n, std::vector<double>(L, 0.0));

  for (std::size_t j = 0; j < L; ++j) fwd[0][j] = emissions.at(0, j);
  std::vector<double> buf(L);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t i = 0; i < L; ++i) {
        buf[i] = fwd[t - 1][i] + transitions.at(i, j);
      }
      fwd[t][j] = logsumexp(buf) + emissions.at(t, j);
    }
  }
  for (std::size_t t = n - 1; t > 0; --t) {
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) {
        buf[j] = transitions.at(i, j) + emissions.at(t, j) + bwd[t][j];
      }
      bwd[t - 1][i] = logsumexp(buf);
    }
  }

  std::vector<double> final_scores(L);
  for (std::size_t j = 0; j < L; ++j) final_scores[j] = fwd[n - 1][j];
  const double log_z = logsumexp(final_scores);

  Tensor marginals(n, L);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < L; ++j) {
      marginals.at(t, j) = std::exp(fwd[t][j] + bwd[t][j] - log_z);
    }
  }
  return marginals;
}

}  // namespace pacrf
