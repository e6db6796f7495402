#include "pacrf/transition.hpp"

#include "pacrf/errors.hpp"

namespace pacrf {

void init_interaction_params(ParameterStore& store, std::size_t d_h,
                             Rng& rng) {
  for (const char* name : {"interact.wq", "interact.wk", "interact.wv"}) {
    store.add(name, ParameterStore::uniform_init(d_h, d_h, d_h, rng));
  }
  for (const char* name : {"interact.bq", "interact.bk", "interact.bv"}) {
    store.add(name, Tensor::zeros(1, d_h));
  }
}

void init_approximator_params(ParameterStore& store, std::size_t d_h,
                              Rng& rng) {
  store.add("approx.w_mu",
            ParameterStore::uniform_init(1, 2 * d_h, 2 * d_h, rng));
  store.add("approx.b_mu", Tensor::zeros(1, 1));
  store.add("approx.w_sigma2",
            ParameterStore::uniform_init(1, 2 * d_h, 2 * d_h, rng));
  store.add("approx.b_sigma2", Tensor::zeros(1, 1));
}

NodeId interact(Tape& tape, NodeId prototypes, const ParameterStore& store) {
  const NodeId q = tape.add(
      tape.matmul(prototypes, tape.parameter("interact.wq", store)),
      tape.parameter("interact.bq", store));
  const NodeId k = tape.add(
      tape.matmul(prototypes, tape.parameter("interact.wk", store)),
      tape.parameter("interact.bk", store));
  const NodeId v = tape.add(
      tape.matmul(prototypes, tape.parameter("interact.wv", store)),
      tape.parameter("interact.bv", store));

  // Unscaled dot-product attention over prototype rows.
  const NodeId attention = tape.softmax_rows(tape.matmul(q, tape.transpose(k)));
  return tape.matmul(attention, v);
}

namespace {

// All ordered prototype pairs: row i*L + j holds [c_i || c_j].
NodeId pair_features(Tape& tape, NodeId interacted, std::size_t L) {
  std::vector<std::size_t> first(L * L), second(L * L);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      first[i * L + j] = i;
      second[i * L + j] = j;
    }
  }
  return tape.concat_cols(tape.select_rows(interacted, first),
                          tape.select_rows(interacted, second));
}

NodeId affine_head(Tape& tape, NodeId pairs, const ParameterStore& store,
                   const char* weight, const char* bias) {
  return tape.add(tape.matmul(pairs, tape.transpose(tape.parameter(weight, store))),
                  tape.parameter(bias, store));
}

}  // namespace

TransitionDistribution approximate_distribution(Tape& tape, NodeId interacted,
                                                const ParameterStore& store) {
  const std::size_t L = tape.value(interacted).rows();
  if (L == 0) {
    throw InvalidShapeError("approximate_distribution: no prototypes");
  }
  const NodeId pairs = pair_features(tape, interacted, L);
  const NodeId mu_vec = affine_head(tape, pairs, store, "approx.w_mu",
                                    "approx.b_mu");
  const NodeId sig_arg = affine_head(tape, pairs, store, "approx.w_sigma2",
                                     "approx.b_sigma2");

  TransitionDistribution dist;
  for (double x : tape.value(sig_arg).data()) {
    if (x < -30.0 || x > 30.0) {
      dist.clamped = true;
      break;
    }
  }
  dist.mu = tape.reshape(mu_vec, L, L);
  dist.sigma2 = tape.reshape(tape.exp(tape.clamp(sig_arg, -30.0, 30.0)), L, L);
  return dist;
}

NodeId approximate_mean(Tape& tape, NodeId interacted,
                        const ParameterStore& store) {
  const std::size_t L = tape.value(interacted).rows();
  if (L == 0) {
    throw InvalidShapeError("approximate_mean: no prototypes");
  }
  const NodeId pairs = pair_features(tape, interacted, L);
  return tape.reshape(
      affine_head(tape, pairs, store, "approx.w_mu", "approx.b_mu"), L, L);
}

Tensor NormalEpsilon::draw(std::size_t rows, std::size_t cols) {
  Tensor t(rows, cols);
  for (double& x : t.data()) x = rng_->normal();
  return t;
}

Tensor FixedEpsilon::draw(std::size_t rows, std::size_t cols) {
  return Tensor::full(rows, cols, value_);
}

Tensor ReplayEpsilon::draw(std::size_t rows, std::size_t cols) {
  if (next_ >= draws_.size()) {
    throw InvalidConfigError("replay epsilon exhausted after " +
                             std::to_string(draws_.size()) + " draws");
  }
  const Tensor& t = draws_[next_++];
  if (t.rows() != rows || t.cols() != cols) {
    throw InvalidShapeError("replay epsilon shape " + t.shape_str() +
                            ", wanted " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  }
  return t;
}

NodeId sample_transitions(Tape& tape, const TransitionDistribution& dist,
                          EpsilonSource& eps) {
  const Tensor& mu = tape.value(dist.mu);
  const NodeId epsilon =
      tape.constant(eps.draw(mu.rows(), mu.cols()));
  // sigma = exp(0.5 * log(sigma2)); sigma2 is strictly positive.
  const NodeId sigma =
      tape.exp(tape.scale(tape.log(dist.sigma2), 0.5));
  return tape.add(dist.mu, tape.mul(epsilon, sigma));
}

NodeId sequence_transition(Tape& tape, NodeId transitions,
                           const std::vector<int>& labels) {
  const Tensor& t = tape.value(transitions);
  if (labels.empty()) {
    throw EmptyInputError("sequence_transition: empty label sequence");
  }
  Tensor pair_counts(t.rows(), t.cols());
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
    const int a = labels[i];
    const int b = labels[i + 1];
    if (a < 0 || b < 0 || a >= static_cast<int>(t.rows()) ||
        b >= static_cast<int>(t.cols())) {
      throw InvalidLabelError("sequence_transition: label pair (" +
                              std::to_string(a) + ", " + std::to_string(b) +
                              ") out of range");
    }
    pair_counts.at(a, b) += 1.0;
  }
  return tape.sum_all(
      tape.mul(transitions, tape.constant(std::move(pair_counts))));
}

}  // namespace pacrf
