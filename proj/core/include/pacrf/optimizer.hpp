#pragma once

#include "pacrf/tape.hpp"

namespace pacrf {

// Adaptive moment estimation with decoupled weight decay. Moment buffers
// are keyed by parameter name and created on first use.
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW() = default;
  explicit AdamW(Options options) : options_(options) {}

  const Options& options() const { return options_; }

  // One update over every parameter in the store. Missing gradient entries
  // are treated as exact zeros (decay still applies).
  void step(ParameterStore& params, const GradientMap& grads);

  std::size_t step_count() const { return step_; }

 private:
  Options options_;
  std::map<std::string, Tensor> moment1_;
  std::map<std::string, Tensor> moment2_;
  std::size_t step_ = 0;
};

}  // namespace pacrf
