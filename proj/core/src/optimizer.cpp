#include "pacrf/optimizer.hpp"

#include <cmath>

#include "pacrf/errors.hpp"

namespace pacrf {

void AdamW::step(ParameterStore& params, const GradientMap& grads) {
  ++step_;
  const double bc1 = 1.0 - std::pow(options_.beta1, (double)step_);
  const double bc2 = 1.0 - std::pow(options_.beta2, (double)step_);

  for (auto& [name, p] : params) {
    auto git = grads.find(name);

    Tensor& m = moment1_.try_emplace(name, p.rows(), p.cols()).first->second;
    Tensor& v = moment2_.try_emplace(name, p.rows(), p.cols()).first->second;
    if (!m.same_shape(p)) {
      throw InvalidShapeError("optimizer state shape mismatch for " + name);
    }

    for (std::size_t k = 0; k < p.size(); ++k) {
      const double g = git == grads.end() ? 0.0 : git->second.data()[k];
      m.data()[k] = options_.beta1 * m.data()[k] + (1.0 - options_.beta1) * g;
      v.data()[k] =
          options_.beta2 * v.data()[k] + (1.0 - options_.beta2) * g * g;
      const double m_hat = m.data()[k] / bc1;
      const double v_hat = v.data()[k] / bc2;
      p.data()[k] -= options_.learning_rate *
                     (m_hat / (std::sqrt(v_hat) + options_.eps) +
                      options_.weight_decay * p.data()[k]);
    }
  }
}

}  // namespace pacrf
