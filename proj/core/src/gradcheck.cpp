#include "pacrf/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "pacrf/errors.hpp"

namespace pacrf {

GradCheckReport grad_check(const LossFn& loss, const GradFn& analytic,
                           ParameterStore params, double step,
                           double tolerance) {
  if (step <= 0.0 || tolerance <= 0.0) {
    throw InvalidConfigError("grad_check: step and tolerance must be > 0");
  }
  const double l1 = loss(params);
  const double l2 = loss(params);
  if (!(l1 == l2)) {
    throw OracleInvalidError(
        "grad_check: function not deterministic (values " +
        std::to_string(l1) + " vs " + std::to_string(l2) + ")");
  }

  const GradientMap grads = analytic(params);

  GradCheckReport report;
  for (auto& [name, tensor] : params) {
    const Tensor* g = nullptr;
    if (auto it = grads.find(name); it != grads.end()) g = &it->second;

    GradCheckReport::Entry entry{name, 0.0};
    for (std::size_t k = 0; k < tensor.size(); ++k) {
      const double saved = tensor.data()[k];
      tensor.data()[k] = saved + step;
      const double lp = loss(params);
      tensor.data()[k] = saved - step;
      const double lm = loss(params);
      tensor.data()[k] = saved;

      const double fd = (lp - lm) / (2.0 * step);
      const double an = g ? g->data()[k] : 0.0;
      const double rel =
          std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }

    if (entry.max_rel_error > report.worst_error) {
      report.worst_error = entry.max_rel_error;
      report.worst_parameter = name;
    }
    if (entry.max_rel_error > tolerance) report.failed.push_back(name);
    report.per_parameter.push_back(std::move(entry));
  }
  report.pass = report.failed.empty();
  return report;
}

}  // namespace pacrf
