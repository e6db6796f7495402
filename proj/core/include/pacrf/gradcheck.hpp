#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pacrf/tape.hpp"

namespace pacrf {

struct GradCheckReport {
  struct Entry {
    std::string name;
    double max_rel_error = 0.0;
  };
  std::vector<Entry> per_parameter;
  std::vector<std::string> failed;  // parameter names exceeding tolerance
  double worst_error = 0.0;
  std::string worst_parameter;
  bool pass = false;
};

using LossFn = std::function<double(const ParameterStore&)>;
using GradFn = std::function<GradientMap(const ParameterStore&)>;

// Compares analytic gradients against central finite differences, entry by
// entry. Error metric is |analytic - fd| / max(1, |analytic|, |fd|).
// The loss function must be deterministic; it is evaluated twice up front
// and an OracleInvalidError is raised if the values differ.
GradCheckReport grad_check(const LossFn& loss, const GradFn& analytic,
                           ParameterStore params, double step,
                           double tolerance);

}  // namespace pacrf
