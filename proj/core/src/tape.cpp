#include "pacrf/tape.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "pacrf/errors.hpp"

namespace pacrf {

namespace {

std::string shapes(const Tensor& a, const Tensor& b) {
  return a.shape_str() + " and " + b.shape_str();
}

bool dim_compatible(std::size_t a, std::size_t b) {
  return a == b || a == 1 || b == 1;
}

// Sum `g` down to `rows x cols`, collapsing dimensions that were broadcast.
Tensor reduce_to(const Tensor& g, std::size_t rows, std::size_t cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  Tensor out(rows, cols);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    const std::size_t r = rows == 1 ? 0 : i;
    for (std::size_t j = 0; j < g.cols(); ++j) {
      out.at(r, cols == 1 ? 0 : j) += g.at(i, j);
    }
  }
  return out;
}

}  // namespace

Tensor& ParameterStore::add(const std::string& name, Tensor init) {
  if (values_.count(name)) {
    throw InvalidConfigError("parameter already registered: " + name);
  }
  if (!init.all_finite()) {
    throw NumericError("parameter init not finite: " + name);
  }
  return values_.emplace(name, std::move(init)).first->second;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw InvalidConfigError("unknown parameter: " + name);
  }
  return it->second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw InvalidConfigError("unknown parameter: " + name);
  }
  return it->second;
}

bool ParameterStore::contains(const std::string& name) const {
  return values_.count(name) != 0;
}

Tensor ParameterStore::uniform_init(std::size_t rows, std::size_t cols,
                                    std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(rows, cols);
  for (double& x : t.data()) x = rng.uniform(-bound, bound);
  return t;
}

NodeId Tape::push(const char* op, Tensor value,
                  const std::vector<NodeId>& inputs,
                  std::function<void(Tape&, const Tensor&)> backprop) {
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + ": produced non-finite values");
  }
  Node node;
  node.value = std::move(value);
  node.needs_grad = any_needs_grad(inputs);
  if (node.needs_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

bool Tape::any_needs_grad(const std::vector<NodeId>& inputs) const {
  for (NodeId id : inputs) {
    if (nodes_[id].needs_grad) return true;
  }
  return false;
}

void Tape::accumulate(NodeId id, const Tensor& grad) {
  if (!nodes_[id].needs_grad) return;
  Tensor& g = grads_[id];
  if (g.empty()) {
    g = grad;
    return;
  }
  for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] += grad.data()[k];
}

NodeId Tape::constant(Tensor value) {
  if (!value.all_finite()) {
    throw NumericError("constant: non-finite values");
  }
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::parameter(const std::string& name, const ParameterStore& store) {
  Node node;
  node.value = store.get(name);
  node.param_name = name;
  node.needs_grad = true;
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.rows()) {
    throw InvalidShapeError("matmul: incompatible shapes " + shapes(A, B));
  }
  Tensor out(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < B.cols(); ++j) {
        out.at(i, j) += aik * B.at(k, j);
      }
    }
  }
  return push("matmul", std::move(out), {a, b},
              [a, b](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                const Tensor& B = t.value(b);
                Tensor da(A.rows(), A.cols());
                for (std::size_t i = 0; i < A.rows(); ++i) {
                  for (std::size_t j = 0; j < B.cols(); ++j) {
                    const double gij = g.at(i, j);
                    if (gij == 0.0) continue;
                    for (std::size_t k = 0; k < A.cols(); ++k) {
                      da.at(i, k) += gij * B.at(k, j);
                    }
                  }
                }
                t.accumulate(a, da);
                Tensor db(B.rows(), B.cols());
                for (std::size_t k = 0; k < B.rows(); ++k) {
                  for (std::size_t i = 0; i < A.rows(); ++i) {
                    const double aik = A.at(i, k);
                    if (aik == 0.0) continue;
                    for (std::size_t j = 0; j < B.cols(); ++j) {
                      db.at(k, j) += aik * g.at(i, j);
                    }
                  }
                }
                t.accumulate(b, db);
              });
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!dim_compatible(A.rows(), B.rows()) ||
      !dim_compatible(A.cols(), B.cols())) {
    throw InvalidShapeError("add: incompatible shapes " + shapes(A, B));
  }
  const std::size_t R = std::max(A.rows(), B.rows());
  const std::size_t C = std::max(A.cols(), B.cols());
  Tensor out(R, C);
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      out.at(i, j) = A.at(A.rows() == 1 ? 0 : i, A.cols() == 1 ? 0 : j) +
                     B.at(B.rows() == 1 ? 0 : i, B.cols() == 1 ? 0 : j);
    }
  }
  return push("add", std::move(out), {a, b},
              [a, b](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                const Tensor& B = t.value(b);
                t.accumulate(a, reduce_to(g, A.rows(), A.cols()));
                t.accumulate(b, reduce_to(g, B.rows(), B.cols()));
              });
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!dim_compatible(A.rows(), B.rows()) ||
      !dim_compatible(A.cols(), B.cols())) {
    throw InvalidShapeError("mul: incompatible shapes " + shapes(A, B));
  }
  const std::size_t R = std::max(A.rows(), B.rows());
  const std::size_t C = std::max(A.cols(), B.cols());
  Tensor out(R, C);
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      out.at(i, j) = A.at(A.rows() == 1 ? 0 : i, A.cols() == 1 ? 0 : j) *
                     B.at(B.rows() == 1 ? 0 : i, B.cols() == 1 ? 0 : j);
    }
  }
  return push(
      "mul", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        const Tensor& A = t.value(a);
        const Tensor& B = t.value(b);
        Tensor da(g.rows(), g.cols());
        Tensor db(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i) {
          for (std::size_t j = 0; j < g.cols(); ++j) {
            const double av =
                A.at(A.rows() == 1 ? 0 : i, A.cols() == 1 ? 0 : j);
            const double bv =
                B.at(B.rows() == 1 ? 0 : i, B.cols() == 1 ? 0 : j);
            da.at(i, j) = g.at(i, j) * bv;
            db.at(i, j) = g.at(i, j) * av;
          }
        }
        t.accumulate(a, reduce_to(da, A.rows(), A.cols()));
        t.accumulate(b, reduce_to(db, B.rows(), B.cols()));
      });
}

NodeId Tape::exp(NodeId a) {
  const Tensor& A = value(a);
  Tensor out(A.rows(), A.cols());
  for (std::size_t k = 0; k < A.size(); ++k) {
    out.data()[k] = std::exp(A.data()[k]);
  }
  return push("exp", std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(a);
    Tensor da(A.rows(), A.cols());
    for (std::size_t k = 0; k < A.size(); ++k) {
      da.data()[k] = g.data()[k] * std::exp(A.data()[k]);
    }
    t.accumulate(a, da);
  });
}

NodeId Tape::log(NodeId a) {
  const Tensor& A = value(a);
  Tensor out(A.rows(), A.cols());
  for (std::size_t k = 0; k < A.size(); ++k) {
    if (A.data()[k] <= 0.0) {
      throw NumericError("log: non-positive input");
    }
    out.data()[k] = std::log(A.data()[k]);
  }
  return push("log", std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(a);
    Tensor da(A.rows(), A.cols());
    for (std::size_t k = 0; k < A.size(); ++k) {
      da.data()[k] = g.data()[k] / A.data()[k];
    }
    t.accumulate(a, da);
  });
}

NodeId Tape::tanh(NodeId a) {
  const Tensor& A = value(a);
  Tensor out(A.rows(), A.cols());
  for (std::size_t k = 0; k < A.size(); ++k) {
    out.data()[k] = std::tanh(A.data()[k]);
  }
  return push("tanh", std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(a);
    Tensor da(A.rows(), A.cols());
    for (std::size_t k = 0; k < A.size(); ++k) {
      const double y = std::tanh(A.data()[k]);
      da.data()[k] = g.data()[k] * (1.0 - y * y);
    }
    t.accumulate(a, da);
  });
}

NodeId Tape::logsumexp_rows(NodeId a) {
  const Tensor& A = value(a);
  if (A.cols() == 0 || A.rows() == 0) {
    throw InvalidShapeError("logsumexp_rows: empty input " + A.shape_str());
  }
  Tensor out(A.rows(), 1);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double m = A.at(i, 0);
    for (std::size_t j = 1; j < A.cols(); ++j) m = std::max(m, A.at(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) {
      s += std::exp(A.at(i, j) - m);
    }
    out.at(i, 0) = m + std::log(s);
  }
  return push("logsumexp_rows", std::move(out), {a},
              [a](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                Tensor da(A.rows(), A.cols());
                for (std::size_t i = 0; i < A.rows(); ++i) {
                  double m = A.at(i, 0);
                  for (std::size_t j = 1; j < A.cols(); ++j) {
                    m = std::max(m, A.at(i, j));
                  }
                  double s = 0.0;
                  for (std::size_t j = 0; j < A.cols(); ++j) {
                    s += std::exp(A.at(i, j) - m);
                  }
                  for (std::size_t j = 0; j < A.cols(); ++j) {
                    da.at(i, j) = g.at(i, 0) * std::exp(A.at(i, j) - m) / s;
                  }
                }
                t.accumulate(a, da);
              });
}

NodeId Tape::softmax_rows(NodeId a) {
  const Tensor& A = value(a);
  if (A.cols() == 0 || A.rows() == 0) {
    throw InvalidShapeError("softmax_rows: empty input " + A.shape_str());
  }
  Tensor out(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double m = A.at(i, 0);
    for (std::size_t j = 1; j < A.cols(); ++j) m = std::max(m, A.at(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += std::exp(A.at(i, j) - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < A.cols(); ++j) {
      out.at(i, j) = std::exp(A.at(i, j) - lse);
    }
  }
  Tensor saved = out;
  return push("softmax_rows", std::move(out), {a},
              [a, saved](Tape& t, const Tensor& g) {
                Tensor da(saved.rows(), saved.cols());
                for (std::size_t i = 0; i < saved.rows(); ++i) {
                  double dot = 0.0;
                  for (std::size_t j = 0; j < saved.cols(); ++j) {
                    dot += g.at(i, j) * saved.at(i, j);
                  }
                  for (std::size_t j = 0; j < saved.cols(); ++j) {
                    da.at(i, j) = saved.at(i, j) * (g.at(i, j) - dot);
                  }
                }
                t.accumulate(a, da);
              });
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rows() != B.rows()) {
    throw InvalidShapeError("concat_cols: row counts differ " + shapes(A, B));
  }
  Tensor out(A.rows(), A.cols() + B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < A.cols(); ++j) out.at(i, j) = A.at(i, j);
    for (std::size_t j = 0; j < B.cols(); ++j) {
      out.at(i, A.cols() + j) = B.at(i, j);
    }
  }
  return push("concat_cols", std::move(out), {a, b},
              [a, b](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                const Tensor& B = t.value(b);
                Tensor da(A.rows(), A.cols());
                Tensor db(B.rows(), B.cols());
                for (std::size_t i = 0; i < A.rows(); ++i) {
                  for (std::size_t j = 0; j < A.cols(); ++j) {
                    da.at(i, j) = g.at(i, j);
                  }
                  for (std::size_t j = 0; j < B.cols(); ++j) {
                    db.at(i, j) = g.at(i, A.cols() + j);
                  }
                }
                t.accumulate(a, da);
                t.accumulate(b, db);
              });
}

NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) {
    throw InvalidShapeError("concat_rows: no inputs");
  }
  const std::size_t cols = value(parts[0]).cols();
  std::size_t rows = 0;
  for (NodeId id : parts) {
    if (value(id).cols() != cols) {
      throw InvalidShapeError("concat_rows: column counts differ, " +
                              value(parts[0]).shape_str() + " vs " +
                              value(id).shape_str());
    }
    rows += value(id).rows();
  }
  Tensor out(rows, cols);
  std::size_t r = 0;
  for (NodeId id : parts) {
    const Tensor& P = value(id);
    for (std::size_t i = 0; i < P.rows(); ++i, ++r) {
      for (std::size_t j = 0; j < cols; ++j) out.at(r, j) = P.at(i, j);
    }
  }
  std::vector<NodeId> inputs = parts;
  return push("concat_rows", std::move(out), inputs,
              [inputs](Tape& t, const Tensor& g) {
                std::size_t r = 0;
                for (NodeId id : inputs) {
                  const Tensor& P = t.value(id);
                  Tensor dp(P.rows(), P.cols());
                  for (std::size_t i = 0; i < P.rows(); ++i, ++r) {
                    for (std::size_t j = 0; j < P.cols(); ++j) {
                      dp.at(i, j) = g.at(r, j);
                    }
                  }
                  t.accumulate(id, dp);
                }
              });
}

NodeId Tape::select_rows(NodeId a, std::vector<std::size_t> rows) {
  const Tensor& A = value(a);
  for (std::size_t r : rows) {
    if (r >= A.rows()) {
      throw InvalidShapeError("select_rows: index " + std::to_string(r) +
                              " out of range for " + A.shape_str());
    }
  }
  Tensor out(rows.size(), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < A.cols(); ++j) {
      out.at(i, j) = A.at(rows[i], j);
    }
  }
  return push("select_rows", std::move(out), {a},
              [a, rows = std::move(rows)](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                Tensor da(A.rows(), A.cols());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                  for (std::size_t j = 0; j < A.cols(); ++j) {
                    da.at(rows[i], j) += g.at(i, j);
                  }
                }
                t.accumulate(a, da);
              });
}

NodeId Tape::mean_rows(NodeId a) {
  const Tensor& A = value(a);
  if (A.rows() == 0) {
    throw InvalidShapeError("mean_rows: empty input " + A.shape_str());
  }
  Tensor out(1, A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < A.cols(); ++j) out.at(0, j) += A.at(i, j);
  }
  const double inv = 1.0 / static_cast<double>(A.rows());
  for (std::size_t j = 0; j < A.cols(); ++j) out.at(0, j) *= inv;
  return push("mean_rows", std::move(out), {a},
              [a](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                const double inv = 1.0 / static_cast<double>(A.rows());
                Tensor da(A.rows(), A.cols());
                for (std::size_t i = 0; i < A.rows(); ++i) {
                  for (std::size_t j = 0; j < A.cols(); ++j) {
                    da.at(i, j) = g.at(0, j) * inv;
                  }
                }
                t.accumulate(a, da);
              });
}

NodeId Tape::scale(NodeId a, double factor) {
  const Tensor& A = value(a);
  Tensor out(A.rows(), A.cols());
  for (std::size_t k = 0; k < A.size(); ++k) {
    out.data()[k] = A.data()[k] * factor;
  }
  return push("scale", std::move(out), {a},
              [a, factor](Tape& t, const Tensor& g) {
                Tensor da(g.rows(), g.cols());
                for (std::size_t k = 0; k < g.size(); ++k) {
                  da.data()[k] = g.data()[k] * factor;
                }
                t.accumulate(a, da);
              });
}

NodeId Tape::transpose(NodeId a) {
  return push("transpose", value(a).transposed(), {a},
              [a](Tape& t, const Tensor& g) {
                t.accumulate(a, g.transposed());
              });
}

NodeId Tape::reshape(NodeId a, std::size_t rows, std::size_t cols) {
  const Tensor& A = value(a);
  if (rows * cols != A.size()) {
    throw InvalidShapeError("reshape: " + A.shape_str() + " to " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
  Tensor out(rows, cols);
  out.data() = A.data();
  return push("reshape", std::move(out), {a},
              [a](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                Tensor da(A.rows(), A.cols());
                da.data() = g.data();
                t.accumulate(a, da);
              });
}

NodeId Tape::sum_all(NodeId a) {
  const Tensor& A = value(a);
  double s = 0.0;
  for (double x : A.data()) s += x;
  return push("sum_all", Tensor::scalar(s), {a},
              [a](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                t.accumulate(a,
                             Tensor::full(A.rows(), A.cols(), g.at(0, 0)));
              });
}

NodeId Tape::clamp(NodeId a, double lo, double hi) {
  const Tensor& A = value(a);
  Tensor out(A.rows(), A.cols());
  for (std::size_t k = 0; k < A.size(); ++k) {
    out.data()[k] = std::min(std::max(A.data()[k], lo), hi);
  }
  return push("clamp", std::move(out), {a},
              [a, lo, hi](Tape& t, const Tensor& g) {
                const Tensor& A = t.value(a);
                Tensor da(A.rows(), A.cols());
                for (std::size_t k = 0; k < A.size(); ++k) {
                  const double x = A.data()[k];
                  da.data()[k] = (x > lo && x < hi) ? g.data()[k] : 0.0;
                }
                t.accumulate(a, da);
              });
}

GradientMap Tape::backward(NodeId loss) {
  const Tensor& lv = value(loss);
  if (!lv.is_scalar()) {
    throw InvalidShapeError("backward: loss must be 1x1, got " +
                            lv.shape_str());
  }
  grads_.assign(nodes_.size(), Tensor());
  grads_[loss] = Tensor::scalar(1.0);
  for (NodeId i = loss; i >= 0; --i) {
    if (grads_[i].empty() || !nodes_[i].backprop) continue;
    nodes_[i].backprop(*this, grads_[i]);
  }
  GradientMap out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.param_name.empty()) continue;
    const Tensor& g = grads_[i];
    auto it = out.find(n.param_name);
    if (it == out.end()) {
      out.emplace(n.param_name,
                  g.empty() ? Tensor::zeros(n.value.rows(), n.value.cols())
                            : g);
    } else if (!g.empty()) {
      // Same parameter placed more than once: gradients sum.
      for (std::size_t k = 0; k < g.size(); ++k) {
        it->second.data()[k] += g.data()[k];
      }
    }
  }
  return out;
}

}  // namespace pacrf
