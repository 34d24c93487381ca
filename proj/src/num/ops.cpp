// SPDX-License-Identifier: Apache-2.0
#include "timegrad/num/ops.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <set>

#include "timegrad/error.hpp"

namespace timegrad::num {

using detail::ImplPtr;
using detail::TensorImpl;

namespace {

struct WarningState {
  std::mutex mu;
  std::set<std::string> seen;
  std::function<void(const std::string&)> handler = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
};

WarningState& warnings() {
  static WarningState state;
  return state;
}

/// Reports each distinct message once until the handler is replaced.
void warn_once(const std::string& msg) {
  std::function<void(const std::string&)> handler;
  {
    std::lock_guard<std::mutex> lock(warnings().mu);
    if (!warnings().seen.insert(msg).second) return;
    handler = warnings().handler;
  }
  if (handler) handler(msg);
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                       " and " + shape_str(b.shape()));
}

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw DimensionError(std::string(op) + ": " + detail);
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (active_graph() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Wraps freshly computed values into a tensor, enforcing finiteness and
// recording the backward closure produced by `make_backward` when needed.
template <class MakeBackward>
Tensor emit(const char* op, Shape shape, std::vector<double> values, bool track,
            MakeBackward&& make_backward) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite output");
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  if (track) {
    impl->requires_grad = true;
    active_graph()->record(impl, make_backward());
  }
  return Tensor(std::move(impl));
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double stable_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Splits a shape around `axis` into (outer, extent, inner) element counts.
struct AxisView {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
  std::lock_guard<std::mutex> lock(warnings().mu);
  warnings().handler = std::move(handler);
  warnings().seen.clear();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) shape_error("matmul", a, b);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return emit("matmul", {m, n}, std::move(out), tracking({&a, &b}), [&] {
    return [ai = a.impl(), bi = b.impl(), m, k, n](TensorImpl& o) {
      const double* g = o.grad.data();
      if (ai->requires_grad) {
        double* ga = ai->ensure_grad().data();
        const double* pb = bi->data.data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * pb[p * n + j];
            ga[i * k + p] += s;
          }
        }
      }
      if (bi->requires_grad) {
        double* gb = bi->ensure_grad().data();
        const double* pa = ai->data.data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = pa[i * k + p];
            double* grow = gb + p * n;
            const double* gi = g + i * n;
            for (std::size_t j = 0; j < n; ++j) grow[j] += aip * gi[j];
          }
        }
      }
    };
  });
}

namespace {

enum class Binary { Add, Sub, Mul };

Tensor binary(const char* op, Binary kind, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error(op, a, b);
  const std::size_t n = a.numel();
  std::vector<double> out(n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  switch (kind) {
    case Binary::Add:
      for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] + pb[i];
      break;
    case Binary::Sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] - pb[i];
      break;
    case Binary::Mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] * pb[i];
      break;
  }
  return emit(op, a.shape(), std::move(out), tracking({&a, &b}), [&] {
    return [ai = a.impl(), bi = b.impl(), kind, n](TensorImpl& o) {
      const double* g = o.grad.data();
      if (ai->requires_grad) {
        double* ga = ai->ensure_grad().data();
        if (kind == Binary::Mul) {
          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bi->data[i];
        } else {
          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
        }
      }
      if (bi->requires_grad) {
        double* gb = bi->ensure_grad().data();
        if (kind == Binary::Mul) {
          for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * ai->data[i];
        } else if (kind == Binary::Sub) {
          for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
        } else {
          for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
        }
      }
    };
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary("add", Binary::Add, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary("sub", Binary::Sub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary("mul", Binary::Mul, a, b); }

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  return emit("scale", a.shape(), std::move(out), tracking({&a}), [&] {
    return [ai = a.impl(), factor](TensorImpl& o) {
      auto& ga = ai->ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * o.grad[i];
    };
  });
}

Tensor add_rowwise(const Tensor& a, const Tensor& bias) {
  if (a.rank() != 2 || bias.rank() != 1 || bias.dim(0) != a.dim(1)) {
    shape_error("add_rowwise", a, bias);
  }
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(a.data().begin(), a.data().end());
  const double* pb = bias.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += pb[j];
  }
  return emit("add_rowwise", a.shape(), std::move(out), tracking({&a, &bias}), [&] {
    return [ai = a.impl(), bi = bias.impl(), m, n](TensorImpl& o) {
      if (ai->requires_grad) {
        auto& ga = ai->ensure_grad();
        for (std::size_t i = 0; i < m * n; ++i) ga[i] += o.grad[i];
      }
      if (bi->requires_grad) {
        auto& gb = bi->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) gb[j] += o.grad[i * n + j];
        }
      }
    };
  });
}

Tensor broadcast_rows(const Tensor& v, std::size_t rows) {
  const bool ok = v.rank() == 1 || (v.rank() == 2 && v.dim(0) == 1);
  if (!ok || rows == 0) {
    shape_error("broadcast_rows", "expected (k) or (1,k) and rows > 0, got " + shape_str(v.shape()));
  }
  const std::size_t k = v.numel();
  std::vector<double> out(rows * k);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(v.data().begin(), v.data().end(), out.begin() + static_cast<std::ptrdiff_t>(r * k));
  }
  return emit("broadcast_rows", {rows, k}, std::move(out), tracking({&v}), [&] {
    return [vi = v.impl(), rows, k](TensorImpl& o) {
      auto& gv = vi->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < k; ++j) gv[j] += o.grad[r * k + j];
      }
    };
  });
}

Tensor broadcast_spatial(const Tensor& v, std::size_t spatial) {
  if ((v.rank() != 1 && v.rank() != 2) || spatial == 0) {
    shape_error("broadcast_spatial",
                "expected (C) or (B,C) and D > 0, got " + shape_str(v.shape()));
  }
  Shape shape = v.shape();
  shape.push_back(spatial);
  const std::size_t n = v.numel();
  std::vector<double> out(n * spatial);
  const double* pv = v.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(i * spatial), spatial, pv[i]);
  }
  return emit("broadcast_spatial", std::move(shape), std::move(out), tracking({&v}), [&] {
    return [vi = v.impl(), n, spatial](TensorImpl& o) {
      auto& gv = vi->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t d = 0; d < spatial; ++d) s += o.grad[i * spatial + d];
        gv[i] += s;
      }
    };
  });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) shape_error("concat", "no operands");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    shape_error("concat", "axis " + std::to_string(axis) + " out of range for " + shape_str(first));
  }
  std::size_t total = 0;
  bool track = false;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) shape_error("concat", parts[0], p);
    total += s[axis];
    track = track || tracking({&p});
  }
  Shape shape = first;
  shape[axis] = total;
  const AxisView view = axis_view(shape, axis);
  std::vector<double> out(shape_numel(shape));
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t block = p.dim(axis) * view.inner;
    const double* src = p.data().data();
    for (std::size_t o = 0; o < view.outer; ++o) {
      std::copy_n(src + o * block, block,
                  out.begin() + static_cast<std::ptrdiff_t>(o * view.extent * view.inner + offset));
    }
    offset += block;
  }
  return emit("concat", std::move(shape), std::move(out), track, [&] {
    std::vector<ImplPtr> inputs;
    for (const Tensor& p : parts) inputs.push_back(p.impl());
    return [inputs = std::move(inputs), axis, view](TensorImpl& o) {
      std::size_t offset = 0;
      for (const ImplPtr& in : inputs) {
        const std::size_t block = in->shape[axis] * view.inner;
        if (in->requires_grad) {
          auto& g = in->ensure_grad();
          for (std::size_t b = 0; b < view.outer; ++b) {
            const double* src = o.grad.data() + b * view.extent * view.inner + offset;
            for (std::size_t i = 0; i < block; ++i) g[b * block + i] += src[i];
          }
        }
        offset += block;
      }
    };
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length) {
  if (axis >= a.rank() || length == 0 || start + length > a.dim(axis)) {
    shape_error("slice", "cannot take [" + std::to_string(start) + ", " +
                             std::to_string(start + length) + ") on axis " +
                             std::to_string(axis) + " of " + shape_str(a.shape()));
  }
  const AxisView view = axis_view(a.shape(), axis);
  Shape shape = a.shape();
  shape[axis] = length;
  const std::size_t block = length * view.inner;
  std::vector<double> out(view.outer * block);
  const double* src = a.data().data();
  for (std::size_t o = 0; o < view.outer; ++o) {
    std::copy_n(src + (o * view.extent + start) * view.inner, block,
                out.begin() + static_cast<std::ptrdiff_t>(o * block));
  }
  return emit("slice", std::move(shape), std::move(out), tracking({&a}), [&] {
    return [ai = a.impl(), view, start, block](TensorImpl& o) {
      auto& g = ai->ensure_grad();
      for (std::size_t b = 0; b < view.outer; ++b) {
        double* dst = g.data() + (b * view.extent + start) * view.inner;
        const double* src = o.grad.data() + b * block;
        for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
      }
    };
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    shape_error("reshape", "cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return emit("reshape", std::move(shape), std::move(out), tracking({&a}), [&] {
    return [ai = a.impl()](TensorImpl& o) {
      auto& g = ai->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    };
  });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices) {
  if (table.rank() != 2 || indices.empty()) {
    shape_error("gather_rows", "expected a (R,k) table and indices, got " + shape_str(table.shape()));
  }
  const std::size_t rows = table.dim(0), k = table.dim(1);
  std::vector<double> out(indices.size() * k);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows) {
      shape_error("gather_rows", "index " + std::to_string(indices[r]) + " out of range for " +
                                     shape_str(table.shape()));
    }
    std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(indices[r] * k), k,
                out.begin() + static_cast<std::ptrdiff_t>(r * k));
  }
  return emit("gather_rows", {indices.size(), k}, std::move(out), tracking({&table}), [&] {
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    return [ti = table.impl(), idx = std::move(idx), k](TensorImpl& o) {
      auto& g = ti->ensure_grad();
      for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t j = 0; j < k; ++j) g[idx[r] * k + j] += o.grad[r * k + j];
      }
    };
  });
}

Tensor sigmoid(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(a.data()[i]);
  return emit("sigmoid", a.shape(), std::move(out), tracking({&a}), [&] {
    return [ai = a.impl()](TensorImpl& o) {
      auto& g = ai->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = o.data[i];
        g[i] += o.grad[i] * s * (1.0 - s);
      }
    };
  });
}

Tensor tanh(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a.data()[i]);
  return emit("tanh", a.shape(), std::move(out), tracking({&a}), [&] {
    return [ai = a.impl()](TensorImpl& o) {
      auto& g = ai->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = o.data[i];
        g[i] += o.grad[i] * (1.0 - t * t);
      }
    };
  });
}

Tensor softplus(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_softplus(a.data()[i]);
  return emit("softplus", a.shape(), std::move(out), tracking({&a}), [&] {
    return [ai = a.impl()](TensorImpl& o) {
      auto& g = ai->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * stable_sigmoid(ai->data[i]);
    };
  });
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  const double n = static_cast<double>(a.numel());
  return emit("mean", {1}, {s / n}, tracking({&a}), [&] {
    return [ai = a.impl(), n](TensorImpl& o) {
      auto& g = ai->ensure_grad();
      const double d = o.grad[0] / n;
      for (double& v : g) v += d;
    };
  });
}

Tensor sum_squares(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return emit("sum_squares", {1}, {s}, tracking({&a}), [&] {
    return [ai = a.impl()](TensorImpl& o) {
      auto& g = ai->ensure_grad();
      const double d = 2.0 * o.grad[0];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += d * ai->data[i];
    };
  });
}

namespace {

Tensor conv_impl(const Tensor& input, const Tensor& kernel, const Tensor* bias,
                 std::size_t dilation) {
  const bool batched = input.rank() == 3;
  if ((input.rank() != 2 && !batched) || kernel.rank() != 3 ||
      kernel.dim(1) != input.dim(batched ? 1 : 0)) {
    shape_error("conv1d_circular", input, kernel);
  }
  const std::size_t k = kernel.dim(2);
  if (k % 2 == 0) {
    throw ContractError("conv1d_circular: unsupported even kernel size " + std::to_string(k));
  }
  if (dilation == 0) throw ContractError("conv1d_circular: dilation must be >= 1");
  const std::size_t batch = batched ? input.dim(0) : 1;
  const std::size_t cin = kernel.dim(1), cout = kernel.dim(0);
  const std::size_t width = input.dim(batched ? 2 : 1);
  if (bias != nullptr && (bias->rank() != 1 || bias->dim(0) != cout)) {
    shape_error("conv1d_circular", kernel, *bias);
  }
  if (dilation * (k - 1) >= 2 * width) {
    warn_once("conv1d_circular: dilation " + std::to_string(dilation) + " with kernel " +
                      std::to_string(k) + " wraps around spatial size " + std::to_string(width));
  }

  // Source index for every (tap, position).
  const auto offset = static_cast<long long>(dilation * (k - 1) / 2);
  const auto w = static_cast<long long>(width);
  std::vector<std::size_t> index(k * width);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t d = 0; d < width; ++d) {
      long long src = static_cast<long long>(d) + static_cast<long long>(j * dilation) - offset;
      src %= w;
      if (src < 0) src += w;
      index[j * width + d] = static_cast<std::size_t>(src);
    }
  }

  std::vector<double> out(batch * cout * width, 0.0);
  const double* x = input.data().data();
  const double* kw = kernel.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      double* orow = out.data() + (b * cout + co) * width;
      if (bias != nullptr) std::fill_n(orow, width, bias->data()[co]);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xrow = x + (b * cin + ci) * width;
        for (std::size_t j = 0; j < k; ++j) {
          const double wt = kw[(co * cin + ci) * k + j];
          const std::size_t* idx = index.data() + j * width;
          for (std::size_t d = 0; d < width; ++d) orow[d] += wt * xrow[idx[d]];
        }
      }
    }
  }

  Shape shape = batched ? Shape{batch, cout, width} : Shape{cout, width};
  const bool track = bias != nullptr ? tracking({&input, &kernel, bias}) : tracking({&input, &kernel});
  return emit("conv1d_circular", std::move(shape), std::move(out), track, [&] {
    return [xi = input.impl(), ki = kernel.impl(), bi = bias ? bias->impl() : ImplPtr{},
            index = std::move(index), batch, cin, cout, width, k](TensorImpl& o) {
      const double* g = o.grad.data();
      if (xi->requires_grad) {
        double* gx = xi->ensure_grad().data();
        const double* kw = ki->data.data();
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t co = 0; co < cout; ++co) {
            const double* grow = g + (b * cout + co) * width;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              double* gxrow = gx + (b * cin + ci) * width;
              for (std::size_t j = 0; j < k; ++j) {
                const double wt = kw[(co * cin + ci) * k + j];
                const std::size_t* idx = index.data() + j * width;
                for (std::size_t d = 0; d < width; ++d) gxrow[idx[d]] += wt * grow[d];
              }
            }
          }
        }
      }
      if (ki->requires_grad) {
        double* gk = ki->ensure_grad().data();
        const double* x = xi->data.data();
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t co = 0; co < cout; ++co) {
            const double* grow = g + (b * cout + co) * width;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const double* xrow = x + (b * cin + ci) * width;
              for (std::size_t j = 0; j < k; ++j) {
                const std::size_t* idx = index.data() + j * width;
                double s = 0.0;
                for (std::size_t d = 0; d < width; ++d) s += grow[d] * xrow[idx[d]];
                gk[(co * cin + ci) * k + j] += s;
              }
            }
          }
        }
      }
      if (bi && bi->requires_grad) {
        auto& gb = bi->ensure_grad();
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t co = 0; co < cout; ++co) {
            const double* grow = g + (b * cout + co) * width;
            double s = 0.0;
            for (std::size_t d = 0; d < width; ++d) s += grow[d];
            gb[co] += s;
          }
        }
      }
    };
  });
}

}  // namespace

Tensor conv1d_circular(const Tensor& input, const Tensor& kernel, std::size_t dilation) {
  return conv_impl(input, kernel, nullptr, dilation);
}

Tensor conv1d_circular(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                       std::size_t dilation) {
  return conv_impl(input, kernel, &bias, dilation);
}

}  // namespace timegrad::num
