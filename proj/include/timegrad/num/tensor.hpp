// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace timegrad::num {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Graph;

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until something is accumulated
  bool requires_grad = false;
  std::uint64_t graph = 0;   // id of the tape the tensor was recorded on (0 for leaves)
  std::size_t node = 0;      // index on that tape

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

using ImplPtr = std::shared_ptr<TensorImpl>;

}  // namespace detail

/// Shared handle to a dense row-major array of doubles.
///
/// Copies alias the same storage. Values produced by operations are never
/// modified afterwards; only parameters (leaves with requires_grad) are
/// mutated, and only by the optimizer.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);
  /// Leaf with requires_grad set; the values are checked for finiteness.
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;

  std::span<const double> data() const;
  /// Mutable access is reserved for leaves (parameters, constants being built).
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Copy of the values with no graph history.
  Tensor detach() const;

  const detail::ImplPtr& impl() const { return impl_; }
  explicit Tensor(detail::ImplPtr impl) : impl_(std::move(impl)) {}

 private:
  detail::ImplPtr impl_;
};

/// Dynamic reverse-mode tape. Nodes are appended in execution order, which is
/// a topological order by construction.
class Graph {
 public:
  Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// `backward_fn` receives the output whose grad is populated and must
  /// accumulate into the inputs it captured.
  using BackwardFn = std::function<void(detail::TensorImpl& output)>;
  void record(const detail::ImplPtr& output, BackwardFn backward_fn);
  std::size_t size() const noexcept { return nodes_.size(); }
  bool owns(const Tensor& t) const;

  /// Runs the tape backwards from `root_node`. Intermediate gradients are
  /// reset first; leaf gradients accumulate.
  void run_backward(std::size_t root_node);

 private:
  struct Node {
    std::weak_ptr<detail::TensorImpl> output;
    BackwardFn backward_fn;
  };
  std::uint64_t id_;
  std::vector<Node> nodes_;
};

/// Makes a graph the active tape for the current thread for its lifetime.
/// Operations only record when an input requires grad and a tape is active.
class GraphScope {
 public:
  explicit GraphScope(Graph& graph);
  ~GraphScope();
  GraphScope(const GraphScope&) = delete;
  GraphScope& operator=(const GraphScope&) = delete;

 private:
  Graph* previous_;
};

Graph* active_graph() noexcept;

/// Accumulates d(root)/d(leaf) into every reachable requires_grad leaf.
void backward(const Tensor& root);

}  // namespace timegrad::num
