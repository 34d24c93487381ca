// SPDX-License-Identifier: Apache-2.0
#include "timegrad/num/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "timegrad/error.hpp"

namespace timegrad::num {

namespace {
thread_local Graph* g_active = nullptr;
std::atomic<std::uint64_t> g_next_graph_id{1};

void require_finite(std::span<const double> values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(where) + ": non-finite value");
  }
}
}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  for (auto s : shape) {
    if (s == 0) throw DimensionError("tensor: zero-sized dimension in " + shape_str(shape));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->data.assign(shape_numel(shape), value);
  impl->shape = std::move(shape);
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  for (auto s : shape) {
    if (s == 0) throw DimensionError("tensor: zero-sized dimension in " + shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor: shape " + shape_str(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
  }
  require_finite(values, "tensor");
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t = from(std::move(shape), std::move(values));
  t.impl_->requires_grad = true;
  return t;
}

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= impl_->shape.size()) {
    throw DimensionError("tensor: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(impl_->shape));
  }
  return impl_->shape[axis];
}

std::size_t Tensor::numel() const { return impl_->data.size(); }

std::span<const double> Tensor::data() const { return impl_->data; }

std::span<double> Tensor::mutable_data() {
  if (impl_->graph != 0) throw ContractError("tensor: cannot mutate a recorded value");
  return impl_->data;
}

double Tensor::item() const {
  if (numel() != 1) throw ContractError("tensor: item() on " + shape_str(shape()));
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }
bool Tensor::has_grad() const { return !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }
std::span<double> Tensor::mutable_grad() { return impl_->ensure_grad(); }

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

Graph::Graph() : id_(g_next_graph_id.fetch_add(1)) {}

void Graph::record(const detail::ImplPtr& output, BackwardFn backward_fn) {
  output->graph = id_;
  output->node = nodes_.size();
  nodes_.push_back(Node{output, std::move(backward_fn)});
}

bool Graph::owns(const Tensor& t) const {
  return t.defined() && t.impl()->graph == id_ && t.impl()->node < nodes_.size();
}

void Graph::run_backward(std::size_t root_node) {
  for (std::size_t i = 0; i <= root_node; ++i) {
    if (auto out = nodes_[i].output.lock()) out->grad.clear();
  }
  auto root = nodes_[root_node].output.lock();
  if (!root) throw GraphError("backward: root tensor no longer alive");
  root->ensure_grad()[0] = 1.0;
  for (std::size_t i = root_node + 1; i-- > 0;) {
    auto out = nodes_[i].output.lock();
    if (!out || out->grad.empty()) continue;
    nodes_[i].backward_fn(*out);
  }
}

GraphScope::GraphScope(Graph& graph) : previous_(g_active) { g_active = &graph; }
GraphScope::~GraphScope() { g_active = previous_; }

Graph* active_graph() noexcept { return g_active; }

void backward(const Tensor& root) {
  if (!root.defined() || root.numel() != 1) {
    throw ContractError("backward: root must be a scalar, got " +
                        (root.defined() ? shape_str(root.shape()) : std::string("undefined")));
  }
  Graph* g = active_graph();
  if (g == nullptr || !g->owns(root)) {
    throw GraphError("backward: root was not produced on the active graph");
  }
  g->run_backward(root.impl()->node);
}

}  // namespace timegrad::num
