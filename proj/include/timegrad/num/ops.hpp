// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "timegrad/num/tensor.hpp"

// Differentiable primitives. Every function validates shapes (DimensionError
// naming the op and the shapes involved), rejects non-finite results
// (NumericError), and records a backward node when an input requires grad and
// a Graph is active on the calling thread.
namespace timegrad::num {

/// (m,k) x (k,n) -> (m,n)
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// (m,n) + (n) with the vector repeated over rows.
Tensor add_rowwise(const Tensor& a, const Tensor& bias);
/// (k) or (1,k) -> (m,k)
Tensor broadcast_rows(const Tensor& v, std::size_t rows);
/// (C) -> (C,D) or (B,C) -> (B,C,D): repeats each value along the spatial axis.
Tensor broadcast_spatial(const Tensor& v, std::size_t spatial);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length);
Tensor reshape(const Tensor& a, Shape shape);
/// Rows of `table` (R,k) picked by index -> (indices.size(), k).
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor softplus(const Tensor& a);

/// Scalar (shape (1)) reductions.
Tensor mean(const Tensor& a);
Tensor sum_squares(const Tensor& a);

/// Non-causal circular convolution over the last axis.
///
/// input (Cin,D) or (B,Cin,D), kernel (Cout,Cin,k) with k odd. Output
/// position d reads input positions (d + j*dilation - dilation*(k-1)/2) mod D.
Tensor conv1d_circular(const Tensor& input, const Tensor& kernel, std::size_t dilation);
Tensor conv1d_circular(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                       std::size_t dilation);

/// Receives configuration warnings (e.g. a dilated kernel that wraps the whole
/// spatial axis). Each distinct message is delivered once until the handler
/// is replaced. Defaults to writing a line to stderr.
void set_warning_handler(std::function<void(const std::string&)> handler);

}  // namespace timegrad::num
