#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace thermocast {

using Shape = std::vector<int>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

struct TensorImpl;

// A dense 64-bit tensor participating in a reverse-mode gradient graph.
// Tensor is a cheap shared handle; ops return fresh nodes that hold their
// parents alive until backward() has run and the handles are dropped.
// Layout is row-major, images in (batch, channel, height, width) order.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_values(Shape shape, std::vector<double> values,
                              bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    int rank() const;
    int dim(int axis) const;
    std::int64_t size() const;

    const std::vector<double>& values() const;
    // Direct access for leaf data and optimizer updates. Graphs are built
    // per forward call, so mutating a leaf between calls is well-defined.
    std::vector<double>& mutable_values();

    bool requires_grad() const;
    bool has_grad() const;
    const std::vector<double>& grad() const;  // UsageError when absent
    void zero_grad();

    double item() const;  // scalar tensors only

    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

    TensorImpl* impl() const { return impl_.get(); }

private:
    friend Tensor make_op_result(Shape shape, std::vector<double> values,
                                 std::vector<Tensor> parents,
                                 std::function<void(TensorImpl&)> backward_fn,
                                 const char* op_name);
    friend void backward(const Tensor& loss);

    std::shared_ptr<TensorImpl> impl_;
};

struct TensorImpl {
    Shape shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::vector<double> grad;  // allocated on demand, same length as values
    std::vector<Tensor> parents;
    std::function<void(TensorImpl&)> backward_fn;
    const char* op = "leaf";

    std::vector<double>& ensure_grad();
};

// Disables graph recording in scope; forward passes under a guard produce
// constant tensors regardless of the inputs' requires_grad flags.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

// --- operators -----------------------------------------------------------
// All forward results are checked finite; a NaN/Inf output raises DataError.

// Cross-correlation (no kernel flip). input (N,Cin,H,W), weight
// (Cout,Cin,kh,kw), optional bias (Cout). Zero padding.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding);

// Fractionally-strided convolution, the gradient of conv2d. weight layout
// (Cin,Cout,kh,kw); output spatial size (H-1)*stride - 2*padding + kh.
Tensor conv2d_transpose(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride, int padding);

// 2x2 max pooling, stride 2. Backward routes to the first (row-major)
// maximal element of each block.
Tensor maxpool2(const Tensor& input);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

// Concatenation along the channel axis of (N,C,H,W) tensors.
Tensor concat_channels(const std::vector<Tensor>& parts);

// View-copy of channels [start, start+count) of an (N,C,H,W) tensor.
Tensor slice_channels(const Tensor& x, int start, int count);

Tensor sum(const Tensor& x);   // scalar
Tensor mean(const Tensor& x);  // scalar

// Reverse-mode sweep from a scalar loss; accumulates additively into the
// grad buffers of every requires_grad node reachable through the graph.
void backward(const Tensor& loss);

}  // namespace thermocast
