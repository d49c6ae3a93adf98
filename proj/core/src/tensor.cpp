#include "thermocast/tensor.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "thermocast/errors.hpp"

namespace thermocast {

namespace {

thread_local bool g_grad_enabled = true;

void check_positive_extents(const Shape& shape) {
    for (const int d : shape) {
        if (d <= 0) {
            throw UsageError("tensor extents must be positive, got shape " +
                             shape_to_string(shape));
        }
    }
}

void check_all_finite(const char* op, const std::vector<double>& values) {
    for (const double v : values) {
        if (!std::isfinite(v)) {
            throw DataError(std::string("non-finite value produced by op '") + op + "'");
        }
    }
}

}  // namespace

std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (const int d : shape) {
        n *= d;
    }
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

std::vector<double>& TensorImpl::ensure_grad() {
    if (grad.empty()) {
        grad.assign(values.size(), 0.0);
    }
    return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    check_positive_extents(shape);
    const auto n = static_cast<std::size_t>(shape_numel(shape));
    return from_values(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    check_positive_extents(shape);
    const auto n = static_cast<std::size_t>(shape_numel(shape));
    return from_values(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
    check_positive_extents(shape);
    if (static_cast<std::int64_t>(values.size()) != shape_numel(shape)) {
        throw UsageError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_to_string(shape));
    }
    Tensor t;
    t.impl_ = std::make_shared<TensorImpl>();
    t.impl_->shape = std::move(shape);
    t.impl_->values = std::move(values);
    t.impl_->requires_grad = requires_grad;
    return t;
}

const Shape& Tensor::shape() const {
    if (!impl_) {
        throw UsageError("shape() on undefined tensor");
    }
    return impl_->shape;
}

int Tensor::rank() const { return static_cast<int>(shape().size()); }

int Tensor::dim(int axis) const {
    const Shape& s = shape();
    if (axis < 0 || axis >= static_cast<int>(s.size())) {
        throw UsageError("axis out of range");
    }
    return s[static_cast<std::size_t>(axis)];
}

std::int64_t Tensor::size() const { return shape_numel(shape()); }

const std::vector<double>& Tensor::values() const {
    if (!impl_) {
        throw UsageError("values() on undefined tensor");
    }
    return impl_->values;
}

std::vector<double>& Tensor::mutable_values() {
    if (!impl_) {
        throw UsageError("mutable_values() on undefined tensor");
    }
    return impl_->values;
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) {
        throw UsageError("grad() requested but no gradient has been accumulated");
    }
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (impl_) {
        impl_->grad.clear();
    }
}

double Tensor::item() const {
    if (size() != 1) {
        throw UsageError("item() on non-scalar tensor of shape " + shape_to_string(shape()));
    }
    return values()[0];
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Tensor make_op_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                      std::function<void(TensorImpl&)> backward_fn, const char* op_name) {
    check_all_finite(op_name, values);
    bool any_grad = false;
    if (g_grad_enabled) {
        for (const Tensor& p : parents) {
            any_grad = any_grad || p.requires_grad();
        }
    }
    Tensor out = Tensor::from_values(std::move(shape), std::move(values), any_grad);
    out.impl()->op = op_name;
    if (any_grad) {
        out.impl()->parents = std::move(parents);
        out.impl()->backward_fn = std::move(backward_fn);
    }
    return out;
}

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ConfigError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                          " vs " + shape_to_string(b.shape()));
    }
}

template <typename Fwd, typename Bwd>
Tensor unary_elementwise(const char* name, const Tensor& x, Fwd fwd, Bwd dfdx_from_y) {
    const std::vector<double>& xv = x.values();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) {
        out[i] = fwd(xv[i]);
    }
    auto xi = x.impl();
    return make_op_result(
        x.shape(), std::move(out), {x},
        [xi, dfdx_from_y](TensorImpl& self) {
            if (!xi->requires_grad) {
                return;
            }
            auto& gx = xi->ensure_grad();
            for (std::size_t i = 0; i < self.values.size(); ++i) {
                gx[i] += self.grad[i] * dfdx_from_y(xi->values[i], self.values[i]);
            }
        },
        name);
}

}  // namespace

Tensor relu(const Tensor& x) {
    return unary_elementwise(
        "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
        [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) {
        throw UsageError("leaky_relu slope must lie in (0,1)");
    }
    return unary_elementwise(
        "leaky_relu", x, [slope](double v) { return v >= 0.0 ? v : slope * v; },
        [slope](double v, double) { return v >= 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& x) {
    return unary_elementwise(
        "sigmoid", x,
        [](double v) {
            if (v >= 0.0) {
                return 1.0 / (1.0 + std::exp(-v));
            }
            const double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
    return unary_elementwise(
        "tanh", x, [](double v) { return std::tanh(v); },
        [](double, double y) { return 1.0 - y * y; });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] + bv[i];
    }
    auto ai = a.impl();
    auto bi = b.impl();
    return make_op_result(
        a.shape(), std::move(out), {a, b},
        [ai, bi](TensorImpl& self) {
            if (ai->requires_grad) {
                auto& g = ai->ensure_grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] += self.grad[i];
                }
            }
            if (bi->requires_grad) {
                auto& g = bi->ensure_grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] += self.grad[i];
                }
            }
        },
        "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] - bv[i];
    }
    auto ai = a.impl();
    auto bi = b.impl();
    return make_op_result(
        a.shape(), std::move(out), {a, b},
        [ai, bi](TensorImpl& self) {
            if (ai->requires_grad) {
                auto& g = ai->ensure_grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] += self.grad[i];
                }
            }
            if (bi->requires_grad) {
                auto& g = bi->ensure_grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] -= self.grad[i];
                }
            }
        },
        "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] * bv[i];
    }
    auto ai = a.impl();
    auto bi = b.impl();
    return make_op_result(
        a.shape(), std::move(out), {a, b},
        [ai, bi](TensorImpl& self) {
            if (ai->requires_grad) {
                auto& g = ai->ensure_grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] += self.grad[i] * bi->values[i];
                }
            }
            if (bi->requires_grad) {
                auto& g = bi->ensure_grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] += self.grad[i] * ai->values[i];
                }
            }
        },
        "mul");
}

Tensor scale(const Tensor& x, double factor) {
    if (!std::isfinite(factor)) {
        throw UsageError("scale factor must be finite");
    }
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) {
        out[i] = factor * xv[i];
    }
    auto xi = x.impl();
    return make_op_result(
        x.shape(), std::move(out), {x},
        [xi, factor](TensorImpl& self) {
            if (!xi->requires_grad) {
                return;
            }
            auto& g = xi->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) {
                g[i] += factor * self.grad[i];
            }
        },
        "scale");
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw UsageError("concat_channels on empty list");
    }
    const Shape& first = parts[0].shape();
    if (first.size() != 4) {
        throw UsageError("concat_channels expects rank-4 tensors");
    }
    int total_c = 0;
    for (const Tensor& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != 4 || s[0] != first[0] || s[2] != first[2] || s[3] != first[3]) {
            throw ConfigError("concat_channels: non-channel extents differ, " +
                              shape_to_string(first) + " vs " + shape_to_string(s));
        }
        total_c += s[1];
    }
    const int n = first[0];
    const std::int64_t hw = static_cast<std::int64_t>(first[2]) * first[3];
    std::vector<double> out(static_cast<std::size_t>(n) * total_c * hw);
    std::vector<int> offsets(parts.size());
    int running = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        offsets[p] = running;
        const int c = parts[p].shape()[1];
        const auto& pv = parts[p].values();
        for (int b = 0; b < n; ++b) {
            const std::size_t dst = (static_cast<std::size_t>(b) * total_c + running) * hw;
            const std::size_t src = static_cast<std::size_t>(b) * c * hw;
            std::copy(pv.begin() + src, pv.begin() + src + static_cast<std::size_t>(c) * hw,
                      out.begin() + dst);
        }
        running += c;
    }
    std::vector<Tensor> parents = parts;
    return make_op_result(
        {n, total_c, first[2], first[3]}, std::move(out), std::move(parents),
        [n, hw, total_c, offsets](TensorImpl& self) {
            for (std::size_t p = 0; p < self.parents.size(); ++p) {
                TensorImpl* pi = self.parents[p].impl();
                if (!pi->requires_grad) {
                    continue;
                }
                const int c = pi->shape[1];
                auto& g = pi->ensure_grad();
                for (int b = 0; b < n; ++b) {
                    const std::size_t src =
                        (static_cast<std::size_t>(b) * total_c + offsets[p]) * hw;
                    const std::size_t dst = static_cast<std::size_t>(b) * c * hw;
                    for (std::int64_t i = 0; i < static_cast<std::int64_t>(c) * hw; ++i) {
                        g[dst + i] += self.grad[src + i];
                    }
                }
            }
        },
        "concat_channels");
}

Tensor slice_channels(const Tensor& x, int start, int count) {
    if (x.rank() != 4) {
        throw UsageError("slice_channels expects a rank-4 tensor");
    }
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (start < 0 || count <= 0 || start + count > c) {
        throw UsageError("slice_channels: range [" + std::to_string(start) + "," +
                         std::to_string(start + count) + ") out of " + std::to_string(c) +
                         " channels");
    }
    const std::int64_t hw = static_cast<std::int64_t>(h) * w;
    std::vector<double> out(static_cast<std::size_t>(n) * count * hw);
    const auto& xv = x.values();
    for (int b = 0; b < n; ++b) {
        const std::size_t src = (static_cast<std::size_t>(b) * c + start) * hw;
        const std::size_t dst = static_cast<std::size_t>(b) * count * hw;
        std::copy(xv.begin() + src, xv.begin() + src + static_cast<std::size_t>(count) * hw,
                  out.begin() + dst);
    }
    auto xi = x.impl();
    return make_op_result(
        {n, count, h, w}, std::move(out), {x},
        [xi, n, c, start, count, hw](TensorImpl& self) {
            if (!xi->requires_grad) {
                return;
            }
            auto& g = xi->ensure_grad();
            for (int b = 0; b < n; ++b) {
                const std::size_t dst = (static_cast<std::size_t>(b) * c + start) * hw;
                const std::size_t src = static_cast<std::size_t>(b) * count * hw;
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(count) * hw; ++i) {
                    g[dst + i] += self.grad[src + i];
                }
            }
        },
        "slice_channels");
}

Tensor sum(const Tensor& x) {
    const auto& xv = x.values();
    double total = 0.0;
    for (const double v : xv) {
        total += v;
    }
    auto xi = x.impl();
    return make_op_result(
        {1}, {total}, {x},
        [xi](TensorImpl& self) {
            if (!xi->requires_grad) {
                return;
            }
            auto& g = xi->ensure_grad();
            for (double& gi : g) {
                gi += self.grad[0];
            }
        },
        "sum");
}

Tensor mean(const Tensor& x) {
    const auto& xv = x.values();
    double total = 0.0;
    for (const double v : xv) {
        total += v;
    }
    const double inv_n = 1.0 / static_cast<double>(xv.size());
    auto xi = x.impl();
    return make_op_result(
        {1}, {total * inv_n}, {x},
        [xi, inv_n](TensorImpl& self) {
            if (!xi->requires_grad) {
                return;
            }
            auto& g = xi->ensure_grad();
            for (double& gi : g) {
                gi += self.grad[0] * inv_n;
            }
        },
        "mean");
}

void backward(const Tensor& loss) {
    if (!loss.defined()) {
        throw UsageError("backward() on undefined tensor");
    }
    if (loss.size() != 1) {
        throw UsageError("backward() requires a scalar loss, got shape " +
                         shape_to_string(loss.shape()));
    }
    if (!loss.requires_grad()) {
        throw UsageError("backward() on a tensor that does not require grad");
    }

    // Iterative postorder DFS over parents; reverse postorder is a valid
    // topological order for the reverse sweep.
    std::vector<TensorImpl*> order;
    std::unordered_set<TensorImpl*> visited;
    struct Frame {
        TensorImpl* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({loss.impl(), 0});
    visited.insert(loss.impl());
    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next_parent < top.node->parents.size()) {
            TensorImpl* p = top.node->parents[top.next_parent++].impl();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(top.node);
            stack.pop_back();
        }
    }

    loss.impl()->ensure_grad()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorImpl* node = *it;
        if (node->backward_fn && !node->grad.empty()) {
            node->backward_fn(*node);
        }
    }
}

}  // namespace thermocast
