#include <cblas.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <vector>

#include "thermocast/errors.hpp"
#include "thermocast/tensor.hpp"

extern "C" void openblas_set_num_threads(int);

namespace thermocast {

Tensor make_op_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                      std::function<void(TensorImpl&)> backward_fn, const char* op_name);

namespace {

void pin_blas_threads() {
    static std::once_flag flag;
    // Single-threaded GEMM keeps every training run bit-reproducible.
    std::call_once(flag, [] { openblas_set_num_threads(1); });
}

struct ConvDims {
    int kh, kw, stride, padding;
    int h_small, w_small;  // the conv-input-sized grid (gather side)
    int h_out, w_out;      // the conv-output-sized grid (GEMM column side)
};

// col[(c,ki,kj), (oh,ow)] = src[c, oh*s - p + ki, ow*s - p + kj], zero outside.
void im2col(const double* src, int channels, const ConvDims& d, double* col) {
    const std::int64_t cols = static_cast<std::int64_t>(d.h_out) * d.w_out;
    for (int c = 0; c < channels; ++c) {
        const double* plane = src + static_cast<std::int64_t>(c) * d.h_small * d.w_small;
        for (int ki = 0; ki < d.kh; ++ki) {
            for (int kj = 0; kj < d.kw; ++kj) {
                double* row =
                    col + ((static_cast<std::int64_t>(c) * d.kh + ki) * d.kw + kj) * cols;
                for (int oh = 0; oh < d.h_out; ++oh) {
                    const int ih = oh * d.stride - d.padding + ki;
                    double* out_row = row + static_cast<std::int64_t>(oh) * d.w_out;
                    if (ih < 0 || ih >= d.h_small) {
                        std::memset(out_row, 0, sizeof(double) * static_cast<std::size_t>(d.w_out));
                        continue;
                    }
                    const double* in_row = plane + static_cast<std::int64_t>(ih) * d.w_small;
                    for (int ow = 0; ow < d.w_out; ++ow) {
                        const int iw = ow * d.stride - d.padding + kj;
                        out_row[ow] = (iw >= 0 && iw < d.w_small) ? in_row[iw] : 0.0;
                    }
                }
            }
        }
    }
}

// Scatter-add transpose of im2col.
void col2im_add(const double* col, int channels, const ConvDims& d, double* dst) {
    const std::int64_t cols = static_cast<std::int64_t>(d.h_out) * d.w_out;
    for (int c = 0; c < channels; ++c) {
        double* plane = dst + static_cast<std::int64_t>(c) * d.h_small * d.w_small;
        for (int ki = 0; ki < d.kh; ++ki) {
            for (int kj = 0; kj < d.kw; ++kj) {
                const double* row =
                    col + ((static_cast<std::int64_t>(c) * d.kh + ki) * d.kw + kj) * cols;
                for (int oh = 0; oh < d.h_out; ++oh) {
                    const int ih = oh * d.stride - d.padding + ki;
                    if (ih < 0 || ih >= d.h_small) {
                        continue;
                    }
                    const double* in_row = row + static_cast<std::int64_t>(oh) * d.w_out;
                    double* out_row = plane + static_cast<std::int64_t>(ih) * d.w_small;
                    for (int ow = 0; ow < d.w_out; ++ow) {
                        const int iw = ow * d.stride - d.padding + kj;
                        if (iw >= 0 && iw < d.w_small) {
                            out_row[iw] += in_row[ow];
                        }
                    }
                }
            }
        }
    }
}

void dgemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, int m, int n, int k, const double* a,
           const double* b, double beta, double* c) {
    pin_blas_threads();
    const int lda = (ta == CblasNoTrans) ? k : m;
    const int ldb = (tb == CblasNoTrans) ? n : k;
    cblas_dgemm(CblasRowMajor, ta, tb, m, n, k, 1.0, a, lda, b, ldb, beta, c, n);
}

void check_bias(const Tensor& bias, int out_channels, const char* op) {
    if (!bias.defined()) {
        return;
    }
    if (bias.rank() != 1 || bias.dim(0) != out_channels) {
        throw ConfigError(std::string(op) + ": bias shape " + shape_to_string(bias.shape()) +
                          " does not match " + std::to_string(out_channels) +
                          " output channels");
    }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding) {
    if (input.rank() != 4 || weight.rank() != 4) {
        throw UsageError("conv2d expects rank-4 input and weight");
    }
    if (stride < 1 || padding < 0) {
        throw UsageError("conv2d: stride must be >= 1 and padding >= 0");
    }
    const int n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
    if (weight.dim(1) != cin) {
        throw ConfigError("conv2d: input has " + std::to_string(cin) +
                          " channels but weight expects " + std::to_string(weight.dim(1)));
    }
    if (kh > h + 2 * padding || kw > w + 2 * padding) {
        throw ConfigError("conv2d: kernel exceeds padded input extent");
    }
    const int h_out = (h + 2 * padding - kh) / stride + 1;
    const int w_out = (w + 2 * padding - kw) / stride + 1;
    check_bias(bias, cout, "conv2d");

    const ConvDims dims{kh, kw, stride, padding, h, w, h_out, w_out};
    const std::int64_t k_len = static_cast<std::int64_t>(cin) * kh * kw;
    const std::int64_t m_len = static_cast<std::int64_t>(h_out) * w_out;

    std::vector<double> out(static_cast<std::size_t>(n) * cout * m_len);
    std::vector<double> col(static_cast<std::size_t>(k_len) * m_len);
    const double* x = input.values().data();
    const double* wv = weight.values().data();
    for (int s = 0; s < n; ++s) {
        im2col(x + static_cast<std::int64_t>(s) * cin * h * w, cin, dims, col.data());
        dgemm(CblasNoTrans, CblasNoTrans, cout, static_cast<int>(m_len),
              static_cast<int>(k_len), wv, col.data(), 0.0,
              out.data() + static_cast<std::int64_t>(s) * cout * m_len);
    }
    if (bias.defined()) {
        const double* bv = bias.values().data();
        for (int s = 0; s < n; ++s) {
            for (int c = 0; c < cout; ++c) {
                double* plane = out.data() + (static_cast<std::int64_t>(s) * cout + c) * m_len;
                for (std::int64_t i = 0; i < m_len; ++i) {
                    plane[i] += bv[c];
                }
            }
        }
    }

    std::vector<Tensor> parents{input, weight};
    if (bias.defined()) {
        parents.push_back(bias);
    }
    auto xi = input.impl();
    auto wi = weight.impl();
    auto bi = bias.defined() ? bias.impl() : nullptr;
    auto backward_fn = [xi, wi, bi, dims, n, cin, cout, h, w, k_len, m_len](TensorImpl& self) {
        const double* gout = self.grad.data();
        if (bi && bi->requires_grad) {
            auto& gb = bi->ensure_grad();
            for (int s = 0; s < n; ++s) {
                for (int c = 0; c < cout; ++c) {
                    const double* plane = gout + (static_cast<std::int64_t>(s) * cout + c) * m_len;
                    double acc = 0.0;
                    for (std::int64_t i = 0; i < m_len; ++i) {
                        acc += plane[i];
                    }
                    gb[static_cast<std::size_t>(c)] += acc;
                }
            }
        }
        std::vector<double> col(static_cast<std::size_t>(k_len) * m_len);
        if (wi->requires_grad) {
            auto& gw = wi->ensure_grad();
            for (int s = 0; s < n; ++s) {
                im2col(xi->values.data() + static_cast<std::int64_t>(s) * cin * h * w, cin, dims,
                       col.data());
                dgemm(CblasNoTrans, CblasTrans, cout, static_cast<int>(k_len),
                      static_cast<int>(m_len),
                      gout + static_cast<std::int64_t>(s) * cout * m_len, col.data(), 1.0,
                      gw.data());
            }
        }
        if (xi->requires_grad) {
            auto& gx = xi->ensure_grad();
            for (int s = 0; s < n; ++s) {
                dgemm(CblasTrans, CblasNoTrans, static_cast<int>(k_len),
                      static_cast<int>(m_len), cout, wi->values.data(),
                      gout + static_cast<std::int64_t>(s) * cout * m_len, 0.0, col.data());
                col2im_add(col.data(), cin, dims,
                           gx.data() + static_cast<std::int64_t>(s) * cin * h * w);
            }
        }
    };
    return make_op_result({n, cout, h_out, w_out}, std::move(out), std::move(parents),
                          std::move(backward_fn), "conv2d");
}

Tensor conv2d_transpose(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride, int padding) {
    if (input.rank() != 4 || weight.rank() != 4) {
        throw UsageError("conv2d_transpose expects rank-4 input and weight");
    }
    if (stride < 1 || padding < 0) {
        throw UsageError("conv2d_transpose: stride must be >= 1 and padding >= 0");
    }
    const int n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int cout = weight.dim(1), kh = weight.dim(2), kw = weight.dim(3);
    if (weight.dim(0) != cin) {
        throw ConfigError("conv2d_transpose: input has " + std::to_string(cin) +
                          " channels but weight expects " + std::to_string(weight.dim(0)));
    }
    const int h_out = (h - 1) * stride - 2 * padding + kh;
    const int w_out = (w - 1) * stride - 2 * padding + kw;
    if (h_out <= 0 || w_out <= 0) {
        throw ConfigError("conv2d_transpose: non-positive output size");
    }
    check_bias(bias, cout, "conv2d_transpose");

    // Same geometry as conv2d with the roles of the two grids swapped: the
    // op scatters weight patches from the (h,w) grid onto the (h_out,w_out)
    // grid, which is exactly col2im of W^T x.
    const ConvDims dims{kh, kw, stride, padding, h_out, w_out, h, w};
    const std::int64_t k_len = static_cast<std::int64_t>(cout) * kh * kw;
    const std::int64_t m_len = static_cast<std::int64_t>(h) * w;
    const std::int64_t out_plane = static_cast<std::int64_t>(h_out) * w_out;

    std::vector<double> out(static_cast<std::size_t>(n) * cout * out_plane, 0.0);
    std::vector<double> col(static_cast<std::size_t>(k_len) * m_len);
    const double* x = input.values().data();
    const double* wv = weight.values().data();
    for (int s = 0; s < n; ++s) {
        dgemm(CblasTrans, CblasNoTrans, static_cast<int>(k_len), static_cast<int>(m_len), cin,
              wv, x + static_cast<std::int64_t>(s) * cin * m_len, 0.0, col.data());
        col2im_add(col.data(), cout, dims,
                   out.data() + static_cast<std::int64_t>(s) * cout * out_plane);
    }
    if (bias.defined()) {
        const double* bv = bias.values().data();
        for (int s = 0; s < n; ++s) {
            for (int c = 0; c < cout; ++c) {
                double* plane = out.data() + (static_cast<std::int64_t>(s) * cout + c) * out_plane;
                for (std::int64_t i = 0; i < out_plane; ++i) {
                    plane[i] += bv[c];
                }
            }
        }
    }

    std::vector<Tensor> parents{input, weight};
    if (bias.defined()) {
        parents.push_back(bias);
    }
    auto xi = input.impl();
    auto wi = weight.impl();
    auto bi = bias.defined() ? bias.impl() : nullptr;
    auto backward_fn = [xi, wi, bi, dims, n, cin, cout, k_len, m_len,
                        out_plane](TensorImpl& self) {
        const double* gout = self.grad.data();
        if (bi && bi->requires_grad) {
            auto& gb = bi->ensure_grad();
            for (int s = 0; s < n; ++s) {
                for (int c = 0; c < cout; ++c) {
                    const double* plane =
                        gout + (static_cast<std::int64_t>(s) * cout + c) * out_plane;
                    double acc = 0.0;
                    for (std::int64_t i = 0; i < out_plane; ++i) {
                        acc += plane[i];
                    }
                    gb[static_cast<std::size_t>(c)] += acc;
                }
            }
        }
        std::vector<double> col(static_cast<std::size_t>(k_len) * m_len);
        for (int s = 0; s < n; ++s) {
            const bool need_x = xi->requires_grad;
            const bool need_w = wi->requires_grad;
            if (!need_x && !need_w) {
                break;
            }
            im2col(gout + static_cast<std::int64_t>(s) * cout * out_plane, cout, dims,
                   col.data());
            if (need_x) {
                auto& gx = xi->ensure_grad();
                dgemm(CblasNoTrans, CblasNoTrans, cin, static_cast<int>(m_len),
                      static_cast<int>(k_len), wi->values.data(), col.data(), 1.0,
                      gx.data() + static_cast<std::int64_t>(s) * cin * m_len);
            }
            if (need_w) {
                auto& gw = wi->ensure_grad();
                dgemm(CblasNoTrans, CblasTrans, cin, static_cast<int>(k_len),
                      static_cast<int>(m_len),
                      xi->values.data() + static_cast<std::int64_t>(s) * cin * m_len, col.data(),
                      1.0, gw.data());
            }
        }
    };
    return make_op_result({n, cout, h_out, w_out}, std::move(out), std::move(parents),
                          std::move(backward_fn), "conv2d_transpose");
}

Tensor maxpool2(const Tensor& input) {
    if (input.rank() != 4) {
        throw UsageError("maxpool2 expects a rank-4 tensor");
    }
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (h % 2 != 0 || w % 2 != 0) {
        throw ConfigError("maxpool2: spatial extents must be even, got " +
                          shape_to_string(input.shape()));
    }
    const int ho = h / 2, wo = w / 2;
    const auto& xv = input.values();
    std::vector<double> out(static_cast<std::size_t>(n) * c * ho * wo);
    std::vector<std::int64_t> argmax(out.size());
    std::size_t o = 0;
    for (int s = 0; s < n; ++s) {
        for (int ch = 0; ch < c; ++ch) {
            const std::int64_t base = (static_cast<std::int64_t>(s) * c + ch) * h * w;
            for (int i = 0; i < ho; ++i) {
                for (int j = 0; j < wo; ++j) {
                    // Row-major scan; strict > keeps the first maximal element.
                    const std::int64_t i00 = base + (2 * i) * w + 2 * j;
                    std::int64_t best_idx = i00;
                    double best = xv[static_cast<std::size_t>(i00)];
                    const std::int64_t candidates[3] = {i00 + 1, i00 + w, i00 + w + 1};
                    for (const std::int64_t idx : candidates) {
                        const double v = xv[static_cast<std::size_t>(idx)];
                        if (v > best) {
                            best = v;
                            best_idx = idx;
                        }
                    }
                    out[o] = best;
                    argmax[o] = best_idx;
                    ++o;
                }
            }
        }
    }
    auto xi = input.impl();
    return make_op_result(
        {n, c, ho, wo}, std::move(out), {input},
        [xi, argmax = std::move(argmax)](TensorImpl& self) {
            if (!xi->requires_grad) {
                return;
            }
            auto& gx = xi->ensure_grad();
            for (std::size_t i = 0; i < argmax.size(); ++i) {
                gx[static_cast<std::size_t>(argmax[i])] += self.grad[i];
            }
        },
        "maxpool2");
}

}  // namespace thermocast
