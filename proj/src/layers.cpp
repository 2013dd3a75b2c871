#include "aad/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace aad {

namespace {

inline Eigen::Index pad_left(Eigen::Index l) { return (l - 1) / 2; }

// Fills one im2col row: dest[t] = src[t + shift] for valid t, zero outside.
inline void copy_shifted(double* dest, const double* src, Eigen::Index t_len, Eigen::Index shift) {
    Eigen::Index lo = std::clamp<Eigen::Index>(-shift, 0, t_len);
    Eigen::Index hi = std::clamp<Eigen::Index>(t_len - shift, lo, t_len);
    if (lo > 0) std::memset(dest, 0, sizeof(double) * static_cast<std::size_t>(lo));
    if (hi > lo)
        std::memcpy(dest + lo, src + lo + shift, sizeof(double) * static_cast<std::size_t>(hi - lo));
    if (hi < t_len)
        std::memset(dest + hi, 0, sizeof(double) * static_cast<std::size_t>(t_len - hi));
}

}  // namespace

namespace {

// rows: kin*len taps; cols: item-major (B blocks of C*T positions)
void build_patches(const Tensor4& x, Eigen::Index len, RowMajorMatrix& patches) {
    const Eigen::Index pl = pad_left(len);
    const Eigen::Index ct = x.c * x.t;
    patches.resize(x.k * len, x.b * ct);
    for (Eigen::Index bi = 0; bi < x.b; ++bi)
        for (Eigen::Index ki = 0; ki < x.k; ++ki)
            for (Eigen::Index l = 0; l < len; ++l) {
                double* row = patches.data() + (ki * len + l) * (x.b * ct) + bi * ct;
                for (Eigen::Index ci = 0; ci < x.c; ++ci)
                    copy_shifted(row + ci * x.t, x.data.data() + x.index(bi, ki, ci, 0), x.t,
                                 l - pl);
            }
}

}  // namespace

Tensor4 conv_temporal(const Tensor4& x, const Tensor4& kernels, RowMajorMatrix* patches_out) {
    const Eigen::Index kin = kernels.k, kout = kernels.b, len = kernels.t;
    if (kernels.c != 1) throw ShapeError("conv_temporal: kernel channel extent must be 1");
    if (x.k != kin)
        throw ShapeError("conv_temporal: input has " + std::to_string(x.k) + " maps, kernels expect " +
                         std::to_string(kin));
    const Eigen::Index ct = x.c * x.t;

    RowMajorMatrix local;
    RowMajorMatrix& patches = patches_out ? *patches_out : local;
    build_patches(x, len, patches);

    Tensor4 y = Tensor4::uninit(x.b, kout, x.c, x.t);
    ConstMatrixMap w(kernels.data.data(), kout, kin * len);
    for (Eigen::Index bi = 0; bi < x.b; ++bi) {
        MatrixMap out(y.data.data() + y.index(bi, 0, 0, 0), kout, ct);
        out.noalias() = w * patches.middleCols(bi * ct, ct);
    }
    return y;
}

ConvGrad conv_temporal_backward(const Tensor4& x, const Tensor4& kernels, const Tensor4& d_out,
                                bool need_input_grad, const RowMajorMatrix* patches) {
    const Eigen::Index kin = kernels.k, kout = kernels.b, len = kernels.t;
    require_dims(d_out, x.b, kout, x.c, x.t, "conv_temporal_backward: d_out");
    const Eigen::Index pl = pad_left(len);
    const Eigen::Index ct = x.c * x.t;

    RowMajorMatrix local;
    if (!patches || patches->rows() != kin * len || patches->cols() != x.b * ct) {
        build_patches(x, len, local);
        patches = &local;
    }

    ConvGrad g{need_input_grad ? Tensor4(x.b, x.k, x.c, x.t) : Tensor4(),
               Tensor4(kout, kin, 1, len)};
    ConstMatrixMap w(kernels.data.data(), kout, kin * len);
    MatrixMap dw(g.d_kernels.data.data(), kout, kin * len);
    RowMajorMatrix dxcol;
    if (need_input_grad) dxcol.resize(kin * len, ct);
    for (Eigen::Index bi = 0; bi < x.b; ++bi) {
        ConstMatrixMap dy(d_out.data.data() + d_out.index(bi, 0, 0, 0), kout, ct);
        dw.noalias() += dy * patches->middleCols(bi * ct, ct).transpose();
        if (!need_input_grad) continue;
        dxcol.noalias() = w.transpose() * dy;
        // col2im: scatter-add shifted rows back onto the input gradient
        for (Eigen::Index ki = 0; ki < kin; ++ki)
            for (Eigen::Index l = 0; l < len; ++l) {
                const double* row = dxcol.data() + (ki * len + l) * ct;
                const Eigen::Index shift = l - pl;
                const Eigen::Index lo = std::max<Eigen::Index>(0, -shift);
                const Eigen::Index hi = std::min<Eigen::Index>(x.t, x.t - shift);
                for (Eigen::Index ci = 0; ci < x.c; ++ci) {
                    double* dst = g.d_input.data.data() + g.d_input.index(bi, ki, ci, 0);
                    for (Eigen::Index ti = lo; ti < hi; ++ti) dst[ti + shift] += row[ci * x.t + ti];
                }
            }
    }
    return g;
}

Tensor4 conv_depthwise_spatial(const Tensor4& x, const Tensor4& kernels) {
    const Eigen::Index maps = kernels.b;
    if (kernels.c != x.c)
        throw ShapeError("conv_depthwise_spatial: kernel channel extent " + std::to_string(kernels.c) +
                         " != input channels " + std::to_string(x.c));
    if (kernels.k != 1 || kernels.t != 1)
        throw ShapeError("conv_depthwise_spatial: kernels must be (K_in*D, 1, C, 1)");
    if (maps % x.k != 0)
        throw ShapeError("conv_depthwise_spatial: map count not a multiple of input maps");
    const Eigen::Index depth = maps / x.k;

    Tensor4 y = Tensor4::uninit(x.b, maps, 1, x.t);
    ConstMatrixMap w(kernels.data.data(), maps, x.c);
    for (Eigen::Index bi = 0; bi < x.b; ++bi)
        for (Eigen::Index ki = 0; ki < x.k; ++ki) {
            MatrixMap out(y.data.data() + y.index(bi, ki * depth, 0, 0), depth, x.t);
            out.noalias() = w.middleRows(ki * depth, depth) * x.plane(bi, ki);
        }
    return y;
}

ConvGrad conv_depthwise_spatial_backward(const Tensor4& x, const Tensor4& kernels,
                                         const Tensor4& d_out) {
    const Eigen::Index maps = kernels.b;
    const Eigen::Index depth = maps / x.k;
    require_dims(d_out, x.b, maps, 1, x.t, "conv_depthwise_spatial_backward: d_out");

    ConvGrad g{Tensor4::uninit(x.b, x.k, x.c, x.t), Tensor4(maps, 1, x.c, 1)};
    ConstMatrixMap w(kernels.data.data(), maps, x.c);
    MatrixMap dw(g.d_kernels.data.data(), maps, x.c);
    // one GEMM pair per input map over the whole batch (tiny per-item GEMMs
    // are call-overhead bound); scratch stacks the batch along columns
    RowMajorMatrix dy_k(depth, x.b * x.t);
    RowMajorMatrix x_k(x.c, x.b * x.t);
    RowMajorMatrix dx_k(x.c, x.b * x.t);
    for (Eigen::Index ki = 0; ki < x.k; ++ki) {
        for (Eigen::Index bi = 0; bi < x.b; ++bi) {
            for (Eigen::Index d = 0; d < depth; ++d)
                std::memcpy(dy_k.data() + d * (x.b * x.t) + bi * x.t,
                            d_out.data.data() + d_out.index(bi, ki * depth + d, 0, 0),
                            sizeof(double) * static_cast<std::size_t>(x.t));
            for (Eigen::Index ci = 0; ci < x.c; ++ci)
                std::memcpy(x_k.data() + ci * (x.b * x.t) + bi * x.t,
                            x.data.data() + x.index(bi, ki, ci, 0),
                            sizeof(double) * static_cast<std::size_t>(x.t));
        }
        dw.middleRows(ki * depth, depth).noalias() = dy_k * x_k.transpose();
        dx_k.noalias() = w.middleRows(ki * depth, depth).transpose() * dy_k;
        for (Eigen::Index bi = 0; bi < x.b; ++bi)
            for (Eigen::Index ci = 0; ci < x.c; ++ci)
                std::memcpy(g.d_input.data.data() + g.d_input.index(bi, ki, ci, 0),
                            dx_k.data() + ci * (x.b * x.t) + bi * x.t,
                            sizeof(double) * static_cast<std::size_t>(x.t));
    }
    return g;
}

Tensor4 conv_depthwise_time(const Tensor4& x, const Tensor4& kernels) {
    if (x.c != 1) throw ShapeError("conv_depthwise_time: input channel axis must be 1");
    if (kernels.b != x.k || kernels.k != 1 || kernels.c != 1)
        throw ShapeError("conv_depthwise_time: kernels must be (K, 1, 1, L) with K = input maps");
    const Eigen::Index len = kernels.t;
    const Eigen::Index pl = pad_left(len);

    Tensor4 y(x.b, x.k, 1, x.t);
    for (Eigen::Index bi = 0; bi < x.b; ++bi)
        for (Eigen::Index ki = 0; ki < x.k; ++ki) {
            const double* src = x.data.data() + x.index(bi, ki, 0, 0);
            double* dst = y.data.data() + y.index(bi, ki, 0, 0);
            for (Eigen::Index l = 0; l < len; ++l) {
                const double wv = kernels.at(ki, 0, 0, l);
                const Eigen::Index shift = l - pl;
                const Eigen::Index lo = std::max<Eigen::Index>(0, -shift);
                const Eigen::Index hi = std::min<Eigen::Index>(x.t, x.t - shift);
                for (Eigen::Index ti = lo; ti < hi; ++ti) dst[ti] += wv * src[ti + shift];
            }
        }
    return y;
}

ConvGrad conv_depthwise_time_backward(const Tensor4& x, const Tensor4& kernels,
                                      const Tensor4& d_out) {
    const Eigen::Index len = kernels.t;
    const Eigen::Index pl = pad_left(len);
    require_dims(d_out, x.b, x.k, 1, x.t, "conv_depthwise_time_backward: d_out");

    ConvGrad g{Tensor4(x.b, x.k, 1, x.t), Tensor4(x.k, 1, 1, len)};
    for (Eigen::Index bi = 0; bi < x.b; ++bi)
        for (Eigen::Index ki = 0; ki < x.k; ++ki) {
            const double* src = x.data.data() + x.index(bi, ki, 0, 0);
            const double* dy = d_out.data.data() + d_out.index(bi, ki, 0, 0);
            double* dx = g.d_input.data.data() + g.d_input.index(bi, ki, 0, 0);
            for (Eigen::Index l = 0; l < len; ++l) {
                const double wv = kernels.at(ki, 0, 0, l);
                const Eigen::Index shift = l - pl;
                const Eigen::Index lo = std::max<Eigen::Index>(0, -shift);
                const Eigen::Index hi = std::min<Eigen::Index>(x.t, x.t - shift);
                double acc = 0.0;
                for (Eigen::Index ti = lo; ti < hi; ++ti) {
                    acc += dy[ti] * src[ti + shift];
                    dx[ti + shift] += wv * dy[ti];
                }
                g.d_kernels.at(ki, 0, 0, l) += acc;
            }
        }
    return g;
}

Tensor4 conv_pointwise(const Tensor4& x, const Tensor4& kernels) {
    if (x.c != 1) throw ShapeError("conv_pointwise: input channel axis must be 1");
    if (kernels.k != x.k || kernels.c != 1 || kernels.t != 1)
        throw ShapeError("conv_pointwise: kernels must be (K_out, K, 1, 1) with K = input maps");
    const Eigen::Index kout = kernels.b;

    Tensor4 y = Tensor4::uninit(x.b, kout, 1, x.t);
    ConstMatrixMap p(kernels.data.data(), kout, x.k);
    for (Eigen::Index bi = 0; bi < x.b; ++bi) {
        ConstMatrixMap in(x.data.data() + x.index(bi, 0, 0, 0), x.k, x.t);
        MatrixMap out(y.data.data() + y.index(bi, 0, 0, 0), kout, x.t);
        out.noalias() = p * in;
    }
    return y;
}

ConvGrad conv_pointwise_backward(const Tensor4& x, const Tensor4& kernels, const Tensor4& d_out) {
    const Eigen::Index kout = kernels.b;
    require_dims(d_out, x.b, kout, 1, x.t, "conv_pointwise_backward: d_out");

    ConvGrad g{Tensor4(x.b, x.k, 1, x.t), Tensor4(kout, x.k, 1, 1)};
    ConstMatrixMap p(kernels.data.data(), kout, x.k);
    MatrixMap dp(g.d_kernels.data.data(), kout, x.k);
    for (Eigen::Index bi = 0; bi < x.b; ++bi) {
        ConstMatrixMap in(x.data.data() + x.index(bi, 0, 0, 0), x.k, x.t);
        ConstMatrixMap dy(d_out.data.data() + d_out.index(bi, 0, 0, 0), kout, x.t);
        dp.noalias() += dy * in.transpose();
        MatrixMap dx(g.d_input.data.data() + g.d_input.index(bi, 0, 0, 0), x.k, x.t);
        dx.noalias() = p.transpose() * dy;
    }
    return g;
}

std::pair<Tensor4, Tensor4> conv_separable_time(const Tensor4& x, const Tensor4& depth_kernels,
                                                const Tensor4& point_kernels) {
    Tensor4 d = conv_depthwise_time(x, depth_kernels);
    Tensor4 p = conv_pointwise(d, point_kernels);
    return {std::move(d), std::move(p)};
}

BnState BnState::identity_init(Eigen::Index maps, double momentum, double eps) {
    BnState s;
    s.gamma = Vector::Ones(maps);
    s.beta = Vector::Zero(maps);
    s.running_mean = Vector::Zero(maps);
    s.running_var = Vector::Ones(maps);
    s.momentum = momentum;
    s.eps = eps;
    return s;
}

Tensor4 batchnorm(const Tensor4& x, BnState& state, Mode mode, BnCache* cache) {
    const Eigen::Index maps = x.k;
    if (state.gamma.size() != maps)
        throw ShapeError("batchnorm: state covers " + std::to_string(state.gamma.size()) +
                         " maps, input has " + std::to_string(maps));
    const Eigen::Index n = x.b * x.c * x.t;
    Tensor4 y = Tensor4::uninit(x.b, maps, x.c, x.t);

    if (mode == Mode::Train) {
        if (n < 2) throw StateError("batchnorm: degenerate batch, need at least 2 elements per map");
        const Eigen::Index plane = x.c * x.t;
        Vector mean(maps), var(maps);
        for (Eigen::Index ki = 0; ki < maps; ++ki) {
            double s = 0.0, sq = 0.0;
            for (Eigen::Index bi = 0; bi < x.b; ++bi) {
                const double* v = x.data.data() + x.index(bi, ki, 0, 0);
                double ps0 = 0.0, ps1 = 0.0, pq0 = 0.0, pq1 = 0.0;
                Eigen::Index i = 0;
                for (; i + 1 < plane; i += 2) {  // single fused pass
                    ps0 += v[i];
                    pq0 += v[i] * v[i];
                    ps1 += v[i + 1];
                    pq1 += v[i + 1] * v[i + 1];
                }
                if (i < plane) {
                    ps0 += v[i];
                    pq0 += v[i] * v[i];
                }
                s += ps0 + ps1;
                sq += pq0 + pq1;
            }
            mean[ki] = s / static_cast<double>(n);
            var[ki] = sq / static_cast<double>(n) - mean[ki] * mean[ki];
            if (var[ki] < 0.0) var[ki] = 0.0;  // cancellation guard
        }
        Vector inv_std = (var.array() + state.eps).rsqrt();
        if (cache) {
            cache->xhat = Tensor4::uninit(x.b, maps, x.c, x.t);
            cache->inv_std = inv_std;
            cache->batch_mean = mean;
            cache->batch_var = var;
        }
        for (Eigen::Index bi = 0; bi < x.b; ++bi)
            for (Eigen::Index ki = 0; ki < maps; ++ki) {
                const Eigen::Index at = x.index(bi, ki, 0, 0);
                auto xin = x.data.segment(at, plane);
                if (cache) {
                    auto xh = cache->xhat.data.segment(at, plane);
                    xh = (xin - mean[ki]) * inv_std[ki];
                    y.data.segment(at, plane) = xh * state.gamma[ki] + state.beta[ki];
                } else {
                    y.data.segment(at, plane) =
                        (xin - mean[ki]) * (inv_std[ki] * state.gamma[ki]) + state.beta[ki];
                }
            }
        state.running_mean = (1.0 - state.momentum) * state.running_mean + state.momentum * mean;
        state.running_var = (1.0 - state.momentum) * state.running_var + state.momentum * var;
    } else {
        Vector inv_std = (state.running_var.array() + state.eps).rsqrt();
        const Eigen::Index plane = x.c * x.t;
        for (Eigen::Index bi = 0; bi < x.b; ++bi)
            for (Eigen::Index ki = 0; ki < maps; ++ki) {
                const Eigen::Index at = x.index(bi, ki, 0, 0);
                y.data.segment(at, plane) =
                    (x.data.segment(at, plane) - state.running_mean[ki]) *
                        (inv_std[ki] * state.gamma[ki]) +
                    state.beta[ki];
            }
    }
    return y;
}

BnGrad batchnorm_backward(const BnCache& cache, const BnState& state, const Tensor4& d_out) {
    const Tensor4& xhat = cache.xhat;
    require_dims(d_out, xhat.b, xhat.k, xhat.c, xhat.t, "batchnorm_backward: d_out");
    const Eigen::Index maps = xhat.k;
    const double n = static_cast<double>(xhat.b * xhat.c * xhat.t);

    BnGrad g{Tensor4::uninit(xhat.b, maps, xhat.c, xhat.t), Vector::Zero(maps), Vector::Zero(maps)};
    const Eigen::Index plane = xhat.c * xhat.t;
    for (Eigen::Index ki = 0; ki < maps; ++ki) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (Eigen::Index bi = 0; bi < xhat.b; ++bi) {
            const Eigen::Index at = xhat.index(bi, ki, 0, 0);
            auto dy = d_out.data.segment(at, plane);
            auto xh = xhat.data.segment(at, plane);
            sum_dy += dy.sum();
            sum_dy_xhat += (dy * xh).sum();
        }
        g.d_gamma[ki] = sum_dy_xhat;
        g.d_beta[ki] = sum_dy;
        const double scale = state.gamma[ki] * cache.inv_std[ki];
        const double mean_dy = sum_dy / n;
        const double mean_dy_xhat = sum_dy_xhat / n;
        for (Eigen::Index bi = 0; bi < xhat.b; ++bi) {
            const Eigen::Index at = xhat.index(bi, ki, 0, 0);
            g.d_input.data.segment(at, plane) =
                scale * (d_out.data.segment(at, plane) - mean_dy -
                         xhat.data.segment(at, plane) * mean_dy_xhat);
        }
    }
    return g;
}

Tensor4 elu(const Tensor4& x) {
    Tensor4 y = Tensor4::uninit(x.b, x.k, x.c, x.t);
    const double* in = x.data.data();
    double* out = y.data.data();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out[i] = in[i] >= 0.0 ? in[i] : std::expm1(in[i]);
    return y;
}

Tensor4 elu_backward(const Tensor4& x, const Tensor4& d_out) {
    if (!x.same_dims(d_out)) throw ShapeError("elu_backward: dims mismatch");
    Tensor4 g = Tensor4::uninit(x.b, x.k, x.c, x.t);
    const double* in = x.data.data();
    const double* dy = d_out.data.data();
    double* out = g.data.data();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out[i] = in[i] >= 0.0 ? dy[i] : dy[i] * std::exp(in[i]);
    return g;
}

Tensor4 avgpool_time(const Tensor4& x, Eigen::Index width) {
    if (width < 1) throw ParamError("avgpool_time: width must be >= 1");
    const Eigen::Index t_out = x.t / width;
    if (t_out == 0)
        throw ParamError("avgpool_time: window too short, " + std::to_string(x.t) + " < width " +
                         std::to_string(width));
    Tensor4 y = Tensor4::uninit(x.b, x.k, x.c, t_out);
    const double inv = 1.0 / static_cast<double>(width);
    for (Eigen::Index bi = 0; bi < x.b; ++bi)
        for (Eigen::Index ki = 0; ki < x.k; ++ki)
            for (Eigen::Index ci = 0; ci < x.c; ++ci) {
                const double* src = x.data.data() + x.index(bi, ki, ci, 0);
                double* dst = y.data.data() + y.index(bi, ki, ci, 0);
                for (Eigen::Index to = 0; to < t_out; ++to) {
                    double s = 0.0;
                    for (Eigen::Index i = 0; i < width; ++i) s += src[to * width + i];
                    dst[to] = s * inv;
                }
            }
    return y;
}

Tensor4 avgpool_time_backward(const Tensor4& d_out, Eigen::Index input_t, Eigen::Index width) {
    Tensor4 g(d_out.b, d_out.k, d_out.c, input_t);
    const double inv = 1.0 / static_cast<double>(width);
    for (Eigen::Index bi = 0; bi < d_out.b; ++bi)
        for (Eigen::Index ki = 0; ki < d_out.k; ++ki)
            for (Eigen::Index ci = 0; ci < d_out.c; ++ci) {
                const double* dy = d_out.data.data() + d_out.index(bi, ki, ci, 0);
                double* dst = g.data.data() + g.index(bi, ki, ci, 0);
                for (Eigen::Index to = 0; to < d_out.t; ++to) {
                    const double v = dy[to] * inv;
                    for (Eigen::Index i = 0; i < width; ++i) dst[to * width + i] = v;
                }
            }
    return g;
}

Tensor4 dropout(const Tensor4& x, double p, Mode mode, Rng& rng, ArrayX* mask) {
    if (p < 0.0 || p >= 1.0) throw ParamError("dropout: p must be in [0, 1)");
    if (mode == Mode::Infer) {
        if (mask) *mask = ArrayX();
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - p);
    ArrayX m(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        m[i] = (rng.uniform01() >= p) ? keep_scale : 0.0;
    Tensor4 y = Tensor4::uninit(x.b, x.k, x.c, x.t);
    y.data = x.data * m;
    if (mask) *mask = std::move(m);
    return y;
}

Tensor4 dropout_backward(const Tensor4& d_out, const ArrayX& mask) {
    if (mask.size() == 0) return d_out;  // infer-mode identity
    if (mask.size() != d_out.size()) throw ShapeError("dropout_backward: mask size mismatch");
    Tensor4 g = Tensor4::uninit(d_out.b, d_out.k, d_out.c, d_out.t);
    g.data = d_out.data * mask;
    return g;
}

Matrix linear(const Matrix& x, const Matrix& weight, const Vector& bias) {
    if (x.cols() != weight.cols())
        throw ShapeError("linear: input width " + std::to_string(x.cols()) + " != weight columns " +
                         std::to_string(weight.cols()));
    Matrix y = x * weight.transpose();
    y.rowwise() += bias.transpose();
    return y;
}

LinearGrad linear_backward(const Matrix& x, const Matrix& weight, const Matrix& d_out) {
    if (d_out.rows() != x.rows() || d_out.cols() != weight.rows())
        throw ShapeError("linear_backward: d_out dims mismatch");
    LinearGrad g;
    g.d_weight.noalias() = d_out.transpose() * x;
    g.d_bias = d_out.colwise().sum().transpose();
    g.d_input.noalias() = d_out * weight;
    return g;
}

SoftmaxXent softmax_xent(const Matrix& logits, const std::vector<int>& labels) {
    if (logits.cols() != 2) throw ShapeError("softmax_xent: exactly 2 classes expected");
    const Eigen::Index batch = logits.rows();
    if (static_cast<Eigen::Index>(labels.size()) != batch)
        throw ShapeError("softmax_xent: label count mismatch");

    SoftmaxXent r;
    r.probs.resize(batch, 2);
    r.d_logits.resize(batch, 2);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < batch; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y != 0 && y != 1)
            throw ParamError("softmax_xent: label out of range: " + std::to_string(y));
        const double m = std::max(logits(i, 0), logits(i, 1));
        const double e0 = std::exp(logits(i, 0) - m);
        const double e1 = std::exp(logits(i, 1) - m);
        const double z = e0 + e1;
        r.probs(i, 0) = e0 / z;
        r.probs(i, 1) = e1 / z;
        loss -= logits(i, y) - m - std::log(z);
        r.d_logits(i, 0) = r.probs(i, 0) - (y == 0 ? 1.0 : 0.0);
        r.d_logits(i, 1) = r.probs(i, 1) - (y == 1 ? 1.0 : 0.0);
    }
    r.loss = loss / static_cast<double>(batch);
    r.d_logits /= static_cast<double>(batch);
    return r;
}

}  // namespace aad
