#pragma once

#include <Eigen/Dense>
#include <utility>

#include "aad/rng.hpp"
#include "aad/tensor.hpp"

namespace aad {

enum class Mode { Train, Infer };

struct ConvGrad {
    Tensor4 d_input;
    Tensor4 d_kernels;
};

// Temporal convolution ("same" zero padding along time, cross-correlation,
// no bias). x: (B, K_in, C, T), kernels: (K_out, K_in, 1, L) -> (B, K_out, C, T).
// The unrolled input patch matrix (rows: K_in*L taps, cols: B*C*T positions)
// can be captured on the forward pass and fed back to the backward pass,
// which otherwise rebuilds it. need_input_grad=false skips d_input (the
// first layer of a network does not propagate further).
Tensor4 conv_temporal(const Tensor4& x, const Tensor4& kernels,
                      RowMajorMatrix* patches_out = nullptr);
ConvGrad conv_temporal_backward(const Tensor4& x, const Tensor4& kernels, const Tensor4& d_out,
                                bool need_input_grad = true,
                                const RowMajorMatrix* patches = nullptr);

// Depthwise spatial convolution collapsing the channel axis.
// x: (B, K_in, C, T), kernels: (K_in*D, 1, C, 1) -> (B, K_in*D, 1, T);
// output map k*D+d depends only on input map k.
Tensor4 conv_depthwise_spatial(const Tensor4& x, const Tensor4& kernels);
ConvGrad conv_depthwise_spatial_backward(const Tensor4& x, const Tensor4& kernels,
                                         const Tensor4& d_out);

// Per-map temporal convolution (depthwise stage of the separable block).
// x: (B, K, 1, T), kernels: (K, 1, 1, L) -> (B, K, 1, T).
Tensor4 conv_depthwise_time(const Tensor4& x, const Tensor4& kernels);
ConvGrad conv_depthwise_time_backward(const Tensor4& x, const Tensor4& kernels,
                                      const Tensor4& d_out);

// 1x1 map-mixing convolution. x: (B, K, 1, T), kernels: (K_out, K, 1, 1).
Tensor4 conv_pointwise(const Tensor4& x, const Tensor4& kernels);
ConvGrad conv_pointwise_backward(const Tensor4& x, const Tensor4& kernels, const Tensor4& d_out);

// Depthwise separable convolution: depthwise stage then pointwise stage.
// Returns (depthwise output, pointwise output).
std::pair<Tensor4, Tensor4> conv_separable_time(const Tensor4& x, const Tensor4& depth_kernels,
                                                const Tensor4& point_kernels);

// Batch normalization along the map dimension.
struct BnState {
    Vector gamma;
    Vector beta;
    Vector running_mean;
    Vector running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    static BnState identity_init(Eigen::Index maps, double momentum = 0.1, double eps = 1e-5);
};

struct BnCache {
    Tensor4 xhat;     // normalized pre-affine values
    Vector inv_std;   // per-map 1/sqrt(var + eps)
    Vector batch_mean;
    Vector batch_var;  // biased
};

struct BnGrad {
    Tensor4 d_input;
    Vector d_gamma;
    Vector d_beta;
};

// Train mode normalizes with batch statistics (biased variance), applies the
// affine pair and updates running statistics in `state`. Infer mode uses the
// running statistics and leaves state untouched.
Tensor4 batchnorm(const Tensor4& x, BnState& state, Mode mode, BnCache* cache = nullptr);
BnGrad batchnorm_backward(const BnCache& cache, const BnState& state, const Tensor4& d_out);

// ELU, alpha = 1.
Tensor4 elu(const Tensor4& x);
Tensor4 elu_backward(const Tensor4& x, const Tensor4& d_out);

// Non-overlapping temporal average pooling; trailing remainder is dropped.
Tensor4 avgpool_time(const Tensor4& x, Eigen::Index width);
Tensor4 avgpool_time_backward(const Tensor4& d_out, Eigen::Index input_t, Eigen::Index width);

// Inverted dropout. The returned mask holds the applied factors
// (0 or 1/(1-p)) and is reused by the backward pass; infer mode is identity.
Tensor4 dropout(const Tensor4& x, double p, Mode mode, Rng& rng, ArrayX* mask = nullptr);
Tensor4 dropout_backward(const Tensor4& d_out, const ArrayX& mask);

// Fully connected layer on flattened rows: y = x * W^T + b.
struct LinearGrad {
    Matrix d_input;
    Matrix d_weight;
    Vector d_bias;
};
Matrix linear(const Matrix& x, const Matrix& weight, const Vector& bias);
LinearGrad linear_backward(const Matrix& x, const Matrix& weight, const Matrix& d_out);

// Two-class softmax cross-entropy (max-subtraction stabilized).
struct SoftmaxXent {
    double loss = 0.0;
    Matrix probs;     // (B, 2), rows sum to 1
    Matrix d_logits;  // (probs - onehot) / B
};
SoftmaxXent softmax_xent(const Matrix& logits, const std::vector<int>& labels);

}  // namespace aad
