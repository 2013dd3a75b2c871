#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aad/layers.hpp"

namespace aad {

// Architecture hyper-parameters. The defaults give the 32-channel network:
// 32 temporal kernels (1, 64), depth multiplier 2 (64 spatial maps),
// separable kernels (1, 16) + pointwise, pools (1, 4) and (1, 8),
// hidden width 64, two classes, dropout 0.25.
struct ModelConfig {
    Eigen::Index n_channels = 32;
    double sample_rate = 500.0;
    Eigen::Index window_samples = 250;
    Eigen::Index temporal_kernels = 32;
    Eigen::Index temporal_len = 64;
    Eigen::Index depth_multiplier = 2;
    Eigen::Index sep_len = 16;
    Eigen::Index pool1 = 4;
    Eigen::Index pool2 = 8;
    Eigen::Index hidden = 64;
    Eigen::Index classes = 2;
    double dropout_p = 0.25;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;
    // Granular BN switches; the ablation variants clear them in groups.
    bool bn1 = true;
    bool bn2 = true;
    bool bn3a = true;
    bool bn3b = true;

    Eigen::Index spatial_maps() const { return temporal_kernels * depth_multiplier; }
    Eigen::Index pooled1_len() const { return window_samples / pool1; }
    Eigen::Index pooled2_len() const { return pooled1_len() / pool2; }
    Eigen::Index flatten_width() const { return spatial_maps() * pooled2_len(); }

    void validate() const;  // throws ConfigError
};

struct ModelParams {
    ModelConfig config;
    Tensor4 w_temporal;   // (K, 1, 1, L1)
    Tensor4 w_spatial;    // (K*D, 1, C, 1)
    Tensor4 w_sepdepth;   // (K*D, 1, 1, L2)
    Tensor4 w_point;      // (K*D, K*D, 1, 1)
    std::optional<BnState> bn1, bn2, bn3a, bn3b;  // absent when ablated
    Matrix w_fc1;
    Vector b_fc1;
    Matrix w_fc2;
    Vector b_fc2;
};

struct ModelGrads {
    Tensor4 w_temporal, w_spatial, w_sepdepth, w_point;
    Vector bn1_gamma, bn1_beta, bn2_gamma, bn2_beta;
    Vector bn3a_gamma, bn3a_beta, bn3b_gamma, bn3b_beta;
    Matrix w_fc1;
    Vector b_fc1;
    Matrix w_fc2;
    Vector b_fc2;
    Tensor4 d_input;
};

// Intermediates of one train-mode forward pass; everything the backward pass
// needs plus the named feature tensors (fused/target stages).
struct ForwardCache {
    Tensor4 x;
    RowMajorMatrix conv1_patches;  // unrolled input reused by the backward pass
    Tensor4 f;        // temporal block output
    BnCache bn1c;
    Tensor4 f1;       // spatial block pre-activation
    BnCache bn2c;
    Tensor4 f_f2;     // pooled spatial features
    ArrayX mask2;
    Tensor4 f_fused;  // dropout output feeding the hybrid block
    BnCache bn3ac;
    Tensor4 f3;       // hybrid depthwise pre-activation
    Tensor4 f_1;      // ELU(f3)
    BnCache bn3bc;
    Tensor4 f4;       // hybrid pointwise pre-activation
    Tensor4 f_2;      // ELU(f4)
    ArrayX mask4;
    Tensor4 f_target;
    Matrix flat;
    Matrix hidden;    // 64-dimensional markers
    Mode mode = Mode::Infer;
};

// Flat view of one trainable array; `decay` marks arrays eligible for weight
// decay (conv/linear weights; biases and BN affine pairs are excluded).
struct ParamRef {
    std::uint16_t id;
    const char* name;
    double* data;
    Eigen::Index size;
    bool decay;
};

ModelParams init_model(const ModelConfig& config, Rng& rng);

Matrix forward(ModelParams& params, const Tensor4& x, Mode mode, Rng& rng,
               ForwardCache* cache = nullptr);

// need_input_grad=false leaves ModelGrads::d_input empty (training does not
// use it; gradient checks do).
ModelGrads backward(const ModelParams& params, const ForwardCache& cache, const Matrix& d_logits,
                    bool need_input_grad = true);

// Argmax prediction; ties resolve to the positive class. An explicit
// threshold classifies positive iff P(class 1) >= threshold.
std::vector<int> predict(ModelParams& params, const Tensor4& x);
std::vector<int> predict(ModelParams& params, const Tensor4& x, double threshold);

// Positive-class probabilities (used for ROC sweeps).
Vector predict_scores(ModelParams& params, const Tensor4& x);

enum class AblationVariant { M1, M2, M3 };
AblationVariant parse_ablation(const std::string& name);  // "m1" | "m2" | "m3"
ModelConfig ablation_config(const ModelConfig& base, AblationVariant variant);

// Enumerates every trainable array in a fixed order (grads must come from a
// ModelGrads produced against the same params).
std::vector<ParamRef> param_refs(ModelParams& params);
std::vector<ParamRef> grad_refs(ModelGrads& grads, const ModelParams& params);

Eigen::Index param_count(const ModelParams& params);
Eigen::Index param_count_closed_form(const ModelConfig& config);

}  // namespace aad
