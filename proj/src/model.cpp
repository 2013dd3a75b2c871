#include "aad/model.hpp"

#include <cmath>

namespace aad {

void ModelConfig::validate() const {
    if (n_channels < 1 || window_samples < 1 || temporal_kernels < 1 || temporal_len < 1 ||
        depth_multiplier < 1 || sep_len < 1 || pool1 < 1 || pool2 < 1 || hidden < 1)
        throw ConfigError("model config: all sizes must be positive");
    if (classes != 2) throw ConfigError("model config: exactly 2 classes supported");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw ConfigError("model config: dropout_p in [0,1)");
    if (pooled2_len() < 1)
        throw ConfigError("model config: window of " + std::to_string(window_samples) +
                          " samples collapses to zero length after pooling");
    if (bn_momentum <= 0.0 || bn_momentum >= 1.0) throw ConfigError("model config: bn_momentum in (0,1)");
    if (bn_eps <= 0.0) throw ConfigError("model config: bn_eps must be positive");
}

namespace {

void glorot_fill(Tensor4& w, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data[i] = rng.uniform(-a, a);
}

void glorot_fill(Matrix& w, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j)  // fixed draw order: column-major
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-a, a);
}

}  // namespace

ModelParams init_model(const ModelConfig& config, Rng& rng) {
    config.validate();
    const Eigen::Index k = config.temporal_kernels;
    const Eigen::Index kd = config.spatial_maps();
    const Eigen::Index c = config.n_channels;

    ModelParams p;
    p.config = config;
    p.w_temporal = Tensor4(k, 1, 1, config.temporal_len);
    glorot_fill(p.w_temporal, config.temporal_len, k * config.temporal_len, rng);
    p.w_spatial = Tensor4(kd, 1, c, 1);
    glorot_fill(p.w_spatial, c, kd * c, rng);
    p.w_sepdepth = Tensor4(kd, 1, 1, config.sep_len);
    glorot_fill(p.w_sepdepth, config.sep_len, kd * config.sep_len, rng);
    p.w_point = Tensor4(kd, kd, 1, 1);
    glorot_fill(p.w_point, kd, kd, rng);
    if (config.bn1) p.bn1 = BnState::identity_init(k, config.bn_momentum, config.bn_eps);
    if (config.bn2) p.bn2 = BnState::identity_init(kd, config.bn_momentum, config.bn_eps);
    if (config.bn3a) p.bn3a = BnState::identity_init(kd, config.bn_momentum, config.bn_eps);
    if (config.bn3b) p.bn3b = BnState::identity_init(kd, config.bn_momentum, config.bn_eps);
    p.w_fc1.resize(config.hidden, config.flatten_width());
    glorot_fill(p.w_fc1, rng);
    p.b_fc1 = Vector::Zero(config.hidden);
    p.w_fc2.resize(config.classes, config.hidden);
    glorot_fill(p.w_fc2, rng);
    p.b_fc2 = Vector::Zero(config.classes);
    return p;
}

Matrix forward(ModelParams& params, const Tensor4& x, Mode mode, Rng& rng, ForwardCache* cache) {
    const ModelConfig& cfg = params.config;
    require_dims(x, x.b, 1, cfg.n_channels, cfg.window_samples, "forward: input");
    const bool keep = cache != nullptr;
    if (keep) {
        *cache = ForwardCache{};
        cache->mode = mode;
        cache->x = x;
    }

    Tensor4 t1 = conv_temporal(x, params.w_temporal, keep ? &cache->conv1_patches : nullptr);
    Tensor4 f = params.bn1 ? batchnorm(t1, *params.bn1, mode, keep ? &cache->bn1c : nullptr)
                           : std::move(t1);
    Tensor4 t2 = conv_depthwise_spatial(f, params.w_spatial);
    if (keep) cache->f = std::move(f);
    Tensor4 f1 = params.bn2 ? batchnorm(t2, *params.bn2, mode, keep ? &cache->bn2c : nullptr)
                            : std::move(t2);
    Tensor4 e2 = elu(f1);
    if (keep) cache->f1 = std::move(f1);
    Tensor4 p2 = avgpool_time(e2, cfg.pool1);
    ArrayX mask2;
    Tensor4 fused = dropout(p2, cfg.dropout_p, mode, rng, keep ? &cache->mask2 : &mask2);
    if (keep) cache->f_f2 = std::move(p2);

    Tensor4 t3 = conv_depthwise_time(fused, params.w_sepdepth);
    if (keep) cache->f_fused = std::move(fused);
    Tensor4 f3 = params.bn3a ? batchnorm(t3, *params.bn3a, mode, keep ? &cache->bn3ac : nullptr)
                             : std::move(t3);
    Tensor4 e3 = elu(f3);
    if (keep) cache->f3 = std::move(f3);
    Tensor4 t4 = conv_pointwise(e3, params.w_point);
    if (keep) cache->f_1 = std::move(e3);
    Tensor4 f4 = params.bn3b ? batchnorm(t4, *params.bn3b, mode, keep ? &cache->bn3bc : nullptr)
                             : std::move(t4);
    Tensor4 e4 = elu(f4);
    if (keep) cache->f4 = std::move(f4);
    Tensor4 p4 = avgpool_time(e4, cfg.pool2);
    if (keep) cache->f_2 = std::move(e4);
    ArrayX mask4;
    Tensor4 target = dropout(p4, cfg.dropout_p, mode, rng, keep ? &cache->mask4 : &mask4);

    // flatten: each batch block (K*D x pooled2_len) row-major becomes one row
    const Eigen::Index fw = cfg.flatten_width();
    Matrix flat(target.b, fw);
    for (Eigen::Index bi = 0; bi < target.b; ++bi)
        for (Eigen::Index i = 0; i < fw; ++i) flat(bi, i) = target.data[bi * fw + i];
    if (keep) cache->f_target = std::move(target);

    Matrix h = linear(flat, params.w_fc1, params.b_fc1);
    Matrix logits = linear(h, params.w_fc2, params.b_fc2);
    if (keep) {
        cache->flat = std::move(flat);
        cache->hidden = std::move(h);
    }
    return logits;
}

ModelGrads backward(const ModelParams& params, const ForwardCache& cache, const Matrix& d_logits,
                    bool need_input_grad) {
    const ModelConfig& cfg = params.config;
    if (cache.mode != Mode::Train)
        throw StateError("backward: cache must come from a train-mode forward");
    if (cache.hidden.rows() != d_logits.rows() || d_logits.cols() != cfg.classes)
        throw StateError("backward: d_logits does not match cached forward");

    ModelGrads g;
    LinearGrad lg2 = linear_backward(cache.hidden, params.w_fc2, d_logits);
    g.w_fc2 = std::move(lg2.d_weight);
    g.b_fc2 = std::move(lg2.d_bias);
    LinearGrad lg1 = linear_backward(cache.flat, params.w_fc1, lg2.d_input);
    g.w_fc1 = std::move(lg1.d_weight);
    g.b_fc1 = std::move(lg1.d_bias);

    const Eigen::Index fw = cfg.flatten_width();
    Tensor4 d_target(cache.f_target.b, cfg.spatial_maps(), 1, cfg.pooled2_len());
    for (Eigen::Index bi = 0; bi < d_target.b; ++bi)
        for (Eigen::Index i = 0; i < fw; ++i) d_target.data[bi * fw + i] = lg1.d_input(bi, i);

    Tensor4 d_p4 = dropout_backward(d_target, cache.mask4);
    Tensor4 d_e4 = avgpool_time_backward(d_p4, cache.f_2.t, cfg.pool2);
    Tensor4 d_f4 = elu_backward(cache.f4, d_e4);
    Tensor4 d_t4;
    if (params.bn3b) {
        BnGrad bg = batchnorm_backward(cache.bn3bc, *params.bn3b, d_f4);
        g.bn3b_gamma = std::move(bg.d_gamma);
        g.bn3b_beta = std::move(bg.d_beta);
        d_t4 = std::move(bg.d_input);
    } else {
        d_t4 = std::move(d_f4);
    }
    ConvGrad pg = conv_pointwise_backward(cache.f_1, params.w_point, d_t4);
    g.w_point = std::move(pg.d_kernels);
    Tensor4 d_f3 = elu_backward(cache.f3, pg.d_input);
    Tensor4 d_t3;
    if (params.bn3a) {
        BnGrad bg = batchnorm_backward(cache.bn3ac, *params.bn3a, d_f3);
        g.bn3a_gamma = std::move(bg.d_gamma);
        g.bn3a_beta = std::move(bg.d_beta);
        d_t3 = std::move(bg.d_input);
    } else {
        d_t3 = std::move(d_f3);
    }
    ConvGrad dg = conv_depthwise_time_backward(cache.f_fused, params.w_sepdepth, d_t3);
    g.w_sepdepth = std::move(dg.d_kernels);

    Tensor4 d_p2 = dropout_backward(dg.d_input, cache.mask2);
    Tensor4 d_e2 = avgpool_time_backward(d_p2, cache.f1.t, cfg.pool1);
    Tensor4 d_f1 = elu_backward(cache.f1, d_e2);
    Tensor4 d_t2;
    if (params.bn2) {
        BnGrad bg = batchnorm_backward(cache.bn2c, *params.bn2, d_f1);
        g.bn2_gamma = std::move(bg.d_gamma);
        g.bn2_beta = std::move(bg.d_beta);
        d_t2 = std::move(bg.d_input);
    } else {
        d_t2 = std::move(d_f1);
    }
    ConvGrad sg = conv_depthwise_spatial_backward(cache.f, params.w_spatial, d_t2);
    g.w_spatial = std::move(sg.d_kernels);
    Tensor4 d_t1;
    if (params.bn1) {
        BnGrad bg = batchnorm_backward(cache.bn1c, *params.bn1, sg.d_input);
        g.bn1_gamma = std::move(bg.d_gamma);
        g.bn1_beta = std::move(bg.d_beta);
        d_t1 = std::move(bg.d_input);
    } else {
        d_t1 = std::move(sg.d_input);
    }
    ConvGrad tg = conv_temporal_backward(cache.x, params.w_temporal, d_t1, need_input_grad,
                                         &cache.conv1_patches);
    g.w_temporal = std::move(tg.d_kernels);
    g.d_input = std::move(tg.d_input);
    return g;
}

Vector predict_scores(ModelParams& params, const Tensor4& x) {
    Rng rng(0);  // inference consumes no randomness
    Matrix logits = forward(params, x, Mode::Infer, rng);
    Vector scores(logits.rows());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = std::max(logits(i, 0), logits(i, 1));
        const double e0 = std::exp(logits(i, 0) - m);
        const double e1 = std::exp(logits(i, 1) - m);
        scores[i] = e1 / (e0 + e1);
    }
    return scores;
}

std::vector<int> predict(ModelParams& params, const Tensor4& x) { return predict(params, x, 0.5); }

std::vector<int> predict(ModelParams& params, const Tensor4& x, double threshold) {
    Vector scores = predict_scores(params, x);
    std::vector<int> labels(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index i = 0; i < scores.size(); ++i)
        labels[static_cast<std::size_t>(i)] = scores[i] >= threshold ? 1 : 0;
    return labels;
}

AblationVariant parse_ablation(const std::string& name) {
    if (name == "m1" || name == "M1") return AblationVariant::M1;
    if (name == "m2" || name == "M2") return AblationVariant::M2;
    if (name == "m3" || name == "M3") return AblationVariant::M3;
    throw ParamError("unknown ablation variant: " + name);
}

ModelConfig ablation_config(const ModelConfig& base, AblationVariant variant) {
    base.validate();
    ModelConfig cfg = base;
    switch (variant) {
        case AblationVariant::M1: cfg.bn1 = false; break;
        case AblationVariant::M2: cfg.bn2 = false; break;
        case AblationVariant::M3:
            cfg.bn3a = false;
            cfg.bn3b = false;
            break;
    }
    return cfg;
}

namespace {

void push_bn(std::vector<ParamRef>& out, std::optional<BnState>& bn, std::uint16_t base_id,
             const char* gname, const char* bname) {
    if (!bn) return;
    out.push_back({base_id, gname, bn->gamma.data(), bn->gamma.size(), false});
    out.push_back({static_cast<std::uint16_t>(base_id + 1), bname, bn->beta.data(),
                   bn->beta.size(), false});
}

}  // namespace

std::vector<ParamRef> param_refs(ModelParams& p) {
    std::vector<ParamRef> out;
    out.push_back({1, "w_temporal", p.w_temporal.data.data(), p.w_temporal.size(), true});
    out.push_back({2, "w_spatial", p.w_spatial.data.data(), p.w_spatial.size(), true});
    out.push_back({3, "w_sepdepth", p.w_sepdepth.data.data(), p.w_sepdepth.size(), true});
    out.push_back({4, "w_point", p.w_point.data.data(), p.w_point.size(), true});
    out.push_back({5, "w_fc1", p.w_fc1.data(), p.w_fc1.size(), true});
    out.push_back({6, "b_fc1", p.b_fc1.data(), p.b_fc1.size(), false});
    out.push_back({7, "w_fc2", p.w_fc2.data(), p.w_fc2.size(), true});
    out.push_back({8, "b_fc2", p.b_fc2.data(), p.b_fc2.size(), false});
    push_bn(out, p.bn1, 10, "bn1.gamma", "bn1.beta");
    push_bn(out, p.bn2, 20, "bn2.gamma", "bn2.beta");
    push_bn(out, p.bn3a, 30, "bn3a.gamma", "bn3a.beta");
    push_bn(out, p.bn3b, 40, "bn3b.gamma", "bn3b.beta");
    return out;
}

std::vector<ParamRef> grad_refs(ModelGrads& g, const ModelParams& p) {
    std::vector<ParamRef> out;
    out.push_back({1, "w_temporal", g.w_temporal.data.data(), g.w_temporal.size(), true});
    out.push_back({2, "w_spatial", g.w_spatial.data.data(), g.w_spatial.size(), true});
    out.push_back({3, "w_sepdepth", g.w_sepdepth.data.data(), g.w_sepdepth.size(), true});
    out.push_back({4, "w_point", g.w_point.data.data(), g.w_point.size(), true});
    out.push_back({5, "w_fc1", g.w_fc1.data(), g.w_fc1.size(), true});
    out.push_back({6, "b_fc1", g.b_fc1.data(), g.b_fc1.size(), false});
    out.push_back({7, "w_fc2", g.w_fc2.data(), g.w_fc2.size(), true});
    out.push_back({8, "b_fc2", g.b_fc2.data(), g.b_fc2.size(), false});
    if (p.bn1) {
        out.push_back({10, "bn1.gamma", g.bn1_gamma.data(), g.bn1_gamma.size(), false});
        out.push_back({11, "bn1.beta", g.bn1_beta.data(), g.bn1_beta.size(), false});
    }
    if (p.bn2) {
        out.push_back({20, "bn2.gamma", g.bn2_gamma.data(), g.bn2_gamma.size(), false});
        out.push_back({21, "bn2.beta", g.bn2_beta.data(), g.bn2_beta.size(), false});
    }
    if (p.bn3a) {
        out.push_back({30, "bn3a.gamma", g.bn3a_gamma.data(), g.bn3a_gamma.size(), false});
        out.push_back({31, "bn3a.beta", g.bn3a_beta.data(), g.bn3a_beta.size(), false});
    }
    if (p.bn3b) {
        out.push_back({40, "bn3b.gamma", g.bn3b_gamma.data(), g.bn3b_gamma.size(), false});
        out.push_back({41, "bn3b.beta", g.bn3b_beta.data(), g.bn3b_beta.size(), false});
    }
    return out;
}

Eigen::Index param_count(const ModelParams& params) {
    Eigen::Index n = params.w_temporal.size() + params.w_spatial.size() +
                     params.w_sepdepth.size() + params.w_point.size() + params.w_fc1.size() +
                     params.b_fc1.size() + params.w_fc2.size() + params.b_fc2.size();
    for (const auto* bn : {&params.bn1, &params.bn2, &params.bn3a, &params.bn3b})
        if (*bn) n += (*bn)->gamma.size() + (*bn)->beta.size();
    return n;
}

Eigen::Index param_count_closed_form(const ModelConfig& c) {
    const Eigen::Index k = c.temporal_kernels;
    const Eigen::Index kd = c.spatial_maps();
    Eigen::Index n = k * c.temporal_len + kd * c.n_channels + kd * c.sep_len + kd * kd +
                     c.hidden * c.flatten_width() + c.hidden + c.classes * c.hidden + c.classes;
    if (c.bn1) n += 2 * k;
    if (c.bn2) n += 2 * kd;
    if (c.bn3a) n += 2 * kd;
    if (c.bn3b) n += 2 * kd;
    return n;
}

}  // namespace aad
