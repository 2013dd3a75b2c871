#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "aad/common.hpp"
#include "aad/tensor.hpp"

namespace aad {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled; callers pass 0 for biases and BN affine pairs
};

struct AdamMoments {
    ArrayX m;
    ArrayX v;

    static AdamMoments zeros(Eigen::Index n) { return {ArrayX::Zero(n), ArrayX::Zero(n)}; }
};

// One bias-corrected Adam step with decoupled weight decay:
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * p
// t is the 1-based step count. Throws NumericError on non-finite gradients.
inline void adam_step(Eigen::Ref<ArrayX> param, const Eigen::Ref<const ArrayX>& grad,
                      AdamMoments& moments, long t, const AdamHyper& hp,
                      const std::string& param_name = "") {
    if (t < 1) throw ParamError("adam_step: t must be >= 1");
    if (param.size() != grad.size() || moments.m.size() != param.size() ||
        moments.v.size() != param.size())
        throw ShapeError("adam_step: parameter/gradient/moment size mismatch");
    if (!grad.isFinite().all())
        throw NumericError("adam_step: non-finite gradient" +
                           (param_name.empty() ? std::string() : " for " + param_name));

    moments.m = hp.beta1 * moments.m + (1.0 - hp.beta1) * grad;
    moments.v = hp.beta2 * moments.v + (1.0 - hp.beta2) * grad.square();
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
    if (hp.weight_decay != 0.0) {
        // decay term uses the pre-update parameter value
        ArrayX decay = hp.lr * hp.weight_decay * param;
        param -= hp.lr * (moments.m / bc1) / ((moments.v / bc2).sqrt() + hp.eps);
        param -= decay;
    } else {
        param -= hp.lr * (moments.m / bc1) / ((moments.v / bc2).sqrt() + hp.eps);
    }
}

}  // namespace aad
