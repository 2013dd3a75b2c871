#pragma once

#include <vector>

#include "aad/rng.hpp"
#include "aad/tensor.hpp"

namespace aad {

// Per-dimension z-score statistics fitted on training data only.
struct Standardizer {
    Vector mean;
    Vector std;

    static Standardizer fit(const Matrix& features);
    Matrix apply(const Matrix& features) const;
};

// Linear max-margin classifier trained in the primal: mean hinge loss plus
// (lambda/2)||w||^2, epoch-shuffled sub-gradient descent with step 1/(lambda*t).
struct LinearClassifier {
    Vector w;
    double b = 0.0;
    std::vector<double> loss_trace;  // per-epoch objective

    double score(const Vector& x) const { return w.dot(x) + b; }
    int label(const Vector& x) const { return score(x) >= 0.0 ? 1 : 0; }
};

struct LinearFitConfig {
    double lambda = 1e-4;
    int epochs = 100;
    std::uint64_t seed = 0;
};

// Features must already be standardized; labels in {0, 1}, both present.
LinearClassifier fit_linear(const Matrix& features, const std::vector<int>& labels,
                            const LinearFitConfig& cfg);

}  // namespace aad
