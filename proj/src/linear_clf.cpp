#include "aad/linear_clf.hpp"

#include <cmath>
#include <numeric>

#include "aad/common.hpp"

namespace aad {

Standardizer Standardizer::fit(const Matrix& features) {
    if (features.rows() < 1) throw ParamError("standardizer: empty feature matrix");
    Standardizer s;
    s.mean = features.colwise().mean().transpose();
    Matrix centered = features.rowwise() - s.mean.transpose();
    s.std = (centered.array().square().colwise().mean()).sqrt().transpose();
    for (Eigen::Index i = 0; i < s.std.size(); ++i)
        if (!(s.std[i] > 0.0)) s.std[i] = 1.0;  // constant dimension: leave centered
    return s;
}

Matrix Standardizer::apply(const Matrix& features) const {
    if (features.cols() != mean.size()) throw ShapeError("standardizer: feature width mismatch");
    return (features.rowwise() - mean.transpose()).array().rowwise() /
           std.transpose().array();
}

LinearClassifier fit_linear(const Matrix& features, const std::vector<int>& labels,
                            const LinearFitConfig& cfg) {
    const Eigen::Index n = features.rows();
    const Eigen::Index d = features.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw ShapeError("fit_linear: label count mismatch");
    if (cfg.lambda <= 0.0) throw ParamError("fit_linear: lambda must be positive");
    int pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw ParamError("fit_linear: labels must be 0 or 1");
        pos += y;
    }
    if (pos == 0 || pos == static_cast<int>(labels.size()))
        throw ParamError("fit_linear: degenerate labels, both classes required");

    // Primal sub-gradient descent with step 1/(lambda*t). The bias rides
    // along as an augmented regularized weight, and the returned classifier
    // is the average of the second-half iterates, which tames the large
    // early steps of the 1/(lambda*t) schedule.
    Vector w = Vector::Zero(d);
    double b = 0.0;
    Vector w_avg = Vector::Zero(d);
    double b_avg = 0.0;
    long averaged = 0;

    Rng rng(derive_seed(cfg.seed, 0x73766dULL));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    LinearClassifier clf;
    const long total_steps = static_cast<long>(cfg.epochs) * n;
    long t = 1;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (int idx : order) {
            const double y = labels[static_cast<std::size_t>(idx)] == 1 ? 1.0 : -1.0;
            const auto x = features.row(idx).transpose();
            const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
            const double margin = y * (w.dot(x) + b);
            const double shrink = 1.0 - eta * cfg.lambda;
            w *= shrink;
            b *= shrink;
            if (margin < 1.0) {
                w += eta * y * x;
                b += eta * y;
            }
            if (2 * t > total_steps) {
                w_avg += w;
                b_avg += b;
                ++averaged;
            }
            ++t;
        }
        double hinge = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double y = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
            hinge += std::max(0.0, 1.0 - y * (w.dot(features.row(i).transpose()) + b));
        }
        clf.loss_trace.push_back(hinge / static_cast<double>(n) +
                                 0.5 * cfg.lambda * w.squaredNorm());
    }
    if (averaged > 0) {
        clf.w = w_avg / static_cast<double>(averaged);
        clf.b = b_avg / static_cast<double>(averaged);
    } else {
        clf.w = w;
        clf.b = b;
    }
    return clf;
}

}  // namespace aad
