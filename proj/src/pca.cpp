#include "aad/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "aad/common.hpp"

namespace aad {

double PcaModel::explained_variance(int top_q) const {
    if (top_q < 1 || top_q > eigenvalues.size()) throw ParamError("explained_variance: bad q");
    if (!(total_variance > 0.0)) return 0.0;
    return eigenvalues.head(top_q).sum() / total_variance;
}

namespace {

void fix_sign(Matrix& components) {
    for (Eigen::Index j = 0; j < components.cols(); ++j) {
        Eigen::Index imax = 0;
        components.col(j).cwiseAbs().maxCoeff(&imax);
        if (components(imax, j) < 0.0) components.col(j) = -components.col(j);
    }
}

}  // namespace

PcaModel fit_pca(const Matrix& features, int q) {
    const Eigen::Index n = features.rows();
    const Eigen::Index d = features.cols();
    if (n < 2) throw ParamError("pca: need at least 2 samples");
    if (q < 1 || q > std::min<Eigen::Index>(n - 1, d))
        throw ParamError("pca: q must be in [1, min(n-1, d)]");

    PcaModel model;
    model.mean = features.colwise().mean().transpose();
    Matrix centered = features.rowwise() - model.mean.transpose();

    const Eigen::Index rank_bound = std::min<Eigen::Index>(n - 1, d);
    if (d <= n) {
        Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
        if (es.info() != Eigen::Success) throw NumericError("pca: eigensolve failed");
        model.eigenvalues.resize(rank_bound);
        model.components.resize(d, q);
        for (Eigen::Index i = 0; i < rank_bound; ++i)
            model.eigenvalues[i] = std::max(0.0, es.eigenvalues()[d - 1 - i]);
        for (Eigen::Index j = 0; j < q; ++j) model.components.col(j) = es.eigenvectors().col(d - 1 - j);
        model.total_variance = cov.trace();
    } else {
        // Gram trick: eigenvectors of X X^T map onto covariance eigenvectors
        Matrix gram = centered * centered.transpose() / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
        if (es.info() != Eigen::Success) throw NumericError("pca: eigensolve failed");
        model.eigenvalues.resize(rank_bound);
        for (Eigen::Index i = 0; i < rank_bound; ++i)
            model.eigenvalues[i] = std::max(0.0, es.eigenvalues()[n - 1 - i]);
        model.components.resize(d, q);
        for (Eigen::Index j = 0; j < q; ++j) {
            const double lam = es.eigenvalues()[n - 1 - j];
            if (!(lam > 1e-12 * std::max(1.0, es.eigenvalues()[n - 1])))
                throw NumericError("pca: rank too low for q = " + std::to_string(q));
            model.components.col(j) = centered.transpose() * es.eigenvectors().col(n - 1 - j) /
                                      std::sqrt(lam * static_cast<double>(n - 1));
        }
        model.total_variance = gram.trace();
    }
    fix_sign(model.components);
    return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& features) {
    if (features.cols() != model.mean.size()) throw ShapeError("pca_project: feature width mismatch");
    return (features.rowwise() - model.mean.transpose()) * model.components;
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& projected) {
    if (projected.cols() != model.components.cols())
        throw ShapeError("pca_reconstruct: width mismatch");
    return (projected * model.components.transpose()).rowwise() + model.mean.transpose();
}

}  // namespace aad
