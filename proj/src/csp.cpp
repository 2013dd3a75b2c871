#include "aad/csp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "aad/common.hpp"

namespace aad {

std::vector<CspBand> default_fbcsp_bands() {
    return {{4.0, 8.0}, {8.0, 12.0}, {12.0, 16.0}, {16.0, 24.0}, {24.0, 32.0}};
}

Eigen::Index CspModel::feature_dim() const {
    return static_cast<Eigen::Index>(bands.size()) * 2 * pairs;
}

Matrix class_covariance(const std::vector<const Matrix*>& windows) {
    if (windows.empty()) throw ParamError("csp: empty class");
    const Eigen::Index c = windows.front()->rows();
    Matrix acc = Matrix::Zero(c, c);
    for (const Matrix* w : windows) {
        if (w->rows() != c) throw ShapeError("csp: inconsistent channel count");
        Matrix cov = (*w) * w->transpose();
        const double tr = cov.trace();
        if (!(tr > 0.0) || !std::isfinite(tr)) throw NumericError("csp: zero-power window");
        acc += cov / tr;
    }
    acc /= static_cast<double>(windows.size());
    // shrink toward scaled identity; trace is 1 after normalization
    const double mu = acc.trace() / static_cast<double>(c);
    return (1.0 - kCspShrinkage) * acc + kCspShrinkage * mu * Matrix::Identity(c, c);
}

CspModel fit_csp(const std::vector<const Matrix*>& class0, const std::vector<const Matrix*>& class1,
                 int pairs) {
    if (class0.size() < 2 || class1.size() < 2)
        throw ParamError("csp: need at least 2 windows per class");
    const Eigen::Index c = class0.front()->rows();
    if (2 * pairs > c) throw ParamError("csp: 2*pairs exceeds channel count");

    // convention: Sigma_1 is the positive class (label 1)
    Matrix sigma2 = class_covariance(class0);
    Matrix sigma1 = class_covariance(class1);
    Matrix composite = sigma1 + sigma2;

    Eigen::SelfAdjointEigenSolver<Matrix> es_r(composite);
    if (es_r.info() != Eigen::Success) throw NumericError("csp: composite eigensolve failed");
    const Vector& lam = es_r.eigenvalues();
    if (lam[0] <= 0.0) throw NumericError("csp: composite covariance not positive definite");
    // whitening W = diag(lam^-1/2) U^T, so W composite W^T = I
    Matrix white = lam.array().rsqrt().matrix().asDiagonal() * es_r.eigenvectors().transpose();

    Matrix s = white * sigma1 * white.transpose();
    Matrix s_sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es_s(s_sym);
    if (es_s.info() != Eigen::Success) throw NumericError("csp: whitened eigensolve failed");

    // ascending from Eigen; re-order to descending
    Vector evals(c);
    Matrix w_all(c, c);
    for (Eigen::Index i = 0; i < c; ++i) {
        evals[i] = es_s.eigenvalues()[c - 1 - i];
        w_all.col(i) = white.transpose() * es_s.eigenvectors().col(c - 1 - i);
    }

    CspModel model;
    model.pairs = pairs;
    model.bands.push_back({0.0, 0.0});
    model.band_taps.emplace_back();
    Matrix filters(c, 2 * pairs);
    for (int j = 0; j < pairs; ++j) {
        filters.col(j) = w_all.col(j);                      // largest eigenvalues
        filters.col(pairs + j) = w_all.col(c - pairs + j);  // smallest eigenvalues
    }
    model.filters.push_back(std::move(filters));
    model.eigenvalues.push_back(std::move(evals));
    model.cov1.push_back(std::move(sigma1));
    model.cov2.push_back(std::move(sigma2));
    return model;
}

int band_taps_for_window(Eigen::Index window_len, double fs, const CspBand& band) {
    Eigen::Index taps = std::min<Eigen::Index>(window_len - 1, 249);
    if (taps % 2 == 0) --taps;
    if (taps < 9) return 0;
    // a band narrower than roughly one transition width is not realizable
    if (band.hi_hz - band.lo_hz < fs / static_cast<double>(taps)) return 0;
    return static_cast<int>(taps);
}

CspModel fit_fbcsp(const std::vector<Window>& windows, const std::vector<int>& indices, Task task,
                   const std::vector<CspBand>& bands, int pairs, double fs,
                   std::vector<std::string>* warnings) {
    if (indices.empty()) throw ParamError("fbcsp: no training windows");
    const Eigen::Index t_len = windows[static_cast<std::size_t>(indices.front())].samples.cols();

    CspModel model;
    model.pairs = pairs;
    for (const CspBand& band : bands) {
        if (!(band.lo_hz > 0.0 && band.lo_hz < band.hi_hz && band.hi_hz < fs / 2.0))
            throw ParamError("fbcsp: band outside (0, fs/2)");
        const int taps = band_taps_for_window(t_len, fs, band);
        if (taps == 0) {
            if (warnings)
                warnings->push_back("fbcsp: band " + std::to_string(band.lo_hz) + "-" +
                                    std::to_string(band.hi_hz) +
                                    " Hz skipped: too narrow for window length " +
                                    std::to_string(t_len));
            continue;
        }
        FirSpec fir{band.lo_hz, band.hi_hz, taps};
        Vector coeffs = design_fir(fir, fs);

        std::vector<Matrix> filtered(indices.size());
        std::vector<const Matrix*> class0, class1;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const Window& w = windows[static_cast<std::size_t>(indices[i])];
            filtered[i] = filter_rows(w.samples, coeffs);
            (window_label(w, task) == 0 ? class0 : class1).push_back(&filtered[i]);
        }
        CspModel single = fit_csp(class0, class1, pairs);
        model.bands.push_back(band);
        model.band_taps.push_back(std::move(coeffs));
        model.filters.push_back(std::move(single.filters[0]));
        model.eigenvalues.push_back(std::move(single.eigenvalues[0]));
        model.cov1.push_back(std::move(single.cov1[0]));
        model.cov2.push_back(std::move(single.cov2[0]));
    }
    if (model.bands.empty())
        throw ParamError("fbcsp: no usable bands at window length " + std::to_string(t_len));
    return model;
}

Vector csp_features(const CspModel& model, const Matrix& window) {
    Vector out(model.feature_dim());
    Eigen::Index at = 0;
    for (std::size_t b = 0; b < model.bands.size(); ++b) {
        const Matrix filtered =
            model.band_taps[b].size() > 0 ? filter_rows(window, model.band_taps[b]) : window;
        const Matrix projected = model.filters[b].transpose() * filtered;  // 2m x T
        for (Eigen::Index j = 0; j < projected.rows(); ++j) {
            const auto row = projected.row(j).array();
            const double var = (row - row.mean()).square().mean();
            out[at++] = std::log(std::max(var, 1e-300));
        }
    }
    return out;
}

}  // namespace aad
