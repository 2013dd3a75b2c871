#pragma once

#include <string>
#include <vector>

#include "aad/preprocess.hpp"

namespace aad {

struct CspBand {
    double lo_hz = 0.0;
    double hi_hz = 0.0;
};

// {4-8, 8-12, 12-16, 16-24, 24-32} Hz.
std::vector<CspBand> default_fbcsp_bands();

// Spatial filters per retained band plus fit diagnostics. Filters solve the
// generalized eigenproblem of (Sigma_1, Sigma_1 + Sigma_2) on shrunk,
// trace-normalized class covariances; features are log-variances of the
// filtered window.
struct CspModel {
    std::vector<CspBand> bands;       // retained bands, fit order
    std::vector<Vector> band_taps;    // FIR taps used per band (empty: no filtering)
    std::vector<Matrix> filters;      // per band: C x 2m, m largest then m smallest
    std::vector<Vector> eigenvalues;  // per band: whitened spectrum, descending
    std::vector<Matrix> cov1, cov2;   // per band: shrunk class covariances
    int pairs = 3;                    // m

    Eigen::Index feature_dim() const;
};

// Covariance shrinkage strength guaranteeing positive definiteness on short
// windows (50 samples < 32 channels would otherwise be singular).
constexpr double kCspShrinkage = 0.05;

// Average trace-normalized covariance of a window set, shrunk toward the
// scaled identity.
Matrix class_covariance(const std::vector<const Matrix*>& windows);

// Single-band CSP on raw (already band-limited) windows.
CspModel fit_csp(const std::vector<const Matrix*>& class0, const std::vector<const Matrix*>& class1,
                 int pairs);

// Filter-bank CSP: band-pass each window per band (window-length-limited FIR
// taps), fit per-band CSP, concatenate log-variance features. Bands whose
// width cannot be realized at the window length are skipped with a warning.
CspModel fit_fbcsp(const std::vector<Window>& windows, const std::vector<int>& indices, Task task,
                   const std::vector<CspBand>& bands, int pairs, double fs,
                   std::vector<std::string>* warnings = nullptr);

// Log-variance features of one window under a fitted model.
Vector csp_features(const CspModel& model, const Matrix& window);

// Taps usable for a band-pass at this window length (odd, < window length),
// or 0 if the band is too narrow to realize.
int band_taps_for_window(Eigen::Index window_len, double fs, const CspBand& band);

}  // namespace aad
