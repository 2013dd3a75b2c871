#pragma once

#include <Eigen/Dense>

#include "aad/tensor.hpp"

namespace aad {

// Principal components of a feature matrix (rows = samples). Components are
// orthonormal columns in descending eigenvalue order; each component's sign
// is fixed so its largest-magnitude entry is positive.
struct PcaModel {
    Vector mean;          // d
    Matrix components;    // d x q
    Vector eigenvalues;   // all computed eigenvalues, descending
    double total_variance = 0.0;

    double explained_variance(int top_q) const;
};

// Sample covariance eigendecomposition; uses the Gram matrix when d > n so
// wide feature matrices (flattened windows) stay tractable.
PcaModel fit_pca(const Matrix& features, int q);

// (X - mean) * components.
Matrix pca_project(const PcaModel& model, const Matrix& features);

// components * Y + mean (rows = samples).
Matrix pca_reconstruct(const PcaModel& model, const Matrix& projected);

}  // namespace aad
