#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

#include "aad/common.hpp"

namespace aad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ArrayX = Eigen::ArrayXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;

// Dense rank-4 array with row-major (batch, map, channel, time) layout.
// Signals, feature maps and convolution kernel stacks are all Tensor4.
struct Tensor4 {
    Eigen::Index b = 0, k = 0, c = 0, t = 0;
    ArrayX data;

    Tensor4() = default;
    Tensor4(Eigen::Index b_, Eigen::Index k_, Eigen::Index c_, Eigen::Index t_)
        : b(b_), k(k_), c(c_), t(t_), data(ArrayX::Zero(b_ * k_ * c_ * t_)) {
        if (b_ < 0 || k_ < 0 || c_ < 0 || t_ < 0) throw ShapeError("Tensor4: negative dim");
    }

    static Tensor4 zeros(Eigen::Index b, Eigen::Index k, Eigen::Index c, Eigen::Index t) {
        return Tensor4(b, k, c, t);
    }

    // uninitialized storage; caller overwrites every element
    static Tensor4 uninit(Eigen::Index b, Eigen::Index k, Eigen::Index c, Eigen::Index t) {
        Tensor4 x;
        x.b = b;
        x.k = k;
        x.c = c;
        x.t = t;
        x.data.resize(b * k * c * t);
        return x;
    }

    Eigen::Index size() const { return b * k * c * t; }

    Eigen::Index index(Eigen::Index bi, Eigen::Index ki, Eigen::Index ci, Eigen::Index ti) const {
        return ((bi * k + ki) * c + ci) * t + ti;
    }

    double& at(Eigen::Index bi, Eigen::Index ki, Eigen::Index ci, Eigen::Index ti) {
        return data[index(bi, ki, ci, ti)];
    }
    double at(Eigen::Index bi, Eigen::Index ki, Eigen::Index ci, Eigen::Index ti) const {
        return data[index(bi, ki, ci, ti)];
    }

    // (channel x time) view of one (batch, map) plane; contiguous row-major.
    MatrixMap plane(Eigen::Index bi, Eigen::Index ki) {
        return MatrixMap(data.data() + index(bi, ki, 0, 0), c, t);
    }
    ConstMatrixMap plane(Eigen::Index bi, Eigen::Index ki) const {
        return ConstMatrixMap(data.data() + index(bi, ki, 0, 0), c, t);
    }

    bool same_dims(const Tensor4& o) const { return b == o.b && k == o.k && c == o.c && t == o.t; }

    bool all_finite() const { return data.isFinite().all(); }

    std::string dims_str() const {
        return "(" + std::to_string(b) + "," + std::to_string(k) + "," + std::to_string(c) + "," +
               std::to_string(t) + ")";
    }
};

inline void require_dims(const Tensor4& x, Eigen::Index b, Eigen::Index k, Eigen::Index c,
                         Eigen::Index t, const char* what) {
    if (x.b != b || x.k != k || x.c != c || x.t != t)
        throw ShapeError(std::string(what) + ": expected (" + std::to_string(b) + "," +
                         std::to_string(k) + "," + std::to_string(c) + "," + std::to_string(t) +
                         "), got " + x.dims_str());
}

}  // namespace aad
