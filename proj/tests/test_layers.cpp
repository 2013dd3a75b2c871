#include <doctest.h>

#include <cmath>

#include "aad/gradcheck.hpp"
#include "aad/layers.hpp"

using namespace aad;

namespace {

Tensor4 tensor_from(std::initializer_list<double> values, Eigen::Index b, Eigen::Index k,
                    Eigen::Index c, Eigen::Index t) {
    Tensor4 x(b, k, c, t);
    Eigen::Index i = 0;
    for (double v : values) x.data[i++] = v;
    REQUIRE(i == x.size());
    return x;
}

Tensor4 random_tensor(Eigen::Index b, Eigen::Index k, Eigen::Index c, Eigen::Index t,
                      std::uint64_t seed) {
    Rng rng(seed);
    Tensor4 x(b, k, c, t);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data[i] = rng.normal();
    return x;
}

// central differences of sum(weights .* op(x, kernels)) w.r.t. the kernels
template <typename Op>
double kernel_fd_worst(const Tensor4& x, Tensor4 kernels, const Tensor4& d_kernels,
                       const Tensor4& weights, Op op) {
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < kernels.size(); ++i) {
        const double keep = kernels.data[i];
        kernels.data[i] = keep + h;
        const double up = (op(x, kernels).data * weights.data).sum();
        kernels.data[i] = keep - h;
        const double down = (op(x, kernels).data * weights.data).sum();
        kernels.data[i] = keep;
        worst = std::max(worst, gradcheck_rel_err(d_kernels.data[i], (up - down) / (2 * h)));
    }
    return worst;
}

}  // namespace

TEST_CASE("conv_temporal: length-1 identity kernel") {
    Tensor4 x = tensor_from({3, 1, 4, 1, 5}, 1, 1, 1, 5);
    Tensor4 k = tensor_from({1}, 1, 1, 1, 1);
    Tensor4 y = conv_temporal(x, k);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(y.data[i] == x.data[i]);
}

TEST_CASE("conv_temporal: ramp with box kernel, zero padding") {
    Tensor4 x = tensor_from({1, 2, 3, 4, 5}, 1, 1, 1, 5);
    Tensor4 k = tensor_from({1.0 / 3, 1.0 / 3, 1.0 / 3}, 1, 1, 1, 3);
    Tensor4 y = conv_temporal(x, k);
    const double expected[] = {1.0, 2.0, 3.0, 4.0, 3.0};
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(y.data[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("conv_temporal: even kernel length keeps the time length") {
    Tensor4 x = random_tensor(2, 1, 3, 25, 1);
    Tensor4 k = random_tensor(4, 1, 1, 8, 2);
    Tensor4 y = conv_temporal(x, k);
    CHECK(y.b == 2);
    CHECK(y.k == 4);
    CHECK(y.c == 3);
    CHECK(y.t == 25);
    CHECK(y.all_finite());
}

TEST_CASE("conv_temporal: kernel gradient matches finite differences at 1e-6") {
    Tensor4 x = random_tensor(2, 1, 3, 20, 3);
    Tensor4 k = random_tensor(2, 1, 1, 5, 4);
    Tensor4 w(2, 2, 3, 20);
    w.data.setOnes();  // objective: sum of outputs
    ConvGrad g = conv_temporal_backward(x, k, w);
    CHECK(kernel_fd_worst(x, k, g.d_kernels, w, [](const Tensor4& a, const Tensor4& b) {
              return conv_temporal(a, b);
          }) <= 1e-6);
}

TEST_CASE("conv_temporal: map count mismatch is a shape error") {
    Tensor4 x = random_tensor(1, 2, 3, 10, 5);
    Tensor4 k = random_tensor(4, 3, 1, 3, 6);
    CHECK_THROWS_AS(conv_temporal(x, k), ShapeError);
}

TEST_CASE("conv_depthwise_spatial: selector kernel picks one channel") {
    // C=2 rows a=(1,2,3), b=(4,5,6); kernel (1,0) selects row a
    Tensor4 x = tensor_from({1, 2, 3, 4, 5, 6}, 1, 1, 2, 3);
    Tensor4 k = tensor_from({1, 0}, 1, 1, 2, 1);
    Tensor4 y = conv_depthwise_spatial(x, k);
    CHECK(y.t == 3);
    CHECK(y.c == 1);
    CHECK(y.data[0] == 1);
    CHECK(y.data[1] == 2);
    CHECK(y.data[2] == 3);
}

TEST_CASE("conv_depthwise_spatial: averaging kernel") {
    Tensor4 x = tensor_from({2, 2, 2, 4, 4, 4}, 1, 1, 2, 3);
    Tensor4 k = tensor_from({0.5, 0.5}, 1, 1, 2, 1);
    Tensor4 y = conv_depthwise_spatial(x, k);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(y.data[i] == doctest::Approx(3.0));
}

TEST_CASE("conv_depthwise_spatial: weight count for the default shape") {
    Tensor4 k(32 * 2, 1, 32, 1);
    CHECK(k.size() == 2048);
}

TEST_CASE("conv_depthwise_spatial: depth maps depend only on their source map") {
    Tensor4 x = random_tensor(1, 2, 3, 7, 7);
    Tensor4 k = random_tensor(4, 1, 3, 1, 8);  // D = 2
    Tensor4 y = conv_depthwise_spatial(x, k);
    Tensor4 x2 = x;
    x2.plane(0, 1).setZero();  // zeroing input map 1 must not touch output maps 0 and 1
    Tensor4 y2 = conv_depthwise_spatial(x2, k);
    for (Eigen::Index t = 0; t < 7; ++t) {
        CHECK(y2.at(0, 0, 0, t) == y.at(0, 0, 0, t));
        CHECK(y2.at(0, 1, 0, t) == y.at(0, 1, 0, t));
        CHECK(y2.at(0, 2, 0, t) == 0.0);
        CHECK(y2.at(0, 3, 0, t) == 0.0);
    }
}

TEST_CASE("conv_depthwise_spatial: wrong channel extent is a shape error") {
    Tensor4 x = random_tensor(1, 1, 3, 5, 9);
    Tensor4 k = random_tensor(2, 1, 2, 1, 10);
    CHECK_THROWS_AS(conv_depthwise_spatial(x, k), ShapeError);
}

TEST_CASE("conv_separable_time: identity composition") {
    Tensor4 x = random_tensor(1, 2, 1, 6, 11);
    Tensor4 dk = tensor_from({1, 1}, 2, 1, 1, 1);
    Tensor4 pk = tensor_from({1, 0, 0, 1}, 2, 2, 1, 1);
    auto [d, p] = conv_separable_time(x, dk, pk);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        CHECK(d.data[i] == x.data[i]);
        CHECK(p.data[i] == x.data[i]);
    }
}

TEST_CASE("conv_separable_time: pointwise sum of maps") {
    Tensor4 x = tensor_from({1, 1, 3, 3}, 1, 2, 1, 2);
    Tensor4 dk = tensor_from({1, 1}, 2, 1, 1, 1);
    Tensor4 pk = tensor_from({1, 1}, 1, 2, 1, 1);
    auto [d, p] = conv_separable_time(x, dk, pk);
    CHECK(d.data[0] == 1);
    CHECK(p.k == 1);
    CHECK(p.data[0] == doctest::Approx(4.0));
    CHECK(p.data[1] == doctest::Approx(4.0));
}

TEST_CASE("conv_separable_time: gradients match finite differences at 1e-6") {
    Tensor4 x = random_tensor(2, 3, 1, 12, 13);
    Tensor4 dk = random_tensor(3, 1, 1, 4, 14);
    Tensor4 pk = random_tensor(2, 3, 1, 1, 15);
    Tensor4 w(2, 2, 1, 12);
    w.data.setOnes();
    auto [d, p] = conv_separable_time(x, dk, pk);
    ConvGrad pg = conv_pointwise_backward(d, pk, w);
    ConvGrad dg = conv_depthwise_time_backward(x, dk, pg.d_input);

    const double h = 1e-5;
    double worst = 0.0;
    auto loss = [&] { return conv_separable_time(x, dk, pk).second.data.sum(); };
    for (Eigen::Index i = 0; i < dk.size(); ++i) {
        const double keep = dk.data[i];
        dk.data[i] = keep + h;
        const double up = loss();
        dk.data[i] = keep - h;
        const double down = loss();
        dk.data[i] = keep;
        worst = std::max(worst, gradcheck_rel_err(dg.d_kernels.data[i], (up - down) / (2 * h)));
    }
    for (Eigen::Index i = 0; i < pk.size(); ++i) {
        const double keep = pk.data[i];
        pk.data[i] = keep + h;
        const double up = loss();
        pk.data[i] = keep - h;
        const double down = loss();
        pk.data[i] = keep;
        worst = std::max(worst, gradcheck_rel_err(pg.d_kernels.data[i], (up - down) / (2 * h)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("batchnorm: normalizes to zero mean, unit biased variance") {
    // per-map mean 5, variance 4
    Tensor4 x = tensor_from({3, 7, 3, 7, 3, 7, 3, 7}, 2, 1, 2, 2);
    BnState s = BnState::identity_init(1);
    Tensor4 y = batchnorm(x, s, Mode::Train);
    const double mean = y.data.mean();
    const double var = (y.data - mean).square().mean();
    CHECK(std::abs(mean) <= 1e-10);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));  // eps-shrunk by 1e-5
    // running stats moved toward the batch
    CHECK(s.running_mean[0] == doctest::Approx(0.5));
    CHECK(s.running_var[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 4.0));
}

TEST_CASE("batchnorm: affine pair applies after normalization") {
    Tensor4 x = tensor_from({-1, 1, -1, 1}, 1, 1, 1, 4);
    BnState s = BnState::identity_init(1);
    s.gamma[0] = 2.0;
    s.beta[0] = 3.0;
    Tensor4 y = batchnorm(x, s, Mode::Train);
    CHECK(y.data[0] == doctest::Approx(3.0 - 2.0).epsilon(1e-4));
    CHECK(y.data[1] == doctest::Approx(3.0 + 2.0).epsilon(1e-4));
}

TEST_CASE("batchnorm: infer mode uses running statistics") {
    Tensor4 x = random_tensor(2, 1, 2, 3, 17);
    BnState s = BnState::identity_init(1);
    Tensor4 y = batchnorm(x, s, Mode::Infer);
    const double scale = 1.0 / std::sqrt(1.0 + s.eps);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        CHECK(y.data[i] == doctest::Approx(x.data[i] * scale).epsilon(1e-12));
}

TEST_CASE("batchnorm: degenerate batch is an error") {
    Tensor4 x(1, 2, 1, 1);
    BnState s = BnState::identity_init(2);
    CHECK_THROWS_AS(batchnorm(x, s, Mode::Train), StateError);
    CHECK_NOTHROW(batchnorm(x, s, Mode::Infer));
}

TEST_CASE("batchnorm: train invariant holds on random tensors") {
    Tensor4 x = random_tensor(3, 4, 2, 9, 19);
    x.data = x.data * 3.0 + 5.0;
    BnState s = BnState::identity_init(4);
    Tensor4 y = batchnorm(x, s, Mode::Train);
    for (Eigen::Index k = 0; k < 4; ++k) {
        double sum = 0.0, sq = 0.0;
        long n = 0;
        for (Eigen::Index b = 0; b < 3; ++b)
            for (Eigen::Index c = 0; c < 2; ++c)
                for (Eigen::Index t = 0; t < 9; ++t) {
                    const double v = y.at(b, k, c, t);
                    sum += v;
                    sq += v * v;
                    ++n;
                }
        const double mean = sum / n;
        CHECK(std::abs(mean) <= 1e-8);
        CHECK(std::abs(sq / n - mean * mean - 1.0) <= 1e-4);
    }
}

TEST_CASE("elu values") {
    Tensor4 x = tensor_from({0.0, 3.0, -1.0}, 1, 1, 1, 3);
    Tensor4 y = elu(x);
    CHECK(y.data[0] == 0.0);
    CHECK(y.data[1] == 3.0);
    CHECK(y.data[2] == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-12));
    CHECK(y.data[2] == doctest::Approx(-0.63212).epsilon(1e-4));
}

TEST_CASE("avgpool_time: constants and arithmetic") {
    Tensor4 c(1, 1, 1, 9);
    c.data.setConstant(2.5);
    Tensor4 y = avgpool_time(c, 4);
    CHECK(y.t == 2);
    CHECK(y.data[0] == 2.5);  // exact
    CHECK(y.data[1] == 2.5);

    Tensor4 x = tensor_from({1, 2, 3, 4}, 1, 1, 1, 4);
    CHECK(avgpool_time(x, 4).data[0] == doctest::Approx(2.5));
}

TEST_CASE("avgpool_time: floor arithmetic fixes the flatten size") {
    Tensor4 x(1, 1, 1, 250);
    Tensor4 p1 = avgpool_time(x, 4);
    CHECK(p1.t == 62);
    Tensor4 p2 = avgpool_time(p1, 8);
    CHECK(p2.t == 7);
    CHECK_THROWS_AS(avgpool_time(p2, 8), ParamError);
}

TEST_CASE("dropout: identity cases and reproducible masks") {
    Tensor4 x = random_tensor(2, 1, 2, 5, 23);
    Rng r1(9);
    Tensor4 y0 = dropout(x, 0.0, Mode::Train, r1);
    for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(y0.data[i] == x.data[i]);

    Rng r2(9);
    Tensor4 yi = dropout(x, 0.25, Mode::Infer, r2);
    for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(yi.data[i] == x.data[i]);

    ArrayX m1, m2;
    Rng ra(1234), rb(1234);
    Tensor4 ya = dropout(x, 0.25, Mode::Train, ra, &m1);
    Tensor4 yb = dropout(x, 0.25, Mode::Train, rb, &m2);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        CHECK(ya.data[i] == yb.data[i]);
        CHECK(m1[i] == m2[i]);
    }
    Rng rc(999);
    CHECK_THROWS_AS(dropout(x, 1.0, Mode::Train, rc), ParamError);
}

TEST_CASE("dropout: survivor scaling keeps the mean (law of large numbers)") {
    Tensor4 x(1, 1, 1, 1000000);
    x.data.setOnes();
    Rng rng(77);
    Tensor4 y = dropout(x, 0.25, Mode::Train, rng);
    const double mean = y.data.mean();
    CHECK(mean >= 0.99);
    CHECK(mean <= 1.01);
}

TEST_CASE("linear: identity and arithmetic") {
    Matrix x(1, 2);
    x << 2, 3;
    Matrix w_id = Matrix::Identity(2, 2);
    Vector b0 = Vector::Zero(2);
    Matrix y = linear(x, w_id, b0);
    CHECK(y(0, 0) == 2);
    CHECK(y(0, 1) == 3);

    Matrix w(1, 2);
    w << 1, 1;
    Vector b(1);
    b << 1;
    CHECK(linear(x, w, b)(0, 0) == doctest::Approx(6.0));

    Matrix bad(1, 3);
    CHECK_THROWS_AS(linear(bad, w, b), ShapeError);
}

TEST_CASE("linear: gradient matches finite differences at 1e-7") {
    Rng rng(31);
    Matrix x(3, 5), w(2, 5), r(3, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.normal();
    Vector b(2);
    b << 0.3, -0.7;
    LinearGrad g = linear_backward(x, w, r);
    const double h = 1e-5;
    double worst = 0.0;
    auto loss = [&] { return (linear(x, w, b).array() * r.array()).sum(); };
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double keep = w.data()[i];
        w.data()[i] = keep + h;
        const double up = loss();
        w.data()[i] = keep - h;
        const double down = loss();
        w.data()[i] = keep;
        worst = std::max(worst, gradcheck_rel_err(g.d_weight.data()[i], (up - down) / (2 * h)));
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + h;
        const double up = loss();
        x.data()[i] = keep - h;
        const double down = loss();
        x.data()[i] = keep;
        worst = std::max(worst, gradcheck_rel_err(g.d_input.data()[i], (up - down) / (2 * h)));
    }
    CHECK(worst <= 1e-7);
}

TEST_CASE("softmax_xent: symmetry, stability and normalization") {
    Matrix logits(1, 2);
    logits << 0, 0;
    SoftmaxXent r = softmax_xent(logits, {0});
    CHECK(r.probs(0, 0) == doctest::Approx(0.5));
    CHECK(r.probs(0, 1) == doctest::Approx(0.5));
    CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(r.loss == doctest::Approx(0.693147).epsilon(1e-5));

    Matrix extreme(1, 2);
    extreme << 1000, -1000;
    SoftmaxXent e = softmax_xent(extreme, {0});
    CHECK(std::isfinite(e.loss));
    CHECK(e.loss == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(41);
    Matrix z(6, 2);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = 10.0 * rng.normal();
    std::vector<int> labels{0, 1, 1, 0, 1, 0};
    SoftmaxXent a = softmax_xent(z, labels);
    for (Eigen::Index i = 0; i < 6; ++i)
        CHECK(std::abs(a.probs(i, 0) + a.probs(i, 1) - 1.0) <= 1e-12);
    Matrix shifted = z;
    shifted.array() += 123.456;
    SoftmaxXent s = softmax_xent(shifted, labels);
    CHECK(std::abs(a.loss - s.loss) <= 1e-10);

    CHECK_THROWS_AS(softmax_xent(z, std::vector<int>{0, 1, 2, 0, 1, 0}), ParamError);
}

TEST_CASE("softmax_xent: d_logits matches finite differences at 1e-6") {
    Rng rng(43);
    Matrix z(4, 2);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    std::vector<int> labels{1, 0, 1, 1};
    SoftmaxXent r = softmax_xent(z, labels);
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double keep = z.data()[i];
        z.data()[i] = keep + h;
        const double up = softmax_xent(z, labels).loss;
        z.data()[i] = keep - h;
        const double down = softmax_xent(z, labels).loss;
        z.data()[i] = keep;
        worst = std::max(worst, gradcheck_rel_err(r.d_logits.data()[i], (up - down) / (2 * h)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("layer gradcheck suite passes and detects a corrupted gradient") {
    auto rows = run_gradcheck(2024, false);
    CHECK(gradcheck_all_pass(rows));
    auto corrupted = run_gradcheck(2024, true);
    bool elu_failed = false;
    for (const auto& row : corrupted)
        if (row.name == "elu") elu_failed = !row.pass;
    CHECK(elu_failed);
}
