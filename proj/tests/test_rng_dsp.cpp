#include <doctest.h>

#include <cmath>
#include <complex>

#include "aad/dsp.hpp"
#include "aad/rng.hpp"

using namespace aad;

TEST_CASE("rng streams are deterministic") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next() == b.next());
        CHECK(a.uniform01() == b.uniform01());
    }
    Rng c(43);
    CHECK(Rng(42).next() != c.next());
}

TEST_CASE("rng uniform01 lies in [0,1) and below() is in range") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.below(13) < 13);
    }
}

TEST_CASE("rng normal has roughly unit moments") {
    Rng rng(11);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("derive_seed separates streams") {
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}

TEST_CASE("fft matches a direct DFT") {
    Rng rng(3);
    const std::size_t n = 64;
    std::vector<std::complex<double>> a(n);
    for (auto& z : a) z = {rng.normal(), rng.normal()};
    auto original = a;
    std::vector<std::complex<double>> ref(n);
    const double pi = 3.141592653589793238462643383279503;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            acc += original[j] * std::polar(1.0, -2.0 * pi * double(k * j) / double(n));
        ref[k] = acc;
    }
    fft(a, false);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - ref[k]) < 1e-9);
    fft(a, true);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - original[k]) < 1e-12);
}

TEST_CASE("fft rejects non power-of-two sizes") {
    std::vector<std::complex<double>> a(12);
    CHECK_THROWS_AS(fft(a, false), ParamError);
}

TEST_CASE("fft_convolve equals direct summation") {
    Rng rng(5);
    Eigen::VectorXd x(37), h(9);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = rng.normal();
    Eigen::VectorXd got = fft_convolve(x, h);
    REQUIRE(got.size() == 45);
    for (Eigen::Index j = 0; j < got.size(); ++j) {
        double ref = 0.0;
        for (Eigen::Index k = 0; k < h.size(); ++k) {
            const Eigen::Index i = j - k;
            if (i >= 0 && i < x.size()) ref += x[i] * h[k];
        }
        CHECK(got[j] == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("dtft magnitude of a centered delta is flat") {
    Eigen::VectorXd taps = Eigen::VectorXd::Zero(11);
    taps[5] = 1.0;
    CHECK(dtft_magnitude(taps, 3.0, 100.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dtft_magnitude(taps, 42.0, 100.0) == doctest::Approx(1.0).epsilon(1e-12));
}
