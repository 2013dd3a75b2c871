#include "aad/dsp.hpp"

#include <cmath>

#include "aad/common.hpp"

namespace aad {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw ParamError("fft: size must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const double pi = 3.14159265358979323846264338327950288;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv;
    }
}

Eigen::VectorXd fft_convolve(const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
    const std::size_t n = static_cast<std::size_t>(x.size());
    const std::size_t m = static_cast<std::size_t>(h.size());
    if (n == 0 || m == 0) throw ParamError("fft_convolve: empty input");
    const std::size_t out_len = n + m - 1;
    const std::size_t size = next_pow2(out_len);

    std::vector<std::complex<double>> fa(size), fb(size);
    for (std::size_t i = 0; i < n; ++i) fa[i] = x[static_cast<Eigen::Index>(i)];
    for (std::size_t i = 0; i < m; ++i) fb[i] = h[static_cast<Eigen::Index>(i)];
    fft(fa, false);
    fft(fb, false);
    for (std::size_t i = 0; i < size; ++i) fa[i] *= fb[i];
    fft(fa, true);

    Eigen::VectorXd out(static_cast<Eigen::Index>(out_len));
    for (std::size_t i = 0; i < out_len; ++i) out[static_cast<Eigen::Index>(i)] = fa[i].real();
    return out;
}

double dtft_magnitude(const Eigen::VectorXd& taps, double f_hz, double fs) {
    const double w = 2.0 * 3.14159265358979323846264338327950288 * f_hz / fs;
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < taps.size(); ++i)
        acc += taps[i] * std::complex<double>(std::cos(w * static_cast<double>(i)),
                                              -std::sin(w * static_cast<double>(i)));
    return std::abs(acc);
}

}  // namespace aad
