#include "aad/gradcheck.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

namespace aad {

double gradcheck_rel_err(double analytic, double numeric) {
    const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    return std::abs(analytic - numeric) / scale;
}

namespace {

constexpr double kH = 1e-5;
constexpr double kLayerTol = 1e-5;

Tensor4 random_tensor(Eigen::Index b, Eigen::Index k, Eigen::Index c, Eigen::Index t, Rng& rng) {
    Tensor4 x(b, k, c, t);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data[i] = rng.normal();
    return x;
}

double weighted_sum(const Tensor4& y, const Tensor4& r) { return (y.data * r.data).sum(); }

// Central difference of `eval` w.r.t. every coordinate of `subject`, compared
// against the matching analytic gradient.
double check_coords(ArrayX& subject, const ArrayX& analytic,
                    const std::function<double()>& eval) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < subject.size(); ++i) {
        const double keep = subject[i];
        subject[i] = keep + kH;
        const double up = eval();
        subject[i] = keep - kH;
        const double down = eval();
        subject[i] = keep;
        const double numeric = (up - down) / (2.0 * kH);
        worst = std::max(worst, gradcheck_rel_err(analytic[i], numeric));
    }
    return worst;
}

GradCheckRow make_row(std::string name, double worst, double tol) {
    GradCheckRow row;
    row.name = std::move(name);
    row.worst = worst;
    row.tolerance = tol;
    row.pass = worst <= tol;
    return row;
}

}  // namespace

std::vector<GradCheckRow> run_gradcheck(std::uint64_t seed, bool corrupt_elu) {
    std::vector<GradCheckRow> rows;
    Rng rng(derive_seed(seed, 0x6763ULL));

    {  // temporal convolution
        Tensor4 x = random_tensor(2, 2, 3, 17, rng);
        Tensor4 w = random_tensor(3, 2, 1, 5, rng);
        Tensor4 r = random_tensor(2, 3, 3, 17, rng);
        ConvGrad g = conv_temporal_backward(x, w, r);
        auto eval = [&] { return weighted_sum(conv_temporal(x, w), r); };
        const double worst = std::max(check_coords(x.data, g.d_input.data, eval),
                                      check_coords(w.data, g.d_kernels.data, eval));
        rows.push_back(make_row("conv_temporal", worst, kLayerTol));
    }
    {  // depthwise spatial convolution
        Tensor4 x = random_tensor(2, 3, 4, 11, rng);
        Tensor4 w = random_tensor(6, 1, 4, 1, rng);
        Tensor4 r = random_tensor(2, 6, 1, 11, rng);
        ConvGrad g = conv_depthwise_spatial_backward(x, w, r);
        auto eval = [&] { return weighted_sum(conv_depthwise_spatial(x, w), r); };
        const double worst = std::max(check_coords(x.data, g.d_input.data, eval),
                                      check_coords(w.data, g.d_kernels.data, eval));
        rows.push_back(make_row("conv_depthwise_spatial", worst, kLayerTol));
    }
    {  // separable depthwise stage
        Tensor4 x = random_tensor(2, 3, 1, 13, rng);
        Tensor4 w = random_tensor(3, 1, 1, 4, rng);
        Tensor4 r = random_tensor(2, 3, 1, 13, rng);
        ConvGrad g = conv_depthwise_time_backward(x, w, r);
        auto eval = [&] { return weighted_sum(conv_depthwise_time(x, w), r); };
        const double worst = std::max(check_coords(x.data, g.d_input.data, eval),
                                      check_coords(w.data, g.d_kernels.data, eval));
        rows.push_back(make_row("conv_depthwise_time", worst, kLayerTol));
    }
    {  // pointwise stage
        Tensor4 x = random_tensor(2, 3, 1, 9, rng);
        Tensor4 w = random_tensor(4, 3, 1, 1, rng);
        Tensor4 r = random_tensor(2, 4, 1, 9, rng);
        ConvGrad g = conv_pointwise_backward(x, w, r);
        auto eval = [&] { return weighted_sum(conv_pointwise(x, w), r); };
        const double worst = std::max(check_coords(x.data, g.d_input.data, eval),
                                      check_coords(w.data, g.d_kernels.data, eval));
        rows.push_back(make_row("conv_pointwise", worst, kLayerTol));
    }
    {  // batch normalization (train mode)
        Tensor4 x = random_tensor(3, 2, 2, 7, rng);
        Tensor4 r = random_tensor(3, 2, 2, 7, rng);
        BnState proto = BnState::identity_init(2);
        for (Eigen::Index i = 0; i < 2; ++i) {
            proto.gamma[i] = 1.0 + 0.3 * rng.normal();
            proto.beta[i] = 0.2 * rng.normal();
        }
        auto eval = [&] {
            BnState state = proto;  // forward mutates running stats
            return weighted_sum(batchnorm(x, state, Mode::Train), r);
        };
        BnState state = proto;
        BnCache cache;
        batchnorm(x, state, Mode::Train, &cache);
        BnGrad g = batchnorm_backward(cache, proto, r);
        double worst = check_coords(x.data, g.d_input.data, eval);
        ArrayX gamma_arr = proto.gamma.array();
        ArrayX dgamma = g.d_gamma.array();
        worst = std::max(worst, check_coords(gamma_arr, dgamma, [&] {
            BnState s = proto;
            s.gamma = gamma_arr.matrix();
            return weighted_sum(batchnorm(x, s, Mode::Train), r);
        }));
        ArrayX beta_arr = proto.beta.array();
        ArrayX dbeta = g.d_beta.array();
        worst = std::max(worst, check_coords(beta_arr, dbeta, [&] {
            BnState s = proto;
            s.beta = beta_arr.matrix();
            return weighted_sum(batchnorm(x, s, Mode::Train), r);
        }));
        rows.push_back(make_row("batchnorm", worst, kLayerTol));
    }
    {  // ELU (inputs nudged away from the kink)
        Tensor4 x = random_tensor(2, 2, 3, 11, rng);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (std::abs(x.data[i]) < 1e-3) x.data[i] += 0.01;
        Tensor4 r = random_tensor(2, 2, 3, 11, rng);
        Tensor4 g = elu_backward(x, r);
        if (corrupt_elu) g.data += 1e-3;  // sensitivity fixture
        auto eval = [&] { return weighted_sum(elu(x), r); };
        rows.push_back(make_row("elu", check_coords(x.data, g.data, eval), kLayerTol));
    }
    {  // average pooling
        Tensor4 x = random_tensor(2, 2, 2, 13, rng);
        Tensor4 r = random_tensor(2, 2, 2, 13 / 3, rng);
        Tensor4 g = avgpool_time_backward(r, 13, 3);
        auto eval = [&] { return weighted_sum(avgpool_time(x, 3), r); };
        rows.push_back(make_row("avgpool_time", check_coords(x.data, g.data, eval), kLayerTol));
    }
    {  // dropout with a fixed mask
        Tensor4 x = random_tensor(2, 2, 2, 9, rng);
        Tensor4 r = random_tensor(2, 2, 2, 9, rng);
        const std::uint64_t mask_seed = rng.next();
        ArrayX mask;
        {
            Rng mask_rng(mask_seed);
            dropout(x, 0.3, Mode::Train, mask_rng, &mask);
        }
        Tensor4 g = dropout_backward(r, mask);
        auto eval = [&] {
            Rng mask_rng(mask_seed);
            return weighted_sum(dropout(x, 0.3, Mode::Train, mask_rng), r);
        };
        rows.push_back(make_row("dropout", check_coords(x.data, g.data, eval), kLayerTol));
    }
    {  // fully connected layer
        Matrix x(4, 7), w(3, 7), r(4, 3);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.normal();
        Vector b(3);
        for (Eigen::Index i = 0; i < 3; ++i) b[i] = rng.normal();
        LinearGrad g = linear_backward(x, w, r);
        auto eval = [&] { return (linear(x, w, b).array() * r.array()).sum(); };
        Eigen::Map<ArrayX> xa(x.data(), x.size());
        Eigen::Map<ArrayX> wa(w.data(), w.size());
        Eigen::Map<ArrayX> ba(b.data(), b.size());
        ArrayX xs = xa, ws = wa, bs = ba;
        ArrayX dx = Eigen::Map<ArrayX>(g.d_input.data(), g.d_input.size());
        ArrayX dw = Eigen::Map<ArrayX>(g.d_weight.data(), g.d_weight.size());
        ArrayX db = Eigen::Map<ArrayX>(g.d_bias.data(), g.d_bias.size());
        double worst = check_coords(xs, dx, [&] {
            Eigen::Map<Matrix> xm(xs.data(), 4, 7);
            return (linear(xm, w, b).array() * r.array()).sum();
        });
        worst = std::max(worst, check_coords(ws, dw, [&] {
            Eigen::Map<Matrix> wm(ws.data(), 3, 7);
            return (linear(x, wm, b).array() * r.array()).sum();
        }));
        worst = std::max(worst, check_coords(bs, db, [&] {
            Eigen::Map<Vector> bm(bs.data(), 3);
            return (linear(x, w, bm).array() * r.array()).sum();
        }));
        (void)eval;
        rows.push_back(make_row("linear", worst, kLayerTol));
    }
    {  // softmax cross-entropy
        Matrix logits(5, 2);
        for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = rng.normal();
        std::vector<int> labels(5);
        for (auto& y : labels) y = static_cast<int>(rng.below(2));
        SoftmaxXent sx = softmax_xent(logits, labels);
        ArrayX la = Eigen::Map<ArrayX>(logits.data(), logits.size());
        ArrayX dl = Eigen::Map<ArrayX>(sx.d_logits.data(), sx.d_logits.size());
        const double worst = check_coords(la, dl, [&] {
            Eigen::Map<Matrix> lm(la.data(), 5, 2);
            return softmax_xent(lm, labels).loss;
        });
        rows.push_back(make_row("softmax_xent", worst, kLayerTol));
    }
    {  // full model on the small configuration
        ModelConfig cfg;
        cfg.n_channels = 4;
        cfg.window_samples = 40;
        const std::uint64_t init_seed = derive_seed(seed, 0x6d6f64ULL);
        Rng init_rng(init_seed);
        ModelParams params = init_model(cfg, init_rng);
        Tensor4 x = random_tensor(2, 1, 4, 40, rng);
        std::vector<int> labels{static_cast<int>(rng.below(2)), static_cast<int>(rng.below(2))};
        const std::uint64_t drop_seed = rng.next();

        auto loss_eval = [&] {
            Rng drop_rng(drop_seed);
            Matrix logits = forward(params, x, Mode::Train, drop_rng);
            return softmax_xent(logits, labels).loss;
        };
        ForwardCache cache;
        Rng drop_rng(drop_seed);
        Matrix logits = forward(params, x, Mode::Train, drop_rng, &cache);
        SoftmaxXent sx = softmax_xent(logits, labels);
        ModelGrads grads = backward(params, cache, sx.d_logits);

        auto prefs = param_refs(params);
        auto grefs = grad_refs(grads, params);
        Rng pick(derive_seed(seed, 0x7069636bULL));
        long checked = 0, ok = 0;
        double worst = 0.0;
        auto check_some = [&](double* subject, const double* analytic, Eigen::Index size) {
            const Eigen::Index samples = std::min<Eigen::Index>(size, 28);
            for (Eigen::Index j = 0; j < samples; ++j) {
                const Eigen::Index i =
                    samples == size ? j : static_cast<Eigen::Index>(pick.below(
                                              static_cast<std::uint64_t>(size)));
                const double keep = subject[i];
                subject[i] = keep + kH;
                const double up = loss_eval();
                subject[i] = keep - kH;
                const double down = loss_eval();
                subject[i] = keep;
                const double rel = gradcheck_rel_err(analytic[i], (up - down) / (2.0 * kH));
                worst = std::max(worst, rel);
                ++checked;
                if (rel <= 1e-4) ++ok;
            }
        };
        for (std::size_t i = 0; i < prefs.size(); ++i)
            check_some(prefs[i].data, grefs[i].data, prefs[i].size);
        check_some(x.data.data(), grads.d_input.data.data(), x.size());

        GradCheckRow row;
        row.name = "model";
        row.worst = worst;
        row.tolerance = 1e-4;
        row.pass_fraction = static_cast<double>(ok) / static_cast<double>(checked);
        row.pass = row.pass_fraction >= 0.99;
        char detail[96];
        std::snprintf(detail, sizeof(detail), "%ld/%ld coords within 1e-4", ok, checked);
        row.detail = detail;
        rows.push_back(row);
    }
    return rows;
}

bool gradcheck_all_pass(const std::vector<GradCheckRow>& rows) {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

std::string gradcheck_table(const std::vector<GradCheckRow>& rows) {
    std::string out = "layer                     max_rel_err   tolerance   result\n";
    for (const auto& r : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-24s  %11.3e  %10.0e   %s%s%s\n", r.name.c_str(),
                      r.worst, r.tolerance, r.pass ? "pass" : "FAIL",
                      r.detail.empty() ? "" : "  ", r.detail.c_str());
        out += line;
    }
    return out;
}

}  // namespace aad
