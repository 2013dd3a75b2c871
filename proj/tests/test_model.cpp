#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aad/model.hpp"
#include "aad/model_io.hpp"

using namespace aad;

namespace {

Tensor4 random_input(const ModelConfig& cfg, Eigen::Index batch, std::uint64_t seed) {
    Rng rng(seed);
    Tensor4 x(batch, 1, cfg.n_channels, cfg.window_samples);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data[i] = rng.normal();
    return x;
}

bool params_equal(ModelParams& a, ModelParams& b) {
    auto ra = param_refs(a);
    auto rb = param_refs(b);
    if (ra.size() != rb.size()) return false;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        if (ra[i].size != rb[i].size) return false;
        for (Eigen::Index j = 0; j < ra[i].size; ++j)
            if (ra[i].data[j] != rb[i].data[j]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("init_model is deterministic given the seed") {
    ModelConfig cfg;
    Rng r1(123), r2(123);
    ModelParams a = init_model(cfg, r1);
    ModelParams b = init_model(cfg, r2);
    CHECK(params_equal(a, b));
    Rng r3(124);
    ModelParams c = init_model(cfg, r3);
    CHECK_FALSE(params_equal(a, c));
}

TEST_CASE("flatten widths for the three window lengths") {
    ModelConfig cfg;
    cfg.window_samples = 250;
    CHECK(cfg.flatten_width() == 448);
    cfg.window_samples = 50;
    CHECK(cfg.flatten_width() == 64);
    cfg.window_samples = 500;
    CHECK(cfg.flatten_width() == 960);
}

TEST_CASE("parameter count matches the closed-form shape walk") {
    ModelConfig cfg;
    cfg.window_samples = 250;
    Rng rng(1);
    ModelParams p = init_model(cfg, rng);
    CHECK(param_count(p) == 38530);
    CHECK(param_count_closed_form(cfg) == 38530);

    // property: closed form equals the actual count over random valid configs
    Rng pick(99);
    for (int i = 0; i < 10; ++i) {
        ModelConfig c;
        c.n_channels = 2 + static_cast<Eigen::Index>(pick.below(30));
        c.temporal_kernels = 1 + static_cast<Eigen::Index>(pick.below(16));
        c.depth_multiplier = 1 + static_cast<Eigen::Index>(pick.below(3));
        c.temporal_len = 2 + static_cast<Eigen::Index>(pick.below(32));
        c.sep_len = 2 + static_cast<Eigen::Index>(pick.below(12));
        c.window_samples = 64 + static_cast<Eigen::Index>(pick.below(128));
        c.bn1 = pick.below(2) == 0;
        c.bn2 = pick.below(2) == 0;
        c.bn3a = pick.below(2) == 0;
        c.bn3b = pick.below(2) == 0;
        Rng r(7);
        ModelParams q = init_model(c, r);
        CHECK(param_count(q) == param_count_closed_form(c));
    }
}

TEST_CASE("forward yields (B,2) for all three window lengths") {
    for (Eigen::Index t : {50, 250, 500}) {
        ModelConfig cfg;
        cfg.window_samples = t;
        Rng rng(5);
        ModelParams p = init_model(cfg, rng);
        Tensor4 x = random_input(cfg, 2, 6);
        Rng fwd(0);
        Matrix logits = forward(p, x, Mode::Infer, fwd);
        CHECK(logits.rows() == 2);
        CHECK(logits.cols() == 2);
        CHECK(logits.allFinite());
    }
}

TEST_CASE("infer-mode forward is deterministic") {
    ModelConfig cfg;
    cfg.window_samples = 50;
    Rng rng(5);
    ModelParams p = init_model(cfg, rng);
    Tensor4 x = random_input(cfg, 3, 8);
    Rng f1(1), f2(99);  // infer consumes no randomness
    Matrix a = forward(p, x, Mode::Infer, f1);
    Matrix b = forward(p, x, Mode::Infer, f2);
    for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("zero input with zero biases propagates to the classifier bias") {
    ModelConfig cfg;
    cfg.n_channels = 4;
    cfg.window_samples = 64;
    Rng rng(5);
    ModelParams p = init_model(cfg, rng);
    p.b_fc2 << 0.25, -0.75;
    Tensor4 x(2, 1, 4, 64);  // zeros
    Rng fwd(0);
    Matrix logits = forward(p, x, Mode::Infer, fwd);
    for (Eigen::Index i = 0; i < 2; ++i) {
        CHECK(logits(i, 0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(logits(i, 1) == doctest::Approx(-0.75).epsilon(1e-12));
    }
}

TEST_CASE("backward is linear in d_logits") {
    ModelConfig cfg;
    cfg.n_channels = 4;
    cfg.window_samples = 40;
    Rng rng(5);
    ModelParams p = init_model(cfg, rng);
    Tensor4 x = random_input(cfg, 2, 9);
    Rng fwd(77);
    ForwardCache cache;
    forward(p, x, Mode::Train, fwd, &cache);

    Matrix zero = Matrix::Zero(2, 2);
    ModelGrads g0 = backward(p, cache, zero);
    auto refs0 = grad_refs(g0, p);
    for (const auto& r : refs0)
        for (Eigen::Index i = 0; i < r.size; ++i) CHECK(r.data[i] == 0.0);

    Matrix d(2, 2);
    d << 0.3, -0.2, 0.1, 0.7;
    ModelGrads g1 = backward(p, cache, d);
    ModelGrads g2 = backward(p, cache, (2.0 * d).eval());
    auto r1 = grad_refs(g1, p);
    auto r2 = grad_refs(g2, p);
    for (std::size_t k = 0; k < r1.size(); ++k)
        for (Eigen::Index i = 0; i < r1[k].size; ++i)
            CHECK(r2[k].data[i] == doctest::Approx(2.0 * r1[k].data[i]).epsilon(1e-12));
}

TEST_CASE("ablation variants clear the right BN stages") {
    ModelConfig base;
    ModelConfig m1 = ablation_config(base, AblationVariant::M1);
    CHECK_FALSE(m1.bn1);
    CHECK(m1.bn2);
    CHECK(m1.bn3a);
    CHECK(m1.bn3b);
    ModelConfig m2 = ablation_config(base, AblationVariant::M2);
    CHECK(m2.bn1);
    CHECK_FALSE(m2.bn2);
    CHECK(m2.bn3a);
    ModelConfig m3 = ablation_config(base, AblationVariant::M3);
    CHECK(m3.bn1);
    CHECK(m3.bn2);
    CHECK_FALSE(m3.bn3a);
    CHECK_FALSE(m3.bn3b);
    CHECK_THROWS_AS(parse_ablation("m4"), ParamError);

    // ablated BN parameters leave the trainable set
    Rng rng(3);
    ModelParams pm3 = init_model(m3, rng);
    CHECK_FALSE(pm3.bn3a.has_value());
    CHECK_FALSE(pm3.bn3b.has_value());
    CHECK(param_count(pm3) == param_count_closed_form(m3));
}

TEST_CASE("predict: argmax, tie-break to positive, explicit thresholds") {
    ModelConfig cfg;
    cfg.n_channels = 2;
    cfg.window_samples = 32;
    Rng rng(5);
    ModelParams p = init_model(cfg, rng);
    for (ParamRef& r : param_refs(p))
        for (Eigen::Index i = 0; i < r.size; ++i)
            if (std::string(r.name).rfind("bn", 0) != 0) r.data[i] = 0.0;

    Tensor4 x(1, 1, 2, 32);
    p.b_fc2 << 2.0, -1.0;  // logits (2, -1) -> class 0
    CHECK(predict(p, x)[0] == 0);
    p.b_fc2 << 0.0, 0.0;  // tie -> positive class
    CHECK(predict(p, x)[0] == 1);
    CHECK(predict(p, x, 0.5)[0] == 1);
    p.b_fc2 << 5.0, -5.0;
    CHECK(predict(p, x, 0.0)[0] == 1);  // threshold 0: everything positive
}

TEST_CASE("scale invariance of the first block with all BN ablated") {
    ModelConfig cfg;
    cfg.n_channels = 4;
    cfg.window_samples = 64;
    cfg.bn1 = cfg.bn2 = cfg.bn3a = cfg.bn3b = false;
    cfg.dropout_p = 0.0;
    Rng rng(21);
    ModelParams p = init_model(cfg, rng);
    Tensor4 x = random_input(cfg, 2, 22);
    Tensor4 x2 = x;
    x2.data *= 3.0;

    Rng f1(0), f2(0);
    ForwardCache c1, c2;
    forward(p, x, Mode::Train, f1, &c1);
    forward(p, x2, Mode::Train, f2, &c2);
    for (Eigen::Index i = 0; i < c1.f.size(); ++i)
        CHECK(c2.f.data[i] == doctest::Approx(3.0 * c1.f.data[i]).epsilon(1e-12));
}

TEST_CASE("model checkpoint round-trips bit-exactly") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "aad_model_test.aadm").string();
    ModelConfig cfg;
    cfg.n_channels = 4;
    cfg.window_samples = 40;
    Rng rng(31);
    ModelParams p = init_model(cfg, rng);
    // move the running statistics off their init values
    Tensor4 x = random_input(cfg, 4, 32);
    Rng fwd(1);
    forward(p, x, Mode::Train, fwd);

    save_model(p, path);
    ModelParams q = load_model(path);
    CHECK(params_equal(p, q));
    CHECK(q.config.window_samples == cfg.window_samples);
    REQUIRE(q.bn1.has_value());
    for (Eigen::Index i = 0; i < q.bn1->running_mean.size(); ++i) {
        CHECK(q.bn1->running_mean[i] == p.bn1->running_mean[i]);
        CHECK(q.bn1->running_var[i] == p.bn1->running_var[i]);
    }
    CHECK(q.bn1->momentum == p.bn1->momentum);
    CHECK(q.bn1->eps == p.bn1->eps);
    fs::remove(path);
}

TEST_CASE("model checkpoint rejects corrupt headers") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "aad_model_bad.aadm").string();
    ModelConfig cfg;
    cfg.n_channels = 2;
    cfg.window_samples = 32;
    Rng rng(31);
    ModelParams p = init_model(cfg, rng);
    save_model(p, path);

    std::ifstream is(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    is.close();

    auto write_bytes = [&](const std::string& data) {
        std::ofstream os(path, std::ios::binary);
        os.write(data.data(), static_cast<std::streamsize>(data.size()));
    };

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    write_bytes(bad_magic);
    CHECK_THROWS_AS(load_model(path), FormatError);

    std::string truncated = bytes.substr(0, bytes.size() / 2);
    write_bytes(truncated);
    CHECK_THROWS_AS(load_model(path), FormatError);

    std::string trailing = bytes + "xx";
    write_bytes(trailing);
    CHECK_THROWS_AS(load_model(path), FormatError);
    fs::remove(path);
}

TEST_CASE("model config defaults match the published architecture") {
    ModelConfig cfg;
    CHECK(cfg.n_channels == 32);
    CHECK(cfg.sample_rate == 500.0);
    CHECK(cfg.temporal_kernels == 32);
    CHECK(cfg.temporal_len == 64);
    CHECK(cfg.depth_multiplier == 2);
    CHECK(cfg.spatial_maps() == 64);
    CHECK(cfg.sep_len == 16);
    CHECK(cfg.pool1 == 4);
    CHECK(cfg.pool2 == 8);
    CHECK(cfg.hidden == 64);
    CHECK(cfg.classes == 2);
    CHECK(cfg.dropout_p == 0.25);
}
