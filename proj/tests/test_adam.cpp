#include <doctest.h>

#include <cmath>

#include "aad/adam.hpp"

using namespace aad;

TEST_CASE("adam: zero gradient and zero decay leave parameters unchanged") {
    ArrayX p(3);
    p << 1.0, -2.0, 0.5;
    ArrayX g = ArrayX::Zero(3);
    AdamMoments m = AdamMoments::zeros(3);
    AdamHyper hp;
    ArrayX before = p;
    adam_step(p, g, m, 1, hp);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(p[i] == before[i]);
}

TEST_CASE("adam: hand-stepped single scalar") {
    // w=1, g=1, lr=1e-3, t=1: m_hat = 1, v_hat = 1, update = lr/(1+eps)
    ArrayX p(1);
    p << 1.0;
    ArrayX g(1);
    g << 1.0;
    AdamMoments m = AdamMoments::zeros(1);
    AdamHyper hp;  // lr 1e-3, betas 0.9/0.999, eps 1e-8
    adam_step(p, g, m, 1, hp);
    CHECK(p[0] == doctest::Approx(0.999).epsilon(1e-7));
    CHECK(m.m[0] == doctest::Approx(0.1));
    CHECK(m.v[0] == doctest::Approx(0.001));
}

TEST_CASE("adam: pure decoupled decay") {
    ArrayX p(1);
    p << 1.0;
    ArrayX g = ArrayX::Zero(1);
    AdamMoments m = AdamMoments::zeros(1);
    AdamHyper hp;
    hp.lr = 1e-3;
    hp.weight_decay = 1e-2;
    adam_step(p, g, m, 1, hp);
    CHECK(p[0] == doctest::Approx(0.99999).epsilon(1e-12));
}

TEST_CASE("adam: non-finite gradient aborts with a diagnostic") {
    ArrayX p = ArrayX::Ones(2);
    ArrayX g(2);
    g << 1.0, std::nan("");
    AdamMoments m = AdamMoments::zeros(2);
    AdamHyper hp;
    CHECK_THROWS_AS(adam_step(p, g, m, 1, hp, "w_fc1"), NumericError);
    try {
        adam_step(p, g, m, 1, hp, "w_fc1");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("w_fc1") != std::string::npos);
    }
}

TEST_CASE("adam: shape mismatch and bad step index are rejected") {
    ArrayX p = ArrayX::Ones(2);
    ArrayX g = ArrayX::Ones(3);
    AdamMoments m = AdamMoments::zeros(2);
    AdamHyper hp;
    CHECK_THROWS_AS(adam_step(p, g, m, 1, hp), ShapeError);
    ArrayX g2 = ArrayX::Ones(2);
    CHECK_THROWS_AS(adam_step(p, g2, m, 0, hp), ParamError);
}

TEST_CASE("adam: bias correction makes the first step lr-sized for any gradient scale") {
    for (double scale : {1e-4, 1.0, 1e4}) {
        ArrayX p(1);
        p << 0.0;
        ArrayX g(1);
        g << scale;
        AdamMoments m = AdamMoments::zeros(1);
        AdamHyper hp;
        adam_step(p, g, m, 1, hp);
        CHECK(std::abs(p[0] + hp.lr) <= hp.lr * 1e-3);  // step ~= -lr
    }
}
