#include <doctest.h>

#include <cmath>

#include "gensep/errors.hpp"
#include "gensep/grad_check.hpp"
#include "gensep/mat.hpp"
#include "gensep/optim.hpp"
#include "gensep/rng.hpp"

using namespace gensep;

TEST_SUITE_BEGIN("mat");

TEST_CASE("softplus fixed points and asymptotes") {
  Mat x(1, 3, {0.0, 800.0, -800.0});
  Mat y = softplus(x);
  CHECK(y[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(800.0).epsilon(1e-12));
  CHECK(std::isfinite(y[1]));
  CHECK(y[2] >= 0.0);
  CHECK(y[2] < 1e-300);
  // derivative at -800 underflows to 0
  Mat g = activation_grads(x, Activation::Softplus);
  CHECK(g[2] == doctest::Approx(0.0).epsilon(1e-300));
}

TEST_CASE("softplus positivity and lower bound by identity") {
  Rng rng(11);
  Mat x = Mat::randn(6, 7, 10.0, rng);
  Mat y = softplus(x);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(y[k] > 0.0);
    CHECK(y[k] >= x[k]);
  }
}

TEST_CASE("activation derivatives at zero") {
  Mat zero(2, 2);
  CHECK(activation_grads(zero, Activation::Softplus)[0] == doctest::Approx(0.5));
  CHECK(activation_grads(zero, Activation::Tanh)[0] == doctest::Approx(1.0));
  CHECK(activation_grads(zero, Activation::Sigmoid)[0] == doctest::Approx(0.25));
  Mat ones = activation_grads(zero, Activation::Identity);
  for (std::size_t k = 0; k < ones.size(); ++k) CHECK(ones[k] == 1.0);
}

TEST_CASE("unknown activation kind is a config error") {
  Mat x(1, 1);
  CHECK_THROWS_AS(activation_grads(x, static_cast<Activation>(99)), ConfigError);
  CHECK_THROWS_AS(apply_activation(x, static_cast<Activation>(99)), ConfigError);
}

TEST_CASE("activation derivatives agree with central differences") {
  Rng rng(42);
  for (Activation kind : {Activation::Softplus, Activation::Tanh,
                          Activation::Sigmoid, Activation::Identity}) {
    for (int trial = 0; trial < 20; ++trial) {
      Mat x = Mat::randn(3, 4, 2.0, rng);
      Mat analytic = activation_grads(x, kind);
      // Gradient of sum(act(x)) w.r.t. x equals the elementwise derivative.
      Mat fd = finite_diff_grad(
          [kind](const Mat& m) { return apply_activation(m, kind).sum(); }, x);
      CHECK(grad_rel_error(analytic, fd) <= 1e-4);
    }
  }
}

TEST_CASE("relu derivative matches finite differences away from the kink") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    Mat x = Mat::randn(3, 4, 2.0, rng);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (std::abs(x[k]) < 1e-3) x[k] = 0.5;  // keep probes off the kink
    }
    Mat analytic = activation_grads(x, Activation::Relu);
    Mat fd = finite_diff_grad(
        [](const Mat& m) { return apply_activation(m, Activation::Relu).sum(); },
        x);
    CHECK(grad_rel_error(analytic, fd) <= 1e-4);
  }
}

TEST_CASE("matmul against hand-sized products") {
  Mat a(2, 3, {1, 2, 3, 4, 5, 6});
  Mat b(3, 2, {7, 8, 9, 10, 11, 12});
  Mat c = matmul(a, b);
  CHECK(c(0, 0) == 58);
  CHECK(c(0, 1) == 64);
  CHECK(c(1, 0) == 139);
  CHECK(c(1, 1) == 154);

  // transpose variants must equal explicit transposition
  Rng rng(7);
  Mat p = Mat::randn(4, 6, 1.0, rng);
  Mat q = Mat::randn(4, 5, 1.0, rng);
  Mat r = Mat::randn(3, 6, 1.0, rng);
  CHECK(grad_rel_error(matmul_tn(p, q), matmul(transpose(p), q)) < 1e-14);
  CHECK(grad_rel_error(matmul_nt(p, r), matmul(p, transpose(r))) < 1e-14);
}

TEST_CASE("matmul shape mismatch throws") {
  Mat a(2, 3);
  Mat b(2, 3);
  CHECK_THROWS_AS(matmul(a, b), DimensionError);
}

TEST_CASE("rmsprop single-step hand evaluation") {
  Mat param(1, 1, {0.0});
  Mat grad(1, 1, {1.0});
  RmspropState st(1, 1, 0.001, 0.9, 1e-8);
  rmsprop_step(param, grad, st, Direction::Minimize);
  CHECK(st.mean_sq[0] == doctest::Approx(0.1).epsilon(1e-15));
  // hand evaluation of the update rule
  const double expected = -0.001 * 1.0 / (std::sqrt(0.1) + 1e-8);
  CHECK(param[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(param[0] == doctest::Approx(-0.0031623).epsilon(1e-4));
}

TEST_CASE("rmsprop zero gradient leaves the parameter, decays mean_sq") {
  Mat param(2, 2, {1, 2, 3, 4});
  Mat zero(2, 2);
  RmspropState st(2, 2, 0.001);
  st.mean_sq = Mat(2, 2, 0.5);
  Mat before = param;
  rmsprop_step(param, zero, st, Direction::Minimize);
  for (std::size_t k = 0; k < param.size(); ++k) {
    CHECK(param[k] == before[k]);
    CHECK(st.mean_sq[k] == doctest::Approx(0.45).epsilon(1e-15));
  }
}

TEST_CASE("rmsprop maximize mirrors minimize exactly") {
  Rng rng(3);
  Mat p_min = Mat::randn(3, 3, 1.0, rng);
  Mat p_max = p_min;
  RmspropState st_min(3, 3, 0.01);
  RmspropState st_max(3, 3, 0.01);
  Rng grads(5);
  for (int step = 0; step < 25; ++step) {
    Mat g = Mat::randn(3, 3, 1.0, grads);
    Mat neg_g = g;
    neg_g *= -1.0;
    // maximize on f == minimize on -f: identical trajectories, bitwise
    rmsprop_step(p_max, g, st_max, Direction::Maximize);
    rmsprop_step(p_min, neg_g, st_min, Direction::Minimize);
    for (std::size_t k = 0; k < p_min.size(); ++k) {
      CHECK(p_max[k] == p_min[k]);
    }
  }
}

TEST_CASE("rmsprop shape mismatch throws") {
  Mat param(2, 2);
  Mat grad(2, 3);
  RmspropState st(2, 2, 0.001);
  CHECK_THROWS_AS(rmsprop_step(param, grad, st, Direction::Minimize),
                  DimensionError);
}

TEST_CASE("clip bounds and idempotence") {
  Mat m(1, 3, {0.05, -0.02, 0.005});
  clip_inplace(m, -0.01, 0.01);
  CHECK(m[0] == 0.01);
  CHECK(m[1] == -0.01);
  CHECK(m[2] == 0.005);

  Rng rng(19);
  Mat r = Mat::randn(5, 5, 0.05, rng);
  clip_inplace(r, -0.01, 0.01);
  Mat once = r;
  clip_inplace(r, -0.01, 0.01);
  for (std::size_t k = 0; k < r.size(); ++k) CHECK(r[k] == once[k]);

  Mat bad(1, 1);
  CHECK_THROWS_AS(clip_inplace(bad, 1.0, -1.0), ConfigError);
}

TEST_CASE("finite differences on known gradients") {
  Mat x(2, 1, {1.0, 2.0});
  Mat g = finite_diff_grad(
      [](const Mat& m) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k) acc += m[k] * m[k];
        return acc;
      },
      x);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-8));

  Mat gc = finite_diff_grad([](const Mat&) { return 3.5; }, x);
  CHECK(gc[0] == 0.0);
  CHECK(gc[1] == 0.0);

  Mat zero(3, 1);
  Mat gs = finite_diff_grad([](const Mat& m) { return softplus(m).sum(); }, zero);
  for (std::size_t k = 0; k < gs.size(); ++k) {
    CHECK(gs[k] == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("finite differences reject non-finite function values") {
  Mat x(1, 1, {0.0});
  // probing 0 - h lands on log of a negative number
  CHECK_THROWS_AS(
      finite_diff_grad([](const Mat& m) { return std::log(m[0]); }, x),
      NumericalError);
}

TEST_CASE("rng determinism") {
  Rng a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    double va = a.normal(), vb = b.normal(), vc = c.normal();
    all_equal = all_equal && (va == vb);
    any_diff = any_diff || (va != vc);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_SUITE_END();
