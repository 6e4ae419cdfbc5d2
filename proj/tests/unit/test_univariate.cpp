#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "korobov/hierarchy.hpp"
#include "korobov/univariate.hpp"

using namespace korobov;

namespace {

const Activation kRelu = Activation::plain(ActivationKind::ReLU);

// Max |f - g| over n uniform points of [a, b] plus every breakpoint +- 1e-9.
double dense_error(const Fn1& f, const Fn1& g, double a, double b, const std::vector<double>& extra = {},
                   int n = 100000) {
    double worst = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double x = a + (b - a) * k / n;
        worst = std::max(worst, std::abs(f(x) - g(x)));
    }
    for (double x0 : extra) {
        for (double x : {x0 - 1e-9, x0, x0 + 1e-9}) {
            if (x >= a && x <= b) worst = std::max(worst, std::abs(f(x) - g(x)));
        }
    }
    return worst;
}

// Breakpoints jittered inside equal cells of [-1, 1] so that gaps stay above
// half a cell; values in [-1, 1], outer slopes in [-3, 3].
PiecewiseAffine random_pwl(std::mt19937_64& rng, int pieces) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    if (pieces == 1) return PiecewiseAffine::affine(u(rng), u(rng), 3.0 * u(rng));
    const int nb = pieces - 1;
    const double cell = 2.0 / nb;
    PiecewiseAffine p;
    for (int k = 0; k < nb; ++k) {
        p.breakpoints.push_back(-1.0 + cell * (k + 0.5 + 0.25 * u(rng)));
        p.values.push_back(u(rng));
    }
    p.left_slope = 3.0 * u(rng);
    p.right_slope = 3.0 * u(rng);
    return p;
}

}  // namespace

TEST_CASE("piecewise-affine evaluation and construction") {
    const auto p = PiecewiseAffine::from_nodes({0.0, 1.0, 3.0}, {0.0, 2.0, 0.0}, Extension::Constant, Extension::Linear);
    CHECK(p.pieces() == 3);
    CHECK(p(-5.0) == 0.0);
    CHECK(p(0.5) == doctest::Approx(1.0));
    CHECK(p(2.0) == doctest::Approx(1.0));
    CHECK(p(4.0) == doctest::Approx(-1.0));
    CHECK(p.slope(0) == 0.0);
    CHECK(p.slope(1) == doctest::Approx(2.0));
    CHECK(p.slope(2) == doctest::Approx(-1.0));
    CHECK_THROWS(PiecewiseAffine::from_nodes({0.0, 0.0}, {1.0, 2.0}, Extension::Linear, Extension::Linear));
}

TEST_CASE("ReLU conversion examples") {
    // Hat phi_{2,1}: zero, rising, falling, zero.
    const auto hat = PiecewiseAffine::from_nodes({0.0, 0.25, 0.5}, {0.0, 1.0, 0.0}, Extension::Constant, Extension::Constant);
    REQUIRE(hat.pieces() == 4);
    const auto g = pwl_to_relu(hat);
    CHECK(g.neurons() == 4);
    CHECK(g.eval(0.25, kRelu) == doctest::Approx(1.0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    for (int k = 0; k < 10000; ++k) {
        const double x = u(rng);
        const double expect = hat_eval(4.0 * x - 1.0);
        CHECK(std::abs(g.eval(x, kRelu) - expect) <= 1e-12);
    }

    const auto id = pwl_to_relu(PiecewiseAffine::affine(0.0, 0.0, 1.0));
    CHECK(id.neurons() == 2);
    for (double x : {-3.0, -0.5, 0.0, 0.7, 9.0}) CHECK(id.eval(x, kRelu) == doctest::Approx(x));

    PiecewiseAffine absval;
    absval.breakpoints = {0.0};
    absval.values = {0.0};
    absval.left_slope = -1.0;
    absval.right_slope = 1.0;
    const auto a = pwl_to_relu(absval);
    CHECK(a.neurons() == 2);
    CHECK(a.units[0].weight == doctest::Approx(1.0));  // -w0 with w0 = -1
    CHECK(a.units[1].weight == doctest::Approx(1.0));
    for (double x : {-2.0, -0.1, 0.0, 0.3, 5.0}) CHECK(a.eval(x, kRelu) == doctest::Approx(std::abs(x)));
}

TEST_CASE("ReLU conversion is exact for random piecewise-affine functions") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> pieces(1, 64);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = pieces(rng);
        const auto p = random_pwl(rng, m);
        const auto g = pwl_to_relu(p);
        CHECK(g.neurons() == std::max(m, 2));
        const NetSpec net = g.to_net(kRelu);
        double worst = 0.0;
        for (int k = 0; k <= 10000; ++k) {
            const double x = -2.0 + 4.0 * k / 10000.0;
            worst = std::max(worst, std::abs(g.eval(x, kRelu) - p(x)));
        }
        for (int k = 0; k < 10000; ++k) {
            const double x = u(rng);
            const double xs[1] = {x};
            worst = std::max(worst, std::abs(net.eval(xs) - p(x)));
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("level-set subdivision of increasing functions") {
    const Fn1 id = [](double x) { return x; };
    const auto p = approx_increasing(id, 0.0, 1.0, 0.0, 1.0, 0.25);
    CHECK(p.pieces() == 4);
    CHECK(dense_error(id, p, 0.0, 1.0, p.breakpoints) <= 0.25 + 1e-12);

    for (double eps : {0.1, 0.03, 0.007}) {
        const Fn1 e = [](double x) { return std::exp(x); };
        const auto q = approx_increasing(e, std::log(eps), 0.0, eps, 1.0, eps);
        CHECK(q.pieces() <= static_cast<std::int64_t>(std::ceil((1.0 - eps) / eps)));
        CHECK(dense_error(e, q, std::log(eps), 0.0, q.breakpoints) <= eps + 1e-12);
    }

    const Fn1 cube = [](double x) { return x * x * x; };
    const auto r = approx_increasing(cube, -1.0, 1.0, -1.0, 1.0, 0.3);
    CHECK(r.pieces() == static_cast<std::int64_t>(std::ceil(2.0 / 0.3)));
    CHECK(dense_error(cube, r, -1.0, 1.0, r.breakpoints) <= 0.3 + 1e-12);
    for (std::size_t k = 0; k < r.breakpoints.size(); ++k) {
        CHECK(std::abs(r.values[k] - cube(r.breakpoints[k])) <= 1e-12);
    }

    const Fn1 flat = [](double) { return 0.5; };
    const auto c = approx_increasing(flat, 0.0, 1.0, 0.5, 0.5, 0.1);
    CHECK(c.pieces() == 1);
    CHECK(dense_error(flat, c, 0.0, 1.0) == 0.0);

    const Fn1 bumpy = [](double x) { return std::sin(6.0 * x); };
    CHECK_THROWS_AS(approx_increasing(bumpy, 0.0, 1.0, -1.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("uniform C2 subdivision") {
    const Fn1 sq = [](double x) { return x * x; };
    const Fn1 two = [](double) { return 2.0; };
    const auto p = approx_c2_uniform(sq, two, 0.0, 1.0, 0.02, 2.0);
    CHECK(p.pieces() == 8);
    CHECK(dense_error(sq, p, 0.0, 1.0, p.breakpoints) <= 0.02);
    // Chord error of a parabola on a piece of width h is h^2 / 8 * f''.
    const double h = 1.0 / 8.0;
    for (int k = 0; k < 8; ++k) {
        double worst = 0.0;
        for (int q = 0; q <= 2000; ++q) {
            const double x = h * (k + q / 2000.0);
            worst = std::max(worst, std::abs(sq(x) - p(x)));
        }
        CHECK(std::abs(worst - h * h / 8.0 * 2.0) <= 1e-10);
    }
    const auto sampled = approx_c2_uniform(sq, two, 0.0, 1.0, 0.02);
    CHECK(sampled.pieces() == static_cast<std::int64_t>(std::ceil(std::sqrt(2.2) / std::sqrt(0.04))));

    const Fn1 aff = [](double x) { return 3.0 * x - 1.0; };
    const Fn1 zero = [](double) { return 0.0; };
    const auto a = approx_c2_uniform(aff, zero, 0.0, 1.0, 1e-3);
    CHECK(a.pieces() == 1);
    CHECK(dense_error(aff, a, 0.0, 1.0) <= 1e-15);

    for (double eps : {0.1, 0.01, 1e-3}) {
        const auto e = approx_exp_negative(eps);
        const std::int64_t expect = 1 + static_cast<std::int64_t>(std::ceil(std::log(1.0 / eps) / std::sqrt(2.0 * eps)));
        CHECK(e.pieces() == expect);
        CHECK(exp_negative_pieces(eps) == expect);
        const Fn1 ex = [](double x) { return std::exp(x); };
        CHECK(dense_error(ex, e, -30.0, 0.0, e.breakpoints, 300000) <= eps);
    }
}

TEST_CASE("Riemann-partition C2 subdivision") {
    const Fn1 sq = [](double x) { return x * x; };
    const Fn1 two = [](double) { return 2.0; };
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const auto r = approx_c2_riemann(sq, two, 0.0, 1.0, eps, 0.2);
        const auto u = approx_c2_uniform(sq, two, 0.0, 1.0, eps, 2.0);
        CHECK(r.p.pieces() <= u.pieces());
        CHECK(dense_error(sq, r.p, 0.0, 1.0, r.p.breakpoints) <= eps);
    }
    const Fn1 ex = [](double x) { return std::exp(x); };
    const double eps = 1e-4, mu = 0.1;
    const auto r = approx_c2_riemann(ex, ex, -5.0, 0.0, eps, mu);
    const double integral = 2.0 * (1.0 - std::exp(-2.5));
    CHECK(r.integral == doctest::Approx(integral).epsilon(1e-8));
    const auto u = approx_c2_uniform(ex, ex, -5.0, 0.0, eps, 1.0);
    CHECK(r.p.pieces() < u.pieces());
    CHECK(static_cast<double>(r.p.pieces()) <= integral * (1.0 + mu) / std::sqrt(2.0 * eps) + r.cells);
    CHECK(dense_error(ex, r.p, -5.0, 0.0, r.p.breakpoints) <= eps);

    const Fn1 aff = [](double x) { return 1.0 - x; };
    const Fn1 zero = [](double) { return 0.0; };
    CHECK(approx_c2_riemann(aff, zero, 0.0, 2.0, 1e-3, 0.5).p.pieces() == 1);
}

TEST_CASE("truncated logarithm") {
    const double delta = 0.1, eps = 1e-3;
    const auto p = approx_log_truncated(delta, eps);
    CHECK(p(delta) == std::log(delta));
    CHECK(p(0.0) == std::log(delta));
    const Fn1 lg = [](double x) { return std::log(x); };
    CHECK(dense_error(lg, p, delta, 1.0, p.breakpoints, 1000000) <= eps);
    const std::int64_t expect = 1 + static_cast<std::int64_t>(std::ceil(std::log(1.0 / delta) / std::log(1.0 + std::sqrt(2.0 * eps))));
    CHECK(p.pieces() == expect);
    CHECK(log_truncated_pieces(delta, eps) == expect);
    CHECK(static_cast<double>(p.pieces()) <= std::log(1.0 / delta) / std::sqrt(eps) + 2.0);
    // Chords of the concave logarithm stay below it.
    for (int k = 0; k <= 1000; ++k) {
        const double x = delta + (1.0 - delta) * k / 1000.0;
        CHECK(p(x) <= std::log(x) + 1e-15);
    }
}

TEST_CASE("log of a hat function") {
    const double t0 = 0.01, eps = 1e-3;
    for (int l = 1; l <= 3; ++l) {
        for (std::int64_t i = 1; i < (1 << l); i += 2) {
            const auto p = approx_log_hat(l, i, t0, eps);
            CHECK(p.pieces() == log_hat_pieces(t0, eps));
            const Fn1 target = [&](double x) {
                return std::max(std::log(std::max(hat_eval(std::ldexp(x, l) - static_cast<double>(i)), 1e-300)), std::log(t0));
            };
            CHECK(dense_error(target, p, 0.0, 1.0, p.breakpoints) <= eps);
        }
    }
    const double e0 = std::log(1.0 + std::sqrt(2.0 * eps));
    CHECK(log_hat_pieces(t0, eps) == 2 + 2 * static_cast<std::int64_t>(std::ceil(std::log(1.0 / t0) / e0)));
}

TEST_CASE("Heaviside step sums") {
    const Fn1 id = [](double x) { return x; };
    const auto s = approx_increasing_heaviside(id, 0.0, 1.0, 0.0, 1.0, 0.25, ActivationKind::Heaviside);
    CHECK(s.fragment.neurons() == 3);
    std::vector<double> taus;
    for (const auto& u : s.fragment.units) taus.push_back(-u.offset / u.slope);
    double worst = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double x = k / 100000.0;
        bool near = false;
        for (double t : taus) near = near || std::abs(x - t) < 1e-9;
        if (!near) worst = std::max(worst, std::abs(s.fragment.eval(x, s.act) - x));
    }
    CHECK(worst <= 0.25 + 1e-12);

    const Fn1 flat = [](double) { return 2.0; };
    CHECK(approx_increasing_heaviside(flat, 0.0, 1.0, 2.0, 2.0, 0.1, ActivationKind::Heaviside).fragment.neurons() == 0);

    const double eps = 0.05;
    const auto g = approx_increasing_heaviside(id, 0.0, 1.0, 0.0, 1.0, eps, ActivationKind::Logistic);
    CHECK(g.act.kind == ActivationKind::ScaledSigmoidLike);
    CHECK(g.fragment.neurons() <= static_cast<std::int64_t>(2.0 / eps));
    const Fn1 net = [&](double x) { return g.fragment.eval(x, g.act); };
    CHECK(dense_error(id, net, 0.0, 1.0) <= 2.0 * eps);
}

TEST_CASE("step approximants used by the sigmoid-like construction") {
    const Activation heav = Activation::scaled_sigmoid(ActivationKind::Heaviside, 1.0);
    const double t0 = 0.02, step = 0.01;
    const auto g = log_hat_steps(2, 3, t0, step);
    CHECK(g.neurons() == g.formula_count);
    double worst = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double x = k / 100000.0;
        const double target = std::max(std::log(std::max(hat_eval(4.0 * x - 3.0), 1e-300)), std::log(t0));
        worst = std::max(worst, std::abs(g.eval(x, heav) - target));
    }
    CHECK(worst <= step + 1e-12);

    const auto e = exp_negative_steps(0.02);
    CHECK(e.neurons() == 49);
    worst = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double x = -20.0 + 20.0 * k / 100000.0;
        worst = std::max(worst, std::abs(e.eval(x, heav) - std::exp(x)));
    }
    CHECK(worst <= 0.02 + 1e-12);
}
