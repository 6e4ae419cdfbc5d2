#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "korobov/hierarchy.hpp"
#include "oracles.hpp"

using namespace korobov;

namespace {

double px(std::span<const double> x) {
    double v = 1.0;
    for (double t : x) v *= 4.0 * t * (1.0 - t);
    return v;
}

}  // namespace

TEST_CASE("hat and basis evaluation") {
    CHECK(hat_eval(0.0) == 1.0);
    CHECK(hat_eval(1.5) == 0.0);
    CHECK(hat_eval(0.25) == 0.75);
    CHECK(hat_eval(-0.25) == 0.75);

    const std::vector<double> c{0.5, 0.5};
    CHECK(basis_eval(LevelIndex{{1, 1}, {1, 1}}, c) == 1.0);
    const std::vector<double> q{0.25};
    CHECK(basis_eval(LevelIndex{{2}, {1}}, q) == 1.0);
    const std::vector<double> r{0.375};
    CHECK(basis_eval(LevelIndex{{2}, {1}}, r) == doctest::Approx(1.0 - std::abs(4.0 * 0.375 - 1.0)));
}

TEST_CASE("index validity") {
    CHECK(LevelIndex{{2}, {3}}.valid());
    CHECK_FALSE(LevelIndex{{2}, {2}}.valid());
    CHECK_FALSE(LevelIndex{{2}, {5}}.valid());
    CHECK_FALSE(LevelIndex{{0}, {1}}.valid());
    CHECK_FALSE(LevelIndex{{1, 1}, {1}}.valid());
}

TEST_CASE("enumeration examples") {
    const auto a = enumerate_indices(1, 2);
    REQUIRE(a.size() == 3);
    CHECK(a[0] == LevelIndex{{1}, {1}});
    CHECK(a[1] == LevelIndex{{2}, {1}});
    CHECK(a[2] == LevelIndex{{2}, {3}});

    const auto b = enumerate_indices(2, 1);
    REQUIRE(b.size() == 1);
    CHECK(b[0] == LevelIndex{{1, 1}, {1, 1}});

    CHECK(enumerate_indices(2, 3).size() == 17);
    CHECK_THROWS(enumerate_indices(0, 2));
    CHECK_THROWS(enumerate_indices(2, 0));
}

TEST_CASE("enumeration is canonical, valid, filtered and matches both count formulas") {
    for (int d = 1; d <= 5; ++d) {
        for (int n = 1; n <= 8; ++n) {
            const auto idx = enumerate_indices(d, n);
            CHECK(idx.size() == count_indices(d, n));
            CHECK(static_cast<std::int64_t>(count_indices(d, n)) == oracle::count_closed_form(d, n));
            for (std::size_t k = 0; k < idx.size(); ++k) {
                CHECK(idx[k].valid());
                CHECK(idx[k].level_sum() <= n + d - 1);
                if (k > 0) CHECK(canonical_less(idx[k - 1], idx[k]));
            }
        }
    }
}

TEST_CASE("count examples and overflow") {
    CHECK(count_indices(2, 3) == 17);
    CHECK(count_indices(1, 5) == 31);
    CHECK(count_indices(3, 1) == 1);
    CHECK_THROWS_AS(count_indices(64, 30), std::overflow_error);
    CHECK(checked_binomial(10, 3) == 120);
    CHECK(checked_binomial(62, 31) == oracle::binom(62, 31));
    CHECK_THROWS_AS(checked_binomial(200, 100), std::overflow_error);
}

TEST_CASE("error bound") {
    const double s = 3.0;
    CHECK(bound_factor(2, 3) == 5);
    CHECK(error_bound(2, 3, s) == doctest::Approx(5.0 * s / 2048.0));
    for (int n = 1; n <= 6; ++n) CHECK(error_bound(1, n, s) == doctest::Approx(s / 4.0 * std::pow(4.0, -n)));
    CHECK(error_bound(3, 4, 0.0) == 0.0);
}

TEST_CASE("select level") {
    CHECK(select_level(1, ErrorBudget::make(0.5, 2.0)) == 1);
    CHECK(select_level(1, ErrorBudget::make(0.03125, 2.0)) == 3);
    CHECK(select_level(3, ErrorBudget::make(2.0 * error_bound(3, 1, 5.0), 5.0)) == 1);
    CHECK(select_level(2, ErrorBudget::make(1e-3, 0.0)) == 1);
    CHECK_THROWS_AS(select_level(1, ErrorBudget::make(1e-30, 1.0), 5), std::runtime_error);
    const auto b = ErrorBudget::make(0.1, 4.0);
    CHECK(b.eps_tilde == doctest::Approx(0.1 / 8.0));
    CHECK_THROWS(ErrorBudget::make(0.0, 1.0));
}

TEST_CASE("hierarchization examples") {
    const Evaluator f = [](std::span<const double> x) { return x[0] * (1.0 - x[0]); };
    const auto g = hierarchize_hat(f, 1, 2);
    CHECK(g.surplus(LevelIndex{{1}, {1}}) == doctest::Approx(0.25));
    CHECK(g.surplus(LevelIndex{{2}, {1}}) == doctest::Approx(0.0625));
    CHECK(g.surplus(LevelIndex{{2}, {3}}) == doctest::Approx(0.0625));
    const std::vector<double> q{0.25};
    CHECK(interpolant_eval(g, q) == doctest::Approx(0.1875));

    const auto z = hierarchize_hat([](std::span<const double>) { return 0.0; }, 2, 3);
    CHECK(z.abs_sum() == 0.0);
    const SparseGridInterpolant empty(2, 3);
    const std::vector<double> p{0.3, 0.7};
    CHECK(interpolant_eval(empty, p) == 0.0);

    CHECK_THROWS_AS(g.surplus(LevelIndex{{3}, {1}}), std::out_of_range);
}

TEST_CASE("stencil annihilation: a single basis function yields an indicator") {
    for (int d = 1; d <= 3; ++d) {
        const int n = 4 - (d == 3 ? 1 : 0);
        for (const auto& target : enumerate_indices(d, n)) {
            const auto g = hierarchize_hat([&](std::span<const double> x) { return basis_eval(target, x); }, d, n);
            for (const auto& [li, v] : g.entries()) {
                CHECK(v == doctest::Approx(li == target ? 1.0 : 0.0).epsilon(1e-12));
            }
        }
    }
    const std::vector<double> c{0.5, 0.5};
    const LevelIndex root{{1, 1}, {1, 1}};
    const auto g = hierarchize_hat([&](std::span<const double> x) { return basis_eval(root, x); }, 2, 2);
    CHECK(g.evaluate(c) == 1.0);
}

TEST_CASE("hierarchization agrees with the interpolation-system oracle") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int d = 1; d <= 3; ++d) {
        const int n = d == 3 ? 3 : 4;
        const auto idx = enumerate_indices(d, n);
        const double a = u(rng), b = u(rng);
        const Evaluator f = [&](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) s += std::sin(3.0 * x[j] + a * static_cast<double>(j)) * x[j];
            return s + b * px(x);
        };
        const auto g = hierarchize_hat(f, d, n);
        const auto nodes = g.nodes();
        const std::size_t m = idx.size();
        std::vector<double> mat(m * m), rhs(m);
        for (std::size_t p = 0; p < m; ++p) {
            rhs[p] = f(nodes[p]);
            for (std::size_t q = 0; q < m; ++q) mat[p * m + q] = basis_eval(idx[q], nodes[p]);
        }
        const auto v = oracle::solve(mat, rhs);
        for (std::size_t q = 0; q < m; ++q) CHECK(g.surplus(idx[q]) == doctest::Approx(v[q]).epsilon(1e-10));
        for (std::size_t p = 0; p < m; ++p) CHECK(std::abs(g.evaluate(nodes[p]) - rhs[p]) <= 1e-12);
    }
}

TEST_CASE("evaluation matches direct summation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int d = 3, n = 4;
    const auto g = hierarchize_hat(px, d, n);
    const auto entries = g.entries();
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x{u(rng), u(rng), u(rng)};
        double direct = 0.0;
        for (const auto& [li, v] : entries) direct += v * basis_eval(li, x);
        CHECK(g.evaluate(x) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("coefficient bounds") {
    const Evaluator f = [](std::span<const double> x) { return x[0] * (1.0 - x[0]); };
    const auto r = coeff_bound_check(hierarchize_hat(f, 1, 2), 2.0);
    CHECK(r.all_within);
    CHECK(r.bounds[0] == doctest::Approx(0.25));
    CHECK(r.bounds[1] == doctest::Approx(0.0625));
    CHECK(r.max_ratio == doctest::Approx(1.0));
    CHECK(coeff_bound_check(SparseGridInterpolant(2, 3), 1.0).all_within);

    for (int d = 1; d <= 3; ++d) {
        const auto rp = coeff_bound_check(hierarchize_hat(px, d, 5), std::pow(8.0, d));
        CHECK(rp.all_within);
        CHECK(rp.abs_sum_within);
        const Evaluator sd = [](std::span<const double> x) {
            double v = 1.0;
            for (double t : x) v *= std::sin(std::numbers::pi * t);
            return v;
        };
        const auto rs = coeff_bound_check(hierarchize_hat(sd, d, 5), std::pow(std::numbers::pi, 2 * d));
        CHECK(rs.all_within);
        CHECK(rs.abs_sum_within);
    }
}

TEST_CASE("boundary detection") {
    CHECK(boundary_max_abs(px, 3) == 0.0);
    const Evaluator one = [](std::span<const double>) { return 1.0; };
    CHECK(boundary_max_abs(one, 2) == 1.0);
}
