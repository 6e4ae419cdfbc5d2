#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "korobov/interpolet.hpp"
#include "oracles.hpp"

using namespace korobov;

TEST_CASE("integer values and support") {
    const auto t = build_interpolet_table(8);
    for (int k = -5; k <= 5; ++k) CHECK(t.at(k, 0) == (k == 0 ? 1.0 : 0.0));
    const std::int64_t h = t.half_width();
    CHECK(t.at(h + 1) == 0.0);
    CHECK(t.at(-h - 7) == 0.0);
    CHECK(t.values().front() == 0.0);
    CHECK(t.values().back() == 0.0);
    CHECK(interpolet_eval(0.0, 12) == 1.0);
    CHECK(interpolet_eval(4.0, 12) == 0.0);
    CHECK(interpolet_eval(-3.5, 12) == 0.0);
    CHECK(interpolet_eval(0.5, 1) == 9.0 / 16.0);
    CHECK(interpolet_eval(0.5, 12) == 9.0 / 16.0);
}

TEST_CASE("each refinement step is local cubic interpolation of the coarser values") {
    auto t = DyadicValueTable();
    for (int depth = 0; depth < 6; ++depth) {
        const auto next = refine(t);
        const std::int64_t h = next.half_width();
        for (std::int64_t k = -h - 4; k <= h + 4; ++k) {
            if (k % 2 == 0) {
                CHECK(next.at(k) == t.at(k / 2));
                continue;
            }
            const std::int64_t c = (k - 1) / 2;
            std::vector<double> xs, ys;
            for (std::int64_t o = c - 1; o <= c + 2; ++o) {
                xs.push_back(static_cast<double>(o));
                ys.push_back(t.at(o));
            }
            CHECK(next.at(k) == doctest::Approx(oracle::lagrange(xs, ys, static_cast<double>(c) + 0.5)).epsilon(1e-14));
        }
        t = next;
    }
}

TEST_CASE("asymmetric rule differs from the symmetric one") {
    const auto s = build_interpolet_table(3, RefinementRule::Symmetric);
    const auto a = build_interpolet_table(3, RefinementRule::Asymmetric);
    double diff = 0.0;
    for (std::int64_t k = -s.half_width(); k <= s.half_width(); ++k) diff = std::max(diff, std::abs(s.at(k) - a.at(k)));
    CHECK(diff > 1e-3);
}

TEST_CASE("stencil on single basis functions") {
    const int depth = 12;
    for (int l = 1; l <= 4; ++l) {
        for (std::int64_t i = 1; i < (1 << l); i += 2) {
            for (int lt = 1; lt <= 4; ++lt) {
                for (std::int64_t it = 1; it < (1 << lt); it += 2) {
                    auto u = [&](double x) { return interpolet_basis_eval(lt, it, x, depth); };
                    const double expect = (l == lt && i == it) ? 1.0 : 0.0;
                    CHECK(stencil_apply(u, l, i) == doctest::Approx(expect).epsilon(1e-12));
                }
            }
        }
    }
    CHECK(stencil_apply([](double) { return 0.0; }, 3, 5) == 0.0);
}

TEST_CASE("zero-outside boundary breaks annihilation next to the boundary") {
    auto u = [](double x) { return interpolet_basis_eval(1, 1, x, 12); };
    CHECK(stencil_apply(u, 3, 1, StencilBoundary::Natural) == doctest::Approx(0.0));
    CHECK(std::abs(stencil_apply(u, 3, 1, StencilBoundary::ZeroOutside)) > 1e-3);
}

TEST_CASE("stencil recovers random interpolet expansions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int d = 1; d <= 2; ++d) {
        const int n = d == 1 ? 5 : 4;
        std::vector<std::pair<LevelIndex, double>> entries;
        for (const auto& li : enumerate_indices(d, n)) entries.emplace_back(li, u(rng));
        const auto g = SparseGridInterpolant::from_surpluses(d, n, Mother::InterpoletL2, entries, 12);
        const Evaluator ev = [&](std::span<const double> x) { return g.evaluate(x); };
        for (const auto& [li, v] : entries) {
            const double r = stencil_apply(ev, li);
            CHECK(std::abs(r - v) <= 1e-8);
        }
    }
}

TEST_CASE("stencil magnitude is bounded by 5^d sup|u|") {
    const Evaluator u = [](std::span<const double> x) { return std::cos(7.0 * x[0]) * std::sin(5.0 * x[1] + 1.0); };
    for (const auto& li : enumerate_indices(2, 4)) CHECK(std::abs(stencil_apply(u, li)) <= 25.0);
}
