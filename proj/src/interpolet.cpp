#include "korobov/interpolet.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace korobov {

DyadicValueTable::DyadicValueTable() : depth_(0), values_(7, 0.0) { values_[3] = 1.0; }

double DyadicValueTable::at(std::int64_t k) const {
    const std::int64_t h = half_width();
    if (k < -h || k > h) return 0.0;
    return values_[static_cast<std::size_t>(k + h)];
}

double DyadicValueTable::at(std::int64_t k, int level) const {
    if (level < 0 || level > depth_) throw std::invalid_argument("DyadicValueTable::at: level out of range");
    return at(k * (std::int64_t{1} << (depth_ - level)));
}

class DyadicRefiner {
public:
    static DyadicValueTable step(const DyadicValueTable& t, RefinementRule rule) {
        DyadicValueTable out;
        out.depth_ = t.depth_ + 1;
        const std::int64_t h = out.half_width();
        out.values_.assign(static_cast<std::size_t>(2 * h + 1), 0.0);
        for (std::int64_t k = -h; k <= h; ++k) {
            double v = 0.0;
            if (k % 2 == 0) {
                v = t.at(k / 2);
            } else {
                const std::int64_t c = (k - 1) / 2;  // floor for odd k
                if (rule == RefinementRule::Symmetric) {
                    v = 9.0 / 16.0 * (t.at(c) + t.at(c + 1)) - 1.0 / 16.0 * (t.at(c - 1) + t.at(c + 2));
                } else {
                    v = 9.0 / 16.0 * (t.at(c) + t.at(c + 1)) - 1.0 / 16.0 * (t.at(c - 2) + t.at(c + 3));
                }
            }
            out.values_[static_cast<std::size_t>(k + h)] = v;
        }
        return out;
    }
};

DyadicValueTable refine(const DyadicValueTable& table, RefinementRule rule) {
    if (table.depth() >= kMaxInterpoletDepth) {
        throw std::invalid_argument("refine: depth cap reached");
    }
    return DyadicRefiner::step(table, rule);
}

DyadicValueTable build_interpolet_table(int depth, RefinementRule rule) {
    if (depth < 0 || depth > kMaxInterpoletDepth) {
        throw std::invalid_argument("build_interpolet_table: depth must be in [0, 20]");
    }
    DyadicValueTable t;
    for (int j = 0; j < depth; ++j) t = refine(t, rule);
    return t;
}

namespace {

const DyadicValueTable& shared_table(int depth) {
    static std::array<std::unique_ptr<DyadicValueTable>, kMaxInterpoletDepth + 1> cache;
    static std::array<std::once_flag, kMaxInterpoletDepth + 1> once;
    if (depth < 0 || depth > kMaxInterpoletDepth) {
        throw std::invalid_argument("interpolet_eval: depth must be in [0, 20]");
    }
    std::call_once(once[static_cast<std::size_t>(depth)], [depth] {
        cache[static_cast<std::size_t>(depth)] =
            std::make_unique<DyadicValueTable>(build_interpolet_table(depth));
    });
    return *cache[static_cast<std::size_t>(depth)];
}

}  // namespace

double interpolet_eval(double x, int depth) {
    const DyadicValueTable& t = shared_table(depth);
    if (!(std::abs(x) < 3.0 + std::ldexp(1.0, -depth))) return 0.0;
    const auto k = static_cast<std::int64_t>(std::llround(std::ldexp(x, depth)));
    return t.at(k);
}

double interpolet_basis_eval(int level, std::int64_t position, double x, int depth) {
    return interpolet_eval(std::ldexp(x, level) - static_cast<double>(position), depth);
}

namespace {

constexpr std::array<int, 5> kOffsets{0, -1, 1, -3, 3};
constexpr std::array<double, 5> kWeights{1.0, -9.0 / 16.0, -9.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0};

}  // namespace

double stencil_apply(const Evaluator& u, const LevelIndex& li, StencilBoundary boundary) {
    if (!li.valid()) throw std::invalid_argument("stencil_apply: invalid index " + to_string(li));
    const int d = li.dimension();
    std::vector<int> cursor(d, 0);
    std::vector<double> x(d);
    double total = 0.0;
    while (true) {
        double w = 1.0;
        bool outside = false;
        for (int j = 0; j < d; ++j) {
            const auto k = static_cast<std::size_t>(cursor[j]);
            w *= kWeights[k];
            x[j] = std::ldexp(static_cast<double>(li.position[j] + kOffsets[k]), -li.level[j]);
            if (x[j] < 0.0 || x[j] > 1.0) outside = true;
        }
        if (!(outside && boundary == StencilBoundary::ZeroOutside)) total += w * u(x);
        int j = d - 1;
        while (j >= 0 && ++cursor[j] == 5) {
            cursor[j] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return total;
}

double stencil_apply(const std::function<double(double)>& u, int level, std::int64_t position,
                     StencilBoundary boundary) {
    const Evaluator wrapped = [&u](std::span<const double> x) { return u(x[0]); };
    return stencil_apply(wrapped, LevelIndex{{level}, {position}}, boundary);
}

}  // namespace korobov
