#include "korobov/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "korobov/interpolet.hpp"

namespace korobov {

namespace {

void require_dims(int d, int n, const char* who) {
    if (d < 1 || n < 1) {
        throw std::invalid_argument(std::string(who) + ": requires d >= 1 and n >= 1");
    }
    if (n > kMaxLevel) {
        throw std::invalid_argument(std::string(who) + ": level budget exceeds cap " +
                                    std::to_string(kMaxLevel));
    }
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in count");
    return r;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in count");
    return r;
}

// Reduce (level, position) with even position to the coarsest equivalent odd form.
// Returns level 0 for boundary points 0 and 1.
std::pair<int, std::int64_t> reduce_dyadic(int level, std::int64_t position) {
    if (position == 0 || position == (std::int64_t{1} << level)) return {0, 0};
    while (position % 2 == 0) {
        position /= 2;
        --level;
    }
    return {level, position};
}

}  // namespace

int LevelIndex::level_sum() const { return std::accumulate(level.begin(), level.end(), 0); }

bool LevelIndex::valid() const {
    if (level.empty() || level.size() != position.size()) return false;
    for (std::size_t j = 0; j < level.size(); ++j) {
        const int l = level[j];
        const std::int64_t i = position[j];
        if (l < 1 || l > kMaxLevel) return false;
        if (i < 1 || i > (std::int64_t{1} << l) - 1 || i % 2 == 0) return false;
    }
    return true;
}

bool canonical_less(const LevelIndex& a, const LevelIndex& b) {
    const int sa = a.level_sum();
    const int sb = b.level_sum();
    if (sa != sb) return sa < sb;
    if (a.level != b.level) return a.level < b.level;
    return a.position < b.position;
}

std::string to_string(const LevelIndex& li) {
    std::ostringstream os;
    os << "(l=(";
    for (std::size_t j = 0; j < li.level.size(); ++j) os << (j ? "," : "") << li.level[j];
    os << "),i=(";
    for (std::size_t j = 0; j < li.position.size(); ++j) os << (j ? "," : "") << li.position[j];
    os << "))";
    return os.str();
}

std::string to_string(Mother m) { return m == Mother::Hat ? "hat" : "interpolet2"; }

double hat_eval(double x) { return std::max(0.0, 1.0 - std::abs(x)); }

double basis_eval(const LevelIndex& li, Point x) {
    double value = 1.0;
    for (std::size_t j = 0; j < li.level.size(); ++j) {
        value *= hat_eval(std::ldexp(x[j], li.level[j]) - static_cast<double>(li.position[j]));
        if (value == 0.0) return 0.0;
    }
    return value;
}

std::vector<std::vector<int>> enumerate_levels(int d, int n) {
    require_dims(d, n, "enumerate_levels");
    std::vector<std::vector<int>> out;
    const int max_sum = n + d - 1;
    for (int sum = d; sum <= max_sum; ++sum) {
        // Compositions of `sum` into d positive parts, lexicographic.
        std::vector<int> l(d, 1);
        l[d - 1] = sum - (d - 1);
        std::vector<std::vector<int>> group;
        std::function<void(int, int)> rec = [&](int j, int remaining) {
            if (j == d - 1) {
                l[j] = remaining;
                group.push_back(l);
                return;
            }
            for (int v = 1; v <= remaining - (d - 1 - j); ++v) {
                l[j] = v;
                rec(j + 1, remaining - v);
            }
        };
        rec(0, sum);
        out.insert(out.end(), group.begin(), group.end());
    }
    return out;
}

std::vector<LevelIndex> enumerate_indices(int d, int n) {
    const auto levels = enumerate_levels(d, n);
    std::vector<LevelIndex> out;
    out.reserve(static_cast<std::size_t>(count_indices(d, n)));
    for (const auto& l : levels) {
        std::vector<std::int64_t> i(d, 1);
        while (true) {
            out.push_back(LevelIndex{l, i});
            int j = d - 1;
            while (j >= 0) {
                i[j] += 2;
                if (i[j] < (std::int64_t{1} << l[j])) break;
                i[j] = 1;
                --j;
            }
            if (j < 0) break;
        }
    }
    return out;
}

std::uint64_t checked_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // r * (n - k + i) is divisible by i at every step.
        const unsigned __int128 next = static_cast<unsigned __int128>(r) * (n - k + i) / i;
        if (next > std::numeric_limits<std::uint64_t>::max()) {
            throw std::overflow_error("binomial coefficient overflows 64 bits");
        }
        r = static_cast<std::uint64_t>(next);
    }
    return r;
}

std::uint64_t count_indices(int d, int n) {
    if (d < 1 || n < 1) throw std::invalid_argument("count_indices: requires d >= 1 and n >= 1");
    std::uint64_t total = 0;
    for (int i = 0; i < n; ++i) {
        if (i >= 64) throw std::overflow_error("count_indices: 2^i overflows");
        const std::uint64_t pow2 = std::uint64_t{1} << i;
        const std::uint64_t b = checked_binomial(static_cast<std::uint64_t>(d - 1 + i),
                                                 static_cast<std::uint64_t>(d - 1));
        total = checked_add(total, checked_mul(pow2, b));
    }
    return total;
}

std::uint64_t bound_factor(int d, int n) {
    if (d < 1 || n < 1) throw std::invalid_argument("bound_factor: requires d >= 1 and n >= 1");
    std::uint64_t a = 0;
    for (int k = 0; k < d; ++k) {
        a = checked_add(a, checked_binomial(static_cast<std::uint64_t>(n + d - 1),
                                            static_cast<std::uint64_t>(k)));
    }
    return a;
}

double error_bound(int d, int n, double seminorm) {
    if (seminorm < 0.0) throw std::invalid_argument("error_bound: seminorm must be >= 0");
    const double a = static_cast<double>(bound_factor(d, n));
    return 2.0 * seminorm * std::pow(8.0, -d) * std::ldexp(1.0, -2 * n) * a;
}

std::size_t LevelBlock::offset_of(std::span<const std::int64_t> position) const {
    std::size_t off = 0;
    for (std::size_t j = 0; j < stride.size(); ++j) {
        off += static_cast<std::size_t>((position[j] - 1) / 2) * stride[j];
    }
    return off;
}

std::vector<std::int64_t> LevelBlock::position_at(std::size_t offset) const {
    std::vector<std::int64_t> pos(level.size());
    for (std::size_t j = 0; j < level.size(); ++j) {
        const std::size_t q = offset / stride[j];
        offset -= q * stride[j];
        pos[j] = 2 * static_cast<std::int64_t>(q) + 1;
    }
    return pos;
}

SparseGridInterpolant::SparseGridInterpolant(int d, int n, Mother mother, int interpolet_depth)
    : dim_(d), budget_(n), mother_(mother), interpolet_depth_(interpolet_depth) {
    require_dims(d, n, "SparseGridInterpolant");
    (void)count_indices(d, n);
    for (const auto& l : enumerate_levels(d, n)) {
        LevelBlock block;
        block.level = l;
        block.stride.assign(d, 1);
        for (int j = d - 2; j >= 0; --j) {
            block.stride[j] = block.stride[j + 1] * (std::size_t{1} << (l[j + 1] - 1));
        }
        const std::size_t count = block.stride[0] * (std::size_t{1} << (l[0] - 1));
        block.values.assign(count, 0.0);
        size_ += count;
        block_of_level_.emplace(l, blocks_.size());
        blocks_.push_back(std::move(block));
    }
}

SparseGridInterpolant SparseGridInterpolant::from_surpluses(
    int d, int n, Mother mother, const std::vector<std::pair<LevelIndex, double>>& entries,
    int interpolet_depth) {
    SparseGridInterpolant g(d, n, mother, interpolet_depth);
    for (const auto& [li, v] : entries) g.mutable_surplus(li) = v;
    return g;
}

const LevelBlock* SparseGridInterpolant::find_block(std::span<const int> level) const {
    const auto it = block_of_level_.find(std::vector<int>(level.begin(), level.end()));
    return it == block_of_level_.end() ? nullptr : &blocks_[it->second];
}

double SparseGridInterpolant::surplus(const LevelIndex& li) const {
    if (li.dimension() != dim_ || !li.valid()) {
        throw std::out_of_range("surplus: invalid index " + to_string(li));
    }
    const LevelBlock* b = find_block(li.level);
    if (b == nullptr) throw std::out_of_range("surplus: index outside grid " + to_string(li));
    return b->values[b->offset_of(li.position)];
}

double& SparseGridInterpolant::mutable_surplus(const LevelIndex& li) {
    if (li.dimension() != dim_ || !li.valid()) {
        throw std::out_of_range("surplus: invalid index " + to_string(li));
    }
    const LevelBlock* b = find_block(li.level);
    if (b == nullptr) throw std::out_of_range("surplus: index outside grid " + to_string(li));
    auto& block = blocks_[static_cast<std::size_t>(b - blocks_.data())];
    return block.values[block.offset_of(li.position)];
}

std::vector<std::pair<LevelIndex, double>> SparseGridInterpolant::entries() const {
    std::vector<std::pair<LevelIndex, double>> out;
    out.reserve(size_);
    for (const auto& b : blocks_) {
        for (std::size_t k = 0; k < b.values.size(); ++k) {
            out.emplace_back(LevelIndex{b.level, b.position_at(k)}, b.values[k]);
        }
    }
    return out;
}

double SparseGridInterpolant::abs_sum() const {
    double s = 0.0;
    for (const auto& b : blocks_) {
        for (double v : b.values) s += std::abs(v);
    }
    return s;
}

std::vector<std::vector<double>> SparseGridInterpolant::nodes() const {
    std::vector<std::vector<double>> out;
    out.reserve(size_);
    for (const auto& b : blocks_) {
        for (std::size_t k = 0; k < b.values.size(); ++k) {
            const auto pos = b.position_at(k);
            std::vector<double> x(dim_);
            for (int j = 0; j < dim_; ++j) {
                x[j] = std::ldexp(static_cast<double>(pos[j]), -b.level[j]);
            }
            out.push_back(std::move(x));
        }
    }
    return out;
}

double SparseGridInterpolant::evaluate(Point x) const {
    if (static_cast<int>(x.size()) != dim_) {
        throw std::invalid_argument("interpolant_eval: dimension mismatch");
    }
    return mother_ == Mother::Hat ? evaluate_hat(x) : evaluate_interpolet(x);
}

double SparseGridInterpolant::evaluate_hat(Point x) const {
    double sum = 0.0;
    for (const auto& b : blocks_) {
        double weight = 1.0;
        std::size_t off = 0;
        for (int j = 0; j < dim_ && weight != 0.0; ++j) {
            const int l = b.level[j];
            const double scaled = std::ldexp(x[j], l);
            const std::int64_t max_pos = (std::int64_t{1} << l) - 1;
            std::int64_t i = 2 * static_cast<std::int64_t>(std::floor(scaled / 2.0)) + 1;
            i = std::clamp<std::int64_t>(i, 1, max_pos);
            weight *= hat_eval(scaled - static_cast<double>(i));
            off += static_cast<std::size_t>((i - 1) / 2) * b.stride[j];
        }
        if (weight != 0.0) sum += weight * b.values[off];
    }
    return sum;
}

double SparseGridInterpolant::evaluate_interpolet(Point x) const {
    double sum = 0.0;
    std::vector<std::vector<std::pair<std::size_t, double>>> cand(dim_);
    std::vector<std::size_t> cursor(dim_);
    for (const auto& b : blocks_) {
        bool empty = false;
        for (int j = 0; j < dim_; ++j) {
            cand[j].clear();
            const int l = b.level[j];
            const double scaled = std::ldexp(x[j], l);
            const std::int64_t max_pos = (std::int64_t{1} << l) - 1;
            std::int64_t lo = static_cast<std::int64_t>(std::ceil(scaled - 3.0));
            std::int64_t hi = static_cast<std::int64_t>(std::floor(scaled + 3.0));
            lo = std::max<std::int64_t>(lo, 1);
            hi = std::min(hi, max_pos);
            if (lo % 2 == 0) ++lo;
            for (std::int64_t i = lo; i <= hi; i += 2) {
                const double w = interpolet_basis_eval(l, i, x[j], interpolet_depth_);
                if (w != 0.0) cand[j].emplace_back(static_cast<std::size_t>((i - 1) / 2) * b.stride[j], w);
            }
            if (cand[j].empty()) {
                empty = true;
                break;
            }
        }
        if (empty) continue;
        std::fill(cursor.begin(), cursor.end(), 0);
        while (true) {
            double w = 1.0;
            std::size_t off = 0;
            for (int j = 0; j < dim_; ++j) {
                w *= cand[j][cursor[j]].second;
                off += cand[j][cursor[j]].first;
            }
            sum += w * b.values[off];
            int j = dim_ - 1;
            while (j >= 0 && ++cursor[j] == cand[j].size()) {
                cursor[j] = 0;
                --j;
            }
            if (j < 0) break;
        }
    }
    return sum;
}

double interpolant_eval(const SparseGridInterpolant& g, Point x) { return g.evaluate(x); }

SparseGridInterpolant hierarchize_hat(const Evaluator& f, int d, int n) {
    SparseGridInterpolant g(d, n, Mother::Hat);
    auto& blocks = const_cast<std::vector<LevelBlock>&>(g.blocks());

    // Nodal values.
    std::vector<double> x(d);
    for (auto& b : blocks) {
        for (std::size_t k = 0; k < b.values.size(); ++k) {
            const auto pos = b.position_at(k);
            for (int j = 0; j < d; ++j) x[j] = std::ldexp(static_cast<double>(pos[j]), -b.level[j]);
            b.values[k] = f(x);
        }
    }

    std::map<std::vector<int>, std::size_t> index;
    for (std::size_t k = 0; k < blocks.size(); ++k) index.emplace(blocks[k].level, k);

    std::vector<std::size_t> order(blocks.size());
    for (int dim = 0; dim < d; ++dim) {
        // Finest first along `dim`, so parents still hold values that are
        // nodal along this coordinate when their children read them.
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return blocks[a].level[dim] > blocks[b].level[dim];
        });
        for (std::size_t bi : order) {
            auto& b = blocks[bi];
            const int l = b.level[dim];
            if (l == 1) continue;  // both neighbours lie on the boundary
            std::vector<int> parent_level = b.level;
            for (std::size_t k = 0; k < b.values.size(); ++k) {
                auto pos = b.position_at(k);
                const std::int64_t i = pos[dim];
                double parents = 0.0;
                for (std::int64_t neighbour : {i - 1, i + 1}) {
                    const auto [pl, pi] = reduce_dyadic(l, neighbour);
                    if (pl == 0) continue;
                    parent_level[dim] = pl;
                    const auto& pb = blocks[index.at(parent_level)];
                    auto ppos = pos;
                    ppos[dim] = pi;
                    parents += pb.values[pb.offset_of(ppos)];
                }
                b.values[k] -= 0.5 * parents;
            }
        }
    }
    return g;
}

ErrorBudget ErrorBudget::make(double eps, double seminorm) {
    if (!(eps > 0.0)) throw std::invalid_argument("ErrorBudget: eps must be > 0");
    if (seminorm < 0.0) throw std::invalid_argument("ErrorBudget: seminorm must be >= 0");
    ErrorBudget b;
    b.eps = eps;
    b.seminorm = seminorm;
    b.eps_tilde = seminorm > 0.0 ? eps / (2.0 * seminorm) : eps / 2.0;
    return b;
}

int select_level(int d, const ErrorBudget& budget, int cap) {
    if (!(budget.eps > 0.0)) throw std::invalid_argument("select_level: eps must be > 0");
    for (int n = 1; n <= cap; ++n) {
        if (error_bound(d, n, budget.seminorm) <= budget.eps / 2.0) return n;
    }
    throw std::runtime_error("select_level: no level n <= " + std::to_string(cap) +
                             " reaches eps = " + std::to_string(budget.eps) + " in dimension " +
                             std::to_string(d));
}

CoefficientReport coeff_bound_check(const SparseGridInterpolant& g, double seminorm) {
    CoefficientReport r;
    const int d = g.dimension();
    for (const auto& [li, v] : g.entries()) {
        const double bound = seminorm * std::ldexp(1.0, -d - 2 * li.level_sum());
        // Relative slack only for rounding; several registry targets attain the bound.
        const bool ok = std::abs(v) <= bound * (1.0 + 1e-12) + 1e-300;
        r.indices.push_back(li);
        r.values.push_back(v);
        r.bounds.push_back(bound);
        r.within.push_back(ok);
        r.all_within = r.all_within && ok;
        r.abs_sum += std::abs(v);
        if (bound > 0.0) {
            r.max_ratio = std::max(r.max_ratio, std::abs(v) / bound);
        } else if (v != 0.0) {
            r.max_ratio = std::numeric_limits<double>::infinity();
        }
    }
    r.abs_sum_within = r.abs_sum <= seminorm * (1.0 + 1e-12);
    return r;
}

double boundary_max_abs(const Evaluator& f, int d, int samples_per_axis) {
    if (d < 1) throw std::invalid_argument("boundary_max_abs: d must be >= 1");
    int s = std::max(2, samples_per_axis);
    while (d > 1 && std::pow(static_cast<double>(s), d - 1) > 4096.0 && s > 2) --s;
    double worst = 0.0;
    std::vector<double> x(d);
    std::vector<int> idx(d, 0);
    for (int face = 0; face < d; ++face) {
        for (double side : {0.0, 1.0}) {
            std::fill(idx.begin(), idx.end(), 0);
            while (true) {
                for (int j = 0; j < d; ++j) {
                    x[j] = j == face ? side : static_cast<double>(idx[j]) / (s - 1);
                }
                worst = std::max(worst, std::abs(f(x)));
                int j = d - 1;
                while (j >= 0) {
                    if (j == face) {
                        --j;
                        continue;
                    }
                    if (++idx[j] < s) break;
                    idx[j] = 0;
                    --j;
                }
                if (j < 0) break;
            }
        }
    }
    return worst;
}

}  // namespace korobov
