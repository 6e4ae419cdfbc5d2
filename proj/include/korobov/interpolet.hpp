#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "korobov/hierarchy.hpp"

namespace korobov {

/// Degree-2 Deslauriers-Dubuc interpolet phi^(2) sampled on the dyadic grid
/// k / 2^J, k in [-3 * 2^J, 3 * 2^J]. Values outside [-3, 3] are zero.
class DyadicValueTable {
public:
    /// Depth 0: phi(k) = 1 if k == 0 else 0, for k in [-3, 3].
    DyadicValueTable();

    int depth() const { return depth_; }

    /// Value at k / 2^depth; zero outside the stored range.
    double at(std::int64_t k) const;

    /// Value at the dyadic point k / 2^level, level <= depth.
    double at(std::int64_t k, int level) const;

    std::span<const double> values() const { return values_; }

    std::int64_t half_width() const { return 3 * (std::int64_t{1} << depth_); }

private:
    friend class DyadicRefiner;
    int depth_ = 0;
    std::vector<double> values_;
};

enum class RefinementRule {
    /// Coarse offsets k-1, k, k+1, k+2 with weights -1/16, 9/16, 9/16, -1/16.
    Symmetric,
    /// Coarse offsets k-2, k, k+1, k+3 (the asymmetric variant, kept for comparison).
    Asymmetric,
};

/// One interpolatory refinement step: depth J -> J+1. Existing values are copied.
DyadicValueTable refine(const DyadicValueTable& table,
                        RefinementRule rule = RefinementRule::Symmetric);

/// Table refined from depth 0 to `depth`.
DyadicValueTable build_interpolet_table(int depth,
                                        RefinementRule rule = RefinementRule::Symmetric);

inline constexpr int kMaxInterpoletDepth = 20;

/// phi^(2)(x) from the depth-J table, snapping x to the nearest point k / 2^J.
/// Tables are built once per depth and shared.
double interpolet_eval(double x, int depth);

/// phi^(2)(2^l x - i).
double interpolet_basis_eval(int level, std::int64_t position, double x, int depth);

enum class StencilBoundary {
    /// Evaluate u wherever the stencil lands, including outside [0, 1].
    Natural,
    /// Treat u as zero outside [0, 1].
    ZeroOutside,
};

/// 1-D surplus functional
/// I_{l,i} u = u(i/2^l) - 9/16 u((i-1)/2^l) - 9/16 u((i+1)/2^l)
///           + 1/16 u((i-3)/2^l) + 1/16 u((i+3)/2^l),
/// applied as a tensor product over the 5^d stencil points.
double stencil_apply(const Evaluator& u, const LevelIndex& li,
                     StencilBoundary boundary = StencilBoundary::Natural);

/// 1-D convenience overload.
double stencil_apply(const std::function<double(double)>& u, int level, std::int64_t position,
                     StencilBoundary boundary = StencilBoundary::Natural);

}  // namespace korobov
