#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace korobov {

using Point = std::span<const double>;
using Evaluator = std::function<double(std::span<const double>)>;

/// Largest level accepted anywhere; keeps 2^l inside exact double and int64 range.
inline constexpr int kMaxLevel = 30;

/// Multi-index (l, i) addressing one hierarchical basis function
/// phi_{l,i}(x) = prod_j phi(2^{l_j} x_j - i_j).
struct LevelIndex {
    std::vector<int> level;
    std::vector<std::int64_t> position;

    int dimension() const { return static_cast<int>(level.size()); }
    int level_sum() const;

    /// l_j >= 1, i_j odd, 1 <= i_j <= 2^{l_j} - 1.
    bool valid() const;

    bool operator==(const LevelIndex&) const = default;
};

/// Canonical order: (|l|_1, l, i) lexicographic.
bool canonical_less(const LevelIndex& a, const LevelIndex& b);

std::string to_string(const LevelIndex& li);

enum class Mother { Hat, InterpoletL2 };

std::string to_string(Mother m);

double hat_eval(double x);

/// Tensor-product hat basis function.
double basis_eval(const LevelIndex& li, Point x);

/// Level vectors l >= 1 with |l|_1 <= n + d - 1, ordered by (|l|_1, l).
std::vector<std::vector<int>> enumerate_levels(int d, int n);

std::vector<LevelIndex> enumerate_indices(int d, int n);

/// |U_n| = sum_{i<n} 2^i binom(d-1+i, d-1). Throws std::overflow_error when it
/// does not fit in 64 bits.
std::uint64_t count_indices(int d, int n);

/// binom(n, k) with overflow detection.
std::uint64_t checked_binomial(std::uint64_t n, std::uint64_t k);

/// A(d, n) = sum_{k<d} binom(n+d-1, k).
std::uint64_t bound_factor(int d, int n);

/// (2 s / 8^d) 4^{-n} A(d, n).
double error_bound(int d, int n, double seminorm);

/// Surpluses for one level vector, stored densely over its odd positions.
/// Position i maps to offset sum_j ((i_j - 1) / 2) * stride_j with the last
/// coordinate fastest.
struct LevelBlock {
    std::vector<int> level;
    std::vector<std::size_t> stride;
    std::vector<double> values;

    std::size_t offset_of(std::span<const std::int64_t> position) const;
    std::vector<std::int64_t> position_at(std::size_t offset) const;
};

class SparseGridInterpolant {
public:
    /// All surpluses zero. `interpolet_depth` is the dyadic depth used to
    /// evaluate the interpolet mother function.
    SparseGridInterpolant(int d, int n, Mother mother = Mother::Hat, int interpolet_depth = 12);

    static SparseGridInterpolant from_surpluses(
        int d, int n, Mother mother,
        const std::vector<std::pair<LevelIndex, double>>& entries,
        int interpolet_depth = 12);

    int dimension() const { return dim_; }
    int budget() const { return budget_; }
    Mother mother() const { return mother_; }

    /// Number of stored indices; equals count_indices(d, n).
    std::size_t size() const { return size_; }

    const std::vector<LevelBlock>& blocks() const { return blocks_; }

    /// Throws std::out_of_range for an index outside the grid.
    double surplus(const LevelIndex& li) const;

    /// All (index, surplus) pairs in canonical order.
    std::vector<std::pair<LevelIndex, double>> entries() const;

    double abs_sum() const;

    /// Hat mother: one candidate position per level vector and coordinate.
    /// Interpolet mother: up to three per coordinate (support [-3, 3]); points
    /// outside [0,1]^d are accepted and use the natural extension.
    double evaluate(Point x) const;
    double operator()(Point x) const { return evaluate(x); }

    /// Grid node coordinates i / 2^l for every stored index, canonical order.
    std::vector<std::vector<double>> nodes() const;

    double& mutable_surplus(const LevelIndex& li);

private:
    const LevelBlock* find_block(std::span<const int> level) const;

    int dim_;
    int budget_;
    Mother mother_;
    int interpolet_depth_;
    std::size_t size_ = 0;
    std::vector<LevelBlock> blocks_;
    std::map<std::vector<int>, std::size_t> block_of_level_;

    double evaluate_hat(Point x) const;
    double evaluate_interpolet(Point x) const;
};

/// Hierarchical surpluses of f for the hat basis, computed by 3-point stencil
/// sweeps over nodal values (one coordinate at a time). Values on the boundary
/// of the cube are taken as zero.
SparseGridInterpolant hierarchize_hat(const Evaluator& f, int d, int n);

double interpolant_eval(const SparseGridInterpolant& g, Point x);

struct ErrorBudget {
    double eps = 0.0;
    double seminorm = 0.0;
    double eps_tilde = 0.0;

    /// eps_tilde = eps / (2 seminorm). A zero seminorm yields eps_tilde = eps / 2.
    static ErrorBudget make(double eps, double seminorm);
};

/// Smallest n >= 1 with error_bound(d, n, seminorm) <= eps / 2.
int select_level(int d, const ErrorBudget& budget, int cap = kMaxLevel);

struct CoefficientReport {
    std::vector<LevelIndex> indices;
    std::vector<double> values;
    std::vector<double> bounds;
    std::vector<bool> within;
    bool all_within = true;
    double abs_sum = 0.0;
    bool abs_sum_within = true;
    double max_ratio = 0.0;
};

/// |v_{l,i}| <= 2^{-d} 2^{-2|l|_1} s per index and sum |v| <= s.
CoefficientReport coeff_bound_check(const SparseGridInterpolant& g, double seminorm);

/// Largest |f| over a deterministic sample of boundary faces of [0,1]^d.
double boundary_max_abs(const Evaluator& f, int d, int samples_per_axis = 9);

}  // namespace korobov
