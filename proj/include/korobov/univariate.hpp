#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "korobov/network.hpp"

namespace korobov {

using Fn1 = std::function<double(double)>;

enum class Extension {
    /// Horizontal continuation; the end node becomes a breakpoint.
    Constant,
    /// Continue the adjacent segment; the end node is not a breakpoint.
    Linear,
};

/// Continuous piecewise-affine function on the real line: values at strictly
/// increasing breakpoints, plus the outer slopes. With no breakpoints the
/// function is affine through (anchor_x, anchor_y) with slope left_slope.
struct PiecewiseAffine {
    std::vector<double> breakpoints;
    std::vector<double> values;
    double left_slope = 0.0;
    double right_slope = 0.0;
    double anchor_x = 0.0;
    double anchor_y = 0.0;

    std::int64_t pieces() const { return static_cast<std::int64_t>(breakpoints.size()) + 1; }
    double operator()(double x) const;
    /// Slope on piece k, 0 <= k < pieces().
    double slope(std::int64_t k) const;
    void validate() const;

    static PiecewiseAffine affine(double x0, double y0, double slope);
    /// Interpolates (xs, ys); xs strictly increasing with at least one node.
    static PiecewiseAffine from_nodes(const std::vector<double>& xs, const std::vector<double>& ys,
                                      Extension left, Extension right);
};

/// One hidden unit weight * act(slope * x + offset).
struct Unit1D {
    double slope;
    double offset;
    double weight;
};

/// bias + sum of units: a single-layer network on one input.
struct Fragment1D {
    double bias = 0.0;
    std::vector<Unit1D> units;
    /// Count predicted by the construction's formula (-1 if none applies).
    std::int64_t formula_count = -1;

    std::int64_t neurons() const { return static_cast<std::int64_t>(units.size()); }
    double eval(double x, const Activation& act) const;
    NetSpec to_net(const Activation& act) const;

    /// Adds the units to `layer` reading input column `input`, and returns the
    /// form of the fragment's output over the layer's units.
    AffineForm append_to(LayerBuilder& layer, std::int64_t input) const;
    /// Same, with the fragment's argument given by a form over the layer's inputs.
    AffineForm append_to(LayerBuilder& layer, const AffineForm& input) const;
};

/// Exact ReLU representation with one unit per piece. A single affine piece
/// uses two units, since an affine map with nonzero slope is not a single ReLU.
Fragment1D pwl_to_relu(const PiecewiseAffine& p);

/// sup{x in [lo, hi] : f(x) <= y} by bisection to width 1e-14 (lo if empty).
double sup_below(const Fn1& f, double lo, double hi, double y);

/// Throws std::invalid_argument if f decreases on 1000 uniform samples.
void check_monotone(const Fn1& f, double lo, double hi);

/// Level-set subdivision y_k = c + k eps with x_k = sup{f <= y_k}: continuous
/// interpolant of (x_k, y_k), constant outside [x_1, x_m].
PiecewiseAffine approx_increasing(const Fn1& f, double lo, double hi, double c, double d, double eps);

/// Uniform subdivision into ceil((b - a) sqrt(S) / sqrt(2 eps)) pieces with
/// S = sup|f''|. When `f2_sup` is absent S is 1.1 times the largest of 1e4
/// samples of |f2|.
PiecewiseAffine approx_c2_uniform(const Fn1& f, const Fn1& f2, double a, double b, double eps,
                                  std::optional<double> f2_sup = std::nullopt,
                                  Extension left = Extension::Linear, Extension right = Extension::Linear);

std::int64_t c2_uniform_pieces(double a, double b, double f2_sup, double eps);

struct RiemannApprox {
    PiecewiseAffine p;
    int cells = 0;
    double riemann_sum = 0.0;
    double integral = 0.0;
};

/// Partition [a, b] into K cells (K doubled until the upper Riemann sum of
/// sqrt|f''| is within (1 + mu/2) of its integral), then subdivide cell I_k
/// uniformly into ceil(|I_k| sqrt(S_k) / sqrt(2 eps)) pieces.
RiemannApprox approx_c2_riemann(const Fn1& f, const Fn1& f2, double a, double b, double eps, double mu);

/// log on [delta, 1] through nodes delta e^{k t}, t = log(1 + sqrt(2 eps)),
/// constant log(delta) on (-inf, delta].
PiecewiseAffine approx_log_truncated(double delta, double eps);
std::int64_t log_truncated_pieces(double delta, double eps);

/// exp on (-inf, 0] within eps: uniform on [log eps, 0], constant eps below.
PiecewiseAffine approx_exp_negative(double eps);
std::int64_t exp_negative_pieces(double eps);

/// max(log phi_{l,i}(x), log t0) for the hat phi_{l,i}, within eps: geometric
/// subdivision of the hat value t_k = t0 e^{k e0}, e0 = log(1 + sqrt(2 eps)),
/// on the rising half and mirrored on the falling half.
PiecewiseAffine approx_log_hat(int level, std::int64_t position, double t0, double eps);
std::int64_t log_hat_pieces(double t0, double eps);

/// Heaviside-sum approximant y_1 + eps sum_{i<m} H(x - (x_i + x_{i+1}) / 2).
struct StepApprox {
    Fragment1D fragment;
    Activation act;
    std::vector<double> nodes;
    double step = 0.0;
};

/// `base` must be sigmoid-like. For the Heaviside the step sum is exact up to
/// eps; otherwise the steps use base(M .) with M from scale_sigmoid_like, for
/// a total error of at most 2 eps.
StepApprox approx_increasing_heaviside(const Fn1& f, double lo, double hi, double c, double d, double eps,
                                       ActivationKind base);

/// Threshold positions and count for the level-set steps of log t on [t0, 1].
std::vector<double> log_step_nodes(double t0, double step);

/// Step approximant of max(log phi_{l,i}, log t0) built from two monotone
/// halves, H(t - tau) + H(s - tau) with t = 2^l x - (i - 1), s = (i + 1) - 2^l x.
/// Units use the identity activation scale (slope in t); error eps with the
/// Heaviside.
Fragment1D log_hat_steps(int level, std::int64_t position, double t0, double step);

/// Step approximant of exp on (-inf, 0] with step `step`: floor(1/step) - 1 units.
Fragment1D exp_negative_steps(double step);

/// Smallest gap between consecutive thresholds of a step fragment (in pre-activation units).
double min_threshold_gap(const Fragment1D& f);

}  // namespace korobov
