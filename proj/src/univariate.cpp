#include "korobov/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace korobov {

namespace {

// Guards ceil/floor of ratios that are integers up to rounding.
double snap(double r) {
    const double nearest = std::round(r);
    return std::abs(r - nearest) <= 1e-9 * std::max(1.0, std::abs(r)) ? nearest : r;
}

std::int64_t ceil_count(double r) { return static_cast<std::int64_t>(std::ceil(snap(r))); }
std::int64_t floor_count(double r) { return static_cast<std::int64_t>(std::floor(snap(r))); }

}  // namespace

double PiecewiseAffine::operator()(double x) const {
    if (breakpoints.empty()) return anchor_y + left_slope * (x - anchor_x);
    if (x <= breakpoints.front()) return values.front() + left_slope * (x - breakpoints.front());
    if (x >= breakpoints.back()) return values.back() + right_slope * (x - breakpoints.back());
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    const auto k = static_cast<std::size_t>(it - breakpoints.begin());
    const double x0 = breakpoints[k - 1], x1 = breakpoints[k];
    const double t = (x - x0) / (x1 - x0);
    return values[k - 1] + t * (values[k] - values[k - 1]);
}

double PiecewiseAffine::slope(std::int64_t k) const {
    if (k < 0 || k >= pieces()) throw std::out_of_range("PiecewiseAffine::slope: piece out of range");
    if (k == 0) return left_slope;
    if (k == pieces() - 1) return right_slope;
    const auto j = static_cast<std::size_t>(k);
    return (values[j] - values[j - 1]) / (breakpoints[j] - breakpoints[j - 1]);
}

void PiecewiseAffine::validate() const {
    if (breakpoints.size() != values.size()) throw std::invalid_argument("PiecewiseAffine: size mismatch");
    for (std::size_t k = 1; k < breakpoints.size(); ++k) {
        if (!(breakpoints[k] > breakpoints[k - 1])) {
            throw std::invalid_argument("PiecewiseAffine: breakpoints must be strictly increasing");
        }
    }
}

PiecewiseAffine PiecewiseAffine::affine(double x0, double y0, double slope) {
    PiecewiseAffine p;
    p.anchor_x = x0;
    p.anchor_y = y0;
    p.left_slope = slope;
    p.right_slope = slope;
    return p;
}

PiecewiseAffine PiecewiseAffine::from_nodes(const std::vector<double>& xs, const std::vector<double>& ys,
                                            Extension left, Extension right) {
    if (xs.empty() || xs.size() != ys.size()) throw std::invalid_argument("from_nodes: need matching non-empty nodes");
    for (std::size_t k = 1; k < xs.size(); ++k) {
        if (!(xs[k] > xs[k - 1])) throw std::invalid_argument("from_nodes: nodes must be strictly increasing");
    }
    const std::size_t n = xs.size();
    if (n == 1) return affine(xs[0], ys[0], 0.0);
    const double first = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    const double last = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
    if (n == 2 && left == Extension::Linear && right == Extension::Linear) return affine(xs[0], ys[0], first);
    PiecewiseAffine p;
    const std::size_t lo = left == Extension::Constant ? 0 : 1;
    const std::size_t hi = right == Extension::Constant ? n : n - 1;
    p.breakpoints.assign(xs.begin() + static_cast<std::ptrdiff_t>(lo), xs.begin() + static_cast<std::ptrdiff_t>(hi));
    p.values.assign(ys.begin() + static_cast<std::ptrdiff_t>(lo), ys.begin() + static_cast<std::ptrdiff_t>(hi));
    p.left_slope = left == Extension::Constant ? 0.0 : first;
    p.right_slope = right == Extension::Constant ? 0.0 : last;
    return p;
}

double Fragment1D::eval(double x, const Activation& act) const {
    double s = bias;
    for (const auto& u : units) s += u.weight * act(u.slope * x + u.offset);
    return s;
}

NetSpec Fragment1D::to_net(const Activation& act) const {
    NetSpec net;
    net.input_dim = 1;
    LayerBuilder lb(1);
    const AffineForm out = append_to(lb, 0);
    net.out_w.assign(static_cast<std::size_t>(lb.size()), 0.0);
    for (const auto& [i, w] : out.terms) net.out_w[i] += w;
    net.out_b = out.constant;
    net.layers.push_back(std::move(lb).build(act));
    return net;
}

AffineForm Fragment1D::append_to(LayerBuilder& layer, std::int64_t input) const {
    return append_to(layer, AffineForm::unit(input));
}

AffineForm Fragment1D::append_to(LayerBuilder& layer, const AffineForm& input) const {
    AffineForm out;
    out.constant = bias;
    for (const auto& u : units) {
        AffineForm pre;
        pre.add(input, u.slope);
        pre.constant += u.offset;
        out.terms.emplace_back(layer.add_unit(pre), u.weight);
    }
    return out;
}

Fragment1D pwl_to_relu(const PiecewiseAffine& p) {
    p.validate();
    Fragment1D g;
    g.formula_count = std::max<std::int64_t>(p.pieces(), 2);
    const auto& x = p.breakpoints;
    const auto& f = p.values;
    if (x.empty()) {
        const double s = p.left_slope;
        g.bias = p.anchor_y;
        g.units.push_back({1.0, -p.anchor_x, s});
        g.units.push_back({-1.0, p.anchor_x, -s});
        return g;
    }
    g.formula_count = p.pieces();
    const std::size_t m = x.size() + 1;
    g.bias = f[0];
    g.units.push_back({-1.0, x[0], -p.left_slope});
    // Solving the interpolation conditions node by node gives w_1 = s_1 and
    // w_k = s_k - s_{k-1}; the slope-difference form avoids the O(m^2)
    // accumulation of rounding in the sequential solve.
    std::vector<double> w(m, 0.0);
    w[1] = p.slope(1);
    for (std::size_t k = 2; k < m; ++k) w[k] = p.slope(static_cast<std::int64_t>(k)) - p.slope(static_cast<std::int64_t>(k) - 1);
    for (std::size_t k = 1; k < m; ++k) g.units.push_back({1.0, -x[k - 1], w[k]});
    return g;
}

double sup_below(const Fn1& f, double lo, double hi, double y) {
    if (f(lo) > y) return lo;
    if (f(hi) <= y) return hi;
    double a = lo, b = hi;
    while (b - a > 1e-14) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (f(mid) <= y) a = mid;
        else b = mid;
    }
    return a;
}

void check_monotone(const Fn1& f, double lo, double hi) {
    double prev = f(lo);
    for (int k = 1; k <= 1000; ++k) {
        const double x = lo + (hi - lo) * k / 1000.0;
        const double v = f(x);
        if (v < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
            throw std::invalid_argument("approximation requires an increasing function; decrease detected near x = " +
                                        std::to_string(x));
        }
        prev = v;
    }
}

namespace {

// Level-set nodes x_k = sup{f <= c + k eps}, k = 1..m, m = floor((d - c) / eps).
void level_nodes(const Fn1& f, double lo, double hi, double c, double d, double eps, std::vector<double>& xs,
                 std::vector<double>& ys) {
    const std::int64_t m = floor_count((d - c) / eps);
    for (std::int64_t k = 1; k <= m; ++k) {
        const double y = c + static_cast<double>(k) * eps;
        const double x = sup_below(f, lo, hi, y);
        if (!xs.empty() && !(x > xs.back())) continue;
        xs.push_back(x);
        ys.push_back(y);
    }
}

}  // namespace

PiecewiseAffine approx_increasing(const Fn1& f, double lo, double hi, double c, double d, double eps) {
    if (!(eps > 0.0) || !(hi > lo) || d < c) throw std::invalid_argument("approx_increasing: bad arguments");
    check_monotone(f, lo, hi);
    std::vector<double> xs, ys;
    level_nodes(f, lo, hi, c, d, eps, xs, ys);
    if (xs.empty()) return PiecewiseAffine::affine(lo, 0.5 * (c + d), 0.0);
    const Extension left = xs.front() > lo ? Extension::Constant : Extension::Linear;
    const Extension right = xs.back() < hi ? Extension::Constant : Extension::Linear;
    if (xs.size() == 1) return PiecewiseAffine::affine(xs[0], ys[0], 0.0);
    return PiecewiseAffine::from_nodes(xs, ys, left, right);
}

std::int64_t c2_uniform_pieces(double a, double b, double f2_sup, double eps) {
    if (f2_sup <= 0.0) return 1;
    return std::max<std::int64_t>(1, ceil_count((b - a) * std::sqrt(f2_sup) / std::sqrt(2.0 * eps)));
}

PiecewiseAffine approx_c2_uniform(const Fn1& f, const Fn1& f2, double a, double b, double eps,
                                  std::optional<double> f2_sup, Extension left, Extension right) {
    if (!(eps > 0.0) || !(b > a)) throw std::invalid_argument("approx_c2_uniform: bad arguments");
    double s = 0.0;
    if (f2_sup) {
        s = *f2_sup;
    } else {
        if (!f2) throw std::invalid_argument("approx_c2_uniform: need f'' or its bound");
        for (int k = 0; k < 10000; ++k) s = std::max(s, std::abs(f2(a + (b - a) * k / 9999.0)));
        s *= 1.1;
    }
    const std::int64_t K = c2_uniform_pieces(a, b, s, eps);
    std::vector<double> xs(static_cast<std::size_t>(K) + 1), ys(xs.size());
    for (std::int64_t k = 0; k <= K; ++k) {
        xs[k] = k == K ? b : a + (b - a) * static_cast<double>(k) / static_cast<double>(K);
        ys[k] = f(xs[k]);
    }
    return PiecewiseAffine::from_nodes(xs, ys, left, right);
}

RiemannApprox approx_c2_riemann(const Fn1& f, const Fn1& f2, double a, double b, double eps, double mu) {
    if (!(eps > 0.0) || !(b > a) || !(mu > 0.0)) throw std::invalid_argument("approx_c2_riemann: bad arguments");
    auto root = [&](double x) { return std::sqrt(std::abs(f2(x))); };
    // Composite Simpson for the integral of sqrt|f''|.
    const int n = 20000;
    double integral = root(a) + root(b);
    for (int k = 1; k < n; ++k) integral += (k % 2 ? 4.0 : 2.0) * root(a + (b - a) * k / n);
    integral *= (b - a) / (3.0 * n);

    RiemannApprox out;
    out.integral = integral;
    std::vector<double> sups;
    int K = 1;
    while (true) {
        sups.assign(static_cast<std::size_t>(K), 0.0);
        double sum = 0.0;
        const double h = (b - a) / K;
        for (int c = 0; c < K; ++c) {
            double s = 0.0;
            for (int q = 0; q <= 32; ++q) s = std::max(s, std::abs(f2(a + h * (c + q / 32.0))));
            sups[c] = s;
            sum += h * std::sqrt(s);
        }
        out.riemann_sum = sum;
        if (sum <= (1.0 + 0.5 * mu) * integral || K >= (1 << 20)) break;
        K *= 2;
    }
    out.cells = K;

    std::vector<double> xs{a};
    const double h = (b - a) / K;
    for (int c = 0; c < K; ++c) {
        const double lo = a + h * c;
        const double hi = c == K - 1 ? b : a + h * (c + 1);
        const std::int64_t pieces = c2_uniform_pieces(lo, hi, sups[c], eps);
        for (std::int64_t q = 1; q <= pieces; ++q) {
            xs.push_back(q == pieces ? hi : lo + (hi - lo) * static_cast<double>(q) / static_cast<double>(pieces));
        }
    }
    std::vector<double> ys(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = f(xs[k]);
    out.p = PiecewiseAffine::from_nodes(xs, ys, Extension::Linear, Extension::Linear);
    return out;
}

std::int64_t log_truncated_pieces(double delta, double eps) {
    const double t = std::log1p(std::sqrt(2.0 * eps));
    return 1 + ceil_count(std::log(1.0 / delta) / t);
}

PiecewiseAffine approx_log_truncated(double delta, double eps) {
    if (!(delta > 0.0 && delta < 1.0) || !(eps > 0.0)) throw std::invalid_argument("approx_log_truncated: bad arguments");
    const double t = std::log1p(std::sqrt(2.0 * eps));
    const double L = std::log(1.0 / delta);
    const std::int64_t m = floor_count(L / t);
    std::vector<double> xs, ys;
    for (std::int64_t k = 0; k <= m; ++k) {
        const double lx = std::log(delta) + static_cast<double>(k) * t;
        if (k > 0 && lx >= -1e-12) break;
        xs.push_back(k == 0 ? delta : std::exp(lx));
        ys.push_back(k == 0 ? std::log(delta) : lx);
    }
    xs.push_back(1.0);
    ys.push_back(0.0);
    return PiecewiseAffine::from_nodes(xs, ys, Extension::Constant, Extension::Linear);
}

std::int64_t exp_negative_pieces(double eps) {
    return 1 + c2_uniform_pieces(std::log(eps), 0.0, 1.0, eps);
}

PiecewiseAffine approx_exp_negative(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("approx_exp_negative: eps must be in (0, 1)");
    const Fn1 e = [](double x) { return std::exp(x); };
    return approx_c2_uniform(e, e, std::log(eps), 0.0, eps, 1.0, Extension::Constant, Extension::Linear);
}

std::int64_t log_hat_pieces(double t0, double eps) {
    const double e0 = std::log1p(std::sqrt(2.0 * eps));
    return 2 + 2 * ceil_count(std::log(1.0 / t0) / e0);
}

PiecewiseAffine approx_log_hat(int level, std::int64_t position, double t0, double eps) {
    if (!(t0 > 0.0 && t0 < 1.0) || !(eps > 0.0)) throw std::invalid_argument("approx_log_hat: bad arguments");
    const double e0 = std::log1p(std::sqrt(2.0 * eps));
    std::vector<double> logt;
    for (std::int64_t k = 0;; ++k) {
        const double v = std::log(t0) + static_cast<double>(k) * e0;
        if (k > 0 && v >= -1e-12) break;
        logt.push_back(v);
    }
    logt.push_back(0.0);
    const double scale = std::ldexp(1.0, -level);
    const double left = static_cast<double>(position - 1);
    const double right = static_cast<double>(position + 1);
    std::vector<double> xs, ys;
    for (double v : logt) {
        const double t = v == std::log(t0) ? t0 : std::exp(v);
        xs.push_back((left + t) * scale);
        ys.push_back(v);
    }
    for (std::size_t k = logt.size() - 1; k-- > 0;) {
        const double v = logt[k];
        const double t = v == std::log(t0) ? t0 : std::exp(v);
        xs.push_back((right - t) * scale);
        ys.push_back(v);
    }
    return PiecewiseAffine::from_nodes(xs, ys, Extension::Constant, Extension::Constant);
}

namespace {

// y_1 + step * sum H(slope x + offset - tau_i) over the midpoints tau_i of nodes.
void add_steps(Fragment1D& g, const std::vector<double>& nodes, double step, double slope, double offset) {
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double tau = 0.5 * (nodes[i] + nodes[i + 1]);
        g.units.push_back({slope, offset - tau, step});
    }
}

}  // namespace

StepApprox approx_increasing_heaviside(const Fn1& f, double lo, double hi, double c, double d, double eps,
                                       ActivationKind base) {
    if (!is_sigmoid_like(base)) throw std::invalid_argument("approx_increasing_heaviside: activation must be sigmoid-like");
    if (!(eps > 0.0) || !(hi > lo) || d < c) throw std::invalid_argument("approx_increasing_heaviside: bad arguments");
    check_monotone(f, lo, hi);
    StepApprox out;
    out.step = eps;
    const std::int64_t m = floor_count((d - c) / eps);
    for (std::int64_t k = 1; k <= m; ++k) out.nodes.push_back(sup_below(f, lo, hi, c + static_cast<double>(k) * eps));
    if (m == 0) {
        out.fragment.bias = 0.5 * (c + d);
        out.fragment.formula_count = 0;
    } else {
        out.fragment.bias = c + eps;
        add_steps(out.fragment, out.nodes, eps, 1.0, 0.0);
        out.fragment.formula_count = m - 1;
    }
    if (base == ActivationKind::Heaviside || out.fragment.units.empty()) {
        out.act = Activation::scaled_sigmoid(base, 1.0);
        return out;
    }
    const double gap = min_threshold_gap(out.fragment);
    const double delta = gap > 0.0 ? gap / 4.0 : 1e-12;
    out.act = scale_sigmoid_like(base, delta, 1.0 / static_cast<double>(m));
    return out;
}

std::vector<double> log_step_nodes(double t0, double step) {
    const std::int64_t m = floor_count(std::log(1.0 / t0) / step);
    std::vector<double> nodes;
    for (std::int64_t k = 1; k <= m; ++k) nodes.push_back(std::exp(std::log(t0) + static_cast<double>(k) * step));
    return nodes;
}

Fragment1D log_hat_steps(int level, std::int64_t position, double t0, double step) {
    const auto nodes = log_step_nodes(t0, step);
    Fragment1D g;
    const auto m = static_cast<std::int64_t>(nodes.size());
    const double scale = std::ldexp(1.0, level);
    if (m == 0) {
        g.bias = 0.5 * std::log(t0);
        g.formula_count = 0;
        return g;
    }
    g.bias = std::log(t0) + step - step * static_cast<double>(m - 1);
    add_steps(g, nodes, step, scale, -static_cast<double>(position - 1));
    add_steps(g, nodes, step, -scale, static_cast<double>(position + 1));
    g.formula_count = 2 * (m - 1);
    return g;
}

Fragment1D exp_negative_steps(double step) {
    const std::int64_t m = floor_count(1.0 / step);
    std::vector<double> nodes;
    for (std::int64_t k = 1; k <= m; ++k) nodes.push_back(std::log(std::min(1.0, static_cast<double>(k) * step)));
    Fragment1D g;
    g.bias = step;
    add_steps(g, nodes, step, 1.0, 0.0);
    g.formula_count = m - 1;
    return g;
}

double min_threshold_gap(const Fragment1D& f) {
    std::vector<double> pos, neg;
    double scale = 0.0;
    for (const auto& u : f.units) {
        (u.slope > 0 ? pos : neg).push_back(-u.offset / u.slope);
        scale = std::max(scale, std::abs(u.slope));
    }
    double gap = std::numeric_limits<double>::infinity();
    for (auto* v : {&pos, &neg}) {
        std::sort(v->begin(), v->end());
        for (std::size_t k = 1; k < v->size(); ++k) {
            const double g = (*v)[k] - (*v)[k - 1];
            if (g > 0.0) gap = std::min(gap, g);
        }
    }
    return std::isinf(gap) ? 0.0 : gap * scale;
}

}  // namespace korobov
