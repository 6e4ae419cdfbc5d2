#include "korobov/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "json.hpp"

#include "korobov/univariate.hpp"

namespace korobov {

namespace {

using json = nlohmann::json;

std::int64_t ceil_i(double x) { return static_cast<std::int64_t>(std::ceil(x)); }
std::int64_t floor_i(double x) { return static_cast<std::int64_t>(std::floor(x)); }

/// Column of the 1-D function (l, i) among the 2^n - 1 per coordinate.
std::int64_t one_d_index(int l, std::int64_t i) { return (std::int64_t{1} << (l - 1)) - 1 + (i - 1) / 2; }

std::int64_t one_d_count(int n) { return (std::int64_t{1} << n) - 1; }

double max_row_abs_sum(const SparseMatrix& m) {
    double worst = 0.0;
    for (std::int64_t r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (auto k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) s += std::abs(m.val[k]);
        worst = std::max(worst, s);
    }
    return worst;
}

double form_abs_sum(const AffineForm& f) {
    double s = 0.0;
    for (const auto& [i, w] : f.terms) s += std::abs(w);
    return s;
}

void check_eps(double eps, const char* who) {
    if (!(eps > 0.0) || !(eps < 0.25)) throw std::invalid_argument(std::string(who) + ": eps must lie in (0, 1/4)");
}

struct Grid {
    SparseGridInterpolant g;
    ErrorBudget budget;
    int n;
};

Grid prepare(const KorobovTarget& f, double eps, std::vector<std::string>& notes) {
    if (f.dimension < 1) throw std::invalid_argument("synthesis: target dimension must be >= 1");
    const auto budget = ErrorBudget::make(eps, f.seminorm);
    const int n = select_level(f.dimension, budget);
    const double b = boundary_max_abs(f.evaluator, f.dimension);
    if (b > 1e-12) notes.push_back("warning: target does not vanish on the boundary (max |f| = " + std::to_string(b) + ")");
    return {hierarchize_hat(f.evaluator, f.dimension, n), budget, n};
}

/// Activation for a layer of sigmoid-like step fragments: every fragment
/// stays within twice its Heaviside error when all units outside a quarter
/// threshold gap are within 1/units of the step.
Activation step_layer_activation(ActivationKind base, const std::vector<const Fragment1D*>& frags) {
    if (base == ActivationKind::Heaviside) return Activation::scaled_sigmoid(base, 1.0);
    double M = 1.0;
    for (const auto* f : frags) {
        if (f->units.empty()) continue;
        const double gap = min_threshold_gap(*f);
        const double delta = gap > 0.0 ? gap / 4.0 : 1e-12;
        M = std::max(M, scale_sigmoid_like(base, delta, 1.0 / static_cast<double>(f->neurons())).M);
    }
    return Activation::scaled_sigmoid(base, M);
}

/// Wiring shared by the shallow constructions: first-layer fragments per 1-D
/// function, a linear layer summing them per basis function, second-layer
/// fragments per grid index, a linear layer of block outputs, surplus weights.
NetSpec wire_shallow(const SparseGridInterpolant& g, int n,
                     const std::function<const Fragment1D&(int, std::int64_t)>& first, const Fragment1D& second,
                     const Activation& act1, const Activation& act2) {
    const int d = g.dimension();
    const std::int64_t F = one_d_count(n);
    NetSpec net;
    net.input_dim = d;

    LayerBuilder l1(d);
    std::vector<AffineForm> logs(static_cast<std::size_t>(d * F));
    for (int j = 0; j < d; ++j) {
        for (int l = 1; l <= n; ++l) {
            for (std::int64_t i = 1; i < (std::int64_t{1} << l); i += 2) {
                logs[static_cast<std::size_t>(j * F + one_d_index(l, i))] = first(l, i).append_to(l1, j);
            }
        }
    }
    LayerBuilder lg(l1.size());
    for (const auto& f : logs) lg.add_unit(f);

    const auto entries = g.entries();
    LayerBuilder l2(lg.size());
    std::vector<AffineForm> blocks;
    blocks.reserve(entries.size());
    for (const auto& [li, v] : entries) {
        AffineForm sum;
        for (int j = 0; j < d; ++j) sum.terms.emplace_back(j * F + one_d_index(li.level[j], li.position[j]), 1.0);
        blocks.push_back(second.append_to(l2, sum));
    }
    LayerBuilder lh(l2.size());
    for (const auto& b : blocks) lh.add_unit(b);

    net.layers.push_back(std::move(l1).build(act1));
    net.layers.push_back(std::move(lg).build(Activation::plain(ActivationKind::Linear)));
    net.layers.push_back(std::move(l2).build(act2));
    net.layers.push_back(std::move(lh).build(Activation::plain(ActivationKind::Linear)));
    for (const auto& [li, v] : entries) net.out_w.push_back(v);
    net.trainable = static_cast<std::int64_t>(entries.size());
    return net;
}

void fill_counts(SynthesisReport& r) {
    const auto by = r.net.neurons_by_layer();
    r.counts.layer1 = by.empty() ? 0 : by[0];
    r.counts.layer2 = by.size() > 1 ? by[1] : 0;
    r.counts.total = r.net.neuron_count();
    r.counts.trainable = r.net.trainable_count();
}

SynthesisReport relu_shallow(const KorobovTarget& f, double eps) {
    SynthesisReport r;
    r.synthesizer = "shallow";
    r.activation = "relu";
    r.dimension = f.dimension;
    r.target_eps = eps;
    const auto grid = prepare(f, eps, r.notes);
    const int d = f.dimension, n = grid.n;
    const double et = grid.budget.eps_tilde;
    r.n_used = n;
    r.eps_tilde = et;
    r.surplus_abs_sum = grid.g.abs_sum();

    const double t0 = et / 3.0, e1 = et / (3.0 * d);
    std::map<std::pair<int, std::int64_t>, Fragment1D> cache;
    auto first = [&](int l, std::int64_t i) -> const Fragment1D& {
        auto it = cache.find({l, i});
        if (it == cache.end()) it = cache.emplace(std::make_pair(l, i), pwl_to_relu(approx_log_hat(l, i, t0, e1))).first;
        return it->second;
    };
    const Fragment1D second = pwl_to_relu(approx_exp_negative(et / 3.0));
    const auto relu = Activation::plain(ActivationKind::ReLU);
    r.net = wire_shallow(grid.g, n, first, second, relu, relu);
    fill_counts(r);

    const double e0 = std::log1p(std::sqrt(2.0 * et / (3.0 * d)));
    const std::int64_t U = static_cast<std::int64_t>(count_indices(d, n));
    r.predicted_block2 = 1 + ceil_i(std::sqrt(3.0 / (2.0 * et)) * std::log(3.0 / et));
    r.predicted.layer1 = d * one_d_count(n) * (2 + 2 * ceil_i(std::log(3.0 / et) / e0));
    r.predicted.layer2 = U * r.predicted_block2;
    r.predicted.total = r.predicted.layer1 + r.predicted.layer2;
    r.predicted.trainable = U;
    return r;
}

SynthesisReport sigmoid_shallow(const KorobovTarget& f, double eps, ActivationKind base) {
    SynthesisReport r;
    r.synthesizer = "shallow-general";
    r.activation = to_string(base);
    r.dimension = f.dimension;
    r.target_eps = eps;
    const auto grid = prepare(f, eps, r.notes);
    const int d = f.dimension, n = grid.n;
    const double et = grid.budget.eps_tilde;
    r.n_used = n;
    r.eps_tilde = et;
    r.surplus_abs_sum = grid.g.abs_sum();

    std::map<std::pair<int, std::int64_t>, Fragment1D> cache;
    std::vector<const Fragment1D*> frags1;
    for (int l = 1; l <= n; ++l) {
        for (std::int64_t i = 1; i < (std::int64_t{1} << l); i += 2) {
            auto it = cache.emplace(std::make_pair(l, i), log_hat_steps(l, i, et / 3.0, et / (6.0 * d))).first;
            frags1.push_back(&it->second);
        }
    }
    auto first = [&](int l, std::int64_t i) -> const Fragment1D& { return cache.at({l, i}); };
    const Fragment1D second = exp_negative_steps(et / 6.0);
    const Activation act1 = step_layer_activation(base, frags1);
    const Activation act2 = step_layer_activation(base, {&second});
    r.net = wire_shallow(grid.g, n, first, second, act1, act2);
    fill_counts(r);

    const std::int64_t U = static_cast<std::int64_t>(count_indices(d, n));
    const std::int64_t m1 = floor_i(6.0 * d * std::log(3.0 / et) / et);
    r.predicted_block2 = floor_i(6.0 / et) - 1;
    r.predicted.layer1 = d * one_d_count(n) * 2 * (m1 - 1);
    r.predicted.layer2 = U * r.predicted_block2;
    r.predicted.total = r.predicted.layer1 + r.predicted.layer2;
    r.predicted.trainable = U;
    if (r.predicted_block2 > ceil_i(6.0 / et)) throw std::logic_error("sigmoid-like block exceeds 6/et units");
    if (static_cast<double>(2 * (m1 - 1)) > 12.0 * d / et * std::log(3.0 / et)) {
        throw std::logic_error("sigmoid-like first-layer function exceeds (12 d / et) log(3 / et) units");
    }
    return r;
}

}  // namespace

SynthesisReport synth_product_shallow(int d, double eps, ActivationKind activation) {
    if (d < 2) throw std::invalid_argument("synth_product_shallow: requires d >= 2");
    check_eps(eps, "synth_product_shallow");
    SynthesisReport r;
    r.synthesizer = "product";
    r.activation = to_string(activation);
    r.dimension = d;
    r.target_eps = eps;

    if (is_sigmoid_like(activation)) {
        const double e = eps / 3.0;
        r.eps_tilde = e;
        const Fn1 lg = [](double x) { return std::log(x); };
        const auto h = approx_increasing_heaviside(lg, e, 1.0, std::log(e), 0.0, e / (2.0 * d), activation);
        const Fragment1D g = exp_negative_steps(e / 2.0);
        const Activation act2 = step_layer_activation(activation, {&g});
        NetSpec net;
        net.input_dim = d;
        LayerBuilder l1(d);
        AffineForm sum;
        for (int j = 0; j < d; ++j) sum.add(h.fragment.append_to(l1, j));
        LayerBuilder l2(l1.size());
        const AffineForm out = g.append_to(l2, sum);
        net.layers.push_back(std::move(l1).build(h.act));
        net.out_w.assign(static_cast<std::size_t>(l2.size()), 0.0);
        net.layers.push_back(std::move(l2).build(act2));
        for (const auto& [i, w] : out.terms) net.out_w[i] += w;
        net.out_b = out.constant;
        net.trainable = 0;
        r.net = std::move(net);
        fill_counts(r);
        r.predicted.layer1 = d * (floor_i(std::log(1.0 / e) / (e / (2.0 * d))) - 1);
        r.predicted.layer2 = floor_i(2.0 / e) - 1;
        r.predicted.total = r.predicted.layer1 + r.predicted.layer2;
        r.predicted.trainable = 0;
        return r;
    }
    if (!is_relu_like(activation)) throw std::invalid_argument("synth_product_shallow: unsupported activation");

    const bool plain = activation == ActivationKind::ReLU;
    const double base_eps = plain ? eps : 0.9 * eps;
    const double e = base_eps / 3.0;
    r.eps_tilde = e;
    const Fragment1D h = pwl_to_relu(approx_log_truncated(e, e / d));
    const Fragment1D g = pwl_to_relu(approx_exp_negative(e));
    NetSpec net;
    net.input_dim = d;
    LayerBuilder l1(d);
    AffineForm sum;
    for (int j = 0; j < d; ++j) sum.add(h.append_to(l1, j));
    LayerBuilder l2(l1.size());
    const AffineForm out = g.append_to(l2, sum);
    net.out_w.assign(static_cast<std::size_t>(l2.size()), 0.0);
    for (const auto& [i, w] : out.terms) net.out_w[i] += w;
    net.out_b = out.constant;
    Activation act = Activation::plain(ActivationKind::ReLU);
    if (!plain) {
        // Each wrapped unit is within eta of its ReLU and 1-Lipschitz.
        const double c1 = form_abs_sum(sum), c2 = form_abs_sum(out);
        act = scale_relu_like(activation, 0.1 * eps / (c2 * (1.0 + c1)));
    }
    net.layers.push_back(std::move(l1).build(act));
    net.layers.push_back(std::move(l2).build(act));
    net.trainable = 0;
    r.net = std::move(net);
    fill_counts(r);
    r.predicted.layer1 = d * (1 + ceil_i(std::log(1.0 / e) / std::log1p(std::sqrt(2.0 * e / d))));
    r.predicted.layer2 = 1 + ceil_i(std::log(1.0 / e) / std::sqrt(2.0 * e));
    r.predicted.total = r.predicted.layer1 + r.predicted.layer2;
    r.predicted.trainable = 0;
    return r;
}

SynthesisReport synth_korobov_shallow(const KorobovTarget& f, double eps) {
    check_eps(eps, "synth_korobov_shallow");
    return relu_shallow(f, eps);
}

SynthesisReport synth_korobov_shallow_general(const KorobovTarget& f, double eps, ActivationKind activation) {
    check_eps(eps, "synth_korobov_shallow_general");
    if (is_sigmoid_like(activation)) return sigmoid_shallow(f, eps, activation);
    if (!is_relu_like(activation)) throw std::invalid_argument("synth_korobov_shallow_general: unsupported activation");
    if (activation == ActivationKind::ReLU) {
        auto r = relu_shallow(f, eps);
        r.synthesizer = "shallow-general";
        return r;
    }
    auto r = relu_shallow(f, 0.9 * eps);
    r.synthesizer = "shallow-general";
    r.activation = to_string(activation);
    r.target_eps = eps;
    // Wrapper error eta per unit: layer-2 inputs move by at most d C1 eta, each
    // block output by C2 (1 + d C1) eta, the output by sum|v| times that.
    const double c1 = max_row_abs_sum(r.net.layers[1].w);
    const double c2 = max_row_abs_sum(r.net.layers[3].w);
    const double v = std::max(r.surplus_abs_sum, 1e-300);
    const double eta = 0.1 * eps / (v * std::max(c2, 1e-300) * (1.0 + f.dimension * c1));
    const Activation act = scale_relu_like(activation, std::min(eta, 0.1 * eps));
    r.net.layers[0].act = act;
    r.net.layers[2].act = act;
    r.notes.push_back("relu-like wrapper M = " + std::to_string(act.M));
    return r;
}

SynthesisReport synth_korobov_deep(const KorobovTarget& f, double eps, ActivationKind sigma) {
    check_eps(eps, "synth_korobov_deep");
    const int d = f.dimension;
    if (d < 2) throw std::invalid_argument("synth_korobov_deep: requires d >= 2");
    (void)second_derivative_at_zero(sigma);
    SynthesisReport r;
    r.synthesizer = "deep";
    r.activation = to_string(sigma);
    r.dimension = d;
    r.target_eps = eps;
    const auto grid = prepare(f, eps, r.notes);
    const int n = grid.n;
    r.n_used = n;
    r.eps_tilde = grid.budget.eps_tilde;
    r.surplus_abs_sum = grid.g.abs_sum();

    // A tree of d - 1 gadgets on [0,1]-valued inputs accumulates at most
    // (d - 1) gadget errors; the output then carries sum|v| of them.
    const double per_gadget = (eps / 2.0) / ((d - 1) * std::max(r.surplus_abs_sum, 1.0));
    const double lambda = calibrate_lambda(sigma, per_gadget);
    r.notes.push_back("gadget lambda = " + std::to_string(lambda));

    const std::int64_t F = one_d_count(n);
    NetSpec net;
    net.input_dim = d;
    LayerBuilder l1(d);
    std::vector<AffineForm> hats(static_cast<std::size_t>(d * F));
    for (int l = 1; l <= n; ++l) {
        const double h = std::ldexp(1.0, -l);
        for (std::int64_t i = 1; i < (std::int64_t{1} << l); i += 2) {
            const auto frag = pwl_to_relu(PiecewiseAffine::from_nodes(
                {h * static_cast<double>(i - 1), h * static_cast<double>(i), h * static_cast<double>(i + 1)},
                {0.0, 1.0, 0.0}, Extension::Constant, Extension::Constant));
            for (int j = 0; j < d; ++j) hats[static_cast<std::size_t>(j * F + one_d_index(l, i))] = frag.append_to(l1, j);
        }
    }
    std::int64_t width = l1.size();
    net.layers.push_back(std::move(l1).build(Activation::plain(ActivationKind::ReLU)));

    const auto entries = grid.g.entries();
    std::vector<std::vector<AffineForm>> values;
    values.reserve(entries.size());
    for (const auto& [li, v] : entries) {
        std::vector<AffineForm> leaves;
        for (int j = 0; j < d; ++j) leaves.push_back(hats[static_cast<std::size_t>(j * F + one_d_index(li.level[j], li.position[j]))]);
        values.push_back(std::move(leaves));
    }
    while (values.front().size() > 1) {
        LayerBuilder lb(width);
        for (auto& vals : values) {
            std::vector<AffineForm> next;
            for (std::size_t k = 0; k + 1 < vals.size(); k += 2) {
                const auto gu = product_gadget_units(vals[k], vals[k + 1], sigma, lambda);
                AffineForm out;
                for (int u = 0; u < 4; ++u) out.terms.emplace_back(lb.add_unit(gu.pre[u]), gu.out_weight[u]);
                next.push_back(std::move(out));
            }
            if (vals.size() % 2 == 1) next.push_back(AffineForm::unit(lb.add_unit(vals.back(), true)));
            vals = std::move(next);
        }
        width = lb.size();
        net.layers.push_back(std::move(lb).build(Activation::plain(sigma)));
    }
    LayerBuilder lp(width);
    for (const auto& vals : values) lp.add_unit(vals.front());
    net.layers.push_back(std::move(lp).build(Activation::plain(ActivationKind::Linear)));
    for (const auto& [li, v] : entries) net.out_w.push_back(v);
    net.trainable = static_cast<std::int64_t>(entries.size());
    r.net = std::move(net);
    fill_counts(r);

    const std::int64_t U = static_cast<std::int64_t>(count_indices(d, n));
    r.predicted.layer1 = d * (std::int64_t{1} << (n + 2));
    r.predicted.layer2 = 8 * d * U;
    r.predicted.total = r.predicted.layer1 + r.predicted.layer2;
    r.predicted.trainable = U;
    r.notes.push_back("predicted counts are the upper bounds d 2^(n+2) and 8 d |U|");
    return r;
}

std::vector<double> first_layer_thresholds(const NetSpec& net) {
    if (net.input_dim != 1 || net.layers.empty()) throw std::invalid_argument("first_layer_thresholds: one input required");
    const auto& l = net.layers.front();
    std::vector<double> out;
    for (std::int64_t r = 0; r < l.w.rows; ++r) {
        for (auto k = l.w.row_ptr[r]; k < l.w.row_ptr[r + 1]; ++k) {
            if (l.w.val[k] != 0.0) out.push_back(-l.b[r] / l.w.val[k]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string to_json_string(const SynthesisReport& r, bool include_net) {
    auto counts = [](const LayerCounts& c) {
        return json{{"layer1", c.layer1}, {"layer2", c.layer2}, {"total", c.total}, {"trainable", c.trainable}};
    };
    json j{{"synthesizer", r.synthesizer},
           {"activation", r.activation},
           {"d", r.dimension},
           {"n_used", r.n_used},
           {"counts", counts(r.counts)},
           {"predicted_counts", counts(r.predicted)},
           {"predicted_block2", r.predicted_block2},
           {"neurons_by_layer", r.net.neurons_by_layer()},
           {"depth", r.net.depth()},
           {"target_eps", r.target_eps},
           {"eps_tilde", r.eps_tilde},
           {"surplus_abs_sum", r.surplus_abs_sum},
           {"notes", r.notes}};
    if (include_net) j["net"] = json::parse(to_json_string(r.net));
    return j.dump();
}

}  // namespace korobov
