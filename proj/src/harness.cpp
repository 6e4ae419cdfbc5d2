#include "korobov/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/random/sobol.hpp>

#include "json.hpp"

namespace korobov {

namespace {

using json = nlohmann::json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::vector<KorobovTarget> registry(int d) {
    if (d < 1) throw std::invalid_argument("registry: d must be >= 1");
    std::vector<KorobovTarget> out;
    out.push_back({"P", d,
                   [](std::span<const double> x) {
                       double p = 1.0;
                       for (double v : x) p *= 4.0 * v * (1.0 - v);
                       return p;
                   },
                   std::pow(8.0, d), true,
                   "per factor sup|g| = 1, sup|g'| = 4, sup|g''| = 8; the mixed seminorm is the product of the largest", true});
    out.push_back({"S", d,
                   [](std::span<const double> x) {
                       double p = 1.0;
                       for (double v : x) p *= std::sin(std::numbers::pi * v);
                       return p;
                   },
                   std::pow(std::numbers::pi, 2 * d), true, "per factor sup|g''| = pi^2", true});
    out.push_back({"Z", d, [](std::span<const double>) { return 0.0; }, 0.0, true, "identically zero", true});
    return out;
}

KorobovTarget find_target(const std::string& name, int d) {
    for (auto& t : registry(d)) {
        if (t.name == name) return t;
    }
    throw std::invalid_argument("unknown target '" + name + "' (expected P, S or Z)");
}

std::vector<std::vector<double>> sobol_points(int d, std::int64_t count, std::uint64_t seed) {
    boost::random::sobol eng(static_cast<std::size_t>(d));
    if (seed > 0) eng.discard(seed * static_cast<std::uint64_t>(d));
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(count), std::vector<double>(static_cast<std::size_t>(d)));
    for (auto& p : pts) {
        for (auto& v : p) v = std::ldexp(static_cast<double>(eng()), -64);
    }
    return pts;
}

SupErrorOptions default_probe(int n, std::uint64_t seed) {
    SupErrorOptions o;
    o.seed = seed;
    o.grid_level = n + 2;
    o.sparse_level = n;
    return o;
}

std::vector<std::vector<double>> probe_points(int d, const SupErrorOptions& opt) {
    if (d < 1) throw std::invalid_argument("probe_points: d must be >= 1");
    auto pts = sobol_points(d, std::max<std::int64_t>(opt.samples, 10000), opt.seed);
    int level = opt.grid_level;
    while (level > 0 && std::pow(std::ldexp(1.0, level) + 1.0, d) > static_cast<double>(opt.max_grid_points)) --level;
    if (level > 0) {
        const std::int64_t m = (std::int64_t{1} << level) + 1;
        std::vector<std::int64_t> k(static_cast<std::size_t>(d), 0);
        std::vector<double> x(static_cast<std::size_t>(d), 0.0);
        while (true) {
            for (int j = 0; j < d; ++j) x[j] = std::ldexp(static_cast<double>(k[j]), -level);
            pts.push_back(x);
            int j = d - 1;
            while (j >= 0 && ++k[j] == m) k[j--] = 0;
            if (j < 0) break;
        }
    }
    if (opt.sparse_level > 0) {
        for (const auto& li : enumerate_indices(d, opt.sparse_level)) {
            std::vector<double> x(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) x[j] = std::ldexp(static_cast<double>(li.position[j]), -li.level[j]);
            pts.push_back(std::move(x));
        }
    }
    return pts;
}

namespace {

SupErrorResult max_abs_diff(const std::vector<std::vector<double>>& pts, const std::vector<double>& a,
                            const Evaluator& b) {
    SupErrorResult r;
    r.argmax.assign(pts.empty() ? 0 : pts[0].size(), 0.0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        double e = std::abs(a[k] - b(pts[k]));
        if (std::isnan(e)) e = std::numeric_limits<double>::infinity();
        if (e > r.value) {
            r.value = e;
            r.argmax = pts[k];
        }
    }
    r.points = static_cast<std::int64_t>(pts.size());
    return r;
}

}  // namespace

SupErrorResult sup_error(const Evaluator& a, const Evaluator& b, int d, const SupErrorOptions& opt) {
    const auto pts = probe_points(d, opt);
    std::vector<double> va(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) va[k] = a(pts[k]);
    return max_abs_diff(pts, va, b);
}

SupErrorResult sup_error(const NetSpec& net, const Evaluator& b, const SupErrorOptions& opt) {
    const auto pts = probe_points(net.input_dim, opt);
    return max_abs_diff(pts, net.eval_batch(pts), b);
}

std::string csv_header() {
    return "d,n,eps_target,synthesizer,activation,neurons_by_layer,depth,trainable,sup_error_measured,"
           "bound_theoretical,wall_time";
}

std::string to_csv(const ExperimentRow& r) {
    std::string layers;
    for (std::size_t k = 0; k < r.neurons_by_layer.size(); ++k) {
        if (k) layers += ';';
        layers += std::to_string(r.neurons_by_layer[k]);
    }
    return std::to_string(r.d) + ',' + std::to_string(r.n) + ',' + fmt17(r.eps_target) + ',' + r.synthesizer + ',' +
           r.activation + ',' + layers + ',' + std::to_string(r.depth) + ',' + std::to_string(r.trainable) + ',' +
           fmt17(r.sup_error_measured) + ',' + fmt17(r.bound_theoretical) + ',' + fmt17(r.wall_time);
}

ExperimentRow row_from_csv(const std::string& line) {
    const auto f = split(line, ',');
    if (f.size() != 11) throw std::invalid_argument("row_from_csv: expected 11 fields, got " + std::to_string(f.size()));
    ExperimentRow r;
    r.d = std::stoi(f[0]);
    r.n = std::stoi(f[1]);
    r.eps_target = std::stod(f[2]);
    r.synthesizer = f[3];
    r.activation = f[4];
    if (!f[5].empty()) {
        for (const auto& v : split(f[5], ';')) r.neurons_by_layer.push_back(std::stoll(v));
    }
    r.depth = std::stoi(f[6]);
    r.trainable = std::stoll(f[7]);
    r.sup_error_measured = std::stod(f[8]);
    r.bound_theoretical = std::stod(f[9]);
    r.wall_time = std::stod(f[10]);
    return r;
}

std::string to_json_string(const ExperimentRow& r) {
    return json{{"d", r.d},
                {"n", r.n},
                {"eps_target", r.eps_target},
                {"synthesizer", r.synthesizer},
                {"activation", r.activation},
                {"neurons_by_layer", r.neurons_by_layer},
                {"depth", r.depth},
                {"trainable", r.trainable},
                {"sup_error_measured", r.sup_error_measured},
                {"bound_theoretical", r.bound_theoretical},
                {"wall_time", r.wall_time}}
        .dump();
}

ExperimentRow row_from_json_string(const std::string& text) {
    const auto j = json::parse(text);
    ExperimentRow r;
    r.d = j.at("d").get<int>();
    r.n = j.at("n").get<int>();
    r.eps_target = j.at("eps_target").get<double>();
    r.synthesizer = j.at("synthesizer").get<std::string>();
    r.activation = j.at("activation").get<std::string>();
    r.neurons_by_layer = j.at("neurons_by_layer").get<std::vector<std::int64_t>>();
    r.depth = j.at("depth").get<int>();
    r.trainable = j.at("trainable").get<std::int64_t>();
    r.sup_error_measured = j.at("sup_error_measured").get<double>();
    r.bound_theoretical = j.at("bound_theoretical").get<double>();
    r.wall_time = j.at("wall_time").get<double>();
    return r;
}

SynthesisReport synthesize(const std::string& synthesizer, const KorobovTarget& f, double eps,
                           ActivationKind activation) {
    if (synthesizer == "shallow") return synth_korobov_shallow(f, eps);
    if (synthesizer == "shallow-general") return synth_korobov_shallow_general(f, eps, activation);
    if (synthesizer == "deep") return synth_korobov_deep(f, eps, activation);
    if (synthesizer == "product") return synth_product_shallow(f.dimension, eps, activation);
    throw std::invalid_argument("unknown synthesizer '" + synthesizer + "'");
}

ExperimentRow run_experiment(const KorobovTarget& f, const std::string& synthesizer, double eps,
                             ActivationKind activation, std::uint64_t seed, SynthesisReport* report) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentRow row;
    row.d = f.dimension;
    row.eps_target = eps;
    row.synthesizer = synthesizer;
    if (synthesizer == "sparse-grid") {
        const auto budget = ErrorBudget::make(eps, f.seminorm);
        row.n = select_level(f.dimension, budget);
        row.activation = "none";
        const auto g = hierarchize_hat(f.evaluator, f.dimension, row.n);
        row.trainable = static_cast<std::int64_t>(g.size());
        row.sup_error_measured =
            sup_error([&](std::span<const double> x) { return g.evaluate(x); }, f.evaluator, f.dimension,
                      default_probe(row.n, seed))
                .value;
        row.bound_theoretical = error_bound(f.dimension, row.n, f.seminorm);
    } else {
        SynthesisReport r = synthesize(synthesizer, f, eps, activation);
        row.n = r.n_used;
        row.activation = r.activation;
        row.neurons_by_layer = r.net.neurons_by_layer();
        row.depth = r.net.depth();
        row.trainable = r.net.trainable_count();
        const Evaluator target = synthesizer == "product" ? Evaluator([](std::span<const double> x) {
            double p = 1.0;
            for (double v : x) p *= v;
            return p;
        })
                                                          : f.evaluator;
        row.sup_error_measured = sup_error(r.net, target, default_probe(std::max(r.n_used, 3), seed)).value;
        row.bound_theoretical =
            synthesizer == "product" ? eps : error_bound(f.dimension, r.n_used, f.seminorm) + eps / 2.0;
        if (report) *report = std::move(r);
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::vector<double> log_spaced(double from, double to, int per_decade) {
    if (!(from > to) || !(to > 0.0) || per_decade < 1) throw std::invalid_argument("log_spaced: need from > to > 0");
    const int steps = static_cast<int>(std::lround(std::log10(from / to) * per_decade));
    std::vector<double> out;
    for (int k = 0; k <= steps; ++k) out.push_back(from * std::pow(10.0, -static_cast<double>(k) / per_decade));
    return out;
}

ScalingResult scaling_experiment(const KorobovTarget& f, const std::string& synthesizer,
                                 const std::vector<double>& eps_list, ActivationKind activation, std::uint64_t seed) {
    if (eps_list.size() < 4) throw std::invalid_argument("scaling_experiment: need at least 4 eps values");
    for (std::size_t k = 1; k < eps_list.size(); ++k) {
        if (!(eps_list[k] < eps_list[k - 1])) throw std::invalid_argument("scaling_experiment: eps_list must decrease");
    }
    ScalingResult res;
    for (double eps : eps_list) res.rows.push_back(run_experiment(f, synthesizer, eps, activation, seed));
    const double power = 1.5 * (f.dimension - 1);
    const std::size_t first = res.rows.size() / 2;
    std::vector<double> xs, ys;
    for (std::size_t k = first; k < res.rows.size(); ++k) {
        const double L = std::log(1.0 / res.rows[k].eps_target);
        xs.push_back(L);
        ys.push_back(std::log(static_cast<double>(res.rows[k].trainable)) - power * std::log(L));
    }
    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
    }
    const double den = m * sxx - sx * sx;
    res.slope = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    res.intercept = (sy - res.slope * sx) / m;
    res.fit_points = static_cast<std::int64_t>(xs.size());
    return res;
}

std::int64_t count_closed_form(int d, int n) {
    if (d < 1 || n < 1) throw std::invalid_argument("count_closed_form: d, n must be >= 1");
    __int128 sum = 0, pw = 1;
    for (int i = d - 1; i >= 0; --i) {
        sum += static_cast<__int128>(checked_binomial(static_cast<std::uint64_t>(n + d - 1), static_cast<std::uint64_t>(i))) * pw;
        pw *= -2;
    }
    const __int128 v = (d % 2 == 0 ? 1 : -1) + (static_cast<__int128>(1) << n) * sum;
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
        throw std::overflow_error("count_closed_form: result exceeds 64 bits");
    }
    return static_cast<std::int64_t>(v);
}

std::vector<BoundRow> bound_table(int d_max, int n_max) {
    if (d_max < 1 || d_max > 6 || n_max < 1 || n_max > 12) {
        throw std::invalid_argument("bound_table: requires 1 <= d_max <= 6 and 1 <= n_max <= 12");
    }
    std::vector<BoundRow> out;
    for (int d = 1; d <= d_max; ++d) {
        for (int n = 1; n <= n_max; ++n) {
            BoundRow r{d, n, bound_factor(d, n), count_indices(d, n), count_closed_form(d, n), false};
            r.agree = r.closed_form >= 0 && static_cast<std::uint64_t>(r.closed_form) == r.count;
            out.push_back(r);
        }
    }
    return out;
}

double lower_bound_params(int d, double eps) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("lower_bound_params: eps must lie in (0, 1)");
    return std::pow(eps, -0.5) * std::pow(std::log(1.0 / eps), 0.5 * (d - 1));
}

}  // namespace korobov
