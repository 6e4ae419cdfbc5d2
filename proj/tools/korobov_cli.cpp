#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "korobov/harness.hpp"
#include "korobov/hierarchy.hpp"
#include "korobov/network.hpp"
#include "korobov/synthesis.hpp"

using namespace korobov;
using nlohmann::json;

namespace {

struct Options {
    int dim = 2;
    int level = 3;
    double eps = 0.1;
    std::string target = "P";
    std::string activation;  // empty: relu, or softplus for the deep net
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    // net eval
    std::string net_path;
    std::string input;
    // report bounds / scaling
    std::vector<double> eps_list;
    std::string synthesizer = "sparse-grid";
    bool include_net = false;
};

void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

std::string read_all(const std::string& path) {
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string rows_text(const Options& o, const std::vector<ExperimentRow>& rows) {
    if (o.format == "json") {
        json a = json::array();
        for (const auto& r : rows) a.push_back(json::parse(to_json_string(r)));
        return a.dump(2);
    }
    std::string s = csv_header() + "\n";
    for (const auto& r : rows) s += to_csv(r) + "\n";
    return s;
}

void grid_build(const Options& o) {
    const auto f = find_target(o.target, o.dim);
    const auto g = hierarchize_hat(f.evaluator, o.dim, o.level);
    const auto entries = g.entries();
    if (o.format == "json") {
        json j{{"target", f.name}, {"d", o.dim}, {"n", o.level}, {"count", g.size()}, {"abs_sum", g.abs_sum()}};
        json e = json::array();
        for (const auto& [li, v] : entries) e.push_back({{"level", li.level}, {"position", li.position}, {"surplus", v}});
        j["surpluses"] = e;
        emit(o, j.dump(2));
        return;
    }
    std::string s = "level,position,surplus\n";
    char buf[64];
    for (const auto& [li, v] : entries) {
        std::string l, p;
        for (int j = 0; j < li.dimension(); ++j) {
            l += (j ? ";" : "") + std::to_string(li.level[j]);
            p += (j ? ";" : "") + std::to_string(li.position[j]);
        }
        std::snprintf(buf, sizeof buf, "%.17g", v);
        s += l + "," + p + "," + buf + "\n";
    }
    emit(o, s);
}

void grid_error(const Options& o) {
    const auto f = find_target(o.target, o.dim);
    const auto g = hierarchize_hat(f.evaluator, o.dim, o.level);
    const Evaluator gi = [&](std::span<const double> x) { return g.evaluate(x); };
    const auto r = sup_error(gi, f.evaluator, o.dim, default_probe(o.level, o.seed));
    const double bound = error_bound(o.dim, o.level, f.seminorm);
    if (o.format == "json") {
        json j{{"target", f.name}, {"d", o.dim},       {"n", o.level},      {"sup_error", r.value},
               {"argmax", r.argmax}, {"points", r.points}, {"bound", bound}, {"within", r.value <= bound}};
        emit(o, j.dump(2));
        return;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "target,d,n,sup_error,bound,points\n%s,%d,%d,%.17g,%.17g,%lld\n", f.name.c_str(), o.dim,
                  o.level, r.value, bound, static_cast<long long>(r.points));
    emit(o, buf);
}

// Writes the net (and report) to --out as JSON; prints the measured row.
void net_synth(const Options& o, const std::string& synthesizer) {
    const auto f = find_target(o.target, o.dim);
    SynthesisReport rep;
    const std::string act = !o.activation.empty() ? o.activation : synthesizer == "deep" ? "softplus" : "relu";
    const auto row = run_experiment(f, synthesizer, o.eps, activation_kind_from_string(act), o.seed, &rep);
    if (!o.out.empty()) {
        std::ofstream file(o.out);
        if (!file) throw std::runtime_error("cannot write " + o.out);
        file << (o.include_net ? to_json_string(rep, true) : to_json_string(rep.net)) << '\n';
    }
    const std::string text = rows_text(o, {row});
    std::cout << text;
    for (const auto& note : rep.notes) std::cerr << "note: " << note << '\n';
}

// Points: one per line, coordinates separated by commas or whitespace.
void net_eval(const Options& o) {
    std::string text = read_all(o.net_path);
    auto j = json::parse(text);
    if (j.contains("net")) text = j["net"].dump();
    const NetSpec net = netspec_from_json_string(text);
    std::vector<std::vector<double>> xs;
    std::istringstream in(read_all(o.input));
    std::string line;
    while (std::getline(in, line)) {
        for (char& c : line) {
            if (c == ',' || c == ';') c = ' ';
        }
        std::istringstream ls(line);
        std::vector<double> x;
        double v;
        while (ls >> v) x.push_back(v);
        if (x.empty()) continue;
        if (static_cast<int>(x.size()) != net.input_dim) {
            throw std::invalid_argument("point has " + std::to_string(x.size()) + " coordinates, net expects " +
                                        std::to_string(net.input_dim));
        }
        xs.push_back(std::move(x));
    }
    const auto ys = net.eval_batch(xs);
    if (o.format == "json") {
        emit(o, json(ys).dump());
        return;
    }
    std::string s;
    char buf[32];
    for (double y : ys) {
        std::snprintf(buf, sizeof buf, "%.17g\n", y);
        s += buf;
    }
    emit(o, s);
}

void report_bounds(const Options& o) {
    const auto t = bound_table(o.dim, o.level);
    if (o.format == "json") {
        json a = json::array();
        for (const auto& r : t) {
            a.push_back({{"d", r.d}, {"n", r.n}, {"A", r.a}, {"count", r.count}, {"closed_form", r.closed_form}, {"agree", r.agree}});
        }
        emit(o, a.dump(2));
        return;
    }
    std::string s = "d,n,A,count,closed_form,agree\n";
    for (const auto& r : t) {
        s += std::to_string(r.d) + "," + std::to_string(r.n) + "," + std::to_string(r.a) + "," + std::to_string(r.count) +
             "," + std::to_string(r.closed_form) + "," + (r.agree ? "true" : "false") + "\n";
    }
    emit(o, s);
}

void report_scaling(const Options& o) {
    const auto f = find_target(o.target, o.dim);
    const auto eps = o.eps_list.empty() ? log_spaced(1e-1, 1e-4, 4) : o.eps_list;
    const auto r = scaling_experiment(f, o.synthesizer, eps,
                                      activation_kind_from_string(o.activation.empty() ? "relu" : o.activation), o.seed);
    if (o.format == "json") {
        json j{{"slope", r.slope}, {"intercept", r.intercept}, {"fit_points", r.fit_points}};
        j["rows"] = json::parse(rows_text(o, r.rows));
        json lb = json::array();
        for (const auto& row : r.rows) lb.push_back(lower_bound_params(row.d, row.eps_target));
        j["lower_bound_params"] = lb;
        emit(o, j.dump(2));
        return;
    }
    std::string s = rows_text(o, r.rows);
    char buf[128];
    std::snprintf(buf, sizeof buf, "# slope=%.6f intercept=%.6f fit_points=%lld\n", r.slope, r.intercept,
                  static_cast<long long>(r.fit_points));
    emit(o, s + buf);
}

void common(CLI::App* c, Options& o) {
    c->add_option("--dim", o.dim, "Dimension d");
    c->add_option("--target", o.target, "Registry target: P, S or Z");
    c->add_option("--seed", o.seed, "Offset into the low-discrepancy probe sequence");
    c->add_option("--out", o.out, "Output path (default stdout)");
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse-grid approximation and training-free network synthesis"};
    app.require_subcommand(1);
    Options o;

    auto* grid = app.add_subcommand("grid", "Sparse-grid interpolation");
    grid->require_subcommand(1);
    auto* gb = grid->add_subcommand("build", "Hierarchical surpluses of a target");
    auto* ge = grid->add_subcommand("error", "Measured sup-error against the bound");
    for (auto* c : {gb, ge}) {
        common(c, o);
        c->add_option("--level", o.level, "Sparse-grid level n");
    }
    gb->callback([&] { grid_build(o); });
    ge->callback([&] { grid_error(o); });

    auto* net = app.add_subcommand("net", "Network synthesis and evaluation");
    net->require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> synths{
        {"synth-shallow", "shallow"}, {"synth-shallow-general", "shallow-general"},
        {"synth-deep", "deep"},       {"synth-product", "product"}};
    for (const auto& [cmd, id] : synths) {
        auto* c = net->add_subcommand(cmd, "Synthesize a '" + id + "' network; --out receives the NetSpec JSON");
        common(c, o);
        c->add_option("--eps", o.eps, "Target sup-norm accuracy");
        c->add_option("--activation", o.activation, "relu, softplus, elu, heaviside, logistic, tanh");
        c->add_flag("--with-report", o.include_net, "Write the full synthesis report instead of the bare net");
        c->callback([&o, id = id] { net_synth(o, id); });
    }
    auto* ne = net->add_subcommand("eval", "Evaluate a NetSpec on points read from a file or stdin");
    ne->add_option("--net", o.net_path, "NetSpec or report JSON")->required();
    ne->add_option("--input", o.input, "Points file, one per line (default stdin)");
    ne->add_option("--out", o.out, "Output path (default stdout)");
    ne->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    ne->callback([&] { net_eval(o); });

    auto* rep = app.add_subcommand("report", "Tables and scaling series");
    rep->require_subcommand(1);
    auto* rb = rep->add_subcommand("bounds", "A(d,n), index count and closed form for d <= --dim, n <= --level");
    rb->add_option("--dim", o.dim, "Largest d (<= 6)");
    rb->add_option("--level", o.level, "Largest n (<= 12)");
    rb->add_option("--out", o.out, "Output path (default stdout)");
    rb->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    rb->callback([&] { report_bounds(o); });
    auto* rs = rep->add_subcommand("scaling", "Trainable count against eps with a fitted exponent");
    common(rs, o);
    rs->add_option("--eps", o.eps_list, "Decreasing eps values (default 4 per decade, 1e-1 to 1e-4)");
    rs->add_option("--synth", o.synthesizer, "sparse-grid, shallow, shallow-general, deep");
    rs->add_option("--activation", o.activation, "Activation for network synthesizers");
    rs->callback([&] { report_scaling(o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
