#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "korobov/harness.hpp"
#include "korobov/hierarchy.hpp"
#include "korobov/interpolet.hpp"
#include "korobov/network.hpp"
#include "korobov/synthesis.hpp"

namespace py = pybind11;
using namespace korobov;

namespace {

Evaluator wrap(const std::function<double(std::vector<double>)>& f) {
    return [f](std::span<const double> x) { return f(std::vector<double>(x.begin(), x.end())); };
}

py::dict row_dict(const ExperimentRow& r) {
    py::dict d;
    d["d"] = r.d;
    d["n"] = r.n;
    d["eps_target"] = r.eps_target;
    d["synthesizer"] = r.synthesizer;
    d["activation"] = r.activation;
    d["neurons_by_layer"] = r.neurons_by_layer;
    d["depth"] = r.depth;
    d["trainable"] = r.trainable;
    d["sup_error_measured"] = r.sup_error_measured;
    d["bound_theoretical"] = r.bound_theoretical;
    d["wall_time"] = r.wall_time;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sparse-grid interpolation and training-free network synthesis";

    py::register_exception<std::invalid_argument>(m, "InvalidArgument", PyExc_ValueError);

    m.def("count_indices", &count_indices, py::arg("d"), py::arg("n"));
    m.def("count_closed_form", &count_closed_form, py::arg("d"), py::arg("n"));
    m.def("enumerate_indices", [](int d, int n) {
        std::vector<std::pair<std::vector<int>, std::vector<std::int64_t>>> out;
        for (const auto& li : enumerate_indices(d, n)) out.emplace_back(li.level, li.position);
        return out;
    }, py::arg("d"), py::arg("n"), "(level, position) pairs in canonical order.");
    m.def("error_bound", &error_bound, py::arg("d"), py::arg("n"), py::arg("seminorm"));
    m.def("select_level", [](int d, double eps, double seminorm) { return select_level(d, ErrorBudget::make(eps, seminorm)); },
          py::arg("d"), py::arg("eps"), py::arg("seminorm"));
    m.def("lower_bound_params", &lower_bound_params, py::arg("d"), py::arg("eps"));
    m.def("interpolet_eval", &interpolet_eval, py::arg("x"), py::arg("depth") = 12);
    m.def("gadget_error", [](const std::string& sigma, double lambda) {
        return gadget_error(activation_kind_from_string(sigma), lambda);
    }, py::arg("sigma"), py::arg("lam"));

    py::class_<KorobovTarget>(m, "Target")
        .def(py::init([](const std::string& name, int d, const std::function<double(std::vector<double>)>& f,
                         double seminorm, bool exact) {
                 KorobovTarget t;
                 t.name = name;
                 t.dimension = d;
                 t.evaluator = wrap(f);
                 t.seminorm = seminorm;
                 t.seminorm_exact = exact;
                 return t;
             }),
             py::arg("name"), py::arg("d"), py::arg("f"), py::arg("seminorm"), py::arg("seminorm_exact") = true)
        .def_readonly("name", &KorobovTarget::name)
        .def_readonly("dimension", &KorobovTarget::dimension)
        .def_readonly("seminorm", &KorobovTarget::seminorm)
        .def("__call__", [](const KorobovTarget& t, const std::vector<double>& x) { return t.evaluator(x); });
    m.def("registry", &registry, py::arg("d"));
    m.def("find_target", &find_target, py::arg("name"), py::arg("d"));

    py::class_<SparseGridInterpolant>(m, "Interpolant")
        .def_property_readonly("dimension", &SparseGridInterpolant::dimension)
        .def_property_readonly("level", &SparseGridInterpolant::budget)
        .def("__len__", &SparseGridInterpolant::size)
        .def("abs_sum", &SparseGridInterpolant::abs_sum)
        .def("__call__", [](const SparseGridInterpolant& g, const std::vector<double>& x) { return g.evaluate(x); })
        .def("nodes", &SparseGridInterpolant::nodes)
        .def("surpluses", [](const SparseGridInterpolant& g) {
            std::vector<std::tuple<std::vector<int>, std::vector<std::int64_t>, double>> out;
            for (const auto& [li, v] : g.entries()) out.emplace_back(li.level, li.position, v);
            return out;
        });
    m.def("hierarchize", [](const KorobovTarget& f, int n) { return hierarchize_hat(f.evaluator, f.dimension, n); },
          py::arg("target"), py::arg("n"));

    py::class_<NetSpec>(m, "Net")
        .def_readonly("input_dim", &NetSpec::input_dim)
        .def("__call__", [](const NetSpec& net, const std::vector<double>& x) { return net.eval(x); })
        .def("eval_batch", &NetSpec::eval_batch, py::arg("points"))
        .def("neuron_count", &NetSpec::neuron_count)
        .def("neurons_by_layer", &NetSpec::neurons_by_layer)
        .def("depth", &NetSpec::depth)
        .def("trainable_count", &NetSpec::trainable_count)
        .def("parameter_count", &NetSpec::parameter_count)
        .def("to_json", [](const NetSpec& net) { return to_json_string(net); })
        .def_static("from_json", &netspec_from_json_string, py::arg("text"));

    py::class_<SynthesisReport>(m, "Report")
        .def_readonly("net", &SynthesisReport::net)
        .def_readonly("synthesizer", &SynthesisReport::synthesizer)
        .def_readonly("activation", &SynthesisReport::activation)
        .def_readonly("n_used", &SynthesisReport::n_used)
        .def_readonly("eps_tilde", &SynthesisReport::eps_tilde)
        .def_readonly("notes", &SynthesisReport::notes)
        .def_property_readonly("counts", [](const SynthesisReport& r) {
            return py::dict(py::arg("layer1") = r.counts.layer1, py::arg("layer2") = r.counts.layer2,
                            py::arg("total") = r.counts.total, py::arg("trainable") = r.counts.trainable);
        })
        .def_property_readonly("predicted", [](const SynthesisReport& r) {
            return py::dict(py::arg("layer1") = r.predicted.layer1, py::arg("layer2") = r.predicted.layer2,
                            py::arg("total") = r.predicted.total, py::arg("trainable") = r.predicted.trainable);
        })
        .def("to_json", [](const SynthesisReport& r, bool include_net) { return to_json_string(r, include_net); },
             py::arg("include_net") = false);

    m.def("synth_product_shallow", [](int d, double eps, const std::string& act) {
        return synth_product_shallow(d, eps, activation_kind_from_string(act));
    }, py::arg("d"), py::arg("eps"), py::arg("activation") = "relu");
    m.def("synth_korobov_shallow", &synth_korobov_shallow, py::arg("target"), py::arg("eps"));
    m.def("synth_korobov_shallow_general", [](const KorobovTarget& f, double eps, const std::string& act) {
        return synth_korobov_shallow_general(f, eps, activation_kind_from_string(act));
    }, py::arg("target"), py::arg("eps"), py::arg("activation"));
    m.def("synth_korobov_deep", [](const KorobovTarget& f, double eps, const std::string& sigma) {
        return synth_korobov_deep(f, eps, activation_kind_from_string(sigma));
    }, py::arg("target"), py::arg("eps"), py::arg("sigma") = "softplus");

    m.def("sup_error", [](const NetSpec& net, const KorobovTarget& f, int n, std::uint64_t seed) {
        const auto r = sup_error(net, f.evaluator, default_probe(n, seed));
        return py::make_tuple(r.value, r.argmax);
    }, py::arg("net"), py::arg("target"), py::arg("n"), py::arg("seed") = 0,
       "(max |net - f|, argmax) over the standard probe set for level n.");
    m.def("interpolant_sup_error", [](const SparseGridInterpolant& g, const KorobovTarget& f, std::uint64_t seed) {
        const Evaluator gi = [&g](std::span<const double> x) { return g.evaluate(x); };
        const auto r = sup_error(gi, f.evaluator, f.dimension, default_probe(g.budget(), seed));
        return py::make_tuple(r.value, r.argmax);
    }, py::arg("interpolant"), py::arg("target"), py::arg("seed") = 0);

    m.def("run_experiment", [](const KorobovTarget& f, const std::string& synth, double eps, const std::string& act,
                               std::uint64_t seed) {
        return row_dict(run_experiment(f, synth, eps, activation_kind_from_string(act), seed));
    }, py::arg("target"), py::arg("synthesizer"), py::arg("eps"), py::arg("activation") = "relu", py::arg("seed") = 0);
    m.def("scaling_experiment", [](const KorobovTarget& f, const std::string& synth, const std::vector<double>& eps,
                                   const std::string& act) {
        const auto r = scaling_experiment(f, synth, eps, activation_kind_from_string(act));
        py::list rows;
        for (const auto& row : r.rows) rows.append(row_dict(row));
        return py::dict(py::arg("rows") = rows, py::arg("slope") = r.slope, py::arg("intercept") = r.intercept,
                        py::arg("fit_points") = r.fit_points);
    }, py::arg("target"), py::arg("synthesizer"), py::arg("eps_list"), py::arg("activation") = "relu");
    m.def("log_spaced", &log_spaced, py::arg("start"), py::arg("stop"), py::arg("per_decade"));
    m.def("bound_table", [](int d_max, int n_max) {
        py::list out;
        for (const auto& r : bound_table(d_max, n_max)) {
            out.append(py::dict(py::arg("d") = r.d, py::arg("n") = r.n, py::arg("A") = r.a, py::arg("count") = r.count,
                                py::arg("closed_form") = r.closed_form, py::arg("agree") = r.agree));
        }
        return out;
    }, py::arg("d_max"), py::arg("n_max"));
}
