#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "korobov/hierarchy.hpp"
#include "korobov/synthesis.hpp"

namespace korobov {

/// P_d = prod 4 x_j (1 - x_j), S_d = prod sin(pi x_j), Z = 0, all on [0,1]^d.
std::vector<KorobovTarget> registry(int d);

/// Throws std::invalid_argument for an unknown name.
KorobovTarget find_target(const std::string& name, int d);

struct SupErrorOptions {
    /// Low-discrepancy points (at least 1e4 are always used).
    std::int64_t samples = 10000;
    /// Skips this many points of the sequence.
    std::uint64_t seed = 0;
    /// Tensor grid with 2^L + 1 points per axis, reduced until it has at most
    /// `max_grid_points` points. 0 disables the grid.
    int grid_level = 0;
    std::int64_t max_grid_points = 300000;
    /// Nodes of the sparse grid at this level are added (0 for none).
    int sparse_level = 0;
};

struct SupErrorResult {
    double value = 0.0;
    std::vector<double> argmax;
    std::int64_t points = 0;
};

/// max |a - b| over Sobol points, a tensor grid and sparse-grid nodes.
/// Deterministic for fixed options.
SupErrorResult sup_error(const Evaluator& a, const Evaluator& b, int d, const SupErrorOptions& opt = {});

/// Same probe set, evaluating the net in blocks.
SupErrorResult sup_error(const NetSpec& net, const Evaluator& b, const SupErrorOptions& opt = {});

/// The full probe set of sup_error, in evaluation order.
std::vector<std::vector<double>> probe_points(int d, const SupErrorOptions& opt);

/// The Sobol part of the probe set, as used by sup_error.
std::vector<std::vector<double>> sobol_points(int d, std::int64_t count, std::uint64_t seed = 0);

/// Probe set used for a synthesized net at level n: Sobol points, tensor grid
/// at level min(n + 2, cap), sparse-grid nodes at level n.
SupErrorOptions default_probe(int n, std::uint64_t seed = 0);

struct ExperimentRow {
    int d = 0;
    int n = 0;
    double eps_target = 0.0;
    std::string synthesizer;
    std::string activation;
    std::vector<std::int64_t> neurons_by_layer;
    int depth = 0;
    std::int64_t trainable = 0;
    double sup_error_measured = 0.0;
    double bound_theoretical = 0.0;
    double wall_time = 0.0;

    bool operator==(const ExperimentRow&) const = default;
};

std::string csv_header();
/// Floats with 17 significant digits; neurons_by_layer joined by ';'.
std::string to_csv(const ExperimentRow& r);
ExperimentRow row_from_csv(const std::string& line);
std::string to_json_string(const ExperimentRow& r);
ExperimentRow row_from_json_string(const std::string& text);

/// Synthesizer ids: "sparse-grid" (the hat interpolant itself, no network),
/// "shallow", "shallow-general", "deep", "product".
SynthesisReport synthesize(const std::string& synthesizer, const KorobovTarget& f, double eps,
                           ActivationKind activation);

/// Builds and measures one configuration. `report` receives the synthesis
/// report when a network is built.
ExperimentRow run_experiment(const KorobovTarget& f, const std::string& synthesizer, double eps,
                             ActivationKind activation, std::uint64_t seed = 0, SynthesisReport* report = nullptr);

struct ScalingResult {
    std::vector<ExperimentRow> rows;
    double slope = 0.0;
    double intercept = 0.0;
    std::int64_t fit_points = 0;
};

/// Least-squares slope of log(trainable / (log 1/eps)^{3(d-1)/2}) against
/// log(1/eps) over the last half of the series. eps_list must be decreasing
/// with at least 4 values.
ScalingResult scaling_experiment(const KorobovTarget& f, const std::string& synthesizer,
                                 const std::vector<double>& eps_list, ActivationKind activation = ActivationKind::ReLU,
                                 std::uint64_t seed = 0);

/// eps_list of `per_decade` log-spaced values from `from` down to `to`.
std::vector<double> log_spaced(double from, double to, int per_decade);

struct BoundRow {
    int d = 0;
    int n = 0;
    std::uint64_t a = 0;
    std::uint64_t count = 0;
    std::int64_t closed_form = 0;
    bool agree = false;
};

/// A(d, n), count_indices and the alternating closed form for d <= d_max <= 6, n <= n_max <= 12.
std::vector<BoundRow> bound_table(int d_max, int n_max);

/// (-1)^d + 2^n sum_{i<d} binom(n+d-1, i) (-2)^{d-1-i}, in exact integer arithmetic.
std::int64_t count_closed_form(int d, int n);

/// eps^{-1/2} (log 1/eps)^{(d-1)/2}.
double lower_bound_params(int d, double eps);

}  // namespace korobov
