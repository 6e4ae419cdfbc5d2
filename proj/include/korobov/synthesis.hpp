#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "korobov/hierarchy.hpp"
#include "korobov/network.hpp"

namespace korobov {

/// A function on [0,1]^d together with a bound on its mixed second-order seminorm.
struct KorobovTarget {
    std::string name;
    int dimension = 1;
    Evaluator evaluator;
    double seminorm = 0.0;
    /// False when `seminorm` is a sampled estimate rather than a closed form.
    bool seminorm_exact = true;
    std::string seminorm_note;
    bool vanishes_on_boundary = true;
};

struct LayerCounts {
    std::int64_t layer1 = 0;
    std::int64_t layer2 = 0;
    std::int64_t total = 0;
    std::int64_t trainable = 0;
};

struct SynthesisReport {
    NetSpec net;
    std::string synthesizer;
    std::string activation;
    int dimension = 0;
    /// Sparse-grid level; 0 for the product network.
    int n_used = 0;
    LayerCounts counts;
    /// Counts from the closed-form formulas, computed independently of the net.
    LayerCounts predicted;
    /// Closed-form size of one second-layer block (one basis function).
    std::int64_t predicted_block2 = 0;
    double target_eps = 0.0;
    double eps_tilde = 0.0;
    /// Sum of |surplus| over the grid (0 for the product network).
    double surplus_abs_sum = 0.0;
    std::vector<std::string> notes;
};

/// Shallow network for prod_j x_j on [0,1]^d within eps: layer 1 holds d
/// truncated-log approximants, layer 2 the exponential on the negative axis.
/// Internally targets eps / 3. `activation` selects the family: ReLU, a
/// ReLU-like base (Softplus, ELU) or a sigmoid-like base (Heaviside, Logistic, Tanh).
/// The net does not depend on a target function, so its trainable count is 0.
SynthesisReport synth_product_shallow(int d, double eps, ActivationKind activation = ActivationKind::ReLU);

/// Two-hidden-layer ReLU network for f within eps. Layer 1 approximates
/// max(log phi_{l,i}, log(et/3)) for each coordinate and 1-D index within
/// et/(3d); a linear layer sums them per basis function; layer 2 holds one
/// exp block (error et/3) per grid index; a linear layer forms the block
/// outputs, and the output weights are the surpluses. et = eps / (2 s).
SynthesisReport synth_korobov_shallow(const KorobovTarget& f, double eps);

/// Same construction for a ReLU-like base (every ReLU replaced by the scaled
/// wrapper, base net at 0.9 eps, wrapper error within the remaining 0.1 eps)
/// or a sigmoid-like base (Heaviside-sum approximants in both layers).
SynthesisReport synth_korobov_shallow_general(const KorobovTarget& f, double eps, ActivationKind activation);

/// Layer 1 evaluates every 1-D hat exactly with 4 ReLU units; the next
/// ceil(log2 d) layers hold one product tree of `sigma` gadgets per grid index;
/// a linear layer exposes the products and the output weights are the
/// surpluses. Requires d >= 2.
SynthesisReport synth_korobov_deep(const KorobovTarget& f, double eps, ActivationKind sigma = ActivationKind::Softplus);

/// Thresholds (in input coordinates) of the first-layer step units of a
/// sigmoid-like synthesized net with one input; used to exclude jump neighborhoods.
std::vector<double> first_layer_thresholds(const NetSpec& net);

std::string to_json_string(const SynthesisReport& r, bool include_net = true);

}  // namespace korobov
