#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace korobov {

enum class ActivationKind {
    ReLU,
    Heaviside,
    Logistic,
    Tanh,
    Softplus,
    ELU,
    /// (base(M z) - a) / (b - a) with a, b the limits of the base at -inf, +inf.
    ScaledSigmoidLike,
    /// base(M z) / (M b) with b the slope of the base's asymptote at +inf.
    ScaledReLULike,
    /// Identity; layers with this activation hold no neurons.
    Linear,
};

std::string to_string(ActivationKind k);
ActivationKind activation_kind_from_string(const std::string& s);

bool is_sigmoid_like(ActivationKind k);
bool is_relu_like(ActivationKind k);

/// Limits (a, b) of a sigmoid-like base at -inf and +inf.
std::pair<double, double> sigmoid_limits(ActivationKind k);

/// Slope b of the affine asymptote of a ReLU-like base.
double relu_like_slope(ActivationKind k);

/// sigma''(0) for C^2 bases. Throws std::invalid_argument for bases that are
/// not twice differentiable at the origin.
double second_derivative_at_zero(ActivationKind k);

struct Activation {
    ActivationKind kind = ActivationKind::ReLU;
    ActivationKind base = ActivationKind::ReLU;
    double M = 1.0;
    double a = 0.0;
    double b = 1.0;

    double operator()(double z) const;

    static Activation plain(ActivationKind k);
    static Activation scaled_sigmoid(ActivationKind base, double M);
    static Activation scaled_relu(ActivationKind base, double M);

    bool operator==(const Activation&) const = default;
};

double apply_base(ActivationKind k, double z);

/// Doubling search from M = 1 for the smallest power of two such that the
/// wrapped activation is within eps of the Heaviside step for |x| >= delta.
/// Throws std::runtime_error if M * delta would exceed 1e9.
Activation scale_sigmoid_like(ActivationKind base, double delta, double eps);

/// Doubling search so that |base(M x) / (M b) - relu(x)| <= eps on a
/// log-spaced grid covering [-1e6, 1e6].
Activation scale_relu_like(ActivationKind base, double eps);

/// Compressed sparse row matrix.
struct SparseMatrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int64_t> col;
    std::vector<double> val;

    struct Triplet {
        std::int64_t row;
        std::int64_t col;
        double value;
    };

    /// Duplicate (row, col) entries are summed.
    static SparseMatrix from_triplets(std::int64_t rows, std::int64_t cols, std::vector<Triplet> t);
    static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense, std::int64_t cols);

    std::size_t nnz() const { return val.size(); }
    std::vector<std::vector<double>> to_dense() const;

    /// out = W * in.
    void multiply(std::span<const double> in, std::span<double> out) const;

    bool operator==(const SparseMatrix&) const = default;
};

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

struct Layer {
    SparseMatrix w;
    std::vector<double> b;
    Activation act;
    /// Units of a non-linear layer that skip the activation (pass-through wiring).
    std::vector<std::int64_t> linear_units;

    std::int64_t width() const { return w.rows; }
    bool is_linear() const { return act.kind == ActivationKind::Linear; }
};

/// Sparse affine combination of the outputs of the previous layer.
struct AffineForm {
    std::vector<std::pair<std::int64_t, double>> terms;
    double constant = 0.0;

    AffineForm& add(const AffineForm& other, double scale = 1.0);
    static AffineForm unit(std::int64_t index, double weight = 1.0) { return {{{index, weight}}, 0.0}; }
};

/// Accumulates units of one layer from their pre-activation forms.
class LayerBuilder {
public:
    explicit LayerBuilder(std::int64_t input_width) : input_width_(input_width) {}

    /// Returns the index of the new unit within the layer.
    std::int64_t add_unit(const AffineForm& pre, bool linear_unit = false);
    std::int64_t size() const { return static_cast<std::int64_t>(bias_.size()); }

    Layer build(const Activation& act) &&;

private:
    std::int64_t input_width_;
    std::vector<SparseMatrix::Triplet> triplets_;
    std::vector<double> bias_;
    std::vector<std::int64_t> linear_units_;
};

class NetSpec {
public:
    int input_dim = 0;
    std::vector<Layer> layers;
    std::vector<double> out_w;
    double out_b = 0.0;
    /// Count of function-dependent parameters; -1 means "the output weights".
    std::int64_t trainable = -1;

    /// Throws std::invalid_argument on dimension mismatch.
    double eval(std::span<const double> x) const;
    std::vector<double> eval_batch(const std::vector<std::vector<double>>& xs) const;

    /// Sum of widths of non-linear layers.
    std::int64_t neuron_count() const;
    std::vector<std::int64_t> neurons_by_layer() const;
    /// Number of non-linear hidden layers.
    int depth() const;
    std::int64_t trainable_count() const;
    std::int64_t parameter_count() const;

    void validate() const;

    /// Equivalent net without Linear layers (each is multiplied into its successor).
    NetSpec fold_linear() const;
};

/// Side-by-side composition with summed outputs. Both nets must have the same
/// input dimension and the same layer activations.
NetSpec parallel_sum(const NetSpec& a, const NetSpec& b);

std::string to_json_string(const NetSpec& net, int indent = -1);
NetSpec netspec_from_json_string(const std::string& text);

/// Matrices with at most this many entries are written densely as "w".
inline constexpr std::int64_t kDenseJsonLimit = 4096;

/// Forms computed by the four units of a product gadget, given forms for x and y.
struct GadgetUnits {
    AffineForm pre[4];
    double out_weight[4];
};
GadgetUnits product_gadget_units(const AffineForm& x, const AffineForm& y, ActivationKind sigma,
                                 double lambda);

/// Two inputs, four neurons, linear output approximating x * y.
NetSpec product_gadget(ActivationKind sigma, double lambda);

/// Balanced binary tree of gadgets over d >= 2 inputs; depth ceil(log2 d).
/// An unpaired value at a level is carried by a pass-through unit.
NetSpec product_tree(int d, ActivationKind sigma, double lambda);

/// Largest |gadget(x, y) - x y| on an m x m grid of [0,1]^2.
double gadget_error(ActivationKind sigma, double lambda, int m = 33);

/// Largest lambda (starting from lambda0 and shrinking) whose measured gadget
/// error is at most target.
double calibrate_lambda(ActivationKind sigma, double target, double lambda0 = 0.25);

}  // namespace korobov
