#include "korobov/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace korobov {

using nlohmann::json;

std::string to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::ReLU: return "relu";
        case ActivationKind::Heaviside: return "heaviside";
        case ActivationKind::Logistic: return "logistic";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::Softplus: return "softplus";
        case ActivationKind::ELU: return "elu";
        case ActivationKind::ScaledSigmoidLike: return "scaled_sigmoid_like";
        case ActivationKind::ScaledReLULike: return "scaled_relu_like";
        case ActivationKind::Linear: return "linear";
    }
    throw std::invalid_argument("unknown activation kind");
}

ActivationKind activation_kind_from_string(const std::string& s) {
    for (auto k : {ActivationKind::ReLU, ActivationKind::Heaviside, ActivationKind::Logistic,
                   ActivationKind::Tanh, ActivationKind::Softplus, ActivationKind::ELU,
                   ActivationKind::ScaledSigmoidLike, ActivationKind::ScaledReLULike,
                   ActivationKind::Linear}) {
        if (to_string(k) == s) return k;
    }
    if (s == "sigmoid") return ActivationKind::Logistic;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

bool is_sigmoid_like(ActivationKind k) {
    return k == ActivationKind::Heaviside || k == ActivationKind::Logistic || k == ActivationKind::Tanh;
}

bool is_relu_like(ActivationKind k) {
    return k == ActivationKind::ReLU || k == ActivationKind::Softplus || k == ActivationKind::ELU;
}

std::pair<double, double> sigmoid_limits(ActivationKind k) {
    switch (k) {
        case ActivationKind::Heaviside:
        case ActivationKind::Logistic: return {0.0, 1.0};
        case ActivationKind::Tanh: return {-1.0, 1.0};
        default: throw std::invalid_argument("sigmoid_limits: " + to_string(k) + " is not sigmoid-like");
    }
}

double relu_like_slope(ActivationKind k) {
    if (!is_relu_like(k)) throw std::invalid_argument("relu_like_slope: " + to_string(k) + " is not ReLU-like");
    return 1.0;
}

double second_derivative_at_zero(ActivationKind k) {
    switch (k) {
        case ActivationKind::Softplus: return 0.25;
        case ActivationKind::Logistic: return 0.0;
        case ActivationKind::Tanh: return 0.0;
        default:
            throw std::invalid_argument("second_derivative_at_zero: " + to_string(k) +
                                        " is not twice differentiable at 0");
    }
}

double apply_base(ActivationKind k, double z) {
    switch (k) {
        case ActivationKind::ReLU: return z > 0.0 ? z : 0.0;
        case ActivationKind::Heaviside: return z >= 0.0 ? 1.0 : 0.0;
        case ActivationKind::Logistic:
            if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
            else {
                const double e = std::exp(z);
                return e / (1.0 + e);
            }
        case ActivationKind::Tanh: return std::tanh(z);
        case ActivationKind::Softplus: return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
        case ActivationKind::ELU: return z > 0.0 ? z : std::expm1(z);
        case ActivationKind::Linear: return z;
        default: throw std::invalid_argument("apply_base: composite kind " + to_string(k));
    }
}

double Activation::operator()(double z) const {
    switch (kind) {
        case ActivationKind::ScaledSigmoidLike: return (apply_base(base, M * z) - a) / (b - a);
        case ActivationKind::ScaledReLULike: return apply_base(base, M * z) / (M * b);
        default: return apply_base(kind, z);
    }
}

Activation Activation::plain(ActivationKind k) {
    if (k == ActivationKind::ScaledSigmoidLike || k == ActivationKind::ScaledReLULike) {
        throw std::invalid_argument("Activation::plain: scaled kinds need parameters");
    }
    Activation act;
    act.kind = k;
    act.base = k;
    return act;
}

Activation Activation::scaled_sigmoid(ActivationKind base, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("scaled_sigmoid: M must be > 0");
    const auto [lo, hi] = sigmoid_limits(base);
    Activation act;
    act.kind = ActivationKind::ScaledSigmoidLike;
    act.base = base;
    act.M = M;
    act.a = lo;
    act.b = hi;
    return act;
}

Activation Activation::scaled_relu(ActivationKind base, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("scaled_relu: M must be > 0");
    Activation act;
    act.kind = ActivationKind::ScaledReLULike;
    act.base = base;
    act.M = M;
    act.a = 0.0;
    act.b = relu_like_slope(base);
    return act;
}

Activation scale_sigmoid_like(ActivationKind base, double delta, double eps) {
    if (!(delta > 0.0) || !(eps > 0.0)) throw std::invalid_argument("scale_sigmoid_like: delta, eps must be > 0");
    double M = 1.0;
    while (true) {
        const Activation act = Activation::scaled_sigmoid(base, M);
        if (act(delta) >= 1.0 - eps && act(-delta) <= eps) return act;
        M *= 2.0;
        if (M * delta > 1e9) {
            throw std::runtime_error("scale_sigmoid_like: limits of " + to_string(base) +
                                     " not reached within |x| <= 1e9");
        }
    }
}

Activation scale_relu_like(ActivationKind base, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("scale_relu_like: eps must be > 0");
    std::vector<double> grid{0.0};
    for (int k = 0; k <= 720; ++k) {
        const double x = std::pow(10.0, -12.0 + 18.0 * k / 720.0);
        grid.push_back(x);
        grid.push_back(-x);
    }
    double M = 1.0;
    while (true) {
        const Activation act = Activation::scaled_relu(base, M);
        double worst = 0.0;
        for (double x : grid) worst = std::max(worst, std::abs(act(x) - std::max(x, 0.0)));
        if (worst <= eps) return act;
        M *= 2.0;
        if (M > 1e18) throw std::runtime_error("scale_relu_like: no scaling reaches eps");
    }
}

SparseMatrix SparseMatrix::from_triplets(std::int64_t rows, std::int64_t cols, std::vector<Triplet> t) {
    std::sort(t.begin(), t.end(), [](const Triplet& x, const Triplet& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k].row < 0 || t[k].row >= rows || t[k].col < 0 || t[k].col >= cols) {
            throw std::out_of_range("SparseMatrix: triplet outside matrix");
        }
        if (!m.col.empty() && k > 0 && t[k].row == t[k - 1].row && t[k].col == t[k - 1].col) {
            m.val.back() += t[k].value;
            continue;
        }
        m.col.push_back(t[k].col);
        m.val.push_back(t[k].value);
        ++m.row_ptr[static_cast<std::size_t>(t[k].row) + 1];
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& dense, std::int64_t cols) {
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < dense.size(); ++r) {
        if (static_cast<std::int64_t>(dense[r].size()) != cols) {
            throw std::invalid_argument("SparseMatrix::from_dense: ragged rows");
        }
        for (std::size_t c = 0; c < dense[r].size(); ++c) {
            if (dense[r][c] != 0.0) t.push_back({static_cast<std::int64_t>(r), static_cast<std::int64_t>(c), dense[r][c]});
        }
    }
    return from_triplets(static_cast<std::int64_t>(dense.size()), cols, std::move(t));
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
    std::vector<std::vector<double>> d(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols), 0.0));
    for (std::int64_t r = 0; r < rows; ++r) {
        for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) d[r][col[k]] += val[k];
    }
    return d;
}

void SparseMatrix::multiply(std::span<const double> in, std::span<double> out) const {
    for (std::int64_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * in[col[k]];
        out[r] = s;
    }
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("multiply: inner dimensions differ");
    SparseMatrix c;
    c.rows = a.rows;
    c.cols = b.cols;
    c.row_ptr.assign(static_cast<std::size_t>(a.rows) + 1, 0);
    std::vector<double> acc(static_cast<std::size_t>(b.cols), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(b.cols), 0);
    std::vector<std::int64_t> touched;
    for (std::int64_t r = 0; r < a.rows; ++r) {
        touched.clear();
        for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const auto mid = a.col[k];
            for (auto q = b.row_ptr[mid]; q < b.row_ptr[mid + 1]; ++q) {
                const auto cc = b.col[q];
                if (!seen[cc]) {
                    seen[cc] = 1;
                    touched.push_back(cc);
                }
                acc[cc] += a.val[k] * b.val[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (auto cc : touched) {
            c.col.push_back(cc);
            c.val.push_back(acc[cc]);
            acc[cc] = 0.0;
            seen[cc] = 0;
        }
        c.row_ptr[r + 1] = static_cast<std::int64_t>(c.col.size());
    }
    return c;
}

AffineForm& AffineForm::add(const AffineForm& other, double scale) {
    for (const auto& [i, w] : other.terms) terms.emplace_back(i, w * scale);
    constant += other.constant * scale;
    return *this;
}

std::int64_t LayerBuilder::add_unit(const AffineForm& pre, bool linear_unit) {
    const auto row = static_cast<std::int64_t>(bias_.size());
    for (const auto& [c, w] : pre.terms) triplets_.push_back({row, c, w});
    bias_.push_back(pre.constant);
    if (linear_unit) linear_units_.push_back(row);
    return row;
}

Layer LayerBuilder::build(const Activation& act) && {
    Layer layer;
    layer.w = SparseMatrix::from_triplets(size(), input_width_, std::move(triplets_));
    layer.b = std::move(bias_);
    layer.act = act;
    if (act.kind != ActivationKind::Linear) layer.linear_units = std::move(linear_units_);
    return layer;
}

double NetSpec::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim) {
        throw std::invalid_argument("net_eval: expected " + std::to_string(input_dim) + " inputs, got " +
                                    std::to_string(x.size()));
    }
    std::vector<double> h(x.begin(), x.end()), z;
    for (const auto& layer : layers) {
        z.resize(static_cast<std::size_t>(layer.width()));
        layer.w.multiply(h, z);
        for (std::size_t r = 0; r < z.size(); ++r) z[r] += layer.b[r];
        if (!layer.is_linear()) {
            auto lin = layer.linear_units.begin();
            for (std::size_t r = 0; r < z.size(); ++r) {
                if (lin != layer.linear_units.end() && *lin == static_cast<std::int64_t>(r)) {
                    ++lin;
                    continue;
                }
                z[r] = layer.act(z[r]);
            }
        }
        std::swap(h, z);
    }
    double out = out_b;
    for (std::size_t r = 0; r < h.size(); ++r) out += out_w[r] * h[r];
    return out;
}

std::vector<double> NetSpec::eval_batch(const std::vector<std::vector<double>>& xs) const {
    // Points are processed in blocks so each weight matrix is streamed once per block.
    constexpr std::size_t B = 64;
    std::vector<double> out(xs.size());
    std::vector<double> h, z;
    for (std::size_t start = 0; start < xs.size(); start += B) {
        const std::size_t nb = std::min(B, xs.size() - start);
        h.assign(static_cast<std::size_t>(input_dim) * B, 0.0);
        for (std::size_t p = 0; p < nb; ++p) {
            const auto& x = xs[start + p];
            if (static_cast<int>(x.size()) != input_dim) {
                throw std::invalid_argument("net_eval: expected " + std::to_string(input_dim) + " inputs, got " +
                                            std::to_string(x.size()));
            }
            for (int j = 0; j < input_dim; ++j) h[static_cast<std::size_t>(j) * B + p] = x[j];
        }
        for (const auto& layer : layers) {
            const auto rows = static_cast<std::size_t>(layer.width());
            z.resize(rows * B);
            auto lin = layer.linear_units.begin();
            for (std::size_t r = 0; r < rows; ++r) {
                double* zr = z.data() + r * B;
                for (std::size_t p = 0; p < B; ++p) zr[p] = 0.0;
                for (auto k = layer.w.row_ptr[r]; k < layer.w.row_ptr[r + 1]; ++k) {
                    const double w = layer.w.val[k];
                    const double* hc = h.data() + static_cast<std::size_t>(layer.w.col[k]) * B;
                    for (std::size_t p = 0; p < B; ++p) zr[p] += w * hc[p];
                }
                for (std::size_t p = 0; p < B; ++p) zr[p] += layer.b[r];
                if (layer.is_linear()) continue;
                if (lin != layer.linear_units.end() && *lin == static_cast<std::int64_t>(r)) {
                    ++lin;
                    continue;
                }
                if (layer.act.kind == ActivationKind::ReLU) {
                    for (std::size_t p = 0; p < nb; ++p) zr[p] = zr[p] > 0.0 ? zr[p] : 0.0;
                } else {
                    for (std::size_t p = 0; p < nb; ++p) zr[p] = layer.act(zr[p]);
                }
            }
            std::swap(h, z);
        }
        for (std::size_t p = 0; p < nb; ++p) {
            double o = out_b;
            for (std::size_t r = 0; r < out_w.size(); ++r) o += out_w[r] * h[r * B + p];
            out[start + p] = o;
        }
    }
    return out;
}

std::int64_t NetSpec::neuron_count() const {
    std::int64_t n = 0;
    for (const auto& l : layers) {
        if (!l.is_linear()) n += l.width();
    }
    return n;
}

std::vector<std::int64_t> NetSpec::neurons_by_layer() const {
    std::vector<std::int64_t> out;
    for (const auto& l : layers) {
        if (!l.is_linear()) out.push_back(l.width());
    }
    return out;
}

int NetSpec::depth() const { return static_cast<int>(neurons_by_layer().size()); }

std::int64_t NetSpec::trainable_count() const {
    return trainable >= 0 ? trainable : static_cast<std::int64_t>(out_w.size());
}

std::int64_t NetSpec::parameter_count() const {
    std::int64_t p = static_cast<std::int64_t>(out_w.size()) + 1;
    for (const auto& l : layers) p += static_cast<std::int64_t>(l.w.nnz() + l.b.size());
    return p;
}

void NetSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("NetSpec: input_dim must be >= 1");
    std::int64_t width = input_dim;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        const std::string where = "NetSpec layer " + std::to_string(k) + ": ";
        if (l.w.cols != width) throw std::invalid_argument(where + "input width mismatch");
        if (static_cast<std::int64_t>(l.b.size()) != l.w.rows) throw std::invalid_argument(where + "bias size mismatch");
        if (static_cast<std::int64_t>(l.w.row_ptr.size()) != l.w.rows + 1 || l.w.col.size() != l.w.val.size() ||
            l.w.row_ptr.back() != static_cast<std::int64_t>(l.w.val.size())) {
            throw std::invalid_argument(where + "malformed CSR arrays");
        }
        for (auto c : l.w.col) {
            if (c < 0 || c >= l.w.cols) throw std::invalid_argument(where + "column index out of range");
        }
        if (!std::is_sorted(l.linear_units.begin(), l.linear_units.end())) {
            throw std::invalid_argument(where + "linear_units must be sorted");
        }
        for (auto u : l.linear_units) {
            if (u < 0 || u >= l.w.rows) throw std::invalid_argument(where + "linear unit out of range");
        }
        if (!(l.act.M > 0.0)) throw std::invalid_argument(where + "scaling M must be > 0");
        if (l.act.kind == ActivationKind::ScaledSigmoidLike && !(l.act.b > l.act.a)) {
            throw std::invalid_argument(where + "sigmoid-like limits need b > a");
        }
        if (l.act.kind == ActivationKind::ScaledReLULike && !(l.act.b > 0.0)) {
            throw std::invalid_argument(where + "ReLU-like slope must be > 0");
        }
        width = l.w.rows;
    }
    if (static_cast<std::int64_t>(out_w.size()) != width) throw std::invalid_argument("NetSpec: output width mismatch");
}

NetSpec NetSpec::fold_linear() const {
    NetSpec out;
    out.input_dim = input_dim;
    out.trainable = trainable;
    bool pending = false;
    Layer p;
    for (const auto& layer : layers) {
        Layer cur = layer;
        if (pending) {
            cur.w = multiply(layer.w, p.w);
            std::vector<double> shift(static_cast<std::size_t>(layer.width()));
            layer.w.multiply(p.b, shift);
            for (std::size_t r = 0; r < shift.size(); ++r) cur.b[r] += shift[r];
        }
        if (cur.is_linear()) {
            p = std::move(cur);
            pending = true;
        } else {
            out.layers.push_back(std::move(cur));
            pending = false;
        }
    }
    if (pending) {
        out.out_w.assign(static_cast<std::size_t>(p.w.cols), 0.0);
        out.out_b = out_b;
        for (std::int64_t r = 0; r < p.w.rows; ++r) {
            out.out_b += out_w[r] * p.b[r];
            for (auto k = p.w.row_ptr[r]; k < p.w.row_ptr[r + 1]; ++k) out.out_w[p.w.col[k]] += out_w[r] * p.w.val[k];
        }
    } else {
        out.out_w = out_w;
        out.out_b = out_b;
    }
    return out;
}

NetSpec parallel_sum(const NetSpec& a, const NetSpec& b) {
    if (a.input_dim != b.input_dim || a.layers.size() != b.layers.size()) {
        throw std::invalid_argument("parallel_sum: nets must share input dimension and layer count");
    }
    NetSpec out;
    out.input_dim = a.input_dim;
    for (std::size_t k = 0; k < a.layers.size(); ++k) {
        const auto& la = a.layers[k];
        const auto& lb = b.layers[k];
        if (!(la.act == lb.act)) throw std::invalid_argument("parallel_sum: activations differ at layer " + std::to_string(k));
        const std::int64_t col_shift = k == 0 ? 0 : la.w.cols;
        std::vector<SparseMatrix::Triplet> t;
        for (std::int64_t r = 0; r < la.w.rows; ++r)
            for (auto q = la.w.row_ptr[r]; q < la.w.row_ptr[r + 1]; ++q) t.push_back({r, la.w.col[q], la.w.val[q]});
        for (std::int64_t r = 0; r < lb.w.rows; ++r)
            for (auto q = lb.w.row_ptr[r]; q < lb.w.row_ptr[r + 1]; ++q)
                t.push_back({la.w.rows + r, lb.w.col[q] + col_shift, lb.w.val[q]});
        Layer l;
        l.w = SparseMatrix::from_triplets(la.w.rows + lb.w.rows, k == 0 ? a.input_dim : la.w.cols + lb.w.cols, std::move(t));
        l.b = la.b;
        l.b.insert(l.b.end(), lb.b.begin(), lb.b.end());
        l.act = la.act;
        l.linear_units = la.linear_units;
        for (auto u : lb.linear_units) l.linear_units.push_back(u + la.w.rows);
        out.layers.push_back(std::move(l));
    }
    out.out_w = a.out_w;
    out.out_w.insert(out.out_w.end(), b.out_w.begin(), b.out_w.end());
    out.out_b = a.out_b + b.out_b;
    out.trainable = a.trainable_count() + b.trainable_count();
    return out;
}

std::string to_json_string(const NetSpec& net, int indent) {
    json j;
    j["input_dim"] = net.input_dim;
    j["layers"] = json::array();
    for (const auto& l : net.layers) {
        json jl;
        if (l.w.rows * l.w.cols <= kDenseJsonLimit) {
            jl["w"] = l.w.to_dense();
        } else {
            jl["w"] = {{"format", "csr"}, {"rows", l.w.rows}, {"cols", l.w.cols},
                       {"row_ptr", l.w.row_ptr}, {"col", l.w.col}, {"val", l.w.val}};
        }
        jl["b"] = l.b;
        jl["act"] = to_string(l.act.kind);
        json params = json::object();
        if (l.act.kind == ActivationKind::ScaledSigmoidLike || l.act.kind == ActivationKind::ScaledReLULike) {
            params["M"] = l.act.M;
            params["a"] = l.act.a;
            params["b"] = l.act.b;
            params["base"] = to_string(l.act.base);
        }
        if (!l.linear_units.empty()) params["linear_units"] = l.linear_units;
        jl["act_params"] = params;
        j["layers"].push_back(std::move(jl));
    }
    j["out_w"] = net.out_w;
    j["out_b"] = net.out_b;
    j["meta"] = {{"neurons", net.neuron_count()}, {"trainable", net.trainable_count()}, {"depth", net.depth()}};
    return j.dump(indent);
}

NetSpec netspec_from_json_string(const std::string& text) {
    const json j = json::parse(text);
    NetSpec net;
    net.input_dim = j.at("input_dim").get<int>();
    std::int64_t width = net.input_dim;
    for (const auto& jl : j.at("layers")) {
        Layer l;
        const auto& w = jl.at("w");
        if (w.is_object()) {
            if (w.value("format", "") != "csr") throw std::invalid_argument("NetSpec JSON: unknown matrix format");
            l.w.rows = w.at("rows").get<std::int64_t>();
            l.w.cols = w.at("cols").get<std::int64_t>();
            l.w.row_ptr = w.at("row_ptr").get<std::vector<std::int64_t>>();
            l.w.col = w.at("col").get<std::vector<std::int64_t>>();
            l.w.val = w.at("val").get<std::vector<double>>();
        } else {
            l.w = SparseMatrix::from_dense(w.get<std::vector<std::vector<double>>>(), width);
        }
        l.b = jl.at("b").get<std::vector<double>>();
        const auto kind = activation_kind_from_string(jl.at("act").get<std::string>());
        const json params = jl.value("act_params", json::object());
        if (kind == ActivationKind::ScaledSigmoidLike || kind == ActivationKind::ScaledReLULike) {
            l.act.kind = kind;
            l.act.base = activation_kind_from_string(params.at("base").get<std::string>());
            l.act.M = params.at("M").get<double>();
            l.act.a = params.at("a").get<double>();
            l.act.b = params.at("b").get<double>();
        } else {
            l.act = Activation::plain(kind);
        }
        if (params.contains("linear_units")) l.linear_units = params["linear_units"].get<std::vector<std::int64_t>>();
        width = l.w.rows;
        net.layers.push_back(std::move(l));
    }
    net.out_w = j.at("out_w").get<std::vector<double>>();
    net.out_b = j.at("out_b").get<double>();
    if (j.contains("meta") && j["meta"].contains("trainable")) net.trainable = j["meta"]["trainable"].get<std::int64_t>();
    net.validate();
    return net;
}

GadgetUnits product_gadget_units(const AffineForm& x, const AffineForm& y, ActivationKind sigma, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("product_gadget: lambda must be > 0");
    const double s2 = second_derivative_at_zero(sigma);
    if (std::abs(s2) < 1e-6) {
        throw std::invalid_argument("product_gadget: " + to_string(sigma) + " has sigma''(0) = 0");
    }
    GadgetUnits g;
    const double sign_x[4] = {1.0, -1.0, 1.0, -1.0};
    const double sign_y[4] = {1.0, -1.0, -1.0, 1.0};
    const double c = 1.0 / (4.0 * lambda * lambda * s2);
    for (int k = 0; k < 4; ++k) {
        g.pre[k] = AffineForm{};
        g.pre[k].add(x, lambda * sign_x[k]).add(y, lambda * sign_y[k]);
        g.out_weight[k] = k < 2 ? c : -c;
    }
    return g;
}

NetSpec product_gadget(ActivationKind sigma, double lambda) {
    const auto g = product_gadget_units(AffineForm::unit(0), AffineForm::unit(1), sigma, lambda);
    LayerBuilder lb(2);
    for (const auto& pre : g.pre) lb.add_unit(pre);
    NetSpec net;
    net.input_dim = 2;
    net.layers.push_back(std::move(lb).build(Activation::plain(sigma)));
    net.out_w.assign(g.out_weight, g.out_weight + 4);
    return net;
}

NetSpec product_tree(int d, ActivationKind sigma, double lambda) {
    if (d < 2) throw std::invalid_argument("product_tree: requires d >= 2");
    NetSpec net;
    net.input_dim = d;
    std::vector<AffineForm> values;
    for (int j = 0; j < d; ++j) values.push_back(AffineForm::unit(j));
    std::int64_t width = d;
    while (values.size() > 1) {
        LayerBuilder lb(width);
        std::vector<AffineForm> next;
        for (std::size_t k = 0; k + 1 < values.size(); k += 2) {
            const auto g = product_gadget_units(values[k], values[k + 1], sigma, lambda);
            AffineForm out;
            for (int u = 0; u < 4; ++u) out.add(AffineForm::unit(lb.add_unit(g.pre[u]), g.out_weight[u]));
            next.push_back(std::move(out));
        }
        if (values.size() % 2 == 1) next.push_back(AffineForm::unit(lb.add_unit(values.back(), true)));
        width = lb.size();
        net.layers.push_back(std::move(lb).build(Activation::plain(sigma)));
        values = std::move(next);
    }
    net.out_w.assign(static_cast<std::size_t>(width), 0.0);
    for (const auto& [i, w] : values[0].terms) net.out_w[i] += w;
    net.out_b = values[0].constant;
    return net;
}

double gadget_error(ActivationKind sigma, double lambda, int m) {
    const NetSpec g = product_gadget(sigma, lambda);
    double worst = 0.0;
    for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
            const double x[2] = {static_cast<double>(p) / (m - 1), static_cast<double>(q) / (m - 1)};
            worst = std::max(worst, std::abs(g.eval(x) - x[0] * x[1]));
        }
    }
    return worst;
}

double calibrate_lambda(ActivationKind sigma, double target, double lambda0) {
    if (!(target > 0.0)) throw std::invalid_argument("calibrate_lambda: target must be > 0");
    const double e0 = gadget_error(sigma, lambda0);
    if (e0 <= target) return lambda0;
    double lambda = std::min(lambda0, lambda0 * std::sqrt(target / e0) * 0.8);
    for (int it = 0; it < 60; ++it) {
        if (gadget_error(sigma, lambda) <= target) return lambda;
        lambda *= 0.5;
    }
    throw std::runtime_error("calibrate_lambda: target below the gadget's rounding floor");
}

}  // namespace korobov
