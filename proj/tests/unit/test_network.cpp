#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "korobov/network.hpp"
#include "korobov/univariate.hpp"

using namespace korobov;

namespace {

NetSpec random_net(std::mt19937_64& rng, int input, std::vector<std::pair<int, ActivationKind>> shape) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    NetSpec net;
    net.input_dim = input;
    std::int64_t width = input;
    for (auto [w, k] : shape) {
        LayerBuilder lb(width);
        for (int r = 0; r < w; ++r) {
            AffineForm f;
            for (std::int64_t c = 0; c < width; ++c) {
                if (u(rng) > 0.0) f.terms.emplace_back(c, u(rng));
            }
            f.constant = u(rng);
            lb.add_unit(f);
        }
        net.layers.push_back(std::move(lb).build(Activation::plain(k)));
        width = w;
    }
    for (std::int64_t r = 0; r < width; ++r) net.out_w.push_back(u(rng));
    net.out_b = u(rng);
    return net;
}

}  // namespace

TEST_CASE("activations") {
    const auto relu = Activation::plain(ActivationKind::ReLU);
    CHECK(relu(-1.0) == 0.0);
    CHECK(relu(2.0) == 2.0);
    CHECK(Activation::plain(ActivationKind::Heaviside)(0.0) == 1.0);
    CHECK(Activation::plain(ActivationKind::Logistic)(0.0) == 0.5);
    CHECK(Activation::plain(ActivationKind::Logistic)(-800.0) == 0.0);
    CHECK(Activation::plain(ActivationKind::Softplus)(800.0) == 800.0);
    CHECK(Activation::plain(ActivationKind::Softplus)(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(Activation::plain(ActivationKind::ELU)(-1.0) == doctest::Approx(std::exp(-1.0) - 1.0));
    for (auto k : {ActivationKind::ReLU, ActivationKind::Tanh, ActivationKind::Linear, ActivationKind::ScaledReLULike}) {
        CHECK(activation_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS(activation_kind_from_string("swish"));
    CHECK(second_derivative_at_zero(ActivationKind::Softplus) == 0.25);
    CHECK_THROWS(second_derivative_at_zero(ActivationKind::ELU));
}

TEST_CASE("sigmoid-like scaling") {
    const double delta = 0.01, eps = 0.01;
    const auto lg = scale_sigmoid_like(ActivationKind::Logistic, delta, eps);
    CHECK(lg.M >= std::log(99.0) / delta);
    CHECK(lg.M < 2.0 * std::log(99.0) / delta + 1.0);
    CHECK(scale_sigmoid_like(ActivationKind::Heaviside, delta, eps).M == 1.0);
    const auto th = scale_sigmoid_like(ActivationKind::Tanh, delta, eps);
    CHECK(th.M >= std::atanh(1.0 - 2.0 * eps) / delta);
    for (const auto& act : {lg, th}) {
        for (int k = 0; k <= 100000; ++k) {
            const double x = -50.0 + 100.0 * k / 100000.0;
            const double v = act(x);
            CHECK((v >= 0.0 && v <= 1.0));
            if (std::abs(x) >= delta) CHECK(std::abs(v - (x >= 0.0 ? 1.0 : 0.0)) <= eps);
        }
    }
    CHECK_THROWS(scale_sigmoid_like(ActivationKind::ReLU, 0.1, 0.1));
}

TEST_CASE("ReLU-like scaling") {
    for (double eps : {0.1, 1e-3, 1e-6}) {
        const auto sp = scale_relu_like(ActivationKind::Softplus, eps);
        CHECK(sp.M >= std::log(2.0) / eps);
        CHECK(sp.M <= 2.0 * std::log(2.0) / eps);
        const auto el = scale_relu_like(ActivationKind::ELU, eps);
        CHECK(el.M >= 1.0 / eps);
        CHECK(el.M <= 2.0 / eps);
    }
    const auto r = scale_relu_like(ActivationKind::ReLU, 1e-9);
    CHECK(r.M == 1.0);
    for (double x : {-3.0, 0.0, 0.5, 100.0}) CHECK(r(x) == std::max(x, 0.0));
}

TEST_CASE("sparse matrices") {
    const auto m = SparseMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 0, 2.0}, {1, 2, 0.5}, {0, 1, -1.0}});
    CHECK(m.nnz() == 3);
    CHECK(m.to_dense() == std::vector<std::vector<double>>{{2.0, -1.0, 0.0}, {0.0, 0.0, 1.5}});
    const std::vector<double> x{1.0, 2.0, 3.0};
    std::vector<double> y(2);
    m.multiply(x, y);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 4.5);
    const auto t = SparseMatrix::from_dense({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, 2);
    const auto p = multiply(m, t);
    CHECK(p.to_dense() == std::vector<std::vector<double>>{{2.0, -1.0}, {1.5, 1.5}});
}

TEST_CASE("network evaluation, counting and validation") {
    const auto hat = pwl_to_relu(PiecewiseAffine::from_nodes({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}, Extension::Constant,
                                                             Extension::Constant));
    const auto net = hat.to_net(Activation::plain(ActivationKind::ReLU));
    const double c[1] = {0.5};
    CHECK(net.eval(c) == doctest::Approx(1.0));
    CHECK(net.neuron_count() == 4);
    CHECK(net.depth() == 1);
    const double two[2] = {0.5, 0.5};
    CHECK_THROWS_AS(net.eval(two), std::invalid_argument);

    NetSpec zero = net;
    for (auto& w : zero.out_w) w = 0.0;
    zero.out_b = 0.7;
    CHECK(zero.eval(c) == 0.7);

    NetSpec bad = net;
    bad.out_w.pop_back();
    CHECK_THROWS(bad.validate());
}

TEST_CASE("counts are additive under parallel composition") {
    std::mt19937_64 rng(5);
    const auto a = random_net(rng, 3, {{5, ActivationKind::ReLU}, {4, ActivationKind::Linear}, {6, ActivationKind::Softplus}});
    const auto b = random_net(rng, 3, {{2, ActivationKind::ReLU}, {7, ActivationKind::Linear}, {3, ActivationKind::Softplus}});
    const auto s = parallel_sum(a, b);
    s.validate();
    CHECK(s.neuron_count() == a.neuron_count() + b.neuron_count());
    CHECK(s.trainable_count() == a.trainable_count() + b.trainable_count());
    CHECK(s.depth() == 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double x[3] = {u(rng), u(rng), u(rng)};
        CHECK(s.eval(x) == doctest::Approx(a.eval(x) + b.eval(x)).epsilon(1e-12));
    }
}

TEST_CASE("folding linear layers preserves the function") {
    std::mt19937_64 rng(9);
    const auto a = random_net(rng, 2, {{6, ActivationKind::ReLU}, {3, ActivationKind::Linear}, {5, ActivationKind::Tanh},
                                       {4, ActivationKind::Linear}, {2, ActivationKind::Linear}});
    const auto f = a.fold_linear();
    f.validate();
    CHECK(f.layers.size() == 2);
    CHECK(f.neuron_count() == a.neuron_count());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double x[2] = {u(rng), u(rng)};
        CHECK(f.eval(x) == doctest::Approx(a.eval(x)).epsilon(1e-12));
    }
}

TEST_CASE("JSON round trip, dense and sparse") {
    std::mt19937_64 rng(13);
    auto a = random_net(rng, 4, {{3, ActivationKind::ReLU}, {2, ActivationKind::Linear}});
    a.layers[0].act = Activation::scaled_sigmoid(ActivationKind::Tanh, 8.0);
    a.layers[0].linear_units = {1};
    a.trainable = 2;
    const auto back = netspec_from_json_string(to_json_string(a));
    CHECK(back.trainable_count() == 2);
    CHECK(back.layers[0].act == a.layers[0].act);
    CHECK(back.layers[0].linear_units == a.layers[0].linear_units);
    const double x[4] = {0.1, 0.2, 0.3, 0.4};
    CHECK(back.eval(x) == a.eval(x));

    const auto big = random_net(rng, 70, {{80, ActivationKind::ReLU}});
    const std::string text = to_json_string(big);
    CHECK(text.find("\"csr\"") != std::string::npos);
    const auto big_back = netspec_from_json_string(text);
    std::vector<double> y(70, 0.3);
    CHECK(big_back.eval(y) == big.eval(y));
}

TEST_CASE("product gadget") {
    const auto g = product_gadget(ActivationKind::Softplus, 1e-3);
    CHECK(g.neuron_count() == 4);
    const double z[2] = {0.0, 0.0};
    CHECK(g.eval(z) == 0.0);
    const double one[2] = {1.0, 1.0};
    CHECK(std::abs(g.eval(one) - 1.0) <= 1e-5);
    CHECK_THROWS(product_gadget(ActivationKind::Logistic, 0.1));
    CHECK_THROWS(product_gadget(ActivationKind::Tanh, 0.1));
    CHECK_THROWS(product_gadget(ActivationKind::ELU, 0.1));

    const double e1 = gadget_error(ActivationKind::Softplus, 1e-2);
    const double e2 = gadget_error(ActivationKind::Softplus, 5e-3);
    const double e3 = gadget_error(ActivationKind::Softplus, 2.5e-3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.05));

    const double lam = calibrate_lambda(ActivationKind::Softplus, 1e-4);
    CHECK(gadget_error(ActivationKind::Softplus, lam) <= 1e-4);
}

TEST_CASE("product trees") {
    const auto t2 = product_tree(2, ActivationKind::Softplus, 1e-2);
    CHECK(t2.depth() == 1);
    CHECK(t2.neuron_count() == 4);
    const auto t4 = product_tree(4, ActivationKind::Softplus, 1e-2);
    CHECK(t4.depth() == 2);
    CHECK(t4.neuron_count() == 12);
    for (int d = 2; d <= 9; ++d) {
        const auto t = product_tree(d, ActivationKind::Softplus, 1e-2);
        CHECK(t.depth() == static_cast<int>(std::ceil(std::log2(d))));
        CHECK(t.neuron_count() <= 8 * d);
        std::vector<double> ones(d, 1.0);
        CHECK(std::abs(t.eval(ones) - 1.0) <= 1e-3);
        std::vector<double> x(d);
        for (int j = 0; j < d; ++j) x[j] = 0.5 + 0.05 * j;
        double p = 1.0;
        for (double v : x) p *= v;
        CHECK(std::abs(t.eval(x) - p) <= 1e-3);
    }
    CHECK_THROWS(product_tree(1, ActivationKind::Softplus, 0.1));
}
