#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entsac/errors.hpp"
#include "entsac/graph.hpp"
#include "entsac/mlp.hpp"
#include "entsac/optimizer.hpp"
#include "entsac/param_tree.hpp"
#include "entsac/rng.hpp"
#include "oracles.hpp"

using namespace entsac;

namespace {

MlpSpec random_spec(const std::string& prefix, Rng& rng, std::size_t in_width) {
    MlpSpec spec;
    spec.prefix = prefix;
    spec.widths.push_back(in_width);
    std::size_t layers = 1 + rng.index(3);
    for (std::size_t i = 0; i < layers; ++i) spec.widths.push_back(1 + rng.index(16));
    for (std::size_t i = 0; i < layers; ++i)
        spec.activations.push_back(rng.index(2) == 0 ? Activation::kRelu : Activation::kTanh);
    spec.activations.back() = Activation::kIdentity;
    return spec;
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (double& x : t.data()) x = rng.uniform(-scale, scale);
    return t;
}

}  // namespace

TEST_CASE("forward_mlp: zero weights and bias give zero output") {
    MlpSpec spec{"net", {3, 4, 2}, {Activation::kRelu, Activation::kIdentity}};
    ParamTree params;
    params.insert("net/layer0/weight", Tensor({3, 4}));
    params.insert("net/layer0/bias", Tensor({4}));
    params.insert("net/layer1/weight", Tensor({4, 2}));
    params.insert("net/layer1/bias", Tensor({2}));

    Rng rng(7);
    Graph g;
    Graph::NodeId out = forward_mlp(g, params, spec, g.constant(random_tensor({5, 3}, rng)));
    for (double v : g.value(out).data()) CHECK(v == 0.0);
}

TEST_CASE("forward_mlp: identity layer reproduces the input") {
    MlpSpec spec{"net", {3, 3}, {Activation::kIdentity}};
    ParamTree params;
    Tensor eye({3, 3});
    for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    params.insert("net/layer0/weight", eye);
    params.insert("net/layer0/bias", Tensor({3}));

    Rng rng(11);
    Tensor input = random_tensor({4, 3}, rng);
    Graph g;
    Graph::NodeId out = forward_mlp(g, params, spec, g.constant(input));
    for (std::size_t i = 0; i < input.numel(); ++i)
        CHECK(g.value(out)[i] == doctest::Approx(input[i]).epsilon(1e-15));
}

TEST_CASE("forward_mlp: matches the loop-only oracle to 1e-12") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t in_width = 1 + rng.index(8);
        MlpSpec spec = random_spec("net", rng, in_width);
        ParamTree params;
        init_mlp_params(params, spec, rng);
        Tensor input = random_tensor({1 + rng.index(6), in_width}, rng);

        Graph g;
        Graph::NodeId out = forward_mlp(g, params, spec, g.constant(input));
        Tensor expected = oracles::mlp_forward_loops(params, spec, input);

        REQUIRE(g.value(out).shape() == expected.shape());
        for (std::size_t i = 0; i < expected.numel(); ++i)
            CHECK(std::abs(g.value(out)[i] - expected[i]) <= 1e-12);
    }
}

TEST_CASE("forward_mlp: input width mismatch raises ConfigError") {
    MlpSpec spec{"net", {3, 2}, {Activation::kIdentity}};
    ParamTree params;
    Rng rng(1);
    init_mlp_params(params, spec, rng);
    Graph g;
    CHECK_THROWS_AS(forward_mlp(g, params, spec, g.constant(Tensor({2, 4}))), ConfigError);
}

TEST_CASE("backward: loss = sum(p) gives all-ones gradient") {
    ParamTree params;
    params.insert("p", Tensor({2, 3}, {1, -2, 3, 4, -5, 6}));
    Graph g;
    Graph::NodeId p = g.param(params, "p");
    GradMap grads = g.backward(g.sum_all(p));
    for (double v : grads.at("p").data()) CHECK(v == 1.0);
}

TEST_CASE("backward: loss = 0.5 * ||p||^2 gives gradient p") {
    ParamTree params;
    params.insert("p", Tensor({4}, {0.5, -1.5, 2.0, 0.0}));
    Graph g;
    Graph::NodeId p = g.param(params, "p");
    GradMap grads = g.backward(g.scale(g.sum_all(g.square(p)), 0.5));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(grads.at("p")[i] == doctest::Approx(params.at("p")[i]).epsilon(1e-15));
}

TEST_CASE("backward: non-scalar loss raises ContractError") {
    ParamTree params;
    params.insert("p", Tensor({3}, {1, 2, 3}));
    Graph g;
    Graph::NodeId p = g.param(params, "p");
    CHECK_THROWS_AS(g.backward(g.square(p)), ContractError);
}

TEST_CASE("backward: parameters off the loss path get exactly zero gradients") {
    ParamTree params;
    params.insert("used", Tensor({2}, {1.0, 2.0}));
    params.insert("unused", Tensor({2}, {3.0, 4.0}));
    Graph g;
    Graph::NodeId used = g.param(params, "used");
    Graph::NodeId unused = g.param(params, "unused");
    (void)g.square(unused);  // forward-only subgraph
    GradMap grads = g.backward(g.sum_all(g.square(used)));
    CHECK(grads.at("unused")[0] == 0.0);
    CHECK(grads.at("unused")[1] == 0.0);
    CHECK(grads.at("used")[0] != 0.0);
}

TEST_CASE("gradients: random nets match central differences (property)") {
    Rng rng(101);
    oracles::GradCheckFailure failure;
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t in_width = 1 + rng.index(6);
        MlpSpec spec = random_spec("net", rng, in_width);
        ParamTree params;
        init_mlp_params(params, spec, rng);
        Tensor input = random_tensor({1 + rng.index(4), in_width}, rng);

        auto loss = [&](const ParamTree& p) {
            Graph g;
            return g.value(g.mean_all(g.square(forward_mlp(g, p, spec, g.constant(input)))))[0];
        };

        Graph g;
        GradMap grads =
            g.backward(g.mean_all(g.square(forward_mlp(g, params, spec, g.constant(input)))));
        bool ok = oracles::check_gradients(params, loss, grads, &failure);
        if (!ok)
            MESSAGE("trial ", trial, " failed at ", failure.path, "[", failure.index,
                    "]: analytic=", failure.analytic, " numeric=", failure.numeric);
        REQUIRE(ok);
    }
}

TEST_CASE("gradients: composite op chain (slice/clamp/exp/log/div/min/concat) matches FD") {
    Rng rng(202);
    for (int trial = 0; trial < 10; ++trial) {
        ParamTree params;
        params.insert("a", random_tensor({3, 4}, rng));
        params.insert("b", random_tensor({3, 2}, rng));

        auto build = [&](Graph& g, const ParamTree& p) {
            Graph::NodeId a = g.param(p, "a");
            Graph::NodeId b = g.param(p, "b");
            Graph::NodeId left = g.slice_cols(a, 0, 2);
            Graph::NodeId right = g.clamp(g.slice_cols(a, 2, 2), -0.5, 0.5);
            Graph::NodeId joined = g.concat_cols(g.min_elem(left, b), right);  // (3,4)
            Graph::NodeId pos = g.add_scalar(g.exp(joined), 1.0);
            Graph::NodeId first_two = g.slice_cols(pos, 0, 2);
            Graph::NodeId ratio = g.div(g.log(first_two), g.add_scalar(g.square(b), 2.0));
            Graph::NodeId squish = g.tanh(g.mul(ratio, b));
            return g.mean_all(g.add(g.row_sum(squish), g.row_sum(g.neg(first_two))));
        };

        auto loss = [&](const ParamTree& p) {
            Graph g;
            return g.value(build(g, p))[0];
        };
        Graph g;
        GradMap grads = g.backward(build(g, params));
        oracles::GradCheckFailure failure;
        bool ok = oracles::check_gradients(params, loss, grads, &failure);
        if (!ok)
            MESSAGE("failed at ", failure.path, "[", failure.index, "]: analytic=",
                    failure.analytic, " numeric=", failure.numeric);
        REQUIRE(ok);
    }
}

TEST_CASE("determinism: same seed gives bit-identical outputs and gradients") {
    auto run = [] {
        Rng rng(55);
        MlpSpec spec{"net", {4, 8, 3}, {Activation::kRelu, Activation::kIdentity}};
        ParamTree params;
        init_mlp_params(params, spec, rng);
        Tensor input = random_tensor({5, 4}, rng);
        Graph g;
        Graph::NodeId out = forward_mlp(g, params, spec, g.constant(input));
        GradMap grads = g.backward(g.mean_all(g.square(out)));
        return std::make_pair(g.value(out).data(), grads.at("net/layer0/weight").data());
    };
    auto [out1, grad1] = run();
    auto [out2, grad2] = run();
    CHECK(out1 == out2);
    CHECK(grad1 == grad2);
}

TEST_CASE("sgd: p=1, g=2, lr=0.1, wd=0 -> p=0.8; zero gradient leaves params unchanged") {
    ParamTree params;
    params.insert("p", Tensor::scalar(1.0));
    Sgd sgd(SgdConfig{0.1, 0.0});
    GradMap grads;
    grads["p"] = Tensor::scalar(2.0);
    sgd.step(params, grads);
    CHECK(params.at("p")[0] == doctest::Approx(0.8).epsilon(1e-15));

    grads["p"] = Tensor::scalar(0.0);
    sgd.step(params, grads);
    CHECK(params.at("p")[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("sgd: weight decay term included when configured") {
    ParamTree params;
    params.insert("p", Tensor::scalar(2.0));
    Sgd sgd(SgdConfig{0.1, 0.5});
    GradMap grads;
    grads["p"] = Tensor::scalar(0.0);
    sgd.step(params, grads);
    // p <- p - lr * wd * p = 2 - 0.1 * 0.5 * 2
    CHECK(params.at("p")[0] == doctest::Approx(1.9).epsilon(1e-15));
}

TEST_CASE("adam: first step with g=1, lr=1e-3 decreases p by ~1e-3") {
    ParamTree params;
    params.insert("p", Tensor::scalar(1.0));
    Adam adam(AdamConfig{});  // lr 3e-4 default; use explicit 1e-3
    Adam adam2(AdamConfig{1e-3, 0.9, 0.999, 1e-8, 0.0});
    GradMap grads;
    grads["p"] = Tensor::scalar(1.0);
    adam2.step(params, grads);
    // mhat = vhat = 1 after bias correction; delta = lr / (1 + eps)
    double expected = 1.0 - 1e-3 / (1.0 + 1e-8);
    CHECK(params.at("p")[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs((1.0 - params.at("p")[0]) - 1e-3) <= 1e-10);

    ParamTree params2;
    params2.insert("p", Tensor::scalar(5.0));
    grads["p"] = Tensor::scalar(0.0);
    adam.step(params2, grads);
    CHECK(params2.at("p")[0] == 5.0);
}

TEST_CASE("param tree: lexicographic order, byte-stable checkpoints, JSON round-trip") {
    Rng rng(77);
    ParamTree tree;
    tree.insert("b/weight", random_tensor({2, 2}, rng));
    tree.insert("a/bias", random_tensor({3}, rng));
    tree.insert("a/weight", random_tensor({2, 3}, rng));

    std::vector<std::string> order;
    for (const auto& [path, tensor] : tree) {
        (void)tensor;
        order.push_back(path);
    }
    CHECK(order == std::vector<std::string>{"a/bias", "a/weight", "b/weight"});

    std::string json1 = tree.to_json_string();
    ParamTree loaded = ParamTree::from_json_string(json1);
    CHECK(loaded.to_json_string() == json1);
    for (const auto& [path, tensor] : tree) {
        REQUIRE(loaded.has(path));
        CHECK(loaded.at(path).data() == tensor.data());
        CHECK(loaded.at(path).shape() == tensor.shape());
    }

    CHECK_THROWS_AS(tree.insert("a/bias", Tensor({1})), ContractError);
    CHECK_THROWS_AS(tree.at("missing"), ContractError);
    CHECK_THROWS_AS(ParamTree::from_json_string("{\"nope\":1}"), IoError);
}

TEST_CASE("rng: split streams differ, same stream repeats") {
    Rng a = Rng::split(42, "env");
    Rng b = Rng::split(42, "env");
    Rng c = Rng::split(42, "replay");
    CHECK(a.next_u64() == b.next_u64());
    Rng a2 = Rng::split(42, "env");
    CHECK(a2.next_u64() != c.next_u64());
}
