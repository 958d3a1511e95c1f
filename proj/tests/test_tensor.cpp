#include <doctest.h>

#include <algorithm>
#include <set>

#include "cropscan/kernels.hpp"
#include "cropscan/rng.hpp"
#include "cropscan/tensor.hpp"
#include "test_support.hpp"

using namespace cropscan;
using testutil::conv_reference;
using testutil::fd_central;
using testutil::random_tensor;
using testutil::rel_error;

TEST_CASE("tensor shape and data stay consistent") {
    Tensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.shape() == std::vector<std::size_t>{2, 3});
    t.at(1, 2) = 5.0;
    CHECK(t[5] == 5.0);
    CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(Tensor({0, 3}), ShapeError);
    CHECK_THROWS_AS(t.reshape({4}), ShapeError);
    t.reshape({3, 2});
    CHECK(t.at(2, 1) == 5.0);
}

TEST_CASE("conv2d identity kernel passes the input through") {
    Tensor input({1, 1, 1}, {5.0});
    Tensor kernels({1, 1, 3, 3});
    kernels.at(0, 0, 1, 1) = 1.0;
    Tensor bias({1});
    const Tensor out = conv2d_forward(input, kernels, bias);
    CHECK(out.at(0, 0, 0) == 5.0);
}

TEST_CASE("conv2d of all-ones counts the padded neighborhood") {
    Tensor input = Tensor::full({1, 3, 3}, 1.0);
    Tensor kernels = Tensor::full({1, 1, 3, 3}, 1.0);
    Tensor bias({1});
    const Tensor out = conv2d_forward(input, kernels, bias);
    CHECK(out.at(0, 1, 1) == 9.0);
    CHECK(out.at(0, 0, 0) == 4.0);
    CHECK(out.at(0, 2, 2) == 4.0);
    CHECK(out.at(0, 0, 1) == 6.0);
    CHECK(out.at(0, 1, 0) == 6.0);
}

TEST_CASE("conv2d with zero kernels yields the bias everywhere") {
    Rng rng(11);
    const Tensor input = random_tensor({3, 5, 4}, rng);
    Tensor kernels({2, 3, 3, 3});
    Tensor bias({2}, {0.25, -1.5});
    const Tensor out = conv2d_forward(input, kernels, bias);
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 4; ++x) {
            CHECK(out.at(0, y, x) == 0.25);
            CHECK(out.at(1, y, x) == -1.5);
        }
}

TEST_CASE("conv2d rejects a channel mismatch") {
    Tensor input({2, 4, 4});
    Tensor kernels({1, 3, 3, 3});
    Tensor bias({1});
    CHECK_THROWS_AS(conv2d_forward(input, kernels, bias), ShapeError);
}

TEST_CASE("conv2d matches the naive loop oracle on random instances") {
    Rng rng(42);
    for (int iter = 0; iter < 40; ++iter) {
        const std::size_t c_in = 1 + rng.below(4);
        const std::size_t c_out = 1 + rng.below(4);
        const std::size_t h = 1 + rng.below(8);
        const std::size_t w = 1 + rng.below(8);
        const Tensor input = random_tensor({c_in, h, w}, rng);
        const Tensor kernels = random_tensor({c_out, c_in, 3, 3}, rng);
        const Tensor bias = random_tensor({c_out}, rng);
        const Tensor got = conv2d_forward(input, kernels, bias);
        const Tensor want = conv_reference(input, kernels, bias);
        CHECK(Tensor::max_abs_diff(got, want) <= 1e-12);
    }
}

TEST_CASE("conv2d backward: zero grad_out gives zero gradients") {
    Rng rng(7);
    const Tensor input = random_tensor({2, 4, 4}, rng);
    const Tensor kernels = random_tensor({3, 2, 3, 3}, rng);
    const Tensor grad_out({3, 4, 4});
    const auto grads = conv2d_backward(input, kernels, grad_out);
    CHECK(Tensor::max_abs_diff(grads.input, Tensor({2, 4, 4})) == 0.0);
    CHECK(Tensor::max_abs_diff(grads.kernels, Tensor({3, 2, 3, 3})) == 0.0);
    CHECK(Tensor::max_abs_diff(grads.bias, Tensor({3})) == 0.0);
}

TEST_CASE("conv2d backward: unit impulse drives one bias gradient") {
    Rng rng(8);
    const Tensor input = random_tensor({1, 3, 3}, rng);
    const Tensor kernels = random_tensor({2, 1, 3, 3}, rng);
    Tensor grad_out({2, 3, 3});
    grad_out.at(1, 2, 0) = 1.0;
    const auto grads = conv2d_backward(input, kernels, grad_out);
    CHECK(grads.bias[0] == 0.0);
    CHECK(grads.bias[1] == 1.0);
}

TEST_CASE("conv2d backward matches central finite differences") {
    Rng rng(123);
    Tensor input = random_tensor({1, 4, 4}, rng);
    Tensor kernels = random_tensor({2, 1, 3, 3}, rng);
    Tensor bias = random_tensor({2}, rng);
    // weight the outputs so every gradient path is exercised
    const Tensor weights = random_tensor({2, 4, 4}, rng);

    auto loss = [&]() {
        const Tensor out = conv2d_forward(input, kernels, bias);
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
        return s;
    };
    const auto grads = conv2d_backward(input, kernels, weights);

    for (std::size_t i = 0; i < input.size(); ++i)
        CHECK(rel_error(grads.input[i], fd_central(input, i, loss)) < 1e-6);
    for (std::size_t i = 0; i < kernels.size(); ++i)
        CHECK(rel_error(grads.kernels[i], fd_central(kernels, i, loss)) < 1e-6);
    for (std::size_t i = 0; i < bias.size(); ++i)
        CHECK(rel_error(grads.bias[i], fd_central(bias, i, loss)) < 1e-6);
}

TEST_CASE("maxpool2 takes window maxima") {
    Tensor input({1, 2, 2}, {1, 2, 3, 4});
    const auto pooled = maxpool2(input);
    CHECK(pooled.output.shape() == std::vector<std::size_t>{1, 1, 1});
    CHECK(pooled.output[0] == 4.0);
}

TEST_CASE("maxpool2 drops the odd trailing row and column") {
    Tensor input({1, 25, 25});
    const auto pooled = maxpool2(input);
    CHECK(pooled.output.extent(1) == 12);
    CHECK(pooled.output.extent(2) == 12);
}

TEST_CASE("maxpool2 ties resolve to the smallest flat index") {
    Tensor input = Tensor::full({1, 2, 2}, 7.0);
    const auto pooled = maxpool2(input);
    CHECK(pooled.output[0] == 7.0);
    CHECK(pooled.argmax[0] == 0);
}

TEST_CASE("maxpool2 rejects inputs below 2x2") {
    CHECK_THROWS_AS(maxpool2(Tensor({1, 1, 5})), ShapeError);
    CHECK_THROWS_AS(maxpool2(Tensor({1, 5, 1})), ShapeError);
}

TEST_CASE("maxpool2 backward routes each gradient to one input position") {
    Rng rng(31);
    const Tensor input = random_tensor({3, 6, 7}, rng);
    const auto pooled = maxpool2(input);
    const Tensor grad_out = random_tensor(pooled.output.shape(), rng, 0.5, 1.5);
    const Tensor grad_in = maxpool2_backward(pooled, grad_out);

    // argmax positions are distinct, so the nonzero count matches
    std::set<std::size_t> positions(pooled.argmax.begin(), pooled.argmax.end());
    CHECK(positions.size() == pooled.argmax.size());
    std::size_t nonzero = 0;
    double in_sum = 0.0, out_sum = 0.0;
    for (std::size_t i = 0; i < grad_in.size(); ++i) {
        if (grad_in[i] != 0.0) ++nonzero;
        in_sum += grad_in[i];
    }
    for (std::size_t i = 0; i < grad_out.size(); ++i) out_sum += grad_out[i];
    CHECK(nonzero == grad_out.size());
    CHECK(in_sum == doctest::Approx(out_sum).epsilon(1e-12));
}

TEST_CASE("dense identity passes the input through") {
    Tensor input({3}, {1.5, -2.0, 0.25});
    Tensor weights({3, 3});
    for (std::size_t i = 0; i < 3; ++i) weights.at(i, i) = 1.0;
    Tensor bias({3});
    const Tensor out = dense_forward(input, weights, bias);
    CHECK(Tensor::max_abs_diff(out, input) == 0.0);
}

TEST_CASE("dense matches a hand matrix-vector product") {
    Tensor weights({2, 2}, {1, 2, 3, 4});
    Tensor input({2}, {1, 1});
    Tensor bias({2});
    const Tensor out = dense_forward(input, weights, bias);
    CHECK(out[0] == 3.0);
    CHECK(out[1] == 7.0);
}

TEST_CASE("dense rejects a dimension mismatch") {
    CHECK_THROWS_AS(dense_forward(Tensor({3}), Tensor({2, 4}), Tensor({2})),
                    ShapeError);
}

TEST_CASE("dense backward matches central finite differences") {
    Rng rng(55);
    Tensor input = random_tensor({5}, rng);
    Tensor weights = random_tensor({3, 5}, rng);
    Tensor bias = random_tensor({3}, rng);
    const Tensor out_weights = random_tensor({3}, rng);

    auto loss = [&]() {
        const Tensor out = dense_forward(input, weights, bias);
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i)
            s += out[i] * out_weights[i];
        return s;
    };
    const auto grads = dense_backward(input, weights, out_weights);

    for (std::size_t i = 0; i < input.size(); ++i)
        CHECK(rel_error(grads.input[i], fd_central(input, i, loss)) < 1e-6);
    for (std::size_t i = 0; i < weights.size(); ++i)
        CHECK(rel_error(grads.weights[i], fd_central(weights, i, loss)) < 1e-6);
    for (std::size_t i = 0; i < bias.size(); ++i)
        CHECK(rel_error(grads.bias[i], fd_central(bias, i, loss)) < 1e-6);
}

TEST_CASE("relu clamps negatives") {
    Tensor input({2}, {-1.0, 2.0});
    const Tensor out = relu(input);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 2.0);
}

TEST_CASE("softmax of uniform logits is uniform") {
    Tensor logits({8});
    const Tensor probs = softmax(logits);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(probs[i] == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("softmax is invariant to a constant shift") {
    Rng rng(77);
    for (int iter = 0; iter < 20; ++iter) {
        Tensor logits = random_tensor({8}, rng, -3.0, 3.0);
        Tensor shifted = logits;
        for (std::size_t i = 0; i < 8; ++i) shifted[i] += 1000.0;
        const Tensor a = softmax(logits);
        const Tensor b = softmax(shifted);
        CHECK(Tensor::max_abs_diff(a, b) <= 1e-12);

        // the argmax is unchanged as well
        const auto arg = [](const Tensor& p) {
            return std::max_element(p.data(), p.data() + p.size()) - p.data();
        };
        CHECK(arg(a) == arg(b));
    }
}

TEST_CASE("softmax output is a probability vector") {
    Rng rng(78);
    for (int iter = 0; iter < 50; ++iter) {
        const Tensor probs = softmax(random_tensor({8}, rng, -20.0, 20.0));
        double sum = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(probs[i] >= 0.0);
            sum += probs[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(probs.all_finite());
    }
}

TEST_CASE("kernels keep finite inputs finite") {
    Rng rng(79);
    const Tensor input = random_tensor({2, 6, 6}, rng, -100.0, 100.0);
    const Tensor kernels = random_tensor({3, 2, 3, 3}, rng, -10.0, 10.0);
    const Tensor bias = random_tensor({3}, rng);
    const Tensor out = conv2d_forward(input, kernels, bias);
    CHECK(out.all_finite());
    CHECK(maxpool2(out).output.all_finite());
    CHECK(relu(out).all_finite());
}
