#include <axrx/ops.hpp>
#include <axrx/tape.hpp>
#include <doctest.h>

#include <cmath>
#include <limits>

#include "unit/helpers.hpp"

using namespace axrx;
using axrx::test::max_relative_error;
using axrx::test::numeric_gradient;
using axrx::test::random_tensor;

namespace {

// Reverse-mode gradient of loss(inputs) with respect to every input, checked
// against central differences.
void check_gradients(std::vector<Tensor> inputs, const std::function<Tensor(const std::vector<Tensor>&)>& loss) {
    for (auto& t : inputs) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    {
        Tape tape;
        Tensor l = loss(inputs);
        tape.backward(l);
    }
    for (auto& t : inputs) {
        std::vector<double> analytic(t.grad().begin(), t.grad().end());
        auto f = [&] { return loss(inputs).item(); };
        const auto numeric = numeric_gradient(t.mutable_data(), f);
        CHECK(max_relative_error(analytic, numeric) <= 1e-4);
    }
}

}  // namespace

TEST_CASE("tensor construction and shape checks") {
    Tensor t({2, 3}, 1.5);
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK(t.dim(1) == 3);
    CHECK_THROWS_AS(Tensor({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(t.item(), std::invalid_argument);
    CHECK(Tensor::scalar(4.0).item() == 4.0);
}

TEST_CASE("tensor handles share storage, clone does not") {
    Tensor a({3}, 0.0);
    Tensor b = a;
    Tensor c = a.clone();
    a.mutable_data()[1] = 7.0;
    CHECK(b.data()[1] == 7.0);
    CHECK(c.data()[1] == 0.0);
    Tensor d = a.detach();
    CHECK(d.data()[1] == 7.0);
    CHECK_FALSE(d.requires_grad());
}

TEST_CASE("slice_rows and assign_rows") {
    Tensor t({4, 2}, std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7});
    Tensor s = slice_rows(t, 1, 3);
    CHECK(s.shape() == Shape{2, 2});
    CHECK(s.data()[0] == 2.0);
    Tensor z({4, 2}, 0.0);
    assign_rows(z, 2, s);
    CHECK(z.data()[4] == 2.0);
    CHECK(z.data()[7] == 5.0);
    CHECK_THROWS(slice_rows(t, 3, 5));
}

TEST_CASE("matmul of [2,3] and [3,1] is [2,1]") {
    Tensor a({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
    Tensor b({3, 1}, std::vector<double>{1, 0, -1});
    Tensor c = matmul(a, b);
    CHECK(c.shape() == Shape{2, 1});
    CHECK(c.data()[0] == -2.0);
    CHECK(c.data()[1] == -2.0);
}

TEST_CASE("shape mismatch names the primitive and both shapes") {
    Tensor a({2, 3}), b({2, 3});
    try {
        matmul(a, b);
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("matmul") != std::string::npos);
        CHECK(msg.find("[2,3]") != std::string::npos);
    }
    CHECK_THROWS_AS(add(Tensor({2}), Tensor({3})), std::invalid_argument);
    CHECK_THROWS_AS(mul(Tensor({2, 1}), Tensor({1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(conv2d(Tensor({1, 2, 5, 5}), Tensor({3, 1, 3, 3})), std::invalid_argument);
    CHECK_THROWS_AS(bce_loss(Tensor({2, 3}), Tensor({3, 2})), std::invalid_argument);
}

TEST_CASE("sigmoid(0) is one half") { CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5); }

TEST_CASE("convolution of a zero image is zero") {
    Tensor x({2, 1, 6, 6}, 0.0);
    Tensor w = random_tensor({4, 1, 3, 3}, 3);
    Tensor y = conv2d(x, w);
    CHECK(y.shape() == Shape{2, 4, 4, 4});
    for (double v : y.data()) CHECK(v == 0.0);
}

TEST_CASE("max_pool2x2 drops odd trailing rows") {
    Tensor x({1, 1, 3, 3}, std::vector<double>{1, 5, 2, 3, 4, 9, 8, 7, 6});
    Tensor y = max_pool2x2(x);
    CHECK(y.shape() == Shape{1, 1, 1, 1});
    CHECK(y.item() == 5.0);
}

TEST_CASE("bce_loss closed forms") {
    Tensor one({1, 1}, 1.0);
    CHECK(bce_loss(Tensor({1, 1}, 0.0), one).item() == doctest::Approx(0.693147).epsilon(1e-6));
    CHECK(bce_loss(Tensor({1, 1}, 1.0), one).item() == doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-12));
    CHECK(bce_loss(Tensor({1, 1}, 1.0), one).item() == doctest::Approx(0.313262).epsilon(1e-6));
    const double sat = bce_loss(Tensor({1, 1}, 50.0), one).item();
    CHECK(std::isfinite(sat));
    CHECK(sat < 1e-20);
}

TEST_CASE("bce_loss stays finite for extreme logits") {
    Tensor logits({2, 2}, std::vector<double>{1e4, -1e4, -1e4, 1e4});
    Tensor labels({2, 2}, std::vector<double>{0, 1, 1, 0});
    logits.set_requires_grad(true);
    Tape tape;
    Tensor l = bce_loss(logits, labels);
    CHECK(l.item() == doctest::Approx(1e4));
    tape.backward(l);
    for (double g : logits.grad()) CHECK(std::isfinite(g));
}

TEST_CASE("bce_loss rejects labels outside {0,1}") {
    CHECK_THROWS_AS(bce_loss(Tensor({1, 2}, 0.0), Tensor({1, 2}, std::vector<double>{1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(bce_loss(Tensor({1, 1}, 0.0), Tensor({1, 1}, 0.5)), std::invalid_argument);
}

TEST_CASE("bce_loss reductions") {
    Tensor logits = random_tensor({3, 4}, 5, -3, 3);
    Tensor labels = test::random_labels(3, 4, 5);
    const double mean_loss = bce_loss(logits, labels, LossReduction::kMean).item();
    const double summed = bce_loss(logits, labels, LossReduction::kSumOfExampleMeans).item();
    CHECK(summed == doctest::Approx(3 * mean_loss).epsilon(1e-12));
}

TEST_CASE("sign") {
    Tensor s = sign(Tensor({3}, std::vector<double>{-3.2, 0.0, 0.7}));
    CHECK(s.data()[0] == -1.0);
    CHECK(s.data()[1] == 0.0);
    CHECK(s.data()[2] == 1.0);
    const Tensor zeros = sign(Tensor({4}, 0.0));
    for (double v : zeros.data()) CHECK(v == 0.0);
    Tensor r = random_tensor({50}, 11);
    CHECK(bit_equal(sign(sign(r)), sign(r)));
}

TEST_CASE("l1_normalize") {
    auto n = l1_normalize(Tensor({2}, std::vector<double>{3, -1}));
    CHECK_FALSE(n.degenerate);
    CHECK(n.value.data()[0] == 0.75);
    CHECK(n.value.data()[1] == -0.25);
    auto z = l1_normalize(Tensor({3}, 0.0));
    CHECK(z.degenerate);
    for (double v : z.value.data()) CHECK(v == 0.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto r = l1_normalize(random_tensor({17}, seed));
        double norm = 0.0;
        for (double v : r.value.data()) norm += std::abs(v);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("gradients of every primitive match finite differences") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        CAPTURE(seed);
        check_gradients({random_tensor({2, 3}, seed), random_tensor({2, 3}, seed + 100)},
                        [](const auto& in) { return sum(mul(add(in[0], in[1]), sub(in[0], in[1]))); });
        check_gradients({random_tensor({3, 4}, seed), random_tensor({4, 2}, seed + 100)},
                        [](const auto& in) { return mean(sigmoid(matmul(in[0], in[1]))); });
        check_gradients({random_tensor({2, 2, 6, 6}, seed), random_tensor({3, 2, 3, 3}, seed + 100)},
                        [](const auto& in) { return sum(mul(conv2d(in[0], in[1]), conv2d(in[0], in[1]))); });
        check_gradients({random_tensor({2, 3, 4, 4}, seed), random_tensor({3}, seed + 100)},
                        [](const auto& in) { return sum(scale(relu(add_bias(in[0], in[1])), 0.5)); });
        check_gradients({random_tensor({2, 2, 5, 5}, seed)},
                        [](const auto& in) { return sum(mul(max_pool2x2(in[0]), max_pool2x2(in[0]))); });
        check_gradients({random_tensor({3, 4}, seed, -4, 4)}, [&](const auto& in) {
            return bce_loss(reshape(in[0], {4, 3}), test::random_labels(4, 3, seed));
        });
    }
}

TEST_CASE("resize_pad gradient matches finite differences") {
    std::vector<ResizePad> geom = {{5, 1, 0}, {7, 0, 0}, {4, 2, 3}};
    check_gradients({random_tensor({3, 1, 7, 7}, 21, 0, 1)}, [&](const auto& in) {
        Tensor r = resize_pad(in[0], geom);
        return sum(mul(r, r));
    });
}

TEST_CASE("resize_pad identity geometry") {
    Tensor x = random_tensor({2, 1, 6, 6}, 4, 0, 1);
    Tensor y = resize_pad(x, {{6, 0, 0}, {6, 0, 0}});
    CHECK(bit_equal(x, y));
    CHECK_THROWS_AS(resize_pad(x, {{6, 0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(resize_pad(x, {{5, 2, 0}, {6, 0, 0}}), std::invalid_argument);
}

TEST_CASE("batch slicing does not change per-example results") {
    Tensor x = random_tensor({5, 2, 7, 7}, 8);
    Tensor w = random_tensor({3, 2, 3, 3}, 9);
    Tensor full = conv2d(x, w);
    for (std::size_t i = 0; i < 5; ++i) {
        Tensor part = conv2d(slice_rows(x, i, i + 1), w);
        CHECK(bit_equal(part, slice_rows(full, i, i + 1)));
    }
    Tensor a = random_tensor({6, 9}, 10), b = random_tensor({9, 4}, 11);
    Tensor ab = matmul(a, b);
    CHECK(bit_equal(matmul(slice_rows(a, 2, 5), b), slice_rows(ab, 2, 5)));
}
