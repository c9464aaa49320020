#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "r2m/errors.hpp"
#include "r2m/losses.hpp"
#include "r2m/rng.hpp"

using namespace r2m;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = scale * rng.gauss();
    return t;
}

} // namespace

TEST_CASE("xe_loss: uniform logits cost ln(vocab) per token") {
    const int vocab = 20;
    const std::vector<Tensor> logits = {Tensor::zeros({1, vocab}), Tensor::zeros({1, vocab})};
    const double loss = xe_loss_value(logits, {3, 17});
    CHECK(loss == doctest::Approx(std::log(20.0)).epsilon(1e-12));
}

TEST_CASE("xe_loss: saturated target logit drives the loss to zero") {
    Tensor row = Tensor::zeros({1, 20});
    row.data[5] = 1000.0;
    CHECK(xe_loss_value({row}, {5}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("xe_loss matches a hand-summed oracle on random logits") {
    Rng rng(31);
    const int vocab = 11;
    std::vector<Tensor> logits;
    std::vector<int> targets;
    for (int t = 0; t < 7; ++t) {
        logits.push_back(random_tensor({1, vocab}, rng, 2.0));
        targets.push_back(rng.uniform_int(vocab));
    }
    // Direct summation with explicit exponentials.
    double total = 0.0;
    for (std::size_t t = 0; t < logits.size(); ++t) {
        double denom = 0.0;
        for (double v : logits[t].data) denom += std::exp(v);
        const double p =
            std::exp(logits[t].data[static_cast<std::size_t>(targets[t])]) / denom;
        total += -std::log(p);
    }
    total /= static_cast<double>(logits.size());
    CHECK(xe_loss_value(logits, targets) == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("xe_loss decreases strictly when the target logit grows") {
    Rng rng(32);
    Tensor row = random_tensor({1, 8}, rng);
    const double before = xe_loss_value({row}, {2});
    row.data[2] += 0.5;
    const double after = xe_loss_value({row}, {2});
    CHECK(after < before);
}

TEST_CASE("xe_loss rejects length mismatches") {
    CHECK_THROWS_AS(xe_loss_value({Tensor::zeros({1, 4})}, {1, 2}), ContractError);
}

TEST_CASE("rec_loss: coincidence, hand case, symmetry") {
    const Tensor a = Tensor::row({1.0, 0.0});
    const Tensor b = Tensor::row({0.0, 1.0});
    CHECK(rec_loss_value(a, a) == 0.0);
    CHECK(rec_loss_value(a, b) == doctest::Approx(2.0));
    Rng rng(33);
    const Tensor x = random_tensor({1, 6}, rng);
    const Tensor y = random_tensor({1, 6}, rng);
    CHECK(rec_loss_value(x, y) == doctest::Approx(rec_loss_value(y, x)).epsilon(1e-15));
}

TEST_CASE("corpus_loss combines cross-entropy and reconstruction") {
    CHECK(corpus_loss(2.0, 0.5, 1.0) == doctest::Approx(2.5));
    CHECK(corpus_loss(2.0, 0.5, 0.0) == doctest::Approx(2.0));
    CHECK(corpus_loss(2.0, 0.5, 0.2) == doctest::Approx(2.1));
}

TEST_CASE("image_loss combines triplet and reconstruction") {
    CHECK(image_loss(1.0, 0.5, 0.2) == doctest::Approx(1.1));
    CHECK(image_loss(1.0, 0.5, 0.0) == doctest::Approx(1.0));
    CHECK(image_loss(1.0, 0.5, 1.0) == doctest::Approx(1.5));
}

TEST_CASE("similarity_matrix: identity projection on the standard basis") {
    const int batch = 3;
    Tensor feats = Tensor::zeros({batch, batch});
    Tensor recons = Tensor::zeros({batch, batch});
    for (int i = 0; i < batch; ++i) {
        feats.at(i, i) = 1.0;
        recons.at(i, i) = 1.0;
    }
    Tensor identity = Tensor::zeros({batch, batch});
    for (int i = 0; i < batch; ++i) identity.at(i, i) = 1.0;
    const Tensor S = similarity_matrix_value(feats, recons, identity, false);
    for (int i = 0; i < batch; ++i) {
        for (int j = 0; j < batch; ++j) {
            CHECK(S.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("similarity_matrix: zero reconstructions give a zero matrix") {
    Rng rng(34);
    const Tensor feats = random_tensor({4, 6}, rng);
    const Tensor proj = random_tensor({6, 5}, rng);
    const Tensor recons = Tensor::zeros({4, 5});
    const Tensor S = similarity_matrix_value(feats, recons, proj, false);
    for (double v : S.data) CHECK(v == 0.0);
}

TEST_CASE("similarity_matrix matches a double-loop dot-product oracle") {
    Rng rng(35);
    const int batch = 5, feat_dim = 7, dim = 6;
    const Tensor feats = random_tensor({batch, feat_dim}, rng);
    const Tensor proj = random_tensor({feat_dim, dim}, rng);
    const Tensor recons = random_tensor({batch, dim}, rng);
    const Tensor S = similarity_matrix_value(feats, recons, proj, false);

    const Tensor projected = oracle::matmul(feats, proj);
    for (int i = 0; i < batch; ++i) {
        for (int j = 0; j < batch; ++j) {
            double want = 0.0;
            for (int k = 0; k < dim; ++k) want += projected.at(i, k) * recons.at(j, k);
            CHECK(S.at(i, j) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("cosine mode bounds similarities by 1 in magnitude") {
    Rng rng(36);
    const Tensor feats = random_tensor({4, 6}, rng, 10.0);
    const Tensor proj = random_tensor({6, 5}, rng, 10.0);
    const Tensor recons = random_tensor({4, 5}, rng, 10.0);
    const Tensor S = similarity_matrix_value(feats, recons, proj, true);
    for (double v : S.data) CHECK(std::abs(v) <= 1.0 + 1e-12);
}

TEST_CASE("triplet_loss: hand-enumerated two-item batches") {
    SUBCASE("all margins satisfied") {
        const Tensor S({2, 2}, {1.0, 0.2, 0.3, 0.9});
        CHECK(triplet_loss_value(S, 0.2) == doctest::Approx(0.0));
    }
    SUBCASE("every hinge active") {
        const Tensor S({2, 2}, {0.5, 0.6, 0.7, 0.4});
        // Item 0: [0.2-0.5+0.7]+ + [0.2-0.5+0.6]+ = 0.4 + 0.3
        // Item 1: [0.2-0.4+0.6]+ + [0.2-0.4+0.7]+ = 0.4 + 0.5
        CHECK(triplet_loss_value(S, 0.2) == doctest::Approx(0.8));
    }
}

TEST_CASE("triplet_loss is zero when diagonals dominate by the margin") {
    Rng rng(37);
    const int batch = 6;
    Tensor S = random_tensor({batch, batch}, rng, 0.1);
    for (int i = 0; i < batch; ++i) S.at(i, i) = 2.0;  // clear of every off-diagonal + margin
    CHECK(triplet_loss_value(S, 0.2) == 0.0);
}

TEST_CASE("triplet_loss equals brute-force enumeration on random batches") {
    Rng rng(38);
    for (int trial = 0; trial < 50; ++trial) {
        const int batch = 2 + rng.uniform_int(15);
        const Tensor S = random_tensor({batch, batch}, rng);
        const double got = triplet_loss_value(S, 0.2);
        const double want = oracle::triplet_loss(S, 0.2);
        CHECK(got == doctest::Approx(want).epsilon(1e-15));
        CHECK(got >= 0.0);
    }
}

TEST_CASE("triplet_loss is invariant to constant shifts of the similarities") {
    Rng rng(39);
    const int batch = 5;
    Tensor S = random_tensor({batch, batch}, rng);
    const double base = triplet_loss_value(S, 0.2);
    for (double& v : S.data) v += 3.7;
    CHECK(triplet_loss_value(S, 0.2) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("triplet_loss needs at least two items") {
    CHECK_THROWS_AS(triplet_loss_value(Tensor({1, 1}, {1.0}), 0.2), ContractError);
}

TEST_CASE("triplet_loss gradients flow through the selected entries") {
    Rng rng(40);
    Parameter s("s", random_tensor({3, 3}, rng));
    Graph g;
    Graph::Node loss = triplet_loss(g, g.param(s), 0.5);
    g.backward(loss);
    double grad_norm = 0.0;
    for (double v : s.value.grad) grad_norm += std::abs(v);
    CHECK(grad_norm > 0.0);
}
