#include <doctest.h>

#include <cmath>
#include <memory>

#include "semcom/task/pragmatic.hpp"
#include "test_util.hpp"

using namespace semcom;
using namespace semcom::task;
using namespace semcom::testutil;

TEST_CASE("lambda_s") {
    CHECK(lambda_s(0.1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(lambda_s(1.0) == 0.0);
    CHECK(lambda_s(0.5) == 0.5);
    for (double cr : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) CHECK(lambda_s(cr) + cr == 1.0);
    CHECK_THROWS(lambda_s(1.5));
}

namespace {

// Continuous-task sample with hand-picked D_ob and D_pr.
TrainingSample sample_with(double d_ob, double d_pr) {
    TrainingSample t;
    t.k = Tensor({1}, {0.0});
    t.k_hat = Tensor({1}, {std::sqrt(d_ob)});
    t.z_mask = Tensor({1}, {0.0});
    t.z_hat = Tensor({1}, {std::sqrt(d_pr)});
    return t;
}

}  // namespace

TEST_CASE("semantic_distortion degenerate weightings") {
    LossConfig cfg;
    cfg.task = TaskKind::Continuous;
    TrainingSample t = sample_with(2.0, 4.0);

    cfg.lambda = 1.0;
    cfg.alpha = 3.0;
    CHECK(semantic_distortion(t, cfg).value == doctest::Approx(3.0 * 2.0).epsilon(1e-12));

    cfg.lambda = 0.0;
    CHECK(semantic_distortion(t, cfg).value == doctest::Approx(4.0).epsilon(1e-12));

    cfg.lambda = 0.5;
    cfg.alpha = 1.0;
    CHECK(semantic_distortion(t, cfg).value == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("semantic_distortion rejects lambda outside [0,1]") {
    LossConfig cfg;
    cfg.lambda = 1.5;
    CHECK_THROWS(semantic_distortion(sample_with(1, 1), cfg));
}

TEST_CASE("weighted-sum linearity against independent terms") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        TrainingSample t;
        t.k = Tensor({4});
        t.k_hat = Tensor({4});
        t.z_mask = Tensor({4});
        t.z_hat = Tensor({4});
        for (std::size_t i = 0; i < 4; ++i) {
            t.k.data[i] = uniform(rng, 0, 1);
            t.k_hat.data[i] = uniform(rng, 0, 1);
            t.z_mask.data[i] = uniform(rng, 0, 1);
            t.z_hat.data[i] = uniform(rng, 0, 1);
        }
        LossConfig cfg;
        cfg.task = TaskKind::Continuous;
        cfg.lambda = uniform(rng, 0, 1);
        cfg.alpha = uniform(rng, 0.5, 3.0);
        const SdResult r = semantic_distortion(t, cfg);
        const double d_ob = mse_loss(t.k, t.k_hat).value;
        const double d_pr = mse_loss(t.z_mask, t.z_hat).value;
        CHECK(std::fabs(r.value - (cfg.lambda * cfg.alpha * d_ob + (1 - cfg.lambda) * d_pr)) <=
              1e-12);
    }
}

TEST_CASE("softmax_cross_entropy examples") {
    Tensor uniform10({1, 10});
    CHECK(softmax_cross_entropy(uniform10, {3}).value ==
          doctest::Approx(std::log(10.0)).epsilon(1e-9));

    CHECK(softmax_cross_entropy(Tensor({1, 2}, {1000, 0}), {0}).value ==
          doctest::Approx(0.0).epsilon(1e-9));

    const auto lv = softmax_cross_entropy(Tensor({1, 2}, {0, 0}), {1});
    CHECK(lv.grad.data[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lv.grad.data[1] == doctest::Approx(-0.5).epsilon(1e-12));

    CHECK_THROWS(softmax_cross_entropy(Tensor({1, 2}), {2}));
}

TEST_CASE("cross entropy is nonnegative") {
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        Tensor logits({2, 5});
        for (auto& v : logits.data) v = uniform(rng, -4, 4);
        CHECK(softmax_cross_entropy(logits, {std::size_t(i % 5), std::size_t((i + 2) % 5)})
                  .value >= 0.0);
    }
}

TEST_CASE("esd_batch: singleton, duplication, and mean arithmetic") {
    Model id;  // identity pragmatic stub on a mask task
    LossConfig cfg;
    cfg.task = TaskKind::Continuous;
    cfg.lambda = 0.5;
    cfg.alpha = 1.0;

    const Tensor k({1, 2}, {1.0, 0.0});
    const Tensor k_hat({1, 2}, {0.0, 0.0});
    PragmaticTruth truth;
    truth.kind = TaskKind::Continuous;
    truth.masks = Tensor({1, 2}, {0.0, 0.0});

    const EsdResult single = esd_batch(k, k_hat, id, truth, cfg);
    TrainingSample t;
    t.k = Tensor({2}, {1.0, 0.0});
    t.k_hat = Tensor({2}, {0.0, 0.0});
    t.z_mask = Tensor({2}, {0.0, 0.0});
    t.z_hat = Tensor({2}, {0.0, 0.0});  // identity phi: z_hat = k_hat
    CHECK(single.value == doctest::Approx(semantic_distortion(t, cfg).value).epsilon(1e-12));

    const Tensor k2({2, 2}, {1.0, 0.0, 1.0, 0.0});
    const Tensor k_hat2({2, 2}, {0.0, 0.0, 0.0, 0.0});
    PragmaticTruth truth2;
    truth2.kind = TaskKind::Continuous;
    truth2.masks = Tensor({2, 2});
    CHECK(esd_batch(k2, k_hat2, id, truth2, cfg).value ==
          doctest::Approx(single.value).epsilon(1e-12));
}

TEST_CASE("esd_batch: mean of per-sample losses 1 and 3 is 2") {
    // lambda = 1 so only D_ob counts; craft per-sample MSEs of 1 and 3
    Model id;
    LossConfig cfg;
    cfg.lambda = 1.0;
    cfg.alpha = 1.0;
    cfg.task = TaskKind::Continuous;
    const Tensor k({2, 1}, {0.0, 0.0});
    const Tensor k_hat({2, 1}, {1.0, std::sqrt(3.0)});
    PragmaticTruth truth;
    truth.kind = TaskKind::Continuous;
    CHECK(esd_batch(k, k_hat, id, truth, cfg).value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("esd_batch with lambda=1 never touches phi or ground truth") {
    // a phi that would throw on any forward call (input dim mismatch)
    Model booby;
    booby.add(std::make_unique<Dense>(999, 1));
    LossConfig cfg;
    cfg.lambda = 1.0;
    cfg.task = TaskKind::Discrete;
    PragmaticTruth truth;  // deliberately empty
    const Tensor k({2, 3}, {1, 2, 3, 4, 5, 6});
    const Tensor k_hat({2, 3}, {1, 2, 3, 4, 5, 7});
    CHECK_NOTHROW(esd_batch(k, k_hat, booby, truth, cfg));
}

TEST_CASE("esd_batch gradient w.r.t. k_hat matches finite differences") {
    Rng rng(41);
    for (TaskKind task : {TaskKind::Discrete, TaskKind::Continuous}) {
        Model phi;
        phi.add(std::make_unique<Dense>(6, task == TaskKind::Discrete ? 3 : 6, rng));
        phi.add(std::make_unique<Tanh>());
        phi.add(std::make_unique<Dense>(task == TaskKind::Discrete ? 3 : 6,
                                        task == TaskKind::Discrete ? 3 : 6, rng));

        Tensor k({2, 6}), k_hat({2, 6});
        for (auto& v : k.data) v = uniform(rng, 0, 1);
        for (auto& v : k_hat.data) v = uniform(rng, 0, 1);
        PragmaticTruth truth;
        truth.kind = task;
        if (task == TaskKind::Discrete) {
            truth.labels = {0, 2};
        } else {
            truth.masks = Tensor({2, 6});
            for (auto& v : truth.masks.data) v = uniform(rng, 0, 1);
        }
        LossConfig cfg;
        cfg.task = task;
        cfg.lambda = 0.4;
        cfg.alpha = 1.7;

        const EsdResult r = esd_batch(k, k_hat, phi, truth, cfg);
        auto loss = [&]() { return esd_batch(k, k_hat, phi, truth, cfg).value; };
        CHECK(check_input_grad(k_hat, r.grad_k_hat, loss));
    }
}

TEST_CASE("pragmatic_apply: identity stub and frozen parameters") {
    Model id;
    const Tensor k_hat({1, 3}, {0.1, 0.2, 0.3});
    CHECK(pragmatic_apply(id, k_hat).data == k_hat.data);

    Rng rng(55);
    Model phi;
    phi.add(std::make_unique<Dense>(3, 2, rng));
    const auto before = serialize_model(phi);
    LossConfig cfg;
    cfg.lambda = 0.3;
    cfg.task = TaskKind::Discrete;
    PragmaticTruth truth;
    truth.kind = TaskKind::Discrete;
    truth.labels = {1};
    for (int i = 0; i < 5; ++i) {
        Tensor k({1, 3}), k_hat({1, 3});
        for (auto& v : k.data) v = uniform(rng, 0, 1);
        for (auto& v : k_hat.data) v = uniform(rng, 0, 1);
        esd_batch(k, k_hat, phi, truth, cfg);
    }
    CHECK(serialize_model(phi) == before);
}

TEST_CASE("train_pragmatic: separable blobs reach perfect accuracy") {
    Rng rng(61);
    Dataset d;
    d.name = "blobs2d";
    for (int i = 0; i < 40; ++i) {
        const int cls = i % 2;
        Tensor img({1, 2});
        img.data[0] = (cls ? 0.8 : 0.2) + uniform(rng, -0.05, 0.05);
        img.data[1] = (cls ? 0.2 : 0.8) + uniform(rng, -0.05, 0.05);
        d.images.push_back(img);
        d.labels.push_back(cls);
    }
    Model phi;
    Rng init(1);
    phi.add(std::make_unique<Dense>(2, 2, init));
    const auto rep = train_pragmatic(phi, d, 60, {.eta = 0.05}, 3);
    CHECK(rep.train_accuracy == 1.0);
}

TEST_CASE("train_pragmatic: single-class dataset is trivially perfect") {
    Dataset d;
    for (int i = 0; i < 8; ++i) {
        d.images.push_back(Tensor({1, 2}, {0.5, 0.5}));
        d.labels.push_back(0);
    }
    Model phi;
    Rng init(2);
    phi.add(std::make_unique<Dense>(2, 2, init));
    const auto rep = train_pragmatic(phi, d, 20, {.eta = 0.05}, 3);
    CHECK(rep.train_accuracy == 1.0);
}

TEST_CASE("train_pragmatic: synthetic digits reach 0.95 within 50 epochs") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 120, 5);
    Model phi;
    Rng init(4);
    phi.add(std::make_unique<Dense>(64, 2, init));
    const auto rep = train_pragmatic(phi, d, 50, {.eta = 0.01}, 3);
    CHECK(rep.train_accuracy >= 0.95);
    CHECK(rep.epochs_run <= 50);
}

TEST_CASE("coder pair validation enforces the activation-free convention") {
    Rng rng(71);
    CoderPair pair;
    pair.encoder.add(std::make_unique<Dense>(8, 4, rng));
    pair.encoder.add(std::make_unique<PowerNorm>());
    pair.decoder.add(std::make_unique<Dense>(4, 8, rng));
    pair.cr = 0.5;
    CHECK_NOTHROW(pair.validate());

    pair.decoder.add(std::make_unique<Relu>());
    CHECK_THROWS(pair.validate());
}

TEST_CASE("pretrain_reconstruction descends and emits a bit-exact blob") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 40, 7);
    Rng rng(81);
    CoderPair pair;
    pair.encoder.add(std::make_unique<Dense>(64, 16, rng));
    pair.encoder.add(std::make_unique<PowerNorm>());
    pair.decoder.add(std::make_unique<Dense>(16, 64, rng));
    pair.cr = 0.25;

    ChannelConfig ch;
    ch.noiseless = true;
    ch.n_x = 16;
    ch.n_k = 64;
    const auto rep = pretrain_reconstruction(pair, d, ch, 20, {.eta = 1e-3}, 1);
    CHECK(rep.final_mse < rep.initial_mse);
    CHECK(rep.encoder_blob == serialize_model(pair.encoder));
    Model round = deserialize_model(rep.encoder_blob);
    CHECK(serialize_model(round) == rep.encoder_blob);
}

TEST_CASE("pretrain_reconstruction: identity map reachable at CR=1") {
    Rng rng(91);
    Dataset d;
    // rank-limited toy source: every image is a scalar multiple of one pattern
    const Tensor base({2, 2}, {0.2, 0.4, 0.6, 0.8});
    for (int i = 0; i < 24; ++i) {
        Tensor img = base;
        const double s = 0.25 + 0.7 * (i / 24.0);
        for (auto& v : img.data) v *= s;
        d.images.push_back(img);
    }
    CoderPair pair;
    auto enc = std::make_unique<Dense>(4, 4);
    enc->set_identity();
    pair.encoder.add(std::move(enc));
    pair.encoder.add(std::make_unique<PowerNorm>());
    auto dec = std::make_unique<Dense>(4, 4);
    dec->set_identity();
    pair.decoder.add(std::move(dec));
    pair.cr = 1.0;

    ChannelConfig ch;
    ch.noiseless = true;
    ch.n_x = 4;
    ch.n_k = 4;
    const auto rep = pretrain_reconstruction(pair, d, ch, 400, {.eta = 3e-3}, 1, 8);
    CHECK(rep.final_mse <= 1e-3);
}
