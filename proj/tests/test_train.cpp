#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gesa/train.hpp"
#include "test_util.hpp"

using namespace gesa;

TEST_CASE("zero learning rate leaves parameters bit-identical") {
    auto data = gen_synthetic_set(12, 3, 5, 1, 3);
    Vocabulary vocab = build_vocab(data);
    ModelConfig mc = ModelConfig::desk_scale();
    ModelParams params = ModelParams::init(mc, vocab.size(), 5);
    std::vector<Mat> before;
    for (auto& t : params.tensors) before.push_back(t->v);

    TrainConfig tc;
    tc.lr = 0.0;
    tc.epochs = 2;
    tc.batch_size = 4;
    train(params, data, {}, vocab, tc);

    for (size_t t = 0; t < params.tensors.size(); ++t)
        for (size_t i = 0; i < before[t].a.size(); ++i)
            CHECK(params.tensors[t]->v.a[i] == before[t].a[i]);
}

TEST_CASE("training is deterministic given the seed") {
    auto data = gen_synthetic_set(16, 3, 5, 1, 4);
    auto dev = gen_synthetic_set(8, 3, 5, 1, 104);
    Vocabulary vocab = build_vocab(data);
    ModelConfig mc = ModelConfig::desk_scale();
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 4;
    tc.seed = 11;

    ModelParams p1 = ModelParams::init(mc, vocab.size(), tc.seed);
    ModelParams p2 = ModelParams::init(mc, vocab.size(), tc.seed);
    TrainResult r1 = train(p1, data, dev, vocab, tc);
    TrainResult r2 = train(p2, data, dev, vocab, tc);
    REQUIRE(r1.log.size() == r2.log.size());
    for (size_t e = 0; e < r1.log.size(); ++e) {
        CHECK(r1.log[e].train_loss == r2.log[e].train_loss);
        CHECK(r1.log[e].dev_acc == r2.log[e].dev_acc);
    }
}

TEST_CASE("training with dropout is still seed-deterministic") {
    auto data = gen_synthetic_set(8, 3, 5, 1, 6);
    Vocabulary vocab = build_vocab(data);
    ModelConfig mc = ModelConfig::desk_scale();
    mc.dropout = 0.2;
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 4;
    ModelParams p1 = ModelParams::init(mc, vocab.size(), 0);
    ModelParams p2 = ModelParams::init(mc, vocab.size(), 0);
    TrainResult r1 = train(p1, data, {}, vocab, tc);
    TrainResult r2 = train(p2, data, {}, vocab, tc);
    for (size_t e = 0; e < r1.log.size(); ++e)
        CHECK(r1.log[e].train_loss == r2.log[e].train_loss);
}

TEST_CASE("gradient check passes on the small reference model") {
    ModelConfig mc = gradcheck_config();
    ClozeInstance inst = gradcheck_instance();
    Vocabulary vocab = build_vocab({inst});
    ModelParams params = ModelParams::init(mc, vocab.size(), 0);
    GradCheckResult res = grad_check(params, inst, vocab, 1e-5, 200, 0);
    CHECK(res.n_checked >= 200);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("a doubled analytic gradient fails the check") {
    ModelConfig mc = gradcheck_config();
    ClozeInstance inst = gradcheck_instance();
    Vocabulary vocab = build_vocab({inst});
    ModelParams params = ModelParams::init(mc, vocab.size(), 0);
    GradCheckResult res = grad_check(params, inst, vocab, 1e-5, 200, 0, 2.0);
    CHECK(res.max_rel_err > 1e-2);
}

TEST_CASE("gradient check rejects non-positive eps") {
    ModelConfig mc = gradcheck_config();
    ClozeInstance inst = gradcheck_instance();
    Vocabulary vocab = build_vocab({inst});
    ModelParams params = ModelParams::init(mc, vocab.size(), 0);
    CHECK_THROWS_AS(grad_check(params, inst, vocab, 0.0, 10, 0), DataError);
}

TEST_CASE("parameters without a path to the loss get zero gradients") {
    ModelConfig mc = gradcheck_config();
    ClozeInstance inst = gradcheck_instance();
    Vocabulary vocab = build_vocab({inst});
    // an extra vocab row no instance token maps to
    ModelParams params = ModelParams::init(mc, vocab.size() + 3, 0);
    PreparedInstance p = prepare_instance(inst, vocab, mc);
    params.zero_grad();
    ForwardCache cache;
    Mat hidden = model_forward(p.seq, p.labels, params, &cache);
    Mat dhidden(hidden.rows, hidden.cols);
    reader_loss_backward(hidden, p.seq, p.targets, params, dhidden);
    model_backward(dhidden, p.seq, p.labels, params, cache);
    const int unused_row = vocab.size() + 1;
    for (int j = 0; j < params.word_emb->g.cols; ++j)
        CHECK(params.word_emb->g(unused_row, j) == 0.0);
}

TEST_CASE("empty training data is rejected") {
    Vocabulary vocab;
    ModelConfig mc = ModelConfig::desk_scale();
    ModelParams params = ModelParams::init(mc, vocab.size(), 0);
    TrainConfig tc;
    CHECK_THROWS_AS(train(params, {}, {}, vocab, tc), DataError);
}

TEST_CASE("degenerate labels make all candidates indistinguishable") {
    ModelConfig mc = ModelConfig::desk_scale();
    mc.ablation = Ablation::Eq3InW2eE2wE2e;
    auto inst = gen_synthetic(4, 6, 1, 77);
    Vocabulary vocab = build_vocab({inst});
    ModelParams params = ModelParams::init(mc, vocab.size(), 7);
    PreparedInstance p = prepare_instance(inst, vocab, mc);
    Mat hidden = model_forward(p.seq, p.labels, params);
    Prediction pred = score_candidates(hidden, p.seq, inst.mentions, params);
    for (double s : pred.scores) CHECK(std::abs(s - pred.scores[0]) < 1e-9);
}
