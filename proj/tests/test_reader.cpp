#include <cmath>

#include "doctest.h"
#include "gesa/reader.hpp"
#include "gesa/train.hpp"
#include "test_util.hpp"

using namespace gesa;

namespace {

struct Built {
    ModelConfig config;
    Vocabulary vocab;
    ModelParams params;
    ClozeInstance inst;
    PreparedInstance prep;
};

Built make(uint64_t seed) {
    Built b;
    b.config = ModelConfig::desk_scale();
    b.inst = gen_synthetic(4, 6, 1, seed);
    b.vocab = build_vocab({b.inst});
    b.params = ModelParams::init(b.config, b.vocab.size(), seed);
    b.prep = prepare_instance(b.inst, b.vocab, b.config);
    return b;
}

}  // namespace

TEST_CASE("zero reader weights score one half everywhere, ties go low") {
    Built b = make(1);
    test::fill_tensor(b.params.reader_w, 0.0);
    test::fill_tensor(b.params.reader_b, 0.0);
    Mat hidden = model_forward(b.prep.seq, b.prep.labels, b.params);
    Prediction pred = score_candidates(hidden, b.prep.seq, b.inst.mentions, b.params);
    for (double s : pred.scores) CHECK(s == 0.5);
    CHECK(pred.best_index == 0);
}

TEST_CASE("score matches a hand-computed sigmoid at L=1") {
    ModelConfig c;
    c.hidden_size = 1;
    c.head_size = 1;
    c.n_heads = 1;
    c.n_layers = 0;
    c.window_radius = 1;
    c.entity_embed_dim = 1;
    ModelParams params = ModelParams::init(c, 8, 0);
    test::fill_tensor(params.reader_w, 1.0);
    test::fill_tensor(params.reader_b, 0.0);

    TokenSequence seq;
    seq.words.push_back({Vocabulary::kClsId, TokenRole::Cls});
    seq.entities.push_back({EntityKind::PlcEntity, -1, -1, -1});
    seq.entities.push_back({EntityKind::Candidate, 0, 0, 1});
    Mat hidden(3, 1);
    hidden(1, 0) = 0.3;  // placeholder entity
    hidden(2, 0) = 0.5;  // candidate
    std::vector<Mention> mentions = {{"x", 0, 0, 1}};
    Prediction pred = score_candidates(hidden, seq, mentions, params);
    CHECK(pred.scores[0] == doctest::Approx(0.6900).epsilon(1e-3));
    CHECK(pred.best_surface == "x");
}

TEST_CASE("positive rescaling of the logit preserves the argmax") {
    Built b = make(2);
    Mat hidden = model_forward(b.prep.seq, b.prep.labels, b.params);
    Prediction base = score_candidates(hidden, b.prep.seq, b.inst.mentions, b.params);
    for (double& v : b.params.reader_w->v.a) v *= 3.5;
    b.params.reader_b->v(0, 0) *= 3.5;
    Prediction scaled = score_candidates(hidden, b.prep.seq, b.inst.mentions, b.params);
    CHECK(scaled.best_index == base.best_index);
}

TEST_CASE("bce loss values") {
    CHECK(bce_loss({0.9, 0.1}, {1, 0}) == doctest::Approx(0.10536).epsilon(1e-4));
    CHECK(bce_loss({0.5, 0.5}, {1, 0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss({1.0, 0.0}, {1, 0}) <= 1e-11);  // clamped
}

TEST_CASE("bce loss is permutation invariant over candidates") {
    const double a = bce_loss({0.9, 0.2, 0.7}, {1, 0, 0});
    const double b = bce_loss({0.7, 0.9, 0.2}, {0, 1, 0});
    CHECK(a == doctest::Approx(b).epsilon(1e-15));
}

TEST_CASE("targets mark every mention of the answer string") {
    ClozeInstance inst;
    inst.id = "t";
    inst.question_tokens = {"who", "[PLC]"};
    inst.sentences = {{"Rex", "met", "Ada", "."}, {"Rex", "left", "."}};
    inst.mentions = {{"Rex", 0, 0, 1}, {"Ada", 0, 2, 3}, {"Rex", 1, 0, 1}};
    inst.candidates = {0, 1, 2};
    inst.gold_answers = {"rex"};
    Vocabulary vocab = build_vocab({inst});
    TokenSequence seq = build_sequence(inst, vocab, 64, 8);
    auto targets = make_targets(seq, inst);
    CHECK(targets == std::vector<int>{1, 0, 1});
}

TEST_CASE("reader gradients match finite differences") {
    Built b = make(3);
    Mat hidden = model_forward(b.prep.seq, b.prep.labels, b.params);

    b.params.zero_grad();
    Mat dhidden(hidden.rows, hidden.cols);
    reader_loss_backward(hidden, b.prep.seq, b.prep.targets, b.params, dhidden);

    auto loss_of = [&]() {
        Prediction p = score_candidates(hidden, b.prep.seq, b.inst.mentions, b.params);
        return bce_loss(p.scores, b.prep.targets);
    };
    const double eps = 1e-6;
    for (size_t i : {size_t(0), size_t(5), size_t(70)}) {
        double& w = b.params.reader_w->v.a[i];
        const double saved = w;
        w = saved + eps;
        const double lp = loss_of();
        w = saved - eps;
        const double lm = loss_of();
        w = saved;
        const double fd = (lp - lm) / (2 * eps);
        CHECK(b.params.reader_w->g.a[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}
