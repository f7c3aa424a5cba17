#include "gesa/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <random>
#include <thread>

namespace gesa {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Static partition; results must be written by index for determinism.
void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
    n_threads = std::max(1, std::min(n_threads, n));
    if (n_threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += n_threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct Adam {
    std::vector<Mat> m, v;
    long long step = 0;

    explicit Adam(const ModelParams& p) {
        for (const auto& t : p.tensors) {
            m.emplace_back(t->v.rows, t->v.cols);
            v.emplace_back(t->v.rows, t->v.cols);
        }
    }

    void update(ModelParams& p, const TrainConfig& tc, double lr) {
        ++step;
        const double bc1 = 1.0 - std::pow(tc.beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(tc.beta2, static_cast<double>(step));
        for (size_t t = 0; t < p.tensors.size(); ++t) {
            Tensor& ten = *p.tensors[t];
            double* mm = m[t].a.data();
            double* vv = v[t].a.data();
            const double* g = ten.g.a.data();
            double* w = ten.v.a.data();
            const double decay = ten.decay ? tc.weight_decay : 0.0;
            for (size_t i = 0; i < ten.v.a.size(); ++i) {
                mm[i] = tc.beta1 * mm[i] + (1.0 - tc.beta1) * g[i];
                vv[i] = tc.beta2 * vv[i] + (1.0 - tc.beta2) * g[i] * g[i];
                const double mhat = mm[i] / bc1;
                const double vhat = vv[i] / bc2;
                w[i] -= lr * (mhat / (std::sqrt(vhat) + tc.eps) + decay * w[i]);
            }
        }
    }
};

double schedule_lr(const TrainConfig& tc, long long step, long long total_steps) {
    const long long warm = std::max<long long>(1, std::llround(tc.warmup_ratio * total_steps));
    if (step <= warm) return tc.lr * static_cast<double>(step) / static_cast<double>(warm);
    if (total_steps <= warm) return tc.lr;
    return tc.lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warm);
}

}  // namespace

PreparedInstance prepare_instance(const ClozeInstance& inst, const Vocabulary& vocab,
                                  const ModelConfig& config) {
    PreparedInstance p;
    p.inst = &inst;
    p.seq = build_sequence(inst, vocab, config.p_max, config.max_q_len);
    p.graph = build_graph(p.seq.entities, inst.mentions);
    p.labels = build_label_matrix(p.seq, p.graph, config.label_vocab(), config.w2w_mode,
                                  config.ablation);
    p.targets = make_targets(p.seq, inst);
    return p;
}

std::vector<PreparedInstance> prepare_instances(const std::vector<ClozeInstance>& instances,
                                                const Vocabulary& vocab,
                                                const ModelConfig& config) {
    std::vector<PreparedInstance> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        try {
            out.push_back(prepare_instance(inst, vocab, config));
        } catch (const DataError& e) {
            std::cerr << "warning: skipping instance: " << e.what() << "\n";
        }
    }
    return out;
}

double em_score(const std::string& pred, const std::vector<std::string>& golds) {
    const std::string p = normalize_answer(pred);
    for (const auto& g : golds)
        if (p == normalize_answer(g)) return 1.0;
    return 0.0;
}

double token_f1(const std::string& pred, const std::vector<std::string>& golds) {
    const auto p_toks = normalize_tokens(pred);
    double best = 0.0;
    for (const auto& g : golds) {
        const auto g_toks = normalize_tokens(g);
        double f1;
        if (p_toks.empty() && g_toks.empty()) {
            f1 = 1.0;
        } else if (p_toks.empty() || g_toks.empty()) {
            f1 = 0.0;
        } else {
            std::map<std::string, int> counts;
            for (const auto& t : g_toks) ++counts[t];
            int common = 0;
            for (const auto& t : p_toks) {
                auto it = counts.find(t);
                if (it != counts.end() && it->second > 0) {
                    ++common;
                    --it->second;
                }
            }
            if (common == 0) {
                f1 = 0.0;
            } else {
                const double prec = static_cast<double>(common) / p_toks.size();
                const double rec = static_cast<double>(common) / g_toks.size();
                f1 = 2.0 * prec * rec / (prec + rec);
            }
        }
        best = std::max(best, f1);
    }
    return best;
}

EvalReport evaluate(const ModelParams& params, const std::vector<PreparedInstance>& prepared,
                    int n_threads, std::vector<Prediction>* predictions) {
    EvalReport rep;
    rep.count = static_cast<int>(prepared.size());
    if (prepared.empty()) return rep;
    std::vector<Prediction> preds(prepared.size());
    parallel_for(static_cast<int>(prepared.size()), n_threads, [&](int i) {
        const PreparedInstance& p = prepared[i];
        Mat hidden = model_forward(p.seq, p.labels, params);
        preds[i] = score_candidates(hidden, p.seq, p.inst->mentions, params);
    });
    for (size_t i = 0; i < prepared.size(); ++i) {
        rep.em += em_score(preds[i].best_surface, prepared[i].inst->gold_answers);
        rep.f1 += token_f1(preds[i].best_surface, prepared[i].inst->gold_answers);
    }
    rep.em /= rep.count;
    rep.f1 /= rep.count;
    rep.accuracy = rep.em;
    if (predictions) *predictions = std::move(preds);
    return rep;
}

TrainResult train(ModelParams& params, const std::vector<ClozeInstance>& train_set,
                  const std::vector<ClozeInstance>& dev_set, const Vocabulary& vocab,
                  const TrainConfig& tc, std::ostream* log_stream,
                  const std::function<void(int, const ModelParams&)>& on_epoch) {
    if (train_set.empty()) throw DataError("train: empty dataset");
    auto prepared = prepare_instances(train_set, vocab, params.config);
    if (prepared.empty()) throw DataError("train: no usable training instances");
    auto dev_prepared = prepare_instances(dev_set, vocab, params.config);

    Adam opt(params);
    std::mt19937_64 order_rng(tc.seed ^ 0xA5A5A5A55A5A5A5AULL);
    Dropout drop{params.config.dropout, std::mt19937_64(tc.seed ^ 0xC3C3C3C33C3C3C3CULL)};

    const int n = static_cast<int>(prepared.size());
    const long long steps_per_epoch = (n + tc.batch_size - 1) / tc.batch_size;
    const long long total_steps = steps_per_epoch * tc.epochs;
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;

    TrainResult result;
    long long step = 0;
    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), order_rng);
        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += tc.batch_size) {
            const int end = std::min(n, start + tc.batch_size);
            params.zero_grad();
            double batch_loss = 0.0;
            for (int b = start; b < end; ++b) {
                const PreparedInstance& p = prepared[order[b]];
                ForwardCache cache;
                Dropout* dr = drop.active() ? &drop : nullptr;
                Mat hidden = model_forward(p.seq, p.labels, params, &cache, dr);
                Mat dhidden(hidden.rows, hidden.cols);
                batch_loss += reader_loss_backward(hidden, p.seq, p.targets, params, dhidden);
                model_backward(dhidden, p.seq, p.labels, params, cache);
            }
            const double inv_b = 1.0 / static_cast<double>(end - start);
            for (auto& t : params.tensors)
                for (double& g : t->g.a) g *= inv_b;
            batch_loss *= inv_b;
            if (!std::isfinite(batch_loss))
                throw NumericError("train: divergence at step " + std::to_string(step + 1));
            ++step;
            opt.update(params, tc, schedule_lr(tc, step, total_steps));
            epoch_loss += batch_loss;
        }
        epoch_loss /= static_cast<double>(steps_per_epoch);

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = epoch_loss;
        log.dev_acc = dev_prepared.empty() ? 0.0 : evaluate(params, dev_prepared).accuracy;
        log.seconds = seconds_since(t0);
        if (log_stream)
            *log_stream << "epoch " << log.epoch << " loss " << log.train_loss << " dev_acc "
                        << log.dev_acc << " secs " << log.seconds << "\n";
        result.log.push_back(log);
        if (on_epoch) on_epoch(epoch, params);
        if (tc.target_dev_acc > 0.0 && log.dev_acc >= tc.target_dev_acc) {
            result.reached_target = true;
            break;
        }
    }
    return result;
}

ClozeInstance gradcheck_instance() {
    ClozeInstance inst;
    inst.id = "gradcheck";
    inst.question_tokens = {"where", kPlcToken, "went"};
    inst.sentences = {{"rex", "ran", "far"}, {"ada", "sat", "home"}};
    inst.mentions = {{"rex", 0, 0, 1}, {"ada", 1, 0, 1}};
    inst.candidates = {0, 1};
    inst.gold_answers = {"rex"};
    return inst;
}

ModelConfig gradcheck_config() {
    ModelConfig c;
    c.p_max = 24;
    c.max_q_len = 8;
    c.hidden_size = 16;
    c.head_size = 8;
    c.n_heads = 2;
    c.n_layers = 2;
    c.window_radius = 2;
    c.entity_embed_dim = 8;
    return c;
}

GradCheckResult grad_check(ModelParams& params, const ClozeInstance& inst,
                           const Vocabulary& vocab, double eps, int n_samples, uint64_t seed,
                           double fault_scale) {
    if (eps <= 0.0) throw DataError("grad_check: eps must be positive");
    PreparedInstance p = prepare_instance(inst, vocab, params.config);

    auto loss_at = [&]() {
        Mat hidden = model_forward(p.seq, p.labels, params);
        Prediction pred = score_candidates(hidden, p.seq, inst.mentions, params);
        return bce_loss(pred.scores, p.targets);
    };

    params.zero_grad();
    {
        ForwardCache cache;
        Mat hidden = model_forward(p.seq, p.labels, params, &cache);
        Mat dhidden(hidden.rows, hidden.cols);
        reader_loss_backward(hidden, p.seq, p.targets, params, dhidden);
        model_backward(dhidden, p.seq, p.labels, params, cache);
    }

    std::mt19937_64 rng(seed);
    GradCheckResult res;
    const int per_tensor =
        std::max(3, (n_samples + static_cast<int>(params.tensors.size()) - 1) /
                        static_cast<int>(params.tensors.size()));
    for (auto& t : params.tensors) {
        const int n_here = std::min<int>(per_tensor, static_cast<int>(t->v.a.size()));
        std::uniform_int_distribution<size_t> pick(0, t->v.a.size() - 1);
        for (int s = 0; s < n_here; ++s) {
            const size_t idx = pick(rng);
            const double saved = t->v.a[idx];
            t->v.a[idx] = saved + eps;
            const double lp = loss_at();
            t->v.a[idx] = saved - eps;
            const double lm = loss_at();
            t->v.a[idx] = saved;
            const double fd = (lp - lm) / (2.0 * eps);
            const double an = t->g.a[idx] * fault_scale;
            const double denom = std::max(std::max(std::abs(fd), std::abs(an)), 1e-8);
            const double rel = std::abs(fd - an) / denom;
            ++res.n_checked;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_tensor = t->name;
            }
        }
    }
    return res;
}

}  // namespace gesa
