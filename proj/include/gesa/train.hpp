#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "gesa/model.hpp"
#include "gesa/reader.hpp"

namespace gesa {

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 50;
    int batch_size = 8;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-6;
    double weight_decay = 0.01;
    double warmup_ratio = 0.06;
    uint64_t seed = 0;
    double target_dev_acc = -1.0;  // stop early once dev accuracy reaches this
};

// Everything derivable from an instance that stays constant across epochs.
struct PreparedInstance {
    const ClozeInstance* inst = nullptr;
    TokenSequence seq;
    HeterogeneousGraph graph;
    LabelMatrix labels;
    std::vector<int> targets;
};

PreparedInstance prepare_instance(const ClozeInstance& inst, const Vocabulary& vocab,
                                  const ModelConfig& config);
// Skips instances that cannot be built (warning per skip).
std::vector<PreparedInstance> prepare_instances(const std::vector<ClozeInstance>& instances,
                                                const Vocabulary& vocab,
                                                const ModelConfig& config);

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_acc = 0.0;
    double seconds = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    bool reached_target = false;
};

// Adam with linear warmup then linear decay; deterministic given the seed.
// on_epoch (optional) runs after each epoch, e.g. to write a checkpoint.
TrainResult train(ModelParams& params, const std::vector<ClozeInstance>& train_set,
                  const std::vector<ClozeInstance>& dev_set, const Vocabulary& vocab,
                  const TrainConfig& tc, std::ostream* log_stream = nullptr,
                  const std::function<void(int, const ModelParams&)>& on_epoch = {});

struct EvalReport {
    double em = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;  // equals mean EM
    int count = 0;
};

EvalReport evaluate(const ModelParams& params, const std::vector<PreparedInstance>& prepared,
                    int n_threads = 1, std::vector<Prediction>* predictions = nullptr);

// Metrics, applied after the shared normalization. F1 is the best
// token-multiset F1 over the gold set.
double em_score(const std::string& pred, const std::vector<std::string>& golds);
double token_f1(const std::string& pred, const std::vector<std::string>& golds);

struct GradCheckResult {
    double max_rel_err = 0.0;
    int n_checked = 0;
    std::string worst_tensor;
};

// Central finite differences vs analytic gradients over >= n_samples
// coordinates spread over every parameter tensor. Relative error
// denominators are floored at 1e-8. fault_scale deliberately scales the
// analytic gradients (mutation sanity hook); leave at 1.0 for real checks.
GradCheckResult grad_check(ModelParams& params, const ClozeInstance& inst,
                           const Vocabulary& vocab, double eps, int n_samples, uint64_t seed,
                           double fault_scale = 1.0);

// Small fixed fixture for gradient checking (P <= 24 at the paired config).
ClozeInstance gradcheck_instance();
ModelConfig gradcheck_config();

// Synthetic cloze tasks exercising the attention mechanism. hops=1: the
// answer is the unique candidate sharing a sentence with a cue entity named
// in the question. hops=2: the cue co-occurs with a bridge entity whose
// same-string mention co-occurs with the answer in another sentence.
ClozeInstance gen_synthetic(int n_candidates, int n_sentences, int hops, uint64_t seed);
std::vector<ClozeInstance> gen_synthetic_set(int n, int n_candidates, int n_sentences, int hops,
                                             uint64_t seed);

struct AblationRow {
    Ablation spec = Ablation::None;
    std::vector<double> dev_acc_per_seed;
    double mean_acc = 0.0;
    double delta_vs_full = 0.0;  // full mean - this mean
};

// Retrains per spec from the same init seeds and reports dev accuracy
// deltas against the full model (first row).
std::vector<AblationRow> run_ablation(const std::vector<Ablation>& specs,
                                      const ModelConfig& base_model, const TrainConfig& base_train,
                                      const std::vector<ClozeInstance>& train_set,
                                      const std::vector<ClozeInstance>& dev_set,
                                      const std::vector<uint64_t>& seeds,
                                      std::ostream* progress = nullptr);

void print_ablation_table(const std::vector<AblationRow>& rows, std::ostream& out);

}  // namespace gesa
