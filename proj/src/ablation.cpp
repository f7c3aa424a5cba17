#include <iomanip>

#include "gesa/train.hpp"

namespace gesa {

std::vector<AblationRow> run_ablation(const std::vector<Ablation>& specs,
                                      const ModelConfig& base_model, const TrainConfig& base_train,
                                      const std::vector<ClozeInstance>& train_set,
                                      const std::vector<ClozeInstance>& dev_set,
                                      const std::vector<uint64_t>& seeds,
                                      std::ostream* progress) {
    Vocabulary vocab = build_vocab(train_set);

    std::vector<Ablation> all{Ablation::None};
    for (Ablation s : specs)
        if (s != Ablation::None) all.push_back(s);

    std::vector<AblationRow> rows;
    for (Ablation spec : all) {
        ModelConfig mc = base_model;
        mc.ablation = spec;
        AblationRow row;
        row.spec = spec;
        for (uint64_t seed : seeds) {
            TrainConfig tc = base_train;
            tc.seed = seed;
            ModelParams params = ModelParams::init(mc, vocab.size(), seed);
            if (progress)
                *progress << "ablate " << ablation_name(spec) << " seed " << seed << "...\n";
            TrainResult tr = train(params, train_set, dev_set, vocab, tc);
            row.dev_acc_per_seed.push_back(tr.log.empty() ? 0.0 : tr.log.back().dev_acc);
        }
        double sum = 0.0;
        for (double a : row.dev_acc_per_seed) sum += a;
        row.mean_acc = sum / static_cast<double>(row.dev_acc_per_seed.size());
        rows.push_back(std::move(row));
    }
    const double full_mean = rows.front().mean_acc;
    for (auto& row : rows) row.delta_vs_full = full_mean - row.mean_acc;
    return rows;
}

void print_ablation_table(const std::vector<AblationRow>& rows, std::ostream& out) {
    out << std::left << std::setw(24) << "spec" << std::right << std::setw(10) << "mean_acc"
        << std::setw(10) << "delta";
    out << "  per-seed\n";
    for (const auto& row : rows) {
        out << std::left << std::setw(24) << ablation_name(row.spec) << std::right << std::fixed
            << std::setprecision(4) << std::setw(10) << row.mean_acc << std::setw(10)
            << row.delta_vs_full << "  ";
        for (size_t i = 0; i < row.dev_acc_per_seed.size(); ++i) {
            if (i) out << " ";
            out << std::setprecision(4) << row.dev_acc_per_seed[i];
        }
        out << "\n";
    }
}

}  // namespace gesa
