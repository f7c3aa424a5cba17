#include "gesa/config.hpp"

#include <fstream>
#include <sstream>

namespace gesa {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw DataError("config: bad integer for " + key + ": " + v);
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw DataError("config: bad number for " + key + ": " + v);
    }
}

uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const uint64_t x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw DataError("config: bad integer for " + key + ": " + v);
    }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "p_max") model.p_max = to_int(key, value);
    else if (key == "max_q_len") model.max_q_len = to_int(key, value);
    else if (key == "hidden_size") model.hidden_size = to_int(key, value);
    else if (key == "head_size") model.head_size = to_int(key, value);
    else if (key == "n_heads") model.n_heads = to_int(key, value);
    else if (key == "n_layers") model.n_layers = to_int(key, value);
    else if (key == "window_radius") model.window_radius = to_int(key, value);
    else if (key == "entity_embed_dim") model.entity_embed_dim = to_int(key, value);
    else if (key == "w2w_mode") model.w2w_mode = w2w_mode_from_string(value);
    else if (key == "ablation") model.ablation = ablation_from_string(value);
    else if (key == "dropout") model.dropout = to_double(key, value);
    else if (key == "lr") train.lr = to_double(key, value);
    else if (key == "epochs") train.epochs = to_int(key, value);
    else if (key == "batch_size") train.batch_size = to_int(key, value);
    else if (key == "adam_beta1") train.beta1 = to_double(key, value);
    else if (key == "adam_beta2") train.beta2 = to_double(key, value);
    else if (key == "adam_eps") train.eps = to_double(key, value);
    else if (key == "weight_decay") train.weight_decay = to_double(key, value);
    else if (key == "warmup_ratio") train.warmup_ratio = to_double(key, value);
    else if (key == "seed") train.seed = to_u64(key, value);
    else if (key == "target_dev_acc") train.target_dev_acc = to_double(key, value);
    else throw DataError("config: unknown key: " + key);
}

void RunConfig::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
        set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

void RunConfig::apply_override(const std::string& key_eq_value) {
    const auto eq = key_eq_value.find('=');
    if (eq == std::string::npos) throw DataError("override must be key=value: " + key_eq_value);
    set(trim(key_eq_value.substr(0, eq)), trim(key_eq_value.substr(eq + 1)));
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "p_max=" << model.p_max << "\n";
    out << "max_q_len=" << model.max_q_len << "\n";
    out << "hidden_size=" << model.hidden_size << "\n";
    out << "head_size=" << model.head_size << "\n";
    out << "n_heads=" << model.n_heads << "\n";
    out << "n_layers=" << model.n_layers << "\n";
    out << "window_radius=" << model.window_radius << "\n";
    out << "entity_embed_dim=" << model.entity_embed_dim << "\n";
    out << "w2w_mode=" << w2w_mode_name(model.w2w_mode) << "\n";
    out << "ablation=" << ablation_name(model.ablation) << "\n";
    out << "dropout=" << model.dropout << "\n";
    out << "lr=" << train.lr << "\n";
    out << "epochs=" << train.epochs << "\n";
    out << "batch_size=" << train.batch_size << "\n";
    out << "adam_beta1=" << train.beta1 << "\n";
    out << "adam_beta2=" << train.beta2 << "\n";
    out << "adam_eps=" << train.eps << "\n";
    out << "weight_decay=" << train.weight_decay << "\n";
    out << "warmup_ratio=" << train.warmup_ratio << "\n";
    out << "seed=" << train.seed << "\n";
    out << "target_dev_acc=" << train.target_dev_acc << "\n";
    return out.str();
}

uint64_t RunConfig::hash() const {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : serialize()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace gesa
