#include "gesa/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "gesa/sequence.hpp"

namespace gesa {

namespace {
constexpr double kLnEps = 1e-5;
constexpr double kInitStd = 0.02;
}  // namespace

void ModelConfig::validate() const {
    if (p_max <= 0 || max_q_len <= 0 || hidden_size <= 0 || head_size <= 0 || n_heads <= 0 ||
        n_layers < 0 || window_radius <= 0 || entity_embed_dim <= 0)
        throw DataError("model config: all dimensions must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw DataError("model config: dropout out of range");
}

ModelConfig ModelConfig::full_scale() {
    ModelConfig c;
    c.p_max = 512;
    c.max_q_len = 90;
    c.hidden_size = 1024;
    c.head_size = 64;
    c.n_heads = 16;
    c.n_layers = 24;
    c.window_radius = 150;
    c.entity_embed_dim = 256;
    return c;
}

static Tensor* add_tensor(ModelParams& p, const std::string& name, int r, int c, bool decay) {
    p.tensors.push_back(std::make_unique<Tensor>(name, r, c, decay));
    return p.tensors.back().get();
}

ModelParams ModelParams::init(const ModelConfig& config, int vocab_size, uint64_t seed) {
    config.validate();
    ModelParams p;
    p.config = config;
    p.vocab_size = vocab_size;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, kInitStd);
    auto fill_normal = [&](Tensor* t) {
        for (double& v : t->v.a) v = dist(rng);
    };
    auto fill_ones = [&](Tensor* t) {
        for (double& v : t->v.a) v = 1.0;
    };

    const int L = config.hidden_size;
    const int D = config.entity_embed_dim;
    const int PJ = config.proj_dim();
    const int V = config.label_vocab().size;
    const int F = 4 * L;

    p.word_emb = add_tensor(p, "word_emb", vocab_size, L, true);
    fill_normal(p.word_emb);
    p.mask_entity_emb = add_tensor(p, "mask_entity_emb", 1, D, true);
    fill_normal(p.mask_entity_emb);
    p.entity_proj = add_tensor(p, "entity_proj", D, L, true);
    fill_normal(p.entity_proj);
    p.type_emb = add_tensor(p, "type_emb", 2, L, true);
    fill_normal(p.type_emb);

    for (int l = 0; l < config.n_layers; ++l) {
        const std::string pre = "layer" + std::to_string(l) + ".";
        LayerParams lp;
        lp.ln1_gain = add_tensor(p, pre + "ln1.gain", 1, L, false);
        fill_ones(lp.ln1_gain);
        lp.ln1_bias = add_tensor(p, pre + "ln1.bias", 1, L, false);
        // one query draw, copied to the four type-specific matrices
        lp.wq_w2w = add_tensor(p, pre + "attn.wq_w2w", L, PJ, true);
        fill_normal(lp.wq_w2w);
        lp.wq_w2e = add_tensor(p, pre + "attn.wq_w2e", L, PJ, true);
        lp.wq_w2e->v = lp.wq_w2w->v;
        lp.wq_e2w = add_tensor(p, pre + "attn.wq_e2w", L, PJ, true);
        lp.wq_e2w->v = lp.wq_w2w->v;
        lp.wq_e2e = add_tensor(p, pre + "attn.wq_e2e", L, PJ, true);
        lp.wq_e2e->v = lp.wq_w2w->v;
        lp.wk = add_tensor(p, pre + "attn.wk", L, PJ, true);
        fill_normal(lp.wk);
        lp.wv = add_tensor(p, pre + "attn.wv", L, PJ, true);
        fill_normal(lp.wv);
        lp.wo = add_tensor(p, pre + "attn.wo", PJ, L, true);
        fill_normal(lp.wo);
        lp.rel = add_tensor(p, pre + "attn.rel", V, config.head_size, true);
        fill_normal(lp.rel);
        lp.ln2_gain = add_tensor(p, pre + "ln2.gain", 1, L, false);
        fill_ones(lp.ln2_gain);
        lp.ln2_bias = add_tensor(p, pre + "ln2.bias", 1, L, false);
        lp.ffn_w1 = add_tensor(p, pre + "ffn.w1", L, F, true);
        fill_normal(lp.ffn_w1);
        lp.ffn_b1 = add_tensor(p, pre + "ffn.b1", 1, F, false);
        lp.ffn_w2 = add_tensor(p, pre + "ffn.w2", F, L, true);
        fill_normal(lp.ffn_w2);
        lp.ffn_b2 = add_tensor(p, pre + "ffn.b2", 1, L, false);
        p.layers.push_back(lp);
    }

    p.reader_w = add_tensor(p, "reader.w", 1, 2 * L, true);
    fill_normal(p.reader_w);
    p.reader_b = add_tensor(p, "reader.b", 1, 1, false);
    return p;
}

void ModelParams::zero_grad() {
    for (auto& t : tensors) t->g.zero();
}

Tensor* ModelParams::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t->name == name) return t.get();
    return nullptr;
}

Mat embed(const TokenSequence& seq, const ModelParams& params) {
    const int W = seq.word_count();
    const int E = seq.entity_count();
    const int L = params.config.hidden_size;
    Mat out(W + E, L);

    const Mat& we = params.word_emb->v;
    const double* type_word = params.type_emb->v.row(0);
    const double* type_entity = params.type_emb->v.row(1);

    for (int i = 0; i < W; ++i) {
        const int id = seq.words[i].vocab_id;
        if (id < 0 || id >= we.rows)
            throw DataError("embed: vocab id out of range: " + std::to_string(id));
        double* o = out.row(i);
        const double* e = we.row(id);
        for (int j = 0; j < L; ++j) o[j] = e[j] + type_word[j];
    }
    // every entity token carries the shared [MASK] projection
    Mat base = matmul(params.mask_entity_emb->v, params.entity_proj->v);  // 1 x L
    for (int i = 0; i < E; ++i) {
        double* o = out.row(W + i);
        for (int j = 0; j < L; ++j) o[j] = base(0, j) + type_entity[j];
    }
    return out;
}

void embed_backward(const TokenSequence& seq, const Mat& dout, ModelParams& params) {
    const int W = seq.word_count();
    const int E = seq.entity_count();
    const int L = params.config.hidden_size;

    for (int i = 0; i < W; ++i) {
        const int id = seq.words[i].vocab_id;
        axpy(1.0, dout.row(i), params.word_emb->g.row(id), L);
        axpy(1.0, dout.row(i), params.type_emb->g.row(0), L);
    }
    Mat dsum(1, L);
    for (int i = 0; i < E; ++i) {
        axpy(1.0, dout.row(W + i), dsum.row(0), L);
        axpy(1.0, dout.row(W + i), params.type_emb->g.row(1), L);
    }
    matmul_tn_acc(params.mask_entity_emb->v, dsum, params.entity_proj->g);
    matmul_nt_acc(dsum, params.entity_proj->v, params.mask_entity_emb->g);
}

namespace {

Mat layer_norm(const Mat& x, const Tensor& gain, const Tensor& bias, std::vector<double>& mu,
               std::vector<double>& rstd) {
    const int R = x.rows, C = x.cols;
    Mat out(R, C);
    mu.resize(R);
    rstd.resize(R);
    for (int i = 0; i < R; ++i) {
        const double* xi = x.row(i);
        double m = 0.0;
        for (int j = 0; j < C; ++j) m += xi[j];
        m /= C;
        double var = 0.0;
        for (int j = 0; j < C; ++j) {
            const double d = xi[j] - m;
            var += d * d;
        }
        var /= C;
        const double rs = 1.0 / std::sqrt(var + kLnEps);
        mu[i] = m;
        rstd[i] = rs;
        double* oi = out.row(i);
        const double* g = gain.v.row(0);
        const double* b = bias.v.row(0);
        for (int j = 0; j < C; ++j) oi[j] = g[j] * (xi[j] - m) * rs + b[j];
    }
    return out;
}

// Returns dx; accumulates gain/bias gradients.
Mat layer_norm_backward(const Mat& dy, const Mat& x, Tensor& gain, Tensor& bias,
                        const std::vector<double>& mu, const std::vector<double>& rstd) {
    const int R = x.rows, C = x.cols;
    Mat dx(R, C);
    const double* g = gain.v.row(0);
    double* dg = gain.g.row(0);
    double* db = bias.g.row(0);
    for (int i = 0; i < R; ++i) {
        const double* xi = x.row(i);
        const double* dyi = dy.row(i);
        const double rs = rstd[i];
        const double m = mu[i];
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (int j = 0; j < C; ++j) {
            const double xhat = (xi[j] - m) * rs;
            const double dxhat = dyi[j] * g[j];
            dg[j] += dyi[j] * xhat;
            db[j] += dyi[j];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat;
        }
        mean_dxhat /= C;
        mean_dxhat_xhat /= C;
        double* dxi = dx.row(i);
        for (int j = 0; j < C; ++j) {
            const double xhat = (xi[j] - m) * rs;
            const double dxhat = dyi[j] * g[j];
            dxi[j] = rs * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
        }
    }
    return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)) + x * phi;
}

void apply_dropout(Mat& m, std::vector<uint8_t>& mask, Dropout* drop, double& scale) {
    if (!drop || !drop->active()) {
        mask.clear();
        scale = 1.0;
        return;
    }
    std::bernoulli_distribution keep(1.0 - drop->rate);
    scale = 1.0 / (1.0 - drop->rate);
    mask.resize(m.size());
    for (size_t i = 0; i < m.a.size(); ++i) {
        mask[i] = keep(drop->rng) ? 1 : 0;
        m.a[i] = mask[i] ? m.a[i] * scale : 0.0;
    }
}

void dropout_backward(Mat& dm, const std::vector<uint8_t>& mask, double scale) {
    if (mask.empty()) return;
    for (size_t i = 0; i < dm.a.size(); ++i) dm.a[i] = mask[i] ? dm.a[i] * scale : 0.0;
}

}  // namespace

Mat layer_forward(const Mat& x, const LayerParams& layer, const LabelMatrix& labels,
                  const ModelConfig& config, int layer_index, LayerCache* cache, Dropout* drop) {
    LayerCache local;
    LayerCache& c = cache ? *cache : local;
    c.x_in = x;

    c.norm1 = layer_norm(x, *layer.ln1_gain, *layer.ln1_bias, c.mu1, c.rstd1);
    Mat attn = attention_forward(c.norm1, layer, labels, config.attention_mode(), config, &c.attn);
    apply_dropout(attn, c.drop_attn, drop, c.drop_scale);
    c.attn_out = std::move(attn);

    c.x_mid = x;
    for (size_t i = 0; i < c.x_mid.a.size(); ++i) c.x_mid.a[i] += c.attn_out.a[i];

    c.norm2 = layer_norm(c.x_mid, *layer.ln2_gain, *layer.ln2_bias, c.mu2, c.rstd2);
    c.ffn_pre = matmul(c.norm2, layer.ffn_w1->v);
    for (int i = 0; i < c.ffn_pre.rows; ++i)
        axpy(1.0, layer.ffn_b1->v.row(0), c.ffn_pre.row(i), c.ffn_pre.cols);
    Mat act(c.ffn_pre.rows, c.ffn_pre.cols);
    for (size_t i = 0; i < act.a.size(); ++i) act.a[i] = gelu(c.ffn_pre.a[i]);
    double ffn_scale = 1.0;
    apply_dropout(act, c.drop_ffn, drop, ffn_scale);
    c.ffn_act = std::move(act);

    Mat out = matmul(c.ffn_act, layer.ffn_w2->v);
    for (int i = 0; i < out.rows; ++i) axpy(1.0, layer.ffn_b2->v.row(0), out.row(i), out.cols);
    for (size_t i = 0; i < out.a.size(); ++i) out.a[i] += c.x_mid.a[i];

    if (!all_finite(out))
        throw NumericError("non-finite activations in layer " + std::to_string(layer_index));
    return out;
}

Mat layer_backward(const Mat& dout, const LayerParams& layer, const LabelMatrix& labels,
                   const ModelConfig& config, const LayerCache& cache) {
    // out = x_mid + b2 + ffn_act * W2
    Mat dmid = dout;

    matmul_tn_acc(cache.ffn_act, dout, layer.ffn_w2->g);
    for (int i = 0; i < dout.rows; ++i)
        axpy(1.0, dout.row(i), layer.ffn_b2->g.row(0), dout.cols);
    Mat dact(cache.ffn_act.rows, cache.ffn_act.cols);
    matmul_nt_acc(dout, layer.ffn_w2->v, dact);
    dropout_backward(dact, cache.drop_ffn, cache.drop_scale);
    for (size_t i = 0; i < dact.a.size(); ++i) dact.a[i] *= gelu_grad(cache.ffn_pre.a[i]);

    matmul_tn_acc(cache.norm2, dact, layer.ffn_w1->g);
    for (int i = 0; i < dact.rows; ++i)
        axpy(1.0, dact.row(i), layer.ffn_b1->g.row(0), dact.cols);
    Mat dnorm2(cache.norm2.rows, cache.norm2.cols);
    matmul_nt_acc(dact, layer.ffn_w1->v, dnorm2);

    Mat dmid2 = layer_norm_backward(dnorm2, cache.x_mid, *layer.ln2_gain, *layer.ln2_bias,
                                    cache.mu2, cache.rstd2);
    for (size_t i = 0; i < dmid.a.size(); ++i) dmid.a[i] += dmid2.a[i];

    Mat dattn = dmid;
    dropout_backward(dattn, cache.drop_attn, cache.drop_scale);
    Mat dnorm1 = attention_backward(dattn, cache.norm1, layer, labels, config.attention_mode(),
                                    config, cache.attn);
    Mat dx = layer_norm_backward(dnorm1, cache.x_in, *layer.ln1_gain, *layer.ln1_bias, cache.mu1,
                                 cache.rstd1);
    for (size_t i = 0; i < dx.a.size(); ++i) dx.a[i] += dmid.a[i];
    return dx;
}

Mat model_forward(const TokenSequence& seq, const LabelMatrix& labels, const ModelParams& params,
                  ForwardCache* cache, Dropout* drop) {
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    if (seq.total_len() != labels.P)
        throw DataError("model_forward: sequence/label matrix size mismatch");
    c.embedded = embed(seq, params);
    c.layers.resize(params.layers.size());
    Mat x = c.embedded;
    for (size_t l = 0; l < params.layers.size(); ++l)
        x = layer_forward(x, params.layers[l], labels, params.config, static_cast<int>(l),
                          &c.layers[l], drop);
    return x;
}

void model_backward(const Mat& dhidden, const TokenSequence& seq, const LabelMatrix& labels,
                    ModelParams& params, const ForwardCache& cache) {
    Mat d = dhidden;
    for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l)
        d = layer_backward(d, params.layers[l], labels, params.config, cache.layers[l]);
    embed_backward(seq, d, params);
}

// ---------------------------------------------------------------------------
// checkpoint io

namespace {

constexpr char kMagic[8] = {'G', 'E', 'S', 'A', 'C', 'K', 'P', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("checkpoint: truncated file");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const uint32_t n = read_pod<uint32_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw DataError("checkpoint: truncated string");
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_text,
                     const std::vector<std::string>& vocab_tokens, const ModelParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_string(out, config_text);
    write_pod<uint32_t>(out, static_cast<uint32_t>(vocab_tokens.size()));
    for (const auto& t : vocab_tokens) write_string(out, t);
    write_pod<uint32_t>(out, static_cast<uint32_t>(params.tensors.size()));
    for (const auto& t : params.tensors) {
        write_string(out, t->name);
        write_pod<int32_t>(out, t->v.rows);
        write_pod<int32_t>(out, t->v.cols);
        out.write(reinterpret_cast<const char*>(t->v.a.data()),
                  static_cast<std::streamsize>(t->v.a.size() * sizeof(double)));
    }
    if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a checkpoint file: " + path);
    Checkpoint ckpt;
    ckpt.config_text = read_string(in);
    const uint32_t n_vocab = read_pod<uint32_t>(in);
    ckpt.vocab_tokens.reserve(n_vocab);
    for (uint32_t i = 0; i < n_vocab; ++i) ckpt.vocab_tokens.push_back(read_string(in));
    const uint32_t n_tensors = read_pod<uint32_t>(in);
    for (uint32_t i = 0; i < n_tensors; ++i) {
        std::string name = read_string(in);
        const int32_t rows = read_pod<int32_t>(in);
        const int32_t cols = read_pod<int32_t>(in);
        Mat m(rows, cols);
        in.read(reinterpret_cast<char*>(m.a.data()),
                static_cast<std::streamsize>(m.a.size() * sizeof(double)));
        if (!in) throw DataError("checkpoint: truncated tensor " + name);
        ckpt.arrays.emplace_back(std::move(name), std::move(m));
    }
    return ckpt;
}

void apply_checkpoint(ModelParams& params, const Checkpoint& ckpt) {
    for (const auto& [name, m] : ckpt.arrays) {
        Tensor* t = params.find(name);
        if (!t) throw DataError("checkpoint: unknown tensor " + name);
        if (!t->v.same_shape(m))
            throw DataError("checkpoint: shape mismatch for " + name);
        t->v = m;
    }
}

}  // namespace gesa
