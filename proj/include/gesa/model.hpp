#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gesa/labels.hpp"
#include "gesa/mat.hpp"

namespace gesa {

struct ModelConfig {
    int p_max = 128;
    int max_q_len = 24;
    int hidden_size = 64;      // L
    int head_size = 16;        // H
    int n_heads = 4;
    int n_layers = 2;
    int window_radius = 4;     // k
    int entity_embed_dim = 32;
    W2wMode w2w_mode = W2wMode::ClippedDense;
    Ablation ablation = Ablation::None;
    double dropout = 0.0;

    int proj_dim() const { return n_heads * head_size; }
    LabelVocabulary label_vocab() const { return LabelVocabulary::build(window_radius, ablation); }
    AttentionMode attention_mode() const { return AttentionMode::from_ablation(ablation); }
    void validate() const;

    static ModelConfig desk_scale() { return {}; }
    static ModelConfig full_scale();
};

struct Tensor {
    std::string name;
    Mat v;
    Mat g;
    bool decay = true;

    Tensor(std::string n, int r, int c, bool d) : name(std::move(n)), v(r, c), g(r, c), decay(d) {}
};

struct LayerParams {
    Tensor* ln1_gain = nullptr;
    Tensor* ln1_bias = nullptr;
    Tensor* wq_w2w = nullptr;
    Tensor* wq_w2e = nullptr;
    Tensor* wq_e2w = nullptr;
    Tensor* wq_e2e = nullptr;
    Tensor* wk = nullptr;
    Tensor* wv = nullptr;
    Tensor* wo = nullptr;
    Tensor* rel = nullptr;  // V x H label-embedding table, shared across heads
    Tensor* ln2_gain = nullptr;
    Tensor* ln2_bias = nullptr;
    Tensor* ffn_w1 = nullptr;
    Tensor* ffn_b1 = nullptr;
    Tensor* ffn_w2 = nullptr;
    Tensor* ffn_b2 = nullptr;
};

struct ModelParams {
    ModelConfig config;
    int vocab_size = 0;
    std::vector<std::unique_ptr<Tensor>> tensors;

    Tensor* word_emb = nullptr;
    Tensor* mask_entity_emb = nullptr;
    Tensor* entity_proj = nullptr;
    Tensor* type_emb = nullptr;  // row 0 = word, row 1 = entity
    std::vector<LayerParams> layers;
    Tensor* reader_w = nullptr;  // 1 x 2L
    Tensor* reader_b = nullptr;  // 1 x 1

    // normal(0, 0.02) projections/embeddings, zero biases, unit norm gains;
    // the four query matrices start as copies of a single draw.
    static ModelParams init(const ModelConfig& config, int vocab_size, uint64_t seed);

    void zero_grad();
    Tensor* find(const std::string& name) const;
};

struct Dropout {
    double rate = 0.0;
    std::mt19937_64 rng;

    bool active() const { return rate > 0.0; }
};

struct AttentionCache {
    Mat qww, qwe, qew, qee;  // per-type queries, full projection width
    Mat k, v;                // P x (n_heads * H)
    Mat concat;              // P x (n_heads * H) head outputs
    std::vector<Mat> attn;   // per head P x P weights
};

struct LayerCache {
    Mat x_in;
    Mat norm1;
    std::vector<double> mu1, rstd1;
    AttentionCache attn;
    Mat attn_out;  // after output projection and dropout
    Mat x_mid;
    Mat norm2;
    std::vector<double> mu2, rstd2;
    Mat ffn_pre;  // norm2 * W1 + b1
    Mat ffn_act;  // dropout(gelu(ffn_pre)), the input seen by W2
    std::vector<uint8_t> drop_attn, drop_ffn;
    double drop_scale = 1.0;
};

struct ForwardCache {
    Mat embedded;
    std::vector<LayerCache> layers;
};

// Embedding layer: token embedding + type embedding, no position term.
Mat embed(const TokenSequence& seq, const ModelParams& params);
void embed_backward(const TokenSequence& seq, const Mat& dout, ModelParams& params);

// Pre-softmax scores of one head (masked cells are -inf), already divided
// by sqrt(H). Exposed for tests.
Mat attention_scores(const Mat& x, const LayerParams& layer, const LabelMatrix& labels, int head,
                     const AttentionMode& mode, const ModelConfig& config);

Mat attention_forward(const Mat& x, const LayerParams& layer, const LabelMatrix& labels,
                      const AttentionMode& mode, const ModelConfig& config, AttentionCache* cache);
// Returns dx; accumulates parameter gradients.
Mat attention_backward(const Mat& dout, const Mat& x, const LayerParams& layer,
                       const LabelMatrix& labels, const AttentionMode& mode,
                       const ModelConfig& config, const AttentionCache& cache);

Mat layer_forward(const Mat& x, const LayerParams& layer, const LabelMatrix& labels,
                  const ModelConfig& config, int layer_index, LayerCache* cache, Dropout* drop);
Mat layer_backward(const Mat& dout, const LayerParams& layer, const LabelMatrix& labels,
                   const ModelConfig& config, const LayerCache& cache);

Mat model_forward(const TokenSequence& seq, const LabelMatrix& labels,
                  const ModelParams& params, ForwardCache* cache = nullptr,
                  Dropout* drop = nullptr);
void model_backward(const Mat& dhidden, const TokenSequence& seq, const LabelMatrix& labels,
                    ModelParams& params, const ForwardCache& cache);

// Versioned binary checkpoint: config text, vocabulary, named arrays.
// Round-trips exactly.
struct Checkpoint {
    std::string config_text;
    std::vector<std::string> vocab_tokens;
    std::vector<std::pair<std::string, Mat>> arrays;
};

void save_checkpoint(const std::string& path, const std::string& config_text,
                     const std::vector<std::string>& vocab_tokens, const ModelParams& params);
Checkpoint load_checkpoint(const std::string& path);
// Copies arrays into an initialized ModelParams by name; shapes must match.
void apply_checkpoint(ModelParams& params, const Checkpoint& ckpt);

}  // namespace gesa
