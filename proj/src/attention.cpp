#include <cmath>

#include "gesa/model.hpp"
#include "gesa/sequence.hpp"

namespace gesa {

namespace {

// The four attention blocks, partitioned by (row token type, column token
// type). Each block selects its own query projection; the relative term is
// per-block switchable.
struct Block {
    int r0, r1, c0, c1;
    const Mat* q_full;   // rows r1-r0, cols n_heads*H
    Mat* dq_full;        // may be null in forward
    bool use_rel;
};

Mat slice_cols(const Mat& m, int c0, int width) {
    Mat out(m.rows, width);
    for (int i = 0; i < m.rows; ++i) {
        const double* src = m.row(i) + c0;
        double* dst = out.row(i);
        for (int j = 0; j < width; ++j) dst[j] = src[j];
    }
    return out;
}

void add_cols(Mat& m, int c0, const Mat& part) {
    for (int i = 0; i < m.rows; ++i) {
        double* dst = m.row(i) + c0;
        const double* src = part.row(i);
        for (int j = 0; j < part.cols; ++j) dst[j] += src[j];
    }
}

Mat rows_of(const Mat& m, int r0, int r1) {
    Mat out(r1 - r0, m.cols);
    for (int i = r0; i < r1; ++i)
        for (int j = 0; j < m.cols; ++j) out(i - r0, j) = m(i, j);
    return out;
}

std::vector<Block> make_blocks(int W, int P, const AttentionCache& c, AttentionCache* dc,
                               const AttentionMode& mode) {
    std::vector<Block> blocks;
    blocks.push_back({0, W, 0, W, &c.qww, dc ? &dc->qww : nullptr, mode.rel_w2w});
    blocks.push_back({0, W, W, P, &c.qwe, dc ? &dc->qwe : nullptr, mode.rel_w2e});
    blocks.push_back({W, P, 0, W, &c.qew, dc ? &dc->qew : nullptr, mode.rel_e2w});
    blocks.push_back({W, P, W, P, &c.qee, dc ? &dc->qee : nullptr, mode.rel_e2e});
    return blocks;
}

void project_queries(const Mat& x, const LayerParams& layer, int W, AttentionCache& c) {
    const int P = x.rows;
    Mat xw = rows_of(x, 0, W);
    Mat xe = rows_of(x, W, P);
    c.qww = matmul(xw, layer.wq_w2w->v);
    c.qwe = matmul(xw, layer.wq_w2e->v);
    c.qew = matmul(xe, layer.wq_e2w->v);
    c.qee = matmul(xe, layer.wq_e2e->v);
    c.k = matmul(x, layer.wk->v);
    c.v = matmul(x, layer.wv->v);
}

// Pre-softmax scores of one head over all four blocks, masked cells -inf.
Mat head_scores(const AttentionCache& c, const LayerParams& layer, const LabelMatrix& labels,
                const AttentionMode& mode, int head, int H) {
    const int P = labels.P;
    const int W = labels.W;
    const int c0 = head * H;
    const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(H));
    const Mat& rel = layer.rel->v;  // V x H

    Mat kh = slice_cols(c.k, c0, H);
    Mat s(P, P);
    auto blocks = make_blocks(W, P, c, nullptr, mode);
    for (const auto& blk : blocks) {
        if (blk.r0 == blk.r1 || blk.c0 == blk.c1) continue;
        Mat qh = slice_cols(*blk.q_full, c0, H);
        // content term
        for (int i = blk.r0; i < blk.r1; ++i) {
            const double* qi = qh.row(i - blk.r0);
            double* si = s.row(i);
            for (int j = blk.c0; j < blk.c1; ++j) si[j] = dot(qi, kh.row(j), H);
        }
        // relative-position term, gathered from q . rel^T
        if (blk.use_rel) {
            Mat bias(qh.rows, rel.rows);
            matmul_nt_acc(qh, rel, bias);
            for (int i = blk.r0; i < blk.r1; ++i) {
                const double* bi = bias.row(i - blk.r0);
                double* si = s.row(i);
                for (int j = blk.c0; j < blk.c1; ++j) {
                    const int32_t l = labels.label(i, j);
                    if (l >= 0) si[j] += bi[l];
                }
            }
        }
    }
    for (int i = 0; i < P; ++i) {
        double* si = s.row(i);
        for (int j = 0; j < P; ++j) {
            if (labels.attend(i, j))
                si[j] *= inv_sqrt_h;
            else
                si[j] = -std::numeric_limits<double>::infinity();
        }
    }
    return s;
}

}  // namespace

Mat attention_scores(const Mat& x, const LayerParams& layer, const LabelMatrix& labels, int head,
                     const AttentionMode& mode, const ModelConfig& config) {
    if (config.head_size <= 0) throw DataError("head_size must be positive");
    if (x.rows != labels.P) throw DataError("attention: x rows do not match label matrix");
    AttentionCache c;
    project_queries(x, layer, labels.W, c);
    return head_scores(c, layer, labels, mode, head, config.head_size);
}

Mat attention_forward(const Mat& x, const LayerParams& layer, const LabelMatrix& labels,
                      const AttentionMode& mode, const ModelConfig& config,
                      AttentionCache* cache) {
    const int P = labels.P;
    const int H = config.head_size;
    const int nh = config.n_heads;
    if (x.rows != P) throw DataError("attention: x rows do not match label matrix");

    AttentionCache local;
    AttentionCache& c = cache ? *cache : local;
    project_queries(x, layer, labels.W, c);
    c.concat = Mat(P, nh * H);
    c.attn.assign(nh, Mat());

    for (int h = 0; h < nh; ++h) {
        Mat s = head_scores(c, layer, labels, mode, h, H);
        for (int i = 0; i < P; ++i) {
            if (!softmax_row(std::span<double>(s.row(i), P)))
                throw NumericError("attention: fully masked row " + std::to_string(i));
        }
        Mat vh = slice_cols(c.v, h * H, H);
        Mat head_out(P, H);
        matmul_acc(s, vh, head_out);
        add_cols(c.concat, h * H, head_out);
        c.attn[h] = std::move(s);
    }
    return matmul(c.concat, layer.wo->v);
}

Mat attention_backward(const Mat& dout, const Mat& x, const LayerParams& layer,
                       const LabelMatrix& labels, const AttentionMode& mode,
                       const ModelConfig& config, const AttentionCache& cache) {
    const int P = labels.P;
    const int W = labels.W;
    const int H = config.head_size;
    const int nh = config.n_heads;
    const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(H));
    const Mat& rel = layer.rel->v;

    matmul_tn_acc(cache.concat, dout, layer.wo->g);
    Mat dconcat(P, nh * H);
    matmul_nt_acc(dout, layer.wo->v, dconcat);

    AttentionCache dc;
    dc.qww = Mat(cache.qww.rows, cache.qww.cols);
    dc.qwe = Mat(cache.qwe.rows, cache.qwe.cols);
    dc.qew = Mat(cache.qew.rows, cache.qew.cols);
    dc.qee = Mat(cache.qee.rows, cache.qee.cols);
    Mat dk(P, nh * H), dv(P, nh * H);

    auto blocks = make_blocks(W, P, cache, &dc, mode);

    for (int h = 0; h < nh; ++h) {
        const Mat& a = cache.attn[h];
        Mat vh = slice_cols(cache.v, h * H, H);
        Mat kh = slice_cols(cache.k, h * H, H);
        Mat dhead = slice_cols(dconcat, h * H, H);

        Mat da(P, P);
        matmul_nt_acc(dhead, vh, da);
        Mat dvh(P, H);
        matmul_tn_acc(a, dhead, dvh);
        add_cols(dv, h * H, dvh);

        // softmax backward, then undo the 1/sqrt(H) scale
        Mat ds(P, P);
        for (int i = 0; i < P; ++i) {
            const double* ai = a.row(i);
            const double* dai = da.row(i);
            double srow = 0.0;
            for (int j = 0; j < P; ++j) srow += ai[j] * dai[j];
            double* dsi = ds.row(i);
            for (int j = 0; j < P; ++j) dsi[j] = ai[j] * (dai[j] - srow) * inv_sqrt_h;
        }

        Mat dkh(P, H);
        for (const auto& blk : blocks) {
            if (blk.r0 == blk.r1 || blk.c0 == blk.c1) continue;
            const int rows = blk.r1 - blk.r0;
            Mat qh = slice_cols(*blk.q_full, h * H, H);
            Mat dqh(rows, H);
            // content term: dq += ds * k, dk += ds^T * q
            for (int i = blk.r0; i < blk.r1; ++i) {
                const double* dsi = ds.row(i);
                double* dqi = dqh.row(i - blk.r0);
                const double* qi = qh.row(i - blk.r0);
                for (int j = blk.c0; j < blk.c1; ++j) {
                    const double d = dsi[j];
                    if (d == 0.0) continue;
                    axpy(d, kh.row(j), dqi, H);
                    axpy(d, qi, dkh.row(j), H);
                }
            }
            // relative term: accumulate per-label sums, then push through rel
            if (blk.use_rel) {
                Mat dbias(rows, rel.rows);
                for (int i = blk.r0; i < blk.r1; ++i) {
                    const double* dsi = ds.row(i);
                    double* dbi = dbias.row(i - blk.r0);
                    for (int j = blk.c0; j < blk.c1; ++j) {
                        const int32_t l = labels.label(i, j);
                        if (l >= 0) dbi[l] += dsi[j];
                    }
                }
                matmul_acc(dbias, rel, dqh);
                // rel is shared across heads; every head accumulates into it
                Mat drel(rel.rows, H);
                matmul_tn_acc(dbias, qh, drel);
                for (int r = 0; r < rel.rows; ++r)
                    axpy(1.0, drel.row(r), layer.rel->g.row(r), H);
            }
            add_cols(*blk.dq_full, h * H, dqh);
        }
        add_cols(dk, h * H, dkh);
    }

    Mat dx(P, x.cols);
    Mat xw = rows_of(x, 0, W);
    Mat xe = rows_of(x, W, P);

    matmul_tn_acc(x, dk, layer.wk->g);
    matmul_nt_acc(dk, layer.wk->v, dx);
    matmul_tn_acc(x, dv, layer.wv->g);
    matmul_nt_acc(dv, layer.wv->v, dx);

    matmul_tn_acc(xw, dc.qww, layer.wq_w2w->g);
    matmul_tn_acc(xw, dc.qwe, layer.wq_w2e->g);
    matmul_tn_acc(xe, dc.qew, layer.wq_e2w->g);
    matmul_tn_acc(xe, dc.qee, layer.wq_e2e->g);

    Mat dxw(W, x.cols), dxe(P - W, x.cols);
    matmul_nt_acc(dc.qww, layer.wq_w2w->v, dxw);
    matmul_nt_acc(dc.qwe, layer.wq_w2e->v, dxw);
    matmul_nt_acc(dc.qew, layer.wq_e2w->v, dxe);
    matmul_nt_acc(dc.qee, layer.wq_e2e->v, dxe);
    for (int i = 0; i < W; ++i) axpy(1.0, dxw.row(i), dx.row(i), x.cols);
    for (int i = W; i < P; ++i) axpy(1.0, dxe.row(i - W), dx.row(i), x.cols);
    return dx;
}

}  // namespace gesa
