#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace gesa {

// Dense row-major matrix of doubles. Row vectors are 1xN.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }

    size_t size() const { return a.size(); }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

inline double dot(const double* x, const double* y, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

// y += alpha * x
inline void axpy(double alpha, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// c += a * b
inline void matmul_acc(const Mat& a, const Mat& b, Mat& c) {
    assert(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols);
    for (int i = 0; i < a.rows; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int k = 0; k < a.cols; ++k) {
            axpy(ai[k], b.row(k), ci, b.cols);
        }
    }
}

// c += a^T * b
inline void matmul_tn_acc(const Mat& a, const Mat& b, Mat& c) {
    assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* ak = a.row(k);
        const double* bk = b.row(k);
        for (int i = 0; i < a.cols; ++i) {
            axpy(ak[i], bk, c.row(i), b.cols);
        }
    }
}

// c += a * b^T
inline void matmul_nt_acc(const Mat& a, const Mat& b, Mat& c) {
    assert(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows);
    for (int i = 0; i < a.rows; ++i) {
        double* ci = c.row(i);
        for (int j = 0; j < b.rows; ++j) {
            ci[j] += dot(a.row(i), b.row(j), a.cols);
        }
    }
}

inline Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows, b.cols);
    matmul_acc(a, b, c);
    return c;
}

// In-place softmax over a row that may contain -inf entries (masked).
// Masked entries become exactly 0. Returns false if every entry is masked.
inline bool softmax_row(std::span<double> s) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : s) mx = std::max(mx, v);
    if (mx == -std::numeric_limits<double>::infinity()) return false;
    double denom = 0.0;
    for (double& v : s) {
        if (v == -std::numeric_limits<double>::infinity()) {
            v = 0.0;
        } else {
            v = std::exp(v - mx);
            denom += v;
        }
    }
    for (double& v : s) v /= denom;
    return true;
}

inline bool all_finite(const Mat& m) {
    for (double v : m.a)
        if (!std::isfinite(v)) return false;
    return true;
}

inline double max_abs_diff(const Mat& x, const Mat& y) {
    assert(x.same_shape(y));
    double m = 0.0;
    for (size_t i = 0; i < x.a.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
    return m;
}

}  // namespace gesa
