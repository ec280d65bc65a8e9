#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace sgsde {

using Vec = std::vector<double>;

// Dense row-major matrix. Dimensions here are tiny (d <= 3 for the built-in
// problems), so no effort is spent on blocking or expression templates.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    static Mat zero(int n) { return Mat(n, n); }
};

inline Vec matvec(const Mat& m, const Vec& v) {
    assert(m.cols == static_cast<int>(v.size()));
    Vec out(static_cast<std::size_t>(m.rows), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline Vec operator+(Vec a, const Vec& b) {
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec operator-(Vec a, const Vec& b) {
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec operator*(double c, Vec a) {
    for (double& v : a) v *= c;
    return a;
}

inline Vec& operator+=(Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Mat operator+(Mat a, const Mat& b) {
    assert(a.rows == b.rows && a.cols == b.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
    return a;
}

inline Mat operator*(double c, Mat a) {
    for (double& v : a.data) v *= c;
    return a;
}

// Gaussian elimination with partial pivoting; returns false on a singular
// pivot. Sizes here are tiny, so no factorization caching.
inline bool solve_linear(Mat a, Vec b, Vec& out) {
    const int n = a.rows;
    assert(a.cols == n && static_cast<int>(b.size()) == n);
    for (int c = 0; c < n; ++c) {
        int pivot = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
        if (a(pivot, c) == 0.0) return false;
        if (pivot != c) {
            for (int k = 0; k < n; ++k) std::swap(a(c, k), a(pivot, k));
            std::swap(b[c], b[pivot]);
        }
        for (int r = c + 1; r < n; ++r) {
            const double factor = a(r, c) / a(c, c);
            for (int k = c; k < n; ++k) a(r, k) -= factor * a(c, k);
            b[r] -= factor * b[c];
        }
    }
    out.assign(b.begin(), b.end());
    for (int r = n - 1; r >= 0; --r) {
        double s = out[r];
        for (int k = r + 1; k < n; ++k) s -= a(r, k) * out[k];
        out[r] = s / a(r, r);
    }
    return true;
}

inline double max_skew_defect(const Mat& m) {
    double worst = 0.0;
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) worst = std::max(worst, std::abs(m(i, j) + m(j, i)));
    return worst;
}

// Deterministic pairwise reduction: the summation tree depends only on the
// element count, never on thread scheduling, so repeated runs agree bitwise.
inline double pairwise_sum(const double* a, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& a) { return pairwise_sum(a.data(), a.size()); }

}  // namespace sgsde
