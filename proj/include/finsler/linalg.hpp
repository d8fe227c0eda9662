#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec operator-(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec operator*(double s, Vec a) {
    for (double& v : a) v *= s;
    return a;
}

inline Vec operator-(Vec a) {
    for (double& v : a) v = -v;
    return a;
}

inline Vec& operator+=(Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec& operator*=(Vec& a, double s) {
    for (double& v : a) v *= s;
    return a;
}

inline double max_abs(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// Dense row-major matrix, sized at runtime. The library only ever deals in
/// chart dimensions 2..8, so no effort is spent on blocking or views.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Mat& operator+=(const Mat& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Mat& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(double s, Mat a) { return a *= s; }

    Vec apply(const Vec& v) const {
        Vec r(rows_, 0.0);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    double quad(const Vec& u, const Vec& v) const {
        double s = 0.0;
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) s += u[i] * (*this)(i, j) * v[j];
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    double trace() const {
        double s = 0.0;
        for (int i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

/// Rank-3 array indexed T(i,j,k), all extents equal.
class Ten3 {
public:
    Ten3() = default;
    explicit Ten3(int n) : n_(n), a_(static_cast<std::size_t>(n) * n * n, 0.0) {}

    int dim() const { return n_; }

    double& operator()(int i, int j, int k) {
        return a_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k];
    }
    double operator()(int i, int j, int k) const {
        return a_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k];
    }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Ten3& operator+=(const Ten3& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Ten3& operator-=(const Ten3& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Ten3& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }
    friend Ten3 operator+(Ten3 a, const Ten3& b) { return a += b; }
    friend Ten3 operator-(Ten3 a, const Ten3& b) { return a -= b; }
    friend Ten3 operator*(double s, Ten3 a) { return a *= s; }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    int n_ = 0;
    std::vector<double> a_;
};

/// Rank-4 array indexed T(i,j,k,l), all extents equal.
class Ten4 {
public:
    Ten4() = default;
    explicit Ten4(int n) : n_(n), a_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

    int dim() const { return n_; }

    double& operator()(int i, int j, int k, int l) {
        return a_[((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l];
    }
    double operator()(int i, int j, int k, int l) const {
        return a_[((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l];
    }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Ten4& operator+=(const Ten4& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Ten4& operator-=(const Ten4& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Ten4& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }
    friend Ten4 operator+(Ten4 a, const Ten4& b) { return a += b; }
    friend Ten4 operator-(Ten4 a, const Ten4& b) { return a -= b; }
    friend Ten4 operator*(double s, Ten4 a) { return a *= s; }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    int n_ = 0;
    std::vector<double> a_;
};

/// Cholesky factorization of a symmetric positive-definite matrix.
/// Fails (returns false) when a pivot drops below rel_pivot_tol * trace.
class Cholesky {
public:
    bool factor(const Mat& g, double rel_pivot_tol = 1e-12) {
        n_ = g.rows();
        l_ = g;
        const double floor_pivot = rel_pivot_tol * std::max(g.trace(), 1e-300);
        for (int j = 0; j < n_; ++j) {
            double d = l_(j, j);
            for (int k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
            if (!(d > floor_pivot)) return false;
            const double lj = std::sqrt(d);
            l_(j, j) = lj;
            for (int i = j + 1; i < n_; ++i) {
                double s = l_(i, j);
                for (int k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
                l_(i, j) = s / lj;
            }
        }
        return true;
    }

    Vec solve(const Vec& b) const {
        Vec y(n_);
        for (int i = 0; i < n_; ++i) {
            double s = b[i];
            for (int k = 0; k < i; ++k) s -= l_(i, k) * y[k];
            y[i] = s / l_(i, i);
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = y[i];
            for (int k = i + 1; k < n_; ++k) s -= l_(k, i) * y[k];
            y[i] = s / l_(i, i);
        }
        return y;
    }

    Mat inverse() const {
        Mat inv(n_, n_);
        Vec e(n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            e[j] = 1.0;
            Vec col = solve(e);
            e[j] = 0.0;
            for (int i = 0; i < n_; ++i) inv(i, j) = col[i];
        }
        // symmetrize away the last bits of roundoff
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                const double m = 0.5 * (inv(i, j) + inv(j, i));
                inv(i, j) = inv(j, i) = m;
            }
        return inv;
    }

    double det() const {
        double d = 1.0;
        for (int i = 0; i < n_; ++i) d *= l_(i, i) * l_(i, i);
        return d;
    }

private:
    int n_ = 0;
    Mat l_;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline Vec sym_eigenvalues(Mat a) {
    const int n = a.rows();
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30 * std::max(1.0, a.trace() * a.trace())) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vec ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double min_eigenvalue(const Mat& a) { return sym_eigenvalues(a).front(); }

/// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Deterministic; accurate to machine precision.
inline void gauss_legendre(int n, Vec& nodes, Vec& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

} // namespace finsler
