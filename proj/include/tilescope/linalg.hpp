#pragma once

// Exact dense linear algebra over arbitrary-precision integers and rationals.

#include <tilescope/core.hpp>

#include <cstddef>
#include <utility>
#include <vector>

namespace tilescope {

struct IntMat {
    int rows = 0, cols = 0;
    std::vector<Int> a;

    IntMat() = default;
    IntMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0) {}

    Int& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    const Int& at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    static IntMat identity(int n) {
        IntMat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    bool operator==(const IntMat& o) const {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
};

inline IntMat operator*(const IntMat& x, const IntMat& y) {
    if (x.cols != y.rows) throw error("matrix shape mismatch in multiply");
    IntMat z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const Int& v = x.at(i, k);
            if (v == 0) continue;
            for (int j = 0; j < y.cols; ++j) z.at(i, j) += v * y.at(k, j);
        }
    return z;
}

inline IntMat mat_pow(IntMat base, unsigned long e) {
    if (base.rows != base.cols) throw error("matrix power needs a square matrix");
    IntMat acc = IntMat::identity(base.rows);
    while (e) {
        if (e & 1) acc = acc * base;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

inline IntMat transpose(const IntMat& m) {
    IntMat t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
    return t;
}

// Fraction-free Gaussian elimination; exact rank of an integer matrix.
inline int rank_bareiss(IntMat m) {
    int r = 0;
    Int prev = 1;
    for (int c = 0; c < m.cols && r < m.rows; ++c) {
        int piv = -1;
        for (int i = r; i < m.rows; ++i)
            if (m.at(i, c) != 0) { piv = i; break; }
        if (piv < 0) continue;
        if (piv != r)
            for (int j = 0; j < m.cols; ++j) std::swap(m.at(piv, j), m.at(r, j));
        for (int i = r + 1; i < m.rows; ++i) {
            for (int j = c + 1; j < m.cols; ++j) {
                Int num = m.at(r, c) * m.at(i, j) - m.at(i, c) * m.at(r, j);
                m.at(i, j) = num / prev;  // exact by the Bareiss identity
            }
            m.at(i, c) = 0;
        }
        prev = m.at(r, c);
        ++r;
    }
    return r;
}

using RatMat = std::vector<std::vector<Rat>>;

inline RatMat rat_mat(const IntMat& m) {
    RatMat q(m.rows, std::vector<Rat>(m.cols));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) q[i][j] = Rat(m.at(i, j));
    return q;
}

// Plain rational elimination; kept separate from rank_bareiss so the two can
// cross-check each other.
inline int rank_gauss(RatMat m) {
    if (m.empty()) return 0;
    int rows = static_cast<int>(m.size());
    int cols = static_cast<int>(m[0].size());
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (m[i][c] != 0) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(m[piv], m[r]);
        Rat inv = Rat(1) / m[r][c];
        for (int j = c; j < cols; ++j) m[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            Rat f = m[i][c];
            for (int j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        ++r;
    }
    return r;
}

// Characteristic polynomial of a square integer matrix by the
// Faddeev-LeVerrier recurrence; all divisions are exact.
// Coefficients ascending: p[0] + p[1] x + ... + p[n] x^n, monic.
inline std::vector<Int> char_poly(const IntMat& m) {
    if (m.rows != m.cols) throw error("characteristic polynomial needs a square matrix");
    int n = m.rows;
    std::vector<Int> p(static_cast<std::size_t>(n) + 1);
    p[n] = 1;
    IntMat work = IntMat::identity(n);
    for (int k = 1; k <= n; ++k) {
        work = m * work;
        Int tr = 0;
        for (int i = 0; i < n; ++i) tr += work.at(i, i);
        Int ck = -tr / k;
        p[n - k] = ck;
        for (int i = 0; i < n; ++i) work.at(i, i) += ck;
    }
    return p;
}

inline std::vector<Rat> char_poly_rat(const RatMat& m) {
    int n = static_cast<int>(m.size());
    for (const auto& row : m)
        if (static_cast<int>(row.size()) != n)
            throw error("characteristic polynomial needs a square matrix");
    std::vector<Rat> p(static_cast<std::size_t>(n) + 1);
    p[n] = 1;
    RatMat work(n, std::vector<Rat>(n));
    for (int i = 0; i < n; ++i) work[i][i] = 1;
    for (int k = 1; k <= n; ++k) {
        RatMat next(n, std::vector<Rat>(n));
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) {
                if (m[i][l] == 0) continue;
                for (int j = 0; j < n; ++j) next[i][j] += m[i][l] * work[l][j];
            }
        work = std::move(next);
        Rat tr = 0;
        for (int i = 0; i < n; ++i) tr += work[i][i];
        Rat ck = -tr / k;
        p[n - k] = ck;
        for (int i = 0; i < n; ++i) work[i][i] += ck;
    }
    return p;
}

// Basis of {x : m x = 0} over the rationals.
inline RatMat nullspace(RatMat m) {
    if (m.empty()) return {};
    int rows = static_cast<int>(m.size());
    int cols = static_cast<int>(m[0].size());
    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (m[i][c] != 0) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(m[piv], m[r]);
        Rat inv = Rat(1) / m[r][c];
        for (int j = c; j < cols; ++j) m[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            Rat f = m[i][c];
            for (int j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    RatMat basis;
    for (int free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<Rat> v(cols);
        v[free] = 1;
        for (int i = 0; i < static_cast<int>(pivot_col.size()); ++i)
            v[pivot_col[i]] = -m[i][free];
        basis.push_back(std::move(v));
    }
    return basis;
}

// Solves B X = Y column by column for matrices with full column rank;
// throws if the system is inconsistent.
inline RatMat solve_columns(const RatMat& b, const RatMat& y) {
    int rows = static_cast<int>(b.size());
    if (rows == 0) return {};
    int bc = static_cast<int>(b[0].size());
    int yc = static_cast<int>(y[0].size());
    if (static_cast<int>(y.size()) != rows) throw error("solve_columns shape mismatch");
    RatMat aug(rows, std::vector<Rat>(bc + yc));
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < bc; ++j) aug[i][j] = b[i][j];
        for (int j = 0; j < yc; ++j) aug[i][bc + j] = y[i][j];
    }
    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < bc && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (aug[i][c] != 0) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(aug[piv], aug[r]);
        Rat inv = Rat(1) / aug[r][c];
        for (int j = c; j < bc + yc; ++j) aug[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || aug[i][c] == 0) continue;
            Rat f = aug[i][c];
            for (int j = c; j < bc + yc; ++j) aug[i][j] -= f * aug[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }
    if (static_cast<int>(pivot_col.size()) != bc)
        throw error("solve_columns: matrix does not have full column rank");
    for (int i = r; i < rows; ++i)
        for (int j = 0; j < yc; ++j)
            if (aug[i][bc + j] != 0) throw error("solve_columns: inconsistent system");
    RatMat x(bc, std::vector<Rat>(yc));
    for (int i = 0; i < bc; ++i)
        for (int j = 0; j < yc; ++j) x[i][j] = aug[i][bc + j];
    return x;
}

}  // namespace tilescope
