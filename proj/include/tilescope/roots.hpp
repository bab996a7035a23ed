#pragma once

// Certified polynomial root finding: exact rational roots where they exist,
// Aberth iteration with a posteriori error bounds for the rest.

#include <tilescope/core.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace tilescope {

// Polynomials are coefficient vectors in ascending degree order.
using RatPoly = std::vector<Rat>;

inline RatPoly poly_norm(RatPoly p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
    return p;
}

inline int poly_deg(const RatPoly& p) { return static_cast<int>(p.size()) - 1; }

inline RatPoly poly_derivative(const RatPoly& p) {
    RatPoly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
    return poly_norm(std::move(d));
}

inline RatPoly poly_monic(RatPoly p) {
    p = poly_norm(std::move(p));
    if (p.empty()) return p;
    Rat lead = p.back();
    for (auto& c : p) c /= lead;
    return p;
}

inline Rat poly_eval(const RatPoly& p, const Rat& x) {
    Rat acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
    return acc;
}

inline cdouble poly_eval(const RatPoly& p, cdouble x) {
    cdouble acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + it->get_d();
    return acc;
}

// Quotient and remainder of a by b over the rationals.
inline std::pair<RatPoly, RatPoly> poly_divmod(RatPoly a, const RatPoly& b) {
    a = poly_norm(std::move(a));
    RatPoly bb = poly_norm(b);
    if (bb.empty()) throw error("polynomial division by zero");
    RatPoly q(a.size() > bb.size() ? a.size() - bb.size() + 1 : 1, Rat(0));
    while (a.size() >= bb.size() && !a.empty()) {
        Rat f = a.back() / bb.back();
        std::size_t shift = a.size() - bb.size();
        q[shift] = f;
        for (std::size_t i = 0; i < bb.size(); ++i) a[shift + i] -= f * bb[i];
        a = poly_norm(std::move(a));
    }
    return {poly_norm(std::move(q)), a};
}

inline RatPoly poly_div_exact(const RatPoly& a, const RatPoly& b) {
    auto [q, r] = poly_divmod(a, b);
    if (!r.empty()) throw error("polynomial division was not exact");
    return q;
}

inline RatPoly poly_gcd(RatPoly a, RatPoly b) {
    a = poly_norm(std::move(a));
    b = poly_norm(std::move(b));
    while (!b.empty()) {
        auto r = poly_divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return poly_monic(std::move(a));
}

// Yun's squarefree decomposition of a monic polynomial:
// returns (factor, multiplicity) pairs with distinct squarefree factors.
inline std::vector<std::pair<RatPoly, int>> squarefree_decomposition(const RatPoly& f_in) {
    RatPoly f = poly_monic(f_in);
    std::vector<std::pair<RatPoly, int>> out;
    if (poly_deg(f) < 1) return out;
    RatPoly fp = poly_derivative(f);
    RatPoly a0 = poly_gcd(f, fp);
    RatPoly b = poly_div_exact(f, a0);
    RatPoly c = poly_div_exact(fp, a0);
    int i = 1;
    while (poly_deg(b) > 0) {
        RatPoly d = c;
        RatPoly bp = poly_derivative(b);
        d.resize(std::max(d.size(), bp.size()), Rat(0));
        for (std::size_t k = 0; k < bp.size(); ++k) d[k] -= bp[k];
        d = poly_norm(std::move(d));
        RatPoly a = poly_gcd(b, d);
        if (poly_deg(a) > 0) out.emplace_back(a, i);
        b = poly_div_exact(b, a);
        c = poly_div_exact(d, a);
        ++i;
    }
    return out;
}

struct Root {
    cdouble value;         // best available approximation
    double bound = 0.0;    // radius of a disc certain to contain a true root
    int multiplicity = 1;
    bool is_exact = false; // set when the root is a verified rational
    Rat exact;
};

namespace detail {

// Simultaneous Aberth-Ehrlich iteration on a squarefree polynomial.
inline std::vector<cdouble> aberth(const RatPoly& p, int max_iter) {
    int n = poly_deg(p);
    RatPoly dp = poly_derivative(p);
    double radius = 0.0;
    for (int i = 0; i < n; ++i) {
        double c = std::abs(Rat(p[i] / p[n]).get_d());
        radius = std::max(radius, c);
    }
    radius = 1.0 + radius;
    std::vector<cdouble> z(n);
    for (int i = 0; i < n; ++i) {
        double theta = 6.283185307179586 * i / n + 0.4;
        z[i] = radius * cdouble(std::cos(theta), std::sin(theta));
    }
    for (int iter = 0; iter < max_iter; ++iter) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            cdouble pv = poly_eval(p, z[i]);
            cdouble dv = poly_eval(dp, z[i]);
            if (pv == cdouble(0)) continue;
            cdouble newton = dv == cdouble(0) ? cdouble(1e-12) : pv / dv;
            cdouble sum = 0;
            for (int j = 0; j < n; ++j)
                if (j != i) sum += cdouble(1) / (z[i] - z[j]);
            cdouble denom = cdouble(1) - newton * sum;
            cdouble w = denom == cdouble(0) ? newton : newton / denom;
            z[i] -= w;
            worst = std::max(worst, std::abs(w) / (1.0 + std::abs(z[i])));
        }
        if (worst < 1e-16) break;
    }
    return z;
}

inline bool rational_reconstruct(double x, long max_den, Rat& out) {
    double v = x;
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int step = 0; step < 40; ++step) {
        double fl = std::floor(v);
        if (fl > 1e17 || fl < -1e17) return false;
        long a = static_cast<long>(fl);
        long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den || q2 < 0) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double frac = v - fl;
        if (frac < 1e-13) break;
        v = 1.0 / frac;
    }
    if (q1 <= 0) return false;
    out = Rat(p1, q1);
    out.canonicalize();
    return true;
}

}  // namespace detail

// All complex roots of p with multiplicities, each carrying either an exact
// rational value or a certified error bound. Throws if refinement cannot
// reach the requested bound.
inline std::vector<Root> poly_roots(const RatPoly& p_in, double want_bound = 1e-10) {
    RatPoly p = poly_norm(p_in);
    if (p.empty()) throw error("cannot take roots of the zero polynomial");
    std::vector<Root> roots;
    // Factor out x^k first so the zero root is reported exactly.
    int zero_mult = 0;
    while (!p.empty() && p[0] == 0) {
        p.erase(p.begin());
        ++zero_mult;
    }
    if (zero_mult > 0) {
        Root r;
        r.value = 0;
        r.multiplicity = zero_mult;
        r.is_exact = true;
        r.exact = 0;
        roots.push_back(r);
    }
    if (poly_deg(p) < 1) return roots;
    for (const auto& [factor, mult] : squarefree_decomposition(p)) {
        int n = poly_deg(factor);
        RatPoly df = poly_derivative(factor);
        std::vector<cdouble> approx;
        double worst = 0.0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            approx = detail::aberth(factor, 60 << attempt);
            worst = 0.0;
            for (cdouble z : approx) {
                cdouble dv = poly_eval(df, z);
                double b = std::abs(dv) == 0.0
                               ? 1.0
                               : n * std::abs(poly_eval(factor, z)) / std::abs(dv);
                worst = std::max(worst, b);
            }
            if (worst <= want_bound) break;
        }
        if (worst > want_bound)
            throw error("root refinement failed to reach the requested bound");
        for (cdouble z : approx) {
            Root r;
            r.value = z;
            r.multiplicity = mult;
            cdouble dv = poly_eval(df, z);
            r.bound = std::abs(dv) == 0.0
                          ? 1.0
                          : n * std::abs(poly_eval(factor, z)) / std::abs(dv);
            if (std::abs(z.imag()) <= r.bound + 1e-12) {
                Rat cand;
                if (detail::rational_reconstruct(z.real(), 1000, cand) &&
                    poly_eval(factor, cand) == 0) {
                    r.is_exact = true;
                    r.exact = cand;
                    r.value = cdouble(cand.get_d(), 0.0);
                    r.bound = 0.0;
                }
            }
            roots.push_back(r);
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return roots;
}

inline std::vector<Root> poly_roots(const std::vector<Int>& p, double want_bound = 1e-10) {
    RatPoly q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = Rat(p[i]);
    return poly_roots(q, want_bound);
}

}  // namespace tilescope
