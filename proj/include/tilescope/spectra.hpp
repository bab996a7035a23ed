#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include <tilescope/patch.hpp>

namespace tilescope {

using Vec2 = std::pair<std::int64_t, std::int64_t>;

// All translations at which the template's labels match the host exactly.
inline std::vector<Vec2> occurrences(const Grid& tmpl, const Grid& host) {
    if (tmpl.w > host.w || tmpl.h > host.h)
        throw error("template larger than host");
    std::vector<Vec2> out;
    for (std::int64_t y = 0; y + tmpl.h <= host.h; ++y)
        for (std::int64_t x = 0; x + tmpl.w <= host.w; ++x) {
            bool ok = true;
            for (std::int64_t j = 0; ok && j < tmpl.h; ++j)
                for (std::int64_t i = 0; i < tmpl.w; ++i)
                    if (host.at(x + i, y + j) != tmpl.at(i, j)) {
                        ok = false;
                        break;
                    }
            if (ok) out.push_back({x, y});
        }
    return out;
}

// Differences between positions of equal square windows. Each vector keeps
// one concrete occurrence pair as its witness.
struct ReturnVectorSet {
    int rho = 0;
    std::int64_t host_w = 0, host_h = 0;
    std::set<Vec2> vectors;
    std::map<Vec2, std::pair<Vec2, Vec2>> witness;  // v -> (from, to), to - from = v
};

namespace detail {

// Call fn once per group of two or more positions whose (2r+1)-square
// windows have identical content. A rolling hash sorts candidates together;
// cell comparison splits any collision before a group is reported.
inline void for_each_repeat_group(const Grid& g, int rho,
                                  const std::function<void(const std::vector<Vec2>&)>& fn) {
    std::int64_t s = 2 * static_cast<std::int64_t>(rho) + 1;
    if (g.w < s || g.h < s) throw error("host too small for the window radius");
    std::uint64_t bx = 0x9e3779b97f4a7c15ull | 1, by = 0xc2b2ae3d27d4eb4full | 1;
    std::uint64_t px = 1, py = 1;
    for (std::int64_t i = 1; i < s; ++i) px *= bx;
    for (std::int64_t i = 1; i < s; ++i) py *= by;
    std::int64_t nx = g.w - s + 1, ny = g.h - s + 1;
    auto cell = [&](std::int64_t x, std::int64_t y) {
        return static_cast<std::uint64_t>(g.at(x, y)) + 1;
    };
    std::vector<std::uint64_t> rows(static_cast<std::size_t>(nx * g.h));
    for (std::int64_t y = 0; y < g.h; ++y) {
        std::uint64_t h = 0;
        for (std::int64_t x = 0; x < s; ++x) h = h * bx + cell(x, y);
        rows[static_cast<std::size_t>(y * nx)] = h;
        for (std::int64_t x = 1; x < nx; ++x) {
            h = (h - cell(x - 1, y) * px) * bx + cell(x + s - 1, y);
            rows[static_cast<std::size_t>(y * nx + x)] = h;
        }
    }
    struct HashedPos {
        std::uint64_t h;
        std::int32_t x, y;
    };
    std::vector<HashedPos> all;
    all.reserve(static_cast<std::size_t>(nx * ny));
    for (std::int64_t x = 0; x < nx; ++x) {
        std::uint64_t h = 0;
        for (std::int64_t y = 0; y < s; ++y)
            h = h * by + rows[static_cast<std::size_t>(y * nx + x)];
        all.push_back({h, static_cast<std::int32_t>(x), 0});
        for (std::int64_t y = 1; y < ny; ++y) {
            h = (h - rows[static_cast<std::size_t>((y - 1) * nx + x)] * py) * by +
                rows[static_cast<std::size_t>((y + s - 1) * nx + x)];
            all.push_back({h, static_cast<std::int32_t>(x), static_cast<std::int32_t>(y)});
        }
    }
    rows.clear();
    rows.shrink_to_fit();
    std::sort(all.begin(), all.end(), [](const HashedPos& a, const HashedPos& b) {
        if (a.h != b.h) return a.h < b.h;
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    auto same = [&](Vec2 a, Vec2 b) {
        for (std::int64_t j = 0; j < s; ++j) {
            const auto* pa = g.cells.data() + (a.second + j) * g.w + a.first;
            const auto* pb = g.cells.data() + (b.second + j) * g.w + b.first;
            if (std::memcmp(pa, pb, static_cast<std::size_t>(s)) != 0) return false;
        }
        return true;
    };
    for (std::size_t lo = 0; lo < all.size();) {
        std::size_t hi = lo + 1;
        while (hi < all.size() && all[hi].h == all[lo].h) ++hi;
        if (hi - lo >= 2) {
            std::vector<Vec2> members;
            for (std::size_t i = lo; i < hi; ++i) members.push_back({all[i].x, all[i].y});
            while (!members.empty()) {
                std::vector<Vec2> grp{members.front()}, rest;
                for (std::size_t i = 1; i < members.size(); ++i)
                    (same(members.front(), members[i]) ? grp : rest).push_back(members[i]);
                if (grp.size() >= 2) fn(grp);
                members = std::move(rest);
            }
        }
        lo = hi;
    }
}

}  // namespace detail

inline ReturnVectorSet return_vectors(const Grid& host, int rho,
                                      std::int64_t pair_budget = 400'000'000) {
    ReturnVectorSet out;
    out.rho = rho;
    out.host_w = host.w;
    out.host_h = host.h;
    std::int64_t off = rho;  // corner-to-center shift, same for both positions
    std::int64_t pairs = 0;
    Vec2 zero{0, 0};
    out.vectors.insert(zero);
    out.witness[zero] = {{off, off}, {off, off}};
    std::unordered_set<std::uint64_t> seen;
    auto pack = [](Vec2 v) {
        auto ux = static_cast<std::uint32_t>(static_cast<std::int32_t>(v.first));
        auto uy = static_cast<std::uint32_t>(static_cast<std::int32_t>(v.second));
        return (static_cast<std::uint64_t>(ux) << 32) | uy;
    };
    detail::for_each_repeat_group(host, rho, [&](const std::vector<Vec2>& grp) {
        pairs += static_cast<std::int64_t>(grp.size()) *
                 static_cast<std::int64_t>(grp.size() - 1);
        if (pairs > pair_budget)
            throw budget_error("occurrence pairs exceed the harvest budget");
        for (const auto& p : grp)
            for (const auto& q : grp) {
                if (p == q) continue;
                Vec2 v{q.first - p.first, q.second - p.second};
                if (seen.insert(pack(v)).second) {
                    out.vectors.insert(v);
                    out.witness[v] = {{p.first + off, p.second + off},
                                      {q.first + off, q.second + off}};
                }
            }
    });
    return out;
}

inline ReturnVectorSet return_vectors(const Patch& patch, int rho,
                                      std::int64_t pair_budget = 400'000'000) {
    return return_vectors(patch.cells(), rho, pair_budget);
}

// Edge cochains on the unit lattice. A vertical edge (x, y)->(x, y+1) reads
// the cell on its right at (x, y); a horizontal edge (x, y)->(x+1, y) reads
// the cell above it at (x, y).
enum class CochainKind { ConstantDx, ConstantDy, Scalar, Counter, Table };

struct CochainSpec {
    CochainKind kind = CochainKind::ConstantDx;
    int r = 0;  // safe-interior margin; window radius for tables
    Rat mu = 0, nu = 0;
    int level = 0;
    std::map<std::uint64_t, Rat> table;
};

inline CochainSpec cochain_dx() {
    CochainSpec s;
    s.kind = CochainKind::ConstantDx;
    s.mu = 1;
    return s;
}

inline CochainSpec cochain_dy() {
    CochainSpec s;
    s.kind = CochainKind::ConstantDy;
    s.nu = 1;
    return s;
}

inline CochainSpec cochain_scalar(const Rat& mu, const Rat& nu) {
    CochainSpec s;
    s.kind = CochainKind::Scalar;
    s.mu = mu;
    s.nu = nu;
    return s;
}

// Counts 1 on vertical edges whose right cell lies in the bottom row of its
// enclosing level-n supertile.
inline CochainSpec cochain_counter(int level) {
    CochainSpec s;
    s.kind = CochainKind::Counter;
    s.level = level;
    s.r = 1;
    return s;
}

inline CochainSpec cochain_table(int r, std::map<std::uint64_t, Rat> table) {
    if (r < 1) throw error("table cochains need radius at least 1");
    CochainSpec s;
    s.kind = CochainKind::Table;
    s.r = r;
    s.table = std::move(table);
    return s;
}

struct Edge {
    bool vertical = false;
    std::int64_t x = 0, y = 0;
};

namespace detail {

inline bool edge_safe(const CochainSpec& c, const Patch& p, const Edge& e) {
    std::int64_t r = c.r, w = p.width(), h = p.height();
    if (e.vertical)
        return e.x - r >= 0 && e.x + r <= w && e.y - r >= 0 && e.y + r + 1 <= h;
    return e.x - r >= 0 && e.x + r + 1 <= w && e.y - r >= 0 && e.y + r <= h;
}

inline std::uint64_t edge_pattern_hash(const Patch& p, const Edge& e, int r) {
    std::string key(1, e.vertical ? 'v' : 'h');
    if (e.vertical) {
        for (std::int64_t y = e.y - r; y <= e.y + r; ++y)
            for (std::int64_t x = e.x - r; x < e.x + r; ++x)
                key += static_cast<char>(p.cell_at(x, y));
    } else {
        for (std::int64_t y = e.y - r; y < e.y + r; ++y)
            for (std::int64_t x = e.x - r; x <= e.x + r; ++x)
                key += static_cast<char>(p.cell_at(x, y));
    }
    return fnv1a64(key);
}

}  // namespace detail

inline Rat edge_value(const CochainSpec& c, const Patch& patch, const Edge& e) {
    if (c.kind == CochainKind::Counter) {
        // Only the cell to the right of a vertical edge matters, so the
        // window margin r would be needlessly strict here. Horizontal edges
        // carry 0 everywhere.
        if (!e.vertical) return 0;
        if (e.x < 0 || e.x >= patch.width() || e.y < 0 || e.y >= patch.height())
            throw error("edge outside the safe interior");
        TileRect node = patch.node_at(e.x, e.y, c.level);
        return node.y == e.y ? 1 : 0;
    }
    if (!detail::edge_safe(c, patch, e))
        throw error("edge outside the safe interior");
    switch (c.kind) {
        case CochainKind::ConstantDx:
            return e.vertical ? Rat(0) : Rat(1);
        case CochainKind::ConstantDy:
            return e.vertical ? Rat(1) : Rat(0);
        case CochainKind::Scalar:
            return e.vertical ? c.nu : c.mu;
        case CochainKind::Table: {
            auto it = c.table.find(detail::edge_pattern_hash(patch, e, c.r));
            if (it == c.table.end())
                throw error("pattern not covered by the cochain table");
            return it->second;
        }
    }
    throw error("unknown cochain kind");
}

// Sum of cochain values along an oriented lattice path given by its vertices.
inline Rat integrate(const CochainSpec& c, const Patch& patch,
                     const std::vector<Vec2>& path) {
    if (path.size() < 2) return 0;
    Rat total = 0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        auto [x0, y0] = path[i - 1];
        auto [x1, y1] = path[i];
        std::int64_t dx = x1 - x0, dy = y1 - y0;
        if (std::abs(dx) + std::abs(dy) != 1) throw error("path step is not a unit move");
        Edge e;
        if (dx != 0) {
            e = {false, std::min(x0, x1), y0};
            total += dx > 0 ? edge_value(c, patch, e) : -edge_value(c, patch, e);
        } else {
            e = {true, x0, std::min(y0, y1)};
            total += dy > 0 ? edge_value(c, patch, e) : -edge_value(c, patch, e);
        }
    }
    return total;
}

// Monotone staircase from a to b: all horizontal motion first, then vertical.
inline std::vector<Vec2> staircase(Vec2 a, Vec2 b) {
    std::vector<Vec2> path{a};
    std::int64_t stepx = b.first > a.first ? 1 : -1;
    for (std::int64_t x = a.first; x != b.first; x += stepx)
        path.push_back({x + stepx, a.second});
    std::int64_t stepy = b.second > a.second ? 1 : -1;
    for (std::int64_t y = a.second; y != b.second; y += stepy)
        path.push_back({b.first, y + stepy});
    return path;
}

// Componentwise edge-density average over the safe interior, with a crude
// boundary-error bound proportional to perimeter over area.
struct RsAverage {
    Rat x, y;
    double error_bound = 0;
};

inline RsAverage rs_average(const CochainSpec& c, const Patch& patch) {
    std::int64_t r = c.r, w = patch.width(), h = patch.height();
    if (w < 4 * std::max<std::int64_t>(r, 1) || h < 4 * std::max<std::int64_t>(r, 1))
        throw error("patch too small against the cochain radius");
    RsAverage out;
    out.x = 0;
    out.y = 0;
    Int nh = 0, nv = 0;
    if (c.kind == CochainKind::Counter) {
        // One pass over the supertile rows beats a node query per edge.
        std::map<std::int64_t, std::vector<std::pair<std::int64_t, std::int64_t>>> rows;
        for (const auto& t : patch.nodes_at_level(c.level))
            rows[t.y].push_back({t.x, t.x + t.w});
        Int hits = 0;
        for (std::int64_t y = r; y + r + 1 <= h; ++y) {
            nv += w - 2 * r + 1;
            auto it = rows.find(y);
            if (it == rows.end()) continue;
            // An edge at x reads the cell on its right, so a supertile
            // covering [x0, x1) contributes the edges x0 .. x1-1.
            for (auto [x0, x1] : it->second) {
                std::int64_t lo = std::max(x0, r), hi = std::min(x1 - 1, w - r);
                if (hi >= lo) hits += hi - lo + 1;
            }
        }
        out.y = nv > 0 ? Rat(hits) / Rat(nv) : Rat(0);
    } else {
        Rat sh = 0, sv = 0;
        for (std::int64_t y = r; y + r <= h; ++y)
            for (std::int64_t x = r; x + r + 1 <= w; ++x) {
                sh += edge_value(c, patch, {false, x, y});
                nh += 1;
            }
        for (std::int64_t y = r; y + r + 1 <= h; ++y)
            for (std::int64_t x = r; x + r <= w; ++x) {
                sv += edge_value(c, patch, {true, x, y});
                nv += 1;
            }
        if (nh > 0) out.x = sh / Rat(nh);
        if (nv > 0) out.y = sv / Rat(nv);
    }
    out.error_bound = 2.0 * static_cast<double>(w + h) /
                      (static_cast<double>(w) * static_cast<double>(h));
    return out;
}

// Integrals between occurrences of equal windows must land in the integers.
struct IntegralityReport {
    bool passed = true;
    int rho = 0;
    std::int64_t vectors_checked = 0, pairs_skipped = 0;
    std::vector<std::pair<Vec2, Rat>> violations;  // capped
};

inline IntegralityReport integrality_check(const CochainSpec& c, const Patch& host,
                                           int rho) {
    auto rv = return_vectors(host, rho);
    IntegralityReport rep;
    rep.rho = rho;
    for (const auto& v : rv.vectors) {
        Rat val;
        if (c.kind == CochainKind::Scalar || c.kind == CochainKind::ConstantDx ||
            c.kind == CochainKind::ConstantDy) {
            // Translation invariant and closed, so the integral only sees v.
            val = c.mu * Rat(from_i64(v.first)) + c.nu * Rat(from_i64(v.second));
        } else {
            auto [p, q] = rv.witness.at(v);
            auto path = staircase(p, q);
            try {
                val = integrate(c, host, path);
            } catch (const error&) {
                rep.pairs_skipped += 1;
                continue;
            }
        }
        rep.vectors_checked += 1;
        if (val.get_den() != 1) {
            rep.passed = false;
            if (rep.violations.size() < 16) rep.violations.push_back({v, val});
        }
    }
    return rep;
}

// Generator of the multipliers sending every width into the integers: the
// admissible set is (1/gcd) * Z.
inline Int integer_multiplier_lattice(const std::vector<Int>& widths) {
    if (widths.empty()) throw error("no widths given");
    Int g = 0;
    for (const Int& w : widths) {
        if (w <= 0) throw error("widths must be positive");
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), w.get_mpz_t());
    }
    return g;
}

// Grid survey of pseudo-eigenvalues: a grid point survives when every return
// vector moves it by less than tol around the unit circle.
struct ScanBox {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
};

struct SpectrumScan {
    ScanBox box;
    double step = 0, tol = 0;
    std::int64_t grid_points = 0;
    std::vector<std::pair<double, double>> survivors;
};

inline SpectrumScan spectrum_scan(const ReturnVectorSet& rv, const ScanBox& box,
                                  double step, double tol) {
    if (step <= 0) throw error("step must be positive");
    if (tol <= 0 || tol >= 2) throw error("tolerance must sit inside (0, 2)");
    std::vector<Vec2> vs(rv.vectors.begin(), rv.vectors.end());
    std::sort(vs.begin(), vs.end(), [](Vec2 a, Vec2 b) {
        auto na = a.first * a.first + a.second * a.second;
        auto nb = b.first * b.first + b.second * b.second;
        return na != nb ? na < nb : a < b;
    });
    SpectrumScan out;
    out.box = box;
    out.step = step;
    out.tol = tol;
    std::int64_t nx = static_cast<std::int64_t>(std::floor((box.x1 - box.x0) / step + 1e-9)) + 1;
    std::int64_t ny = static_cast<std::int64_t>(std::floor((box.y1 - box.y0) / step + 1e-9)) + 1;
    out.grid_points = nx * ny;
    const double pi = 3.14159265358979323846;
    auto survives = [&](double lx, double ly) {
        for (const auto& [vx, vy] : vs) {
            double phase = lx * static_cast<double>(vx) + ly * static_cast<double>(vy);
            if (2.0 * std::abs(std::sin(pi * phase)) >= tol) return false;
        }
        return true;
    };
    unsigned int hw = std::max(1u, std::thread::hardware_concurrency());
    std::int64_t chunk = (ny + hw - 1) / hw;
    std::vector<std::future<std::vector<std::pair<double, double>>>> jobs;
    for (std::int64_t j0 = 0; j0 < ny; j0 += chunk)
        jobs.push_back(std::async(std::launch::async, [&, j0] {
            std::vector<std::pair<double, double>> local;
            for (std::int64_t j = j0; j < std::min(ny, j0 + chunk); ++j)
                for (std::int64_t i = 0; i < nx; ++i) {
                    double lx = box.x0 + static_cast<double>(i) * step;
                    double ly = box.y0 + static_cast<double>(j) * step;
                    if (survives(lx, ly)) local.push_back({lx, ly});
                }
            return local;
        }));
    for (auto& job : jobs)
        for (auto& p : job.get()) out.survivors.push_back(p);
    return out;
}

// Text form of a cochain table: one "hash -> value" line per pattern.
inline std::string cochain_table_save(const CochainSpec& c) {
    if (c.kind != CochainKind::Table) throw error("only table cochains serialize");
    std::ostringstream os;
    os << "radius " << c.r << "\n";
    for (const auto& [hash, value] : c.table)
        os << std::hex << hash << std::dec << " -> " << rat_str(value) << "\n";
    return os.str();
}

inline CochainSpec cochain_table_load(const std::string& text) {
    std::istringstream is(text);
    std::string head;
    int r = 0;
    if (!(is >> head >> r) || head != "radius")
        throw parse_error("cochain table must open with its radius", 1);
    std::map<std::uint64_t, Rat> table;
    std::string hash_s, arrow, value_s;
    while (is >> hash_s >> arrow >> value_s) {
        if (arrow != "->") throw parse_error("expected '->' in cochain table", 0);
        std::uint64_t hash = std::stoull(hash_s, nullptr, 16);
        Rat v(value_s);
        v.canonicalize();
        table[hash] = v;
    }
    return cochain_table(r, std::move(table));
}

// Record every safe edge of a patch into a table keyed by its local pattern;
// a pattern meeting two different values is a radius violation, not data.
inline CochainSpec tabulate_cochain(const CochainSpec& src, const Patch& patch, int r) {
    if (r < 1) throw error("table cochains need radius at least 1");
    std::map<std::uint64_t, Rat> table;
    auto note = [&](const Edge& e) {
        CochainSpec probe = src;
        Rat v = edge_value(probe, patch, e);
        std::uint64_t h = detail::edge_pattern_hash(patch, e, r);
        auto it = table.find(h);
        if (it == table.end())
            table[h] = v;
        else if (it->second != v)
            throw error("pattern maps to conflicting values at this radius");
    };
    std::int64_t w = patch.width(), hgt = patch.height();
    std::int64_t m = std::max<std::int64_t>(r, src.r);
    for (std::int64_t y = m; y + m <= hgt; ++y)
        for (std::int64_t x = m; x + m + 1 <= w; ++x) note({false, x, y});
    for (std::int64_t y = m; y + m + 1 <= hgt; ++y)
        for (std::int64_t x = m; x + m <= w; ++x) note({true, x, y});
    return cochain_table(r, std::move(table));
}

}  // namespace tilescope
