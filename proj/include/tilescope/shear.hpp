#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <tilescope/patch.hpp>
#include <tilescope/subst.hpp>

namespace tilescope {

// One tile of a row word along a horizontal line, in absolute coordinates.
struct WordTile {
    int letter = 0;
    std::int64_t start = 0, width = 0;
    bool operator==(const WordTile& o) const {
        return letter == o.letter && start == o.start && width == o.width;
    }
};

// A horizontal line segment with level-m supertiles flush against it from
// both sides along its whole extent [x0, x1). The words list every tile whose
// edge meets the segment; the outermost ones may overhang the ends.
struct FaultLine {
    int m = 0;
    std::int64_t y = 0, x0 = 0, x1 = 0;
    std::vector<WordTile> north;  // tiles sitting on the line, sorted by start
    std::vector<WordTile> south;  // tiles hanging from the line
};

namespace detail {

inline std::vector<std::pair<std::int64_t, std::int64_t>> edge_runs(
    std::vector<TileRect>& v) {
    std::sort(v.begin(), v.end(),
              [](const TileRect& a, const TileRect& b) { return a.x < b.x; });
    std::vector<std::pair<std::int64_t, std::int64_t>> runs;
    for (const auto& t : v) {
        if (!runs.empty() && runs.back().second == t.x)
            runs.back().second = t.x + t.w;
        else
            runs.emplace_back(t.x, t.x + t.w);
    }
    return runs;
}

inline std::vector<WordTile> word_on_segment(const std::vector<TileRect>& tiles,
                                             std::int64_t lo, std::int64_t hi) {
    std::vector<WordTile> out;
    for (const auto& t : tiles)
        if (t.x < hi && t.x + t.w > lo) out.push_back({t.label, t.x, t.w});
    return out;
}

inline std::int64_t pos_mod(std::int64_t v, std::int64_t mod) {
    std::int64_t r = v % mod;
    return r < 0 ? r + mod : r;
}

}  // namespace detail

inline std::vector<FaultLine> find_fault_lines(const Patch& patch, int m,
                                               std::int64_t min_extent = 1) {
    std::map<std::int64_t, std::vector<TileRect>> bottoms, tops;
    for (const auto& r : patch.nodes_at_level(m)) {
        bottoms[r.y].push_back(r);
        tops[r.y + r.h].push_back(r);
    }
    std::vector<FaultLine> out;
    for (auto& [y, above] : bottoms) {
        auto it = tops.find(y);
        if (it == tops.end()) continue;
        auto north_runs = detail::edge_runs(above);
        auto south_runs = detail::edge_runs(it->second);
        std::size_t i = 0, j = 0;
        while (i < north_runs.size() && j < south_runs.size()) {
            std::int64_t lo = std::max(north_runs[i].first, south_runs[j].first);
            std::int64_t hi = std::min(north_runs[i].second, south_runs[j].second);
            if (hi - lo >= min_extent) {
                FaultLine f;
                f.m = m;
                f.y = y;
                f.x0 = lo;
                f.x1 = hi;
                f.north = detail::word_on_segment(above, lo, hi);
                f.south = detail::word_on_segment(it->second, lo, hi);
                out.push_back(std::move(f));
            }
            if (north_runs[i].second < south_runs[j].second)
                ++i;
            else
                ++j;
        }
    }
    return out;
}

// D(x) counts wide-tile starts on the north side in [lo, x) minus the same
// count on the south side, sampled at every tile boundary in [lo, hi].
struct DiscrepancyProfile {
    std::vector<std::int64_t> xs;
    std::vector<std::int64_t> d;
    std::int64_t max_abs = 0;
};

inline DiscrepancyProfile discrepancy_profile(const std::vector<WordTile>& north,
                                              const std::vector<WordTile>& south,
                                              std::int64_t lo, std::int64_t hi,
                                              std::int64_t wide_width) {
    std::set<std::int64_t> bounds{lo, hi};
    std::vector<std::int64_t> nstarts, sstarts;
    auto scan = [&](const std::vector<WordTile>& word, std::vector<std::int64_t>& starts) {
        for (const auto& t : word) {
            for (std::int64_t b : {t.start, t.start + t.width})
                if (b >= lo && b <= hi) bounds.insert(b);
            if (t.width == wide_width && t.start >= lo && t.start < hi)
                starts.push_back(t.start);
        }
        std::sort(starts.begin(), starts.end());
    };
    scan(north, nstarts);
    scan(south, sstarts);
    DiscrepancyProfile p;
    std::size_t ni = 0, si = 0;
    for (std::int64_t x : bounds) {
        while (ni < nstarts.size() && nstarts[ni] < x) ++ni;
        while (si < sstarts.size() && sstarts[si] < x) ++si;
        p.xs.push_back(x);
        p.d.push_back(static_cast<std::int64_t>(ni) - static_cast<std::int64_t>(si));
        p.max_abs = std::max(p.max_abs, std::abs(p.d.back()));
    }
    return p;
}

inline DiscrepancyProfile discrepancy(const FaultLine& f, std::int64_t wide_width) {
    return discrepancy_profile(f.north, f.south, f.x0, f.x1, wide_width);
}

// Widest and narrowest label widths at a level, as machine integers.
inline std::pair<std::int64_t, std::int64_t> level_widths(const FusionRule& rule,
                                                          int m) {
    SizeTable sizes(rule);
    std::int64_t wide = 0, narrow = 0;
    for (int l = 0; l < static_cast<int>(rule.labels.size()); ++l) {
        std::int64_t w = to_i64(sizes.width(l, m));
        wide = l == 0 ? w : std::max(wide, w);
        narrow = l == 0 ? w : std::min(narrow, w);
    }
    return {wide, narrow};
}

inline std::vector<WordTile> word_tiles(const Substitution1D& s, int seed, int k,
                                        const std::vector<std::int64_t>& widths) {
    auto letters = iterate(s, {seed}, k);
    std::vector<WordTile> out;
    std::int64_t x = 0;
    for (int u : letters) {
        out.push_back({u, x, widths[static_cast<std::size_t>(u)]});
        x += widths[static_cast<std::size_t>(u)];
    }
    return out;
}

// Order-k comparison of the two row substitutions grown from single seeds and
// anchored at zero, measured with the level-m tile widths.
inline DiscrepancyProfile synthetic_discrepancy_pair(const FusionRule& rule,
                                                     int north_seed, int south_seed,
                                                     int k, int m = 1) {
    auto n = subst_from_rule(rule, Side::Bottom);
    auto s = subst_from_rule(rule, Side::Top);
    SizeTable sizes(rule);
    std::vector<std::int64_t> widths;
    for (int l = 0; l < static_cast<int>(rule.labels.size()); ++l)
        widths.push_back(to_i64(sizes.width(l, m)));
    auto north = word_tiles(n, north_seed, k, widths);
    auto south = word_tiles(s, south_seed, k, widths);
    std::int64_t nspan = north.back().start + north.back().width;
    std::int64_t sspan = south.back().start + south.back().width;
    if (nspan != sspan)
        throw error("north span " + std::to_string(nspan) + " != south span " +
                    std::to_string(sspan));
    return discrepancy_profile(north, south, 0, nspan, level_widths(rule, m).first);
}

inline DiscrepancyProfile synthetic_discrepancy(const FusionRule& rule, int seed,
                                                int k, int m = 1) {
    return synthetic_discrepancy_pair(rule, seed, seed, k, m);
}

// Largest |D| over all single-seed synthetic profiles of the given order.
inline std::int64_t synthetic_max_abs(const FusionRule& rule, int k, int m = 1) {
    std::int64_t best = 0;
    for (int t = 0; t < static_cast<int>(rule.labels.size()); ++t)
        best = std::max(best, synthetic_discrepancy(rule, t, k, m).max_abs);
    return best;
}

inline double least_squares_slope(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = static_cast<double>(pts.size());
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Offsets between left edges of wide tiles that overlap across a fault line.
struct OffsetSet {
    int m = 0;
    std::map<std::int64_t, Int> counts;
    std::set<std::int64_t> residues_mod_wide;
    std::set<std::int64_t> residues_mod_narrow;
};

inline void collect_offset_pairs(
    const std::vector<WordTile>& north, const std::vector<WordTile>& south,
    std::int64_t wide_width,
    const std::function<void(const WordTile&, const WordTile&)>& fn) {
    std::vector<WordTile> na, sa;
    for (const auto& t : north)
        if (t.width == wide_width) na.push_back(t);
    for (const auto& t : south)
        if (t.width == wide_width) sa.push_back(t);
    std::size_t j0 = 0;
    for (const auto& u : na) {
        while (j0 < sa.size() && sa[j0].start + wide_width <= u.start) ++j0;
        for (std::size_t j = j0; j < sa.size() && sa[j].start < u.start + wide_width;
             ++j)
            fn(u, sa[j]);
    }
}

inline OffsetSet offsets(const FaultLine& f, std::int64_t wide_width,
                         std::int64_t narrow_width) {
    OffsetSet o;
    o.m = f.m;
    collect_offset_pairs(f.north, f.south, wide_width,
                         [&](const WordTile& u, const WordTile& v) {
                             std::int64_t off = u.start - v.start;
                             o.counts[off] += 1;
                             o.residues_mod_wide.insert(detail::pos_mod(off, wide_width));
                             o.residues_mod_narrow.insert(
                                 detail::pos_mod(off, narrow_width));
                         });
    return o;
}

inline OffsetSet offsets(const FaultLine& f, const FusionRule& rule) {
    auto [wide, narrow] = level_widths(rule, f.m);
    return offsets(f, wide, narrow);
}

// Exact multiset of wide-pair offsets across every horizontal abutment line
// inside a supertile, computed by recursion over the child layout: pairs are
// either interior to one child or straddle a seam between stacked children,
// never both, so the census sums child censuses and seam contributions.
class OffsetCensus {
  public:
    struct Child {
        int label = 0;
        std::int64_t x = 0, y = 0, w = 0, h = 0;
    };

    struct Location {
        bool found = false;
        std::int64_t y = 0, north_x = 0, south_x = 0, seam_lo = 0, seam_hi = 0;
    };

    OffsetCensus(const FusionRule& rule, int m)
        : rule_(rule),
          sizes_(rule),
          m_(m),
          north_(subst_from_rule(rule, Side::Bottom)),
          south_(subst_from_rule(rule, Side::Top)) {
        if (m < 0) throw error("negative level");
        for (int l = 0; l < label_count(); ++l)
            widths_.push_back(to_i64(sizes_.width(l, m)));
        wide_ = *std::max_element(widths_.begin(), widths_.end());
    }

    int m() const { return m_; }
    std::int64_t wide_width() const { return wide_; }
    const FusionRule& rule() const { return rule_; }

    std::vector<Child> layout(int label, int level) const {
        if (level < 1) throw error("layout needs level >= 1");
        // By value: the size table grows on demand.
        const auto vals = sizes_.values(level - 1);
        std::vector<Child> out;
        for (const auto& c : rule_.children[static_cast<std::size_t>(label)])
            out.push_back({c.label, to_i64(c.x.eval(vals)), to_i64(c.y.eval(vals)),
                           to_i64(sizes_.width(c.label, level - 1)),
                           to_i64(sizes_.height(c.label, level - 1))});
        return out;
    }

    std::vector<WordTile> bottom_word(int label, int level) {
        return row_word(true, label, level);
    }
    std::vector<WordTile> top_word(int label, int level) {
        return row_word(false, label, level);
    }

    const std::map<std::int64_t, Int>& census(int label, int level) {
        auto key = std::make_pair(label, level);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::map<std::int64_t, Int> acc;
        if (level > m_) {
            auto children = layout(label, level);
            for (const auto& c : children)
                for (const auto& [off, count] : census(c.label, level - 1))
                    acc[off] += count;
            for_each_seam_pair(children, level - 1,
                               [&](const WordTile& u, const WordTile& v,
                                   std::int64_t, std::int64_t, std::int64_t) {
                                   acc[u.start - v.start] += 1;
                               });
        }
        return memo_.emplace(key, std::move(acc)).first->second;
    }

    // Distinct offsets across every label at one level.
    std::set<std::int64_t> distinct_union(int level) {
        std::set<std::int64_t> out;
        for (int l = 0; l < label_count(); ++l)
            for (const auto& [off, count] : census(l, level)) out.insert(off);
        return out;
    }

    // First concrete wide pair with the requested offset inside the given
    // supertile, located by descending toward a child whose census has it.
    Location locate(int label, int level, std::int64_t s) {
        Location loc;
        std::int64_t ox = 0, oy = 0;
        int lab = label, lev = level;
        while (lev > m_) {
            auto children = layout(lab, lev);
            for_each_seam_pair(children, lev - 1,
                               [&](const WordTile& u, const WordTile& v,
                                   std::int64_t y, std::int64_t lo,
                                   std::int64_t hi) {
                if (loc.found || u.start - v.start != s) return;
                loc.found = true;
                loc.y = oy + y;
                loc.north_x = ox + u.start;
                loc.south_x = ox + v.start;
                loc.seam_lo = ox + lo;
                loc.seam_hi = ox + hi;
            });
            if (loc.found) return loc;
            bool descended = false;
            for (const auto& c : children)
                if (census(c.label, lev - 1).count(s)) {
                    ox += c.x;
                    oy += c.y;
                    lab = c.label;
                    lev -= 1;
                    descended = true;
                    break;
                }
            if (!descended) break;
        }
        return loc;
    }

  private:
    FusionRule rule_;
    SizeTable sizes_;
    int m_;
    Substitution1D north_, south_;
    std::vector<std::int64_t> widths_;
    std::int64_t wide_ = 0;
    std::map<std::pair<int, int>, std::map<std::int64_t, Int>> memo_;
    std::map<std::pair<int, int>, std::vector<int>> nwords_, swords_;

    int label_count() const { return static_cast<int>(rule_.labels.size()); }

    const std::vector<int>& letters(bool north, int label, int k) {
        auto& cache = north ? nwords_ : swords_;
        auto key = std::make_pair(label, k);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        std::vector<int> w{label};
        if (k > 0) {
            const auto& prev = letters(north, label, k - 1);
            const auto& sub = north ? north_ : south_;
            w.clear();
            for (int u : prev)
                w.insert(w.end(), sub.image[static_cast<std::size_t>(u)].begin(),
                         sub.image[static_cast<std::size_t>(u)].end());
            if (w.size() > 20'000'000)
                throw budget_error("row word of " + std::to_string(w.size()) +
                                   " letters exceeds budget");
        }
        return cache.emplace(key, std::move(w)).first->second;
    }

    // Level-m tiles of the bottom or top row of the level supertile, starting
    // at x = 0.
    std::vector<WordTile> row_word(bool north, int label, int level) {
        if (level < m_) throw error("row word below its own tile level");
        const auto& ls = letters(north, label, level - m_);
        std::vector<WordTile> out;
        std::int64_t x = 0;
        for (int u : ls) {
            out.push_back({u, x, widths_[static_cast<std::size_t>(u)]});
            x += widths_[static_cast<std::size_t>(u)];
        }
        return out;
    }

    // Every wide pair straddling a seam between a child stacked directly on
    // another; fn also receives the seam height and shared x-extent.
    void for_each_seam_pair(
        const std::vector<Child>& children, int child_level,
        const std::function<void(const WordTile&, const WordTile&, std::int64_t,
                                 std::int64_t, std::int64_t)>& fn) {
        for (const auto& upper : children)
            for (const auto& lower : children) {
                if (upper.y != lower.y + lower.h) continue;
                std::int64_t lo = std::max(upper.x, lower.x);
                std::int64_t hi = std::min(upper.x + upper.w, lower.x + lower.w);
                if (lo >= hi) continue;
                auto n = bottom_word(upper.label, child_level);
                auto s = top_word(lower.label, child_level);
                for (auto& t : n) t.start += upper.x;
                for (auto& t : s) t.start += lower.x;
                collect_offset_pairs(n, s, wide_,
                                     [&](const WordTile& u, const WordTile& v) {
                                         fn(u, v, upper.y, lo, hi);
                                     });
            }
    }
};

// Arithmetic of the two widths at one level.
struct GcdReport {
    int level = 0;
    Int wide, narrow, g;
    std::pair<Int, Int> mod3;
    std::vector<std::pair<Int, std::pair<Int, Int>>> mod_p;
};

inline GcdReport gcd_report(const FusionRule& rule, int n,
                            const std::vector<Int>& primes = {}) {
    if (n < 0) throw error("negative level");
    SizeTable sizes(rule);
    GcdReport rep;
    rep.level = n;
    for (int l = 0; l < static_cast<int>(rule.labels.size()); ++l) {
        Int w = sizes.width(l, n);
        if (l == 0) {
            rep.wide = rep.narrow = w;
        } else {
            rep.wide = std::max(rep.wide, w);
            rep.narrow = std::min(rep.narrow, w);
        }
    }
    mpz_gcd(rep.g.get_mpz_t(), rep.wide.get_mpz_t(), rep.narrow.get_mpz_t());
    rep.mod3 = {rep.wide % 3, rep.narrow % 3};
    for (const Int& p : primes)
        rep.mod_p.push_back({p, {rep.wide % p, rep.narrow % p}});
    return rep;
}

// All (2r+1) x 2r unit-cell windows seen centered on fault segments, keyed by
// their label bytes in row-major order from the bottom row up.
struct WindowCatalog {
    int r = 0, m = 0, max_level = 0;
    std::set<std::string> keys;
    struct Origin {
        int label = 0, level = 0;
        std::int64_t y = 0, cx = 0;
    };
    std::map<std::string, Origin> first_seen;
    bool too_small = false;  // no window fit inside any harvested patch
};

inline std::string window_text(const FusionRule& rule, const std::string& key,
                               int r) {
    std::string out;
    std::int64_t w = 2 * r + 1, h = 2 * r;
    for (std::int64_t row = h - 1; row >= 0; --row) {
        for (std::int64_t col = 0; col < w; ++col) {
            int id = key[static_cast<std::size_t>(row * w + col)];
            out += rule.labels[static_cast<std::size_t>(id)];
        }
        out += '\n';
    }
    return out;
}

// Call fn with the encoded window and center abscissa for every center on the
// segment whose window fits inside the patch.
inline void harvest_fault_windows(
    const Patch& patch, const FaultLine& f, int r,
    const std::function<void(const std::string&, std::int64_t)>& fn) {
    std::int64_t cl = std::max<std::int64_t>(f.x0, r);
    std::int64_t cr = std::min<std::int64_t>(f.x1, patch.width() - 1 - r);
    if (f.y - r < 0 || f.y + r > patch.height() || cl > cr) return;
    Grid strip = patch.sub_cells(cl - r, f.y - r, cr + r + 1, f.y + r);
    for (std::int64_t cx = cl; cx <= cr; ++cx) {
        std::string key;
        key.reserve(static_cast<std::size_t>((2 * r + 1) * 2 * r));
        for (std::int64_t ry = 0; ry < 2 * r; ++ry)
            for (std::int64_t dx = 0; dx <= 2 * r; ++dx)
                key += static_cast<char>(strip.at(cx - cl + dx, ry));
        fn(key, cx);
    }
}

inline WindowCatalog build_window_catalog(const FusionRule& rule, int r,
                                          int max_level, int m = 2) {
    if (r < 1) throw error("window radius must be at least 1");
    WindowCatalog cat;
    cat.r = r;
    cat.m = m;
    cat.max_level = max_level;
    int nl = static_cast<int>(rule.labels.size());
    struct Hit {
        std::string key;
        std::int64_t y, cx;
    };
    std::vector<std::future<std::vector<Hit>>> jobs;
    std::vector<std::pair<int, int>> order;  // (level, label) per job
    for (int level = m + 1; level <= max_level; ++level)
        for (int t = 0; t < nl; ++t) {
            order.emplace_back(level, t);
            jobs.push_back(std::async(std::launch::async, [&rule, t, level, m, r] {
                std::vector<Hit> local;
                Patch patch = build_supertile(rule, t, level);
                for (const auto& f : find_fault_lines(patch, m))
                    harvest_fault_windows(patch, f, r,
                                          [&](const std::string& key, std::int64_t cx) {
                                              local.push_back({key, f.y, cx});
                                          });
                return local;
            }));
        }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto [level, t] = order[i];
        for (auto& hit : jobs[i].get()) {
            if (cat.keys.insert(hit.key).second)
                cat.first_seen[hit.key] = {t, level, hit.y, hit.cx};
        }
    }
    cat.too_small = cat.keys.empty();
    return cat;
}

// A concrete junction realizing a horizontal shift between wide tiles across
// a fault line, plus the finite-radius legality verdict for its windows.
struct ShearWitness {
    bool found = false;
    std::int64_t shift = 0;
    int label = -1, level = -1;  // supertile containing the junction
    std::int64_t y = 0, north_x = 0, south_x = 0;
    std::int64_t seam_lo = 0, seam_hi = 0;
    int window_radius = 0;
    bool windows_checked = false, windows_legal = false;
    std::vector<std::string> missing_windows;
    int searched_to = 0;  // every level and label up to this bound was covered
};

inline ShearWitness shear_witness(const FusionRule& rule, std::int64_t s, int r,
                                  int max_level, const WindowCatalog* catalog,
                                  int m = 2) {
    OffsetCensus census(rule, m);
    ShearWitness w;
    w.shift = s;
    w.window_radius = r;
    w.searched_to = max_level;
    SizeTable sizes(rule);
    int nl = static_cast<int>(rule.labels.size());
    for (int level = m + 1; level <= max_level; ++level)
        for (int t = 0; t < nl; ++t) {
            if (!census.census(t, level).count(s)) continue;
            auto loc = census.locate(t, level, s);
            if (!loc.found) throw error("census has the offset but no instance");
            w.found = true;
            w.label = t;
            w.level = level;
            w.y = loc.y;
            w.north_x = loc.north_x;
            w.south_x = loc.south_x;
            w.seam_lo = loc.seam_lo;
            w.seam_hi = loc.seam_hi;
            if (!catalog) return w;
            // Check each window centered within r of the overlap columns.
            Patch patch = build_supertile(rule, t, level, sizes.area(t, level));
            std::int64_t wide = census.wide_width();
            std::int64_t olo = std::max(w.north_x, w.south_x);
            std::int64_t ohi = std::min(w.north_x, w.south_x) + wide;
            FaultLine zone;
            zone.m = m;
            zone.y = w.y;
            zone.x0 = std::max(w.seam_lo, olo - r);
            zone.x1 = std::min(w.seam_hi, ohi - 1 + r);
            if (zone.x0 <= zone.x1 && w.y - r >= 0 && w.y + r <= patch.height()) {
                w.windows_checked = true;
                w.windows_legal = true;
                harvest_fault_windows(patch, zone, r,
                                      [&](const std::string& key, std::int64_t) {
                                          if (!catalog->keys.count(key)) {
                                              w.windows_legal = false;
                                              if (w.missing_windows.size() < 8)
                                                  w.missing_windows.push_back(key);
                                          }
                                      });
            }
            return w;
        }
    return w;
}

}  // namespace tilescope
