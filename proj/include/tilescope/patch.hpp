#pragma once

// Supertile construction: exact integer geometry for P_n(t), decomposition
// tree queries, boundary words, validation, and the axis-swap involution.

#include <tilescope/core.hpp>
#include <tilescope/rule.hpp>
#include <tilescope/sizes.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace tilescope {

struct TileRect {
    int label = 0;
    std::int64_t x = 0, y = 0, w = 0, h = 0;
    bool operator==(const TileRect& o) const {
        return label == o.label && x == o.x && y == o.y && w == o.w && h == o.h;
    }
};

struct Grid {
    std::int64_t w = 0, h = 0;
    std::vector<std::uint8_t> cells;  // row-major, index y*w + x

    std::uint8_t at(std::int64_t x, std::int64_t y) const {
        return cells[static_cast<std::size_t>(y) * w + x];
    }
    std::uint8_t& at(std::int64_t x, std::int64_t y) {
        return cells[static_cast<std::size_t>(y) * w + x];
    }
    bool operator==(const Grid& o) const {
        return w == o.w && h == o.h && cells == o.cells;
    }
};

enum class Side { Bottom, Top, Left, Right };

inline const char* side_name(Side s) {
    switch (s) {
        case Side::Bottom: return "bottom";
        case Side::Top: return "top";
        case Side::Left: return "left";
        case Side::Right: return "right";
    }
    return "?";
}

struct Violation {
    std::string kind;  // gap | overlap | out-of-bounds | size-mismatch
    int label = 0, level = 0;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;  // at most one: validation stops early
    std::string message() const { return ok ? "ok" : violations.front().message; }
};

// Exact-cover check of every label's child placement, per level 1..depth,
// by coordinate compression of the child rectangles.
inline ValidationReport validate_rule(const FusionRule& rule, int depth) {
    ValidationReport rep;
    SizeTable sizes(rule);
    auto fail = [&](std::string kind, int label, int level, std::string msg) {
        rep.ok = false;
        rep.violations.push_back(
            {std::move(kind), label, level, std::move(msg)});
    };
    for (int level = 1; level <= depth && rep.ok; ++level) {
        const auto& child_vals = sizes.values(level - 1);
        for (int t = 0; t < static_cast<int>(rule.labels.size()) && rep.ok; ++t) {
            Int wb = sizes.width(t, level), hb = sizes.height(t, level);
            struct R { Int x0, y0, x1, y1; };
            std::vector<R> rects;
            for (std::size_t ci = 0; ci < rule.children[t].size(); ++ci) {
                const auto& p = rule.children[t][ci];
                Int x = p.x.eval(child_vals), y = p.y.eval(child_vals);
                Int w = sizes.width(p.label, level - 1), h = sizes.height(p.label, level - 1);
                if (x < 0 || y < 0 || x + w > wb || y + h > hb) {
                    fail("out-of-bounds", t, level,
                         "child " + std::to_string(ci) + " (" + rule.labels[p.label] +
                             ") of '" + rule.labels[t] + "' at level " +
                             std::to_string(level) + " lies outside [0," + wb.get_str() +
                             ")x[0," + hb.get_str() + "): corner (" + x.get_str() + "," +
                             y.get_str() + ")");
                    break;
                }
                rects.push_back({x, y, x + w, y + h});
            }
            if (!rep.ok) break;
            std::vector<Int> xs{Int(0), wb}, ys{Int(0), hb};
            for (const auto& r : rects) {
                xs.push_back(r.x0); xs.push_back(r.x1);
                ys.push_back(r.y0); ys.push_back(r.y1);
            }
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
            std::sort(ys.begin(), ys.end());
            ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
            for (std::size_t xi = 0; xi + 1 < xs.size() && rep.ok; ++xi) {
                for (std::size_t yi = 0; yi + 1 < ys.size() && rep.ok; ++yi) {
                    int count = 0, first = -1, second = -1;
                    for (std::size_t ci = 0; ci < rects.size(); ++ci) {
                        const auto& r = rects[ci];
                        if (r.x0 <= xs[xi] && xs[xi + 1] <= r.x1 && r.y0 <= ys[yi] &&
                            ys[yi + 1] <= r.y1) {
                            if (count == 0) first = static_cast<int>(ci);
                            else second = static_cast<int>(ci);
                            ++count;
                        }
                    }
                    std::string cell = "cell [" + xs[xi].get_str() + "," +
                                       xs[xi + 1].get_str() + ")x[" + ys[yi].get_str() +
                                       "," + ys[yi + 1].get_str() + ")";
                    if (count == 0)
                        fail("gap", t, level,
                             "uncovered " + cell + " in '" + rule.labels[t] +
                                 "' at level " + std::to_string(level));
                    else if (count > 1)
                        fail("overlap", t, level,
                             "children " + std::to_string(first) + " and " +
                                 std::to_string(second) + " of '" + rule.labels[t] +
                                 "' overlap on " + cell + " at level " +
                                 std::to_string(level));
                }
            }
        }
    }
    if (rule.involution && rule.involution->swap_axes) {
        for (int level = 0; level <= depth && rep.ok; ++level)
            for (int t = 0; t < static_cast<int>(rule.labels.size()) && rep.ok; ++t) {
                int u = rule.involution->perm[t];
                if (sizes.width(u, level) != sizes.height(t, level) ||
                    sizes.height(u, level) != sizes.width(t, level))
                    fail("size-mismatch", t, level,
                         "involution sends '" + rule.labels[t] + "' to '" +
                             rule.labels[u] + "' but their level-" +
                             std::to_string(level) + " sizes are not transposes");
            }
    }
    return rep;
}

class Patch {
  public:
    int label() const { return transposed_ ? perm_[label_] : label_; }
    int root_label() const { return label_; }
    int level() const { return level_; }
    std::int64_t width() const { return transposed_ ? raw_h_ : raw_w_; }
    std::int64_t height() const { return transposed_ ? raw_w_ : raw_h_; }
    const FusionRule& rule() const { return *rule_; }
    bool transposed() const { return transposed_; }

    bool operator==(const Patch& o) const {
        return label_ == o.label_ && level_ == o.level_ &&
               transposed_ == o.transposed_ && perm_ == o.perm_ &&
               *rule_ == *o.rule_;
    }

    // Visits every level-m node of the decomposition tree.
    void for_each_node(int m, const std::function<void(const TileRect&)>& fn) const {
        check_level(m);
        if (!transposed_) {
            descend(label_, level_, 0, 0, m, fn);
        } else {
            descend(label_, level_, 0, 0, m, [&](const TileRect& r) {
                fn(TileRect{perm_[r.label], r.y, r.x, r.h, r.w});
            });
        }
    }

    std::vector<TileRect> nodes_at_level(int m) const {
        std::vector<TileRect> out;
        for_each_node(m, [&](const TileRect& r) { out.push_back(r); });
        return out;
    }

    // Labels of the unit cells in [x0,x1) x [y0,y1), row-major.
    Grid sub_cells(std::int64_t x0, std::int64_t y0, std::int64_t x1,
                   std::int64_t y1) const {
        if (x0 < 0 || y0 < 0 || x1 > width() || y1 > height() || x0 >= x1 || y0 >= y1)
            throw error("cell region outside patch");
        Grid g;
        g.w = x1 - x0;
        g.h = y1 - y0;
        if (g.w * g.h > tile_budget())
            throw budget_error("cell region of " + std::to_string(g.w * g.h) +
                               " tiles exceeds budget " + std::to_string(tile_budget()));
        g.cells.assign(static_cast<std::size_t>(g.w * g.h), 0);
        auto emit = [&](const TileRect& r) {
            g.at(r.x - x0, r.y - y0) = static_cast<std::uint8_t>(r.label);
        };
        if (!transposed_) {
            descend_clipped(label_, level_, 0, 0, x0, y0, x1, y1, emit);
        } else {
            // Raw coordinates are the transpose of display coordinates.
            descend_clipped(label_, level_, 0, 0, y0, x0, y1, x1,
                            [&](const TileRect& r) {
                                emit(TileRect{perm_[r.label], r.y, r.x, 1, 1});
                            });
        }
        return g;
    }

    Grid cells() const { return sub_cells(0, 0, width(), height()); }

    // Level-m ancestor node containing unit cell (x, y); O(depth) descent.
    TileRect node_at(std::int64_t x, std::int64_t y, int m) const {
        check_level(m);
        if (x < 0 || y < 0 || x >= width() || y >= height())
            throw error("cell outside patch");
        std::int64_t rx = transposed_ ? y : x, ry = transposed_ ? x : y;
        int lab = label_;
        int lv = level_;
        std::int64_t ox = 0, oy = 0;
        while (lv > m) {
            bool found = false;
            for (const auto& [cl, dx, dy] : offsets_[lv][lab]) {
                std::int64_t cx = ox + dx, cy = oy + dy;
                auto [cw, ch] = wh_[lv - 1][cl];
                if (rx >= cx && rx < cx + cw && ry >= cy && ry < cy + ch) {
                    lab = cl;
                    ox = cx;
                    oy = cy;
                    --lv;
                    found = true;
                    break;
                }
            }
            if (!found) throw error("decomposition does not cover its supertile");
        }
        auto [w, h] = wh_[m][lab];
        TileRect r{lab, ox, oy, w, h};
        if (transposed_) r = TileRect{perm_[r.label], r.y, r.x, r.h, r.w};
        return r;
    }

    int cell_at(std::int64_t x, std::int64_t y) const { return node_at(x, y, 0).label; }

    // Level-m nodes whose closed edge lies on the given side, in order of
    // increasing coordinate along that side.
    std::vector<TileRect> boundary_word(Side side, int m) const {
        check_level(m);
        Side raw_side = side;
        if (transposed_) {
            switch (side) {
                case Side::Bottom: raw_side = Side::Left; break;
                case Side::Top: raw_side = Side::Right; break;
                case Side::Left: raw_side = Side::Bottom; break;
                case Side::Right: raw_side = Side::Top; break;
            }
        }
        std::vector<TileRect> out;
        collect_side(label_, level_, 0, 0, m, raw_side, out);
        if (transposed_)
            for (auto& r : out) r = TileRect{perm_[r.label], r.y, r.x, r.h, r.w};
        bool horizontal = side == Side::Bottom || side == Side::Top;
        std::sort(out.begin(), out.end(), [&](const TileRect& a, const TileRect& b) {
            return horizontal ? a.x < b.x : a.y < b.y;
        });
        return out;
    }

    // Transposed, label-permuted view of this patch. Applying it twice gives
    // back the original.
    Patch apply_involution() const {
        const auto& inv = rule_->involution;
        if (!inv) throw error("rule '" + rule_->name + "' declares no involution");
        if (!inv->swap_axes)
            throw error("involution of '" + rule_->name + "' does not swap axes");
        Patch p = *this;
        if (!p.transposed_) {
            p.transposed_ = true;
            p.perm_ = inv->perm;
        } else {
            p.transposed_ = false;
            std::vector<int> composed(perm_.size());
            for (std::size_t i = 0; i < perm_.size(); ++i)
                composed[i] = inv->perm[perm_[i]];
            bool identity = true;
            for (std::size_t i = 0; i < composed.size(); ++i)
                if (composed[i] != static_cast<int>(i)) identity = false;
            if (!identity)
                throw error("involution composition is not the identity");
            p.perm_ = std::move(composed);
        }
        return p;
    }

    friend Patch build_supertile(const FusionRule& rule, int label, int level,
                                 const Int& max_cells);

  private:
    std::shared_ptr<const FusionRule> rule_;
    int label_ = 0, level_ = 0;
    std::int64_t raw_w_ = 0, raw_h_ = 0;
    bool transposed_ = false;
    std::vector<int> perm_;
    // Per level: per label: (width, height) and child placements, all int64.
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> wh_;
    std::vector<std::vector<std::vector<std::tuple<int, std::int64_t, std::int64_t>>>>
        offsets_;

    void check_level(int m) const {
        if (m < 0 || m > level_)
            throw error("level " + std::to_string(m) + " outside patch levels [0," +
                        std::to_string(level_) + "]");
    }

    void descend(int lab, int lv, std::int64_t x, std::int64_t y, int m,
                 const std::function<void(const TileRect&)>& fn) const {
        if (lv == m) {
            auto [w, h] = wh_[lv][lab];
            fn(TileRect{lab, x, y, w, h});
            return;
        }
        for (const auto& [cl, dx, dy] : offsets_[lv][lab])
            descend(cl, lv - 1, x + dx, y + dy, m, fn);
    }

    void descend_clipped(int lab, int lv, std::int64_t x, std::int64_t y,
                         std::int64_t x0, std::int64_t y0, std::int64_t x1,
                         std::int64_t y1,
                         const std::function<void(const TileRect&)>& fn) const {
        auto [w, h] = wh_[lv][lab];
        if (x >= x1 || y >= y1 || x + w <= x0 || y + h <= y0) return;
        if (lv == 0) {
            fn(TileRect{lab, x, y, 1, 1});
            return;
        }
        for (const auto& [cl, dx, dy] : offsets_[lv][lab])
            descend_clipped(cl, lv - 1, x + dx, y + dy, x0, y0, x1, y1, fn);
    }

    void collect_side(int lab, int lv, std::int64_t x, std::int64_t y, int m,
                      Side side, std::vector<TileRect>& out) const {
        auto [w, h] = wh_[lv][lab];
        bool touches = false;
        switch (side) {
            case Side::Bottom: touches = y == 0; break;
            case Side::Top: touches = y + h == raw_h_; break;
            case Side::Left: touches = x == 0; break;
            case Side::Right: touches = x + w == raw_w_; break;
        }
        if (!touches) return;
        if (lv == m) {
            out.push_back(TileRect{lab, x, y, w, h});
            return;
        }
        for (const auto& [cl, dx, dy] : offsets_[lv][lab])
            collect_side(cl, lv - 1, x + dx, y + dy, m, side, out);
    }
};

// The patch itself is a lazy tree; max_cells bounds the total area so callers
// that will materialize cells fail fast. Pass a larger limit to navigate big
// supertiles without building them (sub_cells still budgets each query).
inline Patch build_supertile(const FusionRule& rule, int label, int level,
                             const Int& max_cells) {
    if (label < 0 || label >= static_cast<int>(rule.labels.size()))
        throw error("no such tile label id " + std::to_string(label));
    if (level < 0) throw error("negative fusion level");
    SizeTable sizes(rule);
    Int area = sizes.area(label, level);
    if (area > max_cells)
        throw budget_error("supertile of " + area.get_str() +
                           " tiles exceeds budget " + max_cells.get_str());
    Patch p;
    p.rule_ = std::make_shared<FusionRule>(rule);
    p.label_ = label;
    p.level_ = level;
    p.perm_.resize(rule.labels.size());
    for (std::size_t i = 0; i < p.perm_.size(); ++i) p.perm_[i] = static_cast<int>(i);
    int nl = static_cast<int>(rule.labels.size());
    p.wh_.resize(level + 1);
    p.offsets_.resize(level + 1);
    for (int lv = 0; lv <= level; ++lv) {
        p.wh_[lv].resize(nl);
        for (int t = 0; t < nl; ++t)
            p.wh_[lv][t] = {to_i64(sizes.width(t, lv)), to_i64(sizes.height(t, lv))};
        p.offsets_[lv].resize(nl);
        if (lv == 0) continue;
        const auto& vals = sizes.values(lv - 1);
        for (int t = 0; t < nl; ++t)
            for (const auto& c : rule.children[t])
                p.offsets_[lv][t].emplace_back(c.label, to_i64(c.x.eval(vals)),
                                               to_i64(c.y.eval(vals)));
    }
    p.raw_w_ = p.wh_[level][label].first;
    p.raw_h_ = p.wh_[level][label].second;
    return p;
}

inline Patch build_supertile(const FusionRule& rule, int label, int level) {
    return build_supertile(rule, label, level, tile_budget());
}

inline Patch build_supertile(const FusionRule& rule, const std::string& label,
                             int level) {
    int id = rule.label_id(label);
    if (id < 0) throw error("undeclared tile label '" + label + "'");
    return build_supertile(rule, id, level);
}

inline std::string word_string(const FusionRule& rule,
                               const std::vector<TileRect>& word) {
    std::string s;
    for (const auto& r : word) s += rule.labels[r.label];
    return s;
}

}  // namespace tilescope
