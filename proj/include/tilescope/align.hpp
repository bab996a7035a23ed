#pragma once

// Alignment graphs over the level-m supertiles of a patch. Two neighbours
// are joined when the wall they share comes with a flush pair of edge lines:
// horizontal neighbours need collinear bottoms or collinear tops, vertical
// neighbours collinear lefts or collinear rights. Paths through the graph
// induce lattice paths that hug supertile walls, which makes them safe
// integration contours for edge cochains.

#include <algorithm>
#include <cstdint>
#include <future>
#include <map>
#include <thread>
#include <utility>
#include <vector>

#include <tilescope/patch.hpp>
#include <tilescope/spectra.hpp>

namespace tilescope {

using AlignmentNode = TileRect;

struct AlignmentEdge {
    std::int32_t from = 0;
    std::int32_t to = 0;
    Side side = Side::Right;  // side of `from` that faces `to`
    bool flush_low = false;   // bottoms (horizontal) or lefts (vertical) collinear
    bool flush_high = false;  // tops (horizontal) or rights (vertical) collinear
};

struct AlignmentGraph {
    int m = 0;
    std::int64_t patch_w = 0;
    std::int64_t patch_h = 0;
    std::vector<AlignmentNode> nodes;
    // Forward edges (right and top neighbours of each node, in node order)
    // followed by their mirrors, so undirected edge count is edges.size()/2.
    std::vector<AlignmentEdge> edges;
    std::vector<std::int64_t> adj_off;   // CSR offsets, nodes.size() + 1 entries
    std::vector<std::int32_t> adj_edge;  // edge indices grouped by source node
};

namespace detail {

inline void emit_alignment_edges(const std::vector<AlignmentNode>& nodes,
                                 const std::vector<std::int32_t>& by_left,
                                 const std::vector<std::int32_t>& by_bottom,
                                 std::int64_t reach, std::int32_t lo, std::int32_t hi,
                                 std::vector<AlignmentEdge>& out) {
    auto left_key = [&](std::int32_t i) {
        return std::pair<std::int64_t, std::int64_t>(nodes[i].x, nodes[i].y);
    };
    auto bottom_key = [&](std::int32_t i) {
        return std::pair<std::int64_t, std::int64_t>(nodes[i].y, nodes[i].x);
    };
    for (std::int32_t i = lo; i < hi; ++i) {
        const AlignmentNode& a = nodes[i];
        auto it = std::lower_bound(
            by_left.begin(), by_left.end(),
            std::pair<std::int64_t, std::int64_t>(a.x + a.w, a.y - reach),
            [&](std::int32_t j, const std::pair<std::int64_t, std::int64_t>& k) {
                return left_key(j) < k;
            });
        for (; it != by_left.end(); ++it) {
            const AlignmentNode& b = nodes[*it];
            if (b.x != a.x + a.w || b.y >= a.y + a.h) break;
            if (b.y + b.h <= a.y) continue;
            bool low = b.y == a.y;
            bool high = b.y + b.h == a.y + a.h;
            if (low || high) out.push_back({i, *it, Side::Right, low, high});
        }
        auto jt = std::lower_bound(
            by_bottom.begin(), by_bottom.end(),
            std::pair<std::int64_t, std::int64_t>(a.y + a.h, a.x - reach),
            [&](std::int32_t j, const std::pair<std::int64_t, std::int64_t>& k) {
                return bottom_key(j) < k;
            });
        for (; jt != by_bottom.end(); ++jt) {
            const AlignmentNode& b = nodes[*jt];
            if (b.y != a.y + a.h || b.x >= a.x + a.w) break;
            if (b.x + b.w <= a.x) continue;
            bool low = b.x == a.x;
            bool high = b.x + b.w == a.x + a.w;
            if (low || high) out.push_back({i, *jt, Side::Top, low, high});
        }
    }
}

}  // namespace detail

inline AlignmentGraph alignment_graph(const Patch& patch, int m) {
    AlignmentGraph g;
    g.m = m;
    g.patch_w = patch.width();
    g.patch_h = patch.height();
    g.nodes = patch.nodes_at_level(m);
    std::int32_t n = static_cast<std::int32_t>(g.nodes.size());

    std::vector<std::int32_t> by_left(n), by_bottom(n);
    for (std::int32_t i = 0; i < n; ++i) by_left[i] = by_bottom[i] = i;
    std::sort(by_left.begin(), by_left.end(), [&](std::int32_t i, std::int32_t j) {
        const auto &a = g.nodes[i], &b = g.nodes[j];
        return std::tie(a.x, a.y, i) < std::tie(b.x, b.y, j);
    });
    std::sort(by_bottom.begin(), by_bottom.end(), [&](std::int32_t i, std::int32_t j) {
        const auto &a = g.nodes[i], &b = g.nodes[j];
        return std::tie(a.y, a.x, i) < std::tie(b.y, b.x, j);
    });
    std::int64_t reach = 1;
    for (const auto& t : g.nodes) reach = std::max({reach, t.w, t.h});

    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (n < 20000 || workers == 1) {
        detail::emit_alignment_edges(g.nodes, by_left, by_bottom, reach, 0, n, g.edges);
    } else {
        std::int32_t chunk = (n + static_cast<std::int32_t>(workers) - 1) /
                             static_cast<std::int32_t>(workers);
        std::vector<std::future<std::vector<AlignmentEdge>>> parts;
        for (std::int32_t lo = 0; lo < n; lo += chunk)
            parts.push_back(std::async(std::launch::async, [&, lo] {
                std::vector<AlignmentEdge> part;
                detail::emit_alignment_edges(g.nodes, by_left, by_bottom, reach, lo,
                                             std::min(lo + chunk, n), part);
                return part;
            }));
        for (auto& p : parts) {
            auto part = p.get();
            g.edges.insert(g.edges.end(), part.begin(), part.end());
        }
    }

    std::size_t forward = g.edges.size();
    g.edges.reserve(2 * forward);
    for (std::size_t k = 0; k < forward; ++k) {
        AlignmentEdge e = g.edges[k];
        std::swap(e.from, e.to);
        e.side = e.side == Side::Right ? Side::Left : Side::Bottom;
        g.edges.push_back(e);
    }

    g.adj_off.assign(n + 1, 0);
    for (const auto& e : g.edges) ++g.adj_off[e.from + 1];
    for (std::int32_t i = 0; i < n; ++i) g.adj_off[i + 1] += g.adj_off[i];
    g.adj_edge.resize(g.edges.size());
    std::vector<std::int64_t> fill(g.adj_off.begin(), g.adj_off.end() - 1);
    for (std::size_t k = 0; k < g.edges.size(); ++k)
        g.adj_edge[fill[g.edges[k].from]++] = static_cast<std::int32_t>(k);
    return g;
}

struct ConnectivityReport {
    bool is_connected = true;
    int components = 0;
    std::vector<std::int32_t> component_of;
};

inline ConnectivityReport connectivity(const AlignmentGraph& g) {
    ConnectivityReport r;
    std::int32_t n = static_cast<std::int32_t>(g.nodes.size());
    r.component_of.assign(n, -1);
    std::vector<std::int32_t> queue;
    for (std::int32_t seed = 0; seed < n; ++seed) {
        if (r.component_of[seed] >= 0) continue;
        std::int32_t id = r.components++;
        queue.assign(1, seed);
        r.component_of[seed] = id;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            std::int32_t v = queue[head];
            for (std::int64_t k = g.adj_off[v]; k < g.adj_off[v + 1]; ++k) {
                std::int32_t u = g.edges[g.adj_edge[k]].to;
                if (r.component_of[u] >= 0) continue;
                r.component_of[u] = id;
                queue.push_back(u);
            }
        }
    }
    r.is_connected = r.components <= 1;
    return r;
}

struct AlignedPath {
    bool found = false;
    std::vector<std::int32_t> nodes;
    std::vector<Side> sides;  // one per step, the side tag of the edge taken
    std::vector<Vec2> lattice;  // unit steps between lower-left corners
};

namespace detail {

inline void append_axis_walk(std::vector<Vec2>& path, Vec2 to) {
    Vec2 cur = path.back();
    std::int64_t sx = to.first > cur.first ? 1 : -1;
    while (cur.first != to.first) {
        cur.first += sx;
        path.push_back(cur);
    }
    std::int64_t sy = to.second > cur.second ? 1 : -1;
    while (cur.second != to.second) {
        cur.second += sy;
        path.push_back(cur);
    }
}

// Extends a wall-hugging lattice path from a's lower-left corner to b's.
// Every leg runs along a wall of a or of b, so the path never leaves their
// union.
inline void append_alignment_step(std::vector<Vec2>& path, const AlignmentNode& a,
                                  const AlignmentNode& b, const AlignmentEdge& e) {
    bool horizontal = e.side == Side::Right || e.side == Side::Left;
    if (horizontal) {
        if (e.flush_low) {
            append_axis_walk(path, {b.x, b.y});
        } else {
            append_axis_walk(path, {a.x, a.y + a.h});
            append_axis_walk(path, {b.x, b.y + b.h});
            append_axis_walk(path, {b.x, b.y});
        }
    } else {
        if (e.flush_low) {
            append_axis_walk(path, {b.x, b.y});
        } else {
            append_axis_walk(path, {a.x + a.w, a.y});
            append_axis_walk(path, {b.x + b.w, b.y});
            append_axis_walk(path, {b.x, b.y});
        }
    }
}

}  // namespace detail

inline AlignedPath aligned_path(const AlignmentGraph& g, std::int32_t source,
                                std::int32_t target) {
    std::int32_t n = static_cast<std::int32_t>(g.nodes.size());
    if (source < 0 || source >= n || target < 0 || target >= n)
        throw error("path endpoint outside the graph");
    AlignedPath out;
    if (source == target) {
        out.found = true;
        out.nodes = {source};
        out.lattice = {{g.nodes[source].x, g.nodes[source].y}};
        return out;
    }
    std::vector<std::int32_t> via(n, -1);  // edge used to discover each node
    std::vector<std::int32_t> queue{source};
    via[source] = -2;
    for (std::size_t head = 0; head < queue.size() && via[target] == -1; ++head) {
        std::int32_t v = queue[head];
        for (std::int64_t k = g.adj_off[v]; k < g.adj_off[v + 1]; ++k) {
            std::int32_t idx = g.adj_edge[k];
            std::int32_t u = g.edges[idx].to;
            if (via[u] != -1) continue;
            via[u] = idx;
            queue.push_back(u);
            if (u == target) break;
        }
    }
    if (via[target] == -1) return out;  // disconnected, reported not thrown

    std::vector<std::int32_t> steps;
    for (std::int32_t v = target; v != source; v = g.edges[via[v]].from)
        steps.push_back(via[v]);
    std::reverse(steps.begin(), steps.end());

    out.found = true;
    out.nodes.push_back(source);
    out.lattice.push_back({g.nodes[source].x, g.nodes[source].y});
    for (std::int32_t idx : steps) {
        const AlignmentEdge& e = g.edges[idx];
        detail::append_alignment_step(out.lattice, g.nodes[e.from], g.nodes[e.to], e);
        out.nodes.push_back(e.to);
        out.sides.push_back(e.side);
    }
    return out;
}

struct DisplacementReport {
    bool holds = false;
    Rat integral = 0;
    Rat expected = 0;
    Vec2 from{0, 0};
    Vec2 to{0, 0};
};

inline DisplacementReport displacement_identity_check(const CochainSpec& c,
                                                      const Patch& patch,
                                                      const AlignmentGraph& g,
                                                      const AlignedPath& path,
                                                      const Rat& mu, const Rat& nu) {
    if (!path.found || path.nodes.empty())
        throw error("displacement check needs a realised path");
    const AlignmentNode& s = g.nodes[path.nodes.front()];
    const AlignmentNode& t = g.nodes[path.nodes.back()];
    if (s.label != t.label)
        throw error("displacement endpoints must carry the same label");
    DisplacementReport r;
    r.from = {s.x, s.y};
    r.to = {t.x, t.y};
    r.integral = integrate(c, patch, path.lattice);
    r.expected = mu * Rat(from_i64(t.x - s.x)) + nu * Rat(from_i64(t.y - s.y));
    r.holds = r.integral == r.expected;
    return r;
}

inline DisplacementReport displacement_identity_check(const CochainSpec& c,
                                                      const Patch& patch,
                                                      const AlignmentGraph& g,
                                                      const AlignedPath& path) {
    switch (c.kind) {
        case CochainKind::ConstantDx:
            return displacement_identity_check(c, patch, g, path, 1, 0);
        case CochainKind::ConstantDy:
            return displacement_identity_check(c, patch, g, path, 0, 1);
        case CochainKind::Scalar:
            return displacement_identity_check(c, patch, g, path, c.mu, c.nu);
        default:
            throw error("cochain does not declare a slope pair");
    }
}

struct DisplacementViolation {
    std::int32_t a = 0;
    std::int32_t b = 0;
    Rat integral = 0;
    Rat expected = 0;
    bool direct_path = false;
};

struct DisplacementSurvey {
    bool holds = true;
    std::int64_t pairs_checked = 0;
    std::int64_t pairs_skipped = 0;
    std::int64_t direct_paths_checked = 0;
    std::vector<DisplacementViolation> violations;  // capped at 16
};

// Checks integral(path a -> b) == mu*(bx-ax) + nu*(by-ay) for every pair of
// same-label nodes. Each pair is compared through potentials along a breadth
// first forest; a forest route is itself an aligned path, and reversing an
// edge negates its value, so the potential difference is the integral along
// it. Every direct_stride-th pair is additionally integrated along an
// independent shortest path. Pairs whose forest route leaves the cochain's
// evaluable region are counted as skipped.
inline DisplacementSurvey displacement_survey(const CochainSpec& c, const Patch& patch,
                                              const AlignmentGraph& g, const Rat& mu,
                                              const Rat& nu,
                                              std::int64_t direct_stride = 37) {
    DisplacementSurvey out;
    std::int32_t n = static_cast<std::int32_t>(g.nodes.size());
    std::vector<std::int32_t> component(n, -1);
    std::vector<Rat> pot(n, Rat(0));
    std::vector<char> known(n, 0);

    std::int32_t comps = 0;
    std::vector<std::int32_t> queue;
    for (std::int32_t seed = 0; seed < n; ++seed) {
        if (component[seed] >= 0) continue;
        std::int32_t id = comps++;
        component[seed] = id;
        known[seed] = 1;
        queue.assign(1, seed);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            std::int32_t v = queue[head];
            for (std::int64_t k = g.adj_off[v]; k < g.adj_off[v + 1]; ++k) {
                const AlignmentEdge& e = g.edges[g.adj_edge[k]];
                std::int32_t u = e.to;
                if (component[u] >= 0) continue;
                component[u] = id;
                queue.push_back(u);
                if (!known[v]) continue;
                std::vector<Vec2> seg{{g.nodes[v].x, g.nodes[v].y}};
                detail::append_alignment_step(seg, g.nodes[v], g.nodes[u], e);
                try {
                    pot[u] = pot[v] + integrate(c, patch, seg);
                    known[u] = 1;
                } catch (const error&) {
                }
            }
        }
    }

    // With dev[i] = pot[i] - mu*x_i - nu*y_i, the pair identity is exactly
    // dev equality, which keeps the quadratic sweep cheap.
    std::vector<Rat> dev(n, Rat(0));
    for (std::int32_t i = 0; i < n; ++i)
        if (known[i])
            dev[i] = pot[i] - mu * Rat(from_i64(g.nodes[i].x)) -
                     nu * Rat(from_i64(g.nodes[i].y));

    std::map<int, std::vector<std::int32_t>> by_label;
    for (std::int32_t i = 0; i < n; ++i) by_label[g.nodes[i].label].push_back(i);

    for (const auto& [label, group] : by_label) {
        (void)label;
        for (std::size_t s = 0; s < group.size(); ++s)
            for (std::size_t t = s + 1; t < group.size(); ++t) {
                std::int32_t a = group[s], b = group[t];
                if (component[a] != component[b]) continue;
                if (!known[a] || !known[b]) {
                    ++out.pairs_skipped;
                    continue;
                }
                ++out.pairs_checked;
                if (dev[a] != dev[b]) {
                    out.holds = false;
                    if (out.violations.size() < 16) {
                        Rat expected =
                            mu * Rat(from_i64(g.nodes[b].x - g.nodes[a].x)) +
                            nu * Rat(from_i64(g.nodes[b].y - g.nodes[a].y));
                        out.violations.push_back({a, b, pot[b] - pot[a], expected, false});
                    }
                }
                if (direct_stride > 0 && out.pairs_checked % direct_stride == 0) {
                    auto path = aligned_path(g, a, b);
                    try {
                        auto rep = displacement_identity_check(c, patch, g, path, mu, nu);
                        ++out.direct_paths_checked;
                        if (!rep.holds) {
                            out.holds = false;
                            if (out.violations.size() < 16)
                                out.violations.push_back(
                                    {a, b, rep.integral, rep.expected, true});
                        }
                    } catch (const error&) {
                    }
                }
            }
    }
    return out;
}

}  // namespace tilescope
