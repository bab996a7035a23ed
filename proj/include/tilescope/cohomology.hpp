#pragma once

// First-cohomology bookkeeping for a 1D substitution via its stabilized
// boundary graph: stable rank of the abelianization, cycle-space data of the
// graph, the induced map on cycles, and the count of contracting directions.

#include <tilescope/core.hpp>
#include <tilescope/linalg.hpp>
#include <tilescope/roots.hpp>
#include <tilescope/subst.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace tilescope {

struct H1Report {
    IntMat abelianization;
    std::vector<Int> char_poly_coeffs;   // ascending, monic
    std::vector<Root> eigenvalues;       // of the abelianization
    int stable_rank = 0;                 // rank of A^(alphabet size)
    BdGraph bd;                          // stabilized boundary graph
    int components = 0;
    int cycle_rank = 0;                  // edges - vertices + components
    std::vector<Root> cycle_eigenvalues; // of the induced map on cycles
    int h1_rank = 0;                     // stable_rank + cycle_rank - (components - 1)
    int an_dim = 0;                      // directions with |eigenvalue| < 1
};

namespace detail {

// True when the root is certainly inside the open unit disc. Roots whose
// modulus is within the certified bound of 1 are treated as on the circle.
inline bool strictly_inside_unit_disc(const Root& r) {
    if (r.is_exact) {
        Rat q = r.exact;
        return q > -1 && q < 1;
    }
    double mod = std::abs(r.value);
    return mod + 10 * r.bound < 1.0;
}

}  // namespace detail

inline H1Report h1_report(const Substitution1D& s, int seed = 0,
                          double root_bound = 1e-10) {
    H1Report rep;
    rep.abelianization = abelianization(s);
    rep.char_poly_coeffs = char_poly(rep.abelianization);
    rep.eigenvalues = poly_roots(rep.char_poly_coeffs, root_bound);
    int n = static_cast<int>(s.alphabet.size());
    rep.stable_rank = rank_bareiss(mat_pow(rep.abelianization,
                                           static_cast<unsigned long>(n)));
    rep.bd = bd_stabilize(s, seed);

    // The boundary graph is bipartite: final letters on the left, first
    // letters on the right. Connectivity and cycle rank come from the
    // undirected graph; the induced map acts edge to edge.
    std::set<int> left, right;
    for (auto [u, v] : rep.bd.edges) { left.insert(u); right.insert(v); }
    std::map<int, int> lid, rid;
    int vid = 0;
    for (int u : left) lid[u] = vid++;
    for (int v : right) rid[v] = vid++;
    int verts = vid;
    std::vector<std::pair<int, int>> edges(rep.bd.edges.begin(), rep.bd.edges.end());
    int ecount = static_cast<int>(edges.size());

    std::vector<int> parent(verts);
    for (int i = 0; i < verts; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [u, v] : edges) {
        int a = find(lid[u]), b = find(rid[v]);
        if (a != b) parent[a] = b;
    }
    std::set<int> roots_of_comp;
    for (int i = 0; i < verts; ++i) roots_of_comp.insert(find(i));
    rep.components = static_cast<int>(roots_of_comp.size());
    rep.cycle_rank = ecount - verts + rep.components;

    if (rep.cycle_rank > 0) {
        // Edges oriented from their left (final-letter) vertex to their right
        // (first-letter) vertex; the induced map preserves this orientation.
        RatMat boundary(verts, std::vector<Rat>(ecount));
        for (int e = 0; e < ecount; ++e) {
            boundary[rid[edges[e].second]][e] += 1;
            boundary[lid[edges[e].first]][e] -= 1;
        }
        RatMat cycle_basis_cols = nullspace(boundary);  // rows are basis vectors
        int z = static_cast<int>(cycle_basis_cols.size());
        RatMat b(ecount, std::vector<Rat>(z));
        for (int j = 0; j < z; ++j)
            for (int e = 0; e < ecount; ++e) b[e][j] = cycle_basis_cols[j][e];
        auto f = final_letter_map(s), g = first_letter_map(s);
        std::map<std::pair<int, int>, int> eid;
        for (int e = 0; e < ecount; ++e) eid[edges[e]] = e;
        RatMat fb(ecount, std::vector<Rat>(z));
        for (int e = 0; e < ecount; ++e) {
            std::pair<int, int> img{f[edges[e].first], g[edges[e].second]};
            auto it = eid.find(img);
            if (it == eid.end())
                throw error("induced edge map leaves the stabilized graph");
            for (int j = 0; j < z; ++j) fb[it->second][j] += b[e][j];
        }
        RatMat lambda = solve_columns(b, fb);
        rep.cycle_eigenvalues = poly_roots(char_poly_rat(lambda), root_bound);
    }

    rep.h1_rank = rep.stable_rank + rep.cycle_rank - (rep.components - 1);

    rep.an_dim = 0;
    for (const auto& r : rep.eigenvalues) {
        bool zero = r.is_exact && r.exact == 0;
        if (!zero && detail::strictly_inside_unit_disc(r)) rep.an_dim += r.multiplicity;
    }
    for (const auto& r : rep.cycle_eigenvalues)
        if (detail::strictly_inside_unit_disc(r)) rep.an_dim += r.multiplicity;
    return rep;
}

}  // namespace tilescope
