#pragma once

// One-dimensional substitutions on the boundary alphabet of a fusion rule:
// iteration, abelianization, the two-letter language, and the stabilized
// boundary adjacency graph.

#include <tilescope/core.hpp>
#include <tilescope/linalg.hpp>
#include <tilescope/patch.hpp>
#include <tilescope/rule.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tilescope {

struct Substitution1D {
    std::vector<std::string> alphabet;
    std::vector<std::vector<int>> image;  // per letter
    std::vector<Int> lengths;             // per letter, at the reference level

    int letter_id(const std::string& s) const {
        for (std::size_t i = 0; i < alphabet.size(); ++i)
            if (alphabet[i] == s) return static_cast<int>(i);
        return -1;
    }

    std::string word_str(const std::vector<int>& w) const {
        std::string s;
        for (int l : w) s += alphabet[l];
        return s;
    }

    std::vector<int> word_of(const std::string& s) const {
        std::vector<int> w;
        for (char c : s) {
            int id = letter_id(std::string(1, c));
            if (id < 0) throw error("unknown letter '" + std::string(1, c) + "'");
            w.push_back(id);
        }
        return w;
    }

    bool operator==(const Substitution1D& o) const {
        return alphabet == o.alphabet && image == o.image && lengths == o.lengths;
    }
};

// Reads the substitution induced on one boundary of the rule's supertiles:
// the level-0 word along the given side of P_1(t), per label t.
inline Substitution1D subst_from_rule(const FusionRule& rule, Side side,
                                      int length_level = 0) {
    Substitution1D s;
    s.alphabet = rule.labels;
    SizeTable sizes(rule);
    bool horizontal = side == Side::Bottom || side == Side::Top;
    for (int t = 0; t < static_cast<int>(rule.labels.size()); ++t) {
        Patch p = build_supertile(rule, t, 1);
        std::vector<int> img;
        for (const auto& r : p.boundary_word(side, 0)) img.push_back(r.label);
        s.image.push_back(std::move(img));
        s.lengths.push_back(horizontal ? sizes.width(t, length_level)
                                       : sizes.height(t, length_level));
    }
    return s;
}

inline std::vector<int> iterate(const Substitution1D& s, std::vector<int> word, int k,
                                std::int64_t length_budget = 20'000'000) {
    for (int step = 0; step < k; ++step) {
        std::int64_t next_len = 0;
        for (int l : word) next_len += static_cast<std::int64_t>(s.image[l].size());
        if (next_len > length_budget)
            throw budget_error("iterated word of " + std::to_string(next_len) +
                               " letters exceeds budget " +
                               std::to_string(length_budget));
        std::vector<int> next;
        next.reserve(static_cast<std::size_t>(next_len));
        for (int l : word)
            next.insert(next.end(), s.image[l].begin(), s.image[l].end());
        word = std::move(next);
    }
    return word;
}

// Column j counts the letters of the image of letter j.
inline IntMat abelianization(const Substitution1D& s) {
    int n = static_cast<int>(s.alphabet.size());
    IntMat a(n, n);
    for (int j = 0; j < n; ++j)
        for (int l : s.image[j]) a.at(l, j) += 1;
    return a;
}

// Least set of two-letter factors containing the interior pairs of every
// image of a letter reachable from the seed, closed under taking the
// junction pair of the images of a known pair.
inline std::set<std::pair<int, int>> two_letter_words(const Substitution1D& s,
                                                      int seed) {
    int n = static_cast<int>(s.alphabet.size());
    if (seed < 0 || seed >= n) throw error("seed letter out of range");
    std::vector<bool> reach(n, false);
    std::vector<int> queue{seed};
    reach[seed] = true;
    while (!queue.empty()) {
        int t = queue.back();
        queue.pop_back();
        for (int l : s.image[t])
            if (!reach[l]) { reach[l] = true; queue.push_back(l); }
    }
    std::set<std::pair<int, int>> pairs;
    for (int t = 0; t < n; ++t) {
        if (!reach[t]) continue;
        const auto& img = s.image[t];
        for (std::size_t i = 0; i + 1 < img.size(); ++i)
            pairs.insert({img[i], img[i + 1]});
    }
    bool grew = true;
    while (grew) {
        grew = false;
        for (auto [x, y] : std::vector<std::pair<int, int>>(pairs.begin(), pairs.end())) {
            if (s.image[x].empty() || s.image[y].empty())
                throw error("substitution has an empty image");
            std::pair<int, int> junction{s.image[x].back(), s.image[y].front()};
            if (pairs.insert(junction).second) grew = true;
        }
    }
    return pairs;
}

// Letter maps x -> last letter of the image, x -> first letter.
inline std::vector<int> final_letter_map(const Substitution1D& s) {
    std::vector<int> f;
    for (const auto& img : s.image) {
        if (img.empty()) throw error("substitution has an empty image");
        f.push_back(img.back());
    }
    return f;
}

inline std::vector<int> first_letter_map(const Substitution1D& s) {
    std::vector<int> g;
    for (const auto& img : s.image) {
        if (img.empty()) throw error("substitution has an empty image");
        g.push_back(img.front());
    }
    return g;
}

// Edges of the order-n boundary graph: for every legal pair xy, the pair
// (last letter of the n-fold image of x, first letter of the n-fold image
// of y).
inline std::set<std::pair<int, int>> bd_adjacencies(const Substitution1D& s, int n,
                                                    int seed = 0) {
    auto pairs = two_letter_words(s, seed);
    auto f = final_letter_map(s), g = first_letter_map(s);
    std::set<std::pair<int, int>> edges;
    for (auto [x, y] : pairs) {
        int u = x, v = y;
        for (int i = 0; i < n; ++i) { u = f[u]; v = g[v]; }
        edges.insert({u, v});
    }
    return edges;
}

struct BdGraph {
    int order = 0;  // least n >= 1 with the order-n and order-(n+1) edges equal
    std::set<std::pair<int, int>> edges;
};

inline BdGraph bd_stabilize(const Substitution1D& s, int seed = 0, int max_n = 200) {
    if (two_letter_words(s, seed).empty())
        throw error("two-letter language is empty; the boundary graph is undefined");
    auto prev = bd_adjacencies(s, 1, seed);
    for (int n = 1; n <= max_n; ++n) {
        auto next = bd_adjacencies(s, n + 1, seed);
        if (next == prev) return BdGraph{n, std::move(prev)};
        prev = std::move(next);
    }
    throw error("boundary graph did not stabilize within " + std::to_string(max_n) +
                " orders");
}

}  // namespace tilescope
