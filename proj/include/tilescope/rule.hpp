#pragma once

// Fusion rule files: a line-oriented format declaring tile labels, length
// symbols with their recurrence, per-label sizes, child placements, and an
// optional axis-swapping label involution.

#include <tilescope/core.hpp>

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace tilescope {

// Integer linear combination of the rule's length symbols plus a constant.
struct LinExpr {
    std::vector<Int> coeff;
    Int constant = 0;

    Int eval(const std::vector<Int>& values) const {
        Int acc = constant;
        for (std::size_t i = 0; i < coeff.size(); ++i)
            if (coeff[i] != 0) acc += coeff[i] * values[i];
        return acc;
    }

    bool operator==(const LinExpr& o) const {
        return coeff == o.coeff && constant == o.constant;
    }
};

struct ChildPlacement {
    int label = 0;
    LinExpr x, y;
    bool operator==(const ChildPlacement& o) const {
        return label == o.label && x == o.x && y == o.y;
    }
};

struct Involution {
    bool swap_axes = false;
    std::vector<int> perm;
    bool operator==(const Involution& o) const {
        return swap_axes == o.swap_axes && perm == o.perm;
    }
};

struct FusionRule {
    std::string name;
    std::vector<std::string> labels;
    std::vector<std::string> symbols;
    std::vector<Int> init;                          // per symbol
    std::vector<LinExpr> recurrence;                // per symbol
    std::vector<int> width_sym, height_sym;         // per label
    std::vector<std::vector<ChildPlacement>> children;  // per label
    std::optional<Involution> involution;

    int label_id(const std::string& s) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == s) return static_cast<int>(i);
        return -1;
    }

    int symbol_id(const std::string& s) const {
        for (std::size_t i = 0; i < symbols.size(); ++i)
            if (symbols[i] == s) return static_cast<int>(i);
        return -1;
    }

    int inv_label(int t) const {
        if (!involution) throw error("rule '" + name + "' declares no involution");
        return involution->perm[t];
    }

    bool operator==(const FusionRule& o) const {
        return labels == o.labels && symbols == o.symbols && init == o.init &&
               recurrence == o.recurrence && width_sym == o.width_sym &&
               height_sym == o.height_sym && children == o.children &&
               involution == o.involution;
    }
};

namespace detail {

struct Token {
    enum Kind { Ident, Number, Punct, End } kind = End;
    std::string text;
    Int value;
};

class LineLexer {
  public:
    LineLexer(const std::string& s, int line) : line_(line) {
        std::size_t i = 0;
        while (i < s.size()) {
            char c = s[i];
            if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
            Token t;
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t j = i;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                t.kind = Token::Number;
                t.text = s.substr(i, j - i);
                t.value = Int(t.text);
                i = j;
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t j = i;
                while (j < s.size() &&
                       (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
                    ++j;
                t.kind = Token::Ident;
                t.text = s.substr(i, j - i);
                i = j;
            } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
                t.kind = Token::Punct;
                t.text = "->";
                i += 2;
            } else {
                t.kind = Token::Punct;
                t.text = std::string(1, c);
                ++i;
            }
            toks_.push_back(std::move(t));
        }
    }

    const Token& peek() const {
        static Token end_tok;
        return pos_ < toks_.size() ? toks_[pos_] : end_tok;
    }

    Token next() {
        Token t = peek();
        if (pos_ < toks_.size()) ++pos_;
        return t;
    }

    bool at_end() const { return pos_ >= toks_.size(); }

    bool accept_punct(const std::string& p) {
        if (peek().kind == Token::Punct && peek().text == p) { next(); return true; }
        return false;
    }

    void expect_punct(const std::string& p) {
        if (!accept_punct(p)) fail("expected '" + p + "'");
    }

    std::string expect_ident(const std::string& what) {
        if (peek().kind != Token::Ident) fail("expected " + what);
        return next().text;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string got = at_end() ? "end of line" : "'" + peek().text + "'";
        throw parse_error(msg + ", got " + got, line_);
    }

    int line() const { return line_; }

  private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int line_ = 0;
};

inline LinExpr parse_lin_expr(LineLexer& lex, const FusionRule& rule) {
    LinExpr e;
    e.coeff.assign(rule.symbols.size(), Int(0));
    bool first = true;
    while (true) {
        int sign = 1;
        if (lex.accept_punct("-")) sign = -1;
        else if (lex.accept_punct("+")) sign = 1;
        else if (!first) break;
        const Token& t = lex.peek();
        if (t.kind == Token::Number) {
            Int n = lex.next().value;
            if (lex.peek().kind == Token::Ident) {
                std::string sym = lex.next().text;
                int id = rule.symbol_id(sym);
                if (id < 0) lex.fail("unknown length symbol '" + sym + "'");
                e.coeff[id] += sign * n;
            } else {
                e.constant += sign * n;
            }
        } else if (t.kind == Token::Ident) {
            std::string sym = lex.next().text;
            int id = rule.symbol_id(sym);
            if (id < 0) lex.fail("unknown length symbol '" + sym + "'");
            e.coeff[id] += sign;
        } else {
            lex.fail("expected a term");
        }
        first = false;
    }
    return e;
}

inline bool is_blank(const std::string& s) {
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace detail

inline FusionRule parse_rule(const std::string& text, const std::string& name = "inline") {
    using detail::LineLexer;
    FusionRule rule;
    rule.name = name;

    bool saw_tiles = false, saw_lengths = false, saw_init = false, saw_rec = false;
    std::vector<bool> saw_size, saw_block;
    int current_block = -1;  // label whose child list is being filled

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string s = raw;
        if (auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
        if (detail::is_blank(s)) continue;
        bool indented = std::isspace(static_cast<unsigned char>(s[0])) != 0;

        if (indented) {
            if (current_block < 0)
                throw parse_error("indented line outside a rule block", line_no);
            LineLexer lex(s, line_no);
            std::string child = lex.expect_ident("a tile label");
            int cid = rule.label_id(child);
            if (cid < 0)
                throw parse_error("undeclared tile label '" + child + "'", line_no);
            if (lex.expect_ident("'at'") != "at") lex.fail("expected 'at'");
            lex.expect_punct("(");
            ChildPlacement p;
            p.label = cid;
            p.x = detail::parse_lin_expr(lex, rule);
            lex.expect_punct(",");
            p.y = detail::parse_lin_expr(lex, rule);
            lex.expect_punct(")");
            if (!lex.at_end()) lex.fail("trailing tokens after placement");
            rule.children[current_block].push_back(std::move(p));
            continue;
        }

        current_block = -1;
        LineLexer lex(s, line_no);
        std::string head = lex.expect_ident("a section keyword");

        if (head == "tiles") {
            lex.expect_punct(":");
            if (saw_tiles) throw parse_error("duplicate 'tiles' section", line_no);
            saw_tiles = true;
            while (!lex.at_end()) {
                std::string l = lex.expect_ident("a tile label");
                if (rule.label_id(l) >= 0)
                    throw parse_error("duplicate tile label '" + l + "'", line_no);
                rule.labels.push_back(l);
            }
            if (rule.labels.empty()) throw parse_error("'tiles' lists no labels", line_no);
            saw_size.assign(rule.labels.size(), false);
            saw_block.assign(rule.labels.size(), false);
            rule.width_sym.assign(rule.labels.size(), -1);
            rule.height_sym.assign(rule.labels.size(), -1);
            rule.children.assign(rule.labels.size(), {});
        } else if (head == "lengths") {
            lex.expect_punct(":");
            if (saw_lengths) throw parse_error("duplicate 'lengths' section", line_no);
            saw_lengths = true;
            while (!lex.at_end()) {
                std::string sym = lex.expect_ident("a length symbol");
                if (rule.symbol_id(sym) >= 0)
                    throw parse_error("duplicate length symbol '" + sym + "'", line_no);
                rule.symbols.push_back(sym);
            }
            if (rule.symbols.empty())
                throw parse_error("'lengths' lists no symbols", line_no);
            rule.init.assign(rule.symbols.size(), Int(0));
            rule.recurrence.assign(rule.symbols.size(), LinExpr{});
        } else if (head == "init") {
            lex.expect_punct(":");
            if (!saw_lengths) throw parse_error("'init' before 'lengths'", line_no);
            if (saw_init) throw parse_error("duplicate 'init' section", line_no);
            saw_init = true;
            std::vector<bool> seen(rule.symbols.size(), false);
            while (!lex.at_end()) {
                std::string sym = lex.expect_ident("a length symbol");
                int id = rule.symbol_id(sym);
                if (id < 0) lex.fail("unknown length symbol '" + sym + "'");
                lex.expect_punct("=");
                if (lex.peek().kind != detail::Token::Number)
                    lex.fail("expected an integer");
                Int v = lex.next().value;
                if (v < 1)
                    throw parse_error("initial value for '" + sym + "' must be >= 1",
                                      line_no);
                if (seen[id])
                    throw parse_error("duplicate initial value for '" + sym + "'",
                                      line_no);
                seen[id] = true;
                rule.init[id] = v;
            }
            for (std::size_t i = 0; i < seen.size(); ++i)
                if (!seen[i])
                    throw parse_error("missing initial value for '" + rule.symbols[i] + "'",
                                      line_no);
        } else if (head == "recurrence") {
            lex.expect_punct(":");
            if (!saw_lengths) throw parse_error("'recurrence' before 'lengths'", line_no);
            if (saw_rec) throw parse_error("duplicate 'recurrence' section", line_no);
            saw_rec = true;
            std::vector<bool> seen(rule.symbols.size(), false);
            while (true) {
                std::string sym = lex.expect_ident("a length symbol");
                int id = rule.symbol_id(sym);
                if (id < 0) lex.fail("unknown length symbol '" + sym + "'");
                lex.expect_punct("->");
                LinExpr e = detail::parse_lin_expr(lex, rule);
                if (e.constant != 0)
                    throw parse_error("recurrence for '" + sym +
                                          "' must not have a constant term",
                                      line_no);
                bool all_zero = true;
                for (const Int& c : e.coeff) {
                    if (c < 0)
                        throw parse_error("recurrence for '" + sym +
                                              "' has a negative coefficient",
                                          line_no);
                    if (c != 0) all_zero = false;
                }
                if (all_zero)
                    throw parse_error("recurrence for '" + sym + "' is zero", line_no);
                if (seen[id])
                    throw parse_error("duplicate recurrence for '" + sym + "'", line_no);
                seen[id] = true;
                rule.recurrence[id] = std::move(e);
                if (lex.at_end()) break;
                lex.expect_punct(";");
            }
            for (std::size_t i = 0; i < seen.size(); ++i)
                if (!seen[i])
                    throw parse_error("missing recurrence for '" + rule.symbols[i] + "'",
                                      line_no);
        } else if (head == "size") {
            if (!saw_tiles) throw parse_error("'size' before 'tiles'", line_no);
            if (!saw_lengths) throw parse_error("'size' before 'lengths'", line_no);
            std::string label = lex.expect_ident("a tile label");
            int id = rule.label_id(label);
            if (id < 0)
                throw parse_error("undeclared tile label '" + label + "'", line_no);
            lex.expect_punct(":");
            if (saw_size[id])
                throw parse_error("duplicate size for '" + label + "'", line_no);
            saw_size[id] = true;
            std::string ws = lex.expect_ident("a width symbol");
            std::string hs = lex.expect_ident("a height symbol");
            int wid = rule.symbol_id(ws), hid = rule.symbol_id(hs);
            if (wid < 0) throw parse_error("unknown length symbol '" + ws + "'", line_no);
            if (hid < 0) throw parse_error("unknown length symbol '" + hs + "'", line_no);
            if (!lex.at_end()) lex.fail("trailing tokens after size");
            rule.width_sym[id] = wid;
            rule.height_sym[id] = hid;
        } else if (head == "rule") {
            if (!saw_tiles) throw parse_error("'rule' before 'tiles'", line_no);
            std::string label = lex.expect_ident("a tile label");
            int id = rule.label_id(label);
            if (id < 0)
                throw parse_error("undeclared tile label '" + label + "'", line_no);
            lex.expect_punct(":");
            if (!lex.at_end()) lex.fail("trailing tokens after rule header");
            if (saw_block[id])
                throw parse_error("duplicate rule block for '" + label + "'", line_no);
            saw_block[id] = true;
            current_block = id;
        } else if (head == "involution") {
            lex.expect_punct(":");
            if (!saw_tiles) throw parse_error("'involution' before 'tiles'", line_no);
            if (rule.involution) throw parse_error("duplicate 'involution'", line_no);
            Involution inv;
            inv.perm.resize(rule.labels.size());
            for (std::size_t i = 0; i < inv.perm.size(); ++i)
                inv.perm[i] = static_cast<int>(i);
            std::vector<bool> pinned(rule.labels.size(), false);
            if (lex.peek().kind == detail::Token::Ident && lex.peek().text == "swap") {
                lex.next();
                lex.expect_punct("-");
                if (lex.expect_ident("'axes'") != "axes") lex.fail("expected 'axes'");
                inv.swap_axes = true;
            }
            while (!lex.at_end()) {
                std::string a = lex.expect_ident("a tile label");
                lex.expect_punct("=");
                std::string b = lex.expect_ident("a tile label");
                int ia = rule.label_id(a), ib = rule.label_id(b);
                if (ia < 0)
                    throw parse_error("undeclared tile label '" + a + "'", line_no);
                if (ib < 0)
                    throw parse_error("undeclared tile label '" + b + "'", line_no);
                if ((pinned[ia] && inv.perm[ia] != ib) ||
                    (pinned[ib] && inv.perm[ib] != ia))
                    throw parse_error("conflicting involution pair '" + a + "=" + b + "'",
                                      line_no);
                inv.perm[ia] = ib;
                inv.perm[ib] = ia;
                pinned[ia] = pinned[ib] = true;
            }
            rule.involution = std::move(inv);
        } else {
            throw parse_error("unknown section '" + head + "'", line_no);
        }
    }

    if (!saw_tiles) throw parse_error("missing 'tiles' section", line_no ? line_no : 1);
    if (!saw_lengths)
        throw parse_error("missing 'lengths' section", line_no ? line_no : 1);
    if (!saw_init) throw parse_error("missing 'init' section", line_no ? line_no : 1);
    if (!saw_rec)
        throw parse_error("missing 'recurrence' section", line_no ? line_no : 1);
    for (std::size_t i = 0; i < rule.labels.size(); ++i) {
        if (!saw_size[i])
            throw parse_error("missing size for '" + rule.labels[i] + "'",
                              line_no ? line_no : 1);
        if (!saw_block[i] || rule.children[i].empty())
            throw parse_error("missing rule block for '" + rule.labels[i] + "'",
                              line_no ? line_no : 1);
    }
    if (rule.involution) {
        const auto& perm = rule.involution->perm;
        for (std::size_t i = 0; i < perm.size(); ++i)
            if (perm[perm[i]] != static_cast<int>(i))
                throw parse_error("involution is not an involution", line_no);
    }
    return rule;
}

inline std::string serialize_lin_expr(const LinExpr& e,
                                      const std::vector<std::string>& symbols) {
    std::string out;
    auto append_term = [&](const Int& c, const std::string& body) {
        if (c == 0) return;
        Int ab = abs(c);
        if (out.empty()) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (body.empty()) {
            out += ab.get_str();
        } else {
            if (ab != 1) out += ab.get_str();
            out += body;
        }
    };
    for (std::size_t i = 0; i < e.coeff.size(); ++i) append_term(e.coeff[i], symbols[i]);
    append_term(e.constant, "");
    return out.empty() ? "0" : out;
}

inline std::string serialize_rule(const FusionRule& rule) {
    std::ostringstream out;
    out << "tiles:";
    for (const auto& l : rule.labels) out << ' ' << l;
    out << "\n\nlengths:";
    for (const auto& s : rule.symbols) out << ' ' << s;
    out << "\ninit:";
    for (std::size_t i = 0; i < rule.symbols.size(); ++i)
        out << ' ' << rule.symbols[i] << '=' << rule.init[i].get_str();
    out << "\nrecurrence: ";
    for (std::size_t i = 0; i < rule.symbols.size(); ++i) {
        if (i) out << " ; ";
        out << rule.symbols[i] << " -> "
            << serialize_lin_expr(rule.recurrence[i], rule.symbols);
    }
    out << "\n\n";
    for (std::size_t i = 0; i < rule.labels.size(); ++i)
        out << "size " << rule.labels[i] << ": " << rule.symbols[rule.width_sym[i]]
            << ' ' << rule.symbols[rule.height_sym[i]] << '\n';
    for (std::size_t i = 0; i < rule.labels.size(); ++i) {
        out << "\nrule " << rule.labels[i] << ":\n";
        for (const auto& p : rule.children[i])
            out << "  " << rule.labels[p.label] << " at ("
                << serialize_lin_expr(p.x, rule.symbols) << ", "
                << serialize_lin_expr(p.y, rule.symbols) << ")\n";
    }
    if (rule.involution) {
        out << "\ninvolution:";
        if (rule.involution->swap_axes) out << " swap-axes";
        for (std::size_t i = 0; i < rule.labels.size(); ++i) {
            int j = rule.involution->perm[i];
            if (static_cast<int>(i) <= j)
                out << ' ' << rule.labels[i] << '=' << rule.labels[j];
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace tilescope
