#pragma once

// Length-symbol values per fusion level, driven by the rule's recurrence.

#include <tilescope/core.hpp>
#include <tilescope/linalg.hpp>
#include <tilescope/rule.hpp>

#include <vector>

namespace tilescope {

class SizeTable {
  public:
    explicit SizeTable(const FusionRule& rule)
        : symbols_(rule.symbols),
          recurrence_(rule.recurrence),
          width_sym_(rule.width_sym),
          height_sym_(rule.height_sym) {
        rows_.push_back(rule.init);
    }

    // By value: the row store grows on demand, so references would dangle.
    std::vector<Int> values(int level) const {
        ensure(level);
        return rows_[static_cast<std::size_t>(level)];
    }

    Int value(int symbol, int level) const {
        ensure(level);
        return rows_[static_cast<std::size_t>(level)][symbol];
    }
    Int width(int label, int level) const { return value(width_sym_[label], level); }
    Int height(int label, int level) const { return value(height_sym_[label], level); }

    Int area(int label, int level) const { return width(label, level) * height(label, level); }

    int symbol_count() const { return static_cast<int>(symbols_.size()); }

    // Matrix whose action on the symbol vector advances one level.
    IntMat recurrence_matrix() const {
        int n = symbol_count();
        IntMat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m.at(i, j) = recurrence_[i].coeff[j];
        return m;
    }

  private:
    void ensure(int level) const {
        if (level < 0) throw error("negative fusion level");
        while (static_cast<int>(rows_.size()) <= level) {
            const auto& prev = rows_.back();
            std::vector<Int> next(symbols_.size());
            for (std::size_t i = 0; i < symbols_.size(); ++i)
                next[i] = recurrence_[i].eval(prev);
            rows_.push_back(std::move(next));
        }
    }

    std::vector<std::string> symbols_;
    std::vector<LinExpr> recurrence_;
    std::vector<int> width_sym_, height_sym_;
    mutable std::vector<std::vector<Int>> rows_;
};

inline std::vector<Int> level_symbol_values(const FusionRule& rule, int level) {
    return SizeTable(rule).values(level);
}

}  // namespace tilescope
