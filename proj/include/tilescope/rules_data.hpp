#pragma once

// Bundled rule files, embedded so the CLI and tests work without a data
// directory. Kept byte-identical to the copies under data/ (tested).

#include <tilescope/core.hpp>
#include <tilescope/rule.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace tilescope {

inline const char* frank_dpv_text() {
    return R"rule(# Direct-product-variation fusion rule on four unit-square prototiles.
# Side lengths follow (W,V) -> (W+3V, W); tiles are a:WxW, b:WxV, c:VxW, d:VxV.

tiles: a b c d

lengths: W V
init: W=1 V=1
recurrence: W -> W + 3V ; V -> W

size a: W W
size b: W V
size c: V W
size d: V V

rule a:
  d at (0, 0)
  d at (V, 0)
  b at (2V, 0)
  d at (0, V)
  d at (V, V)
  b at (2V, V)
  c at (0, 2V)
  c at (V, 2V)
  a at (2V, 2V)
  c at (W + 2V, 0)
  d at (W + 2V, W)
  d at (W + 2V, W + V)
  b at (0, W + 2V)
  d at (W, W + 2V)
  d at (W + V, W + 2V)
  d at (W + 2V, W + 2V)

rule b:
  a at (0, 0)
  c at (W, 0)
  c at (W + V, 0)
  c at (W + 2V, 0)

rule c:
  a at (0, 0)
  b at (0, W)
  b at (0, W + V)
  b at (0, W + 2V)

rule d:
  a at (0, 0)

involution: swap-axes a=a b=c d=d
)rule";
}

inline const char* example2_text() {
    return R"rule(# Two-tile fusion whose rows substitute as a -> ba / ab and b -> aaa.
# Widths follow (A,B) -> (A+B, 3A); heights double each level.

tiles: a b

lengths: A B H
init: A=1 B=1 H=1
recurrence: A -> A + B ; B -> 3A ; H -> 2H

size a: A H
size b: B H

rule a:
  b at (0, 0)
  a at (B, 0)
  a at (0, H)
  b at (A, H)

rule b:
  a at (0, 0)
  a at (A, 0)
  a at (2A, 0)
  a at (0, H)
  a at (A, H)
  a at (2A, H)
)rule";
}

inline const char* builtin_rule_text(const std::string& name) {
    if (name == "frank-dpv") return frank_dpv_text();
    if (name == "example2") return example2_text();
    return nullptr;
}

// Accepts a builtin rule name or a path to a rule file.
inline FusionRule load_rule(const std::string& name_or_path) {
    if (const char* text = builtin_rule_text(name_or_path))
        return parse_rule(text, name_or_path);
    std::ifstream in(name_or_path);
    if (!in) throw error("cannot open rule file '" + name_or_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string stem = name_or_path;
    if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
        stem.erase(0, slash + 1);
    if (auto dot = stem.rfind('.'); dot != std::string::npos) stem.erase(dot);
    return parse_rule(buf.str(), stem);
}

}  // namespace tilescope
