#pragma once

// SVG rendering of patches: one filled rect per unit tile, outline rects for
// chosen supertile levels, then fault-line and lattice-path overlays on top.
// Output is plain deterministic text so identical inputs give identical bytes.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <tilescope/patch.hpp>
#include <tilescope/rule.hpp>
#include <tilescope/shear.hpp>
#include <tilescope/spectra.hpp>

namespace tilescope {

struct RenderSpec {
    std::map<int, std::string> fill;  // label -> css color, must cover the patch
    std::vector<int> outline_levels;  // each strictly below the patch level
    std::vector<double> outline_widths;  // optional, parallel to outline_levels
    std::vector<FaultLine> faults;
    std::vector<Vec2> path;  // bold polyline through lattice corners
    double cell_px = 8.0;
    double pixel_budget = 64e6;
};

// Dark wide square, warm wide strip, cool tall strip, light small square.
inline std::map<int, std::string> default_palette(const FusionRule& rule) {
    static const char* swatch[] = {"#2b3245", "#d08a3e", "#4a7fb5", "#e8e3d5",
                                   "#7b4b94", "#3f8f6b", "#b5494a", "#9aa3b2"};
    std::map<int, std::string> out;
    for (std::size_t i = 0; i < rule.labels.size(); ++i)
        out[static_cast<int>(i)] = swatch[i % 8];
    return out;
}

namespace detail {

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

inline std::string render_svg(const Patch& patch, const RenderSpec& spec) {
    std::int64_t w = patch.width(), h = patch.height();
    double cell = spec.cell_px;
    if (cell <= 0) throw error("cell size must be positive");
    if (static_cast<double>(w) * cell * static_cast<double>(h) * cell >
        spec.pixel_budget)
        throw error("patch too large for the configured pixel budget");
    for (int lvl : spec.outline_levels)
        if (lvl < 0 || lvl >= patch.level())
            throw error("outline level outside the fusion tree");

    auto tiles = patch.nodes_at_level(0);
    for (const auto& t : tiles)
        if (!spec.fill.count(t.label))
            throw error("fill palette misses a label in the patch");

    // Flip y so the tiling's upward axis points up on screen too.
    auto X = [&](std::int64_t x) { return detail::px(x * cell); };
    auto Y = [&](std::int64_t y) { return detail::px((h - y) * cell); };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           detail::px(w * cell) + "\" height=\"" + detail::px(h * cell) +
           "\" viewBox=\"0 0 " + detail::px(w * cell) + " " +
           detail::px(h * cell) + "\">\n";

    for (const auto& t : tiles)
        out += "  <rect class=\"tile\" x=\"" + X(t.x) + "\" y=\"" + Y(t.y + t.h) +
               "\" width=\"" + detail::px(t.w * cell) + "\" height=\"" +
               detail::px(t.h * cell) + "\" fill=\"" + spec.fill.at(t.label) +
               "\"/>\n";

    for (std::size_t i = 0; i < spec.outline_levels.size(); ++i) {
        int lvl = spec.outline_levels[i];
        double stroke = i < spec.outline_widths.size()
                            ? spec.outline_widths[i]
                            : cell * 0.06 * static_cast<double>(i + 1);
        for (const auto& t : patch.nodes_at_level(lvl))
            out += "  <rect class=\"outline\" data-level=\"" +
                   std::to_string(lvl) + "\" x=\"" + X(t.x) + "\" y=\"" +
                   Y(t.y + t.h) + "\" width=\"" + detail::px(t.w * cell) +
                   "\" height=\"" + detail::px(t.h * cell) +
                   "\" fill=\"none\" stroke=\"#151515\" stroke-width=\"" +
                   detail::px(stroke) + "\"/>\n";
    }

    for (const auto& f : spec.faults)
        out += "  <line class=\"fault\" x1=\"" + X(f.x0) + "\" y1=\"" + Y(f.y) +
               "\" x2=\"" + X(f.x1) + "\" y2=\"" + Y(f.y) +
               "\" stroke=\"#c03b2d\" stroke-width=\"" + detail::px(cell * 0.25) +
               "\"/>\n";

    if (!spec.path.empty()) {
        out += "  <polyline class=\"path\" points=\"";
        for (std::size_t i = 0; i < spec.path.size(); ++i) {
            if (i) out += " ";
            out += detail::px(spec.path[i].first * cell) + "," +
                   detail::px((h - spec.path[i].second) * cell);
        }
        out += "\" fill=\"none\" stroke=\"#101010\" stroke-width=\"" +
               detail::px(cell * 0.35) +
               "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>\n";
    }

    out += "</svg>\n";
    return out;
}

}  // namespace tilescope
