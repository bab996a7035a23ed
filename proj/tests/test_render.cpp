#include <tilescope/align.hpp>
#include <tilescope/render.hpp>
#include <tilescope/report.hpp>
#include <tilescope/rules_data.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace tilescope;

namespace {

FusionRule frank() { return parse_rule(frank_dpv_text(), "frank-dpv"); }

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

TEST_CASE("a depth-1 render is sixteen unit squares") {
    FusionRule rule = frank();
    Patch p = build_supertile(rule, "a", 1);
    RenderSpec spec;
    spec.fill = default_palette(rule);
    std::string svg = render_svg(p, spec);
    CHECK(count_of(svg, "class=\"tile\"") == 16);
    CHECK(count_of(svg, "class=\"outline\"") == 0);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"32\" "
                    "height=\"32\"",
                    0) == 0);
    // Bottom row reads d d b c left to right, with y flipped to screen space.
    CHECK(svg.find("<rect class=\"tile\" x=\"0\" y=\"24\" width=\"8\" height=\"8\" "
                   "fill=\"#e8e3d5\"/>") != std::string::npos);
    CHECK(svg.find("<rect class=\"tile\" x=\"8\" y=\"24\" width=\"8\" height=\"8\" "
                   "fill=\"#e8e3d5\"/>") != std::string::npos);
    CHECK(svg.find("<rect class=\"tile\" x=\"16\" y=\"24\" width=\"8\" height=\"8\" "
                   "fill=\"#d08a3e\"/>") != std::string::npos);
    CHECK(svg.find("<rect class=\"tile\" x=\"24\" y=\"24\" width=\"8\" height=\"8\" "
                   "fill=\"#4a7fb5\"/>") != std::string::npos);
    CHECK(render_svg(p, spec) == svg);
}

TEST_CASE("tile and outline counts follow the fusion tree") {
    FusionRule rule = frank();
    Patch p3 = build_supertile(rule, "a", 3);
    RenderSpec spec;
    spec.fill = default_palette(rule);
    spec.outline_levels = {1, 2};
    std::string svg = render_svg(p3, spec);
    CHECK(count_of(svg, "class=\"tile\"") == 361);
    CHECK(count_of(svg, "data-level=\"1\"") == 49);
    CHECK(count_of(svg, "data-level=\"2\"") == 16);
    CHECK(count_of(svg, "class=\"outline\"") == 65);

    Patch p4 = build_supertile(rule, "a", 4);
    spec.outline_levels = {1};
    spec.cell_px = 4.0;
    std::string svg4 = render_svg(p4, spec);
    CHECK(count_of(svg4, "class=\"tile\"") == 1600);
    CHECK(count_of(svg4, "class=\"outline\"") == 361);
}

TEST_CASE("overlays sit on top of the fills") {
    FusionRule rule = frank();
    Patch p = build_supertile(rule, "a", 3);
    RenderSpec spec;
    spec.fill = default_palette(rule);
    spec.faults = find_fault_lines(p, 1);
    REQUIRE(spec.faults.size() == 14);

    auto g = alignment_graph(p, 1);
    auto path = aligned_path(g, 0, static_cast<std::int32_t>(g.nodes.size()) - 1);
    REQUIRE(path.found);
    spec.path = path.lattice;

    std::string svg = render_svg(p, spec);
    CHECK(count_of(svg, "class=\"fault\"") == 14);
    CHECK(count_of(svg, "class=\"path\"") == 1);
    CHECK(svg.find("class=\"fault\"") > svg.rfind("class=\"tile\""));
    CHECK(svg.find("class=\"path\"") > svg.rfind("class=\"fault\""));
}

TEST_CASE("render rejects bad palettes, levels, and oversized patches") {
    FusionRule rule = frank();
    Patch p = build_supertile(rule, "a", 2);
    RenderSpec spec;
    spec.fill = default_palette(rule);
    spec.outline_levels = {5};
    CHECK_THROWS_AS(render_svg(p, spec), error);
    spec.outline_levels = {};
    spec.fill.erase(3);
    CHECK_THROWS_AS(render_svg(p, spec), error);
    spec.fill = default_palette(rule);
    spec.pixel_budget = 100;
    CHECK_THROWS_AS(render_svg(p, spec), error);
    spec.pixel_budget = 64e6;
    spec.cell_px = 0;
    CHECK_THROWS_AS(render_svg(p, spec), error);
}

TEST_CASE("reports carry the schema tag and hash and stay byte-stable") {
    std::string text = frank_dpv_text();
    Json j = report_header("sizes", "frank-dpv", text);
    j["params"]["n"] = 30;
    j["result"] = Json::array();
    std::string dump = report_text(j);
    CHECK(dump.rfind("{\n  \"schema\": \"tilescope-report/1\",\n  \"tool\": {\n", 0) ==
          0);
    CHECK(j["rule"]["content_fnv1a64"].get<std::string>().size() == 16);
    CHECK(report_text(report_header("sizes", "frank-dpv", text)) !=
          report_text(report_header("sizes", "example2", text)));
    Json again = report_header("sizes", "frank-dpv", text);
    again["params"]["n"] = 30;
    again["result"] = Json::array();
    CHECK(report_text(again) == dump);
    CHECK(dump.back() == '\n');
}
