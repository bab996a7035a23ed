// Command line front end. Every subcommand emits one JSON document with a
// stable key order and no timestamps, so identical inputs give identical
// bytes; --timing adds wall clock seconds and is the one documented way to
// break that. Exit codes: 0 success, 1 verification failure, 2 usage error.

#include <CLI11.hpp>

#include <tilescope/acceptance.hpp>
#include <tilescope/align.hpp>
#include <tilescope/cohomology.hpp>
#include <tilescope/patch.hpp>
#include <tilescope/render.hpp>
#include <tilescope/report.hpp>
#include <tilescope/rules_data.hpp>
#include <tilescope/shear.hpp>
#include <tilescope/sizes.hpp>
#include <tilescope/spectra.hpp>
#include <tilescope/subst.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace tilescope;

struct RulePack {
    std::string name;
    std::string text;
    FusionRule rule;
};

RulePack load_rule_pack(const std::string& name_or_path) {
    RulePack out;
    if (const char* text = builtin_rule_text(name_or_path)) {
        out.name = name_or_path;
        out.text = text;
    } else {
        std::ifstream in(name_or_path, std::ios::binary);
        if (!in) throw error("cannot open rule '" + name_or_path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        out.text = buf.str();
        out.name = name_or_path;
        if (auto slash = out.name.find_last_of("/\\"); slash != std::string::npos)
            out.name.erase(0, slash + 1);
        if (auto dot = out.name.rfind('.'); dot != std::string::npos)
            out.name.erase(dot);
    }
    out.rule = parse_rule(out.text, out.name);
    return out;
}

Rat parse_rat(const std::string& s, const char* flag) {
    Rat q;
    if (s.empty() || q.set_str(s, 10) != 0 || q.get_den() == 0)
        throw error(std::string(flag) + ": bad rational '" + s + "'");
    q.canonicalize();
    return q;
}

std::pair<std::int64_t, std::int64_t> parse_point(const std::string& s,
                                                  const char* flag) {
    long long x = 0, y = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lld,%lld%c", &x, &y, &tail) != 2)
        throw error(std::string(flag) + ": want 'x,y', got '" + s + "'");
    return {x, y};
}

std::int32_t node_at_corner(const AlignmentGraph& g, std::int64_t x, std::int64_t y,
                            const char* flag) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].x == x && g.nodes[i].y == y)
            return static_cast<std::int32_t>(i);
    throw error(std::string(flag) + ": no node cornered at (" + std::to_string(x) +
                "," + std::to_string(y) + ")");
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write '" + path + "'");
    out << text;
}

Json tile_json(const TileRect& t, const FusionRule& rule) {
    Json j;
    j["label"] = rule.labels[static_cast<std::size_t>(t.label)];
    j["x"] = t.x;
    j["y"] = t.y;
    j["w"] = t.w;
    j["h"] = t.h;
    return j;
}

std::string default_golden_dir() {
    if (const char* env = std::getenv("TILESCOPE_GOLDEN_DIR")) return env;
    return std::string(TILESCOPE_DATA_DIR) + "/../tests/golden";
}

double pixel_budget_default() {
    if (const char* env = std::getenv("TILESCOPE_PIXEL_BUDGET")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end && *end == '\0' && v > 0) return v;
    }
    return 64e6;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact supertile laboratory for fusion rules"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tilescope 0.1.0");

    std::string rule_arg = "frank-dpv";
    std::string out_path;
    bool timing = false;
    app.add_option("--rule", rule_arg, "builtin rule name or path to a .rule file")
        ->capture_default_str();
    app.add_option("-o,--out", out_path, "write the JSON document here instead of stdout");
    app.add_flag("--timing", timing, "add wall clock seconds (breaks byte stability)");

    RulePack rp;
    std::string command_name;
    // Fills j["params"] and j["result"], returns the process exit code.
    std::function<int(Json&)> action;

    {
        auto p = std::make_shared<std::tuple<std::string, int, std::string>>("a", 3, "");
        auto* sub = app.add_subcommand("build", "materialize one supertile");
        sub->fallthrough();
        sub->add_option("--label", std::get<0>(*p), "tile label")->capture_default_str();
        sub->add_option("--level", std::get<1>(*p), "fusion depth")
            ->check(CLI::Range(0, 40))
            ->capture_default_str();
        sub->add_option("--csv", std::get<2>(*p), "dump unit tiles as x,y,label rows");
        sub->callback([&, p] {
            command_name = "build";
            action = [&, p](Json& j) {
                auto& [label, level, csv] = *p;
                j["params"]["label"] = label;
                j["params"]["level"] = level;
                Patch patch = build_supertile(rp.rule, label, level);
                auto cells = patch.nodes_at_level(0);
                j["result"]["width"] = std::to_string(patch.width());
                j["result"]["height"] = std::to_string(patch.height());
                j["result"]["cells"] = static_cast<std::int64_t>(cells.size());
                std::map<int, std::int64_t> by_label;
                for (const auto& t : cells) ++by_label[t.label];
                Json counts;
                for (auto [id, n] : by_label)
                    counts[rp.rule.labels[static_cast<std::size_t>(id)]] = n;
                j["result"]["label_counts"] = counts;
                if (!csv.empty()) {
                    std::ostringstream os;
                    os << "x,y,label\n";
                    for (const auto& t : cells)
                        os << t.x << "," << t.y << ","
                           << rp.rule.labels[static_cast<std::size_t>(t.label)] << "\n";
                    write_file(csv, os.str());
                    j["result"]["csv"] = csv;
                }
                return 0;
            };
        });
    }

    {
        auto depth = std::make_shared<int>(8);
        auto* sub = app.add_subcommand("validate", "exact cover check to a depth");
        sub->fallthrough();
        sub->add_option("--depth", *depth, "levels to verify")
            ->check(CLI::Range(1, 12))
            ->capture_default_str();
        sub->callback([&, depth] {
            command_name = "validate";
            action = [&, depth](Json& j) {
                j["params"]["depth"] = *depth;
                ValidationReport rep = validate_rule(rp.rule, *depth);
                j["result"]["ok"] = rep.ok;
                Json vs = Json::array();
                for (const auto& v : rep.violations) {
                    Json e;
                    e["kind"] = v.kind;
                    e["label"] = rp.rule.labels[static_cast<std::size_t>(v.label)];
                    e["level"] = v.level;
                    e["message"] = v.message;
                    vs.push_back(e);
                }
                j["result"]["violations"] = vs;
                return rep.ok ? 0 : 1;
            };
        });
    }

    {
        auto levels = std::make_shared<int>(30);
        auto* sub = app.add_subcommand("sizes", "size recursion with divisibility checks");
        sub->fallthrough();
        sub->add_option("--levels", *levels, "compute through this level")
            ->check(CLI::Range(0, 200))
            ->capture_default_str();
        sub->callback([&, levels] {
            command_name = "sizes";
            action = [&, levels](Json& j) {
                j["params"]["levels"] = *levels;
                Json rows = Json::array();
                for (int n = 0; n <= *levels; ++n) {
                    GcdReport g = gcd_report(rp.rule, n);
                    Json row;
                    row["level"] = n;
                    row["wide"] = g.wide.get_str();
                    row["narrow"] = g.narrow.get_str();
                    row["gcd"] = g.g.get_str();
                    row["mod3"] = {g.mod3.first.get_str(), g.mod3.second.get_str()};
                    rows.push_back(row);
                }
                j["result"]["levels"] = rows;
                return 0;
            };
        });
    }

    {
        auto side = std::make_shared<std::string>("bottom");
        auto* sub = app.add_subcommand("cohomology", "boundary row cohomology report");
        sub->fallthrough();
        sub->add_option("--side", *side, "which boundary rows to substitute")
            ->check(CLI::IsMember({"bottom", "top"}))
            ->capture_default_str();
        sub->callback([&, side] {
            command_name = "cohomology";
            action = [&, side](Json& j) {
                j["params"]["side"] = *side;
                Substitution1D s =
                    subst_from_rule(rp.rule, *side == "bottom" ? Side::Bottom : Side::Top);
                H1Report rep = h1_report(s);
                j["result"]["alphabet"] = s.alphabet;
                Json poly = Json::array();
                for (const Int& c : rep.char_poly_coeffs) poly.push_back(c.get_str());
                j["result"]["char_poly_ascending"] = poly;
                Json eigs = Json::array();
                for (const Root& r : rep.eigenvalues) {
                    Json e;
                    e["re"] = r.value.real();
                    e["im"] = r.value.imag();
                    if (r.is_exact)
                        e["exact"] = r.exact.get_str();
                    else
                        e["exact"] = nullptr;
                    eigs.push_back(e);
                }
                j["result"]["eigenvalues"] = eigs;
                j["result"]["stable_rank"] = rep.stable_rank;
                Json edges = Json::array();
                for (auto [u, v] : rep.bd.edges)
                    edges.push_back({s.alphabet[static_cast<std::size_t>(u)],
                                     s.alphabet[static_cast<std::size_t>(v)]});
                j["result"]["border"]["stable_power"] = rep.bd.order;
                j["result"]["border"]["edges"] = edges;
                j["result"]["components"] = rep.components;
                j["result"]["cycle_rank"] = rep.cycle_rank;
                j["result"]["h1_rank"] = rep.h1_rank;
                j["result"]["an_dim"] = rep.an_dim;
                return 0;
            };
        });
    }

    {
        auto max_order = std::make_shared<int>(14);
        auto* sub = app.add_subcommand("discrepancy", "peak boundary discrepancy by order");
        sub->fallthrough();
        sub->add_option("--max-order", *max_order, "deepest synthetic profile")
            ->check(CLI::Range(0, 19))
            ->capture_default_str();
        sub->callback([&, max_order] {
            command_name = "discrepancy";
            action = [&, max_order](Json& j) {
                j["params"]["max_order"] = *max_order;
                Json rows = Json::array();
                std::vector<std::pair<double, double>> pts;
                for (int k = 0; k <= *max_order; ++k) {
                    Int v = synthetic_max_abs(rp.rule, k);
                    Json row;
                    row["order"] = k;
                    row["max_abs"] = v.get_str();
                    rows.push_back(row);
                    if (k >= 6 && k <= 14 && v > 0)
                        pts.push_back({double(k), std::log(v.get_d())});
                }
                j["result"]["orders"] = rows;
                if (pts.size() >= 2)
                    j["result"]["log_slope_6_14"] = least_squares_slope(pts);
                return 0;
            };
        });
    }

    {
        auto p = std::make_shared<std::pair<int, int>>(1, 10);
        auto* sub = app.add_subcommand("offsets", "fault line offset census by depth");
        sub->fallthrough();
        sub->add_option("--m", p->first, "fault line level")
            ->check(CLI::Range(1, 6))
            ->capture_default_str();
        sub->add_option("--max-level", p->second, "census depth")
            ->check(CLI::Range(2, 14))
            ->capture_default_str();
        sub->callback([&, p] {
            command_name = "offsets";
            action = [&, p](Json& j) {
                auto [m, max_level] = *p;
                if (max_level <= m) {
                    std::fprintf(stderr, "tilescope: --max-level: must exceed --m\n");
                    return 2;
                }
                j["params"]["m"] = m;
                j["params"]["max_level"] = max_level;
                auto [wide, narrow] = level_widths(rp.rule, m);
                j["result"]["wide"] = wide;
                j["result"]["narrow"] = narrow;
                OffsetCensus census(rp.rule, m);
                Json rows = Json::array();
                std::size_t prev = 0;
                Json broken = Json::array();
                for (int level = m + 1; level <= max_level; ++level) {
                    auto du = census.distinct_union(level);
                    if (du.size() < prev)
                        broken.push_back("distinct offsets shrink at depth " +
                                         std::to_string(level));
                    prev = du.size();
                    Json row;
                    row["level"] = level;
                    row["offsets"] = du;
                    std::set<std::int64_t> rw, rn;
                    for (std::int64_t s : du) {
                        rw.insert(detail::pos_mod(s, wide));
                        rn.insert(detail::pos_mod(s, narrow));
                    }
                    row["mod_wide"] = rw;
                    row["mod_narrow"] = rn;
                    rows.push_back(row);
                }
                j["result"]["levels"] = rows;
                j["result"]["violations"] = broken;
                return broken.empty() ? 0 : 1;
            };
        });
    }

    {
        struct Params {
            std::int64_t shift = 0;
            int radius = 2, max_level = 8, census_m = 2;
            bool windows = true;
        };
        auto p = std::make_shared<Params>();
        auto* sub = app.add_subcommand("shear-witness",
                                       "seam witness for a horizontal shift");
        sub->fallthrough();
        sub->add_option("--shift", p->shift, "horizontal offset to witness")->required();
        sub->add_option("--radius", p->radius, "window legality radius")
            ->check(CLI::Range(1, 4))
            ->capture_default_str();
        sub->add_option("--max-level", p->max_level, "deepest supertile to search")
            ->check(CLI::Range(1, 9))
            ->capture_default_str();
        sub->add_option("--census-m", p->census_m, "fault line level for the census")
            ->check(CLI::Range(1, 6))
            ->capture_default_str();
        sub->add_flag("!--no-windows", p->windows, "skip window legality checks");
        sub->callback([&, p] {
            command_name = "shear-witness";
            action = [&, p](Json& j) {
                j["params"]["shift"] = p->shift;
                j["params"]["radius"] = p->radius;
                j["params"]["max_level"] = p->max_level;
                j["params"]["census_m"] = p->census_m;
                j["params"]["windows"] = p->windows;
                WindowCatalog catalog;
                if (p->windows)
                    catalog = build_window_catalog(rp.rule, p->radius, p->max_level);
                ShearWitness w = shear_witness(rp.rule, p->shift, p->radius, p->max_level,
                                               p->windows ? &catalog : nullptr,
                                               p->census_m);
                j["result"]["found"] = w.found;
                j["result"]["searched_to"] = w.searched_to;
                if (w.found) {
                    j["result"]["label"] = rp.rule.labels[static_cast<std::size_t>(w.label)];
                    j["result"]["level"] = w.level;
                    j["result"]["y"] = w.y;
                    j["result"]["north_x"] = w.north_x;
                    j["result"]["south_x"] = w.south_x;
                    j["result"]["seam"] = {w.seam_lo, w.seam_hi};
                    j["result"]["windows_checked"] = w.windows_checked;
                    j["result"]["windows_legal"] = w.windows_legal;
                    j["result"]["missing_windows"] = w.missing_windows;
                }
                bool ok = w.found && (!w.windows_checked || w.windows_legal);
                return ok ? 0 : 1;
            };
        });
    }

    {
        struct Params {
            std::string label = "a";
            int level = 6, rho = 5;
            double box = 2.5, step = 0.01, tol = 0.5;
            std::string csv;
            bool expect_grid = false;
        };
        auto p = std::make_shared<Params>();
        auto* sub = app.add_subcommand("spectrum", "return vector scan of a box");
        sub->fallthrough();
        sub->add_option("--label", p->label, "host tile label")->capture_default_str();
        sub->add_option("--level", p->level, "host fusion depth")
            ->check(CLI::Range(1, 12))
            ->capture_default_str();
        sub->add_option("--rho", p->rho, "window radius for return vectors")
            ->required()
            ->check(CLI::Range(0, 500));
        sub->add_option("--box", p->box, "scan the square [-box, box]^2")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--step", p->step, "scan grid step")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--tol", p->tol, "survivor tolerance, inside (0, 2)")
            ->capture_default_str();
        sub->add_option("--csv", p->csv, "dump survivors as x,y rows");
        sub->add_flag("--expect-grid", p->expect_grid,
                      "fail unless survivors pin the integer grid");
        sub->callback([&, p] {
            command_name = "spectrum";
            action = [&, p](Json& j) {
                j["params"]["label"] = p->label;
                j["params"]["level"] = p->level;
                j["params"]["rho"] = p->rho;
                j["params"]["box"] = p->box;
                j["params"]["step"] = p->step;
                j["params"]["tol"] = p->tol;
                j["params"]["expect_grid"] = p->expect_grid;
                Patch patch = build_supertile(rp.rule, p->label, p->level);
                ReturnVectorSet rv = return_vectors(patch, p->rho);
                SpectrumScan scan = spectrum_scan(
                    rv, ScanBox{-p->box, p->box, -p->box, p->box}, p->step, p->tol);
                j["result"]["vectors"] = static_cast<std::int64_t>(rv.vectors.size());
                j["result"]["grid_points"] = scan.grid_points;
                Json ss = Json::array();
                for (auto [x, y] : scan.survivors) ss.push_back({x, y});
                j["result"]["survivors"] = ss;
                if (!p->csv.empty()) {
                    std::ostringstream os;
                    os << "x,y\n";
                    char line[64];
                    for (auto [x, y] : scan.survivors) {
                        std::snprintf(line, sizeof line, "%.6g,%.6g\n", x, y);
                        os << line;
                    }
                    write_file(p->csv, os.str());
                    j["result"]["csv"] = p->csv;
                }
                if (!p->expect_grid) return 0;
                Json broken = Json::array();
                for (auto [x, y] : scan.survivors)
                    if (std::fabs(x - std::round(x)) > 0.02 ||
                        std::fabs(y - std::round(y)) > 0.02)
                        broken.push_back("survivor off the integer grid");
                double slack = p->step / 2 + 1e-9;
                for (int ix = static_cast<int>(std::ceil(-p->box));
                     ix <= static_cast<int>(std::floor(p->box)); ++ix)
                    for (int iy = static_cast<int>(std::ceil(-p->box));
                         iy <= static_cast<int>(std::floor(p->box)); ++iy) {
                        bool hit = false;
                        for (auto [x, y] : scan.survivors)
                            if (std::fabs(x - ix) <= slack && std::fabs(y - iy) <= slack)
                                hit = true;
                        if (!hit)
                            broken.push_back("integer point (" + std::to_string(ix) + "," +
                                             std::to_string(iy) + ") eliminated");
                    }
                j["result"]["violations"] = broken;
                return broken.empty() ? 0 : 1;
            };
        });
    }

    {
        struct Params {
            std::string label = "a";
            int level = 2, m = 0;
            bool survey = false;
            std::string cochain = "scalar";
            std::string mu = "0", nu = "0";
            int counter_level = 1;
            int stride = 37;
            std::string from, to;
        };
        auto p = std::make_shared<Params>();
        auto* sub = app.add_subcommand("align", "alignment graph connectivity and paths");
        sub->fallthrough();
        sub->add_option("--label", p->label, "host tile label")->capture_default_str();
        sub->add_option("--level", p->level, "host fusion depth")
            ->check(CLI::Range(1, 10))
            ->capture_default_str();
        sub->add_option("--m", p->m, "graph over level-m supertiles")
            ->check(CLI::Range(0, 9))
            ->capture_default_str();
        sub->add_flag("--survey", p->survey, "run the displacement survey");
        sub->add_option("--cochain", p->cochain, "survey cochain")
            ->check(CLI::IsMember({"scalar", "dx", "dy", "counter"}))
            ->capture_default_str();
        sub->add_option("--mu", p->mu, "horizontal slope, a rational")->capture_default_str();
        sub->add_option("--nu", p->nu, "vertical slope, a rational")->capture_default_str();
        sub->add_option("--counter-level", p->counter_level, "counter cochain level")
            ->check(CLI::Range(1, 8))
            ->capture_default_str();
        sub->add_option("--stride", p->stride, "direct path recheck stride")
            ->check(CLI::Range(1, 1000000))
            ->capture_default_str();
        sub->add_option("--from", p->from, "path source corner 'x,y'");
        sub->add_option("--to", p->to, "path target corner 'x,y'");
        sub->callback([&, p] {
            command_name = "align";
            action = [&, p](Json& j) {
                j["params"]["label"] = p->label;
                j["params"]["level"] = p->level;
                j["params"]["m"] = p->m;
                Patch patch = build_supertile(rp.rule, p->label, p->level);
                AlignmentGraph g = alignment_graph(patch, p->m);
                ConnectivityReport conn = connectivity(g);
                j["result"]["nodes"] = static_cast<std::int64_t>(g.nodes.size());
                j["result"]["edges"] = static_cast<std::int64_t>(g.edges.size() / 2);
                j["result"]["components"] = conn.components;
                j["result"]["connected"] = conn.is_connected;
                int code = conn.is_connected ? 0 : 1;
                if (!p->from.empty() || !p->to.empty()) {
                    if (p->from.empty() || p->to.empty())
                        throw error("--from and --to must come together");
                    auto [sx, sy] = parse_point(p->from, "--from");
                    auto [tx, ty] = parse_point(p->to, "--to");
                    AlignedPath path = aligned_path(g, node_at_corner(g, sx, sy, "--from"),
                                                    node_at_corner(g, tx, ty, "--to"));
                    j["result"]["path"]["found"] = path.found;
                    if (path.found) {
                        j["result"]["path"]["steps"] =
                            static_cast<std::int64_t>(path.sides.size());
                        Json stops = Json::array();
                        for (std::int32_t id : path.nodes)
                            stops.push_back(tile_json(g.nodes[static_cast<std::size_t>(id)],
                                                      rp.rule));
                        j["result"]["path"]["stops"] = stops;
                        Json lat = Json::array();
                        for (auto [x, y] : path.lattice) lat.push_back({x, y});
                        j["result"]["path"]["lattice"] = lat;
                    } else {
                        code = 1;
                    }
                }
                if (p->survey) {
                    Rat mu = parse_rat(p->mu, "--mu"), nu = parse_rat(p->nu, "--nu");
                    CochainSpec c = cochain_scalar(mu, nu);
                    if (p->cochain == "dx") {
                        c = cochain_dx();
                        mu = 1;
                        nu = 0;
                    } else if (p->cochain == "dy") {
                        c = cochain_dy();
                        mu = 0;
                        nu = 1;
                    } else if (p->cochain == "counter") {
                        c = cochain_counter(p->counter_level);
                    }
                    j["params"]["cochain"] = p->cochain;
                    j["params"]["mu"] = mu.get_str();
                    j["params"]["nu"] = nu.get_str();
                    DisplacementSurvey sv =
                        displacement_survey(c, patch, g, mu, nu, p->stride);
                    j["result"]["survey"]["holds"] = sv.holds;
                    j["result"]["survey"]["pairs_checked"] = sv.pairs_checked;
                    j["result"]["survey"]["pairs_skipped"] = sv.pairs_skipped;
                    j["result"]["survey"]["direct_paths_checked"] = sv.direct_paths_checked;
                    Json vs = Json::array();
                    for (const auto& v : sv.violations) {
                        Json e;
                        e["a"] = tile_json(g.nodes[static_cast<std::size_t>(v.a)], rp.rule);
                        e["b"] = tile_json(g.nodes[static_cast<std::size_t>(v.b)], rp.rule);
                        e["integral"] = v.integral.get_str();
                        e["expected"] = v.expected.get_str();
                        vs.push_back(e);
                    }
                    j["result"]["survey"]["violations"] = vs;
                    if (!sv.holds) code = 1;
                }
                return code;
            };
        });
    }

    {
        struct Params {
            std::string label = "a";
            int level = 3;
            std::string svg;
            std::vector<int> outlines;
            double cell = 8.0;
            int faults_m = -1;
            std::string path_from, path_to;
            int path_m = 0;
        };
        auto p = std::make_shared<Params>();
        auto* sub = app.add_subcommand("render", "draw a supertile as SVG");
        sub->fallthrough();
        sub->add_option("--label", p->label, "tile label")->capture_default_str();
        sub->add_option("--level", p->level, "fusion depth")
            ->check(CLI::Range(0, 12))
            ->capture_default_str();
        sub->add_option("--svg", p->svg, "output file")->required();
        sub->add_option("--outlines", p->outlines, "outline these supertile levels");
        sub->add_option("--cell", p->cell, "pixels per unit tile")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--faults-m", p->faults_m, "overlay level-m fault lines")
            ->check(CLI::Range(0, 9));
        sub->add_option("--path-from", p->path_from, "overlay path source corner 'x,y'");
        sub->add_option("--path-to", p->path_to, "overlay path target corner 'x,y'");
        sub->add_option("--path-m", p->path_m, "path graph level")
            ->check(CLI::Range(0, 9))
            ->capture_default_str();
        sub->callback([&, p] {
            command_name = "render";
            action = [&, p](Json& j) {
                j["params"]["label"] = p->label;
                j["params"]["level"] = p->level;
                j["params"]["outlines"] = p->outlines;
                j["params"]["cell"] = p->cell;
                Patch patch = build_supertile(rp.rule, p->label, p->level);
                RenderSpec spec;
                spec.fill = default_palette(rp.rule);
                spec.outline_levels = p->outlines;
                spec.cell_px = p->cell;
                spec.pixel_budget = pixel_budget_default();
                if (p->faults_m >= 0) {
                    spec.faults = find_fault_lines(patch, p->faults_m);
                    j["params"]["faults_m"] = p->faults_m;
                }
                if (!p->path_from.empty() || !p->path_to.empty()) {
                    if (p->path_from.empty() || p->path_to.empty())
                        throw error("--path-from and --path-to must come together");
                    auto [sx, sy] = parse_point(p->path_from, "--path-from");
                    auto [tx, ty] = parse_point(p->path_to, "--path-to");
                    AlignmentGraph g = alignment_graph(patch, p->path_m);
                    AlignedPath path =
                        aligned_path(g, node_at_corner(g, sx, sy, "--path-from"),
                                     node_at_corner(g, tx, ty, "--path-to"));
                    if (!path.found) throw error("no aligned path between those corners");
                    spec.path = path.lattice;
                    j["params"]["path_m"] = p->path_m;
                }
                std::string svg = render_svg(patch, spec);
                write_file(p->svg, svg);
                j["result"]["svg"] = p->svg;
                j["result"]["bytes"] = static_cast<std::int64_t>(svg.size());
                j["result"]["tiles"] = static_cast<std::int64_t>(patch.nodes_at_level(0).size());
                std::int64_t outlines = 0;
                for (int m : p->outlines)
                    outlines += static_cast<std::int64_t>(patch.nodes_at_level(m).size());
                j["result"]["outlines"] = outlines;
                j["result"]["faults"] = static_cast<std::int64_t>(spec.faults.size());
                return 0;
            };
        });
    }

    {
        auto golden = std::make_shared<std::string>();
        auto* sub = app.add_subcommand("report-all", "run the full verification battery");
        sub->fallthrough();
        sub->add_option("--golden-dir", *golden, "directory of golden records");
        sub->callback([&, golden] {
            command_name = "report-all";
            action = [&, golden](Json& j) {
                std::string dir = golden->empty() ? default_golden_dir() : *golden;
                // The battery spans both builtin rules, so the header hashes
                // their texts together regardless of --rule.
                std::string both = std::string(frank_dpv_text()) + example2_text();
                j = report_header("report-all", "frank-dpv,example2", both);
                j["params"]["golden_dir"] = dir;
                auto results = run_acceptance(dir);
                Json rows = Json::array();
                int passed = 0;
                for (const auto& r : results) {
                    Json row;
                    row["id"] = r.id;
                    row["name"] = r.name;
                    row["passed"] = r.passed;
                    row["budget_seconds"] = r.budget;
                    if (timing) row["seconds"] = r.seconds;
                    row["detail"] = r.detail;
                    rows.push_back(row);
                    if (r.passed) ++passed;
                }
                j["result"]["criteria"] = rows;
                j["result"]["passed"] = passed;
                j["result"]["total"] = static_cast<std::int64_t>(results.size());
                j["result"]["all_passed"] = passed == static_cast<int>(results.size());
                return passed == static_cast<int>(results.size()) ? 0 : 1;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        rp = load_rule_pack(rule_arg);
    } catch (const error& e) {
        std::fprintf(stderr, "tilescope: --rule: %s\n", e.what());
        return 2;
    }

    Json j = report_header(command_name, rp.name, rp.text);
    auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    try {
        code = action(j);
    } catch (const error& e) {
        j["result"]["error"] = e.what();
        std::fprintf(stderr, "tilescope: %s\n", e.what());
        code = 1;
    }
    if (code == 2) return 2;
    if (timing)
        j["timing"]["seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string text = report_text(j);
    if (out_path.empty() || out_path == "-") {
        std::fputs(text.c_str(), stdout);
    } else {
        try {
            write_file(out_path, text);
        } catch (const error& e) {
            std::fprintf(stderr, "tilescope: %s\n", e.what());
            return 1;
        }
    }
    return code;
}
