// Command-line front end. Every command writes its artifacts and an index.json into --out.
// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error, 3 internal error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/flow.hpp"
#include "hetnet/geometry.hpp"
#include "hetnet/horseshoe.hpp"
#include "hetnet/io.hpp"
#include "hetnet/model.hpp"
#include "hetnet/return_map.hpp"
#include "hetnet/sections.hpp"

using namespace hetnet;
using nlohmann::json;

namespace {

struct RunConfig {
    ModelParams model;
    HHCoefficients flow;
    DiophantineConfig dioph;
    unsigned long seed = 1;
    json echo;
};

RunConfig load_config(const std::string& path, long seed_flag) {
    RunConfig rc;
    rc.model = preset_params();
    json j = json::object();
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) throw Error(ErrorKind::Config, "cannot open config " + path);
        try {
            j = json::parse(f);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Config, std::string("config parse error: ") + e.what());
        }
        if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
        for (auto& [k, v] : j.items()) {
            if (k == "model") rc.model = params_from_json(v);
            else if (k == "flow") rc.flow = coefficients_from_json(v);
            else if (k == "diophantine") rc.dioph = dioph_from_json(v);
            else if (k == "seed") {
                if (!v.is_number_unsigned()) throw Error(ErrorKind::Config, "seed must be a non-negative integer");
                rc.seed = v.get<unsigned long>();
            } else
                throw Error(ErrorKind::Config, "unknown config key '" + k + "'");
        }
    }
    if (seed_flag >= 0) rc.seed = static_cast<unsigned long>(seed_flag);
    json m;
    to_json(m, rc.model);
    rc.echo = {{"model", m}, {"flow", to_json(rc.flow)}, {"seed", rc.seed}};
    return rc;
}

std::vector<double> parse_list(const std::string& s, size_t n, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Config, std::string("bad number in ") + what + ": " + tok);
        }
    }
    if (v.size() != n) throw Error(ErrorKind::Config, std::string(what) + " needs " + std::to_string(n) + " values");
    return v;
}

std::string csv_of(const std::function<void(std::ostream&)>& fn) {
    std::ostringstream os;
    os.precision(17);
    fn(os);
    return os.str();
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Outcome {
    json summary;
    bool pass = true;
};

// ---------------------------------------------------------------- commands

Outcome cmd_validate(const RunConfig& rc, ArtifactWriter& out) {
    ValidationReport r = validate_hypotheses(rc.model, rc.dioph);
    json j;
    to_json(j, r);
    std::cout << j.dump(2) << "\n";
    out.write_json("validation.json", j);
    return {{{"pass", r.pass}, {"violations", r.violations}}, r.pass};
}

Outcome cmd_return_map(const RunConfig& rc, ArtifactWriter& out, const std::string& point, int grid, double gamma) {
    const ModelParams& p = rc.model;
    std::vector<SectionPoint> pts;
    if (!point.empty()) {
        auto v = parse_list(point, 3, "--point");
        pts.push_back({SectionId::Sigma1In, v[0], v[1], v[2]});
    } else {
        std::mt19937_64 rng(rc.seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (int i = 0; i < grid; ++i) {
            double gap = p.eps * std::pow(1e-12, U(rng));
            pts.push_back({SectionId::Sigma1In, 1.0 - gap, kTwoPi * U(rng), kTwoPi * U(rng)});
        }
    }
    double worst = 0;
    int escaped = 0;
    std::string csv = csv_of([&](std::ostream& os) {
        os << "r1in,phi1,phi2,closed_r2out,closed_phi1,closed_phi2,composed_r2out,composed_phi1,composed_phi2,"
              "discrepancy,symbol,return_r1in,return_phi1,return_phi2\n";
        for (const auto& q : pts) {
            SectionPoint a = g_closed(q, p), b = g_composed(q, p);
            double d = std::max({std::abs(a.radial - b.radial), std::abs(a.phi1 - b.phi1), std::abs(a.phi2 - b.phi2)});
            worst = std::max(worst, d);
            ReturnResult r = return_map(q, gamma, p);
            if (r.escaped) ++escaped;
            os << q.radial << ',' << q.phi1 << ',' << q.phi2 << ',' << a.radial << ',' << a.phi1 << ',' << a.phi2 << ','
               << b.radial << ',' << b.phi1 << ',' << b.phi2 << ',' << d << ',' << r.symbol << ',';
            if (r.escaped) os << ",,\n";
            else os << r.point.radial << ',' << r.point.phi1 << ',' << r.point.phi2 << '\n';
        }
    });
    out.write("return_map.csv", csv, "csv");
    bool pass = worst < 1e-10;
    return {{{"points", pts.size()}, {"max_discrepancy", worst}, {"escaped", escaped}, {"gamma", gamma}}, pass};
}

json verdict_json(const SpiralVerdict& v) {
    return {{"is_spiral", v.is_spiral}, {"theta_range", v.theta_range}, {"limit_h", v.limit_h},
            {"monotone_from", v.theta_monotone_from}, {"reason", v.reason}};
}

std::string sheet_csv(const SheetImage& s) {
    return csv_of([&](std::ostream& os) {
        os << "slice,source_angle,section,radial,phi1,phi2\n";
        for (size_t k = 0; k < s.slices.size(); ++k)
            for (const auto& q : s.slices[k].points)
                os << k << ',' << s.slices[k].source_angle << ',' << to_string(q.section) << ',' << q.radial << ','
                   << q.phi1 << ',' << q.phi2 << '\n';
    });
}

Outcome cmd_spirals(const RunConfig& rc, ArtifactWriter& out, const std::string& profile, const SheetGrid& grid) {
    MeridianProfile xi;
    if (profile == "constant") xi = constant_profile(0.0);
    else if (profile == "quadratic") xi = quadratic_profile();
    else throw Error(ErrorKind::Config, "unknown profile '" + profile + "' (constant, quadratic)");

    SheetImage img = sheet_image(xi, grid, rc.model);
    SheetImage pre = sheet_preimage(xi, grid, rc.model);
    out.write("sheet_image.csv", sheet_csv(img), "csv");
    out.write("sheet_preimage.csv", sheet_csv(pre), "csv");
    json verdicts = {{"image", json::array()}, {"preimage", json::array()}};
    for (const auto& s : img.slices) verdicts["image"].push_back(verdict_json(s.verdict));
    for (const auto& s : pre.slices) verdicts["preimage"].push_back(verdict_json(s.verdict));
    json scrolls = json::array();
    bool scroll_ok = true;
    for (int region : {1, 2}) {
        ScrollReport sr = scroll_check(region, grid, rc.model);
        scroll_ok = scroll_ok && sr.both_spiral && sr.interlaced;
        scrolls.push_back({{"region", region}, {"both_spiral", sr.both_spiral}, {"interlaced", sr.interlaced},
                           {"checked_angles", sr.checked_angles}});
    }
    verdicts["scrolls"] = scrolls;
    out.write_json("spiral_verdicts.json", verdicts);
    bool pass = img.all_spiral && pre.all_spiral && scroll_ok;
    return {{{"image_all_spiral", img.all_spiral}, {"preimage_all_spiral", pre.all_spiral}, {"scrolls_ok", scroll_ok},
             {"profile", profile}},
            pass};
}

Outcome cmd_connections(const RunConfig& rc, ArtifactWriter& out, double gamma, int n_min, int n_max, int sheet) {
    if (gamma == 0.0) {
        std::cerr << "coincident manifolds: at gamma = 0 the invariant manifolds coincide, no transverse connections\n";
        return {{{"gamma", gamma}, {"diagnostic", "coincident manifolds"}}, false};
    }
    ConnectionOptions opt;
    opt.sheet = sheet;
    auto curves = find_connections(gamma, n_min, n_max, rc.model, opt);
    std::map<int, int> counts;
    for (const auto& c : curves) ++counts[c.turn];
    std::string csv = csv_of([&](std::ostream& os) {
        os << "curve,turn,symbol,sheet,phi2_in,lam,gap,phi1_in\n";
        for (size_t k = 0; k < curves.size(); ++k)
            for (const auto& q : curves[k].points)
                os << k << ',' << curves[k].turn << ',' << curves[k].symbol << ',' << curves[k].sheet << ',' << q.phi2_in
                   << ',' << q.lam << ',' << q.gap << ',' << q.phi1_in << '\n';
    });
    out.write("connections.csv", csv, "csv");
    json per_n = json::object();
    bool pass = true;
    for (int N = n_min; N <= n_max; ++N) {
        per_n[std::to_string(N)] = counts[N];
        if (counts[N] != 2) pass = false;
    }
    // decay of the distance to {r1_in = 1} per turn
    json ratios = json::array();
    for (int N = n_min; N < n_max; ++N) {
        double a = 0, b = 0;
        for (const auto& c : curves) {
            if (c.turn == N) a = std::max(a, c.max_gap);
            if (c.turn == N + 1) b = std::max(b, c.max_gap);
        }
        if (a > 0 && b > 0) ratios.push_back(std::log(a / b));
    }
    return {{{"gamma", gamma}, {"total", curves.size()}, {"per_N", per_n}, {"log_gap_ratio", ratios}}, pass};
}

Outcome cmd_horseshoe(const RunConfig& rc, ArtifactWriter& out, double gamma, int n_min, int n_max, int grid) {
    if (n_min > n_max) throw Error(ErrorKind::Config, "--n-min exceeds --n-max");
    json reports = json::array();
    bool pass = true;
    std::vector<double> ns, lognu;
    std::string diag;
    if (gamma == 0.0) {
        diag = "coincident manifolds: at gamma = 0 R(S) and S do not intersect transversely";
        std::cerr << diag << "\n";
        pass = false;
    }
    for (int N = n_min; N <= n_max; ++N) {
        ConleyMoserReport r;
        try {
            r = verify_conley_moser(N, gamma, rc.model, grid);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NTooSmall) throw;
            reports.push_back({{"N", N}, {"pass", false}, {"error", e.what()}});
            pass = false;
            continue;
        }
        reports.push_back(to_json(r));
        pass = pass && r.pass;
        if (r.pass && r.nu_h > 0) {
            ns.push_back(N);
            lognu.push_back(std::log(r.nu_h));
        }
    }
    out.write_json("conley_moser.json", reports);
    json summary = {{"gamma", gamma}, {"n_min", n_min}, {"n_max", n_max}};
    if (ns.size() >= 2) {
        double s = slope(ns, lognu);
        summary["log_nu_h_slope"] = s;
        summary["slope_over_minus_two_pi"] = s / (-kTwoPi);
    }
    if (!diag.empty()) summary["diagnostic"] = diag;
    return {summary, pass};
}

Outcome cmd_switch(const RunConfig& rc, ArtifactWriter& out, const std::string& word, int all_words, int N,
                   double gamma) {
    std::vector<Word> words;
    if (all_words > 0) words = hetnet::all_words(all_words);
    else if (!word.empty()) words.push_back(parse_word(word));
    else throw Error(ErrorKind::Config, "switch needs --word or --all-words");

    json realized = json::array();
    int ok = 0;
    std::vector<WordRealization> rs;
    for (const auto& w : words) {
        WordRealization r;
        try {
            r = realize_word(w, N, gamma, rc.model);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RefinementFailure) throw;
            r.word = w;
            r.N = N;
            r.gamma = gamma;
            r.failure = e.what();
        }
        if (itinerary_verified(r)) ++ok;
        realized.push_back(to_json(r));
        rs.push_back(r);
    }
    std::string csv = csv_of([&](std::ostream& os) {
        os << "word,r1in,phi1,phi2,gap,verified,box_diameter\n";
        for (const auto& r : rs)
            os << word_string(r.word) << ',' << r.point.radial << ',' << r.point.phi1 << ',' << r.point.phi2 << ','
               << r.gap << ',' << (itinerary_verified(r) ? 1 : 0) << ',' << r.box_diameter << '\n';
    });
    out.write("realized.csv", csv, "csv");
    out.write_json("realized.json", realized);
    json summary = {{"words", words.size()}, {"verified", ok}, {"N", N}, {"gamma", gamma}};
    bool pass = ok == int(words.size());
    if (all_words > 0 && all_words <= 12) {
        LambdaCover cover = lambda_cover(N, gamma, all_words, rc.model);
        int inside = 0;
        for (const auto& r : rs)
            if (itinerary_verified(r) && cover_contains(cover, all_words, r)) ++inside;
        out.write("cover.csv", csv_of([&](std::ostream& os) { write_cover_csv(os, cover); }), "csv");
        summary["cover_content"] = cover.content;
        summary["cover_decreasing"] = cover.decreasing;
        summary["inside_cover"] = inside;
        pass = pass && cover.decreasing && inside == int(words.size());
    }
    return {summary, pass};
}

Outcome cmd_flow(const RunConfig& rc, ArtifactWriter& out, const std::string& scenario, double tol, double mu1,
                 int samples, const std::string& start, double t_end) {
    HHCoefficients c = rc.flow;
    if (scenario == "amplitude") {
        EquilibriaReport r = amplitude_equilibria(c);
        out.write_json("equilibria.json", to_json(r));
        double worst = 0;
        for (const auto& e : r.points) worst = std::max(worst, e.residual);
        return {{{"equilibria", r.points.size()}, {"max_residual", worst}}, worst < 1e-12};
    }
    if (scenario == "het-shoot") {
        c.mu1 = mu1;
        c.mu2 = het_curve(mu1, c).mu2;
        HetShootResult r = het_shoot(c, 1e-10, tol);
        json j = to_json(r);
        out.write_json("het_shoot.json", j);
        bool pass = r.converged && r.defect < 1e-6 && std::abs(r.mu2 - r.mu2_first_order) < 1e-4;
        return {j, pass};
    }
    if (scenario == "compare-local") {
        json arr = json::array();
        double worst = 0;
        for (int node = 0; node < 3; ++node) {
            LocalComparison r = compare_local(node, size_t(samples), rc.model, tol, unsigned(rc.seed) + unsigned(node));
            arr.push_back(to_json(r));
            worst = std::max({worst, r.max_radial, r.max_angle});
        }
        out.write_json("compare_local.json", arr);
        return {{{"max_deviation", worst}, {"tol", tol}}, worst < std::max(1e-8, 1e3 * tol)};
    }
    if (scenario == "orbit") {
        auto v = parse_list(start, 4, "--start");
        Vec y0(4);
        y0 << v[0], v[1], v[2], v[3];
        Field f = [&](double, const Vec& y, Vec& d) { d = truncated_field(y, c); };
        IntegrateOptions opt;
        opt.tol = tol;
        opt.events.push_back({"r1_eq_r2", [](double, const Vec& y) { return y[0] - y[1]; }, 0, false});
        Trajectory tr = integrate(f, y0, 0.0, t_end, opt);
        out.write("trajectory.csv", csv_of([&](std::ostream& os) { write_trajectory_csv(os, tr); }), "csv");
        json ev = json::array();
        for (const auto& e : tr.events)
            ev.push_back({{"name", e.name}, {"t", e.t}, {"direction", e.direction},
                          {"state", std::vector<double>(e.y.data(), e.y.data() + e.y.size())}});
        out.write_json("events.json", ev);
        return {{{"steps", tr.accepted}, {"rejected", tr.rejected}, {"events", tr.events.size()},
                 {"error_bound", tr.error_bound}, {"method", tr.method}},
                true};
    }
    throw Error(ErrorKind::Config, "unknown flow scenario '" + scenario + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heteroclinic network return maps, horseshoes and flow checks"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    long seed = -1;
    double tol = 1e-11;
    bool plot_bundle = false;
    app.add_option("--config", config_path, "JSON config with model, flow, diophantine and seed keys");
    app.add_option("--out", out_dir, "output directory (default out/<command>)");
    app.add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    app.add_option("--tol", tol, "integrator tolerance")->check(CLI::Range(1e-13, 1e-3));
    app.add_flag("--plot-bundle", plot_bundle, "zip the CSV artifacts with an index");

    app.add_subcommand("validate", "check the model hypotheses");

    auto* retmap = app.add_subcommand("return-map", "closed and composed first-return maps");
    std::string point;
    int grid = 1000;
    double gamma = NAN;
    retmap->add_option("--point", point, "r1in,phi1,phi2 on Sigma1In");
    retmap->add_option("--grid", grid, "number of random points")->check(CLI::PositiveNumber);
    retmap->add_option("--gamma", gamma, "unfolding parameter (default from config)");

    auto* spirals = app.add_subcommand("spirals", "spiralling sheets and scrolls");
    std::string profile = "quadratic";
    SheetGrid sgrid;
    spirals->add_option("--profile", profile, "meridian profile: constant or quadratic");
    spirals->add_option("--slices", sgrid.slices)->check(CLI::PositiveNumber);
    spirals->add_option("--samples", sgrid.samples)->check(CLI::Range(100, 1000000));
    spirals->add_option("--t-max", sgrid.t_max);

    auto* conns = app.add_subcommand("connections", "subsidiary connection curves");
    int n_min = 10, n_max = 15, sheet = 1;
    conns->add_option("--gamma", gamma);
    conns->add_option("--n-min", n_min);
    conns->add_option("--n-max", n_max);
    conns->add_option("--sheet", sheet)->check(CLI::Range(1, 2));

    auto* hs = app.add_subcommand("horseshoe", "Conley-Moser verification over a range of N");
    int hs_min = 2, hs_max = 7, hs_grid = 64;
    hs->add_option("--gamma", gamma);
    hs->add_option("--n-min", hs_min);
    hs->add_option("--n-max", hs_max);
    hs->add_option("--grid", hs_grid)->check(CLI::Range(8, 4096));

    auto* sw = app.add_subcommand("switch", "realize symbol words");
    std::string word;
    int all_words = 0, N = 2;
    sw->add_option("--word", word, "word over {1,2}, e.g. 1211212122");
    sw->add_option("--all-words", all_words, "realize every word of this length")->check(CLI::Range(1, 16));
    sw->add_option("--N", N, "shell index");
    sw->add_option("--gamma", gamma);

    auto* fl = app.add_subcommand("flow", "ODE checks of the truncated normal form");
    std::string scenario;
    double mu1 = -1e-3, t_end = 100.0;
    int samples = 1000;
    std::string start = "0.01,0.02,0,0";
    fl->add_option("scenario", scenario, "amplitude | het-shoot | compare-local | orbit")->required();
    fl->add_option("--mu1", mu1);
    fl->add_option("--samples", samples)->check(CLI::PositiveNumber);
    fl->add_option("--start", start, "r1,r2,phi1,phi2 for orbit");
    fl->add_option("--t-end", t_end);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig rc = load_config(config_path, seed);
        CLI::App* cmd = app.get_subcommands().front();
        std::string name = cmd->get_name();
        if (std::isnan(gamma)) gamma = rc.model.gamma;
        if (name == "return-map" || name == "horseshoe" || name == "switch" || name == "connections") {
            if (!(gamma >= 0)) throw Error(ErrorKind::Config, "--gamma must be non-negative");
        }
        json echo = rc.echo;
        echo["command_options"] = json::object();
        for (const CLI::Option* o : cmd->get_options())
            if (o->count() > 0) echo["command_options"][o->get_name()] = o->as<std::string>();
        echo["tol"] = tol;
        ArtifactWriter out(out_dir.empty() ? "out/" + name : out_dir, name, echo);

        Outcome res;
        if (name == "validate") res = cmd_validate(rc, out);
        else if (name == "return-map") res = cmd_return_map(rc, out, point, grid, gamma);
        else if (name == "spirals") res = cmd_spirals(rc, out, profile, sgrid);
        else if (name == "connections") res = cmd_connections(rc, out, gamma, n_min, n_max, sheet);
        else if (name == "horseshoe") res = cmd_horseshoe(rc, out, gamma, hs_min, hs_max, hs_grid);
        else if (name == "switch") res = cmd_switch(rc, out, word, all_words, N, gamma);
        else res = cmd_flow(rc, out, scenario, tol, mu1, samples, start, t_end);

        if (plot_bundle) out.write_plot_bundle();
        out.finish(res.summary, res.pass);
        if (name != "validate") std::cout << res.summary.dump(2) << "\n";
        return res.pass ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        auto k = e.kind();
        return (k == ErrorKind::Config || k == ErrorKind::InvalidParameters) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
