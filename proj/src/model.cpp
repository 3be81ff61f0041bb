#include "hetnet/model.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "hetnet/errors.hpp"

namespace hetnet {

namespace {

bool rates_ok(double C, double E) { return C > E && E > 0.0; }

// Distance between two angles on the circle.
double circle_distance(double a, double b) {
    double d = std::fmod(std::fabs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

std::string pair_text(long m, long n) {
    std::ostringstream os;
    os << "(m,n)=(" << m << "," << n << ")";
    return os.str();
}

} // namespace

DerivedConstants derived_constants(const ModelParams& p) {
    for (int node = 0; node < 3; ++node) {
        if (!rates_ok(p.C(node), p.E(node))) {
            std::ostringstream os;
            os << "node " << node << " requires C > E > 0, got C=" << p.C(node) << " E=" << p.E(node);
            throw Error(ErrorKind::InvalidParameters, os.str());
        }
    }
    if (!(p.eps > 0.0))
        throw Error(ErrorKind::InvalidParameters, "eps must be positive");
    DerivedConstants d;
    d.delta0 = p.C0 / p.E0;
    d.delta1 = p.C1 / p.E1;
    d.delta2 = p.C2 / p.E2;
    d.delta = d.delta0 * d.delta1 * d.delta2;
    d.xi = (1.0 / p.E1) * (1.0 + p.C1 / p.E0 + p.C0 * p.C1 / (p.E0 * p.E2));
    d.k_eps = std::pow(p.eps, 1.0 - d.delta);
    return d;
}

double xi_over_delta_identity(const ModelParams& p) {
    return (1.0 / p.C2) * (1.0 + p.E2 / p.C0 + p.E0 * p.E2 / (p.C0 * p.C1));
}

std::vector<std::string> parameter_violations(const ModelParams& p) {
    std::vector<std::string> out;
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) out.push_back(std::string(name) + " is not finite");
    };
    finite(p.C0, "C0"); finite(p.E0, "E0"); finite(p.C1, "C1"); finite(p.E1, "E1");
    finite(p.C2, "C2"); finite(p.E2, "E2"); finite(p.omega1, "omega1"); finite(p.omega2, "omega2");
    finite(p.gamma, "gamma"); finite(p.eps, "eps"); finite(p.eps_in, "eps_in"); finite(p.eps_out, "eps_out");
    finite(p.surf_amp, "surf_amp");
    if (!out.empty()) return out;

    const char* names[3] = {"C0 > E0 > 0", "C1 > E1 > 0", "C2 > E2 > 0"};
    for (int node = 0; node < 3; ++node)
        if (!rates_ok(p.C(node), p.E(node))) out.push_back(names[node]);
    if (!(p.omega1 > 0.0)) out.push_back("omega1 > 0");
    if (!(p.omega2 > 0.0)) out.push_back("omega2 > 0");
    if (p.omega1 == p.omega2) out.push_back("omega1 != omega2");
    if (!(p.gamma >= 0.0)) out.push_back("gamma >= 0");
    if (!(p.eps > 0.0)) out.push_back("eps > 0");
    if (!(p.eps_in > 0.0 && p.eps_in < 0.5)) out.push_back("0 < eps_in << 1 (eps_in < 0.5)");
    if (!(p.eps_out > 0.0 && p.eps_out < 0.5)) out.push_back("0 < eps_out << 1 (eps_out < 0.5)");
    if (!(p.surf_amp > 0.0)) out.push_back("surf_amp > 0");
    double w = 2.0 * std::max(p.eps_in, p.eps_out);
    if (!(circle_distance(p.theta1_in, p.theta2_in) > w))
        out.push_back("C1_in and C2_in overlap (|theta1_in - theta2_in| <= 2 max(eps_in, eps_out))");
    if (!(circle_distance(p.theta1_out, p.theta2_out) > w))
        out.push_back("C1_out and C2_out overlap (|theta1_out - theta2_out| <= 2 max(eps_in, eps_out))");
    return out;
}

void require_valid(const ModelParams& p) {
    auto v = parameter_violations(p);
    if (v.empty()) return;
    std::string msg;
    for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
    throw Error(ErrorKind::InvalidParameters, msg);
}

DiophantineVerdict check_diophantine(double C, double E, double d1, double d2, int bound) {
    if (!(d1 > 0.0) || !(d2 > 0.0) || bound < 1)
        throw Error(ErrorKind::Precondition, "check_diophantine needs d1 > 0, d2 > 0, bound >= 1");
    DiophantineVerdict v;
    v.bound = bound;
    v.margin = std::numeric_limits<double>::infinity();
    for (long m = 0; m <= bound; ++m) {
        long nmax = bound - m;
        for (long n = -nmax; n <= nmax; ++n) {
            if (m == 0 && n <= 0) continue;
            double s = static_cast<double>(m + std::labs(n));
            double margin = std::fabs(m * C - n * E) - d1 * std::pow(s, -d2);
            if (margin < v.margin) {
                v.margin = margin;
                v.m = m;
                v.n = n;
            }
        }
    }
    v.pass = v.margin > 0.0;
    return v;
}

ValidationReport validate_hypotheses(const ModelParams& p, const DiophantineConfig& cfg) {
    ValidationReport r;
    r.violations = parameter_violations(p);

    const char* rate_names[3] = {"P1", "P2", "P3"};
    for (int node = 0; node < 3; ++node) {
        HypothesisVerdict h;
        h.name = rate_names[node];
        h.pass = rates_ok(p.C(node), p.E(node)) && p.omega1 > 0 && p.omega2 > 0;
        std::ostringstream os;
        os << "C" << node << "=" << p.C(node) << " E" << node << "=" << p.E(node);
        h.witness = os.str();
        if (!rates_ok(p.C(node), p.E(node))) h.note = "rate ordering C > E > 0 violated";
        r.verdicts.push_back(h);
    }

    HypothesisVerdict p4{"P4", true, false, "", "holds by construction: global_maps psi21 at gamma=0 maps {r2_out=1} onto {r1_in=1}"};
    HypothesisVerdict p5{"P5", true, false, "", "holds by construction: global_maps psi02/psi10 are gamma-independent"};
    HypothesisVerdict p6{"P6", true, false, "", "holds by construction: global_maps psi21 surface crosses {r1_in=1} along two circles for gamma>0"};
    r.verdicts.push_back(p4);
    r.verdicts.push_back(p5);
    r.verdicts.push_back(p6);

    bool p7 = true;
    std::string witness;
    for (int node = 0; node < 3; ++node) {
        std::ostringstream os;
        if (!rates_ok(p.C(node), p.E(node)) || cfg.bound[node] < 1) {
            p7 = false;
            os << "node " << node << ": not checked";
        } else {
            auto v = check_diophantine(p.C(node), p.E(node), cfg.d1[node], cfg.d2[node], cfg.bound[node]);
            p7 = p7 && v.pass;
            os << "node " << node << ": " << (v.pass ? "pass" : "fail") << " worst " << pair_text(v.m, v.n)
               << " margin " << v.margin << " bound " << v.bound;
        }
        witness += (witness.empty() ? "" : "; ") + os.str();
    }
    r.verdicts.push_back({"P7", p7, true, witness, "finite scan only"});

    r.pass = r.violations.empty();
    for (const auto& h : r.verdicts)
        if (h.checked && !h.pass) r.pass = false;
    return r;
}

ModelParams preset_params() {
    ModelParams p;
    p.C0 = 1.2731; p.E0 = 1.0319;
    p.C1 = 1.3127; p.E1 = 1.0693;
    p.C2 = 1.1923; p.E2 = 0.9712;
    p.omega1 = 0.0814;
    p.omega2 = 0.2714;
    p.gamma = 0.01;
    p.eps = 1.0;
    p.eps_in = 0.1;
    p.eps_out = 0.1;
    p.theta1_in = 0.0; p.theta1_out = 0.0;
    p.theta2_in = kPi; p.theta2_out = kPi;
    p.surf_amp = 1.0;
    return p;
}

namespace {

struct Field {
    const char* name;
    double ModelParams::*member;
};

constexpr Field kFields[] = {
    {"C0", &ModelParams::C0}, {"E0", &ModelParams::E0},
    {"C1", &ModelParams::C1}, {"E1", &ModelParams::E1},
    {"C2", &ModelParams::C2}, {"E2", &ModelParams::E2},
    {"omega1", &ModelParams::omega1}, {"omega2", &ModelParams::omega2},
    {"gamma", &ModelParams::gamma}, {"eps", &ModelParams::eps},
    {"eps_in", &ModelParams::eps_in}, {"eps_out", &ModelParams::eps_out},
    {"theta1_in", &ModelParams::theta1_in}, {"theta1_out", &ModelParams::theta1_out},
    {"theta2_in", &ModelParams::theta2_in}, {"theta2_out", &ModelParams::theta2_out},
    {"surf_amp", &ModelParams::surf_amp},
};

} // namespace

void to_json(nlohmann::json& j, const ModelParams& p) {
    j = nlohmann::json::object();
    for (const auto& f : kFields) j[f.name] = p.*(f.member);
}

ModelParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Config, "model parameters must be a JSON object");
    ModelParams p;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const Field* hit = nullptr;
        for (const auto& f : kFields)
            if (it.key() == f.name) hit = &f;
        if (!hit) throw Error(ErrorKind::Config, "unknown model field '" + it.key() + "'");
        if (!it.value().is_number()) throw Error(ErrorKind::Config, "field '" + it.key() + "' must be a number");
        p.*(hit->member) = it.value().get<double>();
    }
    return p;
}

void to_json(nlohmann::json& j, const DerivedConstants& d) {
    j = {{"delta0", d.delta0}, {"delta1", d.delta1}, {"delta2", d.delta2},
         {"delta", d.delta}, {"xi", d.xi}, {"k_eps", d.k_eps}};
}

void to_json(nlohmann::json& j, const DiophantineVerdict& v) {
    j = {{"pass", v.pass}, {"m", v.m}, {"n", v.n}, {"margin", v.margin}, {"bound", v.bound}};
}

void to_json(nlohmann::json& j, const ValidationReport& r) {
    j = nlohmann::json::object();
    j["pass"] = r.pass;
    j["violations"] = r.violations;
    auto arr = nlohmann::json::array();
    for (const auto& h : r.verdicts)
        arr.push_back({{"name", h.name}, {"pass", h.pass}, {"checked", h.checked},
                       {"witness", h.witness}, {"note", h.note}});
    j["hypotheses"] = arr;
}

DiophantineConfig dioph_from_json(const nlohmann::json& j) {
    DiophantineConfig c;
    if (!j.is_object()) throw Error(ErrorKind::Config, "diophantine config must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "d1" && k != "d2" && k != "bound")
            throw Error(ErrorKind::Config, "unknown diophantine field '" + k + "'");
        auto fill = [&](auto& arr) {
            using T = typename std::decay_t<decltype(arr)>::value_type;
            if (it.value().is_number()) {
                arr.fill(it.value().get<T>());
            } else if (it.value().is_array() && it.value().size() == 3) {
                for (int i = 0; i < 3; ++i) arr[i] = it.value()[i].get<T>();
            } else {
                throw Error(ErrorKind::Config, "diophantine field '" + k + "' must be a number or 3-array");
            }
        };
        if (k == "d1") fill(c.d1);
        else if (k == "d2") fill(c.d2);
        else fill(c.bound);
    }
    return c;
}

} // namespace hetnet
