#pragma once

#include <array>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

namespace hetnet {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Eigenvalue data of the bifocus O (node 0) and the periodic orbits C1, C2
// (nodes 1, 2), the unfolding parameter and the section geometry.
struct ModelParams {
    double C0 = 2.0, E0 = 1.0;
    double C1 = 2.0, E1 = 1.0;
    double C2 = 2.0, E2 = 1.0;
    double omega1 = 1.0, omega2 = 2.0;
    double gamma = 0.0;
    double eps = 1.0;
    double eps_in = 0.1, eps_out = 0.1;
    double theta1_in = 0.0, theta1_out = 0.0;
    double theta2_in = kPi, theta2_out = kPi;
    double surf_amp = 1.0;

    double C(int node) const { return node == 0 ? C0 : node == 1 ? C1 : C2; }
    double E(int node) const { return node == 0 ? E0 : node == 1 ? E1 : E2; }
    double omega(int j) const { return j == 1 ? omega1 : omega2; }
    double theta_in(int i) const { return i == 1 ? theta1_in : theta2_in; }
    double theta_out(int i) const { return i == 1 ? theta1_out : theta2_out; }
};

struct DerivedConstants {
    double delta0 = 0, delta1 = 0, delta2 = 0;
    double delta = 0;
    double xi = 0;
    double k_eps = 0;
};

// Throws InvalidParameters unless C_i > E_i > 0 for every node.
DerivedConstants derived_constants(const ModelParams& p);

// Right-hand side of the xi/delta identity, (1/C2)(1 + E2/C0 + E0 E2/(C0 C1)).
double xi_over_delta_identity(const ModelParams& p);

// Invariant violations of ModelParams (empty when valid).
std::vector<std::string> parameter_violations(const ModelParams& p);
void require_valid(const ModelParams& p);

struct DiophantineVerdict {
    bool pass = false;
    long m = 0, n = 0;      // pair with the smallest margin
    double margin = 0;      // |mC - nE| - d1 (|m|+|n|)^(-d2) at (m, n)
    int bound = 0;
};

// Exhaustive scan of 0 < |m|+|n| <= bound. Pairs (m,n) and (-m,-n) are equivalent,
// so only the half plane m > 0 or (m == 0, n > 0) is visited.
DiophantineVerdict check_diophantine(double C, double E, double d1, double d2, int bound);

struct DiophantineConfig {
    std::array<double, 3> d1{0.01, 0.01, 0.01};
    std::array<double, 3> d2{3.0, 3.0, 3.0};
    std::array<int, 3> bound{200, 200, 200};
};

struct HypothesisVerdict {
    std::string name;
    bool pass = false;
    bool checked = true;   // false for properties that hold by construction
    std::string witness;
    std::string note;
};

struct ValidationReport {
    std::vector<HypothesisVerdict> verdicts;
    std::vector<std::string> violations;
    bool pass = false;
};

ValidationReport validate_hypotheses(const ModelParams& p, const DiophantineConfig& cfg = {});

// Irrational-ratio preset used by the study commands and the acceptance suite.
ModelParams preset_params();

void to_json(nlohmann::json& j, const ModelParams& p);
// Strict: unknown or non-numeric fields raise Error(Config).
ModelParams params_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const DerivedConstants& d);
void to_json(nlohmann::json& j, const DiophantineVerdict& v);
void to_json(nlohmann::json& j, const ValidationReport& r);
DiophantineConfig dioph_from_json(const nlohmann::json& j);

} // namespace hetnet
