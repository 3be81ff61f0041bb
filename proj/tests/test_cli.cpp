#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    fs::path log = fs::temp_directory_path() / "hetnet_cli_test.log";
    std::string cmd = std::string(HETNET_CLI) + " " + args + " > " + log.string() + " 2>&1";
    int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    std::ifstream f(log);
    std::stringstream ss;
    ss << f.rdbuf();
    r.out = ss.str();
    return r;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream f(p);
    return nlohmann::json::parse(f);
}

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("hetnet_cli_" + name);
    fs::remove_all(d);
    return d;
}

} // namespace

TEST_CASE("validate on the shipped preset exits 0") {
    auto d = scratch("validate");
    Run r = run("--config " + std::string(PRESET_CONFIG) + " --out " + d.string() + " validate");
    CHECK(r.code == 0);
    auto idx = read_json(d / "index.json");
    CHECK(idx["pass"] == true);
    CHECK(idx["artifacts"].size() == 1);
    CHECK(idx["artifacts"][0]["sha256"].get<std::string>().size() == 64);
}

TEST_CASE("horseshoe at gamma = 0 reports coincident manifolds") {
    auto d = scratch("hs0");
    Run r = run("--out " + d.string() + " horseshoe --gamma 0 --n-min 2 --n-max 3 --grid 16");
    CHECK(r.code == 1);
    CHECK(r.out.find("coincident manifolds") != std::string::npos);
}

TEST_CASE("switch over all words of length 3") {
    auto d = scratch("switch3");
    Run r = run("--out " + d.string() + " switch --all-words 3");
    CHECK(r.code == 0);
    auto realized = read_json(d / "realized.json");
    CHECK(realized.size() == 8);
}

TEST_CASE("configuration errors exit 2") {
    CHECK(run("--config /nonexistent/config.json validate").code == 2);
    CHECK(run("no-such-command").code == 2);
    auto bad = fs::temp_directory_path() / "hetnet_bad_config.json";
    std::ofstream(bad) << R"({"model": {"C0": 1.0, "E0": 2.0}})";
    CHECK(run("--config " + bad.string() + " --out " + scratch("bad").string() + " validate").code == 1);
    std::ofstream(bad) << R"({"unknown": 1})";
    CHECK(run("--config " + bad.string() + " validate").code == 2);
}

TEST_CASE("outputs are byte-identical across runs") {
    auto a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run("--seed 4 --out " + a.string() + " --plot-bundle return-map --grid 64").code == 0);
    REQUIRE(run("--seed 4 --out " + b.string() + " --plot-bundle return-map --grid 64").code == 0);
    auto ia = read_json(a / "index.json"), ib = read_json(b / "index.json");
    CHECK(ia["artifacts"] == ib["artifacts"]);
    CHECK(ia["artifacts"].size() == 2);
}

TEST_CASE("flow scenarios") {
    CHECK(run("--out " + scratch("amp").string() + " flow amplitude").code == 0);
    CHECK(run("--out " + scratch("het").string() + " flow het-shoot").code == 0);
    CHECK(run("--out " + scratch("cl").string() + " flow compare-local --samples 100").code == 0);
    auto d = scratch("orbit");
    CHECK(run("--out " + d.string() + " flow orbit --t-end 20").code == 0);
    std::ifstream f(d / "trajectory.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "t,x1,x2,x3,x4");
}
