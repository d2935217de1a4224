#include "doctest.h"

#include "resmin/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace resmin;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("resmin_test_" + name);
    fs::remove_all(d);
    return d;
}

double slope_of(const std::vector<std::pair<std::string, double>>& s, const std::string& name) {
    for (const auto& [k, v] : s)
        if (k == name) return v;
    return NAN;
}

} // namespace

TEST_CASE("config parsing, defaults and overrides") {
    const ExperimentConfig c = config_from_json(
        R"({"experiment":"lshape","p":[1,3],"mode":"adaptive","theta":0.4,"iters":7,"out":"x","seed":9})");
    CHECK(c.experiment == "lshape");
    CHECK(c.degrees == std::vector<int>{1, 3});
    CHECK(c.mode == "adaptive");
    CHECK(c.theta == 0.4);
    CHECK(c.iterations == 7);
    CHECK(c.out == "x");
    CHECK(c.seed == 9);

    CHECK(config_from_json(R"({"p":2})").degrees == std::vector<int>{2});

    ExperimentConfig o = c;
    apply_override(o, "p", "2");
    apply_override(o, "theta", "0.7");
    apply_override(o, "mode", "uniform");
    CHECK(o.degrees == std::vector<int>{2});
    CHECK(o.theta == 0.7);
    CHECK(o.mode == "uniform");
    CHECK(o.experiment == "lshape");

    // Round trip.
    const ExperimentConfig r = config_from_json(config_to_json(c));
    CHECK(r.degrees == c.degrees);
    CHECK(r.theta == c.theta);
    CHECK(r.iterations == c.iterations);
}

TEST_CASE("config validation rejects bad values and unknown keys") {
    CHECK_THROWS_AS(config_from_json(R"({"unknown":1})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"p":4})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"p":[]})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"theta":1.0})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"theta":0})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"mode":"random"})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"experiment":"nope"})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"iters":-2})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("[1,2]"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("{bad json"), std::invalid_argument);
    ExperimentConfig c;
    CHECK_THROWS_AS(apply_override(c, "p", "1,x"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "colour", "red"), std::invalid_argument);
}

TEST_CASE("slope fit recovers exact power laws") {
    std::vector<double> x, y;
    for (int i = 1; i <= 6; ++i) {
        x.push_back(std::pow(2.0, i));
        y.push_back(3.5 * std::pow(x.back(), -2.75));
    }
    CHECK(fit_slope(x, y) == doctest::Approx(-2.75).epsilon(1e-12));
    // Non-positive values are skipped.
    y[2] = 0.0;
    CHECK(fit_slope(x, y) == doctest::Approx(-2.75).epsilon(1e-12));
    CHECK(std::isnan(fit_slope({1.0}, {1.0})));
}

TEST_CASE("default iteration counts") {
    CHECK(default_iterations("smooth", "uniform", 1) == 7);
    CHECK(default_iterations("smooth", "uniform", 3) == 6);
    CHECK(default_iterations("lshape", "adaptive", 1) >= 10);
    CHECK(default_iterations("advdiff", "adaptive", 3) >= 10);
}

TEST_CASE("artifacts, CSV schema and bitwise reproducibility") {
    ExperimentConfig c;
    c.experiment = "smooth";
    c.degrees = {1, 2};
    c.mode = "uniform";
    c.iterations = 4;
    c.dump_iterations = {0, 2};
    const fs::path a = scratch_dir("a"), b = scratch_dir("b");
    c.out = a.string();
    const ExperimentResult ra = run_experiment(c);
    c.out = b.string();
    const ExperimentResult rb = run_experiment(c);
    CHECK(ra.io_errors.empty());
    REQUIRE(ra.degrees.size() == 2);

    for (int p : {1, 2}) {
        const fs::path pa = a / ("p" + std::to_string(p)), pb = b / ("p" + std::to_string(p));
        const std::string conv = slurp(pa / "convergence.csv");
        CHECK(conv.rfind("iter,Nel,sqrtNel,eta,eta_tilde,err_full,err_L2_u,err_L2_nu,delta,effectivity\n", 0) == 0);
        CHECK(std::count(conv.begin(), conv.end(), '\n') == 5);
        CHECK(conv == slurp(pb / "convergence.csv"));
        CHECK(slurp(pa / "errors.csv") == slurp(pb / "errors.csv"));
        CHECK(fs::exists(pa / "log.jsonl"));
        CHECK(fs::exists(pa / "mesh_iter00.nodes"));
        CHECK(fs::exists(pa / "mesh_iter02.elems"));
        CHECK_FALSE(fs::exists(pa / "mesh_iter01.nodes"));
    }
    CHECK(fs::exists(a / "summary.json"));
    CHECK(config_from_json(slurp(a / "config.json")).iterations == 4);

    // Uniform refinement of the smooth problem: the L2 error of nu for p = 2
    // decays at rate p+2 = 4 against sqrt(Nel); the fit reports it negated.
    CHECK(slope_of(ra.degrees[1].slopes, "err_L2_nu") == doctest::Approx(-4.0).epsilon(0.05));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("unwritable output directory is reported, computation continues") {
    ExperimentConfig c;
    c.experiment = "linear";
    c.degrees = {1};
    c.iterations = 1;
    const fs::path blocker = scratch_dir("blocker");
    { std::ofstream(blocker) << "file, not a directory"; }
    c.out = (blocker / "sub").string();
    const ExperimentResult r = run_experiment(c);
    CHECK_FALSE(r.io_errors.empty());
    REQUIRE(r.degrees.size() == 1);
    CHECK(r.degrees[0].run.records.size() == 1);
    fs::remove(blocker);
}
