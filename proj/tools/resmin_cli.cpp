// Command-line front end over the C interface.

#include "resmin/resmin.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum ExitCode { kOk = 0, kChecksFailed = 1, kUsage = 2, kRuntime = 3 };

std::string last_error() {
    size_t n = 0;
    resmin_last_error(nullptr, 0, &n);
    std::string s(n, '\0');
    if (resmin_last_error(s.data(), n, &n) != RESMIN_OK || n == 0) return "unknown error";
    s.resize(n - 1);
    return s;
}

int report_failure(resmin_status st, const std::string& what) {
    std::cerr << "error: " << what << ": " << resmin_status_string(st) << ": " << last_error() << "\n";
    return st == RESMIN_ERR_INVALID_ARGUMENT || st == RESMIN_ERR_NULL_ARGUMENT ? kUsage : kRuntime;
}

// Reads a string output through the (buf, cap, needed) protocol.
template <class Getter>
std::optional<std::string> fetch(Getter get) {
    size_t n = 0;
    if (get(nullptr, 0, &n) != RESMIN_OK) return std::nullopt;
    std::string s(n, '\0');
    if (get(s.data(), n, &n) != RESMIN_OK) return std::nullopt;
    s.resize(n - 1);
    return s;
}

struct RunFlags {
    std::string config_path;
    std::string experiment, p, mode, theta, iters, out, seed, mark, dump;
};

int cmd_run(const RunFlags& f) {
    resmin_config* cfg = nullptr;
    resmin_status st;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) {
            std::cerr << "error: cannot read config file '" << f.config_path << "'\n";
            return kUsage;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        st = resmin_config_from_json(ss.str().c_str(), &cfg);
        if (st != RESMIN_OK) return report_failure(st, "config file '" + f.config_path + "'");
    } else if ((st = resmin_config_create(&cfg)) != RESMIN_OK) {
        return report_failure(st, "config");
    }

    // Flags override the file, applied in a fixed order.
    const std::pair<const char*, const std::string*> overrides[] = {
        {"experiment", &f.experiment}, {"p", &f.p},       {"mode", &f.mode}, {"theta", &f.theta}, {"iters", &f.iters},
        {"out", &f.out},               {"seed", &f.seed}, {"mark", &f.mark}, {"dump", &f.dump}};
    for (const auto& [key, value] : overrides) {
        if (value->empty()) continue;
        if ((st = resmin_config_set(cfg, key, value->c_str())) != RESMIN_OK) {
            const int code = report_failure(st, std::string("--") + key);
            resmin_config_destroy(cfg);
            return code;
        }
    }

    if (auto text = fetch([&](char* b, size_t c, size_t* n) { return resmin_config_to_json(cfg, b, c, n); }))
        std::cout << "configuration:\n" << *text << "\n";

    resmin_run* run = nullptr;
    st = resmin_run_experiment(cfg, 1, &run);
    resmin_config_destroy(cfg);
    if (st != RESMIN_OK) return report_failure(st, "run");

    int code = kOk;
    size_t n_io = 0;
    resmin_run_io_error_count(run, &n_io);
    for (size_t i = 0; i < n_io; ++i)
        if (auto msg = fetch([&](char* b, size_t c, size_t* n) { return resmin_run_io_error(run, i, b, c, n); }))
            std::cerr << "warning: could not write " << *msg << "\n";

    if (auto summary = fetch([&](char* b, size_t c, size_t* n) { return resmin_run_summary_json(run, b, c, n); })) {
        const auto j = nlohmann::json::parse(*summary);
        for (const auto& d : j["degrees"]) {
            std::printf("p=%d  iterations=%d  final Nel=%d", d["p"].get<int>(), d["iterations"].get<int>(),
                        d["final_nel"].get<int>());
            if (!d["error"].get<std::string>().empty()) {
                std::printf("  FAILED: %s", d["error"].get<std::string>().c_str());
                code = kRuntime;
            }
            std::printf("\n  slopes vs sqrt(Nel) (iterations >= %d):", d["fit_first_iteration"].get<int>());
            for (const auto& [k, v] : d["slopes"].items())
                if (!v.is_null()) std::printf(" %s=%.3f", k.c_str(), v.get<double>());
            std::printf("\n");
        }
    }
    resmin_run_destroy(run);
    return code;
}

int emit_report(resmin_report* rep, const std::string& out) {
    int passed = 0;
    resmin_report_passed(rep, &passed);
    const auto text = fetch([&](char* b, size_t c, size_t* n) { return resmin_report_json(rep, b, c, n); });
    resmin_report_destroy(rep);
    if (!text) {
        std::cerr << "error: report: " << last_error() << "\n";
        return kRuntime;
    }
    const auto j = nlohmann::json::parse(*text);
    for (const auto& c : j["checks"])
        std::printf("%s  %s  (value %s, tolerance %g)\n", c["passed"].get<bool>() ? "PASS" : "FAIL",
                    c["name"].get<std::string>().c_str(), c["value"].dump().c_str(), c["tolerance"].get<double>());
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) {
            std::cerr << "error: cannot write '" << out << "'\n";
            return kRuntime;
        }
        f << *text << "\n";
    }
    std::printf("%s\n", passed ? "all checks passed" : "some checks FAILED");
    return passed ? kOk : kChecksFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Residual-minimisation mixed FEM: experiments and verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(resmin_version()));

    RunFlags rf;
    auto* run = app.add_subcommand("run", "run an experiment (smooth, lshape, advdiff, linear)");
    run->add_option("--config", rf.config_path, "JSON config file; flags override its keys")->check(CLI::ExistingFile);
    run->add_option("--experiment", rf.experiment, "smooth | lshape | advdiff | linear");
    run->add_option("--p", rf.p, "polynomial degrees, e.g. 2 or 1,2,3");
    run->add_option("--mode", rf.mode, "uniform | adaptive");
    run->add_option("--theta", rf.theta, "bulk marking fraction in (0,1)");
    run->add_option("--iters", rf.iters, "number of solve steps (0: experiment default)");
    run->add_option("--out", rf.out, "output directory");
    run->add_option("--seed", rf.seed, "seed for randomised parts");
    run->add_option("--mark", rf.mark, "marking indicator: eta | eta_tilde");
    run->add_option("--dump", rf.dump, "iterations with mesh dumps, e.g. 0,5,10");

    std::uint64_t seed = 12345;
    std::string report_out;
    int triangles = 100;
    auto* verify = app.add_subcommand("verify", "run the property and identity suites");
    verify->add_option("--seed", seed, "seed for random samples");
    verify->add_option("--out", report_out, "write the JSON report to this file");

    auto* fortin = app.add_subcommand("fortin", "report on the biorthogonal boundary system for p = 1");
    fortin->add_option("--seed", seed, "seed for random triangles");
    fortin->add_option("--triangles", triangles, "number of random triangles")->check(CLI::PositiveNumber);
    fortin->add_option("--out", report_out, "write the JSON report to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (run->parsed()) return cmd_run(rf);
    resmin_report* rep = nullptr;
    resmin_status st;
    if (verify->parsed())
        st = resmin_verify(seed, &rep);
    else
        st = resmin_fortin_report(seed, triangles, &rep);
    if (st != RESMIN_OK) return report_failure(st, verify->parsed() ? "verify" : "fortin");
    return emit_report(rep, report_out);
}
