#include "resmin/experiments.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace resmin {

using nlohmann::json;

void ExperimentConfig::validate() const
{
    if (experiment != "smooth" && experiment != "lshape" && experiment != "advdiff" && experiment != "linear")
        throw std::invalid_argument("experiment must be one of smooth, lshape, advdiff, linear (got '" + experiment + "')");
    if (degrees.empty()) throw std::invalid_argument("at least one degree p is required");
    for (int p : degrees)
        if (p < 1 || p > 3) throw std::invalid_argument("p must lie in {1, 2, 3} (got " + std::to_string(p) + ")");
    if (mode != "uniform" && mode != "adaptive") throw std::invalid_argument("mode must be uniform or adaptive");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
    if (iterations < 0) throw std::invalid_argument("iters must be >= 1 (or 0 for the default)");
    if (mark != "eta" && mark != "eta_tilde") throw std::invalid_argument("mark must be eta or eta_tilde");
    if (out.empty()) throw std::invalid_argument("out must be a directory path");
}

namespace {

void set_from_json(ExperimentConfig& c, const std::string& key, const json& v)
{
    if (key == "experiment") {
        c.experiment = v.get<std::string>();
    } else if (key == "p") {
        c.degrees.clear();
        if (v.is_array())
            for (const auto& x : v) c.degrees.push_back(x.get<int>());
        else
            c.degrees.push_back(v.get<int>());
    } else if (key == "mode") {
        c.mode = v.get<std::string>();
    } else if (key == "theta") {
        c.theta = v.get<double>();
    } else if (key == "iters") {
        c.iterations = v.get<int>();
    } else if (key == "out") {
        c.out = v.get<std::string>();
    } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
    } else if (key == "mark") {
        c.mark = v.get<std::string>();
    } else if (key == "dump") {
        c.dump_iterations = v.get<std::vector<int>>();
    } else {
        throw std::invalid_argument("unknown configuration key '" + key + "'");
    }
}

} // namespace

ExperimentConfig config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    ExperimentConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        try {
            set_from_json(c, it.key(), it.value());
        } catch (const json::exception& e) {
            throw std::invalid_argument("config key '" + it.key() + "': " + e.what());
        }
    }
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& c)
{
    json j = {{"experiment", c.experiment}, {"p", c.degrees}, {"mode", c.mode}, {"theta", c.theta},
              {"iters", c.iterations},      {"out", c.out},    {"seed", c.seed}, {"mark", c.mark},
              {"dump", c.dump_iterations}};
    return j.dump(2);
}

void apply_override(ExperimentConfig& c, const std::string& key, const std::string& value)
{
    json v;
    if (key == "experiment" || key == "mode" || key == "out" || key == "mark") {
        v = value;
    } else if (key == "p" || key == "dump") {
        // Comma-separated integer list.
        json arr = json::array();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) {
                try {
                    arr.push_back(std::stoi(item));
                } catch (const std::exception&) {
                    throw std::invalid_argument("'" + key + "' expects integers, got '" + item + "'");
                }
            }
        v = arr;
    } else {
        try {
            v = json::parse(value);
        } catch (const json::exception&) {
            throw std::invalid_argument("'" + key + "' expects a number, got '" + value + "'");
        }
    }
    try {
        set_from_json(c, key, v);
    } catch (const json::exception& e) {
        throw std::invalid_argument("'" + key + "': " + e.what());
    }
}

int default_iterations(const std::string& experiment, const std::string& mode, int p)
{
    if (mode == "uniform") return p == 1 ? 7 : 6;
    if (experiment == "lshape") return p == 1 ? 30 : 40;
    if (experiment == "advdiff") return p == 1 ? 36 : (p == 2 ? 38 : 40);
    return 10;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(y[i] > 0.0) || !(x[i] > 0.0) || !std::isfinite(y[i])) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

const std::vector<std::string>& slope_series()
{
    static const std::vector<std::string> s{"eta",      "eta_tilde",  "err_full", "err_u_nu_1h", "err_q_0h",
                                            "err_q_star_h", "err_L2_u", "err_L2_nu", "osc"};
    return s;
}

double series_value(const IterationRecord& r, const std::string& name)
{
    if (name == "eta") return r.eta;
    if (name == "eta_tilde") return r.eta_tilde;
    if (name == "err_full") return r.err_full;
    if (name == "err_u_nu_1h") return r.err_u_nu_1h;
    if (name == "err_q_0h") return r.err_q_0h;
    if (name == "err_q_star_h") return r.err_q_star_h;
    if (name == "err_L2_u") return r.err_l2_u;
    if (name == "err_L2_nu") return r.err_l2_nu;
    if (name == "osc") return r.osc;
    throw std::invalid_argument("unknown series '" + name + "'");
}

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json record_json(const IterationRecord& r)
{
    json j = {{"iter", r.iter},
              {"Nel", r.nel},
              {"flux_dofs", r.flux_dofs},
              {"scalar_dofs", r.scalar_dofs},
              {"eta", r.eta},
              {"eta_tilde", r.eta_tilde},
              {"marked", r.marked.size()},
              {"h_min", r.h_min},
              {"h_max", r.h_max},
              {"solver_residual", r.solver_residual}};
    if (r.has_errors)
        j["errors"] = {{"full", r.err_full},         {"u_nu_1h", r.err_u_nu_1h}, {"grad_u_nu", r.err_grad_u_nu},
                       {"q_0h", r.err_q_0h},         {"q_star_h", r.err_q_star_h}, {"L2_u", r.err_l2_u},
                       {"L2_nu", r.err_l2_nu},       {"osc", r.osc},            {"delta", r.delta},
                       {"delta_undefined", r.delta_undefined}, {"effectivity", r.effectivity}};
    return j;
}

json slopes_json(const std::vector<std::pair<std::string, double>>& s)
{
    json j = json::object();
    for (const auto& [k, v] : s) j[k] = std::isfinite(v) ? json(v) : json(nullptr);
    return j;
}

std::vector<std::pair<std::string, double>> fit_all(const std::vector<IterationRecord>& recs, int first, bool errors)
{
    std::vector<std::pair<std::string, double>> out;
    for (const auto& name : slope_series()) {
        if (!errors && name != "eta" && name != "eta_tilde") continue;
        std::vector<double> x, y;
        for (std::size_t i = static_cast<std::size_t>(std::max(first, 0)); i < recs.size(); ++i) {
            x.push_back(std::sqrt(static_cast<double>(recs[i].nel)));
            y.push_back(series_value(recs[i], name));
        }
        out.emplace_back(name, fit_slope(x, y));
    }
    return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files)
{
    config.validate();
    namespace fs = std::filesystem;
    ExperimentResult result;
    result.config = config;
    const ProblemSpec problem = preset(config.experiment);
    const bool uniform = config.mode == "uniform";

    auto try_io = [&](const std::string& what, auto&& fn) {
        if (!write_files) return;
        try {
            fn();
        } catch (const std::exception& e) {
            result.io_errors.push_back(what + ": " + e.what());
        }
    };
    try_io("create " + config.out, [&] { fs::create_directories(config.out); });
    try_io("config.json", [&] {
        std::ofstream f(fs::path(config.out) / "config.json");
        if (!f) throw std::runtime_error("cannot open for writing");
        f << config_to_json(config) << "\n";
    });

    json summary = {{"experiment", config.experiment},
                    {"mode", config.mode},
                    {"theta", config.theta},
                    {"mark", config.mark},
                    {"axis", "sqrt(Nel)"},
                    {"slope_definition", "least-squares slope of log(value) against log(sqrt(Nel))"},
                    {"fit_window", "all iterations except the first two meshes"},
                    {"tail_window", "last half of the iterations (at least three)"},
                    {"degrees", json::array()}};

    for (int p : config.degrees) {
        DegreeSummary ds;
        ds.p = p;
        const fs::path dir = fs::path(config.out) / ("p" + std::to_string(p));
        try_io("create " + dir.string(), [&] { fs::create_directories(dir); });

        std::ofstream log;
        try_io("log.jsonl", [&] {
            log.open(dir / "log.jsonl");
            if (!log) throw std::runtime_error("cannot open for writing");
        });

        AdaptiveOptions opt;
        opt.theta = config.theta;
        opt.uniform = uniform;
        opt.iterations = config.iterations > 0 ? config.iterations : default_iterations(config.experiment, config.mode, p);
        opt.mark_with_eta_tilde = config.mark == "eta_tilde";
        opt.on_iteration = [&](const IterationRecord& rec, const TriMesh& mesh, const EstimatorReport&) {
            if (!write_files) return;
            if (log.is_open()) log << record_json(rec).dump() << "\n" << std::flush;
            for (int d : config.dump_iterations)
                if (d == rec.iter) {
                    char name[32];
                    std::snprintf(name, sizeof name, "mesh_iter%02d", rec.iter);
                    try_io(name, [&] { write_mesh(mesh, (dir / name).string()); });
                }
        };
        ds.run = run_adaptive(problem, p, opt);
        const auto& recs = ds.run.records;
        const int n = static_cast<int>(recs.size());
        const bool errors = problem.exact.has_value();

        try_io("convergence.csv", [&] {
            std::ofstream f(dir / "convergence.csv");
            if (!f) throw std::runtime_error("cannot open for writing");
            f << "iter,Nel,sqrtNel,eta,eta_tilde,err_full,err_L2_u,err_L2_nu,delta,effectivity\n";
            for (const auto& r : recs)
                f << r.iter << ',' << r.nel << ',' << num(std::sqrt(static_cast<double>(r.nel))) << ',' << num(r.eta)
                  << ',' << num(r.eta_tilde) << ',' << num(r.err_full) << ',' << num(r.err_l2_u) << ','
                  << num(r.err_l2_nu) << ',' << num(r.delta) << ',' << num(r.effectivity) << '\n';
        });
        try_io("errors.csv", [&] {
            std::ofstream f(dir / "errors.csv");
            if (!f) throw std::runtime_error("cannot open for writing");
            f << "iter,Nel,flux_dofs,scalar_dofs,err_u_nu_1h,err_grad_u_nu,err_q_0h,err_q_star_h,osc,h_min,h_max,"
                 "marked\n";
            for (const auto& r : recs)
                f << r.iter << ',' << r.nel << ',' << r.flux_dofs << ',' << r.scalar_dofs << ','
                  << num(r.err_u_nu_1h) << ',' << num(r.err_grad_u_nu) << ',' << num(r.err_q_0h) << ','
                  << num(r.err_q_star_h) << ',' << num(r.osc) << ',' << num(r.h_min) << ',' << num(r.h_max) << ','
                  << r.marked.size() << '\n';
        });

        ds.fit_first = 2;
        ds.tail_first = std::max(0, std::min(n - 3, n / 2));
        ds.slopes = fit_all(recs, ds.fit_first, errors);
        ds.tail_slopes = fit_all(recs, ds.tail_first, errors);

        if (n >= 3 && errors) {
            double lo = 1e300, hi = 0.0;
            for (int i = n - 3; i < n; ++i) {
                lo = std::min(lo, recs[i].effectivity);
                hi = std::max(hi, recs[i].effectivity);
            }
            ds.effectivity_variation = lo > 0 ? (hi - lo) / lo : std::numeric_limits<double>::infinity();
        }
        if (!uniform) {
            int near = 0, total = 0, near_all = 0, total_all = 0, in_strip = 0;
            for (const auto& r : recs) {
                for (const auto& c : r.marked_centroids) {
                    const bool is_near = c.norm() <= 0.25;
                    if (r.iter >= 5) {
                        ++total_all;
                        near_all += is_near;
                    }
                    if (r.iter >= 5 && r.iter <= 9) {
                        ++total;
                        near += is_near;
                    }
                    in_strip += (c.x() >= 0.9 || c.y() >= 0.9);
                }
            }
            int all_marked = 0;
            for (const auto& r : recs) all_marked += static_cast<int>(r.marked.size());
            if (config.experiment == "lshape" && total > 0) ds.corner_fraction = static_cast<double>(near) / total;
            if (config.experiment == "lshape" && total_all > 0)
                ds.corner_fraction_all = static_cast<double>(near_all) / total_all;
            if (config.experiment == "advdiff" && all_marked > 0) {
                // Strip within 0.1 of x = 1 or y = 1 has area 0.19.
                const double inside = in_strip / 0.19, outside = (all_marked - in_strip) / 0.81;
                ds.layer_density_ratio = outside > 0 ? inside / outside : std::numeric_limits<double>::infinity();
            }
        }

        json d = {{"p", p},
                  {"iterations", n},
                  {"final_nel", n ? recs.back().nel : 0},
                  {"converged", ds.run.converged},
                  {"error", ds.run.error},
                  {"fit_first_iteration", ds.fit_first},
                  {"tail_first_iteration", ds.tail_first},
                  {"slopes", slopes_json(ds.slopes)},
                  {"tail_slopes", slopes_json(ds.tail_slopes)},
                  {"final", n ? record_json(recs.back()) : json(nullptr)}};
        if (errors) {
            d["effectivity_variation_last3"] = ds.effectivity_variation;
            json deltas = json::array();
            for (const auto& r : recs) deltas.push_back(r.delta);
            d["delta"] = deltas;
        }
        if (ds.corner_fraction >= 0) d["marked_fraction_near_origin_iter_5_9"] = ds.corner_fraction;
        if (ds.corner_fraction_all >= 0) d["marked_fraction_near_origin_iter_ge5"] = ds.corner_fraction_all;
        if (ds.layer_density_ratio >= 0) d["marked_density_ratio_outflow_strip"] = std::isfinite(ds.layer_density_ratio) ? json(ds.layer_density_ratio) : json("inf");
        summary["degrees"].push_back(d);
        result.degrees.push_back(std::move(ds));
    }
    summary["io_errors"] = result.io_errors;
    result.summary_json = summary.dump(2);
    try_io("summary.json", [&] {
        std::ofstream f(fs::path(config.out) / "summary.json");
        if (!f) throw std::runtime_error("cannot open for writing");
        f << result.summary_json << "\n";
    });
    return result;
}

} // namespace resmin
