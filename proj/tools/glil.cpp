// glil: reproducible experiments on sublinear expectations, the G-heat
// equation, its adversarial control dual and the LIL laboratory.
//
// Exit codes: 0 success, 2 configuration or validation error, 3 numeric
// failure, 4 a property check did not pass.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "glil/control_dual.hpp"
#include "glil/error.hpp"
#include "glil/gheat.hpp"
#include "glil/lil.hpp"
#include "glil/payoff.hpp"
#include "glil/rng.hpp"
#include "glil/strategy.hpp"
#include "glil/sublinear.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerdict = 4;

// ---------------------------------------------------------------------------
// Option parsing helpers

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::string piece;
    std::istringstream in(text);
    while (std::getline(in, piece, sep)) {
        if (!piece.empty()) out.push_back(piece);
    }
    return out;
}

double parse_real(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw glil::ConfigError("bad number '" + text + "' for " + what);
}

std::vector<double> parse_reals(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    for (const auto& p : split(text, ',')) out.push_back(parse_real(p, what));
    if (out.empty()) throw glil::ConfigError(what + " list is empty");
    return out;
}

/// Nonnegative integer, also written as 1e6 or 2.5e5.
std::size_t parse_count(const std::string& text, const std::string& what)
{
    const double v = parse_real(text, what);
    if (v < 0.0 || v != std::floor(v) || v > 9.0e15) {
        throw glil::ConfigError(what + " must be a nonnegative integer (got '" + text + "')");
    }
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> parse_counts(const std::string& text, const std::string& what)
{
    std::vector<std::size_t> out;
    for (const auto& p : split(text, ',')) out.push_back(parse_count(p, what));
    if (out.empty()) throw glil::ConfigError(what + " list is empty");
    return out;
}

glil::VolatilityBand parse_band(const std::string& text)
{
    const auto v = parse_reals(text, "--band");
    if (v.size() != 2) throw glil::ConfigError("--band takes LO,HI");
    return glil::VolatilityBand(v[0], v[1]);
}

std::string file_stem(const std::string& label)
{
    std::string out;
    for (char c : label) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
        if (keep) {
            out += c;
        } else if (out.empty() || out.back() != '_') {
            out += '_';
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

// ---------------------------------------------------------------------------
// Run bookkeeping

struct Common {
    std::string out_dir = "glil-out";
    std::string format = "csv";
    std::optional<std::uint64_t> master_seed;
    std::string band = "0.5,1.0";
};

/// Stochastic commands never fall back to a clock-based seed.
std::uint64_t require_seed(const Common& common, const std::string& why)
{
    if (!common.master_seed) throw glil::ConfigError("--master-seed is required for " + why);
    return *common.master_seed;
}

class Run {
public:
    Run(std::string command, const Common& common) : common_(common), start_(std::chrono::steady_clock::now())
    {
        manifest_["tool"] = "glil";
        manifest_["version"] = GLIL_VERSION;
        manifest_["command"] = std::move(command);
        manifest_["config"] = json::object();
        manifest_["config"]["band"] = common.band;
        manifest_["config"]["out"] = common.out_dir;
        manifest_["config"]["format"] = common.format;
        manifest_["config"]["master_seed"] =
            common.master_seed ? json(*common.master_seed) : json(nullptr);
        manifest_["verdicts"] = json::object();
        manifest_["files"] = json::array();
        fs::create_directories(common.out_dir);
    }

    json& config() { return manifest_["config"]; }
    json& results() { return manifest_["results"]; }
    bool csv() const { return common_.format == "csv"; }

    std::uint64_t master_seed(const std::string& why) const { return require_seed(common_, why); }

    void verdict(const std::string& name, bool pass)
    {
        manifest_["verdicts"][name] = pass;
        std::cout << (pass ? "PASS " : "FAIL ") << name << '\n';
        all_pass_ = all_pass_ && pass;
    }

    /// Writes `name`.csv through `csv_writer` or `name`.json from `data`.
    void write(const std::string& name, const std::function<void(std::ostream&)>& csv_writer,
               const json& data)
    {
        const std::string file = name + (csv() ? ".csv" : ".json");
        std::ofstream out(fs::path(common_.out_dir) / file, std::ios::binary);
        if (!out) throw glil::ConfigError("cannot write " + (fs::path(common_.out_dir) / file).string());
        if (csv()) {
            csv_writer(out);
        } else {
            out << data.dump(2) << '\n';
        }
        manifest_["files"].push_back(file);
    }

    int finish()
    {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        manifest_["pass"] = all_pass_;
        manifest_["wall_time_s"] = seconds;
        const auto path = fs::path(common_.out_dir) / "manifest.json";
        std::ofstream(path, std::ios::binary) << manifest_.dump(2) << '\n';
        std::cout << "manifest: " << path.string() << '\n';
        return all_pass_ ? kExitOk : kExitVerdict;
    }

private:
    const Common& common_;
    std::chrono::steady_clock::time_point start_;
    json manifest_;
    bool all_pass_ = true;
};

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
    std::string payoff = "square";
    std::string grid;
    double t = 1.0;
};

int cmd_solve(const Common& common, const SolveOptions& opt)
{
    const auto band = parse_band(common.band);
    const auto payoff = glil::parse_payoff(opt.payoff);
    auto grid = glil::SpaceTimeGrid::standard(band, opt.t);
    if (!opt.grid.empty()) {
        const auto g = parse_reals(opt.grid, "--grid");
        if (g.size() != 3) throw glil::ConfigError("--grid takes L,dx,dt");
        grid = {g[0], g[1], g[2], opt.t};
    }
    grid.validate(band);

    Run run("solve", common);
    run.config()["payoff"] = opt.payoff;
    run.config()["t"] = opt.t;
    run.config()["grid"] = {{"L", grid.half_width}, {"dx", grid.dx}, {"dt", grid.dt}};

    const auto upper = glil::solve_gheat(payoff, band, grid);
    const auto lower = glil::solve_gheat(payoff.negated(), band, grid);
    const double up = upper.value_at(0.0);
    const double lo = -lower.value_at(0.0);

    std::cout.precision(10);
    std::cout << "upper = " << up << '\n' << "lower = " << lo << '\n';
    run.results() = {{"upper", up},
                     {"lower", lo},
                     {"steps", upper.steps},
                     {"dt_used", upper.dt},
                     {"clamp_mass", upper.clamp_mass}};
    if (payoff.is_convex()) {
        run.results()["convex_reference_upper"] = glil::convex_reference(payoff, band.hi()).value;
        run.results()["convex_reference_lower"] = glil::convex_reference(payoff, band.lo()).value;
    }

    json table = json::array();
    for (std::size_t i = 0; i < upper.xs.size(); ++i) {
        table.push_back({{"x", upper.xs[i]}, {"upper", upper.values[i]}, {"lower", -lower.values[i]}});
    }
    run.write(
        "value_function",
        [&](std::ostream& out) {
            out.precision(17);
            out << "x,upper,lower\n";
            for (std::size_t i = 0; i < upper.xs.size(); ++i) {
                out << upper.xs[i] << ',' << upper.values[i] << ',' << -lower.values[i] << '\n';
            }
        },
        table);
    return run.finish();
}

// ---------------------------------------------------------------------------
// dual

struct DualOptions {
    bool clt = false;
    bool sandwich = false;
    bool lemma5 = false;
    std::vector<std::string> payoffs;
    std::string n = "10,20,50,100,200";
    std::string strategies = "random:10";
    std::string b = "0,0.1,-0.1,0.2,-0.2,0.4,-0.4";
    std::string paths = "1e4";
};

/// In the dual command an entry random:K stands for K randomized adapted
/// strategies drawn from the master seed.
std::vector<glil::AdversaryStrategy> dual_strategies(const std::string& text, const glil::VolatilityBand& band,
                                                     std::uint64_t master)
{
    std::vector<glil::AdversaryStrategy> out;
    std::uint64_t batch = 0;
    for (const auto& entry : split(text, ',')) {
        if (entry.rfind("random:", 0) == 0) {
            const auto count = parse_count(entry.substr(7), "random:K");
            for (auto& s : glil::random_strategies(count, band, glil::derive_seed(master, batch++))) {
                out.push_back(std::move(s));
            }
        } else {
            out.push_back(glil::AdversaryStrategy::parse(entry));
        }
    }
    if (out.empty()) throw glil::ConfigError("empty strategy list");
    return out;
}

int cmd_dual(const Common& common, DualOptions opt)
{
    if (!opt.clt && !opt.sandwich && !opt.lemma5) {
        throw glil::ConfigError("dual needs at least one of --clt, --sandwich, --lemma5");
    }
    const auto band = parse_band(common.band);
    const auto n_list = parse_counts(opt.n, "--n");
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (n_list[k] == 0 || (k > 0 && n_list[k] <= n_list[k - 1])) {
            throw glil::ConfigError("--n must be positive and strictly increasing");
        }
    }
    const std::size_t n_final = n_list.back();
    const auto lattice = glil::ControlLattice::standard(band, n_final);
    lattice.validate(band);
    const auto b_list = parse_reals(opt.b, "--b");
    const auto paths = parse_count(opt.paths, "--paths");
    std::vector<glil::AdversaryStrategy> strategies;
    if (opt.sandwich) {
        strategies = dual_strategies(opt.strategies, band, require_seed(common, "dual --sandwich"));
    }

    auto payoffs_for = [&](std::vector<std::string> fallback) {
        std::vector<glil::PayoffSpec> out;
        for (const auto& d : opt.payoffs.empty() ? fallback : opt.payoffs) out.push_back(glil::parse_payoff(d));
        return out;
    };

    Run run("dual", common);
    run.config()["modes"] = {{"clt", opt.clt}, {"sandwich", opt.sandwich}, {"lemma5", opt.lemma5}};
    run.config()["payoffs"] = opt.payoffs;
    run.config()["n"] = n_list;
    run.config()["b"] = b_list;
    run.config()["paths"] = paths;
    run.config()["strategies"] = opt.strategies;
    run.results() = json::object();

    if (opt.clt) {
        for (const auto& payoff : payoffs_for({"relu"})) {
            const auto table = glil::clt_convergence(payoff, band, n_list);
            const std::string stem = "clt_" + file_stem(payoff.name());
            run.write(stem, [&](std::ostream& out) { glil::write_csv(out, table); }, glil::to_json(table));
            run.results()[stem] = glil::to_json(table);
            run.verdict("clt:" + payoff.name(), table.pass());
        }
    }
    if (opt.sandwich) {
        const auto payoffs =
            payoffs_for({"relu", "lemma7_phi(1,1)", "indicator_smooth(-0.5,0.5,0.25)"});
        const auto report =
            glil::sandwich_check(payoffs, band, strategies, n_final, paths, run.master_seed("dual --sandwich"));
        run.write("sandwich", [&](std::ostream& out) { glil::write_csv(out, report); }, glil::to_json(report));
        std::vector<std::string> labels;
        for (const auto& s : strategies) labels.push_back(s.label());
        run.results()["sandwich_strategies"] = labels;
        run.verdict("sandwich", report.all_pass());
    }
    if (opt.lemma5) {
        for (const auto& payoff : payoffs_for({"lemma7_phi(1,1)"})) {
            std::vector<glil::ShiftCheck> checks;
            for (double b : b_list) checks.push_back(glil::shift_inequality_check(payoff, b, band, lattice));
            json rows = json::array();
            for (const auto& c : checks) rows.push_back(glil::to_json(c));
            const std::string stem = "lemma5_" + file_stem(payoff.name());
            run.write(stem, [&](std::ostream& out) { glil::write_csv(out, checks); }, rows);
            const bool pass = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
            run.verdict("shift:" + payoff.name(), pass);
        }
    }
    return run.finish();
}

// ---------------------------------------------------------------------------
// lil

struct LilOptions {
    bool theorem1 = false;
    bool cluster = false;
    bool moments = false;
    std::string horizon = "1e6";
    std::string strategies;
    std::string seeds = "1,2,3,4,5";
    std::string b = "0,0.3,-0.3";
    double rho = 1.5;
    double r = 4.0;
    std::string n = "100,1000,10000";
    std::string m = "0,100";
    std::string paths = "20000";
    bool trajectories = true;
};

std::string number_text(double x)
{
    std::ostringstream s;
    s << x;
    return s.str();
}

int cmd_lil(const Common& common, LilOptions opt)
{
    if (!opt.cluster && !opt.moments) opt.theorem1 = true;
    const auto band = parse_band(common.band);
    const auto horizon = parse_count(opt.horizon, "--N");
    if (horizon < 3) throw glil::ConfigError("--N must be at least 3 (ln ln n > 0 needs n >= 3)");
    std::vector<std::uint64_t> seeds;
    for (auto s : parse_counts(opt.seeds, "--seeds")) seeds.push_back(s);
    if (opt.strategies.empty()) {
        opt.strategies = "const:" + number_text(band.hi()) + ",const:" + number_text(band.lo());
    }
    const auto strategies = glil::parse_strategy_list(opt.strategies);
    const auto b_list = parse_reals(opt.b, "--b");
    if (opt.theorem1 && horizon < 100000) throw glil::ConfigError("the limsup experiment needs --N >= 1e5");
    if (opt.theorem1 && seeds.size() < 3) throw glil::ConfigError("the limsup experiment needs >= 3 seeds");
    if (opt.cluster) {
        for (double b : b_list) {
            if (!(std::abs(b) < band.lo())) {
                throw glil::ConfigError("cluster target b = " + number_text(b) +
                                        " must satisfy |b| < sigma_lo = " + number_text(band.lo()));
            }
        }
    }

    const auto master = require_seed(common, "lil");
    Run run("lil", common);
    run.config()["modes"] = {{"theorem1", opt.theorem1}, {"cluster", opt.cluster}, {"moments", opt.moments}};
    run.config()["N"] = horizon;
    run.config()["strategies"] = opt.strategies;
    run.config()["seeds"] = seeds;
    run.config()["b"] = b_list;
    run.config()["rho"] = opt.rho;
    run.results() = json::object();

    auto write_trajectory = [&](const std::string& stem, const glil::LILTrajectory& t) {
        if (!opt.trajectories) return;
        json j = {{"n", t.n}, {"S_n", t.sums}, {"R_n", t.stats}};
        run.write(stem, [&](std::ostream& out) { glil::write_csv(out, t); }, j);
    };

    if (opt.theorem1) {
        const auto result = glil::theorem1_experiment(band, strategies, horizon, seeds, master);
        run.write("theorem1", [&](std::ostream& out) { glil::write_csv(out, result); }, glil::to_json(result));
        for (std::size_t r = 0; r < result.trajectories.size(); ++r) {
            const auto& t = result.trajectories[r];
            write_trajectory("trajectory_" + file_stem(t.strategy) + "_seed" + std::to_string(seeds[r % seeds.size()]),
                             t);
        }
        run.results()["theorem1"] = glil::to_json(result);
        const auto& v = result.verdicts;
        run.verdict("limsup_upper_bound", v.upper_bound);
        run.verdict("limsup_reached", v.upper_reached);
        run.verdict("limsup_lower_scale", v.lower_scale);
        run.verdict("liminf_lower_bound", v.mirror_bound);
        run.verdict("liminf_reached", v.mirror_reached);
        run.verdict("liminf_lower_scale", v.mirror_lower_scale);
    }
    if (opt.cluster) {
        const auto result = glil::cluster_experiment(band, b_list, horizon, seeds, master, opt.rho);
        run.write("cluster", [&](std::ostream& out) { glil::write_csv(out, result); }, glil::to_json(result));
        for (std::size_t r = 0; r < result.trajectories.size(); ++r) {
            const auto& row = result.rows[r];
            write_trajectory("cluster_b" + file_stem(number_text(row.b)) + "_seed" +
                                 std::to_string(seeds[r % seeds.size()]),
                             result.trajectories[r]);
        }
        run.results()["cluster"] = glil::to_json(result);
        run.verdict("cluster", result.pass());
    }
    if (opt.moments) {
        const auto n_list = parse_counts(opt.n, "--n");
        const auto m_list = parse_counts(opt.m, "--m");
        const auto table = glil::moment_ratio_check(band, strategies.front(), opt.r, n_list, m_list,
                                                    parse_count(opt.paths, "--paths"), master);
        run.config()["r"] = opt.r;
        run.config()["n"] = n_list;
        run.config()["m"] = m_list;
        run.config()["paths"] = opt.paths;
        run.write("moments", [&](std::ostream& out) { glil::write_csv(out, table); }, glil::to_json(table));
        run.results()["moments"] = glil::to_json(table);
        run.verdict("moments_bounded", table.bounded);
        run.verdict("moments_flat", table.flat);
    }
    return run.finish();
}

// ---------------------------------------------------------------------------
// capacity

struct CapacityOptions {
    bool axioms = false;
    bool duality = false;
    bool continuity = false;
    bool bc1 = false;
    bool bc2 = false;
    bool independence = false;
    std::string model;
    std::size_t random_models = 100;
    std::size_t atoms = 6;
    std::size_t priors = 4;
    std::string p;
    std::size_t horizon = 20;
};

std::vector<glil::FinitePriorModel> capacity_models(const CapacityOptions& opt, Run& run,
                                                    std::vector<std::vector<std::vector<double>>>& rvs)
{
    std::vector<glil::FinitePriorModel> models;
    if (!opt.model.empty()) {
        const std::string path = opt.model.front() == '@' ? opt.model.substr(1) : opt.model;
        std::ifstream in(path);
        if (!in) throw glil::ConfigError("cannot open model file '" + path + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw glil::ConfigError("model file is not valid JSON: " + std::string(e.what()));
        }
        models.push_back(glil::model_from_json(j));
        std::vector<std::vector<double>> list;
        for (std::size_t a = 0; a < models.back().atom_count(); ++a) {
            list.push_back(models.back().indicator({a}));
        }
        if (list.size() < 2) list.push_back(std::vector<double>(models.back().atom_count(), 1.0));
        rvs.push_back(list);
        return models;
    }
    if (opt.atoms < 2 || opt.priors < 1) throw glil::ConfigError("--atoms >= 2 and --priors >= 1 required");
    glil::Engine rng = glil::make_engine(run.master_seed("random capacity models"), 0);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (std::size_t k = 0; k < opt.random_models; ++k) {
        models.push_back(glil::FinitePriorModel::random(opt.atoms, opt.priors, rng));
        std::vector<std::vector<double>> list(4, std::vector<double>(opt.atoms));
        for (auto& rv : list) {
            for (double& x : rv) x = u(rng);
        }
        auto dominated = list.front();
        for (double& x : dominated) x -= 0.5;
        list.push_back(dominated);
        rvs.push_back(list);
    }
    return models;
}

glil::ProductCoinModel coin_model(const CapacityOptions& opt, double default_p)
{
    if (opt.horizon < 1) throw glil::ConfigError("--M must be at least 1");
    if (opt.p.empty()) return glil::ProductCoinModel(default_p, default_p, opt.horizon);
    const auto p = parse_reals(opt.p, "--p");
    if (p.size() > 2) throw glil::ConfigError("--p takes LO or LO,HI");
    return glil::ProductCoinModel(p.front(), p.back(), opt.horizon);
}

int cmd_capacity(const Common& common, const CapacityOptions& opt)
{
    if (!opt.axioms && !opt.duality && !opt.continuity && !opt.bc1 && !opt.bc2 && !opt.independence) {
        throw glil::ConfigError(
            "capacity needs at least one of --axioms, --duality, --continuity, --bc1, --bc2, --independence");
    }
    const bool random_models = opt.model.empty() && (opt.axioms || opt.duality || opt.continuity);
    if (random_models) require_seed(common, "random capacity models");
    Run run("capacity", common);
    run.config()["modes"] = {{"axioms", opt.axioms},         {"duality", opt.duality},
                             {"continuity", opt.continuity}, {"bc1", opt.bc1},
                             {"bc2", opt.bc2},               {"independence", opt.independence}};
    run.config()["model"] = opt.model;
    run.config()["random_models"] = opt.random_models;
    run.config()["atoms"] = opt.atoms;
    run.config()["priors"] = opt.priors;
    run.config()["p"] = opt.p;
    run.config()["M"] = opt.horizon;
    run.results() = json::object();

    std::vector<std::vector<std::vector<double>>> rvs;
    std::vector<glil::FinitePriorModel> models;
    if (opt.axioms || opt.duality || opt.continuity) models = capacity_models(opt, run, rvs);

    if (opt.axioms) {
        json rows = json::array();
        double worst = 0.0;
        bool pass = true;
        for (std::size_t k = 0; k < models.size(); ++k) {
            const auto report = glil::verify_sublinear_axioms(models[k], rvs[k]);
            worst = std::max(worst, report.max_residual);
            pass = pass && report.all_pass();
            rows.push_back({{"model", k},
                            {"max_residual", report.max_residual},
                            {"monotonicity", report.monotonicity},
                            {"constant_preserving", report.constant_preserving},
                            {"subadditivity", report.subadditivity},
                            {"positive_homogeneity", report.positive_homogeneity}});
        }
        run.write(
            "axioms",
            [&](std::ostream& out) {
                out.precision(17);
                out << "model,max_residual,monotonicity,constant_preserving,subadditivity,positive_homogeneity\n";
                for (const auto& r : rows) {
                    out << r["model"] << ',' << r["max_residual"].get<double>() << ',' << int(r["monotonicity"])
                        << ',' << int(r["constant_preserving"]) << ',' << int(r["subadditivity"]) << ','
                        << int(r["positive_homogeneity"]) << '\n';
                }
            },
            rows);
        run.results()["axioms_max_residual"] = worst;
        run.verdict("axioms", pass && worst < glil::kExactTolerance);
    }
    if (opt.duality) {
        json rows = json::array();
        double worst = 0.0;
        for (std::size_t k = 0; k < models.size(); ++k) {
            const std::size_t atoms = models[k].atom_count();
            if (atoms > 16) throw glil::ConfigError("duality sweep enumerates events; at most 16 atoms");
            for (std::size_t mask = 0; mask < (std::size_t{1} << atoms); ++mask) {
                glil::Event event;
                for (std::size_t a = 0; a < atoms; ++a) {
                    if ((mask >> a) & 1U) event.push_back(a);
                }
                const auto check = glil::verify_duality(models[k], event);
                worst = std::max(worst, check.residual);
                rows.push_back({{"model", k},
                                {"event_mask", mask},
                                {"v_upper", check.v_upper},
                                {"v_lower_complement", check.v_lower_complement},
                                {"residual", check.residual}});
            }
        }
        run.write(
            "duality",
            [&](std::ostream& out) {
                out.precision(17);
                out << "model,event_mask,v_upper,v_lower_complement,residual\n";
                for (const auto& r : rows) {
                    out << r["model"] << ',' << r["event_mask"] << ',' << r["v_upper"].get<double>() << ','
                        << r["v_lower_complement"].get<double>() << ',' << r["residual"].get<double>() << '\n';
                }
            },
            rows);
        run.results()["duality_max_residual"] = worst;
        std::cout << "duality max residual = " << worst << '\n';
        run.verdict("duality", worst < glil::kExactTolerance);
    }
    if (opt.continuity) {
        json rows = json::array();
        bool pass = true;
        for (std::size_t k = 0; k < models.size(); ++k) {
            std::vector<glil::Event> chain{{}};
            for (std::size_t a = 0; a < models[k].atom_count(); ++a) {
                auto next = chain.back();
                next.push_back(a);
                chain.push_back(next);
            }
            const auto up = glil::verify_continuity(models[k], chain);
            std::reverse(chain.begin(), chain.end());
            const auto down = glil::verify_continuity(models[k], chain);
            pass = pass && up.all_pass() && down.all_pass();
            rows.push_back({{"model", k}, {"increasing", glil::to_json(up)}, {"decreasing", glil::to_json(down)}});
        }
        run.write(
            "continuity",
            [&](std::ostream& out) {
                out << "model,increasing_pass,decreasing_pass\n";
                for (const auto& r : rows) {
                    out << r["model"] << ',' << int(r["increasing"]["pass"].get<bool>()) << ','
                        << int(r["decreasing"]["pass"].get<bool>()) << '\n';
                }
            },
            rows);
        run.verdict("continuity", pass);
    }
    if (opt.bc1) {
        std::optional<glil::ProductCoinModel> coin;
        if (opt.p.empty()) {
            // varying band: coordinate i succeeds with probability in [2^-(i+1), 2^-i]
            std::vector<double> lo;
            std::vector<double> hi;
            for (std::size_t i = 1; i <= opt.horizon; ++i) {
                hi.push_back(std::ldexp(1.0, -static_cast<int>(i)));
                lo.push_back(std::ldexp(1.0, -static_cast<int>(i) - 1));
            }
            coin.emplace(lo, hi);
        } else {
            coin.emplace(coin_model(opt, 0.5));
        }
        const auto table = glil::bc_convergent_table(*coin, opt.horizon);
        bool pass = true;
        json rows = json::array();
        for (std::size_t k = 0; k < table.size(); ++k) {
            pass = pass && table[k].pass && (k == 0 || table[k].tail_sum <= table[k - 1].tail_sum);
            rows.push_back(glil::to_json(table[k]));
        }
        run.write(
            "bc_convergent",
            [&](std::ostream& out) {
                out.precision(17);
                out << "n,M,union_capacity,tail_sum,pass\n";
                for (const auto& r : table) {
                    out << r.n << ',' << r.horizon << ',' << r.union_capacity << ',' << r.tail_sum << ','
                        << int(r.pass) << '\n';
                }
            },
            rows);
        run.verdict("bc_convergent", pass);
    }
    if (opt.bc2) {
        const auto coin = coin_model(opt, 0.5);
        std::vector<glil::DivergentBound> table;
        json rows = json::array();
        bool pass = true;
        for (std::size_t n = 1; n <= opt.horizon; ++n) {
            table.push_back(glil::bc_divergent_check(coin, n, opt.horizon));
            pass = pass && table.back().pass;
            rows.push_back(glil::to_json(table.back()));
        }
        run.write(
            "bc_divergent",
            [&](std::ostream& out) {
                out.precision(17);
                out << "n,M,union_lower_capacity,complement,product,exp_bound,pass\n";
                for (const auto& r : table) {
                    out << r.n << ',' << r.horizon << ',' << r.union_lower_capacity << ',' << r.complement << ','
                        << r.product << ',' << r.exp_bound << ',' << int(r.pass) << '\n';
                }
            },
            rows);
        std::cout.precision(10);
        std::cout << "1 - v(union) = " << table.front().complement << " <= exp bound "
                  << table.front().exp_bound << '\n';
        run.verdict("bc_divergent", pass);
    }
    if (opt.independence) {
        const auto coin = coin_model(opt, 0.5);
        const glil::CoinSet sets[] = {glil::CoinSet::none, glil::CoinSet::zero, glil::CoinSet::one,
                                      glil::CoinSet::both};
        json rows = json::array();
        bool pass = true;
        for (std::size_t i = 1; i <= opt.horizon; ++i) {
            for (std::size_t j = i + 1; j <= opt.horizon; ++j) {
                for (auto d : sets) {
                    for (auto g : sets) {
                        const auto c = glil::pairwise_independence_check(coin, i, j, d, g);
                        pass = pass && c.upper_pass && c.lower_pass;
                        auto row = glil::to_json(c);
                        row["i"] = i;
                        row["j"] = j;
                        row["D"] = static_cast<unsigned>(d);
                        row["G"] = static_cast<unsigned>(g);
                        rows.push_back(row);
                    }
                }
            }
        }
        run.write(
            "independence",
            [&](std::ostream& out) {
                out.precision(17);
                out << "i,j,D,G,upper_residual,lower_residual,pass\n";
                for (const auto& r : rows) {
                    out << r["i"] << ',' << r["j"] << ',' << r["D"] << ',' << r["G"] << ','
                        << r["upper_residual"].get<double>() << ',' << r["lower_residual"].get<double>() << ','
                        << int(r["upper_pass"].get<bool>() && r["lower_pass"].get<bool>()) << '\n';
                }
            },
            rows);
        run.verdict("independence", pass);
    }
    return run.finish();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"glil: sublinear expectations, G-heat solver, control dual and LIL laboratory"};
    app.set_version_flag("--version", std::string(GLIL_VERSION));
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags win");
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--band", common.band, "Volatility band LO,HI")->capture_default_str();
    app.add_option("--out", common.out_dir, "Output directory")->capture_default_str();
    app.add_option("--format", common.format, "Data file format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--master-seed", common.master_seed, "Master seed of every random stream");

    SolveOptions solve;
    auto* solve_cmd = app.add_subcommand("solve", "Solve the G-heat equation for one payoff");
    solve_cmd->add_option("--payoff", solve.payoff, "Payoff name or @file")->capture_default_str();
    solve_cmd->add_option("--grid", solve.grid, "Grid override L,dx,dt");
    solve_cmd->add_option("--t", solve.t, "Final time")->capture_default_str();

    DualOptions dual;
    auto* dual_cmd = app.add_subcommand("dual", "Control dual: CLT table, sandwich and shift inequality");
    dual_cmd->add_flag("--clt", dual.clt, "Discrete values against the PDE over --n");
    dual_cmd->add_flag("--sandwich", dual.sandwich, "Monte Carlo strategies between the DP bounds");
    dual_cmd->add_flag("--lemma5", dual.lemma5, "Shift inequality over --b");
    dual_cmd->add_option("--payoff", dual.payoffs, "Payoff (repeatable)")->delimiter('\0');
    dual_cmd->add_option("--n", dual.n, "Step counts")->capture_default_str();
    dual_cmd->add_option("--strategies", dual.strategies, "Strategies; random:K expands to K")
        ->capture_default_str();
    dual_cmd->add_option("--b", dual.b, "Shifts")->capture_default_str();
    dual_cmd->add_option("--paths", dual.paths, "Monte Carlo paths")->capture_default_str();

    LilOptions lil;
    auto* lil_cmd = app.add_subcommand("lil", "Law of the iterated logarithm laboratory");
    lil_cmd->add_flag("--theorem1", lil.theorem1, "limsup/liminf experiment (default mode)");
    lil_cmd->add_flag("--cluster", lil.cluster, "Steer the statistic toward interior targets --b");
    lil_cmd->add_flag("--moments", lil.moments, "Maximal moment ratio table");
    lil_cmd->add_option("--N", lil.horizon, "Horizon")->capture_default_str();
    lil_cmd->add_option("--strategies", lil.strategies, "Strategies (default const:HI,const:LO)");
    lil_cmd->add_option("--seeds", lil.seeds, "Seeds")->capture_default_str();
    lil_cmd->add_option("--b", lil.b, "Cluster targets")->capture_default_str();
    lil_cmd->add_option("--rho", lil.rho, "Block growth ratio")->capture_default_str();
    lil_cmd->add_option("--r", lil.r, "Moment order")->capture_default_str();
    lil_cmd->add_option("--n", lil.n, "Moment window lengths")->capture_default_str();
    lil_cmd->add_option("--m", lil.m, "Moment window offsets")->capture_default_str();
    lil_cmd->add_option("--paths", lil.paths, "Moment paths")->capture_default_str();
    lil_cmd->add_flag("!--no-trajectories", lil.trajectories, "Skip per-run trajectory files");

    CapacityOptions cap;
    auto* cap_cmd = app.add_subcommand("capacity", "Sublinear expectation and capacity checks");
    cap_cmd->add_flag("--axioms", cap.axioms, "Axioms of a sublinear expectation");
    cap_cmd->add_flag("--duality", cap.duality, "V(A) + v(A^c) = 1 over all events");
    cap_cmd->add_flag("--continuity", cap.continuity, "Monotone chains");
    cap_cmd->add_flag("--bc1", cap.bc1, "Subadditive tail bound");
    cap_cmd->add_flag("--bc2", cap.bc2, "Product bound");
    cap_cmd->add_flag("--independence", cap.independence, "Pairwise factorization on the coin model");
    cap_cmd->add_option("--model", cap.model, "Model JSON file (@path)");
    cap_cmd->add_option("--random-models", cap.random_models, "Random model count")->capture_default_str();
    cap_cmd->add_option("--atoms", cap.atoms, "Atoms per random model")->capture_default_str();
    cap_cmd->add_option("--priors", cap.priors, "Priors per random model")->capture_default_str();
    cap_cmd->add_option("--p", cap.p, "Coin success band LO[,HI]");
    cap_cmd->add_option("--M", cap.horizon, "Coin horizon")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*solve_cmd) return cmd_solve(common, solve);
        if (*dual_cmd) return cmd_dual(common, dual);
        if (*lil_cmd) return cmd_lil(common, lil);
        if (*cap_cmd) return cmd_capacity(common, cap);
    } catch (const glil::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const glil::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
