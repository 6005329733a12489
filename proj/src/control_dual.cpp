#include "glil/control_dual.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "glil/error.hpp"
#include "glil/parallel.hpp"
#include "glil/rng.hpp"

namespace glil {

ControlLattice ControlLattice::standard(const VolatilityBand& band, std::size_t n_steps, double t_end)
{
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
    ControlLattice lattice;
    lattice.n_steps = n_steps;
    lattice.t_end = t_end;
    lattice.half_width = 8.0 * band.hi() * std::sqrt(t_end);
    lattice.dx = lattice.half_width / 2000.0;
    return lattice;
}

double ControlLattice::boundary_weight(const VolatilityBand& band) const
{
    // Increments are bounded by sigma_hi sqrt(dt); Azuma-Hoeffding on the
    // running maximum of the martingale gives 2 exp(-L^2 / (2 sigma_hi^2 t)).
    const double scale = 2.0 * band.hi() * band.hi() * t_end;
    return std::min(1.0, 2.0 * std::exp(-half_width * half_width / scale));
}

void ControlLattice::validate(const VolatilityBand& band) const
{
    if (n_steps == 0) throw ConfigError("lattice needs at least one step");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
    if (!(dx > 0.0) || !(half_width > dx)) throw ConfigError("lattice needs dx > 0 and L > dx");
    const double weight = boundary_weight(band);
    if (weight > kBoundaryWeightLimit) {
        throw ConfigError("lattice too narrow: boundary hit probability bound " +
                          std::to_string(weight) + " exceeds 1e-6");
    }
}

DpSolution dp_solve(const PayoffSpec& payoff, const VolatilityBand& band,
                    const ControlLattice& lattice, Extreme extreme)
{
    lattice.validate(band);

    const auto half = static_cast<std::size_t>(std::llround(lattice.half_width / lattice.dx));
    const std::size_t nodes = 2 * half + 1;
    DpSolution sol;
    sol.xs.resize(nodes);
    sol.values.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        sol.xs[j] = (static_cast<double>(j) - static_cast<double>(half)) * lattice.dx;
        sol.values[j] = payoff(sol.xs[j]);
    }

    // Both stencil points of a given theta sit at the same fractional offset
    // from the nodes, so one (shift, weight) pair per theta serves every node.
    struct Stencil {
        std::ptrdiff_t shift;
        double weight;
    };
    std::vector<Stencil> stencils;
    const double step = std::sqrt(lattice.dt());
    for (double theta : {band.lo(), band.hi()}) {
        if (!stencils.empty() && band.degenerate()) break;
        const double s = theta * step / lattice.dx;
        const double whole = std::floor(s);
        stencils.push_back({static_cast<std::ptrdiff_t>(whole), s - whole});
    }

    const auto last = static_cast<std::ptrdiff_t>(nodes) - 1;
    auto at = [last](const std::vector<double>& v, std::ptrdiff_t i) {
        return v[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, last))];
    };

    std::vector<double> next(nodes);
    auto& v = sol.values;
    for (std::size_t k = 0; k < lattice.n_steps; ++k) {
        for (std::size_t jj = 0; jj < nodes; ++jj) {
            const auto j = static_cast<std::ptrdiff_t>(jj);
            double best = 0.0;
            for (std::size_t s = 0; s < stencils.size(); ++s) {
                const auto [m, f] = stencils[s];
                const double up = (1.0 - f) * at(v, j + m) + f * at(v, j + m + 1);
                const double down = f * at(v, j - m - 1) + (1.0 - f) * at(v, j - m);
                const double mean = 0.5 * (up + down);
                if (s == 0) {
                    best = mean;
                } else {
                    best = extreme == Extreme::upper ? std::max(best, mean) : std::min(best, mean);
                }
            }
            next[jj] = best;
        }
        v.swap(next);
    }
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericError("dynamic program produced a non-finite value");
    }
    return sol;
}

double dp_upper_value(const PayoffSpec& payoff, const VolatilityBand& band,
                      const ControlLattice& lattice)
{
    return dp_solve(payoff, band, lattice, Extreme::upper).value_at_origin();
}

double dp_lower_value(const PayoffSpec& payoff, const VolatilityBand& band,
                      const ControlLattice& lattice)
{
    return dp_solve(payoff, band, lattice, Extreme::lower).value_at_origin();
}

double dp_upper_value(const PayoffSpec& payoff, const VolatilityBand& band, std::size_t n_steps)
{
    return dp_upper_value(payoff, band, ControlLattice::standard(band, n_steps));
}

double dp_lower_value(const PayoffSpec& payoff, const VolatilityBand& band, std::size_t n_steps)
{
    return dp_lower_value(payoff, band, ControlLattice::standard(band, n_steps));
}

double dp_error_estimate(const PayoffSpec& payoff, const VolatilityBand& band,
                         const ControlLattice& lattice, Extreme extreme)
{
    ControlLattice fine = lattice;
    fine.dx = lattice.dx / 2.0;
    const double coarse_value = dp_solve(payoff, band, lattice, extreme).value_at_origin();
    const double fine_value = dp_solve(payoff, band, fine, extreme).value_at_origin();
    return std::abs(coarse_value - fine_value);
}

// ---------------------------------------------------------------------------

std::vector<double> mc_terminal_samples(const VolatilityBand& band, const AdversaryStrategy& strategy,
                                        std::size_t n_steps, std::size_t paths, std::uint64_t seed,
                                        double t_end)
{
    if (n_steps == 0 || paths == 0) throw InputError("Monte Carlo needs n_steps >= 1 and paths >= 1");
    if (!(t_end > 0.0)) throw InputError("t_end must be positive");
    const double root_dt = std::sqrt(t_end / static_cast<double>(n_steps));
    std::vector<double> terminal(paths);
    parallel_for(paths, [&](std::size_t p) {
        Engine engine = make_engine(seed, p);
        std::normal_distribution<double> normal;
        auto runner = strategy.start(band, p);
        double sum = 0.0;
        for (std::size_t i = 0; i < n_steps; ++i) {
            const double theta = runner->next({i, sum, sum});
            sum += theta * root_dt * normal(engine);
        }
        terminal[p] = sum;
    });
    return terminal;
}

StrategyValue mc_value(const PayoffSpec& payoff, std::span<const double> terminal, std::uint64_t seed)
{
    const std::size_t paths = terminal.size();
    if (paths < 2) throw InputError("Monte Carlo value needs at least two paths");
    std::vector<double> values(paths);
    for (std::size_t p = 0; p < paths; ++p) values[p] = payoff(terminal[p]);
    const double mean = pairwise_sum(values) / static_cast<double>(paths);
    for (double& v : values) v = (v - mean) * (v - mean);
    const double variance = pairwise_sum(values) / static_cast<double>(paths - 1);
    if (!std::isfinite(mean) || !std::isfinite(variance)) {
        throw NumericError("Monte Carlo estimate is not finite");
    }
    return {mean, std::sqrt(variance / static_cast<double>(paths)), paths, seed};
}

StrategyValue mc_strategy_value(const PayoffSpec& payoff, const VolatilityBand& band,
                                const AdversaryStrategy& strategy, std::size_t n_steps,
                                std::size_t paths, std::uint64_t seed)
{
    const auto terminal = mc_terminal_samples(band, strategy, n_steps, paths, seed);
    return mc_value(payoff, terminal, seed);
}

// ---------------------------------------------------------------------------

bool SandwichReport::all_pass() const
{
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; }) &&
           std::all_of(consistency.begin(), consistency.end(), [](const auto& r) { return r.pass; });
}

SandwichReport sandwich_check(std::span<const PayoffSpec> payoffs, const VolatilityBand& band,
                              std::span<const AdversaryStrategy> strategies, std::size_t n_steps,
                              std::size_t paths, std::uint64_t seed)
{
    const auto lattice = ControlLattice::standard(band, n_steps);
    const auto grid = SpaceTimeGrid::standard(band);

    SandwichReport report;
    for (const auto& payoff : payoffs) {
        DpPdeRow row{.payoff = payoff.name()};
        row.dp_upper = dp_upper_value(payoff, band, lattice);
        row.dp_lower = dp_lower_value(payoff, band, lattice);
        const auto pde = gnormal_pair(payoff, band, grid);
        row.pde_upper = pde.upper;
        row.pde_lower = pde.lower;
        row.pass = std::abs(row.dp_upper - row.pde_upper) <= kDpPdeTolerance &&
                   std::abs(row.dp_lower - row.pde_lower) <= kDpPdeTolerance;
        report.consistency.push_back(row);
    }

    for (std::size_t s = 0; s < strategies.size(); ++s) {
        const std::uint64_t stream = derive_seed(seed, s);
        const auto terminal = mc_terminal_samples(band, strategies[s], n_steps, paths, stream);
        for (std::size_t k = 0; k < payoffs.size(); ++k) {
            SandwichRow row{.payoff = payoffs[k].name(), .strategy = strategies[s].label(), .mc = {}};
            row.mc = mc_value(payoffs[k], terminal, stream);
            row.dp_lower = report.consistency[k].dp_lower;
            row.dp_upper = report.consistency[k].dp_upper;
            const double slack = 3.0 * row.mc.std_error + kSandwichSlack;
            row.pass = row.mc.estimate >= row.dp_lower - slack && row.mc.estimate <= row.dp_upper + slack;
            report.rows.push_back(row);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

ShiftCheck shift_inequality_check(const PayoffSpec& payoff, double b, const VolatilityBand& band,
                                  const ControlLattice& lattice)
{
    if (!std::isfinite(b)) throw InputError("shift b must be finite");
    if (!payoff.is_even()) throw InputError("shift inequality needs an even payoff");
    if (payoff.min_value() < 0.0) throw InputError("shift inequality needs a nonnegative payoff");

    const auto shifted = payoff.shifted(b);
    ShiftCheck check{.b = b};
    check.factor = std::exp(-b * b / (2.0 * band.lo() * band.lo()));
    check.lower_value = dp_lower_value(payoff, band, lattice);
    check.shifted_value = dp_lower_value(shifted, band, lattice);
    check.lhs = check.factor * check.lower_value;
    check.rhs = check.shifted_value;
    check.tolerance = 2.0 * std::max(dp_error_estimate(payoff, band, lattice, Extreme::lower),
                                     dp_error_estimate(shifted, band, lattice, Extreme::lower));
    check.pass = check.lhs <= check.rhs + check.tolerance;
    return check;
}

// ---------------------------------------------------------------------------

CltTable clt_convergence(const PayoffSpec& payoff, const VolatilityBand& band,
                         std::span<const std::size_t> n_list)
{
    if (n_list.empty()) throw InputError("convergence table needs at least one n");
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (n_list[k] == 0 || (k > 0 && n_list[k] <= n_list[k - 1])) {
            throw InputError("n list must be positive and strictly increasing");
        }
    }
    const double pde = solve_gheat(payoff, band, SpaceTimeGrid::standard(band)).value_at(0.0);

    CltTable table;
    for (std::size_t n : n_list) {
        CltRow row{.n = n, .pde_value = pde};
        row.dp_upper = dp_upper_value(payoff, band, n);
        row.gap = std::abs(row.dp_upper - pde);
        table.rows.push_back(row);
    }
    for (std::size_t k = 0; k + 1 < table.rows.size(); ++k) {
        table.decreasing = table.decreasing && table.rows[k + 1].gap <= table.rows[k].gap + kCltNoise;
    }
    table.final_ok = table.rows.back().gap <= kCltFinalGap;
    return table;
}

void write_csv(std::ostream& out, const CltTable& table)
{
    const auto precision = out.precision(17);
    out << "n,dp_upper,pde_value,gap\n";
    for (const auto& r : table.rows) {
        out << r.n << ',' << r.dp_upper << ',' << r.pde_value << ',' << r.gap << '\n';
    }
    out.precision(precision);
}

void write_csv(std::ostream& out, const SandwichReport& report)
{
    const auto precision = out.precision(17);
    out << "payoff,strategy,mc,std_error,paths,dp_lower,dp_upper,pass\n";
    for (const auto& r : report.rows) {
        out << r.payoff << ',' << r.strategy << ',' << r.mc.estimate << ',' << r.mc.std_error << ','
            << r.mc.paths << ',' << r.dp_lower << ',' << r.dp_upper << ',' << (r.pass ? 1 : 0)
            << '\n';
    }
    out.precision(precision);
}

void write_csv(std::ostream& out, std::span<const ShiftCheck> checks)
{
    const auto precision = out.precision(17);
    out << "b,factor,lower_value,shifted_value,lhs,rhs,tolerance,pass\n";
    for (const auto& c : checks) {
        out << c.b << ',' << c.factor << ',' << c.lower_value << ',' << c.shifted_value << ','
            << c.lhs << ',' << c.rhs << ',' << c.tolerance << ',' << (c.pass ? 1 : 0) << '\n';
    }
    out.precision(precision);
}

nlohmann::json to_json(const CltTable& table)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"n", r.n}, {"dp_upper", r.dp_upper}, {"pde_value", r.pde_value}, {"gap", r.gap}});
    }
    return {{"rows", rows}, {"decreasing", table.decreasing}, {"final_ok", table.final_ok},
            {"pass", table.pass()}};
}

nlohmann::json to_json(const SandwichReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"payoff", r.payoff},
                        {"strategy", r.strategy},
                        {"mc", r.mc.estimate},
                        {"std_error", r.mc.std_error},
                        {"paths", r.mc.paths},
                        {"dp_lower", r.dp_lower},
                        {"dp_upper", r.dp_upper},
                        {"pass", r.pass}});
    }
    nlohmann::json consistency = nlohmann::json::array();
    for (const auto& r : report.consistency) {
        consistency.push_back({{"payoff", r.payoff},
                               {"dp_upper", r.dp_upper},
                               {"dp_lower", r.dp_lower},
                               {"pde_upper", r.pde_upper},
                               {"pde_lower", r.pde_lower},
                               {"pass", r.pass}});
    }
    return {{"rows", rows}, {"dp_vs_pde", consistency}, {"pass", report.all_pass()}};
}

nlohmann::json to_json(const ShiftCheck& check)
{
    return {{"b", check.b},
            {"factor", check.factor},
            {"lower_value", check.lower_value},
            {"shifted_value", check.shifted_value},
            {"lhs", check.lhs},
            {"rhs", check.rhs},
            {"tolerance", check.tolerance},
            {"pass", check.pass}};
}

}  // namespace glil
