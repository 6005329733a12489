#include "glil/gheat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "glil/error.hpp"

namespace glil {

VolatilityBand::VolatilityBand(double lo, double hi) : lo_(lo), hi_(hi)
{
    if (!(lo > 0.0) || !std::isfinite(hi) || !(lo <= hi)) {
        throw ConfigError("volatility band must satisfy 0 < sigma_lo <= sigma_hi < inf (got " +
                          std::to_string(lo) + ", " + std::to_string(hi) + ")");
    }
}

double g_eval(const VolatilityBand& band, double x) noexcept
{
    const double hi2 = band.hi() * band.hi();
    const double lo2 = band.lo() * band.lo();
    return x >= 0.0 ? 0.5 * hi2 * x : 0.5 * lo2 * x;
}

SpaceTimeGrid SpaceTimeGrid::standard(const VolatilityBand& band, double t_end)
{
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
    SpaceTimeGrid grid;
    grid.t_end = t_end;
    grid.half_width = 8.0 * band.hi() * std::sqrt(t_end);
    grid.dx = grid.half_width / 400.0;
    grid.dt = 0.9 * grid.dx * grid.dx / (band.hi() * band.hi());
    return grid;
}

void SpaceTimeGrid::validate(const VolatilityBand& band) const
{
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
    if (!(dx > 0.0) || !(dt > 0.0) || !(half_width > dx)) {
        throw ConfigError("grid needs dx > 0, dt > 0 and L > dx");
    }
    const double cfl = dx * dx / (band.hi() * band.hi());
    if (dt > cfl * (1.0 + 1e-12)) {
        throw ConfigError("CFL violated: dt = " + std::to_string(dt) + " > dx^2/sigma_hi^2 = " +
                          std::to_string(cfl));
    }
    const double needed = 6.0 * band.hi() * std::sqrt(t_end);
    if (half_width < needed) {
        throw ConfigError("grid half-width " + std::to_string(half_width) +
                          " < 6 sigma_hi sqrt(t_end) = " + std::to_string(needed));
    }
}

double GHeatSolution::value_at(double x) const
{
    if (x <= xs.front()) return values.front();
    if (x >= xs.back()) return values.back();
    const double dx = xs[1] - xs[0];
    const std::size_t mid = xs.size() / 2;
    // nodes are (i - mid) dx, so the origin is hit exactly
    const double s = x / dx + static_cast<double>(mid);
    const auto i = std::min(static_cast<std::size_t>(std::floor(s)), xs.size() - 2);
    const double w = s - static_cast<double>(i);
    if (w == 0.0) return values[i];
    return (1.0 - w) * values[i] + w * values[i + 1];
}

GHeatSolution solve_gheat(const PayoffSpec& payoff, const VolatilityBand& band,
                          const SpaceTimeGrid& grid)
{
    grid.validate(band);

    const auto half_nodes = static_cast<std::size_t>(std::llround(grid.half_width / grid.dx));
    const std::size_t nodes = 2 * half_nodes + 1;
    GHeatSolution sol;
    sol.t_end = grid.t_end;
    sol.steps = static_cast<std::size_t>(std::ceil(grid.t_end / grid.dt - 1e-9));
    sol.dt = grid.t_end / static_cast<double>(sol.steps);
    sol.xs.resize(nodes);
    sol.values.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        sol.xs[j] = (static_cast<double>(j) - static_cast<double>(half_nodes)) * grid.dx;
        sol.values[j] = payoff(sol.xs[j]);
    }
    const double reach = sol.xs.back() / (band.hi() * std::sqrt(grid.t_end));
    sol.clamp_mass = std::erfc(reach / std::numbers::sqrt2);

    // Forward Euler on interior rows; edge rows keep a zero second difference,
    // so they never move. Every coefficient stays nonnegative under the CFL
    // bound, hence the update is monotone.
    const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
    std::vector<double> next(sol.values);
    auto& u = sol.values;
    for (std::size_t step = 0; step < sol.steps; ++step) {
        for (std::size_t j = 1; j + 1 < nodes; ++j) {
            const double d2 = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * inv_dx2;
            next[j] = u[j] + sol.dt * g_eval(band, d2);
        }
        u.swap(next);
        next.front() = u.front();
        next.back() = u.back();
    }
    for (double v : u) {
        if (!std::isfinite(v)) throw NumericError("G-heat solver produced a non-finite value");
    }
    return sol;
}

ExpectationPair gnormal_pair(const PayoffSpec& payoff, const VolatilityBand& band,
                             const SpaceTimeGrid& grid)
{
    ExpectationPair pair;
    pair.upper = solve_gheat(payoff, band, grid).value_at(0.0);
    pair.lower = -solve_gheat(payoff.negated(), band, grid).value_at(0.0);
    return pair;
}

ConvexReference convex_reference(const PayoffSpec& payoff, double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be positive");
    using Rule = boost::math::quadrature::gauss<double, 20>;

    const auto& xs = payoff.xs();
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    auto weighted = [&](double y) {
        const double z = y / sigma;
        return payoff(y) * norm * std::exp(-0.5 * z * z);
    };
    // Beyond 40 sigma the Gaussian weight is below 1e-340.
    const double cut = 40.0 * sigma;

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double a = std::max(xs[i], -cut);
        const double b = std::min(xs[i + 1], cut);
        if (a < b) total += Rule::integrate(weighted, a, b);
    }
    // Clamped tails: constant values outside the grid.
    auto tail = [&](double edge) { return 0.5 * std::erfc(edge / (sigma * std::numbers::sqrt2)); };
    total += payoff.values().front() * tail(-xs.front());
    total += payoff.values().back() * tail(xs.back());

    return {total, payoff.is_convex(1e-9)};
}

}  // namespace glil
