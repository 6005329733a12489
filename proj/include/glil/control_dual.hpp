#pragma once

// Discrete adversarial control problem behind the G-normal law.
//
// The dynamic program runs n steps of a two-point walk x -> x +- theta sqrt(dt)
// with theta chosen at every step from {sigma_lo, sigma_hi} by a maximizing
// (upper) or minimizing (lower) adversary. Monte Carlo evaluates any fixed
// adapted strategy with Gaussian increments; its value must lie between the
// two dynamic-programming values.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "glil/gheat.hpp"
#include "glil/payoff.hpp"
#include "glil/strategy.hpp"

namespace glil {

enum class Extreme { upper, lower };

struct ControlLattice {
    double half_width = 0.0;  // space grid [-L, L]
    double dx = 0.0;
    std::size_t n_steps = 1;
    double t_end = 1.0;

    double dt() const noexcept { return t_end / static_cast<double>(n_steps); }

    /// L = 8 sigma_hi sqrt(t_end), dx = L / 2000.
    static ControlLattice standard(const VolatilityBand& band, std::size_t n_steps,
                                   double t_end = 1.0);

    /// Azuma bound on the probability that any adapted walk leaves [-L, L]
    /// before t_end.
    double boundary_weight(const VolatilityBand& band) const;

    /// ConfigError if n_steps == 0, dx <= 0, or boundary_weight > 1e-6.
    void validate(const VolatilityBand& band) const;
};

inline constexpr double kBoundaryWeightLimit = 1e-6;

/// V_0 on the lattice nodes (i - mid) dx.
struct DpSolution {
    std::vector<double> xs;
    std::vector<double> values;
    double value_at_origin() const { return values[values.size() / 2]; }
};

DpSolution dp_solve(const PayoffSpec& payoff, const VolatilityBand& band,
                    const ControlLattice& lattice, Extreme extreme);

double dp_upper_value(const PayoffSpec& payoff, const VolatilityBand& band,
                      const ControlLattice& lattice);
double dp_lower_value(const PayoffSpec& payoff, const VolatilityBand& band,
                      const ControlLattice& lattice);
double dp_upper_value(const PayoffSpec& payoff, const VolatilityBand& band, std::size_t n_steps);
double dp_lower_value(const PayoffSpec& payoff, const VolatilityBand& band, std::size_t n_steps);

/// |V(dx) - V(dx / 2)| at the origin: interpolation error proxy of the lattice.
double dp_error_estimate(const PayoffSpec& payoff, const VolatilityBand& band,
                         const ControlLattice& lattice, Extreme extreme);

// ---------------------------------------------------------------------------

struct StrategyValue {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
};

/// Terminal sums S = sum theta_i sqrt(dt) zeta_i over `paths` independent
/// paths with zeta_i standard normal; path p draws from stream (seed, p).
std::vector<double> mc_terminal_samples(const VolatilityBand& band, const AdversaryStrategy& strategy,
                                        std::size_t n_steps, std::size_t paths, std::uint64_t seed,
                                        double t_end = 1.0);

StrategyValue mc_value(const PayoffSpec& payoff, std::span<const double> terminal,
                       std::uint64_t seed);

StrategyValue mc_strategy_value(const PayoffSpec& payoff, const VolatilityBand& band,
                                const AdversaryStrategy& strategy, std::size_t n_steps,
                                std::size_t paths, std::uint64_t seed);

// ---------------------------------------------------------------------------

inline constexpr double kSandwichSlack = 2e-2;
inline constexpr double kDpPdeTolerance = 2e-2;

struct SandwichRow {
    std::string payoff;
    std::string strategy;
    StrategyValue mc;
    double dp_lower = 0.0;
    double dp_upper = 0.0;
    bool pass = true;  // mc in [dp_lower - 3 SE - slack, dp_upper + 3 SE + slack]
};

struct DpPdeRow {
    std::string payoff;
    double dp_upper = 0.0;
    double dp_lower = 0.0;
    double pde_upper = 0.0;
    double pde_lower = 0.0;
    bool pass = true;  // both gaps <= kDpPdeTolerance
};

struct SandwichReport {
    std::vector<SandwichRow> rows;
    std::vector<DpPdeRow> consistency;
    bool all_pass() const;
};

/// Strategy s uses master stream derive_seed(seed, s); every payoff of the
/// same strategy is evaluated on the same paths.
SandwichReport sandwich_check(std::span<const PayoffSpec> payoffs, const VolatilityBand& band,
                              std::span<const AdversaryStrategy> strategies, std::size_t n_steps,
                              std::size_t paths, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct ShiftCheck {
    double b = 0.0;
    double factor = 1.0;        // exp(-b^2 / (2 sigma_lo^2))
    double lower_value = 0.0;   // lower expectation of phi(xi)
    double shifted_value = 0.0; // lower expectation of phi(xi - b)
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;     // 2 x DP error estimate
    bool pass = true;
};

/// Requires phi even and nonnegative on its grid (InputError otherwise).
ShiftCheck shift_inequality_check(const PayoffSpec& payoff, double b, const VolatilityBand& band,
                                  const ControlLattice& lattice);

// ---------------------------------------------------------------------------

inline constexpr double kCltFinalGap = 5e-2;
inline constexpr double kCltNoise = 5e-3;

struct CltRow {
    std::size_t n = 0;
    double dp_upper = 0.0;
    double pde_value = 0.0;
    double gap = 0.0;
};

struct CltTable {
    std::vector<CltRow> rows;
    bool decreasing = true;  // gap[k+1] <= gap[k] + kCltNoise for all k
    bool final_ok = true;    // last gap <= kCltFinalGap
    bool pass() const noexcept { return decreasing && final_ok; }
};

/// n-step discrete upper values against the G-heat value on the standard grid.
CltTable clt_convergence(const PayoffSpec& payoff, const VolatilityBand& band,
                         std::span<const std::size_t> n_list);

void write_csv(std::ostream& out, const CltTable& table);
void write_csv(std::ostream& out, const SandwichReport& report);
void write_csv(std::ostream& out, std::span<const ShiftCheck> checks);

nlohmann::json to_json(const CltTable& table);
nlohmann::json to_json(const SandwichReport& report);
nlohmann::json to_json(const ShiftCheck& check);

}  // namespace glil
