#pragma once

// G-heat equation  d_t u = G(d_xx u),  u(0, x) = phi(x)
// with G(a) = (sigma_hi^2 a^+ - sigma_lo^2 a^-) / 2, solved by a monotone
// explicit finite-difference scheme. u(t, 0) is the upper expectation of
// phi(sqrt(t) xi) for xi G-normal with variance band [sigma_lo^2, sigma_hi^2].

#include <cstddef>
#include <vector>

#include "glil/payoff.hpp"
#include "glil/sublinear.hpp"

namespace glil {

class VolatilityBand {
public:
    /// Requires 0 < lo <= hi < inf; throws ConfigError otherwise.
    VolatilityBand(double lo, double hi);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    bool degenerate() const noexcept { return lo_ == hi_; }
    bool contains(double sigma) const noexcept { return lo_ <= sigma && sigma <= hi_; }

private:
    double lo_;
    double hi_;
};

/// G(x) = (hi^2 x^+ - lo^2 x^-) / 2.
double g_eval(const VolatilityBand& band, double x) noexcept;

struct SpaceTimeGrid {
    double half_width = 0.0;  // L; the space grid is [-L, L]
    double dx = 0.0;
    double dt = 0.0;
    double t_end = 1.0;

    /// L = 8 hi sqrt(t), dx = L / 400, dt = 0.9 dx^2 / hi^2.
    static SpaceTimeGrid standard(const VolatilityBand& band, double t_end = 1.0);

    /// Throws ConfigError unless dt <= dx^2 / hi^2 and L >= 6 hi sqrt(t_end).
    void validate(const VolatilityBand& band) const;
};

struct GHeatSolution {
    std::vector<double> xs;
    std::vector<double> values;  // u(t_end, xs)
    double t_end = 0.0;
    std::size_t steps = 0;
    double dt = 0.0;             // step actually used (t_end / steps)
    /// Mass of N(0, hi^2 t_end) outside [-L, L]: how much the clamping of the
    /// payoff beyond the grid can matter at the origin.
    double clamp_mass = 0.0;

    /// Piecewise-linear interpolation of u(t_end, .).
    double value_at(double x) const;
};

GHeatSolution solve_gheat(const PayoffSpec& payoff, const VolatilityBand& band,
                          const SpaceTimeGrid& grid);

/// (upper, lower) = (u_phi(t, 0), -u_{-phi}(t, 0)).
ExpectationPair gnormal_pair(const PayoffSpec& payoff, const VolatilityBand& band,
                             const SpaceTimeGrid& grid);

struct ConvexReference {
    double value = 0.0;
    bool convex = true;  // payoff convex on its grid; false is a warning only
};

/// E[phi(sigma Z)] for Z standard normal, by Gauss-Legendre quadrature on
/// every payoff segment plus exact Gaussian tails outside the payoff grid.
ConvexReference convex_reference(const PayoffSpec& payoff, double sigma);

}  // namespace glil
