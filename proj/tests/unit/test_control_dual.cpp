#include "glil/control_dual.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "glil/error.hpp"
#include "glil/gheat.hpp"

namespace glil {
namespace {

// E[phi(sigma sqrt(dt) (2B - n))] with B ~ Binomial(n, 1/2), exact weights.
double binomial_oracle(const std::function<double(double)>& phi, double sigma, std::size_t n)
{
    const double step = sigma / std::sqrt(static_cast<double>(n));
    double total = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double log_weight = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                                  static_cast<double>(n) * std::log(2.0);
        total += std::exp(log_weight) * phi(step * (2.0 * static_cast<double>(k) - static_cast<double>(n)));
    }
    return total;
}

class ThreadsGuard {
public:
    explicit ThreadsGuard(const char* value)
    {
        if (const char* old = std::getenv("GLIL_THREADS")) saved_ = old;
        setenv("GLIL_THREADS", value, 1);
    }
    ~ThreadsGuard()
    {
        if (saved_.empty()) unsetenv("GLIL_THREADS");
        else setenv("GLIL_THREADS", saved_.c_str(), 1);
    }

private:
    std::string saved_;
};

const VolatilityBand kBand(0.5, 1.0);

TEST(ControlLattice, StandardAndValidation)
{
    const auto lat = ControlLattice::standard(kBand, 200);
    EXPECT_DOUBLE_EQ(lat.half_width, 8.0);
    EXPECT_DOUBLE_EQ(lat.dx, 8.0 / 2000.0);
    EXPECT_DOUBLE_EQ(lat.dt(), 1.0 / 200.0);
    EXPECT_LE(lat.boundary_weight(kBand), kBoundaryWeightLimit);
    EXPECT_NO_THROW(lat.validate(kBand));

    auto narrow = lat;
    narrow.half_width = 3.0;
    EXPECT_THROW(narrow.validate(kBand), ConfigError);
    auto zero = lat;
    zero.n_steps = 0;
    EXPECT_THROW(zero.validate(kBand), ConfigError);
}

TEST(DynamicProgram, OneStepExamples)
{
    EXPECT_NEAR(dp_upper_value(square_payoff(), kBand, 1), 1.0, 1e-9);
    EXPECT_NEAR(dp_lower_value(square_payoff(), kBand, 1), 0.25, 1e-9);
    EXPECT_NEAR(dp_upper_value(linear_payoff(), kBand, 1), 0.0, 1e-12);
    EXPECT_NEAR(dp_lower_value(linear_payoff(), kBand, 1), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(dp_lower_value(constant_payoff(1.25), kBand, 17), 1.25);
    EXPECT_DOUBLE_EQ(dp_upper_value(constant_payoff(1.25), kBand, 17), 1.25);
}

TEST(DynamicProgram, DegenerateBandMatchesBinomialWalk)
{
    struct Case {
        PayoffSpec payoff;
        std::function<double(double)> f;
    };
    const Case cases[] = {
        {relu_payoff(), [](double y) { return std::max(y, 0.0); }},
        {lemma7_phi(1.0, 1.0),
         [](double y) { return std::abs(y) <= 0.5 ? 1.0 - std::exp(std::abs(y) - 0.5) : 0.0; }},
    };
    for (double sigma : {0.5, 1.0}) {
        const VolatilityBand band(sigma, sigma);
        for (const auto& c : cases) {
            for (std::size_t n : {1U, 10U, 50U}) {
                const double oracle = binomial_oracle(c.f, sigma, n);
                const auto lat = ControlLattice::standard(band, n);
                const double tol = 2e-4 + 2.0 * dp_error_estimate(c.payoff, band, lat, Extreme::upper);
                EXPECT_NEAR(dp_upper_value(c.payoff, band, lat), oracle, tol)
                    << c.payoff.name() << " n=" << n;
                EXPECT_NEAR(dp_lower_value(c.payoff, band, lat), oracle, tol)
                    << c.payoff.name() << " n=" << n;
            }
        }
    }
}

TEST(DynamicProgram, LowerIsNegatedUpperExactly)
{
    for (const auto& p : {relu_payoff(), lemma7_phi(1.0, 1.0), indicator_smooth_payoff(-0.5, 0.5, 0.25)}) {
        for (std::size_t n : {3U, 40U}) {
            EXPECT_EQ(dp_lower_value(p, kBand, n), -dp_upper_value(p.negated(), kBand, n));
        }
    }
}

TEST(DynamicProgram, PropertyMonotoneAndOrdered)
{
    const auto phi = lemma7_phi(1.0, 1.0);
    const auto bigger = phi.plus(indicator_smooth_payoff(0.0, 1.0, 0.25).scaled(0.3));
    const auto lat = ControlLattice::standard(kBand, 30);
    const auto small = dp_solve(phi, kBand, lat, Extreme::upper);
    const auto large = dp_solve(bigger, kBand, lat, Extreme::upper);
    const auto lower = dp_solve(phi, kBand, lat, Extreme::lower);
    for (std::size_t i = 0; i < small.values.size(); ++i) {
        EXPECT_LE(small.values[i], large.values[i] + 1e-15);
        EXPECT_LE(lower.values[i], small.values[i] + 1e-15);
    }
    EXPECT_NEAR(small.xs[small.xs.size() / 2], 0.0, 1e-15);

    // the upper value can only grow with the top of the band
    double previous = -1.0;
    for (double hi : {0.5, 0.75, 1.0}) {
        const VolatilityBand band(0.5, hi);
        const double v = dp_upper_value(phi.negated(), band, 30);
        EXPECT_GE(v, previous - 1e-12);
        previous = v;
    }
}

TEST(DynamicProgram, ConvergesToPde)
{
    const auto grid = SpaceTimeGrid::standard(kBand);
    const auto relu = gnormal_pair(relu_payoff(), kBand, grid);
    EXPECT_NEAR(dp_upper_value(relu_payoff(), kBand, 200), relu.upper, 2e-2);
    EXPECT_NEAR(relu.upper, 0.3989, 1e-3);
    const auto phi = lemma7_phi(1.0, 1.0);
    const auto bump = gnormal_pair(phi, kBand, grid);
    EXPECT_NEAR(dp_lower_value(phi, kBand, 200), bump.lower, 2e-2);
}

TEST(MonteCarlo, ConstantStrategies)
{
    const auto hi = mc_strategy_value(square_payoff(), kBand, strategy::Constant{1.0}, 50, 20000, 11);
    EXPECT_NEAR(hi.estimate, 1.0, 3.0 * hi.std_error);
    EXPECT_EQ(hi.paths, 20000U);
    const auto lo = mc_strategy_value(square_payoff(), kBand, strategy::Constant{0.5}, 50, 20000, 12);
    EXPECT_NEAR(lo.estimate, 0.25, 3.0 * lo.std_error);

    EXPECT_THROW(mc_strategy_value(square_payoff(), kBand, strategy::Constant{1.5}, 5, 10, 1),
                 StrategyViolation);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts)
{
    const auto strat = AdversaryStrategy::parse("feedback:0.2/3");
    std::vector<double> one;
    std::vector<double> many;
    {
        ThreadsGuard g("1");
        one = mc_terminal_samples(kBand, strat, 40, 3000, 5);
    }
    {
        ThreadsGuard g("4");
        many = mc_terminal_samples(kBand, strat, 40, 3000, 5);
    }
    EXPECT_EQ(one, many);
    EXPECT_NE(one, mc_terminal_samples(kBand, strat, 40, 3000, 6));
}

TEST(Sandwich, RandomStrategiesStayInside)
{
    const std::vector<PayoffSpec> payoffs{relu_payoff(), lemma7_phi(1.0, 1.0)};
    const auto strategies = random_strategies(4, kBand, 3);
    const auto report = sandwich_check(payoffs, kBand, strategies, 60, 3000, 17);
    ASSERT_EQ(report.rows.size(), 8U);
    for (const auto& row : report.rows) {
        EXPECT_TRUE(row.pass) << row.payoff << " " << row.strategy;
        EXPECT_LE(row.dp_lower, row.dp_upper);
    }
    ASSERT_EQ(report.consistency.size(), 2U);

    std::ostringstream csv;
    write_csv(csv, report);
    EXPECT_EQ(csv.str().substr(0, 7), "payoff,");
}

TEST(ShiftInequality, Examples)
{
    const auto phi = lemma7_phi(1.0, 1.0);
    const auto lat = ControlLattice::standard(kBand, 200);
    const auto zero = shift_inequality_check(phi, 0.0, kBand, lat);
    EXPECT_EQ(zero.factor, 1.0);
    EXPECT_NEAR(zero.lhs, zero.rhs, 1e-10);
    EXPECT_TRUE(zero.pass);

    const auto far = shift_inequality_check(phi, 0.4, kBand, lat);
    EXPECT_NEAR(far.factor, std::exp(-0.32), 1e-15);
    EXPECT_NEAR(far.factor, 0.7261, 1e-4);
    EXPECT_LE(far.lhs, far.rhs);
    EXPECT_TRUE(far.pass);

    for (double b : {-0.4, -0.2, -0.1, 0.1, 0.2}) {
        EXPECT_TRUE(shift_inequality_check(phi, b, kBand, lat).pass) << b;
    }
    EXPECT_THROW(shift_inequality_check(relu_payoff(), 0.1, kBand, lat), InputError);
    EXPECT_THROW(shift_inequality_check(linear_payoff(), 0.1, kBand, lat), InputError);
}

TEST(Clt, ReluConvergesToConvexReference)
{
    const std::vector<std::size_t> ns{10, 20, 50, 100, 200};
    const auto table = clt_convergence(relu_payoff(), kBand, ns);
    ASSERT_EQ(table.rows.size(), 5U);
    EXPECT_TRUE(table.pass());
    EXPECT_NEAR(table.rows.back().pde_value, convex_reference(relu_payoff(), 1.0).value, 1e-3);
    for (const auto& row : table.rows) EXPECT_NEAR(row.gap, std::abs(row.dp_upper - row.pde_value), 1e-15);

    std::ostringstream csv;
    write_csv(csv, table);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "n,dp_upper,pde_value,gap");
}

TEST(Clt, DegenerateBandIsBinomial)
{
    const VolatilityBand band(1.0, 1.0);
    const std::vector<std::size_t> ns{4, 16, 64};
    const auto table = clt_convergence(relu_payoff(), band, ns);
    double previous = 1.0;
    for (const auto& row : table.rows) {
        const double oracle = binomial_oracle([](double y) { return std::max(y, 0.0); }, 1.0, row.n);
        // interpolating across the kink of y+ costs at most a quarter lattice cell
        EXPECT_NEAR(row.dp_upper, oracle, ControlLattice::standard(band, row.n).dx / 4.0);
        // classical rate: the gap shrinks roughly like 1/sqrt(n)
        EXPECT_LT(row.gap, previous);
        previous = row.gap;
    }
}

}  // namespace
}  // namespace glil
