#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace glil {

/// Test function sampled on a strictly increasing grid. Evaluation is
/// piecewise linear inside the grid and constant (clamped) outside it.
class PayoffSpec {
public:
    PayoffSpec(std::vector<double> xs, std::vector<double> values, std::string name = "custom");

    /// Samples `f` at `points` equally spaced nodes on [lo, hi].
    static PayoffSpec sample(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t points, std::string name);

    double operator()(double x) const;

    const std::vector<double>& xs() const noexcept { return xs_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::string& name() const noexcept { return name_; }

    double min_value() const;
    double max_value() const;
    /// Largest absolute slope between consecutive samples.
    double lipschitz() const;

    /// phi(x) == phi(-x) within tol at every node (grid must be symmetric).
    bool is_even(double tol = 1e-12) const;
    /// Nonnegative second divided differences (within tol).
    bool is_convex(double tol = 1e-12) const;

    PayoffSpec negated() const;
    PayoffSpec scaled(double lambda) const;
    /// x -> phi(x - shift), resampled on the same grid.
    PayoffSpec shifted(double shift) const;
    /// Pointwise sum; requires identical grids.
    PayoffSpec plus(const PayoffSpec& other) const;

private:
    std::vector<double> xs_;
    std::vector<double> values_;
    std::string name_;
};

/// Default sampling window and resolution of the built-in payoffs:
/// [-16, 16] with step 1/256, so kinks at dyadic points are exact.
inline constexpr double kPayoffHalfWidth = 16.0;
inline constexpr std::size_t kPayoffPoints = 8193;

PayoffSpec square_payoff();
PayoffSpec abs_payoff();
PayoffSpec relu_payoff();
PayoffSpec linear_payoff();
PayoffSpec constant_payoff(double c);
/// 1 on [a, b], linear ramps of width delta outside, 0 beyond.
PayoffSpec indicator_smooth_payoff(double a, double b, double delta);
/// Even bump 1 - exp(|x| - eps t / 2) on |x| <= eps t / 2, zero elsewhere.
PayoffSpec lemma7_phi(double epsilon, double t);

/// Parses "square", "abs", "relu", "linear", "constant(c)",
/// "indicator_smooth(a,b,delta)", "lemma7_phi(eps,t)" or "@path" (two-column text).
PayoffSpec parse_payoff(std::string_view descriptor);

/// Two-column "x value" text; '#' starts a comment.
PayoffSpec read_payoff(std::istream& in, std::string name = "file");
PayoffSpec load_payoff(const std::string& path);
void write_two_column(std::ostream& out, const std::vector<double>& xs,
                      const std::vector<double>& values);

}  // namespace glil
