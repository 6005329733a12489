#include "glil/payoff.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "glil/error.hpp"

namespace glil {

PayoffSpec::PayoffSpec(std::vector<double> xs, std::vector<double> values, std::string name)
    : xs_(std::move(xs)), values_(std::move(values)), name_(std::move(name))
{
    if (xs_.size() < 2 || xs_.size() != values_.size()) {
        throw InputError("payoff needs at least two (x, value) samples of matching length");
    }
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (!std::isfinite(xs_[i]) || !std::isfinite(values_[i])) {
            throw InputError("payoff samples must be finite");
        }
        if (i > 0 && !(xs_[i] > xs_[i - 1])) {
            throw InputError("payoff grid must be strictly increasing");
        }
    }
}

PayoffSpec PayoffSpec::sample(const std::function<double(double)>& f, double lo, double hi,
                              std::size_t points, std::string name)
{
    if (points < 2 || !(hi > lo)) throw InputError("payoff sampling needs lo < hi and >= 2 points");
    std::vector<double> xs(points);
    std::vector<double> values(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    const std::size_t mid = points / 2;
    for (std::size_t i = 0; i < points; ++i) {
        // symmetric windows get exact mirror nodes
        xs[i] = (2 * mid + 1 == points && lo == -hi)
                    ? (static_cast<double>(i) - static_cast<double>(mid)) * step
                    : lo + static_cast<double>(i) * step;
        values[i] = f(xs[i]);
    }
    return PayoffSpec(std::move(xs), std::move(values), std::move(name));
}

double PayoffSpec::operator()(double x) const
{
    if (x <= xs_.front()) return values_.front();
    if (x >= xs_.back()) return values_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
    return (1.0 - w) * values_[lo] + w * values_[hi];
}

double PayoffSpec::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double PayoffSpec::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

double PayoffSpec::lipschitz() const
{
    double slope = 0.0;
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        slope = std::max(slope, std::abs(values_[i] - values_[i - 1]) / (xs_[i] - xs_[i - 1]));
    }
    return slope;
}

bool PayoffSpec::is_even(double tol) const
{
    const std::size_t n = xs_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t m = n - 1 - i;
        if (std::abs(xs_[i] + xs_[m]) > tol * std::max(1.0, std::abs(xs_[i]))) return false;
        if (std::abs(values_[i] - values_[m]) > tol) return false;
    }
    return true;
}

bool PayoffSpec::is_convex(double tol) const
{
    for (std::size_t i = 1; i + 1 < xs_.size(); ++i) {
        const double left = (values_[i] - values_[i - 1]) / (xs_[i] - xs_[i - 1]);
        const double right = (values_[i + 1] - values_[i]) / (xs_[i + 1] - xs_[i]);
        if (right - left < -tol) return false;
    }
    return true;
}

PayoffSpec PayoffSpec::negated() const { return scaled(-1.0); }

PayoffSpec PayoffSpec::scaled(double lambda) const
{
    auto values = values_;
    for (double& v : values) v *= lambda;
    return PayoffSpec(xs_, std::move(values), name_);
}

PayoffSpec PayoffSpec::shifted(double shift) const
{
    if (shift == 0.0) return *this;
    std::vector<double> values(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) values[i] = (*this)(xs_[i] - shift);
    return PayoffSpec(xs_, std::move(values), name_ + "-shifted");
}

PayoffSpec PayoffSpec::plus(const PayoffSpec& other) const
{
    if (other.xs_ != xs_) throw InputError("payoff sum requires identical grids");
    auto values = values_;
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values_[i];
    return PayoffSpec(xs_, std::move(values), name_ + "+" + other.name_);
}

// ---------------------------------------------------------------------------

namespace {

PayoffSpec builtin(const std::function<double(double)>& f, std::string name)
{
    return PayoffSpec::sample(f, -kPayoffHalfWidth, kPayoffHalfWidth, kPayoffPoints, std::move(name));
}

std::vector<double> parse_arguments(std::string_view text, std::size_t expected,
                                    std::string_view name)
{
    std::vector<double> args;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = std::min(text.find(',', start), text.size());
        std::string piece(text.substr(start, comma - start));
        try {
            std::size_t used = 0;
            args.push_back(std::stod(piece, &used));
            if (piece.find_first_not_of(" \t", used) != std::string::npos) throw InputError("");
        } catch (const std::exception&) {
            throw InputError("bad argument '" + piece + "' for payoff " + std::string(name));
        }
        start = comma + 1;
    }
    if (args.size() != expected) {
        throw InputError("payoff " + std::string(name) + " takes " + std::to_string(expected) +
                         " arguments");
    }
    return args;
}

/// Descriptor text such as lemma7_phi(1,1) that parse_payoff reads back.
std::string call_name(const std::string& name, std::initializer_list<double> args)
{
    std::string out = name + "(";
    bool first = true;
    for (double a : args) {
        std::array<char, 32> buffer{};
        const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), a);
        out += (first ? "" : ",") + std::string(buffer.data(), result.ptr);
        first = false;
    }
    return out + ")";
}

}  // namespace

PayoffSpec square_payoff() { return builtin([](double x) { return x * x; }, "square"); }
PayoffSpec abs_payoff() { return builtin([](double x) { return std::abs(x); }, "abs"); }
PayoffSpec relu_payoff() { return builtin([](double x) { return std::max(x, 0.0); }, "relu"); }
PayoffSpec linear_payoff() { return builtin([](double x) { return x; }, "linear"); }

PayoffSpec constant_payoff(double c)
{
    return builtin([c](double) { return c; }, call_name("constant", {c}));
}

PayoffSpec indicator_smooth_payoff(double a, double b, double delta)
{
    if (!(a <= b) || !(delta > 0.0)) throw InputError("indicator_smooth needs a <= b and delta > 0");
    return builtin(
        [=](double x) {
            if (x < a) return std::max(0.0, 1.0 - (a - x) / delta);
            if (x > b) return std::max(0.0, 1.0 - (x - b) / delta);
            return 1.0;
        },
        call_name("indicator_smooth", {a, b, delta}));
}

PayoffSpec lemma7_phi(double epsilon, double t)
{
    if (!(epsilon > 0.0) || !(t > 0.0) || !std::isfinite(epsilon * t)) {
        throw InputError("lemma7_phi needs epsilon > 0 and t > 0");
    }
    const double half = epsilon * t / 2.0;
    return builtin(
        [half](double x) {
            const double r = std::abs(x);
            return r <= half ? 1.0 - std::exp(r - half) : 0.0;
        },
        call_name("lemma7_phi", {epsilon, t}));
}

PayoffSpec parse_payoff(std::string_view descriptor)
{
    if (descriptor.empty()) throw InputError("empty payoff descriptor");
    if (descriptor.front() == '@') return load_payoff(std::string(descriptor.substr(1)));

    const auto open = descriptor.find('(');
    const std::string_view name = descriptor.substr(0, open);
    std::string_view args;
    if (open != std::string_view::npos) {
        if (descriptor.back() != ')') throw InputError("unbalanced parentheses in payoff descriptor");
        args = descriptor.substr(open + 1, descriptor.size() - open - 2);
    }
    auto no_args = [&] {
        if (open != std::string_view::npos) {
            throw InputError("payoff " + std::string(name) + " takes no arguments");
        }
    };

    if (name == "square") return no_args(), square_payoff();
    if (name == "abs") return no_args(), abs_payoff();
    if (name == "relu") return no_args(), relu_payoff();
    if (name == "linear") return no_args(), linear_payoff();
    if (name == "constant") return constant_payoff(parse_arguments(args, 1, name)[0]);
    if (name == "indicator_smooth") {
        const auto a = parse_arguments(args, 3, name);
        return indicator_smooth_payoff(a[0], a[1], a[2]);
    }
    if (name == "lemma7_phi") {
        const auto a = parse_arguments(args, 2, name);
        return lemma7_phi(a[0], a[1]);
    }
    throw InputError("unknown payoff '" + std::string(descriptor) + "'");
}

PayoffSpec read_payoff(std::istream& in, std::string name)
{
    std::vector<double> xs;
    std::vector<double> values;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double x = 0.0;
        double v = 0.0;
        std::string rest;
        if (!(fields >> x >> v) || (fields >> rest)) {
            throw InputError("payoff line " + std::to_string(number) + " is not two numbers");
        }
        xs.push_back(x);
        values.push_back(v);
    }
    return PayoffSpec(std::move(xs), std::move(values), std::move(name));
}

PayoffSpec load_payoff(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open payoff file '" + path + "'");
    return read_payoff(in, path);
}

void write_two_column(std::ostream& out, const std::vector<double>& xs,
                      const std::vector<double>& values)
{
    const auto precision = out.precision(17);
    for (std::size_t i = 0; i < xs.size(); ++i) out << xs[i] << ' ' << values[i] << '\n';
    out.precision(precision);
}

}  // namespace glil
