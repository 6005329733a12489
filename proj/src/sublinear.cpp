#include "glil/sublinear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "glil/error.hpp"

namespace glil {

namespace {

constexpr double kProbabilitySumTolerance = 1e-12;

void check_rv(const FinitePriorModel& model, std::span<const double> rv)
{
    if (rv.size() != model.atom_count()) {
        throw InputError("random variable has " + std::to_string(rv.size()) +
                         " entries, model has " + std::to_string(model.atom_count()) + " atoms");
    }
    for (double x : rv) {
        if (!std::isfinite(x)) throw InputError("random variable has a non-finite entry");
    }
}

double dot(std::span<const double> p, std::span<const double> rv)
{
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * rv[i];
    return total;
}

std::vector<bool> mask_of(const FinitePriorModel& model, const Event& event)
{
    std::vector<bool> mask(model.atom_count(), false);
    for (std::size_t a : event) {
        if (a >= model.atom_count()) {
            throw InputError("event references atom index " + std::to_string(a) +
                             " outside the model");
        }
        mask[a] = true;
    }
    return mask;
}

bool subset(const std::vector<bool>& a, const std::vector<bool>& b)
{
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && !b[i]) return false;
    }
    return true;
}

Event event_of(const std::vector<bool>& mask)
{
    Event e;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) e.push_back(i);
    }
    return e;
}

double probability_of(double p_one, CoinSet set)
{
    switch (set) {
    case CoinSet::none: return 0.0;
    case CoinSet::zero: return 1.0 - p_one;
    case CoinSet::one: return p_one;
    case CoinSet::both: return 1.0;
    }
    return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------

FinitePriorModel::FinitePriorModel(std::vector<std::string> atoms,
                                   std::vector<std::vector<double>> priors)
    : atoms_(std::move(atoms)), priors_(std::move(priors))
{
    if (atoms_.empty()) throw ModelError("model has no atoms");
    if (priors_.empty()) throw ModelError("model has an empty prior set");
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& name : atoms_) {
        if (!seen.emplace(name, seen.size()).second) {
            throw ModelError("duplicate atom name '" + name + "'");
        }
    }
    for (std::size_t k = 0; k < priors_.size(); ++k) {
        const auto& p = priors_[k];
        if (p.size() != atoms_.size()) {
            throw ModelError("prior " + std::to_string(k) + " has " + std::to_string(p.size()) +
                             " weights for " + std::to_string(atoms_.size()) + " atoms");
        }
        double total = 0.0;
        for (double w : p) {
            if (!std::isfinite(w) || w < 0.0) {
                throw ModelError("prior " + std::to_string(k) + " has a negative or non-finite weight");
            }
            total += w;
        }
        if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
            throw ModelError("prior " + std::to_string(k) + " sums to " + std::to_string(total));
        }
    }
}

Event FinitePriorModel::event(std::span<const std::string> names) const
{
    Event e;
    for (const auto& name : names) {
        auto it = std::find(atoms_.begin(), atoms_.end(), name);
        if (it == atoms_.end()) throw InputError("unknown atom '" + name + "'");
        e.push_back(static_cast<std::size_t>(it - atoms_.begin()));
    }
    return e;
}

Event FinitePriorModel::complement(const Event& event) const
{
    auto mask = mask_of(*this, event);
    mask.flip();
    return event_of(mask);
}

std::vector<double> FinitePriorModel::indicator(const Event& event) const
{
    const auto mask = mask_of(*this, event);
    std::vector<double> rv(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) rv[i] = mask[i] ? 1.0 : 0.0;
    return rv;
}

Extremum upper_expectation_at(const FinitePriorModel& model, std::span<const double> rv)
{
    check_rv(model, rv);
    Extremum best{-std::numeric_limits<double>::infinity(), 0};
    for (std::size_t k = 0; k < model.prior_count(); ++k) {
        const double value = dot(model.priors()[k], rv);
        if (value > best.value) best = {value, k};
    }
    return best;
}

Extremum lower_expectation_at(const FinitePriorModel& model, std::span<const double> rv)
{
    check_rv(model, rv);
    Extremum best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t k = 0; k < model.prior_count(); ++k) {
        const double value = dot(model.priors()[k], rv);
        if (value < best.value) best = {value, k};
    }
    return best;
}

double upper_expectation(const FinitePriorModel& model, std::span<const double> rv)
{
    return upper_expectation_at(model, rv).value;
}

double lower_expectation(const FinitePriorModel& model, std::span<const double> rv)
{
    return lower_expectation_at(model, rv).value;
}

ExpectationPair expectation_pair(const FinitePriorModel& model, std::span<const double> rv)
{
    return {upper_expectation(model, rv), lower_expectation(model, rv)};
}

CapacityPair capacity_pair(const FinitePriorModel& model, const Event& event)
{
    const auto rv = model.indicator(event);
    return {upper_expectation(model, rv), lower_expectation(model, rv)};
}

// ---------------------------------------------------------------------------

std::span<const double> default_lambdas() noexcept
{
    static constexpr std::array<double, 6> values{0.0, 0.25, 0.5, 1.0, 2.0, 7.5};
    return values;
}

std::span<const double> default_constants() noexcept
{
    static constexpr std::array<double, 5> values{-3.0, -0.5, 0.0, 1.0, 2.5};
    return values;
}

AxiomReport verify_sublinear_axioms(const FinitePriorModel& model,
                                    std::span<const std::vector<double>> rvs,
                                    std::span<const double> lambdas,
                                    std::span<const double> constants)
{
    if (rvs.size() < 2) throw InputError("axiom check needs at least two random variables");
    for (double lambda : lambdas) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw InputError("homogeneity factors must be finite and nonnegative");
        }
    }

    AxiomReport report;
    std::vector<double> upper(rvs.size());
    for (std::size_t i = 0; i < rvs.size(); ++i) upper[i] = upper_expectation(model, rvs[i]);

    auto note = [&report](double residual) {
        report.max_residual = std::max(report.max_residual, residual);
    };

    const std::size_t n = model.atom_count();
    std::vector<double> sum(n);
    for (std::size_t i = 0; i < rvs.size(); ++i) {
        for (std::size_t j = 0; j < rvs.size(); ++j) {
            if (i == j) continue;
            AxiomCheck check{.first = i, .second = j};
            check.comparable = true;
            for (std::size_t a = 0; a < n; ++a) {
                if (rvs[i][a] > rvs[j][a]) {
                    check.comparable = false;
                    break;
                }
            }
            if (check.comparable) {
                check.monotone = upper[i] <= upper[j] + kExactTolerance;
                note(std::max(0.0, upper[i] - upper[j]));
            }
            for (std::size_t a = 0; a < n; ++a) sum[a] = rvs[i][a] + rvs[j][a];
            check.subadditivity_residual = upper_expectation(model, sum) - upper[i] - upper[j];
            check.subadditive = check.subadditivity_residual <= kExactTolerance;
            note(std::max(0.0, check.subadditivity_residual));
            report.monotonicity = report.monotonicity && check.monotone;
            report.subadditivity = report.subadditivity && check.subadditive;
            report.pairs.push_back(check);
        }
    }

    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < rvs.size(); ++i) {
        for (double lambda : lambdas) {
            for (std::size_t a = 0; a < n; ++a) scaled[a] = lambda * rvs[i][a];
            HomogeneityCheck h{.rv = i, .lambda = lambda};
            h.residual = std::abs(upper_expectation(model, scaled) - lambda * upper[i]);
            h.pass = h.residual <= kExactTolerance;
            note(h.residual);
            report.positive_homogeneity = report.positive_homogeneity && h.pass;
            report.homogeneity.push_back(h);
        }
    }

    std::vector<double> constant(n);
    for (double c : constants) {
        std::fill(constant.begin(), constant.end(), c);
        ConstantCheck cc{.constant = c};
        cc.residual = std::abs(upper_expectation(model, constant) - c);
        cc.pass = cc.residual <= kExactTolerance;
        note(cc.residual);
        report.constant_preserving = report.constant_preserving && cc.pass;
        report.constants.push_back(cc);
    }
    return report;
}

DualityCheck verify_duality(const FinitePriorModel& model, const Event& event)
{
    DualityCheck check;
    check.v_upper = capacity_pair(model, event).v_upper;
    check.v_lower_complement = capacity_pair(model, model.complement(event)).v_lower;
    check.residual = std::abs(check.v_upper + check.v_lower_complement - 1.0);
    check.pass = check.residual <= kExactTolerance;
    return check;
}

ContinuityReport verify_continuity(const FinitePriorModel& model, std::span<const Event> chain)
{
    if (chain.empty()) throw InputError("continuity check needs a nonempty event chain");
    std::vector<std::vector<bool>> masks;
    for (const auto& e : chain) masks.push_back(mask_of(model, e));

    bool increasing = true;
    bool decreasing = true;
    for (std::size_t k = 0; k + 1 < masks.size(); ++k) {
        increasing = increasing && subset(masks[k], masks[k + 1]);
        decreasing = decreasing && subset(masks[k + 1], masks[k]);
    }
    if (!increasing && !decreasing) throw InputError("event chain is not monotone");

    ContinuityReport report;
    report.increasing = increasing;
    for (const auto& e : chain) report.values.push_back(capacity_pair(model, e));

    std::vector<bool> limit(model.atom_count(), !increasing);
    for (const auto& mask : masks) {
        for (std::size_t a = 0; a < limit.size(); ++a) {
            limit[a] = increasing ? (limit[a] || mask[a]) : (limit[a] && mask[a]);
        }
    }
    report.limit = capacity_pair(model, event_of(limit));

    for (std::size_t k = 0; k + 1 < report.values.size(); ++k) {
        const auto& a = report.values[k];
        const auto& b = report.values[k + 1];
        if (increasing) {
            report.upper_monotone = report.upper_monotone && a.v_upper <= b.v_upper + kExactTolerance;
            report.lower_monotone = report.lower_monotone && a.v_lower <= b.v_lower + kExactTolerance;
        } else {
            report.upper_monotone = report.upper_monotone && a.v_upper + kExactTolerance >= b.v_upper;
            report.lower_monotone = report.lower_monotone && a.v_lower + kExactTolerance >= b.v_lower;
        }
    }
    const auto& last = report.values.back();
    report.upper_converges = std::abs(last.v_upper - report.limit.v_upper) <= kExactTolerance;
    report.lower_converges = std::abs(last.v_lower - report.limit.v_lower) <= kExactTolerance;
    return report;
}

// ---------------------------------------------------------------------------

ProductCoinModel::ProductCoinModel(double p_lo, double p_hi, std::size_t horizon)
    : ProductCoinModel(std::vector<double>(horizon, p_lo), std::vector<double>(horizon, p_hi))
{
}

ProductCoinModel::ProductCoinModel(std::vector<double> p_lo, std::vector<double> p_hi)
    : p_lo_(std::move(p_lo)), p_hi_(std::move(p_hi))
{
    if (p_lo_.empty() || p_lo_.size() != p_hi_.size()) {
        throw ModelError("coin model needs matching, nonempty probability bands");
    }
    for (std::size_t k = 0; k < p_lo_.size(); ++k) {
        if (!(0.0 < p_lo_[k] && p_lo_[k] <= p_hi_[k] && p_hi_[k] < 1.0)) {
            throw ModelError("coordinate " + std::to_string(k + 1) +
                             " violates 0 < p_lo <= p_hi < 1");
        }
    }
}

void ProductCoinModel::check_coordinate(std::size_t coordinate) const
{
    if (coordinate < 1 || coordinate > horizon()) {
        throw InputError("coordinate " + std::to_string(coordinate) + " outside horizon [1, " +
                         std::to_string(horizon()) + "]");
    }
}

double ProductCoinModel::p_lo(std::size_t coordinate) const
{
    check_coordinate(coordinate);
    return p_lo_[coordinate - 1];
}

double ProductCoinModel::p_hi(std::size_t coordinate) const
{
    check_coordinate(coordinate);
    return p_hi_[coordinate - 1];
}

CapacityPair ProductCoinModel::marginal(std::size_t coordinate, CoinSet set) const
{
    const double a = probability_of(p_lo(coordinate), set);
    const double b = probability_of(p_hi(coordinate), set);
    return {std::max(a, b), std::min(a, b)};
}

CapacityPair ProductCoinModel::cylinder(
    std::span<const std::pair<std::size_t, CoinSet>> constraints) const
{
    // Coordinates are independent under every prior in the product set, so the
    // extremes over the set factorize into per-coordinate extremes.
    std::vector<unsigned> allowed(horizon(), static_cast<unsigned>(CoinSet::both));
    for (const auto& [coordinate, set] : constraints) {
        check_coordinate(coordinate);
        allowed[coordinate - 1] &= static_cast<unsigned>(set);
    }
    CapacityPair result{1.0, 1.0};
    for (std::size_t k = 0; k < allowed.size(); ++k) {
        const auto set = static_cast<CoinSet>(allowed[k]);
        if (set == CoinSet::both) continue;
        const auto m = marginal(k + 1, set);
        result.v_upper *= m.v_upper;
        result.v_lower *= m.v_lower;
    }
    return result;
}

IndependenceCheck pairwise_independence_check(const ProductCoinModel& coin, std::size_t i,
                                              std::size_t j, CoinSet d, CoinSet g)
{
    if (i == j) throw InputError("independence check needs two distinct coordinates");
    IndependenceCheck check;

    const std::array<double, 2> pi{coin.p_lo(i), coin.p_hi(i)};
    const std::array<double, 2> pj{coin.p_lo(j), coin.p_hi(j)};
    check.joint = {-1.0, 2.0};
    for (double a : pi) {
        for (double b : pj) {
            const double joint = probability_of(a, d) * probability_of(b, g);
            check.joint.v_upper = std::max(check.joint.v_upper, joint);
            check.joint.v_lower = std::min(check.joint.v_lower, joint);
        }
    }

    const auto mi = coin.marginal(i, d);
    const auto mj = coin.marginal(j, g);
    check.product = {mi.v_upper * mj.v_upper, mi.v_lower * mj.v_lower};
    check.upper_residual = std::abs(check.joint.v_upper - check.product.v_upper);
    check.lower_residual = std::abs(check.joint.v_lower - check.product.v_lower);
    check.upper_pass = check.upper_residual <= kExactTolerance;
    check.lower_pass = check.lower_residual <= kExactTolerance;
    return check;
}

namespace {

void check_range(const ProductCoinModel& coin, std::size_t n, std::size_t horizon)
{
    if (horizon > coin.horizon()) {
        throw InputError("horizon " + std::to_string(horizon) + " exceeds the model horizon " +
                         std::to_string(coin.horizon()));
    }
    if (n < 1 || n > horizon) {
        throw InputError("tail start n must lie in [1, " + std::to_string(horizon) + "]");
    }
}

std::vector<std::pair<std::size_t, CoinSet>> all_zero(std::size_t n, std::size_t horizon)
{
    std::vector<std::pair<std::size_t, CoinSet>> constraints;
    for (std::size_t k = n; k <= horizon; ++k) constraints.emplace_back(k, CoinSet::zero);
    return constraints;
}

}  // namespace

ConvergentBound bc_convergent_check(const ProductCoinModel& coin, std::size_t n, std::size_t horizon)
{
    check_range(coin, n, horizon);
    ConvergentBound bound{.n = n, .horizon = horizon};
    // V(union A_k) = 1 - v(intersection A_k^c)
    bound.union_capacity = 1.0 - coin.cylinder(all_zero(n, horizon)).v_lower;
    for (std::size_t k = n; k <= horizon; ++k) bound.tail_sum += coin.p_hi(k);
    bound.pass = bound.union_capacity <= bound.tail_sum + kExactTolerance;
    return bound;
}

std::vector<ConvergentBound> bc_convergent_table(const ProductCoinModel& coin, std::size_t horizon)
{
    std::vector<ConvergentBound> rows;
    for (std::size_t n = 1; n <= horizon; ++n) rows.push_back(bc_convergent_check(coin, n, horizon));
    return rows;
}

DivergentBound bc_divergent_check(const ProductCoinModel& coin, std::size_t n, std::size_t horizon)
{
    check_range(coin, n, horizon);
    DivergentBound bound{.n = n, .horizon = horizon};
    // v(union A_k) = 1 - V(intersection A_k^c)
    bound.union_lower_capacity = 1.0 - coin.cylinder(all_zero(n, horizon)).v_upper;
    bound.complement = 1.0 - bound.union_lower_capacity;
    bound.product = 1.0;
    for (std::size_t k = n; k <= horizon; ++k) {
        bound.product *= 1.0 - coin.p_lo(k);
        bound.lower_sum += coin.p_lo(k);
    }
    bound.exp_bound = std::exp(-bound.lower_sum);
    bound.pass = std::abs(bound.complement - bound.product) <= kExactTolerance &&
                 bound.product <= bound.exp_bound;
    return bound;
}

// ---------------------------------------------------------------------------

FinitePriorModel model_from_json(const nlohmann::json& j)
{
    try {
        return FinitePriorModel(j.at("atoms").get<std::vector<std::string>>(),
                                j.at("priors").get<std::vector<std::vector<double>>>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model JSON: ") + e.what());
    }
}

nlohmann::json to_json(const FinitePriorModel& model)
{
    return {{"atoms", model.atoms()}, {"priors", model.priors()}};
}

Event event_from_json(const FinitePriorModel& model, const nlohmann::json& j)
{
    if (!j.is_array()) throw InputError("event must be an array of atom names");
    std::vector<std::string> names;
    for (const auto& item : j) {
        if (!item.is_string()) throw InputError("event entries must be atom names");
        names.push_back(item.get<std::string>());
    }
    return model.event(names);
}

nlohmann::json to_json(const AxiomReport& report)
{
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : report.pairs) {
        pairs.push_back({{"first", p.first},
                         {"second", p.second},
                         {"comparable", p.comparable},
                         {"monotone", p.monotone},
                         {"subadditive", p.subadditive},
                         {"subadditivity_residual", p.subadditivity_residual}});
    }
    nlohmann::json homogeneity = nlohmann::json::array();
    for (const auto& h : report.homogeneity) {
        homogeneity.push_back(
            {{"rv", h.rv}, {"lambda", h.lambda}, {"residual", h.residual}, {"pass", h.pass}});
    }
    nlohmann::json constants = nlohmann::json::array();
    for (const auto& c : report.constants) {
        constants.push_back({{"constant", c.constant}, {"residual", c.residual}, {"pass", c.pass}});
    }
    return {{"monotonicity", report.monotonicity},
            {"constant_preserving", report.constant_preserving},
            {"subadditivity", report.subadditivity},
            {"positive_homogeneity", report.positive_homogeneity},
            {"max_residual", report.max_residual},
            {"pairs", pairs},
            {"homogeneity", homogeneity},
            {"constants", constants}};
}

nlohmann::json to_json(const DualityCheck& check)
{
    return {{"v_upper", check.v_upper},
            {"v_lower_complement", check.v_lower_complement},
            {"residual", check.residual},
            {"pass", check.pass}};
}

nlohmann::json to_json(const ContinuityReport& report)
{
    nlohmann::json values = nlohmann::json::array();
    for (const auto& v : report.values) values.push_back({v.v_upper, v.v_lower});
    return {{"increasing", report.increasing},
            {"values", values},
            {"limit", {report.limit.v_upper, report.limit.v_lower}},
            {"upper_monotone", report.upper_monotone},
            {"lower_monotone", report.lower_monotone},
            {"upper_converges", report.upper_converges},
            {"lower_converges", report.lower_converges},
            {"pass", report.all_pass()}};
}

nlohmann::json to_json(const ConvergentBound& bound)
{
    return {{"n", bound.n},
            {"M", bound.horizon},
            {"union_capacity", bound.union_capacity},
            {"tail_sum", bound.tail_sum},
            {"pass", bound.pass}};
}

nlohmann::json to_json(const DivergentBound& bound)
{
    return {{"n", bound.n},
            {"M", bound.horizon},
            {"union_lower_capacity", bound.union_lower_capacity},
            {"complement", bound.complement},
            {"product", bound.product},
            {"exp_bound", bound.exp_bound},
            {"lower_sum", bound.lower_sum},
            {"pass", bound.pass}};
}

nlohmann::json to_json(const IndependenceCheck& check)
{
    return {{"joint", {check.joint.v_upper, check.joint.v_lower}},
            {"product", {check.product.v_upper, check.product.v_lower}},
            {"upper_residual", check.upper_residual},
            {"lower_residual", check.lower_residual},
            {"upper_pass", check.upper_pass},
            {"lower_pass", check.lower_pass}};
}

}  // namespace glil
