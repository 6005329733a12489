#pragma once

// Exact upper/lower expectations and capacities on finite prior models.
//
// A FinitePriorModel is a finite sample space together with a finite set of
// probability vectors over it. The upper expectation is the maximum of the
// linear expectations over that set, the lower one the minimum; the capacity
// pair of an event is the pair of expectations of its indicator.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace glil {

struct ExpectationPair {
    double upper = 0.0;
    double lower = 0.0;
};

struct CapacityPair {
    double v_upper = 0.0;
    double v_lower = 0.0;
};

/// Value of an extremal expectation and the prior attaining it (first index
/// on ties).
struct Extremum {
    double value = 0.0;
    std::size_t prior = 0;
};

/// Atom indices of an event. Order and duplicates are irrelevant.
using Event = std::vector<std::size_t>;

class FinitePriorModel {
public:
    /// Validates: at least one atom, at least one prior, every prior a
    /// probability vector over the atoms (entries >= 0, sum within 1e-12).
    FinitePriorModel(std::vector<std::string> atoms, std::vector<std::vector<double>> priors);

    std::size_t atom_count() const noexcept { return atoms_.size(); }
    std::size_t prior_count() const noexcept { return priors_.size(); }
    const std::vector<std::string>& atoms() const noexcept { return atoms_; }
    const std::vector<std::vector<double>>& priors() const noexcept { return priors_; }

    /// Resolves atom names; throws InputError on an unknown name.
    Event event(std::span<const std::string> names) const;
    Event complement(const Event& event) const;
    /// 0/1 random variable of the event.
    std::vector<double> indicator(const Event& event) const;

    /// Random model with `atoms` atoms and `priors` Dirichlet(1) priors.
    template <class Rng>
    static FinitePriorModel random(std::size_t atoms, std::size_t priors, Rng& rng);

private:
    std::vector<std::string> atoms_;
    std::vector<std::vector<double>> priors_;
};

Extremum upper_expectation_at(const FinitePriorModel& model, std::span<const double> rv);
Extremum lower_expectation_at(const FinitePriorModel& model, std::span<const double> rv);
double upper_expectation(const FinitePriorModel& model, std::span<const double> rv);
double lower_expectation(const FinitePriorModel& model, std::span<const double> rv);
ExpectationPair expectation_pair(const FinitePriorModel& model, std::span<const double> rv);

CapacityPair capacity_pair(const FinitePriorModel& model, const Event& event);

// ---------------------------------------------------------------------------
// Axiom, duality and continuity checks
// ---------------------------------------------------------------------------

inline constexpr double kExactTolerance = 1e-12;

struct AxiomCheck {
    std::size_t first = 0;   // index into the rv list
    std::size_t second = 0;
    bool comparable = false; // first <= second pointwise
    bool monotone = true;    // vacuous when not comparable
    bool subadditive = true;
    double subadditivity_residual = 0.0;  // E[X+Y] - E[X] - E[Y], <= tol to pass
};

struct HomogeneityCheck {
    std::size_t rv = 0;
    double lambda = 0.0;
    double residual = 0.0;  // |E[lambda X] - lambda E[X]|
    bool pass = true;
};

struct ConstantCheck {
    double constant = 0.0;
    double residual = 0.0;  // |E[c] - c|
    bool pass = true;
};

struct AxiomReport {
    std::vector<AxiomCheck> pairs;
    std::vector<HomogeneityCheck> homogeneity;
    std::vector<ConstantCheck> constants;
    bool monotonicity = true;
    bool constant_preserving = true;
    bool subadditivity = true;
    bool positive_homogeneity = true;
    double max_residual = 0.0;

    bool all_pass() const noexcept
    {
        return monotonicity && constant_preserving && subadditivity && positive_homogeneity;
    }
};

std::span<const double> default_lambdas() noexcept;
std::span<const double> default_constants() noexcept;

/// Checks monotonicity, constant preservation, sub-additivity and positive
/// homogeneity of the upper expectation over every ordered pair of `rvs`.
/// Requires at least two random variables; lambdas must be >= 0.
AxiomReport verify_sublinear_axioms(const FinitePriorModel& model,
                                    std::span<const std::vector<double>> rvs,
                                    std::span<const double> lambdas = default_lambdas(),
                                    std::span<const double> constants = default_constants());

struct DualityCheck {
    double v_upper = 0.0;             // V(A)
    double v_lower_complement = 0.0;  // v(A^c)
    double residual = 0.0;            // |V(A) + v(A^c) - 1|
    bool pass = true;
};

DualityCheck verify_duality(const FinitePriorModel& model, const Event& event);

struct ContinuityReport {
    bool increasing = true;                 // direction of the chain
    std::vector<CapacityPair> values;       // along the chain
    CapacityPair limit;                     // capacity of the union / intersection
    bool upper_monotone = true;
    bool lower_monotone = true;
    bool upper_converges = true;            // last value equals the limit
    bool lower_converges = true;

    bool all_pass() const noexcept
    {
        return upper_monotone && lower_monotone && upper_converges && lower_converges;
    }
};

/// Throws InputError if the chain is not nested in one direction.
ContinuityReport verify_continuity(const FinitePriorModel& model, std::span<const Event> chain);

// ---------------------------------------------------------------------------
// Product coin model
// ---------------------------------------------------------------------------

/// Subset of the coordinate value set {0, 1}.
enum class CoinSet : unsigned { none = 0, zero = 1, one = 2, both = 3 };

/// M independent {0,1} coordinates; coordinate k (1-based) has success
/// probability anywhere in [p_lo_k, p_hi_k]. Capacities of cylinder events
/// are computed per coordinate, never on the 2^M atom space.
class ProductCoinModel {
public:
    ProductCoinModel(double p_lo, double p_hi, std::size_t horizon);
    /// Coordinate-dependent band.
    ProductCoinModel(std::vector<double> p_lo, std::vector<double> p_hi);

    std::size_t horizon() const noexcept { return p_lo_.size(); }
    double p_lo(std::size_t coordinate) const;
    double p_hi(std::size_t coordinate) const;

    /// Capacity pair of {X_k in set}.
    CapacityPair marginal(std::size_t coordinate, CoinSet set) const;

    /// Capacity pair of the cylinder {X_k in sets[k] for each listed k}.
    CapacityPair cylinder(std::span<const std::pair<std::size_t, CoinSet>> constraints) const;

private:
    void check_coordinate(std::size_t coordinate) const;

    std::vector<double> p_lo_;
    std::vector<double> p_hi_;
};

struct IndependenceCheck {
    CapacityPair joint;         // by enumerating the adversary's choices on (i, j)
    CapacityPair product;       // product of the marginal capacities
    double upper_residual = 0.0;
    double lower_residual = 0.0;
    bool upper_pass = true;
    bool lower_pass = true;
};

IndependenceCheck pairwise_independence_check(const ProductCoinModel& coin, std::size_t i,
                                              std::size_t j, CoinSet d, CoinSet g);

/// Subadditive tail bound for A_k = {X_k = 1}, k in [n, M].
struct ConvergentBound {
    std::size_t n = 0;
    std::size_t horizon = 0;
    double union_capacity = 0.0;  // V(union_{k=n}^M A_k)
    double tail_sum = 0.0;        // sum_{k=n}^M V(A_k)
    bool pass = true;             // union_capacity <= tail_sum
};

ConvergentBound bc_convergent_check(const ProductCoinModel& coin, std::size_t n, std::size_t horizon);

/// Rows for n = 1..M; the tail sums are nonincreasing in n.
std::vector<ConvergentBound> bc_convergent_table(const ProductCoinModel& coin, std::size_t horizon);

/// Product / exponential bound for A_k = {X_k = 1}, k in [n, M].
struct DivergentBound {
    std::size_t n = 0;
    std::size_t horizon = 0;
    double union_lower_capacity = 0.0;  // v(union A_k)
    double complement = 0.0;            // 1 - v(union A_k)
    double product = 0.0;               // prod (1 - v(A_k))
    double exp_bound = 0.0;             // exp(-sum v(A_k))
    double lower_sum = 0.0;             // sum v(A_k)
    bool pass = true;                   // complement == product and product <= exp_bound
};

DivergentBound bc_divergent_check(const ProductCoinModel& coin, std::size_t n, std::size_t horizon);

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// {"atoms": ["a", ...], "priors": [[...], ...]}
FinitePriorModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FinitePriorModel& model);
/// Event as an array of atom names.
Event event_from_json(const FinitePriorModel& model, const nlohmann::json& j);

nlohmann::json to_json(const AxiomReport& report);
nlohmann::json to_json(const DualityCheck& check);
nlohmann::json to_json(const ContinuityReport& report);
nlohmann::json to_json(const ConvergentBound& bound);
nlohmann::json to_json(const DivergentBound& bound);
nlohmann::json to_json(const IndependenceCheck& check);

// ---------------------------------------------------------------------------

template <class Rng>
FinitePriorModel FinitePriorModel::random(std::size_t atoms, std::size_t priors, Rng& rng)
{
    std::exponential_distribution<double> expo(1.0);
    std::vector<std::string> names;
    for (std::size_t a = 0; a < atoms; ++a) names.push_back("w" + std::to_string(a));
    std::vector<std::vector<double>> rows(priors, std::vector<double>(atoms));
    for (auto& row : rows) {
        double total = 0.0;
        for (double& p : row) total += (p = expo(rng));
        for (double& p : row) p /= total;
    }
    return FinitePriorModel(std::move(names), std::move(rows));
}

}  // namespace glil
