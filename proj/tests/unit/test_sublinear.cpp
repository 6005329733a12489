#include "glil/sublinear.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glil/error.hpp"

namespace glil {
namespace {

FinitePriorModel two_atom_model()
{
    return FinitePriorModel({"a", "b"}, {{0.5, 0.5}, {0.8, 0.2}});
}

std::vector<double> random_rv(std::size_t atoms, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> rv(atoms);
    for (double& x : rv) x = u(rng);
    return rv;
}

Event random_event(std::size_t atoms, std::mt19937_64& rng)
{
    Event e;
    for (std::size_t a = 0; a < atoms; ++a) {
        if (rng() & 1U) e.push_back(a);
    }
    return e;
}

// Explicit 2^M-atom model whose priors are all products of per-coordinate
// extreme probabilities. Used as an oracle for the factorized coin model.
FinitePriorModel brute_force_coins(const std::vector<double>& lo, const std::vector<double>& hi)
{
    const std::size_t m = lo.size();
    const std::size_t atoms = std::size_t{1} << m;
    std::vector<std::string> names;
    for (std::size_t w = 0; w < atoms; ++w) names.push_back(std::to_string(w));
    std::vector<std::vector<double>> priors;
    for (std::size_t choice = 0; choice < atoms; ++choice) {
        std::vector<double> p(atoms, 1.0);
        for (std::size_t w = 0; w < atoms; ++w) {
            for (std::size_t k = 0; k < m; ++k) {
                const double q = ((choice >> k) & 1U) ? hi[k] : lo[k];
                p[w] *= ((w >> k) & 1U) ? q : 1.0 - q;
            }
        }
        priors.push_back(p);
    }
    return FinitePriorModel(names, priors);
}

TEST(UpperExpectation, SpecExamples)
{
    const auto model = two_atom_model();
    const std::vector<double> x{1.0, 0.0};
    EXPECT_DOUBLE_EQ(upper_expectation(model, x), 0.8);
    EXPECT_DOUBLE_EQ(lower_expectation(model, x), 0.5);

    const std::vector<double> y{1.0, -1.0};
    EXPECT_NEAR(upper_expectation(model, y), 0.6, 1e-15);
    EXPECT_NEAR(lower_expectation(model, y), 0.0, 1e-15);

    const std::vector<double> c{2.5, 2.5};
    EXPECT_DOUBLE_EQ(upper_expectation(model, c), 2.5);
    EXPECT_DOUBLE_EQ(lower_expectation(model, c), 2.5);
}

TEST(UpperExpectation, TiesBreakToFirstPrior)
{
    const FinitePriorModel model({"a", "b"}, {{0.5, 0.5}, {0.5, 0.5}, {0.9, 0.1}});
    const std::vector<double> flat{1.0, 1.0};
    EXPECT_EQ(upper_expectation_at(model, flat).prior, 0U);
    EXPECT_EQ(lower_expectation_at(model, flat).prior, 0U);
    const std::vector<double> x{1.0, 0.0};
    EXPECT_EQ(upper_expectation_at(model, x).prior, 2U);
}

TEST(UpperExpectation, Errors)
{
    EXPECT_THROW(FinitePriorModel({"a"}, {}), ModelError);
    EXPECT_THROW(FinitePriorModel({"a", "b"}, {{0.7, 0.2}}), ModelError);
    EXPECT_THROW(FinitePriorModel({"a", "b"}, {{1.2, -0.2}}), ModelError);
    EXPECT_THROW(FinitePriorModel({"a", "a"}, {{0.5, 0.5}}), ModelError);
    const auto model = two_atom_model();
    const std::vector<double> bad{1.0, std::nan("")};
    EXPECT_THROW(upper_expectation(model, bad), InputError);
    const std::vector<double> short_rv{1.0};
    EXPECT_THROW(lower_expectation(model, short_rv), InputError);
}

TEST(CapacityPair, SpecExamples)
{
    const auto model = two_atom_model();
    const std::vector<std::string> a{"a"};
    const std::vector<std::string> b{"b"};
    const auto ca = capacity_pair(model, model.event(a));
    EXPECT_DOUBLE_EQ(ca.v_upper, 0.8);
    EXPECT_DOUBLE_EQ(ca.v_lower, 0.5);
    const auto cb = capacity_pair(model, model.event(b));
    EXPECT_NEAR(cb.v_upper, 0.5, 1e-15);
    EXPECT_NEAR(cb.v_lower, 0.2, 1e-15);

    const auto empty = capacity_pair(model, {});
    EXPECT_EQ(empty.v_upper, 0.0);
    EXPECT_EQ(empty.v_lower, 0.0);
    const auto whole = capacity_pair(model, {0, 1});
    EXPECT_EQ(whole.v_upper, 1.0);
    EXPECT_EQ(whole.v_lower, 1.0);

    const std::vector<std::string> unknown{"z"};
    EXPECT_THROW(model.event(unknown), InputError);
    EXPECT_THROW(capacity_pair(model, {7}), InputError);
}

TEST(Axioms, SpecExamples)
{
    const auto model = two_atom_model();
    const std::vector<std::vector<double>> rvs{{1.0, 0.0}, {0.0, 1.0}};
    const auto report = verify_sublinear_axioms(model, rvs);
    EXPECT_TRUE(report.all_pass());
    // E[X+Y] = 1 <= 0.8 + 0.5
    ASSERT_FALSE(report.pairs.empty());
    EXPECT_NEAR(report.pairs[0].subadditivity_residual, 1.0 - 1.3, 1e-15);
    for (const auto& h : report.homogeneity) {
        if (h.lambda == 0.0) {
            EXPECT_EQ(h.residual, 0.0);
        }
    }

    const std::vector<std::vector<double>> one{{1.0, 0.0}};
    EXPECT_THROW(verify_sublinear_axioms(model, one), InputError);
    const std::vector<double> negative{-1.0};
    EXPECT_THROW(verify_sublinear_axioms(model, rvs, negative), InputError);
}

TEST(Axioms, PropertyRandomModels)
{
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t atoms = 2 + rng() % 7;
        const std::size_t priors = 1 + rng() % 5;
        const auto model = FinitePriorModel::random(atoms, priors, rng);
        std::vector<std::vector<double>> rvs;
        for (int k = 0; k < 4; ++k) rvs.push_back(random_rv(atoms, rng));
        auto dominated = rvs[0];
        for (double& x : dominated) x -= 0.25;
        rvs.push_back(dominated);

        const auto report = verify_sublinear_axioms(model, rvs);
        EXPECT_TRUE(report.all_pass()) << "trial " << trial;
        EXPECT_LT(report.max_residual, kExactTolerance);

        for (const auto& rv : rvs) {
            std::vector<double> neg(rv);
            for (double& x : neg) x = -x;
            // exact, not approximate
            EXPECT_EQ(lower_expectation(model, rv), -upper_expectation(model, neg));
            EXPECT_LE(lower_expectation(model, rv), upper_expectation(model, rv));
        }
    }
}

TEST(Duality, SpecExamples)
{
    const auto model = two_atom_model();
    const auto a = verify_duality(model, {0});
    EXPECT_TRUE(a.pass);
    EXPECT_NEAR(a.v_upper, 0.8, 1e-15);
    EXPECT_NEAR(a.v_lower_complement, 0.2, 1e-15);
    const auto empty = verify_duality(model, {});
    EXPECT_TRUE(empty.pass);
    EXPECT_EQ(empty.v_upper, 0.0);
    EXPECT_EQ(empty.v_lower_complement, 1.0);
}

TEST(Duality, PropertySweep)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto model = FinitePriorModel::random(6, 4, rng);
        const auto event = random_event(6, rng);
        const auto check = verify_duality(model, event);
        EXPECT_TRUE(check.pass);
        EXPECT_LT(check.residual, 1e-12);

        // monotonicity of both capacities under inclusion
        auto bigger = event;
        bigger.push_back(rng() % 6);
        const auto small_cap = capacity_pair(model, event);
        const auto big_cap = capacity_pair(model, bigger);
        EXPECT_LE(small_cap.v_upper, big_cap.v_upper + 1e-15);
        EXPECT_LE(small_cap.v_lower, big_cap.v_lower + 1e-15);
        EXPECT_LE(small_cap.v_lower, small_cap.v_upper);
    }
}

TEST(Continuity, SpecExamples)
{
    const auto model = two_atom_model();
    const std::vector<Event> up{{}, {0}, {0, 1}};
    const auto inc = verify_continuity(model, up);
    EXPECT_TRUE(inc.increasing);
    EXPECT_TRUE(inc.all_pass());
    ASSERT_EQ(inc.values.size(), 3U);
    EXPECT_EQ(inc.values[0].v_upper, 0.0);
    EXPECT_DOUBLE_EQ(inc.values[1].v_upper, 0.8);
    EXPECT_EQ(inc.values[2].v_upper, 1.0);
    EXPECT_EQ(inc.limit.v_upper, 1.0);

    const std::vector<Event> down{{0, 1}, {1}, {}};
    const auto dec = verify_continuity(model, down);
    EXPECT_FALSE(dec.increasing);
    EXPECT_TRUE(dec.all_pass());
    EXPECT_EQ(dec.values[0].v_upper, 1.0);
    EXPECT_NEAR(dec.values[1].v_upper, 0.5, 1e-15);
    EXPECT_EQ(dec.values[2].v_upper, 0.0);

    const std::vector<Event> zigzag{{0}, {1}};
    EXPECT_THROW(verify_continuity(model, zigzag), InputError);
}

TEST(Continuity, PropertyRandomChains)
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto model = FinitePriorModel::random(8, 3, rng);
        std::vector<std::size_t> order(8);
        for (std::size_t i = 0; i < 8; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Event> chain;
        Event current;
        for (std::size_t k = 0; k < 8; ++k) {
            current.push_back(order[k]);
            chain.push_back(current);
        }
        const auto report = verify_continuity(model, chain);
        EXPECT_TRUE(report.all_pass());
        std::reverse(chain.begin(), chain.end());
        EXPECT_TRUE(verify_continuity(model, chain).all_pass());
    }
}

TEST(ProductCoin, PairwiseIndependenceSpecExamples)
{
    const ProductCoinModel coin(0.3, 0.6, 5);
    const auto one = pairwise_independence_check(coin, 1, 2, CoinSet::one, CoinSet::one);
    EXPECT_NEAR(one.joint.v_upper, 0.36, 1e-15);
    EXPECT_NEAR(one.joint.v_lower, 0.09, 1e-15);
    EXPECT_TRUE(one.upper_pass);
    EXPECT_TRUE(one.lower_pass);

    const auto full = pairwise_independence_check(coin, 1, 4, CoinSet::both, CoinSet::one);
    EXPECT_NEAR(full.joint.v_upper, 0.6, 1e-15);
    EXPECT_TRUE(full.upper_pass && full.lower_pass);

    EXPECT_THROW(pairwise_independence_check(coin, 2, 2, CoinSet::one, CoinSet::one), InputError);
    EXPECT_THROW(pairwise_independence_check(coin, 1, 6, CoinSet::one, CoinSet::one), InputError);
}

TEST(ProductCoin, CylindersMatchBruteForce)
{
    const std::vector<double> lo{0.1, 0.3, 0.25, 0.5, 0.05};
    const std::vector<double> hi{0.4, 0.35, 0.9, 0.5, 0.6};
    const ProductCoinModel coin(lo, hi);
    const auto model = brute_force_coins(lo, hi);

    std::mt19937_64 rng(3);
    const CoinSet sets[] = {CoinSet::none, CoinSet::zero, CoinSet::one, CoinSet::both};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<std::size_t, CoinSet>> constraints;
        for (std::size_t k = 1; k <= 5; ++k) {
            if (rng() % 2) constraints.emplace_back(k, sets[rng() % 4]);
        }
        Event event;
        for (std::size_t w = 0; w < model.atom_count(); ++w) {
            bool inside = true;
            for (const auto& [k, set] : constraints) {
                const unsigned bit = (w >> (k - 1)) & 1U;
                inside = inside && ((static_cast<unsigned>(set) >> bit) & 1U);
            }
            if (inside) event.push_back(w);
        }
        const auto fast = coin.cylinder(constraints);
        const auto slow = capacity_pair(model, event);
        EXPECT_NEAR(fast.v_upper, slow.v_upper, 1e-14);
        EXPECT_NEAR(fast.v_lower, slow.v_lower, 1e-14);
    }
}

TEST(BorelCantelli, ConvergentVaryingBand)
{
    std::vector<double> lo;
    std::vector<double> hi;
    for (int i = 1; i <= 40; ++i) {
        hi.push_back(std::ldexp(1.0, -i));
        lo.push_back(std::ldexp(1.0, -i - 1));
    }
    const ProductCoinModel coin(lo, hi);
    const auto rows = bc_convergent_table(coin, 40);
    ASSERT_EQ(rows.size(), 40U);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_TRUE(rows[k].pass);
        EXPECT_NEAR(rows[k].tail_sum, std::ldexp(1.0, -int(k)) - std::ldexp(1.0, -40), 1e-15);
        if (k > 0) {
            EXPECT_LT(rows[k].tail_sum, rows[k - 1].tail_sum);
        }
    }
    EXPECT_LT(rows.back().union_capacity, 1e-11);

    // single event: V(A_M) <= V(A_M)
    const auto single = bc_convergent_check(coin, 40, 40);
    EXPECT_NEAR(single.union_capacity, single.tail_sum, 1e-15);
    EXPECT_TRUE(single.pass);
    EXPECT_THROW(bc_convergent_check(coin, 1, 41), InputError);
}

TEST(BorelCantelli, ConvergentMatchesBruteForce)
{
    const std::vector<double> lo{0.1, 0.2, 0.05, 0.3};
    const std::vector<double> hi{0.3, 0.25, 0.4, 0.6};
    const ProductCoinModel coin(lo, hi);
    const auto model = brute_force_coins(lo, hi);
    for (std::size_t n = 1; n <= 4; ++n) {
        Event uni;
        for (std::size_t w = 0; w < model.atom_count(); ++w) {
            if ((w >> (n - 1)) != 0) uni.push_back(w);
        }
        EXPECT_NEAR(bc_convergent_check(coin, n, 4).union_capacity, capacity_pair(model, uni).v_upper, 1e-14);
        EXPECT_NEAR(bc_divergent_check(coin, n, 4).union_lower_capacity, capacity_pair(model, uni).v_lower,
                    1e-14);
    }
}

TEST(BorelCantelli, DisjointEventsAddUnderOnePrior)
{
    const FinitePriorModel model({"a", "b", "c", "d"}, {{0.1, 0.2, 0.3, 0.4}});
    const auto ab = capacity_pair(model, {0, 1});
    const auto a = capacity_pair(model, {0});
    const auto b = capacity_pair(model, {1});
    EXPECT_DOUBLE_EQ(ab.v_upper, a.v_upper + b.v_upper);
}

TEST(BorelCantelli, DivergentSpecExamples)
{
    const ProductCoinModel half(0.5, 0.9, 3);
    const auto small = bc_divergent_check(half, 1, 3);
    EXPECT_EQ(small.union_lower_capacity, 0.875);
    EXPECT_EQ(small.product, 0.125);
    EXPECT_NEAR(small.exp_bound, std::exp(-1.5), 1e-15);
    EXPECT_TRUE(small.pass);

    const ProductCoinModel coin(0.3, 0.6, 20);
    const auto twenty = bc_divergent_check(coin, 1, 20);
    EXPECT_NEAR(twenty.complement, std::pow(0.7, 20), 1e-15);
    EXPECT_NEAR(twenty.complement, 7.9792266297612e-4, 1e-15);
    EXPECT_TRUE(twenty.pass);

    // the complement shrinks toward 0 as the horizon grows
    const ProductCoinModel long_coin(0.3, 0.6, 40);
    double previous = 1.0;
    for (std::size_t m : {10U, 20U, 40U}) {
        const auto row = bc_divergent_check(long_coin, 1, m);
        EXPECT_LT(row.complement, previous);
        EXPECT_LE(row.product, row.exp_bound);
        previous = row.complement;
    }
}

TEST(ModelJson, RoundTripAndErrors)
{
    const auto model = two_atom_model();
    const auto j = to_json(model);
    const auto back = model_from_json(j);
    EXPECT_EQ(back.atoms(), model.atoms());
    EXPECT_EQ(back.priors(), model.priors());
    EXPECT_EQ(event_from_json(model, nlohmann::json::array({"b"})), Event{1});
    EXPECT_THROW(model_from_json(nlohmann::json{{"atoms", {"a"}}}), InputError);
    EXPECT_THROW(event_from_json(model, nlohmann::json::array({"q"})), InputError);
}

}  // namespace
}  // namespace glil
