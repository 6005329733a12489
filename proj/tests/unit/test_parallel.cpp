#include "glil/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "glil/rng.hpp"

namespace glil {
namespace {

TEST(Parallel, VisitsEveryIndexOnce)
{
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    parallel_for(0, [](std::size_t) { FAIL(); });
}

TEST(Parallel, RethrowsWorkerFailure)
{
    EXPECT_THROW(parallel_for(50,
                              [](std::size_t i) {
                                  if (i == 17) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(Parallel, PairwiseSum)
{
    std::vector<double> v(1001);
    std::iota(v.begin(), v.end(), 0.0);
    EXPECT_EQ(pairwise_sum(v), 500500.0);
    EXPECT_EQ(pairwise_sum({}), 0.0);
    // compensates where naive left-to-right summation drifts
    std::vector<double> tiny(1 << 20, 0.1);
    EXPECT_NEAR(pairwise_sum(tiny), 0.1 * (1 << 20), 1e-8);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t m = 0; m < 20; ++m) {
        for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(m, i));
    }
    EXPECT_EQ(seen.size(), 1000U);
    static_assert(derive_seed(1, 2) == derive_seed(1, 2));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
    // reference value of the SplitMix64 finalizer on 0
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, RademacherIsFair)
{
    Engine e = make_engine(3, 0);
    RademacherSource signs(e);
    double total = 0.0;
    const int n = 1 << 20;
    for (int i = 0; i < n; ++i) {
        const double s = signs.next();
        ASSERT_TRUE(s == 1.0 || s == -1.0);
        total += s;
    }
    EXPECT_LT(std::abs(total), 5.0 * std::sqrt(static_cast<double>(n)));
}

}  // namespace
}  // namespace glil
