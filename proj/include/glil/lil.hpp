#pragma once

// Finite-horizon laboratory for the law of the iterated logarithm under
// volatility uncertainty. Increments are X_i = theta_i zeta_i with zeta_i
// fair +-1 signs and theta_i chosen by an adapted strategy in the band, so
// |X_i| <= sigma_hi, the conditional mean is 0 and the conditional second
// moment lies in [sigma_lo^2, sigma_hi^2].

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "glil/gheat.hpp"
#include "glil/strategy.hpp"

namespace glil {

/// S / sqrt(2 n ln ln n) with natural logs; InputError for n < 3.
double lil_statistic(double sum, std::size_t n);

enum class Noise { rademacher, gaussian };

struct BlockSchedule {
    enum class Rule { k_pow_k, exp_alpha, geometric };
    Rule rule = Rule::geometric;
    double parameter = 1.5;  // alpha or rho
    std::vector<std::size_t> boundaries;

    /// n_k = k^k for k = 1..k_max (k_max <= 8 keeps n_k below 2^24).
    static BlockSchedule k_pow_k(std::size_t k_max = 8);
    /// n_k = [e^{k^alpha}] (integer part), boundaries >= 3 and <= limit, duplicates dropped.
    static BlockSchedule exp_alpha(double alpha, std::size_t limit);
    /// n_1 = 3, n_{k+1} = max(n_k + 1, ceil(rho n_k)), up to limit.
    static BlockSchedule geometric(double rho, std::size_t limit);

    std::string label() const;
};

struct TrajectoryOptions {
    Noise noise = Noise::rademacher;
    bool flip = false;                          // antithetic: zeta -> -zeta
    double checkpoint_ratio = 1.01;
    std::vector<std::size_t> extra_checkpoints; // e.g. block boundaries
};

struct LILTrajectory {
    std::size_t horizon = 0;
    std::string strategy;
    std::uint64_t seed = 0;
    std::vector<std::size_t> n;   // checkpoints, all >= 3, increasing, last == horizon
    std::vector<double> sums;     // S_n
    std::vector<double> stats;    // R_n
    double max_abs_increment = 0.0;

    /// S at checkpoint n; InputError if n is not a checkpoint.
    double sum_at(std::size_t checkpoint) const;
};

LILTrajectory sample_trajectory(const AdversaryStrategy& strategy, const VolatilityBand& band,
                                std::size_t horizon, std::uint64_t seed,
                                const TrajectoryOptions& options = {});

struct Histogram {
    double lo = 0.0;
    double width = 0.05;
    std::vector<std::size_t> counts;
    std::size_t underflow = 0;
    std::size_t overflow = 0;

    std::size_t total() const;
};

struct LILReport {
    std::string strategy;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;
    double tail_sup = 0.0;  // over checkpoints n in [N^{7/8}, N]
    double tail_inf = 0.0;
    double final_stat = 0.0;
    std::size_t tail_checkpoints = 0;
    Histogram cluster;      // checkpoints with n >= N^{1/2}
    std::size_t cluster_checkpoints = 0;
};

LILReport make_report(const LILTrajectory& trajectory, const VolatilityBand& band);

// ---------------------------------------------------------------------------

struct StrategySummary {
    std::string strategy;
    double tail_sup = 0.0;  // max over seeds
    double tail_inf = 0.0;  // min over seeds
};

struct Theorem1Verdicts {
    bool upper_bound = true;        // every tail_sup <= 1.15 sigma_hi
    bool upper_reached = true;      // const sigma_hi: tail_sup >= 0.9 sigma_lo
    bool lower_scale = true;        // const sigma_lo: tail_sup in [0.7, 1.15] sigma_lo
    bool mirror_bound = true;       // every tail_inf >= -1.15 sigma_hi
    bool mirror_reached = true;     // const sigma_hi: tail_inf <= -0.9 sigma_lo
    bool mirror_lower_scale = true; // const sigma_lo: tail_inf in [-1.15, -0.7] sigma_lo
    bool pass() const noexcept
    {
        return upper_bound && upper_reached && lower_scale && mirror_bound && mirror_reached &&
               mirror_lower_scale;
    }
};

struct Theorem1Result {
    std::vector<LILReport> reports;          // strategy-major, then seed
    std::vector<LILTrajectory> trajectories; // same order
    std::vector<StrategySummary> summaries;
    Theorem1Verdicts verdicts;
};

/// Run (strategy s, seed) draws from derive_seed(derive_seed(master, s), seed).
/// Requires N >= 1e5 and at least three seeds.
Theorem1Result theorem1_experiment(const VolatilityBand& band,
                                   std::span<const AdversaryStrategy> strategies,
                                   std::size_t horizon, std::span<const std::uint64_t> seeds,
                                   std::uint64_t master_seed);

// ---------------------------------------------------------------------------

struct BlockIncrement {
    std::size_t k = 0;        // 1-based index of the block start n_k
    std::size_t start = 0;    // n_k
    std::size_t end = 0;      // n_{k+1}
    double stat = 0.0;        // (S_{n_{k+1}} - S_{n_k}) / sqrt(2 n_{k+1} loglog n_{k+1})
    double ratio = 0.0;       // n_k / n_{k+1}
};

struct BlockIncrementStats {
    std::vector<BlockIncrement> rows;
    bool trimmed = false;     // schedule extended past the horizon
};

BlockIncrementStats block_increment_stats(const LILTrajectory& trajectory,
                                          const BlockSchedule& schedule);

struct ClusterRow {
    double b = 0.0;
    std::uint64_t seed = 0;
    double min_distance = 0.0;   // min_k |R_{n_k} - b|
    std::size_t hit_block = 0;   // n_k attaining it
    double tail_min_distance = 0.0;  // same minimum over n_k >= sqrt(N) only (informative)
    double hit_fraction = 0.0;   // blocks with |increment stat - b| <= epsilon
    bool pass = true;            // min_distance <= kClusterTolerance
};

inline constexpr double kClusterTolerance = 0.1;

struct ClusterResult {
    std::vector<ClusterRow> rows;
    std::vector<LILTrajectory> trajectories;
    bool pass() const;
};

/// block_target(b, rho) runs with blocks geometric(rho). Every |b| must be
/// below sigma_lo (InputError otherwise).
ClusterResult cluster_experiment(const VolatilityBand& band, std::span<const double> b_list,
                                 std::size_t horizon, std::span<const std::uint64_t> seeds,
                                 std::uint64_t master_seed, double rho = 1.5,
                                 double epsilon = kClusterTolerance);

// ---------------------------------------------------------------------------

struct MomentRow {
    std::size_t m = 0;
    std::size_t n = 0;
    double ratio = 0.0;      // mean of max_{i<=n} |S_{m+i} - S_m|^r / n^{r/2}
    double std_error = 0.0;
};

struct MomentTable {
    double r = 0.0;
    std::vector<MomentRow> rows;  // m-major, n increasing
    double classical = 0.0;       // E|Z|^r sigma_hi^r
    double max_ratio = 0.0;
    double worst_trend = 0.0;     // max over m of last / first
    bool bounded = true;          // max_ratio <= 2 classical
    bool flat = true;             // worst_trend <= 1.5
    bool pass() const noexcept { return bounded && flat; }
};

/// E|Z|^r for Z standard normal.
double gaussian_abs_moment(double r);

MomentTable moment_ratio_check(const VolatilityBand& band, const AdversaryStrategy& strategy, double r,
                               std::span<const std::size_t> n_list,
                               std::span<const std::size_t> m_list, std::size_t paths,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------

void write_csv(std::ostream& out, const LILTrajectory& trajectory);
void write_csv(std::ostream& out, const MomentTable& table);
void write_csv(std::ostream& out, const BlockIncrementStats& stats);
void write_csv(std::ostream& out, const Theorem1Result& result);
void write_csv(std::ostream& out, const ClusterResult& result);
nlohmann::json to_json(const LILReport& report);
nlohmann::json to_json(const Theorem1Result& result);
nlohmann::json to_json(const ClusterResult& result);
nlohmann::json to_json(const MomentTable& table);

}  // namespace glil
