#include "glil/lil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "glil/error.hpp"
#include "glil/parallel.hpp"
#include "glil/rng.hpp"

namespace glil {

namespace {

double normalizer(std::size_t n)
{
    const double x = static_cast<double>(n);
    return std::sqrt(2.0 * x * std::log(std::log(x)));
}

/// Tail-window start ceil(N^{7/8}).
std::size_t tail_start(std::size_t horizon)
{
    return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(horizon), 7.0 / 8.0)));
}

std::vector<std::size_t> checkpoint_grid(std::size_t horizon, const TrajectoryOptions& options)
{
    if (!(options.checkpoint_ratio > 1.0)) throw InputError("checkpoint ratio must exceed 1");
    std::vector<std::size_t> points;
    for (std::size_t c = 3; c <= horizon;) {
        points.push_back(c);
        const auto grown = static_cast<std::size_t>(std::ceil(static_cast<double>(c) * options.checkpoint_ratio));
        c = std::max(c + 1, grown);
    }
    for (std::size_t extra : options.extra_checkpoints) {
        if (extra >= 3 && extra <= horizon) points.push_back(extra);
    }
    points.push_back(horizon);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

bool is_constant(const AdversaryStrategy& s, double sigma)
{
    const auto* c = std::get_if<strategy::Constant>(&s.kind());
    return c != nullptr && c->sigma == sigma;
}

}  // namespace

double lil_statistic(double sum, std::size_t n)
{
    if (n < 3) throw InputError("LIL statistic needs n >= 3 (ln ln n > 0)");
    return sum / normalizer(n);
}

// ---------------------------------------------------------------------------

BlockSchedule BlockSchedule::k_pow_k(std::size_t k_max)
{
    if (k_max < 1 || k_max > 8) throw InputError("k^k schedule supports 1 <= k <= 8");
    BlockSchedule s{.rule = Rule::k_pow_k, .parameter = 0.0, .boundaries = {}};
    for (std::size_t k = 1; k <= k_max; ++k) {
        std::size_t v = 1;
        for (std::size_t i = 0; i < k; ++i) v *= k;
        s.boundaries.push_back(v);
    }
    return s;
}

BlockSchedule BlockSchedule::exp_alpha(double alpha, std::size_t limit)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("exp_alpha schedule needs alpha > 0");
    BlockSchedule s{.rule = Rule::exp_alpha, .parameter = alpha, .boundaries = {}};
    for (std::size_t k = 1; k < 1000000; ++k) {
        const double v = std::floor(std::exp(std::pow(static_cast<double>(k), alpha)));
        if (v > static_cast<double>(limit)) break;
        const auto n = static_cast<std::size_t>(v);
        if (n >= 3 && (s.boundaries.empty() || n > s.boundaries.back())) s.boundaries.push_back(n);
    }
    return s;
}

BlockSchedule BlockSchedule::geometric(double rho, std::size_t limit)
{
    if (!(rho > 1.0) || !std::isfinite(rho)) throw InputError("geometric schedule needs rho > 1");
    BlockSchedule s{.rule = Rule::geometric, .parameter = rho, .boundaries = {}};
    for (std::size_t n = 3; n <= limit;) {
        s.boundaries.push_back(n);
        n = std::max(n + 1, static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n))));
    }
    return s;
}

std::string BlockSchedule::label() const
{
    switch (rule) {
    case Rule::k_pow_k: return "k_pow_k";
    case Rule::exp_alpha: return "exp_alpha:" + std::to_string(parameter);
    case Rule::geometric: return "geometric:" + std::to_string(parameter);
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

double LILTrajectory::sum_at(std::size_t checkpoint) const
{
    const auto it = std::lower_bound(n.begin(), n.end(), checkpoint);
    if (it == n.end() || *it != checkpoint) {
        throw InputError("n = " + std::to_string(checkpoint) + " is not a trajectory checkpoint");
    }
    return sums[static_cast<std::size_t>(it - n.begin())];
}

LILTrajectory sample_trajectory(const AdversaryStrategy& strategy, const VolatilityBand& band,
                                std::size_t horizon, std::uint64_t seed,
                                const TrajectoryOptions& options)
{
    if (horizon < 3) throw InputError("trajectory horizon N must be >= 3");

    LILTrajectory traj;
    traj.horizon = horizon;
    traj.strategy = strategy.label();
    traj.seed = seed;
    const auto points = checkpoint_grid(horizon, options);
    traj.n.reserve(points.size());
    traj.sums.reserve(points.size());
    traj.stats.reserve(points.size());

    Engine engine = make_engine(seed, 0);
    RademacherSource signs(engine);
    std::normal_distribution<double> normal;
    auto runner = strategy.start(band, seed);
    const double orientation = options.flip ? -1.0 : 1.0;

    double sum = 0.0;
    double stat = 0.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < horizon; ++i) {
        const double theta = runner->next({i, sum, stat});
        double zeta = 0.0;
        if (options.noise == Noise::rademacher) {
            zeta = signs.next();
        } else {
            do {
                zeta = normal(engine);
            } while (std::abs(zeta) > 6.0);
        }
        const double increment = orientation * theta * zeta;
        traj.max_abs_increment = std::max(traj.max_abs_increment, std::abs(increment));
        sum += increment;

        const std::size_t n = i + 1;
        if (n >= 3) stat = sum / normalizer(n);
        if (next < points.size() && points[next] == n) {
            traj.n.push_back(n);
            traj.sums.push_back(sum);
            traj.stats.push_back(stat);
            ++next;
        }
    }
    return traj;
}

std::size_t Histogram::total() const
{
    std::size_t t = underflow + overflow;
    for (auto c : counts) t += c;
    return t;
}

LILReport make_report(const LILTrajectory& trajectory, const VolatilityBand& band)
{
    LILReport report;
    report.strategy = trajectory.strategy;
    report.seed = trajectory.seed;
    report.horizon = trajectory.horizon;
    report.final_stat = trajectory.stats.back();

    const std::size_t window = std::min(tail_start(trajectory.horizon), trajectory.horizon);
    report.tail_sup = -std::numeric_limits<double>::infinity();
    report.tail_inf = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < trajectory.n.size(); ++k) {
        if (trajectory.n[k] < window) continue;
        report.tail_sup = std::max(report.tail_sup, trajectory.stats[k]);
        report.tail_inf = std::min(report.tail_inf, trajectory.stats[k]);
        ++report.tail_checkpoints;
    }

    auto& h = report.cluster;
    h.lo = -band.hi() - 0.5;
    h.width = 0.05;
    h.counts.assign(static_cast<std::size_t>(std::llround((2.0 * band.hi() + 1.0) / h.width)), 0);
    const double cluster_start = std::sqrt(static_cast<double>(trajectory.horizon));
    for (std::size_t k = 0; k < trajectory.n.size(); ++k) {
        if (static_cast<double>(trajectory.n[k]) < cluster_start) continue;
        const double pos = (trajectory.stats[k] - h.lo) / h.width;
        if (pos < 0.0) {
            ++h.underflow;
        } else if (pos >= static_cast<double>(h.counts.size())) {
            ++h.overflow;
        } else {
            ++h.counts[static_cast<std::size_t>(pos)];
        }
        ++report.cluster_checkpoints;
    }
    return report;
}

// ---------------------------------------------------------------------------

Theorem1Result theorem1_experiment(const VolatilityBand& band,
                                   std::span<const AdversaryStrategy> strategies,
                                   std::size_t horizon, std::span<const std::uint64_t> seeds,
                                   std::uint64_t master_seed)
{
    if (horizon < 100000) throw ConfigError("the limsup experiment needs N >= 1e5");
    if (seeds.size() < 3) throw ConfigError("the limsup experiment needs at least three seeds");
    if (strategies.empty()) throw ConfigError("the limsup experiment needs at least one strategy");

    const std::size_t runs = strategies.size() * seeds.size();
    Theorem1Result result;
    result.trajectories.resize(runs);
    result.reports.resize(runs);
    parallel_for(runs, [&](std::size_t r) {
        const std::size_t s = r / seeds.size();
        const std::uint64_t seed = derive_seed(derive_seed(master_seed, s), seeds[r % seeds.size()]);
        result.trajectories[r] = sample_trajectory(strategies[s], band, horizon, seed);
        result.reports[r] = make_report(result.trajectories[r], band);
    });

    auto& v = result.verdicts;
    const double hi = band.hi();
    const double lo = band.lo();
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        StrategySummary summary{strategies[s].label(), -std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity()};
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const auto& rep = result.reports[s * seeds.size() + k];
            summary.tail_sup = std::max(summary.tail_sup, rep.tail_sup);
            summary.tail_inf = std::min(summary.tail_inf, rep.tail_inf);
        }
        v.upper_bound = v.upper_bound && summary.tail_sup <= 1.15 * hi;
        v.mirror_bound = v.mirror_bound && summary.tail_inf >= -1.15 * hi;
        if (is_constant(strategies[s], hi)) {
            v.upper_reached = v.upper_reached && summary.tail_sup >= 0.9 * lo;
            v.mirror_reached = v.mirror_reached && summary.tail_inf <= -0.9 * lo;
        }
        if (is_constant(strategies[s], lo)) {
            v.lower_scale = v.lower_scale && summary.tail_sup >= 0.7 * lo && summary.tail_sup <= 1.15 * lo;
            v.mirror_lower_scale =
                v.mirror_lower_scale && summary.tail_inf <= -0.7 * lo && summary.tail_inf >= -1.15 * lo;
        }
        result.summaries.push_back(summary);
    }
    return result;
}

// ---------------------------------------------------------------------------

BlockIncrementStats block_increment_stats(const LILTrajectory& trajectory,
                                          const BlockSchedule& schedule)
{
    BlockIncrementStats stats;
    std::vector<std::size_t> bounds;
    for (std::size_t n : schedule.boundaries) {
        if (n > trajectory.horizon) {
            stats.trimmed = true;
            break;
        }
        bounds.push_back(n);
    }
    auto sum_at = [&](std::size_t n) { return n < 3 ? std::nan("") : trajectory.sum_at(n); };
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        const std::size_t start = bounds[k];
        const std::size_t end = bounds[k + 1];
        if (start < 3) continue;  // S_{n_k} is only recorded from n = 3
        BlockIncrement row{.k = k + 1, .start = start, .end = end};
        row.stat = (sum_at(end) - sum_at(start)) / normalizer(end);
        row.ratio = static_cast<double>(start) / static_cast<double>(end);
        stats.rows.push_back(row);
    }
    return stats;
}

bool ClusterResult::pass() const
{
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
}

ClusterResult cluster_experiment(const VolatilityBand& band, std::span<const double> b_list,
                                 std::size_t horizon, std::span<const std::uint64_t> seeds,
                                 std::uint64_t master_seed, double rho, double epsilon)
{
    for (double b : b_list) {
        if (!(std::abs(b) < band.lo())) {
            throw InputError("cluster target b = " + std::to_string(b) +
                             " must satisfy |b| < sigma_lo = " + std::to_string(band.lo()));
        }
    }
    if (seeds.empty()) throw ConfigError("cluster experiment needs at least one seed");
    if (horizon < 3) throw InputError("trajectory horizon N must be >= 3");

    const auto schedule = BlockSchedule::geometric(rho, horizon);
    TrajectoryOptions options;
    options.extra_checkpoints = schedule.boundaries;

    const std::size_t runs = b_list.size() * seeds.size();
    ClusterResult result;
    result.rows.resize(runs);
    result.trajectories.resize(runs);
    parallel_for(runs, [&](std::size_t r) {
        const std::size_t bi = r / seeds.size();
        const double b = b_list[bi];
        const std::uint64_t seed = derive_seed(derive_seed(master_seed, 1000 + bi), seeds[r % seeds.size()]);
        const AdversaryStrategy strategy{strategy::BlockTarget{.b = b, .rho = rho}};
        auto traj = sample_trajectory(strategy, band, horizon, seed, options);

        ClusterRow row{.b = b,
                       .seed = seed,
                       .min_distance = std::numeric_limits<double>::infinity(),
                       .tail_min_distance = std::numeric_limits<double>::infinity()};
        const double tail = std::sqrt(static_cast<double>(horizon));
        for (std::size_t n : schedule.boundaries) {
            const double d = std::abs(lil_statistic(traj.sum_at(n), n) - b);
            if (d < row.min_distance) {
                row.min_distance = d;
                row.hit_block = n;
            }
            if (static_cast<double>(n) >= tail) row.tail_min_distance = std::min(row.tail_min_distance, d);
        }
        const auto blocks = block_increment_stats(traj, schedule);
        std::size_t hits = 0;
        for (const auto& inc : blocks.rows) hits += std::abs(inc.stat - b) <= epsilon ? 1 : 0;
        row.hit_fraction = blocks.rows.empty() ? 0.0 : double(hits) / double(blocks.rows.size());
        row.pass = row.min_distance <= kClusterTolerance;
        result.rows[r] = row;
        result.trajectories[r] = std::move(traj);
    });
    return result;
}

// ---------------------------------------------------------------------------

double gaussian_abs_moment(double r)
{
    return std::pow(2.0, r / 2.0) * std::tgamma((r + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

MomentTable moment_ratio_check(const VolatilityBand& band, const AdversaryStrategy& strategy, double r,
                               std::span<const std::size_t> n_list,
                               std::span<const std::size_t> m_list, std::size_t paths,
                               std::uint64_t seed)
{
    if (!(r > 2.0) || !std::isfinite(r)) throw InputError("moment order r must exceed 2");
    if (n_list.empty() || m_list.empty()) throw InputError("moment check needs n and m lists");
    if (paths < 2) throw InputError("moment check needs at least two paths");
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (n_list[k] == 0 || (k > 0 && n_list[k] <= n_list[k - 1])) {
            throw InputError("n list must be positive and strictly increasing");
        }
    }

    const std::size_t n_max = n_list.back();
    const std::size_t m_max = *std::max_element(m_list.begin(), m_list.end());
    const std::size_t length = m_max + n_max;
    const std::size_t cells = m_list.size() * n_list.size();
    std::vector<double> samples(paths * cells);

    parallel_for(paths, [&](std::size_t p) {
        Engine engine = make_engine(seed, p);
        RademacherSource signs(engine);
        auto runner = strategy.start(band, p);
        std::vector<double> base(m_list.size(), 0.0);
        std::vector<double> running(m_list.size(), 0.0);
        std::vector<std::size_t> next_n(m_list.size(), 0);
        double sum = 0.0;
        double stat = 0.0;
        for (std::size_t i = 0; i < length; ++i) {
            const double theta = runner->next({i, sum, stat});
            sum += theta * signs.next();
            const std::size_t step = i + 1;
            if (step >= 3) stat = sum / normalizer(step);
            for (std::size_t a = 0; a < m_list.size(); ++a) {
                const std::size_t m = m_list[a];
                if (step <= m) {
                    if (step == m) base[a] = sum;
                    continue;
                }
                running[a] = std::max(running[a], std::abs(sum - base[a]));
                if (next_n[a] < n_list.size() && step - m == n_list[next_n[a]]) {
                    const double n = static_cast<double>(n_list[next_n[a]]);
                    samples[p * cells + a * n_list.size() + next_n[a]] =
                        std::pow(running[a], r) / std::pow(n, r / 2.0);
                    ++next_n[a];
                }
            }
        }
    });

    MomentTable table;
    table.r = r;
    table.classical = gaussian_abs_moment(r) * std::pow(band.hi(), r);
    std::vector<double> column(paths);
    for (std::size_t a = 0; a < m_list.size(); ++a) {
        for (std::size_t b = 0; b < n_list.size(); ++b) {
            const std::size_t cell = a * n_list.size() + b;
            for (std::size_t p = 0; p < paths; ++p) column[p] = samples[p * cells + cell];
            const double mean = pairwise_sum(column) / static_cast<double>(paths);
            for (double& x : column) x = (x - mean) * (x - mean);
            const double var = pairwise_sum(column) / static_cast<double>(paths - 1);
            table.rows.push_back({m_list[a], n_list[b], mean, std::sqrt(var / static_cast<double>(paths))});
            table.max_ratio = std::max(table.max_ratio, mean);
        }
        const double first = table.rows[a * n_list.size()].ratio;
        const double last = table.rows[a * n_list.size() + n_list.size() - 1].ratio;
        table.worst_trend = std::max(table.worst_trend, last / first);
    }
    table.bounded = table.max_ratio <= 2.0 * table.classical;
    table.flat = table.worst_trend <= 1.5;
    return table;
}

// ---------------------------------------------------------------------------

void write_csv(std::ostream& out, const LILTrajectory& trajectory)
{
    const auto precision = out.precision(17);
    out << "n,S_n,R_n\n";
    for (std::size_t k = 0; k < trajectory.n.size(); ++k) {
        out << trajectory.n[k] << ',' << trajectory.sums[k] << ',' << trajectory.stats[k] << '\n';
    }
    out.precision(precision);
}

void write_csv(std::ostream& out, const MomentTable& table)
{
    const auto precision = out.precision(17);
    out << "m,n,ratio,std_error\n";
    for (const auto& row : table.rows) {
        out << row.m << ',' << row.n << ',' << row.ratio << ',' << row.std_error << '\n';
    }
    out.precision(precision);
}

void write_csv(std::ostream& out, const BlockIncrementStats& stats)
{
    const auto precision = out.precision(17);
    out << "k,n_k,n_k1,stat,ratio\n";
    for (const auto& row : stats.rows) {
        out << row.k << ',' << row.start << ',' << row.end << ',' << row.stat << ',' << row.ratio << '\n';
    }
    out.precision(precision);
}

void write_csv(std::ostream& out, const Theorem1Result& result)
{
    const auto precision = out.precision(17);
    out << "strategy,seed,tail_sup,tail_inf,final_stat,tail_checkpoints\n";
    for (const auto& r : result.reports) {
        out << r.strategy << ',' << r.seed << ',' << r.tail_sup << ',' << r.tail_inf << ',' << r.final_stat
            << ',' << r.tail_checkpoints << '\n';
    }
    out.precision(precision);
}

void write_csv(std::ostream& out, const ClusterResult& result)
{
    const auto precision = out.precision(17);
    out << "b,seed,min_distance,hit_block,tail_min_distance,hit_fraction,pass\n";
    for (const auto& r : result.rows) {
        out << r.b << ',' << r.seed << ',' << r.min_distance << ',' << r.hit_block << ',' << r.tail_min_distance
            << ',' << r.hit_fraction
            << ',' << (r.pass ? 1 : 0) << '\n';
    }
    out.precision(precision);
}

nlohmann::json to_json(const LILReport& report)
{
    return {{"strategy", report.strategy},
            {"seed", report.seed},
            {"N", report.horizon},
            {"tail_sup", report.tail_sup},
            {"tail_inf", report.tail_inf},
            {"final_stat", report.final_stat},
            {"tail_checkpoints", report.tail_checkpoints},
            {"cluster",
             {{"lo", report.cluster.lo},
              {"width", report.cluster.width},
              {"counts", report.cluster.counts},
              {"underflow", report.cluster.underflow},
              {"overflow", report.cluster.overflow}}},
            {"cluster_checkpoints", report.cluster_checkpoints}};
}

nlohmann::json to_json(const Theorem1Result& result)
{
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : result.reports) reports.push_back(to_json(r));
    nlohmann::json summaries = nlohmann::json::array();
    for (const auto& s : result.summaries) {
        summaries.push_back({{"strategy", s.strategy}, {"tail_sup", s.tail_sup}, {"tail_inf", s.tail_inf}});
    }
    const auto& v = result.verdicts;
    return {{"reports", reports},
            {"summaries", summaries},
            {"verdicts",
             {{"I_upper_bound", v.upper_bound},
              {"I_upper_reached", v.upper_reached},
              {"I_lower_scale", v.lower_scale},
              {"II_lower_bound", v.mirror_bound},
              {"II_lower_reached", v.mirror_reached},
              {"II_lower_scale", v.mirror_lower_scale},
              {"pass", v.pass()}}}};
}

nlohmann::json to_json(const ClusterResult& result)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows) {
        rows.push_back({{"b", r.b},
                        {"seed", r.seed},
                        {"min_distance", r.min_distance},
                        {"hit_block", r.hit_block},
                        {"tail_min_distance", r.tail_min_distance},
                        {"hit_fraction", r.hit_fraction},
                        {"pass", r.pass}});
    }
    return {{"rows", rows}, {"pass", result.pass()}};
}

nlohmann::json to_json(const MomentTable& table)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"m", r.m}, {"n", r.n}, {"ratio", r.ratio}, {"std_error", r.std_error}});
    }
    return {{"r", table.r},
            {"rows", rows},
            {"classical", table.classical},
            {"max_ratio", table.max_ratio},
            {"worst_trend", table.worst_trend},
            {"bounded", table.bounded},
            {"flat", table.flat},
            {"pass", table.pass()}};
}

}  // namespace glil
