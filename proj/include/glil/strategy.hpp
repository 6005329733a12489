#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "glil/gheat.hpp"

namespace glil {

/// What an adaptive strategy may look at before choosing the next volatility:
/// only quantities built from increments already drawn.
struct PathView {
    std::size_t step = 0;  // increments drawn so far
    double sum = 0.0;      // S_step
    double stat = 0.0;     // context statistic: S in the control problem, R_n in the LIL lab
};

namespace strategy {

struct Constant {
    double sigma = 1.0;
};
struct Periodic {
    std::vector<double> schedule;
};
/// theta = lo + (hi - lo) (1 - exp(-gain |stat - target|)): quiet near the
/// target, loud away from it.
struct Feedback {
    double target = 0.0;
    double gain = 1.0;
};
/// theta i.i.d. uniform on the band, from its own stream.
struct Random {
    std::uint64_t seed = 0;
};
/// Geometric blocks n_1 = 3, n_{k+1} = ceil(rho n_k). Inside a block the
/// strategy idles at sigma_lo while the block increment statistic
/// (S_n - S_{n_k}) / sqrt(2 n_{k+1} loglog n_{k+1}) is within `window` of b,
/// and runs at sigma_hi otherwise.
struct BlockTarget {
    double b = 0.0;
    double rho = 1.5;
    double window = 0.05;
};

}  // namespace strategy

class StrategyRunner;

/// Descriptor of a volatility-selection rule. Text form:
///   const:S | periodic:S1/S2/... | feedback:TARGET/GAIN | random:SEED |
///   block_target:B/RHO
class AdversaryStrategy {
public:
    using Kind = std::variant<strategy::Constant, strategy::Periodic, strategy::Feedback,
                              strategy::Random, strategy::BlockTarget>;

    template <class Rule>
        requires std::constructible_from<Kind, Rule>
    AdversaryStrategy(Rule rule) : kind_(std::move(rule))  // NOLINT(google-explicit-constructor)
    {
    }

    static AdversaryStrategy parse(std::string_view text);
    static AdversaryStrategy from_json(const nlohmann::json& j);

    const Kind& kind() const noexcept { return kind_; }
    std::string label() const;
    nlohmann::json to_json() const;

    /// Fresh per-path state. `path` selects the stream of randomized kinds.
    std::unique_ptr<StrategyRunner> start(const VolatilityBand& band, std::uint64_t path = 0) const;

private:
    Kind kind_;
};

class StrategyRunner {
public:
    virtual ~StrategyRunner() = default;

    /// Volatility for increment view.step + 1; throws StrategyViolation if the
    /// rule leaves the band.
    double next(const PathView& view);

protected:
    explicit StrategyRunner(const VolatilityBand& band) : band_(band) {}
    virtual double choose(const PathView& view) = 0;
    const VolatilityBand& band() const noexcept { return band_; }

private:
    VolatilityBand band_;
};

std::vector<AdversaryStrategy> parse_strategy_list(std::string_view text);

/// `count` randomized adapted strategies (cycling through constant, periodic,
/// feedback and random kinds) with interior parameters drawn from `seed`.
std::vector<AdversaryStrategy> random_strategies(std::size_t count, const VolatilityBand& band,
                                                 std::uint64_t seed);

}  // namespace glil
