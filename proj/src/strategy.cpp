#include "glil/strategy.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <random>

#include "glil/error.hpp"
#include "glil/rng.hpp"

namespace glil {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<double> split_numbers(std::string_view text, char sep, std::string_view what)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(sep, start), text.size());
        const std::string piece(text.substr(start, end - start));
        try {
            std::size_t used = 0;
            out.push_back(std::stod(piece, &used));
            if (used != piece.size()) throw InputError("");
        } catch (const std::exception&) {
            throw InputError("bad number '" + piece + "' in strategy " + std::string(what));
        }
        start = end + 1;
    }
    return out;
}

/// Shortest text that reads back to the same double.
std::string number(double x)
{
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), x);
    return std::string(buffer.data(), result.ptr);
}

double lil_normalizer(double n) { return std::sqrt(2.0 * n * std::log(std::log(n))); }

class ConstantRunner final : public StrategyRunner {
public:
    ConstantRunner(const VolatilityBand& band, double sigma) : StrategyRunner(band), sigma_(sigma) {}

private:
    double choose(const PathView&) override { return sigma_; }
    double sigma_;
};

class PeriodicRunner final : public StrategyRunner {
public:
    PeriodicRunner(const VolatilityBand& band, std::vector<double> schedule)
        : StrategyRunner(band), schedule_(std::move(schedule))
    {
    }

private:
    double choose(const PathView& view) override { return schedule_[view.step % schedule_.size()]; }
    std::vector<double> schedule_;
};

class FeedbackRunner final : public StrategyRunner {
public:
    FeedbackRunner(const VolatilityBand& band, strategy::Feedback rule)
        : StrategyRunner(band), rule_(rule)
    {
    }

private:
    double choose(const PathView& view) override
    {
        const double distance = std::abs(view.stat - rule_.target);
        const double w = 1.0 - std::exp(-rule_.gain * distance);
        return std::min(band().hi(), band().lo() + (band().hi() - band().lo()) * w);
    }
    strategy::Feedback rule_;
};

class RandomRunner final : public StrategyRunner {
public:
    RandomRunner(const VolatilityBand& band, std::uint64_t seed, std::uint64_t path)
        : StrategyRunner(band), engine_(make_engine(seed, path)), uniform_(band.lo(), band.hi())
    {
    }

private:
    double choose(const PathView&) override
    {
        return band().degenerate() ? band().lo() : std::min(band().hi(), uniform_(engine_));
    }
    Engine engine_;
    std::uniform_real_distribution<double> uniform_;
};

class BlockTargetRunner final : public StrategyRunner {
public:
    BlockTargetRunner(const VolatilityBand& band, strategy::BlockTarget rule)
        : StrategyRunner(band), rule_(rule)
    {
    }

private:
    double choose(const PathView& view) override
    {
        if (view.step < start_) return band().hi();
        while (view.step >= end_) {
            start_ = end_;
            start_sum_ = view.sum;
            end_ = std::max(end_ + 1, static_cast<std::size_t>(std::ceil(rule_.rho * double(end_))));
        }
        if (view.step == start_) start_sum_ = view.sum;
        const double increment = (view.sum - start_sum_) / lil_normalizer(static_cast<double>(end_));
        return std::abs(increment - rule_.b) <= rule_.window ? band().lo() : band().hi();
    }
    strategy::BlockTarget rule_;
    std::size_t start_ = 3;
    std::size_t end_ = 3;
    double start_sum_ = 0.0;
};

}  // namespace

double StrategyRunner::next(const PathView& view)
{
    const double theta = choose(view);
    if (!band_.contains(theta)) {
        throw StrategyViolation("strategy chose volatility " + number(theta) + " outside [" +
                                number(band_.lo()) + ", " + number(band_.hi()) + "]");
    }
    return theta;
}

AdversaryStrategy AdversaryStrategy::parse(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw InputError("strategy '" + std::string(text) + "' must look like kind:params");
    }
    const std::string_view kind = text.substr(0, colon);
    const std::string_view params = text.substr(colon + 1);
    if (kind == "const" || kind == "constant") {
        const auto v = split_numbers(params, '/', kind);
        if (v.size() != 1) throw InputError("const strategy takes one volatility");
        return strategy::Constant{v[0]};
    }
    if (kind == "periodic") {
        return strategy::Periodic{split_numbers(params, '/', kind)};
    }
    if (kind == "feedback") {
        const auto v = split_numbers(params, '/', kind);
        if (v.size() != 2 || !(v[1] >= 0.0)) throw InputError("feedback strategy takes target/gain>=0");
        return strategy::Feedback{v[0], v[1]};
    }
    if (kind == "random") {
        const std::string digits(params);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
            throw InputError("random strategy takes one unsigned integer seed");
        }
        try {
            return strategy::Random{std::stoull(digits)};
        } catch (const std::exception&) {
            throw InputError("random strategy seed '" + digits + "' out of range");
        }
    }
    if (kind == "block_target") {
        const auto v = split_numbers(params, '/', kind);
        if (v.empty() || v.size() > 2) throw InputError("block_target strategy takes b[/rho]");
        strategy::BlockTarget rule{.b = v[0]};
        if (v.size() == 2) rule.rho = v[1];
        if (!(rule.rho > 1.0)) throw InputError("block_target growth rho must exceed 1");
        return rule;
    }
    throw InputError("unknown strategy kind '" + std::string(kind) + "'");
}

AdversaryStrategy AdversaryStrategy::from_json(const nlohmann::json& j)
{
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "constant") return strategy::Constant{j.at("sigma").get<double>()};
        if (kind == "periodic") return strategy::Periodic{j.at("schedule").get<std::vector<double>>()};
        if (kind == "feedback") {
            return strategy::Feedback{j.at("target").get<double>(), j.value("gain", 1.0)};
        }
        if (kind == "random") return strategy::Random{j.at("seed").get<std::uint64_t>()};
        if (kind == "block_target") {
            return strategy::BlockTarget{j.at("b").get<double>(), j.value("rho", 1.5),
                                         j.value("window", 0.05)};
        }
        throw InputError("unknown strategy kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed strategy JSON: ") + e.what());
    }
}

std::string AdversaryStrategy::label() const
{
    return std::visit(
        Overloaded{
            [](const strategy::Constant& s) { return "const:" + number(s.sigma); },
            [](const strategy::Periodic& s) {
                std::string out = "periodic:";
                for (std::size_t i = 0; i < s.schedule.size(); ++i) {
                    out += (i ? "/" : "") + number(s.schedule[i]);
                }
                return out;
            },
            [](const strategy::Feedback& s) {
                return "feedback:" + number(s.target) + "/" + number(s.gain);
            },
            [](const strategy::Random& s) { return "random:" + std::to_string(s.seed); },
            [](const strategy::BlockTarget& s) {
                return "block_target:" + number(s.b) + "/" + number(s.rho);
            },
        },
        kind_);
}

nlohmann::json AdversaryStrategy::to_json() const
{
    return std::visit(
        Overloaded{
            [](const strategy::Constant& s) -> nlohmann::json {
                return {{"kind", "constant"}, {"sigma", s.sigma}};
            },
            [](const strategy::Periodic& s) -> nlohmann::json {
                return {{"kind", "periodic"}, {"schedule", s.schedule}};
            },
            [](const strategy::Feedback& s) -> nlohmann::json {
                return {{"kind", "feedback"}, {"target", s.target}, {"gain", s.gain}};
            },
            [](const strategy::Random& s) -> nlohmann::json {
                return {{"kind", "random"}, {"seed", s.seed}};
            },
            [](const strategy::BlockTarget& s) -> nlohmann::json {
                return {{"kind", "block_target"}, {"b", s.b}, {"rho", s.rho}, {"window", s.window}};
            },
        },
        kind_);
}

std::unique_ptr<StrategyRunner> AdversaryStrategy::start(const VolatilityBand& band,
                                                         std::uint64_t path) const
{
    return std::visit(
        Overloaded{
            [&](const strategy::Constant& s) -> std::unique_ptr<StrategyRunner> {
                return std::make_unique<ConstantRunner>(band, s.sigma);
            },
            [&](const strategy::Periodic& s) -> std::unique_ptr<StrategyRunner> {
                if (s.schedule.empty()) throw InputError("periodic strategy has an empty schedule");
                return std::make_unique<PeriodicRunner>(band, s.schedule);
            },
            [&](const strategy::Feedback& s) -> std::unique_ptr<StrategyRunner> {
                return std::make_unique<FeedbackRunner>(band, s);
            },
            [&](const strategy::Random& s) -> std::unique_ptr<StrategyRunner> {
                return std::make_unique<RandomRunner>(band, s.seed, path);
            },
            [&](const strategy::BlockTarget& s) -> std::unique_ptr<StrategyRunner> {
                return std::make_unique<BlockTargetRunner>(band, s);
            },
        },
        kind_);
}

std::vector<AdversaryStrategy> parse_strategy_list(std::string_view text)
{
    std::vector<AdversaryStrategy> out;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        if (end > start) out.push_back(AdversaryStrategy::parse(text.substr(start, end - start)));
        start = end + 1;
    }
    if (out.empty()) throw InputError("empty strategy list");
    return out;
}

std::vector<AdversaryStrategy> random_strategies(std::size_t count, const VolatilityBand& band,
                                                 std::uint64_t seed)
{
    Engine engine = make_engine(seed, 0xad7e25a11ULL);
    std::uniform_real_distribution<double> sigma(band.lo(), band.hi());
    std::uniform_real_distribution<double> target(-1.0, 1.0);
    std::uniform_real_distribution<double> gain(0.5, 5.0);
    std::uniform_int_distribution<int> period(1, 5);

    std::vector<AdversaryStrategy> out;
    for (std::size_t i = 0; i < count; ++i) {
        switch (i % 4) {
        case 0: out.emplace_back(strategy::Random{engine()}); break;
        case 1: out.emplace_back(strategy::Feedback{target(engine), gain(engine)}); break;
        case 2: {
            std::vector<double> schedule(static_cast<std::size_t>(period(engine)));
            for (double& s : schedule) s = sigma(engine);
            out.emplace_back(strategy::Periodic{std::move(schedule)});
            break;
        }
        default: out.emplace_back(strategy::Constant{sigma(engine)}); break;
        }
    }
    return out;
}

}  // namespace glil
