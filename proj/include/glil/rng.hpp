#pragma once

#include <cstdint>
#include <random>

namespace glil {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; a bijective mixer on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for stream `index` under `master`. Streams are independent of the
/// order in which they are created, so parallel evaluation is reproducible.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(std::uint64_t master, std::uint64_t index)
{
    return Engine{derive_seed(master, index)};
}

/// Fair +-1 signs drawn 64 at a time from an engine.
class RademacherSource {
public:
    explicit RademacherSource(Engine& engine) noexcept : engine_(&engine) {}

    double next()
    {
        if (remaining_ == 0) {
            bits_ = (*engine_)();
            remaining_ = 64;
        }
        const double sign = (bits_ & 1U) ? 1.0 : -1.0;
        bits_ >>= 1;
        --remaining_;
        return sign;
    }

private:
    Engine* engine_;
    std::uint64_t bits_ = 0;
    int remaining_ = 0;
};

}  // namespace glil
