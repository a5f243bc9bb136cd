#pragma once

// Counter-based seeding. Every random stream is derived from a SeedTuple
// (experiment seed, trial index, role tag) by hashing; there is no shared
// generator state, so trials can run in any order or concurrently.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace got {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct SeedTuple {
    std::uint64_t experiment = 0;
    std::uint64_t trial = 0;
    std::uint64_t role = 0;

    SeedTuple() = default;
    SeedTuple(std::uint64_t experiment_seed, std::uint64_t trial_index, std::string_view role_tag)
        : experiment(experiment_seed), trial(trial_index), role(fnv1a64(role_tag)) {}
    SeedTuple(std::uint64_t experiment_seed, std::uint64_t trial_index, std::uint64_t role_key)
        : experiment(experiment_seed), trial(trial_index), role(role_key) {}

    /// Same experiment and trial, different role.
    SeedTuple with_role(std::string_view role_tag) const {
        return {experiment, trial, fnv1a64(role_tag)};
    }
    /// Mixes an extra word into the role, e.g. a sigma value or a grid index.
    SeedTuple mixed(std::uint64_t word) const {
        return {experiment, trial, splitmix64(role ^ splitmix64(word + 0x632be59bd9b4e019ULL))};
    }

    std::uint64_t key() const noexcept {
        std::uint64_t h = splitmix64(experiment);
        h = splitmix64(h ^ trial);
        return splitmix64(h ^ role);
    }
};

/// xoshiro256** seeded from a SeedTuple key. Distribution code is local so
/// draws are identical across standard library implementations.
class Rng {
public:
    explicit Rng(const SeedTuple& seed) : Rng(seed.key()) {}
    explicit Rng(std::uint64_t key) {
        std::uint64_t x = key;
        for (auto& s : state_) {
            x = splitmix64(x);
            s = x;
        }
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform integer in [0, n) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal by Box-Muller.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace got
