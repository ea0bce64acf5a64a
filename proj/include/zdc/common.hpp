#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace zdc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// markov_source
struct NonStochasticRow : Error { using Error::Error; };
struct Reducible : Error { using Error::Error; };
struct Periodic : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct InvalidCorrelation : Error { using Error::Error; };

// belief
struct ZeroMassBin : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// simplex / quantizer space
struct Overflow : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct ModeMismatch : Error { using Error::Error; };
struct SymbolOutOfRange : Error { using Error::Error; };

// qlearning / evaluation
struct EmptyTable : Error { using Error::Error; };
struct ConfigMismatch : Error { using Error::Error; };
struct PolicyConfigMismatch : Error { using Error::Error; };
struct NonPositiveInput : Error { using Error::Error; };

// baselines
struct InsufficientSupport : Error { using Error::Error; };

// persistence / cli
struct IoError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct ConfigParse : Error { using Error::Error; };
struct MissingMethod : Error { using Error::Error; };

/// Deterministic RNG wrapper. All randomness in the library flows through
/// this so that a seed fully determines every output, independent of
/// platform differences in the standard distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Lemire multiply-shift.
    std::uint64_t next_below(std::uint64_t bound) {
        const unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * bound;
        return static_cast<std::uint64_t>(m >> 64);
    }

    std::uint64_t next_raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace zdc
