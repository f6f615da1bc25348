#pragma once

#include <array>
#include <cstdint>

namespace hubtail {

/// Philox4x32-10 counter-based random number generator.
///
/// Stateless block cipher: a 128-bit counter and a 64-bit key map to 128
/// random bits. Streams are addressed, not advanced, so any (seed, purpose,
/// stream) triple yields the same sequence no matter which thread draws it
/// or in what order streams are consumed. This is what makes every Monte
/// Carlo estimate in this library independent of the worker count.
struct philox4x32 {
    using block = std::array<std::uint32_t, 4>;

    static constexpr std::uint32_t mult_a = 0xD2511F53u;
    static constexpr std::uint32_t mult_b = 0xCD9E8D57u;
    static constexpr std::uint32_t weyl_a = 0x9E3779B9u;
    static constexpr std::uint32_t weyl_b = 0xBB67AE85u;

    static block encrypt(block ctr, std::uint32_t k0, std::uint32_t k1) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(mult_a) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(mult_b) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += weyl_a;
            k1 += weyl_b;
        }
        return ctr;
    }
};

/// Purpose tags keep independent estimators decorrelated even when the user
/// reuses one seed across subcommands.
enum class stream_purpose : std::uint32_t {
    generic = 0,
    weights = 1,
    edges = 2,
    exceed = 3,
    planted = 4,
    limit_law = 5,
    remainder_weights = 6,
    simulate = 7,
    remainder_edges = 8,
};

/// One addressed random stream: uniforms indexed by an incrementing block
/// counter within the (seed, purpose, stream id) cell.
class random_stream {
public:
    random_stream(std::uint64_t seed, std::uint64_t stream_id,
                  stream_purpose purpose = stream_purpose::generic)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          stream_lo_(static_cast<std::uint32_t>(stream_id)),
          stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)),
          purpose_(static_cast<std::uint32_t>(purpose)) {}

    std::uint64_t next_u64() {
        if (lane_ >= 4) {
            buffer_ = philox4x32::encrypt({block_, purpose_, stream_lo_, stream_hi_}, key0_, key1_);
            ++block_;
            lane_ = 0;
        }
        const std::uint64_t lo = buffer_[lane_];
        const std::uint64_t hi = buffer_[lane_ + 1];
        lane_ += 2;
        return lo | (hi << 32);
    }

    /// Uniform draw on the half-open-at-zero interval (0, 1]. The upper
    /// endpoint is attainable, which keeps inverse-CDF samplers finite.
    double uniform_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1); used for Bernoulli thresholds.
    double uniform_co() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint32_t key0_, key1_;
    std::uint32_t stream_lo_, stream_hi_, purpose_;
    std::uint32_t block_ = 0;
    philox4x32::block buffer_{};
    int lane_ = 4;
};

} // namespace hubtail
