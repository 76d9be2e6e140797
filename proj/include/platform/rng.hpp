#pragma once
#include <array>
#include <cstdint>

namespace platform {

/*
 * Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 * A block is a pure function of (key, counter), so any stream position can be
 * reached without touching shared state.
 */
class Philox4x32 {
public:
    using block_t = std::array<std::uint32_t, 4>;
    using key_t = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    block_t operator()(block_t counter) const noexcept;

private:
    key_t key_;
};

/*
 * Stream of standard normals for one cell of one replication. The cell is
 * identified by (replication, stream id, period); draws are indexed so the
 * k-th normal is the same no matter how many were requested before it.
 */
class NormalStream {
public:
    NormalStream(const Philox4x32& gen, std::uint64_t replication, std::uint32_t stream_id,
                 std::uint32_t period) noexcept;

    double next() noexcept;

private:
    const Philox4x32* gen_;
    Philox4x32::block_t counter_;
    double cached_[2];
    int available_ = 0;
};

/* Uniform in (0, 1) built from two 32-bit words (52 bits of resolution). */
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept
{
    // 52 bits keep (bits + 0.5) exactly representable, so 1.0 is never returned.
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 20) ^ (lo >> 12);
    return (static_cast<double>(bits & ((1ULL << 52) - 1)) + 0.5) * 0x1.0p-52;
}

}  // namespace platform
