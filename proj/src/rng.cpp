#include <platform/rng.hpp>

#include <cmath>
#include <numbers>

namespace platform {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::block_t Philox4x32::operator()(block_t ctr) const noexcept
{
    key_t key = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

NormalStream::NormalStream(const Philox4x32& gen, std::uint64_t replication,
                           std::uint32_t stream_id, std::uint32_t period) noexcept
    : gen_(&gen),
      counter_{0, (stream_id << 16) | (period & 0xFFFF), static_cast<std::uint32_t>(replication),
               static_cast<std::uint32_t>(replication >> 32)},
      cached_{0.0, 0.0}
{
}

double NormalStream::next() noexcept
{
    if (available_ == 0) {
        // Box-Muller on one block gives two independent normals.
        const auto block = (*gen_)(counter_);
        ++counter_[0];
        const double u1 = to_open_unit(block[0], block[1]);
        const double u2 = to_open_unit(block[2], block[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        cached_[0] = r * std::cos(theta);
        cached_[1] = r * std::sin(theta);
        available_ = 2;
    }
    return cached_[2 - available_--];
}

}  // namespace platform
