#include "cpsband/rng.hpp"

namespace cpsband {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed)
    : key_(splitmix64(master_seed + kGamma)) {}

RngStream RngStream::substream(std::uint64_t index) const {
  // Two rounds so that neighbouring (key, index) pairs land far apart.
  const std::uint64_t k = splitmix64(splitmix64(key_ ^ 0x5851f42d4c957f2dULL) +
                                     (index + 1) * kGamma);
  return RngStream(k, 0);
}

RngStream::result_type RngStream::operator()() noexcept {
  ++counter_;
  return splitmix64(key_ + counter_ * kGamma);
}

double RngStream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(*this); }

}  // namespace cpsband
