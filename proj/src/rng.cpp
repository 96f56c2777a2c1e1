#include "mccr/rng.hpp"

#include <cmath>

namespace mccr {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngState RngState::child(std::uint64_t index) const {
  return {seed, splitmix64(stream ^ splitmix64(index + 0x632be59bd9b4e019ULL))};
}

Rng::Rng(const RngState& state)
    : engine_(splitmix64(state.seed) ^ splitmix64(~state.stream)) {}

double Rng::uniform() {
  constexpr double kTwoPowMinus53 = 0x1.0p-53;
  return (static_cast<double>(engine_() >> 11) + 0.5) * kTwoPowMinus53;
}

double Rng::exponential() { return -std::log(uniform()); }

}  // namespace mccr
