#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace regcal {

/// Identifies which generator consumes a stream, so that e.g. the Brownian
/// and fBm samplers never share random numbers for the same path index.
enum class GeneratorId : std::uint64_t {
  brownian = 1,
  fractional = 2,
  euler = 3,
  volterra_kernel = 4,
  volterra_driver = 5,
  jitter = 6,
  time_change_clock = 7,
};

/// A (master seed, path index, generator) triple. Each triple maps to an
/// independent engine, so paths can be produced in any order or in parallel
/// and ensembles extended without touching earlier members.
struct Stream {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;

  Stream child(std::uint64_t sub) const noexcept {
    return Stream{seed ^ (0x9e3779b97f4a7c15ULL * (sub + 1)), index};
  }
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

using Engine = std::mt19937_64;

inline Engine make_engine(Stream s, GeneratorId gen) {
  std::uint64_t h = detail::splitmix64(s.seed);
  h = detail::splitmix64(h ^ s.index);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(gen));
  return Engine(h);
}

/// Seeded collection of independent realizations. Member i is always built
/// from Stream{master_seed, i}.
template <class Member>
struct Ensemble {
  std::uint64_t master_seed = 0;
  std::vector<Member> members;

  std::size_t size() const noexcept { return members.size(); }
  const Member& operator[](std::size_t i) const { return members[i]; }
  auto begin() const { return members.begin(); }
  auto end() const { return members.end(); }
};

template <class Factory>
auto make_ensemble(std::uint64_t master_seed, std::size_t count, Factory&& make)
    -> Ensemble<decltype(make(Stream{}))> {
  if (count == 0) throw std::invalid_argument("ensemble needs at least one member");
  Ensemble<decltype(make(Stream{}))> out;
  out.master_seed = master_seed;
  out.members.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.members.push_back(make(Stream{master_seed, i}));
  }
  return out;
}

}  // namespace regcal
