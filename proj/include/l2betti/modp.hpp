#pragma once

#include <cstdint>
#include <stdexcept>

namespace l2betti {

/// Small prime fields for modular elimination.  Primes stay below 2^26 so the
/// dense elimination kernel can accumulate ~4000 multiply-adds in a uint64
/// before reducing.
inline constexpr std::uint64_t kEliminationPrimes[4] = {67108859ull, 67108837ull, 67108819ull,
                                                        67108777ull};

struct PrimeField {
  std::uint64_t p;

  explicit PrimeField(std::uint64_t prime) : p(prime) {}

  std::uint64_t from_int64(std::int64_t v) const {
    std::int64_t r = v % static_cast<std::int64_t>(p);
    if (r < 0) r += static_cast<std::int64_t>(p);
    return static_cast<std::uint64_t>(r);
  }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t s = a + b;
    return s >= p ? s - p : s;
  }

  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + p - b; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return (a * b) % p; }

  std::uint64_t pow(std::uint64_t a, std::uint64_t e) const {
    std::uint64_t r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  std::uint64_t inv(std::uint64_t a) const {
    if (a == 0) throw std::domain_error("inverse of zero");
    return pow(a, p - 2);
  }
};

/// The Mersenne prime 2^61 - 1, used by the black-box (Wiedemann) rank path.
struct M61 {
  static constexpr std::uint64_t p = (1ull << 61) - 1;

  /// Full reduction for any 128-bit input; the result is strictly below p.
  static std::uint64_t reduce(unsigned __int128 x) {
    std::uint64_t s = static_cast<std::uint64_t>(x & p) +
                      static_cast<std::uint64_t>((x >> 61) & p) +
                      static_cast<std::uint64_t>(x >> 122);
    s = (s & p) + (s >> 61);
    if (s >= p) s -= p;
    return s;
  }

  static std::uint64_t from_int64(std::int64_t v) {
    std::int64_t r = v % static_cast<std::int64_t>(p);
    if (r < 0) r += static_cast<std::int64_t>(p);
    return static_cast<std::uint64_t>(r);
  }

  static std::uint64_t add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    return s >= p ? s - p : s;
  }

  static std::uint64_t sub(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + p - b; }

  static std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
    return reduce(static_cast<unsigned __int128>(a) * b);
  }

  static std::uint64_t pow(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  static std::uint64_t inv(std::uint64_t a) {
    if (a == 0) throw std::domain_error("inverse of zero");
    return pow(a, p - 2);
  }
};

/// splitmix64: cheap deterministic stream for seeding and random field
/// elements.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform nonzero residue mod p.
  std::uint64_t nonzero_mod(std::uint64_t p) {
    std::uint64_t v;
    do {
      v = next() % p;
    } while (v == 0);
    return v;
  }
};

}  // namespace l2betti
