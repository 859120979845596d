// Shared basic types: generator words, spin letters, error taxonomy and a
// deterministic random source used everywhere randomness appears.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace soficspin {

// A spin letter is an index into the model alphabet.
using Letter = std::uint8_t;

// A generator word over a group with r generators. Letter codes:
//   k in [0, r)    : generator s_{k+1}
//   k in [r, 2r)   : inverse   s_{k-r+1}^{-1}
// A word w = l_1 l_2 ... l_k denotes the product l_1 * l_2 * ... * l_k.
using Word = std::vector<int>;

inline int inverse_letter(int letter, int r) {
  return letter < r ? letter + r : letter - r;
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// A dense-state or pattern-space size exceeded its configured cap.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The normal-form procedure for a finitely presented group did not
// terminate within its rewriting budget ("undecidable at budget").
struct UndecidableAtBudget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RadiusMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoGoodVertices : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical routine could not certify its result (LP verification, RK step
// producing negative mass, and so on). Never silently downgraded.
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

// Thin wrapper over std::mt19937_64 with hand-rolled distributions.
// std::uniform_int_distribution / std::shuffle are implementation-defined,
// so sampling is done directly from the engine to keep outputs bit-exact
// across platforms for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in (0, 1]; safe as the argument of log().
  double next_unit_positive() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform integer in [0, k), rejection-sampled, k >= 1.
  std::uint64_t below(std::uint64_t k) {
    if (k <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % k;
  }

  double exponential(double rate) { return -std::log(next_unit_positive()) / rate; }

  // Index sampled proportionally to nonnegative weights w[0..k).
  int categorical(const double* w, int k, double wsum) {
    double u = next_unit() * wsum;
    for (int i = 0; i < k - 1; ++i) {
      u -= w[i];
      if (u < 0) return i;
    }
    return k - 1;
  }

  // Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

 private:
  std::mt19937_64 eng_;
};

// FNV-1a, used to stamp outputs with a hash of their configuration.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

}  // namespace soficspin
