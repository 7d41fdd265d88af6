#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace expertprompt {

/// Deterministic RNG with an unbiased bounded draw. mt19937_64 output is
/// fixed by the standard and the rejection step avoids modulo bias, so
/// sequences are identical across platforms and library versions.
class SeededRng {
  public:
    explicit SeededRng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    /// Uniform draw from [0, n). n must be nonzero.
    uint64_t bounded(uint64_t n) {
        if (n == 0) {
            throw std::logic_error("bounded draw from empty range");
        }
        const uint64_t min = (0 - n) % n;
        for (;;) {
            uint64_t x = gen_();
            if (x >= min) {
                return x % n;
            }
        }
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace expertprompt
