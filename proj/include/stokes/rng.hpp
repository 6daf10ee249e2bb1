#ifndef STOKES_RNG_HPP
#define STOKES_RNG_HPP

#include <cstdint>
#include <cmath>

namespace stokes {

// Counter-based generator: splitmix64 finalizer applied to (key + counter).
// Every draw is a pure function of (seed, stream ids, counter), so traces are
// bit-identical across platforms and independent of generation order.
class CounterRng {
public:
    static constexpr const char* kAlgorithm = "splitmix64-ctr/box-muller";

    CounterRng(std::uint64_t seed, std::uint64_t stream_a,
               std::uint64_t stream_b = 0, std::uint64_t stream_c = 0)
        : key_(derive_key(seed, stream_a, stream_b, stream_c)) {}

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // uniform in (0, 1]
    double uniform() {
        std::uint64_t bits = mix(key_ + counter_++);
        return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // zero-mean, unit-variance uniform variate (test-only non-Gaussian mode)
    double uniform_unit_variance() {
        return (uniform() - 0.5) * std::sqrt(12.0);
    }

private:
    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b, std::uint64_t c) {
        std::uint64_t k = mix(seed);
        k = mix(k ^ mix(a + 0x1ULL));
        k = mix(k ^ mix(b + 0x2ULL));
        k = mix(k ^ mix(c + 0x3ULL));
        return k;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace stokes

#endif
