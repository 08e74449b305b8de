#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace fic {

// All randomness in the engine flows from one root seed.  Streams are derived
// with a SplitMix64 hash chain, so (root, stream, index) -> engine seed is a
// pure function and batch work can be farmed out by index without any shared
// generator state.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
    SplitMix64 mix(root);
    std::uint64_t a = mix.next();
    SplitMix64 mix2(a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
    std::uint64_t b = mix2.next();
    SplitMix64 mix3(b ^ (index * 0xda942042e4dd58b5ULL + 0x9fb21c651e98df25ULL));
    return mix3.next();
}

// Stream tags for the different consumers of randomness.  Kept in one place so
// two commands never collide on the same derived stream by accident.
namespace stream {
constexpr std::uint64_t simulate = 1;
constexpr std::uint64_t valuation = 2;
constexpr std::uint64_t probes = 3;
constexpr std::uint64_t compare_upper = 4;
constexpr std::uint64_t compare_lower = 5;
constexpr std::uint64_t scenario = 6;
}  // namespace stream

// mt19937_64 with explicit distribution code on top.  The standard engine has
// a pinned output sequence; the std:: distributions do not, so uniform, normal
// and Poisson draws are mapped by hand to keep runs bit-reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform on (0, 1); never returns 0 so logs are safe
    double uniform() {
        const std::uint64_t x = eng_() >> 11;  // 53 bits
        return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // inversion by sequential search; fine for the small step intensities used here
    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("poisson: negative mean");
        if (mean == 0.0) return 0;
        if (mean > 80.0) throw std::invalid_argument("poisson: per-step mean too large");
        const double u = uniform();
        double p = std::exp(-mean);
        double cum = p;
        std::uint64_t k = 0;
        while (u > cum && k < 4000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

    // index into an unnormalised weight vector
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("categorical: negative weight");
            total += w;
        }
        if (total <= 0.0) throw std::invalid_argument("categorical: zero total weight");
        const double u = uniform() * total;
        double cum = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            cum += weights[i];
            if (u <= cum) return i;
        }
        return weights.size() - 1;
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fic
