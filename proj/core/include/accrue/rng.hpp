#ifndef ACCRUE_RNG_HPP_
#define ACCRUE_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace accrue {

// Philox-4x32-10 counter-based generator.  Streams are addressed by
// (seed, stream, substream): any unit of Monte Carlo work can derive its own
// independent stream, so results do not depend on scheduling or thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0,
                     std::uint64_t substream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)) {
    std::uint64_t sid = mix64(stream + 0x9E3779B97F4A7C15ULL) ^
                        mix64(substream + 0xBF58476D1CE4E5B9ULL);
    c2_ = static_cast<std::uint32_t>(sid);
    c3_ = static_cast<std::uint32_t>(sid >> 32);
  }

  std::uint32_t next_u32() {
    if (idx_ == 4) {
      block();
      idx_ = 0;
    }
    return out_[idx_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // uniform on [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on (0, 1); never returns an endpoint
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // uniform integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    // Lemire's multiply-shift with rejection of the biased region
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  double exponential(double rate = 1.0) {
    return -std::log1p(-uniform()) / rate;
  }

  // Marsaglia-Tsang; shape/rate parametrisation, mean = shape/rate
  double gamma(double shape, double rate = 1.0) {
    if (shape < 1.0) {
      double u = uniform_pos();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

  double chi_squared(double df) { return gamma(0.5 * df, 0.5); }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  double weibull(double scale, double shape) {
    return scale * std::pow(exponential(), 1.0 / shape);
  }

  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) {
      // Knuth product method
      double limit = std::exp(-mean);
      double prod = uniform();
      long n = 0;
      while (prod > limit) {
        prod *= uniform();
        ++n;
      }
      return n;
    }
    return poisson_ptrs(mean);
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi,
                      std::uint32_t* lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    *hi = static_cast<std::uint32_t>(p >> 32);
    *lo = static_cast<std::uint32_t>(p);
  }

  void block() {
    std::uint32_t x0 = c0_, x1 = c1_, x2 = c2_, x3 = c3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, x0, &hi0, &lo0);
      mulhilo(0xCD9E8D57u, x2, &hi1, &lo1);
      std::uint32_t y0 = hi1 ^ x1 ^ k0;
      std::uint32_t y1 = lo1;
      std::uint32_t y2 = hi0 ^ x3 ^ k1;
      std::uint32_t y3 = lo0;
      x0 = y0;
      x1 = y1;
      x2 = y2;
      x3 = y3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = x0;
    out_[1] = x1;
    out_[2] = x2;
    out_[3] = x3;
    if (++c0_ == 0) ++c1_;
  }

  // Hoermann's PTRS transformed-rejection sampler for large means
  long poisson_ptrs(double mean) {
    double slam = std::sqrt(mean);
    double loglam = std::log(mean);
    double b = 0.931 + 2.53 * slam;
    double a = -0.059 + 0.02483 * b;
    double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = uniform() - 0.5;
      double v = uniform_pos();
      double us = 0.5 - std::fabs(u);
      double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<long>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          k * loglam - mean - std::lgamma(k + 1.0))
        return static_cast<long>(k);
    }
  }

  std::uint32_t key0_, key1_;
  std::uint32_t c0_ = 0, c1_ = 0, c2_ = 0, c3_ = 0;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int idx_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace accrue

#endif  // ACCRUE_RNG_HPP_
