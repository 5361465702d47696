#pragma once

#include <cstdint>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zrp {

// Configuration / input problems: CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures (no convergence, caps exceeded): CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline double sq(double x) { return x * x; }

// log(sum(exp(v))) with the usual max shift; -inf for an empty sum.
double log_sum_exp(std::span<const double> v);

// Binomial coefficient as double via lgamma; exact to ~1e15.
double binomial(long n, long k);

// Exact binomial for the rank/unrank bijections; throws on overflow.
std::uint64_t binomial_u64(long n, long k);

// splitmix64 step; used to derive independent per-stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// Deterministic RNG wrapper; every stochastic routine takes an explicit seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed == 0 ? 0x853c49e6748fea9bULL : seed) {}

    double uniform() {  // (0,1)
        return (static_cast<double>(gen_()) + 0.5) * 0x1.0p-64;
    }
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    double normal() {
        std::normal_distribution<double> d;
        return d(gen_);
    }
    std::uint64_t next_u64() { return gen_(); }
    // index in [0, n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  private:
    std::mt19937_64 gen_;
};

// Runs fn(i) for i in [0, n), split across ZRP_THREADS workers (default: all
// cores, capped at 16). Results must be written to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace zrp
