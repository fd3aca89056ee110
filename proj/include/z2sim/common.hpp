#ifndef Z2SIM_COMMON_HPP
#define Z2SIM_COMMON_HPP

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace z2sim {

using cplx = std::complex<double>;

// A configuration file or run request is malformed.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A request exceeds the capacity of the chosen engine.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterative solver failed to reach its tolerance.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical consistency check failed (non-Hermitian operator, corrupted state, ...).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Number of worker threads used by parallel_for.  The partitioning into
// blocks is fixed, so results are bitwise independent of this setting.
inline int& worker_threads() {
    static int n = 1;
    return n;
}

// Work is always split into a fixed number of blocks; threads pull whole
// blocks.  Reductions that keep one partial per block and combine the
// partials in block order are bitwise independent of the thread count.
inline constexpr std::size_t kParallelBlocks = 64;

namespace detail {
template <typename Fn>
void run_blocks(std::size_t count, Fn&& fn) {
    const std::size_t blocks = std::min<std::size_t>(kParallelBlocks, count);
    const std::size_t per = (count + blocks - 1) / blocks;
    const int threads = worker_threads();
    if (threads <= 1 || count < (std::size_t{1} << 15)) {
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t lo = b * per;
            const std::size_t hi = std::min(count, lo + per);
            if (lo < hi) fn(lo, hi, b);
        }
        return;
    }
    std::atomic<std::size_t> counter{0};
    const int nthreads = static_cast<int>(std::min<std::size_t>(threads, blocks));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = counter.fetch_add(1);
                if (b >= blocks) break;
                const std::size_t lo = b * per;
                const std::size_t hi = std::min(count, lo + per);
                if (lo < hi) fn(lo, hi, b);
            }
        });
    }
    for (auto& th : pool) th.join();
}
}  // namespace detail

// fn(begin, end, block_index) over [0, count)
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    if (count == 0) return;
    detail::run_blocks(count, fn);
}

// Deterministic reduction: Σ body(i) over [0, count).
template <typename Fn>
double parallel_sum(std::size_t count, Fn&& body) {
    if (count == 0) return 0.0;
    double partial[kParallelBlocks] = {0.0};
    detail::run_blocks(count, [&](std::size_t lo, std::size_t hi, std::size_t b) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += body(i);
        partial[b] = acc;
    });
    double total = 0.0;
    for (std::size_t b = 0; b < kParallelBlocks; ++b) total += partial[b];
    return total;
}

// Small deterministic PRNG (splitmix64 core) with a portable Gaussian.
// std::normal_distribution output is implementation-defined, so random test
// states would differ across standard libraries; this does not.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * M_PI * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    cplx next_cgaussian() { return {next_gaussian(), next_gaussian()}; }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline int popcount64(std::uint64_t v) { return __builtin_popcountll(v); }
inline int parity64(std::uint64_t v) { return __builtin_parityll(v); }

}  // namespace z2sim

#endif
