#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace delaystab::detail {

// Thrown when a contour/root computation cannot reach its tolerance.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// --- adaptive Gauss-Kronrod 7/15 quadrature -------------------------------

double gk15(const std::function<double(double)>& f, double a, double b, double* err_out = nullptr);

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, int max_depth = 30);

// --- scalar root helpers ---------------------------------------------------

// Bisection on a bracketing interval [lo, hi] with f(lo)*f(hi) <= 0.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol = 1e-15, int max_iter = 200);

// Newton with bisection fallback inside a bracket.
double newton_bracketed(const std::function<double(double)>& f,
                        const std::function<double(double)>& df,
                        double lo, double hi, double x0,
                        double xtol = 1e-15, int max_iter = 100);

// Complex Newton on F with derivative dF; bumps the multiplicity factor when
// steps contract by ~1/2 (double roots). Returns true on |F| < tol.
bool newton_complex(const std::function<std::complex<double>(std::complex<double>)>& F,
                    const std::function<std::complex<double>(std::complex<double>)>& dF,
                    std::complex<double>& z, double tol, int max_iter = 80);

// --- deterministic RNG ------------------------------------------------------

// mt19937_64 with a fixed, implementation-independent double conversion so
// property tests draw identical cases on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::mt19937_64 eng_;
};

// --- parallel map ------------------------------------------------------------

// Runs fn(i) for i in [0, n) on `jobs` threads (0 = hardware concurrency).
// Exceptions propagate; results must be written by fn into pre-sized storage
// so the output order is deterministic regardless of scheduling.
void parallel_for(int n, const std::function<void(int)>& fn, int jobs = 0);

}  // namespace delaystab::detail
