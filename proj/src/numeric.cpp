#include "delaystab/detail/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>

namespace delaystab::detail {

namespace {

// Kronrod-15 nodes/weights on [-1,1] (positive half; node 0 listed once) and
// the embedded Gauss-7 weights.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

}  // namespace

double gk15(const std::function<double(double)>& f, double a, double b, double* err_out) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kXgk[i]);
        fv[14 - i] = f(c + h * kXgk[i]);
    }
    fv[7] = f(c);
    double res_k = 0.0, res_g = 0.0;
    for (int i = 0; i < 7; ++i) res_k += kWgk[i] * (fv[i] + fv[14 - i]);
    res_k += kWgk[7] * fv[7];
    for (int i = 0; i < 3; ++i) res_g += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    res_g += kWg[3] * fv[7];
    if (err_out) *err_out = std::abs(h) * std::abs(res_k - res_g);
    return h * res_k;
}

namespace {

double integrate_rec(const std::function<double(double)>& f, double a, double b,
                     double tol, int depth, int max_depth) {
    double err = 0.0;
    const double v = gk15(f, a, b, &err);
    if (err <= tol || depth >= max_depth) return v;
    const double c = 0.5 * (a + b);
    return integrate_rec(f, a, c, 0.5 * tol, depth + 1, max_depth) +
           integrate_rec(f, c, b, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    return integrate_rec(f, a, b, abs_tol, 0, max_depth);
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("bisect: endpoints do not bracket a root");
    for (int i = 0; i < max_iter && hi - lo > xtol * (1.0 + std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double newton_bracketed(const std::function<double(double)>& f,
                        const std::function<double(double)>& df,
                        double lo, double hi, double x0, double xtol, int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("newton_bracketed: endpoints do not bracket a root");
    double x = std::clamp(x0, lo, hi);
    for (int i = 0; i < max_iter; ++i) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0.0) == (flo > 0.0)) lo = x; else hi = x;
        const double d = df(x);
        double next = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= xtol * (1.0 + std::abs(x))) return next;
        x = next;
    }
    return x;
}

bool newton_complex(const std::function<std::complex<double>(std::complex<double>)>& F,
                    const std::function<std::complex<double>(std::complex<double>)>& dF,
                    std::complex<double>& z, double tol, int max_iter) {
    double mult = 1.0;
    double prev_step = -1.0;
    int half_ratio_hits = 0;
    for (int i = 0; i < max_iter; ++i) {
        const std::complex<double> fz = F(z);
        if (std::abs(fz) < tol) return true;
        const std::complex<double> d = dF(z);
        if (std::abs(d) == 0.0) return false;
        const std::complex<double> step = mult * fz / d;
        const double slen = std::abs(step);
        // A simple root contracts steps quadratically; a double root contracts
        // them by 1/2 per iteration. Detect the latter and compensate.
        if (mult == 1.0 && prev_step > 0.0 && slen > 1e-14) {
            const double ratio = slen / prev_step;
            if (ratio > 0.42 && ratio < 0.58) {
                if (++half_ratio_hits >= 2) mult = 2.0;
            } else {
                half_ratio_hits = 0;
            }
        }
        prev_step = slen;
        z -= step;
    }
    return std::abs(F(z)) < tol;
}

void parallel_for(int n, const std::function<void(int)>& fn, int jobs) {
    if (n <= 0) return;
    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 4;
    workers = std::min(workers, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace delaystab::detail
