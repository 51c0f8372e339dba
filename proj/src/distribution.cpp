#include "delaystab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "delaystab/detail/numeric.hpp"

namespace delaystab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite_nonneg(double x, const char* what) {
    if (!std::isfinite(x) || x < 0.0)
        throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
}

// sinh(z)/z with a series for small |z|.
std::complex<double> sinch(std::complex<double> z) {
    if (std::abs(z) < 1e-2) {
        const std::complex<double> z2 = z * z;
        return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
    }
    return std::sinh(z) / z;
}

// d/dz [sinh(z)/z] = cosh(z)/z - sinh(z)/z^2.
std::complex<double> sinch_prime(std::complex<double> z) {
    if (std::abs(z) < 1e-2) {
        const std::complex<double> z2 = z * z;
        return z / 3.0 * (1.0 + z2 / 10.0 * (1.0 + z2 / 28.0));
    }
    return (std::cosh(z) - sinch(z)) / z;
}

// Integer power by squaring; p >= 1.
std::complex<double> ipow(std::complex<double> w, int p) {
    std::complex<double> acc{1.0, 0.0};
    while (p > 0) {
        if (p & 1) acc *= w;
        w *= w;
        p >>= 1;
    }
    return acc;
}

}  // namespace

DelayDistribution::DelayDistribution(Kind kind) : kind_(std::move(kind)) {
    std::visit(
        [](auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) {
                require_finite_nonneg(k.location, "Dirac location");
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                if (k.atoms.empty())
                    throw std::invalid_argument("mixture needs at least one atom");
                double total = 0.0;
                for (const Atom& at : k.atoms) {
                    require_finite_nonneg(at.delay, "atom delay");
                    if (!std::isfinite(at.weight) || at.weight <= 0.0)
                        throw std::invalid_argument("atom weights must be finite and > 0");
                    total += at.weight;
                }
                std::sort(k.atoms.begin(), k.atoms.end(),
                          [](const Atom& x, const Atom& y) { return x.delay < y.delay; });
                // Merge near-coincident atoms, then renormalize.
                std::vector<Atom> merged;
                for (const Atom& at : k.atoms) {
                    if (!merged.empty() &&
                        at.delay - merged.back().delay <=
                            1e-12 * std::max(1.0, at.delay)) {
                        Atom& last = merged.back();
                        const double w = last.weight + at.weight;
                        last.delay = (last.delay * last.weight + at.delay * at.weight) / w;
                        last.weight = w;
                    } else {
                        merged.push_back(at);
                    }
                }
                for (Atom& at : merged) at.weight /= total;
                k.atoms = std::move(merged);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                if (!std::isfinite(k.mean) || k.mean <= 0.0)
                    throw std::invalid_argument("exponential mean must be > 0");
            } else if constexpr (std::is_same_v<T, GammaKernel>) {
                if (k.order < 1 || k.order > 500)
                    throw std::invalid_argument("gamma order must be in [1, 500]");
                if (!std::isfinite(k.mean) || k.mean <= 0.0)
                    throw std::invalid_argument("gamma mean must be > 0");
            } else if constexpr (std::is_same_v<T, Uniform>) {
                require_finite_nonneg(k.lower, "uniform lower");
                if (!std::isfinite(k.upper) || k.upper <= k.lower)
                    throw std::invalid_argument("uniform needs lower < upper");
            }
        },
        kind_);
}

DelayDistribution DelayDistribution::dirac(double location) {
    return DelayDistribution(DiracMass{location});
}
DelayDistribution DelayDistribution::discrete(std::vector<Atom> atoms) {
    return DelayDistribution(DiscreteMixture{std::move(atoms)});
}
DelayDistribution DelayDistribution::exponential(double mean) {
    return DelayDistribution(Exponential{mean});
}
DelayDistribution DelayDistribution::gamma(int order, double mean) {
    return DelayDistribution(GammaKernel{order, mean});
}
DelayDistribution DelayDistribution::uniform(double lower, double upper) {
    return DelayDistribution(Uniform{lower, upper});
}

bool DelayDistribution::is_discrete() const {
    return std::holds_alternative<DiracMass>(kind_) ||
           std::holds_alternative<DiscreteMixture>(kind_);
}

const char* DelayDistribution::kind_name() const {
    return std::visit(
        [](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) return "dirac";
            else if constexpr (std::is_same_v<T, DiscreteMixture>) return "discrete";
            else if constexpr (std::is_same_v<T, Exponential>) return "exponential";
            else if constexpr (std::is_same_v<T, GammaKernel>) return "gamma";
            else return "uniform";
        },
        kind_);
}

double mean(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) {
                return k.location;
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                double m = 0.0;
                for (const Atom& at : k.atoms) m += at.weight * at.delay;
                return m;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return 0.5 * (k.lower + k.upper);
            } else {
                return k.mean;
            }
        },
        dist.kind());
}

double max_delay(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) return k.location;
            else if constexpr (std::is_same_v<T, DiscreteMixture>) return k.atoms.back().delay;
            else if constexpr (std::is_same_v<T, Uniform>) return k.upper;
            else return kInf;
        },
        dist.kind());
}

double min_positive_delay(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) {
                return k.location > 0.0 ? k.location : 0.0;
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                for (const Atom& at : k.atoms)
                    if (at.delay > 0.0) return at.delay;
                return 0.0;
            } else {
                return 0.0;
            }
        },
        dist.kind());
}

double weight_at_zero(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) {
                return k.location == 0.0 ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                double w = 0.0;
                for (const Atom& at : k.atoms)
                    if (at.delay == 0.0) w += at.weight;
                return w;
            } else {
                return 0.0;
            }
        },
        dist.kind());
}

DelayDistribution scale_delays(const DelayDistribution& dist, double factor) {
    if (!std::isfinite(factor) || factor <= 0.0)
        throw std::invalid_argument("scale factor must be finite and > 0");
    return std::visit(
        [&](const auto& k) -> DelayDistribution {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) {
                return DelayDistribution::dirac(k.location * factor);
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                std::vector<Atom> atoms = k.atoms;
                for (Atom& at : atoms) at.delay *= factor;
                return DelayDistribution::discrete(std::move(atoms));
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return DelayDistribution::exponential(k.mean * factor);
            } else if constexpr (std::is_same_v<T, GammaKernel>) {
                return DelayDistribution::gamma(k.order, k.mean * factor);
            } else {
                return DelayDistribution::uniform(k.lower * factor, k.upper * factor);
            }
        },
        dist.kind());
}

DelayDistribution scale_to_mean(const DelayDistribution& dist, double target_mean) {
    if (!std::isfinite(target_mean) || target_mean < 0.0)
        throw std::invalid_argument("target mean must be finite and >= 0");
    if (target_mean == 0.0) return DelayDistribution::dirac(0.0);
    const double m = mean(dist);
    if (m == 0.0)
        throw std::domain_error("cannot rescale a zero-mean distribution to a positive mean");
    return scale_delays(dist, target_mean / m);
}

double convergence_abscissa(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Exponential>) return 1.0 / k.mean;
            else if constexpr (std::is_same_v<T, GammaKernel>) return k.order / k.mean;
            else return kInf;
        },
        dist.kind());
}

namespace detail {

std::complex<double> laplace_continued(const DelayDistribution& dist,
                                       std::complex<double> lambda) {
    return std::visit(
        [&](const auto& k) -> std::complex<double> {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) {
                return std::exp(-lambda * k.location);
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                std::complex<double> acc{0.0, 0.0};
                for (const Atom& at : k.atoms) acc += at.weight * std::exp(-lambda * at.delay);
                return acc;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return 1.0 / (1.0 + lambda * k.mean);
            } else if constexpr (std::is_same_v<T, GammaKernel>) {
                const double beta = k.order / k.mean;
                return ipow(1.0 / (1.0 + lambda / beta), k.order);
            } else {
                const double c = 0.5 * (k.lower + k.upper);
                const double h = 0.5 * (k.upper - k.lower);
                return std::exp(-lambda * c) * sinch(lambda * h);
            }
        },
        dist.kind());
}

std::complex<double> laplace_derivative(const DelayDistribution& dist,
                                        std::complex<double> lambda) {
    return std::visit(
        [&](const auto& k) -> std::complex<double> {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) {
                return -k.location * std::exp(-lambda * k.location);
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                std::complex<double> acc{0.0, 0.0};
                for (const Atom& at : k.atoms)
                    acc -= at.weight * at.delay * std::exp(-lambda * at.delay);
                return acc;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                const std::complex<double> den = 1.0 + lambda * k.mean;
                return -k.mean / (den * den);
            } else if constexpr (std::is_same_v<T, GammaKernel>) {
                const double beta = k.order / k.mean;
                const std::complex<double> w = 1.0 / (1.0 + lambda / beta);
                return -(k.order / beta) * ipow(w, k.order + 1);
            } else {
                const double c = 0.5 * (k.lower + k.upper);
                const double h = 0.5 * (k.upper - k.lower);
                const std::complex<double> z = lambda * h;
                return std::exp(-lambda * c) * (h * sinch_prime(z) - c * sinch(z));
            }
        },
        dist.kind());
}

double gamma_p(int k, double x) {
    if (k < 1) throw std::invalid_argument("gamma_p: order must be >= 1");
    if (x <= 0.0) return 0.0;
    // P(k, x) = 1 - exp(-x) * sum_{j<k} x^j / j!
    double sum;
    if (x < 500.0) {
        double term = std::exp(-x);
        sum = term;
        for (int j = 1; j < k; ++j) {
            term *= x / j;
            sum += term;
        }
    } else {
        sum = 0.0;
        for (int j = 0; j < k; ++j)
            sum += std::exp(j * std::log(x) - x - std::lgamma(j + 1.0));
    }
    return std::clamp(1.0 - sum, 0.0, 1.0);
}

}  // namespace detail

TrigMoments trig_moments(const DelayDistribution& dist, double omega) {
    if (!std::isfinite(omega) || omega < 0.0)
        throw std::invalid_argument("trig_moments: omega must be finite and >= 0");
    if (omega == 0.0) return TrigMoments{0.0, 1.0, 0.0};
    const std::complex<double> v = detail::laplace_continued(dist, {0.0, omega});
    return TrigMoments{omega, v.real(), -v.imag()};
}

std::complex<double> laplace(const DelayDistribution& dist, std::complex<double> lambda) {
    const double nu = convergence_abscissa(dist);
    if (std::isfinite(nu) && lambda.real() <= -nu)
        throw std::domain_error("laplace: Re(lambda) at or left of the convergence abscissa");
    return detail::laplace_continued(dist, lambda);
}

namespace {

// Quantile of the Erlang(k, rate 1) distribution.
double erlang_quantile(int k, double q) {
    if (q <= 0.0) return 0.0;
    double hi = k + 10.0 * std::sqrt(static_cast<double>(k)) + 40.0;
    while (detail::gamma_p(k, hi) < q) hi *= 2.0;
    return detail::bisect([&](double x) { return detail::gamma_p(k, x) - q; }, 0.0, hi, 1e-14);
}

std::vector<Atom> discretize_cells(const DelayDistribution& dist, int n) {
    return std::visit(
        [&](const auto& k) -> std::vector<Atom> {
            using T = std::decay_t<decltype(k)>;
            std::vector<Atom> cells;
            cells.reserve(n);
            if constexpr (std::is_same_v<T, DiracMass>) {
                cells.push_back({k.location, 1.0});
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                // Walk the atoms cutting equal-probability cells; an atom may
                // straddle a cut, in which case its mass splits across cells.
                const double cell_w = 1.0 / n;
                std::size_t i = 0;
                double remaining = k.atoms[0].weight;
                for (int c = 0; c < n; ++c) {
                    double need = cell_w, moment = 0.0;
                    while (need > 1e-15 && i < k.atoms.size()) {
                        const double take = std::min(need, remaining);
                        moment += take * k.atoms[i].delay;
                        need -= take;
                        remaining -= take;
                        if (remaining <= 1e-15 * cell_w) {
                            if (++i < k.atoms.size()) remaining = k.atoms[i].weight;
                        }
                    }
                    cells.push_back({moment * n, cell_w});
                }
            } else if constexpr (std::is_same_v<T, Exponential>) {
                // Cut points -E*ln(1 - j/n); conditional mean of x on [x0,x1]
                // is E * [(1+x0/E)e^{-x0/E} - (1+x1/E)e^{-x1/E}] * n.
                const double E = k.mean;
                auto g = [&](double x) { return (1.0 + x / E) * std::exp(-x / E); };
                double x0 = 0.0;
                for (int c = 0; c < n; ++c) {
                    const double g1 = (c + 1 < n) ? g(-E * std::log1p(-(c + 1.0) / n)) : 0.0;
                    cells.push_back({E * (g(x0) - g1) * n, 1.0 / n});
                    if (c + 1 < n) x0 = -E * std::log1p(-(c + 1.0) / n);
                }
            } else if constexpr (std::is_same_v<T, GammaKernel>) {
                // In units of the rate: conditional mean over a cell [y0,y1]
                // of Erlang(p) is p * (P(p+1,y1) - P(p+1,y0)) / cell mass.
                const int p = k.order;
                const double beta = p / k.mean;
                double q0 = 0.0;
                for (int c = 0; c < n; ++c) {
                    double q1 = 1.0;
                    if (c + 1 < n) {
                        const double y1 = erlang_quantile(p, (c + 1.0) / n);
                        q1 = detail::gamma_p(p + 1, y1);
                    }
                    cells.push_back({(p / beta) * (q1 - q0) * n, 1.0 / n});
                    q0 = q1;
                }
            } else {
                const double w = (k.upper - k.lower) / n;
                for (int c = 0; c < n; ++c)
                    cells.push_back({k.lower + (c + 0.5) * w, 1.0 / n});
            }
            return cells;
        },
        dist.kind());
}

}  // namespace

DelayDistribution discretize(const DelayDistribution& dist, int n) {
    if (n < 1) throw std::invalid_argument("discretize: need n >= 1");
    std::vector<Atom> cells = discretize_cells(dist, n);
    DelayDistribution out = DelayDistribution::discrete(std::move(cells));
    // The cell construction preserves the mean analytically; squash the last
    // few ulps of drift so downstream mean checks are exact.
    const double m_in = mean(dist), m_out = mean(out);
    if (m_out > 0.0 && m_out != m_in) out = scale_to_mean(out, m_in);
    return out;
}

}  // namespace delaystab
