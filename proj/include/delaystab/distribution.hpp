#pragma once

#include <complex>
#include <variant>
#include <vector>

namespace delaystab {

// One point mass of a discrete delay mixture.
struct Atom {
    double delay = 0.0;
    double weight = 1.0;
};

struct DiracMass {
    double location = 0.0;
};

struct DiscreteMixture {
    std::vector<Atom> atoms;
};

struct Exponential {
    double mean = 1.0;
};

// Erlang kernel of integer order p with the given mean; rate = order / mean.
struct GammaKernel {
    int order = 1;
    double mean = 1.0;
};

struct Uniform {
    double lower = 0.0;
    double upper = 1.0;
};

// Cosine and sine moments of a delay distribution at one frequency.
struct TrigMoments {
    double omega = 0.0;
    double c = 1.0;  // integral of cos(omega*tau) d eta(tau)
    double s = 0.0;  // integral of sin(omega*tau) d eta(tau)
};

// Probability distribution of a nonnegative delay. Immutable after
// construction; mixtures are sorted, merged and renormalized up front.
class DelayDistribution {
  public:
    using Kind = std::variant<DiracMass, DiscreteMixture, Exponential, GammaKernel, Uniform>;

    explicit DelayDistribution(Kind kind);

    static DelayDistribution dirac(double location);
    static DelayDistribution discrete(std::vector<Atom> atoms);
    static DelayDistribution exponential(double mean);
    static DelayDistribution gamma(int order, double mean);
    static DelayDistribution uniform(double lower, double upper);

    const Kind& kind() const { return kind_; }

    // True for DiracMass and DiscreteMixture.
    bool is_discrete() const;

    const char* kind_name() const;

  private:
    Kind kind_;
};

double mean(const DelayDistribution& dist);

// Largest delay in the support; +infinity for exponential/gamma kinds.
double max_delay(const DelayDistribution& dist);

// Smallest strictly positive delay an integrator has to resolve
// (0 when there is none, e.g. a pure zero-delay mass or a continuous kind).
double min_positive_delay(const DelayDistribution& dist);

// Weight sitting exactly at delay 0.
double weight_at_zero(const DelayDistribution& dist);

// Multiply every delay by factor (> 0); kind is preserved.
DelayDistribution scale_delays(const DelayDistribution& dist, double factor);

// Rescale delays so the mean becomes target_mean (>= 0). target_mean == 0
// collapses to a Dirac mass at 0; a zero-mean distribution cannot be scaled up.
DelayDistribution scale_to_mean(const DelayDistribution& dist, double target_mean);

// C(omega), S(omega) in closed form; omega must be >= 0.
TrigMoments trig_moments(const DelayDistribution& dist, double omega);

// Laplace transform integral of exp(-lambda*tau) d eta(tau). Throws
// std::domain_error when Re(lambda) is at or left of the convergence abscissa
// (-rate for exponential/gamma kinds; entire otherwise).
std::complex<double> laplace(const DelayDistribution& dist, std::complex<double> lambda);

// Abscissa nu such that laplace() converges for Re(lambda) > -nu.
double convergence_abscissa(const DelayDistribution& dist);

// Best n-point discrete approximation used by the simulator and the reduction
// machinery: n equal-probability quantile cells, each replaced by its
// conditional mean, so the overall mean is preserved exactly.
DelayDistribution discretize(const DelayDistribution& dist, int n);

namespace detail {

// Transform continued past the convergence abscissa (pole at lambda = -rate
// for the exponential/gamma closed forms). No domain check.
std::complex<double> laplace_continued(const DelayDistribution& dist, std::complex<double> lambda);

// d/dlambda of laplace_continued.
std::complex<double> laplace_derivative(const DelayDistribution& dist, std::complex<double> lambda);

// Regularized lower incomplete gamma P(k, x) for integer k >= 1.
double gamma_p(int k, double x);

}  // namespace detail

}  // namespace delaystab
