#include "riskstop/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace riskstop {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kRenormTol = 1e-9;

std::vector<std::size_t> indices_by_atom_desc(const DiscreteDistribution& d) {
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return d.atoms[a] > d.atoms[b];
    });
    return idx;
}

// Upper-tail average of the worst (largest) 1-alpha probability mass.
double avar_value(double alpha, const DiscreteDistribution& d) {
    if (alpha == 0.0) return d.mean();
    const double tail = 1.0 - alpha;
    double remaining = tail;
    double acc = 0.0;
    for (std::size_t i : indices_by_atom_desc(d)) {
        const double take = std::min(d.probs[i], remaining);
        acc += take * d.atoms[i];
        remaining -= take;
        if (remaining <= kProbTol) break;
    }
    return acc / tail;
}

// Objective of the EVaR infimum after shifting atoms by their maximum:
// g(u) = M + (beta + log sum p_i exp(u (z_i - M))) / u. The shifted
// exponentials never exceed 1, so the sum cannot overflow.
double evar_objective(double u, double beta, double max_atom,
                      const DiscreteDistribution& d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        s += d.probs[i] * std::exp(u * (d.atoms[i] - max_atom));
    const double val = max_atom + (beta + std::log(s)) / u;
    if (!std::isfinite(val))
        throw ScalingFailure("EVaR objective not finite after max-shift");
    return val;
}

double evar_value(double beta, const DiscreteDistribution& d) {
    if (beta == 0.0) return d.mean();
    const double max_atom = d.max_atom();
    double p_max = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.atoms[i] >= max_atom - 1e-14 * std::max(1.0, std::fabs(max_atom)))
            p_max += d.probs[i];
    // The objective decreases to the essential supremum when the entropic
    // level dominates the tail mass: inf is attained only in the limit.
    if (beta >= -std::log(p_max)) return max_atom;

    auto g = [&](double u) { return evar_objective(u, beta, max_atom, d); };

    // Bracket the interior minimum: g blows up at 0+ and increases again
    // past the minimizer.
    double lo = 1.0, hi = 1.0;
    while (g(hi * 2.0) < g(hi)) {
        hi *= 2.0;
        if (hi > 1e12)
            throw ScalingFailure("EVaR minimizer bracketing diverged");
    }
    hi *= 2.0;
    while (g(lo * 0.5) < g(lo)) {
        lo *= 0.5;
        if (lo < 1e-300)
            throw ScalingFailure("EVaR minimizer bracketing diverged");
    }
    lo *= 0.5;

    // Golden-section to 1e-10 in u-space.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double e = a + invphi * (b - a);
    double fc = g(c), fe = g(e);
    while (b - a > 1e-10 * std::max(1.0, b)) {
        if (fc < fe) {
            b = e; e = c; fe = fc;
            c = b - invphi * (b - a);
            fc = g(c);
        } else {
            a = c; c = e; fc = fe;
            e = a + invphi * (b - a);
            fe = g(e);
        }
    }
    const double u_star = 0.5 * (a + b);
    return std::min(g(u_star), max_atom);
}

} // namespace

DiscreteDistribution DiscreteDistribution::uniform(std::vector<double> a) {
    DiscreteDistribution d;
    const std::size_t n = a.size();
    d.atoms = std::move(a);
    d.probs.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    d.validate();
    return d;
}

void DiscreteDistribution::validate() {
    if (atoms.empty() || atoms.size() != probs.size())
        throw ValidationError("distribution needs equal, nonzero atom/prob counts");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0))
            throw ValidationError("negative probability");
        sum += p;
    }
    const double dev = std::fabs(sum - 1.0);
    if (dev > kRenormTol)
        throw ValidationError("probabilities sum to " + std::to_string(sum));
    if (dev > kProbTol)
        for (double& p : probs) p /= sum;
}

double DiscreteDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += probs[i] * atoms[i];
    return m;
}

double DiscreteDistribution::max_atom() const {
    return *std::max_element(atoms.begin(), atoms.end());
}

double DiscreteDistribution::min_atom() const {
    return *std::min_element(atoms.begin(), atoms.end());
}

RiskSpec RiskSpec::expectation() { return RiskSpec{}; }

RiskSpec RiskSpec::avar(double alpha) {
    RiskSpec s;
    s.kind = RiskKind::AVaR;
    s.alpha = alpha;
    s.validate();
    return s;
}

RiskSpec RiskSpec::evar(double beta) {
    RiskSpec s;
    s.kind = RiskKind::EVaR;
    s.beta = beta;
    s.validate();
    return s;
}

RiskSpec RiskSpec::mean_avar(double lambda, double alpha) {
    RiskSpec s;
    s.kind = RiskKind::MeanAVaR;
    s.lambda = lambda;
    s.alpha = alpha;
    s.validate();
    return s;
}

RiskSpec RiskSpec::concave(const RiskSpec& inner) {
    RiskSpec s;
    s.kind = RiskKind::Concave;
    s.inner = std::make_shared<RiskSpec>(inner);
    s.validate();
    return s;
}

void RiskSpec::validate() const {
    switch (kind) {
    case RiskKind::Expectation:
        break;
    case RiskKind::AVaR:
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw ValidationError("AVaR level must be in [0,1)");
        break;
    case RiskKind::EVaR:
        if (!(beta >= 0.0))
            throw ValidationError("EVaR level must be >= 0");
        break;
    case RiskKind::MeanAVaR:
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw ValidationError("MeanAVaR alpha must be in [0,1)");
        if (!(lambda >= 0.0 && lambda <= 1.0))
            throw ValidationError("MeanAVaR lambda must be in [0,1]");
        break;
    case RiskKind::Concave:
        if (!inner)
            throw ValidationError("Concave spec needs an inner spec");
        if (inner->kind == RiskKind::Concave)
            throw ValidationError("Concave specs do not nest");
        inner->validate();
        break;
    }
}

std::string RiskSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
    case RiskKind::Expectation: os << "E"; break;
    case RiskKind::AVaR:        os << "AVaR(" << alpha << ")"; break;
    case RiskKind::EVaR:        os << "EVaR(" << beta << ")"; break;
    case RiskKind::MeanAVaR:
        os << "(1-" << lambda << ")E + " << lambda << " AVaR(" << alpha << ")";
        break;
    case RiskKind::Concave:     os << "-" << inner->describe() << "(-.)"; break;
    }
    return os.str();
}

double evaluate(const RiskSpec& spec, const DiscreteDistribution& dist) {
    spec.validate();
    switch (spec.kind) {
    case RiskKind::Expectation:
        return dist.mean();
    case RiskKind::AVaR:
        return avar_value(spec.alpha, dist);
    case RiskKind::EVaR:
        return evar_value(spec.beta, dist);
    case RiskKind::MeanAVaR:
        return (1.0 - spec.lambda) * dist.mean() +
               spec.lambda * avar_value(spec.alpha, dist);
    case RiskKind::Concave: {
        DiscreteDistribution neg = dist;
        for (double& z : neg.atoms) z = -z;
        return -evaluate(*spec.inner, neg);
    }
    }
    throw ValidationError("unreachable risk kind");
}

std::vector<double> avar_dual_weights(double alpha,
                                      const DiscreteDistribution& dist) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw ValidationError("AVaR level must be in [0,1)");
    std::vector<double> q(dist.size(), 0.0);
    if (alpha == 0.0) {
        q = dist.probs;
        return q;
    }
    const double cap_scale = 1.0 / (1.0 - alpha);
    double remaining = 1.0;
    for (std::size_t i : indices_by_atom_desc(dist)) {
        const double take = std::min(dist.probs[i] * cap_scale, remaining);
        q[i] = take;
        remaining -= take;
        if (remaining <= kProbTol) break;
    }
    return q;
}

std::vector<double> reweight_concave(double lambda, double alpha,
                                     std::size_t n,
                                     const std::vector<TailRank>& tail_flags) {
    if (n == 0 || tail_flags.size() != n)
        throw ValidationError("tail_flags must cover all n atoms");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw ValidationError("lambda must be in [0,1]");
    const double base = (1.0 - lambda) / static_cast<double>(n);
    if (lambda == 0.0)
        return std::vector<double>(n, base);

    const double alpha_n = alpha * static_cast<double>(n);
    if (!(alpha_n > 0.0))
        throw ValidationError("alpha * N must be positive");
    const double floor_an = std::floor(alpha_n);

    std::size_t tops = 0, boundaries = 0;
    for (TailRank f : tail_flags) {
        if (f == TailRank::Top) ++tops;
        else if (f == TailRank::Boundary) ++boundaries;
    }
    if (tops != static_cast<std::size_t>(floor_an))
        throw ValidationError("expected floor(alpha N) atoms flagged Top");
    if (boundaries > 1)
        throw ValidationError("at most one Boundary atom");

    std::vector<double> out(n, base);
    for (std::size_t i = 0; i < n; ++i) {
        if (tail_flags[i] == TailRank::Top)
            out[i] = base + lambda / alpha_n;
        else if (tail_flags[i] == TailRank::Boundary)
            out[i] = base + lambda * (alpha_n - floor_an) / alpha_n;
    }
    return out;
}

} // namespace riskstop
