#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskstop {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a numeric routine cannot produce a finite result even after
// rescaling (e.g. the exponential moment in the entropic measure).
struct ScalingFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A random variable with finitely many outcomes together with its
// probabilities. The universal carrier for every risk evaluation here.
struct DiscreteDistribution {
    std::vector<double> atoms;
    std::vector<double> probs;

    DiscreteDistribution() = default;
    DiscreteDistribution(std::vector<double> a, std::vector<double> p)
        : atoms(std::move(a)), probs(std::move(p)) {}

    static DiscreteDistribution uniform(std::vector<double> a);

    std::size_t size() const { return atoms.size(); }

    // Checks the invariants; probabilities off by at most 1e-9 from unit
    // mass are renormalized in place, larger deviations are rejected.
    void validate();

    double mean() const;
    double max_atom() const;
    double min_atom() const;
};

enum class RiskKind { Expectation, AVaR, EVaR, MeanAVaR, Concave };

// Declarative description of a one-step risk mapping. Conditional use is
// always "this spec evaluated on a node's child distribution".
struct RiskSpec {
    RiskKind kind = RiskKind::Expectation;
    double alpha = 0.0;   // AVaR / MeanAVaR probability level, in [0,1)
    double beta = 0.0;    // EVaR entropic level, >= 0
    double lambda = 0.0;  // MeanAVaR mixture weight, in [0,1]
    std::shared_ptr<const RiskSpec> inner;  // Concave only, depth exactly 1

    static RiskSpec expectation();
    static RiskSpec avar(double alpha);
    static RiskSpec evar(double beta);
    static RiskSpec mean_avar(double lambda, double alpha);
    static RiskSpec concave(const RiskSpec& inner);

    void validate() const;
    std::string describe() const;
};

// rho(Z) for the given spec on a finite distribution.
double evaluate(const RiskSpec& spec, const DiscreteDistribution& dist);

// Maximizing dual weights q for AVaR_alpha: 0 <= q_i <= p_i/(1-alpha),
// sum q_i = 1 and sum q_i z_i = AVaR_alpha(Z). The atom at the quantile
// carries the fractional remainder.
std::vector<double> avar_dual_weights(double alpha,
                                      const DiscreteDistribution& dist);

enum class TailRank { Top, Boundary, Other };

// Probability reassignment used by the concave outer loop: atoms flagged
// Top get (1-lambda)/N + lambda/(alpha N), the Boundary atom gets the
// fractional remainder weight, everything else keeps (1-lambda)/N.
std::vector<double> reweight_concave(double lambda, double alpha,
                                     std::size_t n,
                                     const std::vector<TailRank>& tail_flags);

} // namespace riskstop
