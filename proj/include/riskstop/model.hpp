#pragma once

#include <cstdint>
#include <vector>

#include "riskstop/risk.hpp"

namespace riskstop {

enum class ModelKind { GeometricWalk, ArithmeticWalk, BasketWalk };

// Stochastic price model. Geometric: S_t = S_{t-1} exp(r - sigma^2/2 + eps),
// eps ~ N(0, sigma^2). Arithmetic: S_t = S_{t-1} + r S_0 + eps,
// eps ~ N(0, (sigma S_0)^2). Basket: componentwise arithmetic walk with
// drift r S_0^j and jointly Gaussian increments N(0, cov).
struct ModelSpec {
    ModelKind kind = ModelKind::GeometricWalk;
    std::vector<double> s0{1.0};  // one entry unless basket
    double r = 0.0;               // per-stage rate
    double sigma = 0.0;           // univariate volatility per stage
    std::vector<std::vector<double>> cov;  // basket covariance per stage
    double strike = 1.0;
    std::vector<double> weights;  // basket payoff weights
    int stages = 1;               // T

    std::size_t dim() const { return s0.size(); }
    bool univariate() const { return kind != ModelKind::BasketWalk; }
    void validate() const;

    // Lower Cholesky factor of cov (basket only). Rejects non-PSD input.
    std::vector<std::vector<double>> cholesky() const;
};

enum class DiscretizationMode { MonteCarlo, Binomial };

// Per-stage increment atoms. Univariate stages hold scalar atoms
// (dim = 1); basket stages hold joint increment vectors.
struct StageDiscretization {
    std::size_t dim = 1;
    // increments[t][k] is the k-th atom (vector of length dim) at stage t+1.
    std::vector<std::vector<std::vector<double>>> increments;
    std::vector<std::vector<double>> probs;  // per stage, sums to 1

    std::size_t num_stages() const { return increments.size(); }
    std::size_t atoms_at(std::size_t t) const { return increments[t].size(); }

    // Scalar view for univariate models.
    DiscreteDistribution stage_distribution(std::size_t t) const;
    void validate() const;
};

struct ScenarioPath {
    // states[t] is the state vector at stage t, t = 0..T.
    std::vector<std::vector<double>> states;
    // Index of the increment atom used at each transition (empty when the
    // path was drawn from the continuous law).
    std::vector<int> atom_indices;
};

enum class PathSource { Discretization, TrueLaw };

// Draws N increment atoms per stage. MonteCarlo: i.i.d. Gaussian draws with
// equal weight 1/N, per-stage substream derive_seed(seed, stage). Binomial:
// two atoms +-sigma S_0 with probability 1/2 (univariate only, N forced
// to 2).
StageDiscretization discretize(const ModelSpec& model, std::size_t n,
                               std::uint64_t seed, DiscretizationMode mode);

// One transition of the state recursion.
std::vector<double> step(const ModelSpec& model,
                         const std::vector<double>& state,
                         const std::vector<double>& increment);

// Seeded scenario paths; path i uses substream derive_seed(seed, i), so the
// result depends only on (seed, count), never on scheduling.
std::vector<ScenarioPath> sample_paths(const ModelSpec& model,
                                       const StageDiscretization* disc,
                                       PathSource source, std::size_t count,
                                       std::uint64_t seed);

} // namespace riskstop
