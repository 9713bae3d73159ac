#include "riskstop/model.hpp"

#include <algorithm>
#include <cmath>

#include "riskstop/rng.hpp"

namespace riskstop {

void ModelSpec::validate() const {
    if (stages < 1)
        throw ValidationError("model needs at least one stage");
    if (s0.empty())
        throw ValidationError("initial state missing");
    if (kind == ModelKind::BasketWalk) {
        const std::size_t d = s0.size();
        if (cov.size() != d)
            throw ValidationError("covariance must be |J| x |J|");
        for (const auto& row : cov)
            if (row.size() != d)
                throw ValidationError("covariance must be square");
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                if (std::fabs(cov[i][j] - cov[j][i]) > 1e-12)
                    throw ValidationError("covariance must be symmetric");
        if (!weights.empty() && weights.size() != d)
            throw ValidationError("weights must match the number of assets");
    } else {
        if (s0.size() != 1)
            throw ValidationError("univariate model takes a scalar S0");
        if (!(sigma > 0.0))
            throw ValidationError("sigma must be positive");
    }
}

std::vector<std::vector<double>> ModelSpec::cholesky() const {
    const std::size_t d = dim();
    std::vector<std::vector<double>> L(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = cov[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
            if (i == j) {
                // Semidefinite input: a vanishing pivot zeroes the column.
                if (s < -1e-10)
                    throw ValidationError("covariance is not positive semidefinite");
                L[i][i] = std::sqrt(std::max(s, 0.0));
            } else {
                L[i][j] = (L[j][j] > 0.0) ? s / L[j][j] : 0.0;
            }
        }
    }
    return L;
}

DiscreteDistribution StageDiscretization::stage_distribution(std::size_t t) const {
    if (dim != 1)
        throw ValidationError("scalar view requires a univariate discretization");
    DiscreteDistribution d;
    d.atoms.reserve(atoms_at(t));
    for (const auto& a : increments[t]) d.atoms.push_back(a[0]);
    d.probs = probs[t];
    d.validate();
    return d;
}

void StageDiscretization::validate() const {
    if (increments.size() != probs.size())
        throw ValidationError("stage counts disagree");
    for (std::size_t t = 0; t < increments.size(); ++t) {
        if (increments[t].empty() || increments[t].size() != probs[t].size())
            throw ValidationError("stage needs matching atoms and probabilities");
        double sum = 0.0;
        for (double p : probs[t]) {
            if (!(p >= 0.0)) throw ValidationError("negative stage probability");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw ValidationError("stage probabilities must sum to 1");
        for (const auto& a : increments[t])
            if (a.size() != dim)
                throw ValidationError("atom dimension mismatch");
    }
}

namespace {

// Increment standard deviation of the univariate laws: the geometric walk
// shocks the exponent, the arithmetic walk shocks the price level.
double increment_sd(const ModelSpec& model) {
    return model.kind == ModelKind::GeometricWalk ? model.sigma
                                                  : model.sigma * model.s0[0];
}

std::vector<double> draw_increment(const ModelSpec& model,
                                   const std::vector<std::vector<double>>& chol,
                                   Rng& rng) {
    const std::size_t d = model.dim();
    std::vector<double> eps(d, 0.0);
    if (model.univariate()) {
        eps[0] = increment_sd(model) * rng.next_normal();
        return eps;
    }
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) z[j] = rng.next_normal();
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += chol[i][j] * z[j];
        eps[i] = s;
    }
    return eps;
}

} // namespace

StageDiscretization discretize(const ModelSpec& model, std::size_t n,
                               std::uint64_t seed, DiscretizationMode mode) {
    model.validate();
    if (n < 1) throw ValidationError("need at least one atom per stage");

    StageDiscretization disc;
    disc.dim = model.dim();
    const std::size_t T = static_cast<std::size_t>(model.stages);
    disc.increments.resize(T);
    disc.probs.resize(T);

    if (mode == DiscretizationMode::Binomial) {
        if (!model.univariate())
            throw ValidationError("binomial discretization requires a univariate model");
        const double a = model.sigma * model.s0[0];
        for (std::size_t t = 0; t < T; ++t) {
            disc.increments[t] = {{+a}, {-a}};
            disc.probs[t] = {0.5, 0.5};
        }
        return disc;
    }

    const auto chol = model.univariate() ? std::vector<std::vector<double>>{}
                                         : model.cholesky();
    for (std::size_t t = 0; t < T; ++t) {
        Rng rng(derive_seed(seed, t));
        disc.increments[t].reserve(n);
        for (std::size_t k = 0; k < n; ++k)
            disc.increments[t].push_back(draw_increment(model, chol, rng));
        disc.probs[t].assign(n, 1.0 / static_cast<double>(n));
    }
    disc.validate();
    return disc;
}

std::vector<double> step(const ModelSpec& model, const std::vector<double>& state,
                         const std::vector<double>& increment) {
    if (state.size() != model.dim() || increment.size() != model.dim())
        throw ValidationError("state/increment dimension mismatch");
    std::vector<double> next(state.size());
    switch (model.kind) {
    case ModelKind::GeometricWalk:
        next[0] = state[0] *
                  std::exp(model.r - 0.5 * model.sigma * model.sigma + increment[0]);
        break;
    case ModelKind::ArithmeticWalk:
        next[0] = state[0] + model.r * model.s0[0] + increment[0];
        break;
    case ModelKind::BasketWalk:
        for (std::size_t j = 0; j < state.size(); ++j)
            next[j] = state[j] + model.r * model.s0[j] + increment[j];
        break;
    }
    return next;
}

std::vector<ScenarioPath> sample_paths(const ModelSpec& model,
                                       const StageDiscretization* disc,
                                       PathSource source, std::size_t count,
                                       std::uint64_t seed) {
    model.validate();
    if (count < 1) throw ValidationError("need at least one path");
    if (source == PathSource::Discretization) {
        if (!disc) throw ValidationError("discretization source needs a discretization");
        disc->validate();
    }

    const std::size_t T = static_cast<std::size_t>(model.stages);
    const auto chol = model.univariate() ? std::vector<std::vector<double>>{}
                                         : model.cholesky();

    std::vector<ScenarioPath> paths(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, i));
        ScenarioPath& path = paths[i];
        path.states.reserve(T + 1);
        path.states.push_back(model.s0);
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> eps;
            if (source == PathSource::TrueLaw) {
                eps = draw_increment(model, chol, rng);
            } else {
                const double u = rng.next_uniform();
                const auto& p = disc->probs[t];
                double acc = 0.0;
                std::size_t k = 0;
                for (; k + 1 < p.size(); ++k) {
                    acc += p[k];
                    if (u <= acc) break;
                }
                eps = disc->increments[t][k];
                path.atom_indices.push_back(static_cast<int>(k));
            }
            path.states.push_back(step(model, path.states.back(), eps));
        }
    }
    return paths;
}

} // namespace riskstop
