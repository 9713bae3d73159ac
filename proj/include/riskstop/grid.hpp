#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "riskstop/model.hpp"

namespace riskstop {

enum class GridMode { Auto, ExactReachable, Explicit };

// State-grid construction policy for the backward recursions. Auto spans
// the exact reachable envelope of the discretized increments per stage
// (log-spaced for geometric walks, uniform otherwise). ExactReachable
// enumerates the reachable states themselves, which makes the recursion
// interpolation-free (binomial mode recombines, so this stays small).
struct GridSpec {
    GridMode mode = GridMode::Auto;
    std::size_t points = 400;
    std::optional<std::pair<double, double>> span;  // Explicit mode
    std::size_t max_exact_states = 200000;
};

// Stage-t value function sampled on a sorted state grid, evaluated by
// monotone piecewise-linear interpolation. Queries outside the covered
// range are rejected rather than extrapolated.
struct GridValueFunction {
    int stage = 0;
    std::vector<double> states;
    std::vector<double> values;

    double operator()(double s) const;
};

// Per-stage state grids for stages 0..T (univariate models only).
std::vector<std::vector<double>> build_stage_grids(const ModelSpec& model,
                                                   const StageDiscretization& disc,
                                                   const GridSpec& grid);

// Exercise payoff of the stopping problem attached to the model kind:
// put [K - S]_+ for the univariate walks, [sum w_j S_j - K]_+ for baskets.
double exercise_payoff(const ModelSpec& model, const std::vector<double>& state);

// One-step continuation adjustment: multiplicative discount e^{-r} for the
// geometric model, additive per-stage cost -r for the arithmetic models.
double discount_continuation(const ModelSpec& model, double continuation);

} // namespace riskstop
