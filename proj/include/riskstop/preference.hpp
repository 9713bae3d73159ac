#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "riskstop/risk.hpp"
#include "riskstop/snell.hpp"

namespace riskstop {

enum class OneStepKind { Additive, MaxType, MinType };

// Transition mapping (Z_s, rho(Z_{s+1})) -> Z_s + rho, Z_s v rho or
// Z_s ^ rho.
struct OneStepMapping {
    OneStepKind kind = OneStepKind::Additive;
    RiskSpec spec;

    double combine(double z, double rho_next) const;
};

// Evaluator interface for a family of preference mappings R_{t,u} on a
// tree: returns the F_t-measurable value, one entry per stage-t node.
class PreferenceFamily {
public:
    virtual ~PreferenceFamily() = default;
    virtual std::vector<double> evaluate(const FiltrationTree& tree,
                                         const std::vector<double>& process,
                                         int t, int u) const = 0;
};

// Recursive-by-construction family: backward fold of one-step mappings.
class NestedSystem final : public PreferenceFamily {
public:
    explicit NestedSystem(std::vector<OneStepMapping> steps)
        : steps_(std::move(steps)) {}

    std::vector<double> evaluate(const FiltrationTree& tree,
                                 const std::vector<double>& process,
                                 int t, int u) const override;

    const std::vector<OneStepMapping>& steps() const { return steps_; }

private:
    std::vector<OneStepMapping> steps_;  // one per transition 0..T-1
};

// Flat (non-nested) family R_{t,u}(Z) = rho_{|F_t}(Z_t + ... + Z_u):
// evaluated at each stage-t node by collecting the subtree path sums.
// Recursive only for the expectation and essential-supremum cases.
class FlatConditionalFamily final : public PreferenceFamily {
public:
    explicit FlatConditionalFamily(RiskSpec spec) : spec_(std::move(spec)) {}

    std::vector<double> evaluate(const FiltrationTree& tree,
                                 const std::vector<double>& process,
                                 int t, int u) const override;

private:
    RiskSpec spec_;
};

// Per-node values R_{t,u}(Z_t, ..., Z_u) for a nested system.
std::vector<double> nested_evaluate(const NestedSystem& system,
                                    const FiltrationTree& tree,
                                    const std::vector<double>& process,
                                    int t, int u);

struct PropertyCounterexample {
    std::vector<double> process;
    std::vector<double> process_other;  // consistency checks compare a pair
    int s = -1, t = -1, v = -1, u = -1;
    double lhs = 0.0, rhs = 0.0;
    int node = -1;
};

struct PropertyReport {
    bool holds = true;
    std::size_t trials = 0;
    std::optional<PropertyCounterexample> counterexample;
};

// Randomized search for a violation of R_{t,u} = R_{t,v}(..., R_{v,u}(...))
// with processes uniform on [-1,1] per node.
PropertyReport check_recursivity(const PreferenceFamily& family,
                                 const FiltrationTree& tree, int t, int v,
                                 int u, std::size_t trials, std::uint64_t seed);

// Randomized search for a violation of the forward implication: processes
// agreeing up to stage t-1 whose ordering at stage t is reversed at stage s.
// strict = true checks the strict-inequality version.
PropertyReport check_dynamic_consistency(const PreferenceFamily& family,
                                         const FiltrationTree& tree,
                                         std::size_t trials, std::uint64_t seed,
                                         bool strict);

} // namespace riskstop
