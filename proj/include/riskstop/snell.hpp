#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskstop/risk.hpp"

namespace riskstop {

// Finite filtration carrier: a rooted tree whose depth-t nodes are the
// atoms of F_t. Every leaf sits at the terminal stage, so any adapted
// process is simply one value per node.
struct TreeNode {
    int stage = 0;
    int parent = -1;
    std::vector<int> children;
    std::vector<double> child_probs;
    double payoff = 0.0;  // Z_t at this node
};

struct FiltrationTree {
    std::vector<TreeNode> nodes;          // node 0 is the root
    std::vector<std::vector<int>> levels; // node ids per stage

    int horizon() const { return static_cast<int>(levels.size()) - 1; }
    std::size_t size() const { return nodes.size(); }
    bool terminal(int id) const { return nodes[id].children.empty(); }

    void validate() const;
    void rebuild_levels();

    // Probability of reaching each node from the root.
    std::vector<double> reach_probabilities() const;

    // Child distribution of an adapted process at a non-terminal node.
    DiscreteDistribution child_distribution(int id,
                                            const std::vector<double>& values) const;
};

// Uniform-probability binary tree of the given horizon.
FiltrationTree binary_tree(int horizon);

// Random tree: branching factors in [2, max_branch], random child
// probabilities, payoffs uniform on [-1, 1].
FiltrationTree random_tree(int horizon, int max_branch, std::uint64_t seed);

// Adapted stopping time as stop/continue flags on nodes. A path stops at
// its first flagged node; terminal nodes are forced stops, so every path
// stops by the horizon.
struct StoppingTime {
    std::vector<std::uint8_t> stop;

    // true where the stop actually bites: the node is flagged (or terminal)
    // and no ancestor already stopped.
    std::vector<std::uint8_t> effective_stops(const FiltrationTree& tree) const;

    // Stage at which each terminal node's path stops.
    std::vector<int> stop_stage_per_leaf(const FiltrationTree& tree) const;
};

enum class SnellMode { MaxStop, MinStop };

struct SnellResult {
    SnellMode mode = SnellMode::MaxStop;
    std::vector<double> envelope;      // E_t per node
    std::vector<double> continuation;  // rho_{t|F_t}(E_{t+1}) per node (terminal: E_T)
    std::vector<std::uint8_t> stop;    // payoff-vs-continuation decision per node

    double root_value() const { return envelope.empty() ? 0.0 : envelope[0]; }
};

// Backward recursion E_T = Z_T, E_t = Z_t v rho_t(E_{t+1}) (MaxStop) or
// Z_t ^ rho_t(E_{t+1}) (MinStop). One spec per stage 0..T-1.
SnellResult snell_envelope(const FiltrationTree& tree,
                           const std::vector<RiskSpec>& onestep,
                           SnellMode mode = SnellMode::MaxStop);

// First-touch stopping time tau*_m: per path, the first stage t >= m with
// E_t = Z_t (within 1e-10).
StoppingTime optimal_stopping_time(const SnellResult& result,
                                   const FiltrationTree& tree, int m = 0);

// Nested stopping-measure value rho_{0,T}(Z_tau) by backward accumulation
// of the stopped-mass indicators.
double nested_value(const FiltrationTree& tree,
                    const std::vector<RiskSpec>& onestep,
                    const StoppingTime& tau);

// Same accumulation cut off at stage m: the per-node values rho_{m,T}(Z_tau)
// at the stage-m nodes.
std::vector<double> nested_value_from(const FiltrationTree& tree,
                                      const std::vector<RiskSpec>& onestep,
                                      const StoppingTime& tau, int m);

enum class OptimizeSense { Max, Min };

struct EnumerationResult {
    double best_value = 0.0;
    StoppingTime best_tau;
    std::size_t enumerated = 0;
};

// Exhaustive enumeration over all adapted stopping times tau >= m.
// Deliberately brute force; serves as the independent oracle for the
// backward recursion. Rejects instances with more than 2^20 candidates.
EnumerationResult enumerate_stopping_oracle(const FiltrationTree& tree,
                                            const std::vector<RiskSpec>& onestep,
                                            int m, OptimizeSense sense);

struct SupermartingaleReport {
    bool holds = true;
    int violating_node = -1;
    double gap = 0.0;  // rho_t(X_{t+1}) - X_t at the violation
};

// Checks X_t >= rho_{t|F_t}(X_{t+1}) at every non-terminal node (1e-10).
SupermartingaleReport check_supermartingale(const std::vector<double>& values,
                                            const FiltrationTree& tree,
                                            const std::vector<RiskSpec>& onestep);

enum class DelayOrderingStatus { Holds, PropertyFailed, PreconditionViolated };

struct DelayOrderingReport {
    DelayOrderingStatus status = DelayOrderingStatus::Holds;
    std::string detail;
};

// For pointwise-ordered one-step mappings, envelopes are ordered nodewise
// and the optimal stopping time of the larger mapping is delayed pathwise.
// The precondition rho_low <= rho_high is verified numerically on every
// child distribution the recursion encounters.
DelayOrderingReport check_delay_ordering(const FiltrationTree& tree,
                                         const std::vector<RiskSpec>& specs_low,
                                         const std::vector<RiskSpec>& specs_high);

} // namespace riskstop
