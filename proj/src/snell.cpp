#include "riskstop/snell.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskstop/rng.hpp"

namespace riskstop {

namespace {
constexpr double kEqTol = 1e-10;

void require_specs(const FiltrationTree& tree, const std::vector<RiskSpec>& onestep) {
    if (static_cast<int>(onestep.size()) != tree.horizon())
        throw ValidationError("need one risk spec per stage 0..T-1");
    for (const auto& s : onestep) s.validate();
}
} // namespace

void FiltrationTree::validate() const {
    if (nodes.empty() || nodes[0].parent != -1 || nodes[0].stage != 0)
        throw ValidationError("tree needs a single stage-0 root");
    const int T = horizon();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const TreeNode& n = nodes[i];
        if (i > 0) {
            if (n.parent < 0 || n.parent >= static_cast<int>(nodes.size()))
                throw ValidationError("dangling parent link");
            if (nodes[n.parent].stage + 1 != n.stage)
                throw ValidationError("child stage must be parent stage + 1");
        }
        if (n.children.size() != n.child_probs.size())
            throw ValidationError("children/probabilities mismatch");
        if (n.children.empty()) {
            if (n.stage != T)
                throw ValidationError("every leaf must sit at the terminal stage");
        } else {
            double sum = 0.0;
            for (double p : n.child_probs) {
                if (!(p >= 0.0)) throw ValidationError("negative transition probability");
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-9)
                throw ValidationError("child probabilities must sum to 1");
        }
    }
}

void FiltrationTree::rebuild_levels() {
    levels.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const int s = nodes[i].stage;
        if (s >= static_cast<int>(levels.size())) levels.resize(s + 1);
        levels[s].push_back(static_cast<int>(i));
    }
}

std::vector<double> FiltrationTree::reach_probabilities() const {
    std::vector<double> reach(nodes.size(), 0.0);
    reach[0] = 1.0;
    for (int t = 0; t <= horizon(); ++t)
        for (int id : levels[t]) {
            const TreeNode& n = nodes[id];
            for (std::size_t c = 0; c < n.children.size(); ++c)
                reach[n.children[c]] = reach[id] * n.child_probs[c];
        }
    return reach;
}

DiscreteDistribution FiltrationTree::child_distribution(
    int id, const std::vector<double>& values) const {
    const TreeNode& n = nodes[id];
    DiscreteDistribution d;
    d.atoms.reserve(n.children.size());
    for (int c : n.children) d.atoms.push_back(values[c]);
    d.probs = n.child_probs;
    d.validate();
    return d;
}

FiltrationTree binary_tree(int horizon) {
    if (horizon < 0) throw ValidationError("horizon must be nonnegative");
    FiltrationTree tree;
    tree.nodes.push_back(TreeNode{});
    std::vector<int> frontier{0};
    for (int t = 1; t <= horizon; ++t) {
        std::vector<int> next;
        for (int id : frontier) {
            for (int b = 0; b < 2; ++b) {
                TreeNode child;
                child.stage = t;
                child.parent = id;
                const int cid = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back(child);
                tree.nodes[id].children.push_back(cid);
                tree.nodes[id].child_probs.push_back(0.5);
                next.push_back(cid);
            }
        }
        frontier = std::move(next);
    }
    tree.rebuild_levels();
    tree.validate();
    return tree;
}

FiltrationTree random_tree(int horizon, int max_branch, std::uint64_t seed) {
    if (horizon < 0) throw ValidationError("horizon must be nonnegative");
    if (max_branch < 2) throw ValidationError("need at least binary branching");
    Rng rng(seed);
    FiltrationTree tree;
    TreeNode root;
    root.payoff = 2.0 * rng.next_uniform() - 1.0;
    tree.nodes.push_back(root);
    std::vector<int> frontier{0};
    for (int t = 1; t <= horizon; ++t) {
        std::vector<int> next;
        for (int id : frontier) {
            const int nb = 2 + static_cast<int>(rng.next_u64() %
                                                static_cast<std::uint64_t>(max_branch - 1));
            std::vector<double> w(nb);
            double sum = 0.0;
            for (double& x : w) {
                x = 0.1 + rng.next_uniform();
                sum += x;
            }
            for (int b = 0; b < nb; ++b) {
                TreeNode child;
                child.stage = t;
                child.parent = id;
                child.payoff = 2.0 * rng.next_uniform() - 1.0;
                const int cid = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back(child);
                tree.nodes[id].children.push_back(cid);
                tree.nodes[id].child_probs.push_back(w[b] / sum);
            }
            for (int c : tree.nodes[id].children) next.push_back(c);
        }
        frontier = std::move(next);
    }
    tree.rebuild_levels();
    tree.validate();
    return tree;
}

std::vector<std::uint8_t> StoppingTime::effective_stops(
    const FiltrationTree& tree) const {
    if (stop.size() != tree.size())
        throw ValidationError("stopping time does not cover the tree");
    std::vector<std::uint8_t> eff(tree.size(), 0);
    std::vector<std::uint8_t> stopped_above(tree.size(), 0);
    for (int t = 0; t <= tree.horizon(); ++t)
        for (int id : tree.levels[t]) {
            const TreeNode& n = tree.nodes[id];
            const bool above = (n.parent >= 0) &&
                               (stopped_above[n.parent] || eff[n.parent]);
            stopped_above[id] = above ? 1 : 0;
            if (!above && (stop[id] || tree.terminal(id))) eff[id] = 1;
        }
    return eff;
}

std::vector<int> StoppingTime::stop_stage_per_leaf(const FiltrationTree& tree) const {
    const auto eff = effective_stops(tree);
    std::vector<int> stage_of(tree.size(), -1);
    std::vector<int> out;
    for (int t = 0; t <= tree.horizon(); ++t)
        for (int id : tree.levels[t]) {
            const TreeNode& n = tree.nodes[id];
            const int inherited = (n.parent >= 0) ? stage_of[n.parent] : -1;
            stage_of[id] = (inherited >= 0) ? inherited : (eff[id] ? t : -1);
            if (tree.terminal(id)) out.push_back(stage_of[id]);
        }
    return out;
}

SnellResult snell_envelope(const FiltrationTree& tree,
                           const std::vector<RiskSpec>& onestep, SnellMode mode) {
    tree.validate();
    require_specs(tree, onestep);
    const int T = tree.horizon();

    SnellResult res;
    res.mode = mode;
    res.envelope.assign(tree.size(), 0.0);
    res.continuation.assign(tree.size(), 0.0);
    res.stop.assign(tree.size(), 0);

    for (int t = T; t >= 0; --t) {
        for (int id : tree.levels[t]) {
            const double z = tree.nodes[id].payoff;
            if (tree.terminal(id)) {
                res.envelope[id] = z;
                res.continuation[id] = z;
                res.stop[id] = 1;
                continue;
            }
            const double cont =
                evaluate(onestep[t], tree.child_distribution(id, res.envelope));
            res.continuation[id] = cont;
            if (mode == SnellMode::MaxStop) {
                res.envelope[id] = std::max(z, cont);
                res.stop[id] = (z >= cont - kEqTol) ? 1 : 0;
            } else {
                res.envelope[id] = std::min(z, cont);
                res.stop[id] = (z <= cont + kEqTol) ? 1 : 0;
            }
        }
    }
    return res;
}

StoppingTime optimal_stopping_time(const SnellResult& result,
                                   const FiltrationTree& tree, int m) {
    if (m < 0 || m > tree.horizon())
        throw ValidationError("start stage out of range");
    StoppingTime tau;
    tau.stop.assign(tree.size(), 0);
    for (std::size_t id = 0; id < tree.size(); ++id) {
        const TreeNode& n = tree.nodes[id];
        if (n.stage < m) continue;
        if (std::fabs(result.envelope[id] - n.payoff) <= kEqTol)
            tau.stop[id] = 1;
    }
    return tau;
}

double nested_value(const FiltrationTree& tree, const std::vector<RiskSpec>& onestep,
                    const StoppingTime& tau) {
    return nested_value_from(tree, onestep, tau, 0)[0];
}

std::vector<double> nested_value_from(const FiltrationTree& tree,
                                      const std::vector<RiskSpec>& onestep,
                                      const StoppingTime& tau, int m) {
    tree.validate();
    require_specs(tree, onestep);
    if (m < 0 || m > tree.horizon())
        throw ValidationError("start stage out of range");

    const auto eff = tau.effective_stops(tree);
    const int T = tree.horizon();
    std::vector<double> acc(tree.size(), 0.0);
    for (int t = T; t >= m; --t)
        for (int id : tree.levels[t]) {
            double v = eff[id] ? tree.nodes[id].payoff : 0.0;
            if (!tree.terminal(id))
                v += evaluate(onestep[t], tree.child_distribution(id, acc));
            acc[id] = v;
        }

    std::vector<double> out;
    out.reserve(tree.levels[m].size());
    for (int id : tree.levels[m]) out.push_back(acc[id]);
    return out;
}

namespace {

// Number of adapted stopping times >= m in the subtree below `id` (terminal
// nodes are forced stops, interior nodes at stages >= m may stop or defer).
double count_configurations(const FiltrationTree& tree, int id, int m) {
    const TreeNode& n = tree.nodes[id];
    if (tree.terminal(id)) return 1.0;
    double prod = 1.0;
    for (int c : n.children) {
        prod *= count_configurations(tree, c, m);
        if (prod > 2e6) return prod;  // caller enforces the hard cap
    }
    return (n.stage >= m) ? 1.0 + prod : prod;
}

void enumerate_rec(const FiltrationTree& tree, const std::vector<RiskSpec>& onestep,
                   int m, OptimizeSense sense, std::vector<int>& frontier,
                   StoppingTime& tau, EnumerationResult& best) {
    // Find the first undecided frontier node; nodes enter the frontier only
    // if no ancestor has stopped.
    int pick = -1;
    for (std::size_t i = 0; i < frontier.size(); ++i)
        if (frontier[i] >= 0) { pick = static_cast<int>(i); break; }
    if (pick < 0) {
        const double v = nested_value(tree, onestep, tau);
        ++best.enumerated;
        const bool better = best.enumerated == 1 ||
                            (sense == OptimizeSense::Max ? v > best.best_value
                                                         : v < best.best_value);
        if (better) {
            best.best_value = v;
            best.best_tau = tau;
        }
        return;
    }

    const int id = frontier[pick];
    frontier[pick] = -1;

    // Branch 1: stop here (terminal nodes have no other choice).
    tau.stop[id] = 1;
    enumerate_rec(tree, onestep, m, sense, frontier, tau, best);
    tau.stop[id] = 0;

    // Branch 2: defer to the children.
    if (!tree.terminal(id)) {
        const std::size_t mark = frontier.size();
        for (int c : tree.nodes[id].children) frontier.push_back(c);
        enumerate_rec(tree, onestep, m, sense, frontier, tau, best);
        frontier.resize(mark);
    }

    frontier[pick] = id;
}

} // namespace

EnumerationResult enumerate_stopping_oracle(const FiltrationTree& tree,
                                            const std::vector<RiskSpec>& onestep,
                                            int m, OptimizeSense sense) {
    tree.validate();
    require_specs(tree, onestep);
    if (m < 0 || m > tree.horizon())
        throw ValidationError("start stage out of range");
    if (count_configurations(tree, 0, m) > static_cast<double>(1 << 20))
        throw ValidationError("instance too large for stopping-time enumeration");

    EnumerationResult best;
    best.best_tau.stop.assign(tree.size(), 0);
    StoppingTime tau;
    tau.stop.assign(tree.size(), 0);

    // Seed the frontier with the first stage >= m reachable without choice.
    std::vector<int> frontier;
    std::vector<int> walk{0};
    while (!walk.empty()) {
        const int id = walk.back();
        walk.pop_back();
        if (tree.nodes[id].stage >= m || tree.terminal(id)) {
            frontier.push_back(id);
        } else {
            for (int c : tree.nodes[id].children) walk.push_back(c);
        }
    }
    enumerate_rec(tree, onestep, m, sense, frontier, tau, best);
    return best;
}

SupermartingaleReport check_supermartingale(const std::vector<double>& values,
                                            const FiltrationTree& tree,
                                            const std::vector<RiskSpec>& onestep) {
    tree.validate();
    require_specs(tree, onestep);
    if (values.size() != tree.size())
        throw ValidationError("process does not cover the tree");
    SupermartingaleReport rep;
    for (int t = 0; t < tree.horizon(); ++t)
        for (int id : tree.levels[t]) {
            if (tree.terminal(id)) continue;
            const double cond =
                evaluate(onestep[t], tree.child_distribution(id, values));
            if (values[id] < cond - kEqTol) {
                rep.holds = false;
                rep.violating_node = id;
                rep.gap = cond - values[id];
                return rep;
            }
        }
    return rep;
}

DelayOrderingReport check_delay_ordering(const FiltrationTree& tree,
                                         const std::vector<RiskSpec>& specs_low,
                                         const std::vector<RiskSpec>& specs_high) {
    tree.validate();
    require_specs(tree, specs_low);
    require_specs(tree, specs_high);

    const SnellResult low = snell_envelope(tree, specs_low, SnellMode::MaxStop);
    const SnellResult high = snell_envelope(tree, specs_high, SnellMode::MaxStop);

    DelayOrderingReport rep;
    // Precondition: rho_low <= rho_high on every child distribution either
    // recursion actually evaluates.
    for (int t = 0; t < tree.horizon(); ++t)
        for (int id : tree.levels[t]) {
            if (tree.terminal(id)) continue;
            for (const auto* env : {&low.envelope, &high.envelope}) {
                const auto d = tree.child_distribution(id, *env);
                const double lo = evaluate(specs_low[t], d);
                const double hi = evaluate(specs_high[t], d);
                if (lo > hi + kEqTol) {
                    rep.status = DelayOrderingStatus::PreconditionViolated;
                    std::ostringstream os;
                    os << "node " << id << ": rho_low=" << lo << " > rho_high=" << hi;
                    rep.detail = os.str();
                    return rep;
                }
            }
        }

    for (std::size_t id = 0; id < tree.size(); ++id)
        if (low.envelope[id] > high.envelope[id] + kEqTol) {
            rep.status = DelayOrderingStatus::PropertyFailed;
            std::ostringstream os;
            os << "envelope ordering fails at node " << id;
            rep.detail = os.str();
            return rep;
        }

    const auto tau_low = optimal_stopping_time(low, tree).stop_stage_per_leaf(tree);
    const auto tau_high = optimal_stopping_time(high, tree).stop_stage_per_leaf(tree);
    for (std::size_t i = 0; i < tau_low.size(); ++i)
        if (tau_low[i] > tau_high[i]) {
            rep.status = DelayOrderingStatus::PropertyFailed;
            std::ostringstream os;
            os << "stopping-time ordering fails on leaf path " << i;
            rep.detail = os.str();
            return rep;
        }
    return rep;
}

} // namespace riskstop
