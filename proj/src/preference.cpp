#include "riskstop/preference.hpp"

#include <algorithm>
#include <cmath>

#include "riskstop/rng.hpp"

namespace riskstop {

namespace {
constexpr double kEqTol = 1e-10;

void require_range(const FiltrationTree& tree, int t, int u) {
    if (!(0 <= t && t < u && u <= tree.horizon()))
        throw ValidationError("stage range must satisfy 0 <= t < u <= T");
}

std::vector<double> random_process(const FiltrationTree& tree, Rng& rng) {
    std::vector<double> z(tree.size());
    for (double& x : z) x = 2.0 * rng.next_uniform() - 1.0;
    return z;
}
} // namespace

double OneStepMapping::combine(double z, double rho_next) const {
    switch (kind) {
    case OneStepKind::Additive: return z + rho_next;
    case OneStepKind::MaxType:  return std::max(z, rho_next);
    case OneStepKind::MinType:  return std::min(z, rho_next);
    }
    throw ValidationError("unreachable one-step kind");
}

std::vector<double> NestedSystem::evaluate(const FiltrationTree& tree,
                                           const std::vector<double>& process,
                                           int t, int u) const {
    return nested_evaluate(*this, tree, process, t, u);
}

std::vector<double> nested_evaluate(const NestedSystem& system,
                                    const FiltrationTree& tree,
                                    const std::vector<double>& process,
                                    int t, int u) {
    tree.validate();
    require_range(tree, t, u);
    if (static_cast<int>(system.steps().size()) < u)
        throw ValidationError("system needs a one-step mapping per transition");
    if (process.size() != tree.size())
        throw ValidationError("process does not cover the tree");

    std::vector<double> acc(tree.size(), 0.0);
    for (int id : tree.levels[u]) acc[id] = process[id];
    for (int s = u - 1; s >= t; --s) {
        const OneStepMapping& step = system.steps()[s];
        for (int id : tree.levels[s]) {
            const double rho =
                evaluate(step.spec, tree.child_distribution(id, acc));
            acc[id] = step.combine(process[id], rho);
        }
    }
    std::vector<double> out;
    out.reserve(tree.levels[t].size());
    for (int id : tree.levels[t]) out.push_back(acc[id]);
    return out;
}

std::vector<double> FlatConditionalFamily::evaluate(
    const FiltrationTree& tree, const std::vector<double>& process, int t,
    int u) const {
    tree.validate();
    require_range(tree, t, u);
    if (process.size() != tree.size())
        throw ValidationError("process does not cover the tree");

    // Path sums Z_t + ... + Z_u accumulated from stage t down to stage u,
    // with the conditional probability of each stage-u descendant.
    std::vector<double> sums(tree.size(), 0.0);
    std::vector<double> cond_prob(tree.size(), 0.0);
    std::vector<double> out;
    out.reserve(tree.levels[t].size());
    for (int root : tree.levels[t]) {
        sums[root] = process[root];
        cond_prob[root] = 1.0;
        DiscreteDistribution d;
        std::vector<int> stack{root};
        while (!stack.empty()) {
            const int id = stack.back();
            stack.pop_back();
            const TreeNode& n = tree.nodes[id];
            if (n.stage == u) {
                d.atoms.push_back(sums[id]);
                d.probs.push_back(cond_prob[id]);
                continue;
            }
            for (std::size_t c = 0; c < n.children.size(); ++c) {
                const int cid = n.children[c];
                sums[cid] = sums[id] + process[cid];
                cond_prob[cid] = cond_prob[id] * n.child_probs[c];
                stack.push_back(cid);
            }
        }
        d.validate();
        out.push_back(riskstop::evaluate(spec_, d));
    }
    return out;
}

PropertyReport check_recursivity(const PreferenceFamily& family,
                                 const FiltrationTree& tree, int t, int v,
                                 int u, std::size_t trials, std::uint64_t seed) {
    tree.validate();
    if (!(t < v && v < u))
        throw ValidationError("recursivity check needs t < v < u");
    require_range(tree, t, u);

    PropertyReport rep;
    Rng rng(seed);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        ++rep.trials;
        const auto z = random_process(tree, rng);

        const auto lhs = family.evaluate(tree, z, t, u);

        // Tail value R_{v,u} substituted for the stage-v slice.
        const auto tail = family.evaluate(tree, z, v, u);
        auto spliced = z;
        for (std::size_t i = 0; i < tree.levels[v].size(); ++i)
            spliced[tree.levels[v][i]] = tail[i];
        const auto rhs = family.evaluate(tree, spliced, t, v);

        for (std::size_t i = 0; i < lhs.size(); ++i) {
            if (std::fabs(lhs[i] - rhs[i]) > kEqTol) {
                rep.holds = false;
                PropertyCounterexample ce;
                ce.process = z;
                ce.t = t; ce.v = v; ce.u = u;
                ce.node = tree.levels[t][i];
                ce.lhs = lhs[i];
                ce.rhs = rhs[i];
                rep.counterexample = std::move(ce);
                return rep;
            }
        }
    }
    return rep;
}

namespace {

bool leq(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i] + kEqTol) return false;
    return true;
}

bool strictly_below(const std::vector<double>& a, const std::vector<double>& b,
                    double gap) {
    if (!leq(a, b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] < b[i] - gap) return true;
    return false;
}

// The premise requires a material gap; the conclusion accepts any strict
// gap. One-step mappings are 1-Lipschitz and conditional probabilities
// shrink differences, so a premise gap of 1e-4 cannot decay below 1e-12
// across a desk-scale tree, while exact wash-outs stay at fp-noise level.
constexpr double kPremiseGap = 1e-4;
constexpr double kConclusionGap = 1e-12;

} // namespace

PropertyReport check_dynamic_consistency(const PreferenceFamily& family,
                                         const FiltrationTree& tree,
                                         std::size_t trials, std::uint64_t seed,
                                         bool strict) {
    tree.validate();
    const int T = tree.horizon();
    if (T < 2) throw ValidationError("consistency check needs T >= 2");

    PropertyReport rep;
    Rng rng(seed);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        ++rep.trials;
        const int u = 2 + static_cast<int>(rng.next_u64() %
                                           static_cast<std::uint64_t>(T - 1));
        const int t = 1 + static_cast<int>(rng.next_u64() %
                                           static_cast<std::uint64_t>(u - 1));
        const int s = static_cast<int>(rng.next_u64() %
                                       static_cast<std::uint64_t>(t));

        auto z = random_process(tree, rng);
        auto z2 = random_process(tree, rng);
        // Agreement on stages s..t-1.
        for (int st = s; st < t; ++st)
            for (int id : tree.levels[st]) z2[id] = z[id];
        // Half the trials perturb a single node at stage >= t upward, which
        // biases the sample toward comparable pairs.
        if (trial % 2 == 0) {
            z2 = z;
            const auto& lvl = tree.levels[t + static_cast<int>(
                rng.next_u64() % static_cast<std::uint64_t>(u - t + 1))];
            const int id = lvl[rng.next_u64() % lvl.size()];
            z2[id] += 0.1 + rng.next_uniform();
        }

        const auto later_a = family.evaluate(tree, z, t, u);
        const auto later_b = family.evaluate(tree, z2, t, u);

        const bool premise = strict
                                 ? strictly_below(later_a, later_b, kPremiseGap)
                                 : leq(later_a, later_b);
        if (!premise) continue;

        const auto early_a = family.evaluate(tree, z, s, u);
        const auto early_b = family.evaluate(tree, z2, s, u);
        const bool conclusion =
            strict ? strictly_below(early_a, early_b, kConclusionGap)
                   : leq(early_a, early_b);
        if (!conclusion) {
            rep.holds = false;
            PropertyCounterexample ce;
            ce.process = z;
            ce.process_other = z2;
            ce.s = s; ce.t = t; ce.u = u;
            ce.lhs = early_a.empty() ? 0.0 : early_a[0];
            ce.rhs = early_b.empty() ? 0.0 : early_b[0];
            rep.counterexample = std::move(ce);
            return rep;
        }
    }
    return rep;
}

} // namespace riskstop
