#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "dro/error.hpp"
#include "dro/milp/model.hpp"
#include "dro/milp/simplex.hpp"

namespace dro::milp {

namespace detail {

inline std::int64_t lp_iteration_budget(const MilpModel& m) {
    return 200000 + 60 * static_cast<std::int64_t>(m.vars.size() + m.rows.size());
}

inline LpStatus robust_solve(Simplex& spx, const MilpModel& model,
                             std::chrono::steady_clock::time_point deadline) {
    const std::int64_t budget = lp_iteration_budget(model);
    LpStatus st = spx.solve(budget, deadline);
    if (st == LpStatus::Optimal || st == LpStatus::Infeasible || st == LpStatus::Unbounded ||
        st == LpStatus::TimeLimit)
        return st;
    // stalled or singular: restart cold with Bland's rule
    spx.reset_to_slack_basis();
    st = spx.solve(4 * budget, deadline, /*bland=*/true);
    if (st == LpStatus::IterLimit || st == LpStatus::Singular)
        throw Error(ErrorCode::NumericalFailure, "simplex failed to converge under Bland's rule");
    return st;
}

} // namespace detail

/// Solves the LP relaxation (integrality ignored).  Optimality is certified
/// by a complementary-slackness / reduced-cost sign check; a failed
/// certificate is retried under Bland's rule and reported, never silently
/// wrong.
inline Solution solve_lp(const MilpModel& model, const SolverOptions& opts = {}) {
    opts.validate();
    auto deadline = std::chrono::steady_clock::time_point::max();
    if (std::isfinite(opts.time_limit))
        deadline = std::chrono::steady_clock::now() +
                   std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(opts.time_limit));

    Simplex spx(model);
    LpStatus st = detail::robust_solve(spx, model, deadline);

    Solution sol;
    sol.lp_iterations = spx.iterations_total;
    switch (st) {
    case LpStatus::Infeasible: sol.status = SolveStatus::Infeasible; return sol;
    case LpStatus::Unbounded: sol.status = SolveStatus::Unbounded; return sol;
    case LpStatus::TimeLimit: sol.status = SolveStatus::TimeLimit; return sol;
    default: break;
    }

    for (int round = 0;; ++round) {
        const double pviol = max_violation(model, spx.structural_values());
        const double dviol = spx.dual_infeasibility();
        if (pviol <= opts.feas_tol && dviol <= 1e-7) break;
        if (round >= 1)
            throw Error(ErrorCode::NumericalFailure,
                        "optimality certificate failed (primal " + std::to_string(pviol) +
                            ", dual " + std::to_string(dviol) + ")");
        spx.reset_to_slack_basis();
        st = spx.solve(4 * detail::lp_iteration_budget(model), deadline, /*bland=*/true);
        if (st != LpStatus::Optimal)
            throw Error(ErrorCode::NumericalFailure, "certificate repair failed");
    }

    sol.status = SolveStatus::Optimal;
    sol.x = spx.structural_values();
    sol.objective = spx.objective_value();
    sol.bound = sol.objective;
    sol.gap = 0.0;
    sol.lp_iterations = spx.iterations_total;
    return sol;
}

/// Optional trace of the branch-and-bound search, one entry per processed
/// node: (best dual bound, incumbent objective), both in the model sense.
struct SearchTrace {
    std::vector<std::pair<double, double>> nodes;
};

inline std::pair<double, double> global_bound_pair(double sense_mult,
                                                   const std::multiset<double>& open_bounds,
                                                   double inc_score, bool have_inc) {
    double b = have_inc ? inc_score : -kInf;
    if (!open_bounds.empty()) b = std::max(b, *open_bounds.rbegin());
    return {sense_mult * b, have_inc ? sense_mult * inc_score : std::nan("")};
}

/// Branch-and-bound on the binary variables over LP relaxations.
/// Deterministic given fixed options: node-selection ties break by lowest
/// node id, branching ties by lowest variable index.
inline Solution solve_milp(const MilpModel& model, const SolverOptions& opts = {},
                           SearchTrace* trace = nullptr) {
    opts.validate();
    model.validate();

    std::vector<int> binaries;
    for (int j = 0; j < static_cast<int>(model.vars.size()); ++j)
        if (model.vars[j].type == VarType::Binary) binaries.push_back(j);
    if (binaries.empty()) return solve_lp(model, opts);

    const auto t_start = std::chrono::steady_clock::now();
    auto deadline = std::chrono::steady_clock::time_point::max();
    if (std::isfinite(opts.time_limit))
        deadline = t_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                 std::chrono::duration<double>(opts.time_limit));

    const double sense_mult = model.obj_sense == ObjSense::Maximize ? 1.0 : -1.0;
    auto score_of = [&](double obj) { return sense_mult * obj; };

    Simplex spx(model);

    struct Node {
        std::int64_t id;
        int parent;     // index into pool, -1 for root
        int var = -1;   // branching variable (bound override)
        double lo = 0.0, hi = 0.0;
        double bound_score; // inherited dual bound (score space)
        int depth = 0;
    };
    std::vector<Node> pool;
    pool.reserve(1024);

    auto cmp = [&](int a, int b) {
        if (pool[a].bound_score != pool[b].bound_score)
            return pool[a].bound_score < pool[b].bound_score; // larger bound first
        return pool[a].id > pool[b].id;                       // then lower id
    };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> best_first(cmp);
    std::vector<int> dfs_stack;
    std::multiset<double> open_bounds;

    auto push_node = [&](int idx) {
        open_bounds.insert(pool[idx].bound_score);
        if (opts.node_selection == NodeSelection::BestBound)
            best_first.push(idx);
        else
            dfs_stack.push_back(idx);
    };
    auto pop_node = [&]() {
        int idx;
        if (opts.node_selection == NodeSelection::BestBound) {
            idx = best_first.top();
            best_first.pop();
        } else {
            idx = dfs_stack.back();
            dfs_stack.pop_back();
        }
        open_bounds.erase(open_bounds.find(pool[idx].bound_score));
        return idx;
    };
    auto open_empty = [&]() {
        return opts.node_selection == NodeSelection::BestBound ? best_first.empty()
                                                               : dfs_stack.empty();
    };

    // pseudo-cost state: average objective degradation per unit of fraction
    std::vector<double> pc_sum_up(model.vars.size(), 0.0), pc_sum_dn(model.vars.size(), 0.0);
    std::vector<int> pc_cnt_up(model.vars.size(), 0), pc_cnt_dn(model.vars.size(), 0);

    double inc_score = -kInf;
    std::vector<double> inc_x;
    bool have_inc = false;

    std::vector<std::pair<int, std::pair<double, double>>> active_overrides;
    auto clear_overrides = [&]() {
        for (const auto& [var, b] : active_overrides) spx.restore_model_bounds(var);
        active_overrides.clear();
    };
    auto materialize = [&](int idx) {
        clear_overrides();
        for (int cur = idx; cur >= 0; cur = pool[cur].parent) {
            if (pool[cur].var < 0) continue;
            // nearest override along the chain wins
            bool seen = false;
            for (const auto& [var, b] : active_overrides)
                if (var == pool[cur].var) { seen = true; break; }
            if (seen) continue;
            spx.set_bounds(pool[cur].var, pool[cur].lo, pool[cur].hi);
            active_overrides.push_back({pool[cur].var, {pool[cur].lo, pool[cur].hi}});
        }
    };

    auto prune_eps = [&]() {
        if (opts.objective_granularity > 0.0)
            return opts.objective_granularity * (1.0 - 1e-6);
        return 1e-9 * std::max(1.0, std::abs(inc_score));
    };

    std::int64_t next_id = 0, processed = 0;
    pool.push_back({next_id++, -1, -1, 0.0, 0.0, kInf, 0});
    push_node(0);

    Solution out;
    SolveStatus final_status = SolveStatus::Optimal;
    bool gap_closed = false;

    auto frac_of = [&](const std::vector<double>& x, int j) {
        return std::abs(x[j] - std::round(x[j]));
    };

    while (!open_empty()) {
        if (deadline != std::chrono::steady_clock::time_point::max() &&
            std::chrono::steady_clock::now() >= deadline) {
            final_status = SolveStatus::TimeLimit;
            break;
        }
        if (opts.node_limit >= 0 && processed >= opts.node_limit) {
            final_status = SolveStatus::NodeLimit;
            break;
        }
        if (have_inc && !open_bounds.empty()) {
            const double gb = std::max(inc_score, *open_bounds.rbegin());
            if ((gb - inc_score) / std::max(1.0, std::abs(inc_score)) <= opts.rel_gap) {
                gap_closed = true;
                break;
            }
        }

        const int idx = pop_node();
        if (have_inc && pool[idx].bound_score <= inc_score + prune_eps()) continue;

        materialize(idx);
        ++processed;

        LpStatus st = detail::robust_solve(spx, model, deadline);
        if (st == LpStatus::TimeLimit) {
            final_status = SolveStatus::TimeLimit;
            break;
        }
        if (st == LpStatus::Infeasible) {
            if (trace) trace->nodes.push_back(global_bound_pair(sense_mult, open_bounds, inc_score, have_inc));
            continue;
        }
        if (st == LpStatus::Unbounded) {
            if (idx == 0) {
                out.status = SolveStatus::Unbounded;
                out.nodes = processed;
                return out;
            }
            throw Error(ErrorCode::NumericalFailure, "child node unbounded under tightened bounds");
        }

        const double lp_score = std::min(score_of(spx.objective_value()), pool[idx].bound_score);
        out.lp_iterations = spx.iterations_total;
        if (have_inc && lp_score <= inc_score + prune_eps()) {
            if (trace) trace->nodes.push_back(global_bound_pair(sense_mult, open_bounds, inc_score, have_inc));
            continue;
        }

        std::vector<double> x = spx.structural_values();
        int branch_var = -1;
        double branch_frac = 0.0;
        {
            double best_score = opts.int_tol;
            for (int j : binaries) {
                const double f = frac_of(x, j);
                double s = f;
                if (opts.branching == BranchRule::PseudoCost && pc_cnt_up[j] + pc_cnt_dn[j] > 0) {
                    const double up = pc_cnt_up[j] ? pc_sum_up[j] / pc_cnt_up[j] : 1.0;
                    const double dn = pc_cnt_dn[j] ? pc_sum_dn[j] / pc_cnt_dn[j] : 1.0;
                    s = f * std::max(up, 1e-6) * std::max(dn, 1e-6);
                    if (f <= opts.int_tol) s = 0.0;
                }
                if (s > best_score) {
                    best_score = s;
                    branch_var = j;
                    branch_frac = f;
                }
            }
        }

        if (branch_var < 0) {
            // integral within tolerance: fix binaries to their rounded values
            // and polish the continuous part, so the incumbent satisfies the
            // rows at full precision
            std::vector<std::pair<int, std::pair<double, double>>> saved = active_overrides;
            for (int j : binaries) {
                const double r = std::round(x[j]);
                spx.set_bounds(j, r, r);
            }
            LpStatus pst = detail::robust_solve(spx, model, deadline);
            if (pst == LpStatus::Optimal) {
                const double cand_score = score_of(spx.objective_value());
                if (!have_inc || cand_score > inc_score + 1e-12) {
                    inc_score = cand_score;
                    inc_x = spx.structural_values();
                    for (int j : binaries) inc_x[j] = std::round(inc_x[j]);
                    have_inc = true;
                }
            }
            // undo the polish fixings, then re-apply this node's overrides
            for (int j : binaries) spx.restore_model_bounds(j);
            active_overrides.clear();
            for (const auto& [var, b] : saved) {
                spx.set_bounds(var, b.first, b.second);
                active_overrides.push_back({var, b});
            }
            if (pst == LpStatus::TimeLimit) {
                final_status = SolveStatus::TimeLimit;
                break;
            }
            if (trace) trace->nodes.push_back(global_bound_pair(sense_mult, open_bounds, inc_score, have_inc));
            continue;
        }

        // children: the branch matching the LP rounding is explored first in
        // depth-first mode; ids are assigned down-branch first
        const double xv = x[branch_var];
        const int down = static_cast<int>(pool.size());
        pool.push_back({next_id++, idx, branch_var, 0.0, 0.0, lp_score, pool[idx].depth + 1});
        const int up = static_cast<int>(pool.size());
        pool.push_back({next_id++, idx, branch_var, 1.0, 1.0, lp_score, pool[idx].depth + 1});

        if (opts.branching == BranchRule::PseudoCost) {
            // record degradation estimates lazily when children get solved;
            // a simple surrogate: charge the parent fraction now
            pc_sum_dn[branch_var] += branch_frac;
            pc_cnt_dn[branch_var] += 1;
            pc_sum_up[branch_var] += 1.0 - branch_frac;
            pc_cnt_up[branch_var] += 1;
        }

        if (opts.node_selection == NodeSelection::DepthFirst && xv >= 0.5) {
            push_node(down);
            push_node(up); // popped first
        } else {
            push_node(up);
            push_node(down);
        }
        if (trace) trace->nodes.push_back(global_bound_pair(sense_mult, open_bounds, inc_score, have_inc));
    }

    // final bound over the remaining open nodes
    double bound_score = have_inc ? inc_score : -kInf;
    if (!open_bounds.empty()) bound_score = std::max(bound_score, *open_bounds.rbegin());

    out.nodes = processed;
    if (!have_inc) {
        if (final_status == SolveStatus::Optimal) {
            out.status = SolveStatus::Infeasible;
        } else {
            out.status = final_status;
            out.bound = sense_mult * bound_score;
        }
        return out;
    }

    out.x = inc_x;
    out.objective = sense_mult * inc_score;
    out.bound = sense_mult * bound_score;
    out.gap = std::max(0.0, (bound_score - inc_score) / std::max(1.0, std::abs(inc_score)));
    out.lp_iterations = spx.iterations_total;
    if (final_status == SolveStatus::Optimal && !gap_closed) {
        // exhausted: the incumbent is proven optimal
        out.bound = out.objective;
        out.gap = 0.0;
        out.status = SolveStatus::Optimal;
    } else if (gap_closed || out.gap <= opts.rel_gap) {
        out.status = SolveStatus::Optimal;
    } else {
        out.status = final_status;
    }

    // an Optimal claim must satisfy every row and the integrality tolerance
    if (out.status == SolveStatus::Optimal) {
        if (max_violation(model, out.x) > 10 * opts.feas_tol)
            throw Error(ErrorCode::NumericalFailure, "incumbent violates rows after solve");
        for (int j : binaries) {
            if (std::abs(out.x[j] - std::round(out.x[j])) > opts.int_tol)
                throw Error(ErrorCode::NumericalFailure, "incumbent violates integrality");
        }
    }
    return out;
}

} // namespace dro::milp
