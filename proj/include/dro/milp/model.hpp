#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dro/error.hpp"

namespace dro::milp {

enum class VarType { Continuous, Binary };
enum class RowSense { LE, GE, EQ };
enum class ObjSense { Maximize, Minimize };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Variable {
    std::string name;
    double lb = 0.0;
    double ub = kInf;
    VarType type = VarType::Continuous;
};

struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;
    RowSense sense = RowSense::LE;
    double rhs = 0.0;
};

/// Sparse mixed-integer linear model: variables with bounds/integrality,
/// rows as sparse linear inequalities/equalities, linear objective.
struct MilpModel {
    std::vector<Variable> vars;
    std::vector<Row> rows;
    std::vector<std::pair<int, double>> objective;
    ObjSense obj_sense = ObjSense::Maximize;

    int add_var(std::string name, double lb, double ub, VarType type = VarType::Continuous) {
        vars.push_back({std::move(name), lb, ub, type});
        return static_cast<int>(vars.size()) - 1;
    }
    int add_binary(std::string name) { return add_var(std::move(name), 0.0, 1.0, VarType::Binary); }
    int add_row(std::string name, std::vector<std::pair<int, double>> coeffs, RowSense sense,
                double rhs) {
        rows.push_back({std::move(name), std::move(coeffs), sense, rhs});
        return static_cast<int>(rows.size()) - 1;
    }

    std::size_t num_binaries() const {
        std::size_t n = 0;
        for (const auto& v : vars)
            if (v.type == VarType::Binary) ++n;
        return n;
    }

    void validate() const {
        const int n = static_cast<int>(vars.size());
        for (const auto& v : vars) {
            if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
                throw Error(ErrorCode::InvalidModel, "bad bounds on variable " + v.name);
            if (v.type == VarType::Binary &&
                !(v.lb >= 0.0 && v.ub <= 1.0 && std::isfinite(v.lb) && std::isfinite(v.ub)))
                throw Error(ErrorCode::InvalidModel,
                            "binary variable " + v.name + " must have bounds within [0,1]");
        }
        for (const auto& r : rows) {
            for (const auto& [j, c] : r.coeffs) {
                if (j < 0 || j >= n)
                    throw Error(ErrorCode::InvalidModel, "row " + r.name + " references unknown variable");
                if (!std::isfinite(c))
                    throw Error(ErrorCode::InvalidModel, "row " + r.name + " has a non-finite coefficient");
            }
            if (!std::isfinite(r.rhs))
                throw Error(ErrorCode::InvalidModel, "row " + r.name + " has a non-finite rhs");
        }
        for (const auto& [j, c] : objective) {
            if (j < 0 || j >= n || !std::isfinite(c))
                throw Error(ErrorCode::InvalidModel, "objective references unknown variable");
        }
    }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit, NodeLimit, TimeLimit };

inline const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::GapLimit: return "gap_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    }
    return "unknown";
}

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;
    double bound = std::numeric_limits<double>::quiet_NaN(); // best dual bound
    double gap = std::numeric_limits<double>::quiet_NaN();
    std::int64_t nodes = 0;
    std::int64_t lp_iterations = 0;
};

enum class BranchRule { MostFractional, PseudoCost };
enum class NodeSelection { BestBound, DepthFirst };

struct SolverOptions {
    double int_tol = 1e-6;
    double feas_tol = 1e-7;
    double rel_gap = 1e-6;
    std::int64_t node_limit = -1;   // < 0: unlimited
    double time_limit = kInf;       // seconds of wall time
    BranchRule branching = BranchRule::MostFractional;
    NodeSelection node_selection = NodeSelection::BestBound;
    // When > 0, integer-feasible objective values are known to live on a
    // lattice with this spacing; nodes that cannot improve the incumbent by a
    // full lattice step are pruned.
    double objective_granularity = 0.0;

    void validate() const {
        if (!(int_tol > 0.0) || !(feas_tol > 0.0) || !(rel_gap > 0.0))
            throw Error(ErrorCode::InvalidModel, "solver tolerances must be positive");
    }
};

/// Residual of a row at the point x: positive means violated.
inline double row_violation(const Row& r, const std::vector<double>& x) {
    double a = 0.0;
    for (const auto& [j, c] : r.coeffs) a += c * x[static_cast<std::size_t>(j)];
    switch (r.sense) {
    case RowSense::LE: return a - r.rhs;
    case RowSense::GE: return r.rhs - a;
    case RowSense::EQ: return std::abs(a - r.rhs);
    }
    return 0.0;
}

inline double max_violation(const MilpModel& m, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& r : m.rows) worst = std::max(worst, row_violation(r, x));
    for (std::size_t j = 0; j < m.vars.size(); ++j) {
        worst = std::max(worst, m.vars[j].lb - x[j]);
        worst = std::max(worst, x[j] - m.vars[j].ub);
    }
    return worst;
}

} // namespace dro::milp
