#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dro/milp/model.hpp"

namespace dro::milp {

namespace detail {

inline std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// LP-format identifiers may not contain operators or whitespace and may not
// begin with a digit, a period, or the letter pair e/E followed by a digit.
// Offending names are rewritten (spaces become underscores, other bad
// characters become '_', a leading 'v_' is prefixed when needed).
inline std::string sanitize_name(const std::string& name, std::size_t fallback_idx) {
    std::string out;
    out.reserve(name.size());
    for (char ch : name) {
        const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '#' ||
                        ch == '$' || ch == '.' || ch == '(' || ch == ')';
        out.push_back(ok ? ch : '_');
    }
    if (out.empty()) out = "v" + std::to_string(fallback_idx);
    const char c0 = out.front();
    bool needs_prefix = std::isdigit(static_cast<unsigned char>(c0)) || c0 == '.';
    if ((c0 == 'e' || c0 == 'E') &&
        (out.size() == 1 || std::isdigit(static_cast<unsigned char>(out[1]))))
        needs_prefix = true;
    if (needs_prefix) out = "v_" + out;
    return out;
}

inline void append_linear(std::string& s, const std::vector<std::pair<int, double>>& terms,
                          const std::vector<std::string>& names) {
    bool first = true;
    int on_line = 0;
    for (const auto& [j, c] : terms) {
        if (c == 0.0) continue;
        if (first) {
            if (c < 0.0) s += "- ";
            first = false;
        } else {
            s += (c < 0.0) ? " - " : " + ";
        }
        const double a = std::abs(c);
        if (a != 1.0) {
            s += num17(a);
            s += ' ';
        }
        s += names[static_cast<std::size_t>(j)];
        if (++on_line == 6) {
            s += '\n';
            s += "     ";
            on_line = 0;
        }
    }
    if (first) s += "0 " + names[0];
}

} // namespace detail

/// Emits the model in CPLEX LP textual format with 17 significant digits.
inline std::string export_lp_text(const MilpModel& model) {
    model.validate();

    std::vector<std::string> names(model.vars.size());
    for (std::size_t j = 0; j < model.vars.size(); ++j)
        names[j] = detail::sanitize_name(model.vars[j].name, j);

    std::string s;
    s.reserve(4096 + 64 * model.rows.size());
    s += model.obj_sense == ObjSense::Maximize ? "Maximize\n" : "Minimize\n";
    s += " obj: ";
    detail::append_linear(s, model.objective, names);
    s += "\nSubject To\n";
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        const auto& r = model.rows[i];
        s += ' ';
        s += detail::sanitize_name(r.name.empty() ? "c" + std::to_string(i) : r.name, i);
        s += ": ";
        detail::append_linear(s, r.coeffs, names);
        switch (r.sense) {
        case RowSense::LE: s += " <= "; break;
        case RowSense::GE: s += " >= "; break;
        case RowSense::EQ: s += " = "; break;
        }
        s += detail::num17(r.rhs);
        s += '\n';
    }
    s += "Bounds\n";
    for (std::size_t j = 0; j < model.vars.size(); ++j) {
        const auto& v = model.vars[j];
        s += ' ';
        if (v.lb == v.ub) {
            s += names[j] + " = " + detail::num17(v.lb);
        } else if (!std::isfinite(v.lb) && !std::isfinite(v.ub)) {
            s += names[j] + " free";
        } else {
            if (std::isfinite(v.lb))
                s += detail::num17(v.lb) + " <= ";
            else
                s += "-inf <= ";
            s += names[j];
            if (std::isfinite(v.ub)) s += " <= " + detail::num17(v.ub);
        }
        s += '\n';
    }
    bool any_bin = false;
    for (const auto& v : model.vars)
        if (v.type == VarType::Binary) { any_bin = true; break; }
    if (any_bin) {
        s += "Binaries\n";
        int on_line = 0;
        for (std::size_t j = 0; j < model.vars.size(); ++j) {
            if (model.vars[j].type != VarType::Binary) continue;
            s += ' ';
            s += names[j];
            if (++on_line == 8) {
                s += '\n';
                on_line = 0;
            }
        }
        if (on_line) s += '\n';
    }
    s += "End\n";
    return s;
}

} // namespace dro::milp
