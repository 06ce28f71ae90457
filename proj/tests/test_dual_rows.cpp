#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dro/dual_rows.hpp"
#include "dro/milp/branch_bound.hpp"
#include "dro/model_build.hpp"

using namespace dro;
using milp::RowSense;

namespace {

AmbiguityBlock test_block(std::size_t n, double delta = 0.1, bool with_moments = true) {
    AmbiguityBlock b;
    b.grid = build_grid(0.0, delta * double(n - 1), delta);
    b.bin_caps.assign(n, 2.0 / (delta * double(n))); // plenty of mass
    if (with_moments) {
        const double mid = 0.5 * (b.grid.t0 + b.grid.t_max);
        b.moments = MomentSpec{mid - delta, mid + delta, 2 * mid, -1.0};
    }
    return b;
}

double row_activity(const TaggedRow& r, const std::vector<double>& x) {
    double a = 0.0;
    for (auto [j, c] : r.coeffs) a += c * x[std::size_t(j)];
    return a;
}

bool row_holds(const TaggedRow& r, const std::vector<double>& x, double tol = 1e-9) {
    const double a = row_activity(r, x);
    switch (r.sense) {
    case RowSense::LE: return a <= r.rhs + tol;
    case RowSense::GE: return a >= r.rhs - tol;
    case RowSense::EQ: return std::abs(a - r.rhs) <= tol;
    }
    return false;
}

} // namespace

TEST_CASE("family row counts follow the 2(2N-1) / (2N-1) formula") {
    auto block = test_block(950, 0.001);
    milp::MilpModel model;
    auto enc = allocate_encoding(model, block.grid);
    auto bv = allocate_block_vars(model, block, "");

    SECTION("positive height emits base plus strengthened families") {
        auto rows = emit_families(block, enc, bv, HeightSpec::fixed(0.0125));
        CHECK(rows.count(RowTag::BaseC) == 950);
        CHECK(rows.count(RowTag::BaseD) == 949);
        CHECK(rows.count(RowTag::StrongPlus) == 950);
        CHECK(rows.count(RowTag::StrongMinus) == 949);
        CHECK(rows.rows.size() == 2 * (2 * 950 - 1));
    }
    SECTION("negative height emits base families only") {
        auto rows = emit_families(block, enc, bv, HeightSpec::fixed(-0.2375));
        CHECK(rows.rows.size() == 2 * 950 - 1);
        CHECK(rows.count(RowTag::StrongPlus) == 0);
    }
}

TEST_CASE("emitted rows stay sparse") {
    const std::size_t n = 40;
    auto block = test_block(n);
    milp::MilpModel model;
    auto enc = allocate_encoding(model, block.grid);
    auto bv = allocate_block_vars(model, block, "");
    auto rows = emit_families(block, enc, bv, HeightSpec::fixed(0.5));
    const std::size_t row_cap = std::max<std::size_t>(6, n + 6);
    for (const auto& r : rows.rows) {
        CHECK(r.coeffs.size() <= row_cap);
        CHECK(r.coeffs.size() <= 8); // family rows touch b, dm/dp, z_k and y only
    }
    auto enc_rows = emit_encoding(block.grid, enc);
    CHECK(enc_rows.rows.size() == n + 4);
    for (const auto& r : enc_rows.rows) {
        if (r.name == "enc_xminus" || r.name == "enc_xplus") CHECK(r.coeffs.size() == n + 1);
        else if (r.name == "enc_jumps") CHECK(r.coeffs.size() == 2 * n);
        else if (r.name == "enc_width") CHECK(r.coeffs.size() == n + 2);
        else CHECK(r.coeffs.size() <= 4);
    }
}

TEST_CASE("dual objective row evaluates as the block inner product") {
    auto block = test_block(11, 0.1, true);
    block.moments = MomentSpec{3.0, 3.0, 6.0, -0.5};
    block.bin_caps.assign(11, 1.0);
    milp::MilpModel model;
    auto enc = allocate_encoding(model, block.grid);
    auto bv = allocate_block_vars(model, block, "");
    auto row = emit_dual_objective_row(block, bv, 1.0);

    std::vector<double> x(model.vars.size(), 0.0);
    x[std::size_t(bv.y[0])] = 1.0;
    CHECK(row_activity(row, x) == Catch::Approx(1.0));
    CHECK(row_holds(row, x));

    std::fill(x.begin(), x.end(), 0.0);
    x[std::size_t(bv.y[2])] = 1.0;
    x[std::size_t(bv.y[3])] = 1.0;
    x[std::size_t(bv.y[4])] = 1.0;
    CHECK(row_activity(row, x) == Catch::Approx(-0.5)); // -3 + 3 - 0.5

    std::fill(x.begin(), x.end(), 0.0);
    for (int z : bv.z) x[std::size_t(z)] = 1.0;
    CHECK(row_activity(row, x) == Catch::Approx(-1.1)); // -0.1 * 11 bins
}

TEST_CASE("hand-checked encoding assignment on a 6-point grid") {
    auto grid = build_grid(0.0, 0.5, 0.1);
    milp::MilpModel model;
    auto enc = allocate_encoding(model, grid);
    auto rows = emit_encoding(grid, enc);

    std::vector<double> x(model.vars.size(), 0.0);
    // window [0.2, 0.4]: b = (0,0,1,1,1,0), up-jump at 0.1, down-jump at 0.4
    x[std::size_t(enc.x_minus)] = 0.2;
    x[std::size_t(enc.x_plus)] = 0.4;
    for (int k : {2, 3, 4}) x[std::size_t(enc.b[k])] = 1.0;
    x[std::size_t(enc.dm[1])] = 1.0;
    x[std::size_t(enc.dp[4])] = 1.0;
    for (const auto& r : rows.rows) {
        INFO(r.name);
        CHECK(row_holds(r, x));
    }

    // all-zero b violates the width identity once x^- <= x^+ is imposed
    std::fill(x.begin(), x.end(), 0.0);
    bool width_violated = false;
    for (const auto& r : rows.rows)
        if (r.name == "enc_width" && !row_holds(r, x)) width_violated = true;
    CHECK(width_violated);
}

TEST_CASE("encoding equivalence by brute force on small grids") {
    // Feasible integer assignments of the emitted encoding rows are exactly
    // the contiguous nonempty blocks, with x^-/x^+ recovered by the
    // endpoint rows (grid sizes 3..6, exhaustive).
    for (std::size_t n = 3; n <= 6; ++n) {
        auto grid = build_grid(0.0, 0.1 * double(n - 1), 0.1);
        milp::MilpModel model;
        auto enc = allocate_encoding(model, grid);
        auto rows = emit_encoding(grid, enc);
        const double xm_lb = x_minus_lower_bound(grid);

        std::size_t feasible_count = 0;
        for (unsigned mask = 0; mask < (1u << (3 * n)); ++mask) {
            std::vector<double> x(model.vars.size(), 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                x[std::size_t(enc.b[k])] = (mask >> k) & 1u;
                x[std::size_t(enc.dm[k])] = (mask >> (n + k)) & 1u;
                x[std::size_t(enc.dp[k])] = (mask >> (2 * n + k)) & 1u;
            }
            // x^- and x^+ are pinned by the endpoint recovery rows
            double xm = 0.0, xp = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                xm += (grid[k] + grid.delta) * x[std::size_t(enc.dm[k])];
                xp += grid[k] * x[std::size_t(enc.dp[k])];
            }
            x[std::size_t(enc.x_minus)] = xm;
            x[std::size_t(enc.x_plus)] = xp;

            bool ok = xm >= xm_lb - 1e-9 && xm <= xp + 1e-9;
            for (const auto& r : rows.rows)
                if (ok && !row_holds(r, x)) ok = false;

            // independent contiguity oracle
            int first = -1, last = -1;
            bool contiguous = true;
            for (std::size_t k = 0; k < n; ++k) {
                if (x[std::size_t(enc.b[k])] > 0.5) {
                    if (first < 0) first = int(k);
                    last = int(k);
                }
            }
            if (first < 0) contiguous = false;
            for (int k = first; contiguous && k <= last; ++k)
                if (x[std::size_t(enc.b[std::size_t(k)])] < 0.5) contiguous = false;
            bool reference = contiguous && first >= 1;
            if (reference) {
                for (std::size_t k = 0; k < n; ++k) {
                    const bool dm_ok = (int(k) == first - 1) == (x[std::size_t(enc.dm[k])] > 0.5);
                    const bool dp_ok = (int(k) == last) == (x[std::size_t(enc.dp[k])] > 0.5);
                    if (!dm_ok || !dp_ok) reference = false;
                }
            }
            INFO("n=" << n << " mask=" << mask);
            CHECK(ok == reference);
            if (ok) {
                ++feasible_count;
                CHECK(xm == Catch::Approx(grid[std::size_t(first)]));
                CHECK(xp == Catch::Approx(grid[std::size_t(last)]));
            }
        }
        // number of windows [i, j] with 1 <= i <= j <= n-1
        CHECK(feasible_count == (n - 1) * n / 2);
    }
}

TEST_CASE("two disjoint blocks need four jumps and violate the budget") {
    auto grid = build_grid(0.0, 0.5, 0.1);
    milp::MilpModel model;
    auto enc = allocate_encoding(model, grid);
    auto rows = emit_encoding(grid, enc);
    std::vector<double> x(model.vars.size(), 0.0);
    // blocks {1} and {3,4}: the difference rows force four jump flags
    x[std::size_t(enc.b[1])] = 1.0;
    x[std::size_t(enc.b[3])] = 1.0;
    x[std::size_t(enc.b[4])] = 1.0;
    x[std::size_t(enc.dm[0])] = 1.0;
    x[std::size_t(enc.dp[1])] = 1.0;
    x[std::size_t(enc.dm[2])] = 1.0;
    x[std::size_t(enc.dp[4])] = 1.0;
    x[std::size_t(enc.x_minus)] = 0.1 + 0.3; // whatever the recovery rows say
    x[std::size_t(enc.x_plus)] = 0.1 + 0.4;
    bool budget_violated = false;
    for (const auto& r : rows.rows)
        if (r.name == "enc_jumps" && !row_holds(r, x)) budget_violated = true;
    CHECK(budget_violated);
}

TEST_CASE("grid too small for the encoding") {
    auto grid = build_grid(0.0, 0.1, 0.1);
    milp::MilpModel model;
    EncodingVars enc;
    enc.x_minus = model.add_var("x_minus", 0.1, 0.1);
    enc.x_plus = model.add_var("x_plus", 0.1, 0.1);
    for (int k = 0; k < 2; ++k) enc.b.push_back(model.add_binary("b"));
    for (int k = 0; k < 2; ++k) enc.dm.push_back(model.add_binary("dm"));
    for (int k = 0; k < 2; ++k) enc.dp.push_back(model.add_binary("dp"));
    CHECK_THROWS_AS(emit_encoding(grid, enc), Error);
}

TEST_CASE("product linearization pins w to x*b at binary endpoints") {
    auto block = test_block(5, 0.1, false);
    GenericSpec spec;
    spec.block = block;
    spec.height_fixed = false;
    spec.height_lo = 0.0;
    spec.height_hi = 1.0;
    spec.rhs_b = -10.0; // inactive dual-objective row
    auto asm_model = assemble_generic(spec);
    auto& model = asm_model.model;
    const auto& h = asm_model.heights[0];
    const auto& enc = asm_model.enc;

    // force b_2 = 1 (window [t1..t2]) and height x = 0.7; maximize/minimize w_2
    model.vars[std::size_t(enc.b[2])].lb = 1.0;
    model.vars[std::size_t(h.var)].lb = 0.7;
    model.vars[std::size_t(h.var)].ub = 0.7;
    model.objective = {{h.w[2], 1.0}};
    model.obj_sense = milp::ObjSense::Maximize;
    auto hi = milp::solve_milp(model);
    REQUIRE(hi.status == milp::SolveStatus::Optimal);
    CHECK(hi.x[std::size_t(h.w[2])] == Catch::Approx(0.7).margin(1e-7));
    model.obj_sense = milp::ObjSense::Minimize;
    auto lo = milp::solve_milp(model);
    REQUIRE(lo.status == milp::SolveStatus::Optimal);
    CHECK(lo.x[std::size_t(h.w[2])] == Catch::Approx(0.7).margin(1e-7));

    // force b_2 = 0 instead: w_2 collapses to 0
    model.vars[std::size_t(enc.b[2])].lb = 0.0;
    model.vars[std::size_t(enc.b[2])].ub = 0.0;
    model.obj_sense = milp::ObjSense::Maximize;
    auto zero_hi = milp::solve_milp(model);
    if (zero_hi.status == milp::SolveStatus::Optimal)
        CHECK(zero_hi.x[std::size_t(h.w[2])] == Catch::Approx(0.0).margin(1e-7));
}
