#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ehdn/model_ir.hpp"
#include "ehdn/network.hpp"

namespace ehdn {

/// Binary failure matrix over (component, period); 1 = destroyed at t.
struct ScenarioRealization {
    std::vector<std::uint8_t> a;

    static ScenarioRealization none(const Network& net) {
        return {std::vector<std::uint8_t>(net.num_entries(), 0)};
    }
    int total() const {
        int s = 0;
        for (auto v : a) s += v;
        return s;
    }
};

/// u_t = u_{t-1} AND (1 - a_t): destroyed components stay destroyed.
/// Returns the healthy-state matrix over (component, period).
std::vector<std::uint8_t> failure_to_states(const Network& net, const ScenarioRealization& a);

struct DispatchOptions {
    /// Emit the state variables u with their logic rows (the form used inside
    /// the optimization models) instead of folding the states to constants.
    bool u_as_variables = false;
    std::string prefix = "d";
};

/// Variable bookkeeping for one emitted dispatch block; every table is
/// indexed [entity * periods + t], -1 where the variable does not exist.
struct DispatchBuild {
    std::vector<int> line_p, line_q;
    std::vector<int> pipe_f;
    std::vector<int> vsqr;
    std::vector<int> p_shed;
    std::vector<int> h2_shed;
    std::vector<int> sub_p, sub_q;
    std::vector<int> ut;
    std::vector<int> st_e, st_chg, st_dis, st_h2p_f, st_p2h_f, st_h2p_q, st_p2h_q;
    std::vector<int> u;  // only in u_as_variables mode
    LinExpr cost;        // h^T y of this block
    int first_row = 0, last_row = 0;
    int first_var = 0, last_var = 0;
    /// rows whose rhs depends on the scenario: rhs += coef * a[entry]
    /// (recorded only when emitted with a symbolic scenario)
    std::vector<std::pair<int, std::vector<std::pair<int, double>>>> rhs_acoef;
};

/// Emit the post-disaster energy-management LP into `m`.
///  - xe0_vars nonempty: storage allocations are shared model variables
///    (one per station); otherwise xe0_values are folded as constants.
///  - scenario == nullptr requires u_as_variables and leaves the failure
///    vector symbolic (rhs_acoef filled); otherwise the scenario is fixed.
DispatchBuild emit_dispatch(ModelIR& m, const Network& net, const std::vector<int>& xe0_vars,
                            const std::vector<double>& xe0_values,
                            const ScenarioRealization* scenario, const DispatchOptions& opt = {});

/// Per-period component values of one solved dispatch.
struct DispatchSolution {
    double objective = 0.0;
    std::vector<double> line_p, line_q, pipe_f, vsqr, p_shed, q_shed, h2_shed, sub_p, sub_q, ut,
        st_e, st_chg, st_dis, st_h2p_f, st_p2h_f, st_h2p_p, st_p2h_p, st_h2p_q, st_p2h_q;
};

DispatchSolution extract_dispatch(const Network& net, const DispatchBuild& b,
                                  const std::vector<double>& x);

/// Worst nodal-balance residual of an extracted solution (diagnostic).
double dispatch_balance_residual(const Network& net, const DispatchSolution& s,
                                 const std::vector<std::uint8_t>& states);

/// Build and solve one scenario dispatch with fixed storage allocation;
/// states are folded as constants per failure_to_states.
DispatchSolution solve_dispatch(const Network& net, const std::vector<double>& xe0,
                                const ScenarioRealization& a);

/// Same dispatch value but with the u-variable model form (the one embedded
/// in the two-stage optimization); used by oracles and the CCG loop.
double dispatch_value_model_form(const Network& net, const std::vector<double>& xe0,
                                 const ScenarioRealization& a);

}  // namespace ehdn
