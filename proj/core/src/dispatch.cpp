#include "ehdn/dispatch.hpp"

#include <cmath>

#include "ehdn/solver.hpp"

namespace ehdn {

std::vector<std::uint8_t> failure_to_states(const Network& net, const ScenarioRealization& a) {
    std::vector<std::uint8_t> u(net.num_entries(), 1);
    for (int c = 0; c < net.num_components(); ++c) {
        std::uint8_t alive = 1;
        for (int t = 0; t < net.periods; ++t) {
            int e = net.entry(c, t);
            alive = static_cast<std::uint8_t>(alive & (1 - a.a[e]));
            u[e] = alive;
        }
    }
    return u;
}

DispatchBuild emit_dispatch(ModelIR& m, const Network& net, const std::vector<int>& xe0_vars,
                            const std::vector<double>& xe0_values,
                            const ScenarioRealization* scenario, const DispatchOptions& opt) {
    const int T = net.periods;
    const int ng = static_cast<int>(net.grid_nodes.size());
    const int nh = static_cast<int>(net.h2_nodes.size());
    const int nl = static_cast<int>(net.lines.size());
    const int np = static_cast<int>(net.pipes.size());
    const int ns = static_cast<int>(net.stations.size());
    if (!opt.u_as_variables && !scenario)
        fail_model("emit_dispatch: constant-state mode needs a scenario");
    if (!xe0_vars.empty() && static_cast<int>(xe0_vars.size()) != ns)
        fail_model("emit_dispatch: xe0_vars must have one entry per station");
    if (xe0_vars.empty() && static_cast<int>(xe0_values.size()) != ns)
        fail_model("emit_dispatch: xe0_values must have one entry per station");

    DispatchBuild b;
    b.first_var = m.num_vars();
    b.first_row = m.num_rows();
    const std::string& px = opt.prefix;

    std::vector<std::uint8_t> states;
    if (scenario) states = failure_to_states(net, *scenario);
    auto healthy = [&](int c, int t) { return states.empty() ? 1 : states[net.entry(c, t)]; };

    auto tbl = [&](std::vector<int>& v, int n) { v.assign(static_cast<size_t>(n) * T, -1); };
    tbl(b.line_p, nl);
    tbl(b.line_q, nl);
    tbl(b.pipe_f, np);
    tbl(b.vsqr, ng);
    tbl(b.p_shed, ng);
    tbl(b.h2_shed, nh);
    tbl(b.sub_p, ng);
    tbl(b.sub_q, ng);
    tbl(b.ut, nh);
    tbl(b.st_e, ns);
    tbl(b.st_chg, ns);
    tbl(b.st_dis, ns);
    tbl(b.st_h2p_f, ns);
    tbl(b.st_p2h_f, ns);
    tbl(b.st_h2p_q, ns);
    tbl(b.st_p2h_q, ns);
    if (opt.u_as_variables) tbl(b.u, nl + np);

    const double vmin2 = net.vmin_pu * net.vmin_pu;
    const double vmax2 = net.vmax_pu * net.vmax_pu;
    const double v0sq = net.v0_pu * net.v0_pu;
    const double flow_scale = 1.0 / (net.v0_pu * net.s_base_kva);

    // -- variables ------------------------------------------------------------
    for (int t = 0; t < T; ++t) {
        for (int l = 0; l < nl; ++l) {
            double cap_p = net.lines[l].p_max, cap_q = net.lines[l].q_max;
            if (!opt.u_as_variables && !healthy(l, t)) cap_p = cap_q = 0.0;
            b.line_p[l * T + t] = m.add_continuous(fmt::format("{}.P[{},{}]", px, l, t), -cap_p, cap_p);
            b.line_q[l * T + t] = m.add_continuous(fmt::format("{}.Q[{},{}]", px, l, t), -cap_q, cap_q);
        }
        for (int p = 0; p < np; ++p) {
            double cap = net.pipes[p].f_max;
            if (!opt.u_as_variables && !healthy(net.pipe_comp(p), t)) cap = 0.0;
            b.pipe_f[p * T + t] = m.add_continuous(fmt::format("{}.F[{},{}]", px, p, t), -cap, cap);
        }
        for (int j = 0; j < ng; ++j) {
            const auto& n = net.grid_nodes[j];
            b.vsqr[j * T + t] = n.is_substation
                                    ? m.add_continuous(fmt::format("{}.V[{},{}]", px, j, t), v0sq, v0sq)
                                    : m.add_continuous(fmt::format("{}.V[{},{}]", px, j, t), vmin2, vmax2);
            b.p_shed[j * T + t] =
                m.add_continuous(fmt::format("{}.Pls[{},{}]", px, j, t), 0.0, n.p_load[t]);
            if (n.is_substation) {
                b.sub_p[j * T + t] =
                    m.add_continuous(fmt::format("{}.Psub[{},{}]", px, j, t), 0.0, n.sub_p_cap);
                b.sub_q[j * T + t] =
                    m.add_continuous(fmt::format("{}.Qsub[{},{}]", px, j, t), 0.0, n.sub_q_cap);
            }
        }
        for (int h = 0; h < nh; ++h) {
            const auto& n = net.h2_nodes[h];
            b.h2_shed[h * T + t] =
                m.add_continuous(fmt::format("{}.Gls[{},{}]", px, h, t), 0.0, n.h2_load[t]);
            if (n.has_transmission_feed())
                b.ut[h * T + t] =
                    m.add_continuous(fmt::format("{}.Fut[{},{}]", px, h, t), 0.0, n.ut_cap);
        }
        for (int s = 0; s < ns; ++s) {
            const auto& st = net.stations[s];
            b.st_e[s * T + t] = m.add_continuous(fmt::format("{}.E[{},{}]", px, s, t), 0.0, st.e_max);
            b.st_chg[s * T + t] =
                m.add_continuous(fmt::format("{}.Fchg[{},{}]", px, s, t), 0.0, st.charge_cap);
            b.st_dis[s * T + t] =
                m.add_continuous(fmt::format("{}.Fdis[{},{}]", px, s, t), 0.0, st.discharge_cap);
            // conversion power caps folded into hydrogen-side flow bounds
            double h2p_cap = st.beta_h2p > 0 ? st.h2p_p_cap / st.beta_h2p : 0.0;
            double p2h_cap = st.beta_p2h > 0 ? st.p2h_p_cap / st.beta_p2h : 0.0;
            b.st_h2p_f[s * T + t] =
                m.add_continuous(fmt::format("{}.Fh2p[{},{}]", px, s, t), 0.0, h2p_cap);
            b.st_p2h_f[s * T + t] =
                m.add_continuous(fmt::format("{}.Fp2h[{},{}]", px, s, t), 0.0, p2h_cap);
            b.st_h2p_q[s * T + t] =
                m.add_continuous(fmt::format("{}.Qh2p[{},{}]", px, s, t), 0.0, st.h2p_q_cap);
            b.st_p2h_q[s * T + t] =
                m.add_continuous(fmt::format("{}.Qp2h[{},{}]", px, s, t), 0.0, st.p2h_q_cap);
        }
        if (opt.u_as_variables) {
            for (int c = 0; c < nl + np; ++c)
                b.u[c * T + t] = m.add_continuous(fmt::format("{}.u[{},{}]", px, c, t), 0.0, 1.0);
        }
    }

    // -- state logic (u-variable mode) -----------------------------------------
    if (opt.u_as_variables) {
        auto add_logic = [&](LinExpr e, RowSense s, double rhs, int entry, double acoef,
                             const std::string& name) {
            int row = m.add_row(std::move(e), s, rhs, name);
            if (!scenario) b.rhs_acoef.push_back({row, {{entry, acoef}}});
            return row;
        };
        for (int c = 0; c < nl + np; ++c)
            for (int t = 0; t < T; ++t) {
                int e = net.entry(c, t);
                double av = scenario ? static_cast<double>(scenario->a[e]) : 0.0;
                // u_t <= 1 - a_t
                add_logic(LinExpr{}.add(b.u[c * T + t], 1.0), RowSense::LE, 1.0 - av, e, -1.0,
                          fmt::format("{}.ulog1[{},{}]", px, c, t));
                if (t == 0) {
                    // u_0 >= 1 - a_0  (written as -u_0 <= -1 + a_0)
                    add_logic(LinExpr{}.add(b.u[c * T + t], -1.0), RowSense::LE, -1.0 + av, e, 1.0,
                              fmt::format("{}.ulog3[{},{}]", px, c, t));
                } else {
                    // u_t <= u_{t-1}
                    m.add_row(LinExpr{}.add(b.u[c * T + t], 1.0).add(b.u[c * T + t - 1], -1.0),
                              RowSense::LE, 0.0, fmt::format("{}.ulog2[{},{}]", px, c, t));
                    // u_t >= u_{t-1} - a_t
                    add_logic(LinExpr{}.add(b.u[c * T + t], -1.0).add(b.u[c * T + t - 1], 1.0),
                              RowSense::LE, av, e, 1.0, fmt::format("{}.ulog3[{},{}]", px, c, t));
                }
            }
    }

    // -- grid rows --------------------------------------------------------------
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < ng; ++j) {
            const auto& n = net.grid_nodes[j];
            LinExpr pbal, qbal;
            for (int l = 0; l < nl; ++l) {
                if (net.lines[l].to == j) {
                    pbal.add(b.line_p[l * T + t], 1.0);
                    qbal.add(b.line_q[l * T + t], 1.0);
                } else if (net.lines[l].from == j) {
                    pbal.add(b.line_p[l * T + t], -1.0);
                    qbal.add(b.line_q[l * T + t], -1.0);
                }
            }
            if (n.is_substation) {
                pbal.add(b.sub_p[j * T + t], 1.0);
                qbal.add(b.sub_q[j * T + t], 1.0);
            }
            for (int s = 0; s < ns; ++s) {
                const auto& st = net.stations[s];
                if (st.grid_node != j) continue;
                pbal.add(b.st_h2p_f[s * T + t], st.beta_h2p);   // fuel cell output
                pbal.add(b.st_p2h_f[s * T + t], -st.beta_p2h);  // electrolyzer draw
                qbal.add(b.st_h2p_q[s * T + t], 1.0);
                qbal.add(b.st_p2h_q[s * T + t], -1.0);
            }
            pbal.add(b.p_shed[j * T + t], 1.0);
            double pf_ratio = n.p_load[t] > 0 ? n.q_load[t] / n.p_load[t] : 0.0;
            qbal.add(b.p_shed[j * T + t], pf_ratio);  // reactive shed tied to active shed
            m.add_row(std::move(pbal), RowSense::EQ, n.p_load[t],
                      fmt::format("{}.pbal[{},{}]", px, j, t));
            m.add_row(std::move(qbal), RowSense::EQ, n.q_load[t],
                      fmt::format("{}.qbal[{},{}]", px, j, t));
        }

        for (int l = 0; l < nl; ++l) {
            const auto& ln = net.lines[l];
            LinExpr drop;
            drop.add(b.vsqr[ln.from * T + t], 1.0).add(b.vsqr[ln.to * T + t], -1.0);
            drop.add(b.line_p[l * T + t], -ln.r_pu * flow_scale);
            drop.add(b.line_q[l * T + t], -ln.x_pu * flow_scale);
            if (!opt.u_as_variables) {
                if (healthy(l, t))
                    m.add_row(std::move(drop), RowSense::EQ, 0.0,
                              fmt::format("{}.vdrop[{},{}]", px, l, t));
                // destroyed: both sides stay inside their own boxes, no coupling
            } else {
                double big_m = (vmax2 - vmin2) +
                               (ln.r_pu * ln.p_max + ln.x_pu * ln.q_max) * flow_scale;
                LinExpr up = drop, dn = drop;
                up.add(b.u[l * T + t], big_m);
                m.add_row(std::move(up), RowSense::LE, big_m,
                          fmt::format("{}.vdropU[{},{}]", px, l, t));
                for (auto& term : dn.terms) term.coef = -term.coef;
                dn.add(b.u[l * T + t], big_m);
                m.add_row(std::move(dn), RowSense::LE, big_m,
                          fmt::format("{}.vdropL[{},{}]", px, l, t));
                // flow gating by the state variable
                m.add_row(LinExpr{}.add(b.line_p[l * T + t], 1.0).add(b.u[l * T + t], -ln.p_max),
                          RowSense::LE, 0.0, fmt::format("{}.pcapU[{},{}]", px, l, t));
                m.add_row(LinExpr{}.add(b.line_p[l * T + t], -1.0).add(b.u[l * T + t], -ln.p_max),
                          RowSense::LE, 0.0, fmt::format("{}.pcapL[{},{}]", px, l, t));
                m.add_row(LinExpr{}.add(b.line_q[l * T + t], 1.0).add(b.u[l * T + t], -ln.q_max),
                          RowSense::LE, 0.0, fmt::format("{}.qcapU[{},{}]", px, l, t));
                m.add_row(LinExpr{}.add(b.line_q[l * T + t], -1.0).add(b.u[l * T + t], -ln.q_max),
                          RowSense::LE, 0.0, fmt::format("{}.qcapL[{},{}]", px, l, t));
            }
        }
    }

    // -- hydrogen rows ----------------------------------------------------------
    for (int t = 0; t < T; ++t) {
        for (int h = 0; h < nh; ++h) {
            const auto& n = net.h2_nodes[h];
            LinExpr bal;
            for (int p = 0; p < np; ++p) {
                if (net.pipes[p].to == h)
                    bal.add(b.pipe_f[p * T + t], 1.0);
                else if (net.pipes[p].from == h)
                    bal.add(b.pipe_f[p * T + t], -1.0);
            }
            if (n.has_transmission_feed()) bal.add(b.ut[h * T + t], 1.0);
            for (int s = 0; s < ns; ++s) {
                const auto& st = net.stations[s];
                if (st.h2_node != h) continue;
                bal.add(b.st_dis[s * T + t], 1.0);
                bal.add(b.st_chg[s * T + t], -1.0);
                bal.add(b.st_h2p_f[s * T + t], -1.0);
                bal.add(b.st_p2h_f[s * T + t], 1.0);
            }
            bal.add(b.h2_shed[h * T + t], 1.0);
            m.add_row(std::move(bal), RowSense::EQ, n.h2_load[t],
                      fmt::format("{}.hbal[{},{}]", px, h, t));
        }
        for (int p = 0; p < np; ++p) {
            if (!opt.u_as_variables) continue;
            int c = net.pipe_comp(p);
            double cap = net.pipes[p].f_max;
            m.add_row(LinExpr{}.add(b.pipe_f[p * T + t], 1.0).add(b.u[c * T + t], -cap),
                      RowSense::LE, 0.0, fmt::format("{}.fcapU[{},{}]", px, p, t));
            m.add_row(LinExpr{}.add(b.pipe_f[p * T + t], -1.0).add(b.u[c * T + t], -cap),
                      RowSense::LE, 0.0, fmt::format("{}.fcapL[{},{}]", px, p, t));
        }
        for (int s = 0; s < ns; ++s) {
            const auto& st = net.stations[s];
            LinExpr dyn;
            dyn.add(b.st_e[s * T + t], 1.0);
            dyn.add(b.st_chg[s * T + t], -st.eta_charge);
            dyn.add(b.st_dis[s * T + t], 1.0 / st.eta_discharge);
            double rhs = 0.0;
            if (t == 0) {
                if (!xe0_vars.empty())
                    dyn.add(xe0_vars[s], -1.0);
                else
                    rhs = xe0_values[s];
            } else {
                dyn.add(b.st_e[s * T + t - 1], -1.0);
            }
            m.add_row(std::move(dyn), RowSense::EQ, rhs, fmt::format("{}.edyn[{},{}]", px, s, t));
        }
    }

    // -- objective contribution ---------------------------------------------------
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < ng; ++j) b.cost.add(b.p_shed[j * T + t], net.shed_cost_e(j));
        for (int h = 0; h < nh; ++h) b.cost.add(b.h2_shed[h * T + t], net.shed_cost_h2(h));
    }
    b.last_var = m.num_vars();
    b.last_row = m.num_rows();
    return b;
}

DispatchSolution extract_dispatch(const Network& net, const DispatchBuild& b,
                                  const std::vector<double>& x) {
    const int T = net.periods;
    DispatchSolution s;
    auto grab = [&](const std::vector<int>& ids) {
        std::vector<double> out(ids.size(), 0.0);
        for (size_t i = 0; i < ids.size(); ++i) out[i] = ids[i] >= 0 ? x[ids[i]] : 0.0;
        return out;
    };
    s.line_p = grab(b.line_p);
    s.line_q = grab(b.line_q);
    s.pipe_f = grab(b.pipe_f);
    s.vsqr = grab(b.vsqr);
    s.p_shed = grab(b.p_shed);
    s.h2_shed = grab(b.h2_shed);
    s.sub_p = grab(b.sub_p);
    s.sub_q = grab(b.sub_q);
    s.ut = grab(b.ut);
    s.st_e = grab(b.st_e);
    s.st_chg = grab(b.st_chg);
    s.st_dis = grab(b.st_dis);
    s.st_h2p_f = grab(b.st_h2p_f);
    s.st_p2h_f = grab(b.st_p2h_f);
    s.st_h2p_q = grab(b.st_h2p_q);
    s.st_p2h_q = grab(b.st_p2h_q);
    s.q_shed.assign(net.grid_nodes.size() * T, 0.0);
    for (size_t j = 0; j < net.grid_nodes.size(); ++j)
        for (int t = 0; t < T; ++t) {
            const auto& n = net.grid_nodes[j];
            double ratio = n.p_load[t] > 0 ? n.q_load[t] / n.p_load[t] : 0.0;
            s.q_shed[j * T + t] = ratio * s.p_shed[j * T + t];
        }
    s.st_h2p_p.assign(net.stations.size() * T, 0.0);
    s.st_p2h_p.assign(net.stations.size() * T, 0.0);
    for (size_t st = 0; st < net.stations.size(); ++st)
        for (int t = 0; t < T; ++t) {
            s.st_h2p_p[st * T + t] = net.stations[st].beta_h2p * s.st_h2p_f[st * T + t];
            s.st_p2h_p[st * T + t] = net.stations[st].beta_p2h * s.st_p2h_f[st * T + t];
        }
    s.objective = b.cost.eval(x);
    return s;
}

double dispatch_balance_residual(const Network& net, const DispatchSolution& s,
                                 const std::vector<std::uint8_t>& states) {
    const int T = net.periods;
    double worst = 0.0;
    for (int t = 0; t < T; ++t) {
        for (size_t j = 0; j < net.grid_nodes.size(); ++j) {
            const auto& n = net.grid_nodes[j];
            double p = -(n.p_load[t] - s.p_shed[j * T + t]);
            double q = -(n.q_load[t] - s.q_shed[j * T + t]);
            p += s.sub_p[j * T + t];
            q += s.sub_q[j * T + t];
            for (size_t l = 0; l < net.lines.size(); ++l) {
                if (net.lines[l].to == static_cast<int>(j)) {
                    p += s.line_p[l * T + t];
                    q += s.line_q[l * T + t];
                } else if (net.lines[l].from == static_cast<int>(j)) {
                    p -= s.line_p[l * T + t];
                    q -= s.line_q[l * T + t];
                }
            }
            for (size_t st = 0; st < net.stations.size(); ++st) {
                if (net.stations[st].grid_node != static_cast<int>(j)) continue;
                p += s.st_h2p_p[st * T + t] - s.st_p2h_p[st * T + t];
                q += s.st_h2p_q[st * T + t] - s.st_p2h_q[st * T + t];
            }
            worst = std::max(worst, std::fabs(p));
            worst = std::max(worst, std::fabs(q));
        }
        for (size_t h = 0; h < net.h2_nodes.size(); ++h) {
            const auto& n = net.h2_nodes[h];
            double f = -(n.h2_load[t] - s.h2_shed[h * T + t]);
            f += s.ut[h * T + t];
            for (size_t p = 0; p < net.pipes.size(); ++p) {
                if (net.pipes[p].to == static_cast<int>(h))
                    f += s.pipe_f[p * T + t];
                else if (net.pipes[p].from == static_cast<int>(h))
                    f -= s.pipe_f[p * T + t];
            }
            for (size_t st = 0; st < net.stations.size(); ++st) {
                if (net.stations[st].h2_node != static_cast<int>(h)) continue;
                f += s.st_dis[st * T + t] - s.st_chg[st * T + t];
                f += s.st_p2h_f[st * T + t] - s.st_h2p_f[st * T + t];
            }
            worst = std::max(worst, std::fabs(f));
        }
    }
    // destroyed components must carry no flow
    for (int c = 0; c < net.num_components(); ++c)
        for (int t = 0; t < T; ++t) {
            if (states[net.entry(c, t)]) continue;
            if (net.comp_kind(c) == CompKind::Line) {
                worst = std::max(worst, std::fabs(s.line_p[c * T + t]));
                worst = std::max(worst, std::fabs(s.line_q[c * T + t]));
            } else {
                worst = std::max(worst, std::fabs(s.pipe_f[net.comp_pipe(c) * T + t]));
            }
        }
    return worst;
}

namespace {

DispatchSolution solve_dispatch_impl(const Network& net, const std::vector<double>& xe0,
                                     const ScenarioRealization& a, bool u_as_variables,
                                     double* objective_only) {
    ModelIR m;
    DispatchOptions opt;
    opt.u_as_variables = u_as_variables;
    DispatchBuild b = emit_dispatch(m, net, {}, xe0, &a, opt);
    m.set_objective(b.cost);
    SolveOptions so;
    auto r = solve_model(m, so);
    if (!r.feasible())
        throw SolverError(fmt::format(
            "dispatch LP unsolved (status {}): structural model bug; {} vars, {} rows, scenario "
            "with {} failures",
            static_cast<int>(r.status), m.num_vars(), m.num_rows(), a.total()));
    if (objective_only) {
        *objective_only = r.obj;
        return {};
    }
    return extract_dispatch(net, b, r.x);
}

}  // namespace

DispatchSolution solve_dispatch(const Network& net, const std::vector<double>& xe0,
                                const ScenarioRealization& a) {
    return solve_dispatch_impl(net, xe0, a, false, nullptr);
}

double dispatch_value_model_form(const Network& net, const std::vector<double>& xe0,
                                 const ScenarioRealization& a) {
    double obj = 0.0;
    solve_dispatch_impl(net, xe0, a, true, &obj);
    return obj;
}

}  // namespace ehdn
