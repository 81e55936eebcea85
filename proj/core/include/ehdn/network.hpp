#pragma once

#include <string>
#include <vector>

#include "ehdn/common.hpp"

namespace ehdn {

struct GridNode {
    std::string id;
    int zone = -1;
    std::vector<double> p_load;  // kW per period
    std::vector<double> q_load;  // kvar per period
    double shed_weight = 1.0;
    bool is_substation = false;
    bool is_critical = false;
    double sub_p_cap = 0.0;  // substation import capacity, kW
    double sub_q_cap = 0.0;  // kvar
};

struct GridLine {
    std::string id;
    int from = -1, to = -1;  // grid node indices
    int zone = -1;
    double length_km = 0.0;
    double r_pu = 0.0, x_pu = 0.0;
    double p_max = 0.0, q_max = 0.0;  // kW / kvar
    int poles = 0;
    int wire_segments = 0;
    double harden_cost = 0.0;
};

struct HydrogenNode {
    std::string id;
    int zone = -1;
    std::vector<double> h2_load;  // m^3/h per period
    double shed_weight = 1.0;
    bool is_critical = false;
    double ut_cap = 0.0;  // transmission feed capacity, m^3/h

    bool has_transmission_feed() const { return ut_cap > 0.0; }
};

struct Pipeline {
    std::string id;
    int from = -1, to = -1;  // hydrogen node indices
    int zone = -1;
    double length_km = 0.0;
    double f_max = 0.0;  // m^3/h
    int segments = 0;
    bool in_ssa = false;
    double harden_cost = 0.0;
};

struct HydrogenStation {
    std::string id;
    int grid_node = -1;
    int h2_node = -1;
    double e_max = 0.0;                         // storage capacity, m^3
    double charge_cap = 0.0;                    // m^3/h
    double discharge_cap = 0.0;                 // m^3/h
    double eta_charge = 1.0, eta_discharge = 1.0;
    double beta_h2p = 0.0;                      // kW per m^3/h of fuel-cell intake
    double beta_p2h = 0.0;                      // kW per m^3/h of electrolyzer output
    double h2p_p_cap = 0.0, p2h_p_cap = 0.0;    // kW
    double h2p_q_cap = 0.0, p2h_q_cap = 0.0;    // kvar
};

struct Zone {
    std::string id;
    std::vector<double> wind_min, wind_max;  // m/s per period
    std::vector<double> rain_min, rain_max;  // mm/h per period
};

/// Which kind of weather-exposed component a failure index refers to.
enum class CompKind { Line, Pipe };

/// Coupled electricity-hydrogen distribution network instance. Immutable
/// after parse; safe to share read-only across parallel workers.
struct Network {
    int version = 1;
    int periods = 0;
    double s_base_kva = 1000.0;
    double v0_pu = 1.0;
    double vmin_pu = 0.9, vmax_pu = 1.1;

    double budget = 0.0;        // hardening budget, $
    double e0_total = 0.0;      // pre-disaster hydrogen to allocate, m^3
    double e_shed_base = 0.0;   // $/kWh
    double h2_shed_base = 0.0;  // $/m^3

    std::vector<GridNode> grid_nodes;
    std::vector<GridLine> lines;
    std::vector<HydrogenNode> h2_nodes;
    std::vector<Pipeline> pipes;
    std::vector<HydrogenStation> stations;
    std::vector<Zone> zones;

    // -- component (failure) index space: lines first, then pipelines --------
    int num_components() const { return static_cast<int>(lines.size() + pipes.size()); }
    CompKind comp_kind(int c) const {
        return c < static_cast<int>(lines.size()) ? CompKind::Line : CompKind::Pipe;
    }
    int comp_line(int c) const { return c; }
    int comp_pipe(int c) const { return c - static_cast<int>(lines.size()); }
    int pipe_comp(int p) const { return static_cast<int>(lines.size()) + p; }
    int comp_zone(int c) const {
        return comp_kind(c) == CompKind::Line ? lines[c].zone : pipes[comp_pipe(c)].zone;
    }
    double comp_harden_cost(int c) const {
        return comp_kind(c) == CompKind::Line ? lines[c].harden_cost
                                              : pipes[comp_pipe(c)].harden_cost;
    }
    const std::string& comp_id(int c) const {
        return comp_kind(c) == CompKind::Line ? lines[c].id : pipes[comp_pipe(c)].id;
    }
    /// flattened (component, period) failure-entry index
    int entry(int c, int t) const { return c * periods + t; }
    int num_entries() const { return num_components() * periods; }
    int entry_comp(int e) const { return e / periods; }
    int entry_period(int e) const { return e % periods; }

    std::vector<int> ssa_pipe_comps() const {
        std::vector<int> out;
        for (size_t p = 0; p < pipes.size(); ++p)
            if (pipes[p].in_ssa) out.push_back(pipe_comp(static_cast<int>(p)));
        return out;
    }

    double shed_cost_e(int node) const { return grid_nodes[node].shed_weight * e_shed_base; }
    double shed_cost_h2(int node) const { return h2_nodes[node].shed_weight * h2_shed_base; }

    /// Upper bound on any dispatch objective: everything shed every period.
    double max_shed_cost() const;
};

/// Report-only invariant check; empty result means the network is valid.
std::vector<std::string> validate_network(const Network& net);

}  // namespace ehdn
