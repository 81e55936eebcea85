#pragma once

#include <string>

#include "ehdn/network.hpp"

namespace ehdn::test {

inline std::string data_path(const std::string& name) {
    return std::string(EHDN_DATA_DIR) + "/" + name;
}

/// Synthetic network with the requested failure-component layout; loads and
/// electrical data are placeholders, good enough for fragility/ambiguity math.
inline Network make_synthetic_net(int n_lines, int n_pipes, int n_zones, int periods) {
    Network net;
    net.periods = periods;
    net.e_shed_base = 15;
    net.h2_shed_base = 100;
    for (int z = 0; z < n_zones; ++z) {
        Zone zn;
        zn.id = "z" + std::to_string(z);
        zn.wind_min.assign(periods, 0.0);
        zn.wind_max.assign(periods, 70.0);
        zn.rain_min.assign(periods, 0.0);
        zn.rain_max.assign(periods, 50.0);
        net.zones.push_back(zn);
    }
    for (int i = 0; i <= n_lines; ++i) {
        GridNode n;
        n.id = "g" + std::to_string(i);
        n.zone = 0;
        n.p_load.assign(periods, 0.0);
        n.q_load.assign(periods, 0.0);
        n.is_substation = i == 0;
        n.sub_p_cap = i == 0 ? 1e4 : 0;
        n.sub_q_cap = i == 0 ? 1e4 : 0;
        net.grid_nodes.push_back(n);
    }
    for (int i = 0; i < n_lines; ++i) {
        GridLine l;
        l.id = "l" + std::to_string(i);
        l.from = i;
        l.to = i + 1;
        l.zone = i % n_zones;
        l.length_km = 0.5;
        l.r_pu = 0.01;
        l.x_pu = 0.02;
        l.p_max = 1e4;
        l.q_max = 1e4;
        l.poles = 10;
        l.wire_segments = 10;
        l.harden_cost = 1e4;
        net.lines.push_back(l);
    }
    for (int i = 0; i <= n_pipes; ++i) {
        HydrogenNode n;
        n.id = "h" + std::to_string(i);
        n.zone = 0;
        n.h2_load.assign(periods, 0.0);
        n.ut_cap = i == 0 ? 1e4 : 0;
        net.h2_nodes.push_back(n);
    }
    for (int i = 0; i < n_pipes; ++i) {
        Pipeline p;
        p.id = "p" + std::to_string(i);
        p.from = i;
        p.to = i + 1;
        p.zone = i % n_zones;
        p.length_km = 0.6;
        p.f_max = 1e4;
        p.segments = 3;
        p.harden_cost = 2e4;
        net.pipes.push_back(p);
    }
    return net;
}

}  // namespace ehdn::test
