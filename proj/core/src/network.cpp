#include "ehdn/network.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace ehdn {

double Network::max_shed_cost() const {
    double total = 0.0;
    for (const auto& n : grid_nodes)
        for (int t = 0; t < periods; ++t) total += n.shed_weight * e_shed_base * n.p_load[t];
    for (const auto& n : h2_nodes)
        for (int t = 0; t < periods; ++t) total += n.shed_weight * h2_shed_base * n.h2_load[t];
    return total;
}

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
    /// returns false if a and b were already connected (cycle)
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p[a] = b;
        return true;
    }
};

}  // namespace

std::vector<std::string> validate_network(const Network& net) {
    std::vector<std::string> bad;
    auto complain = [&](std::string s) { bad.push_back(std::move(s)); };

    if (net.periods <= 0) complain("horizon: periods must be >= 1");

    std::set<std::string> ids;
    auto check_unique = [&](const std::string& id, const char* what) {
        if (!ids.insert(id).second) complain(fmt::format("duplicate {} id '{}'", what, id));
    };

    int n_sub = 0;
    for (const auto& n : net.grid_nodes) {
        check_unique(n.id, "grid node");
        if (static_cast<int>(n.p_load.size()) != net.periods ||
            static_cast<int>(n.q_load.size()) != net.periods)
            complain(fmt::format("grid node '{}': load profile length != periods", n.id));
        for (double v : n.p_load)
            if (v < 0) complain(fmt::format("grid node '{}': negative active load", n.id));
        for (double v : n.q_load)
            if (v < 0) complain(fmt::format("grid node '{}': negative reactive load", n.id));
        if (n.shed_weight < 1.0)
            complain(fmt::format("grid node '{}': shed_weight {} < 1", n.id, n.shed_weight));
        if (n.is_substation) ++n_sub;
    }
    if (!net.grid_nodes.empty() && n_sub == 0) complain("grid: no substation node");

    for (const auto& n : net.h2_nodes) {
        check_unique(n.id, "hydrogen node");
        if (static_cast<int>(n.h2_load.size()) != net.periods)
            complain(fmt::format("hydrogen node '{}': load profile length != periods", n.id));
        for (double v : n.h2_load)
            if (v < 0) complain(fmt::format("hydrogen node '{}': negative hydrogen load", n.id));
        if (n.ut_cap < 0) complain(fmt::format("hydrogen node '{}': negative ut_cap", n.id));
    }

    int nz = static_cast<int>(net.zones.size());
    for (const auto& z : net.zones) {
        check_unique(z.id, "zone");
        if (static_cast<int>(z.wind_min.size()) != net.periods ||
            static_cast<int>(z.wind_max.size()) != net.periods ||
            static_cast<int>(z.rain_min.size()) != net.periods ||
            static_cast<int>(z.rain_max.size()) != net.periods)
            complain(fmt::format("zone '{}': support profile length != periods", z.id));
        for (int t = 0; t < std::min<int>(net.periods, z.wind_min.size()); ++t) {
            if (t < static_cast<int>(z.wind_max.size()) && z.wind_min[t] > z.wind_max[t])
                complain(fmt::format("zone '{}': wind support empty at period {}", z.id, t));
            if (t < static_cast<int>(z.rain_max.size()) &&
                t < static_cast<int>(z.rain_min.size()) && z.rain_min[t] > z.rain_max[t])
                complain(fmt::format("zone '{}': rain support empty at period {}", z.id, t));
        }
    }

    for (const auto& l : net.lines) {
        check_unique(l.id, "grid line");
        if (l.length_km <= 0) complain(fmt::format("line '{}': length must be > 0", l.id));
        if (l.poles < 1) complain(fmt::format("line '{}': pole count must be >= 1", l.id));
        if (l.wire_segments != l.poles && l.wire_segments != l.poles + 1)
            complain(fmt::format("line '{}': wire segments {} not in {{poles, poles+1}}", l.id,
                                 l.wire_segments));
        if (l.p_max <= 0 || l.q_max <= 0)
            complain(fmt::format("line '{}': flow caps must be > 0", l.id));
        if (l.zone < 0 || l.zone >= nz) complain(fmt::format("line '{}': no zone", l.id));
        if (l.from < 0 || l.from >= static_cast<int>(net.grid_nodes.size()) || l.to < 0 ||
            l.to >= static_cast<int>(net.grid_nodes.size()))
            complain(fmt::format("line '{}': endpoint out of range", l.id));
    }
    for (const auto& p : net.pipes) {
        check_unique(p.id, "pipeline");
        if (p.length_km <= 0) complain(fmt::format("pipeline '{}': length must be > 0", p.id));
        if (p.segments < 1) complain(fmt::format("pipeline '{}': segment count must be >= 1", p.id));
        if (p.f_max <= 0) complain(fmt::format("pipeline '{}': flow cap must be > 0", p.id));
        if (p.zone < 0 || p.zone >= nz) complain(fmt::format("pipeline '{}': no zone", p.id));
        if (p.from < 0 || p.from >= static_cast<int>(net.h2_nodes.size()) || p.to < 0 ||
            p.to >= static_cast<int>(net.h2_nodes.size()))
            complain(fmt::format("pipeline '{}': endpoint out of range", p.id));
    }
    for (const auto& s : net.stations) {
        check_unique(s.id, "station");
        if (s.grid_node < 0 || s.grid_node >= static_cast<int>(net.grid_nodes.size()))
            complain(fmt::format("station '{}': grid node out of range", s.id));
        if (s.h2_node < 0 || s.h2_node >= static_cast<int>(net.h2_nodes.size()))
            complain(fmt::format("station '{}': hydrogen node out of range", s.id));
        if (s.eta_charge <= 0 || s.eta_charge > 1 || s.eta_discharge <= 0 || s.eta_discharge > 1)
            complain(fmt::format("station '{}': efficiencies must be in (0,1]", s.id));
        if (s.e_max < 0 || s.charge_cap < 0 || s.discharge_cap < 0)
            complain(fmt::format("station '{}': negative capacity", s.id));
        if (s.beta_h2p < 0 || s.beta_p2h < 0)
            complain(fmt::format("station '{}': conversion factors must be >= 0", s.id));
    }

    // radiality of the healthy topology: acyclic, and every connected
    // component must contain a source (substation / feed / station)
    if (!net.grid_nodes.empty()) {
        UnionFind uf(static_cast<int>(net.grid_nodes.size()));
        for (const auto& l : net.lines) {
            if (l.from < 0 || l.to < 0) continue;
            if (!uf.unite(l.from, l.to))
                complain(fmt::format("grid: cycle closed by line '{}' (radiality violated)", l.id));
        }
        std::set<int> with_sub;
        for (const auto& n : net.grid_nodes)
            if (n.is_substation) with_sub.insert(uf.find(static_cast<int>(&n - net.grid_nodes.data())));
        std::set<int> with_station;
        for (const auto& s : net.stations)
            if (s.grid_node >= 0) with_station.insert(uf.find(s.grid_node));
        for (size_t i = 0; i < net.grid_nodes.size(); ++i) {
            int root = uf.find(static_cast<int>(i));
            if (!with_sub.count(root) && !with_station.count(root))
                complain(fmt::format("grid node '{}': component has no substation or station",
                                     net.grid_nodes[i].id));
        }
    }
    if (!net.h2_nodes.empty()) {
        UnionFind uf(static_cast<int>(net.h2_nodes.size()));
        for (const auto& p : net.pipes) {
            if (p.from < 0 || p.to < 0) continue;
            if (!uf.unite(p.from, p.to))
                complain(
                    fmt::format("hydrogen: cycle closed by pipeline '{}' (radiality violated)", p.id));
        }
        std::set<int> sourced;
        for (size_t i = 0; i < net.h2_nodes.size(); ++i)
            if (net.h2_nodes[i].has_transmission_feed()) sourced.insert(uf.find(static_cast<int>(i)));
        for (const auto& s : net.stations)
            if (s.h2_node >= 0) sourced.insert(uf.find(s.h2_node));
        for (size_t i = 0; i < net.h2_nodes.size(); ++i) {
            bool has_load = false;
            for (double v : net.h2_nodes[i].h2_load) has_load |= v > 0;
            if (has_load && !sourced.count(uf.find(static_cast<int>(i))))
                complain(fmt::format("hydrogen node '{}': loaded component has no feed or station",
                                     net.h2_nodes[i].id));
        }
    }

    if (net.budget < 0) complain("costs: negative hardening budget");
    if (net.e0_total < 0) complain("costs: negative pre-disaster hydrogen");
    double emax_sum = 0;
    for (const auto& s : net.stations) emax_sum += s.e_max;
    if (net.e0_total > emax_sum + 1e-9)
        complain(fmt::format("costs: e0_total {} exceeds total storage capacity {}", net.e0_total,
                             emax_sum));
    return bad;
}

}  // namespace ehdn
