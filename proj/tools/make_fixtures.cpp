// Deterministic generator for the bundled example instances. Re-running it
// rewrites data/ in place; fixture randomness is seeded so the files are
// reproducible.
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include <fmt/format.h>

#include "ehdn/instance_io.hpp"
#include "ehdn/network.hpp"

using namespace ehdn;

namespace {

void write(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p);
    out << s;
    fmt::print("wrote {}\n", p.string());
}

struct Branch {
    int from, to;
    double r_ohm, x_ohm;
};

// Baran-Wu 33-bus feeder (1-based buses, ohms)
const std::vector<Branch> kBranches33 = {
    {1, 2, 0.0922, 0.0470},   {2, 3, 0.4930, 0.2511},   {3, 4, 0.3660, 0.1864},
    {4, 5, 0.3811, 0.1941},   {5, 6, 0.8190, 0.7070},   {6, 7, 0.1872, 0.6188},
    {7, 8, 0.7114, 0.2351},   {8, 9, 1.0300, 0.7400},   {9, 10, 1.0440, 0.7400},
    {10, 11, 0.1966, 0.0650}, {11, 12, 0.3744, 0.1238}, {12, 13, 1.4680, 1.1550},
    {13, 14, 0.5416, 0.7129}, {14, 15, 0.5910, 0.5260}, {15, 16, 0.7463, 0.5450},
    {16, 17, 1.2890, 1.7210}, {17, 18, 0.7320, 0.5740}, {2, 19, 0.1640, 0.1565},
    {19, 20, 1.5042, 1.3554}, {20, 21, 0.4095, 0.4784}, {21, 22, 0.7089, 0.9373},
    {3, 23, 0.4512, 0.3083},  {23, 24, 0.8980, 0.7091}, {24, 25, 0.8960, 0.7011},
    {6, 26, 0.2030, 0.1034},  {26, 27, 0.2842, 0.1447}, {27, 28, 1.0590, 0.9337},
    {28, 29, 0.8042, 0.7006}, {29, 30, 0.5075, 0.2585}, {30, 31, 0.9744, 0.9630},
    {31, 32, 0.3105, 0.3619}, {32, 33, 0.3410, 0.5302}};

// (P kW, Q kvar), bus 2..33
const std::vector<std::pair<double, double>> kLoads33 = {
    {100, 60}, {90, 40},  {120, 80}, {60, 30},  {60, 20},  {200, 100}, {200, 100}, {60, 20},
    {60, 20},  {45, 30},  {60, 35},  {60, 35},  {120, 80}, {60, 10},  {60, 20},   {60, 20},
    {90, 40},  {90, 40},  {90, 40},  {90, 40},  {90, 40},  {90, 50},  {420, 200}, {420, 200},
    {60, 25},  {60, 25},  {60, 20},  {120, 70}, {200, 600}, {150, 70}, {210, 100}, {60, 40}};

// 21-node hydrogen tree: (from, to), 1-based
const std::vector<std::pair<int, int>> kPipes21 = {
    {1, 2},   {2, 3},   {3, 4},   {4, 5},   {5, 6},   {6, 7},   {7, 8},
    {2, 9},   {9, 10},  {10, 11}, {11, 12}, {4, 13},  {13, 14}, {14, 15},
    {15, 16}, {8, 17},  {17, 18}, {12, 19}, {19, 20}, {20, 21}};
// the branch off node 4 runs through the safety-sensitive area
const std::vector<int> kSsaPipes = {11, 12, 13, 14, 17};  // indices into kPipes21

std::string series(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.6g}", i ? "," : "", v[i]);
    return s;
}

void make_ieee33(const std::filesystem::path& dir) {
    const int T = 4;
    std::mt19937_64 rng(20240833);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * std::uniform_real_distribution<double>(0, 1)(rng);
    };
    const double z_base = 12.66 * 12.66 / 1.0 / 1000.0;  // ohm, on 1 MVA / 12.66 kV -> per 1000 kVA

    Network net;
    net.periods = T;
    net.s_base_kva = 1000;
    net.v0_pu = 1.0;
    net.vmin_pu = 0.90;
    net.vmax_pu = 1.10;
    net.budget = 300000;
    net.e0_total = 400;
    net.e_shed_base = 15;
    net.h2_shed_base = 100;

    for (int z = 0; z < 3; ++z) {
        Zone zn;
        zn.id = fmt::format("z{}", z);
        zn.wind_min.assign(T, 0);
        zn.wind_max.assign(T, 80);
        zn.rain_min.assign(T, 0);
        zn.rain_max.assign(T, 45);
        net.zones.push_back(zn);
    }

    // grid nodes; bus 1 is the substation, criticals per the case narrative
    std::vector<int> crit_g = {2, 18, 26};
    for (int b = 1; b <= 33; ++b) {
        GridNode n;
        n.id = fmt::format("g{}", b);
        n.zone = b <= 12 ? 0 : (b <= 25 ? 1 : 2);
        n.is_substation = b == 1;
        n.sub_p_cap = b == 1 ? 12000 : 0;
        n.sub_q_cap = b == 1 ? 9000 : 0;
        n.is_critical = std::count(crit_g.begin(), crit_g.end(), b) > 0;
        n.shed_weight = n.is_critical ? 50.0 : std::round(uni(1.0, 5.0) * 10) / 10;
        double p0 = b == 1 ? 0 : kLoads33[b - 2].first;
        double q0 = b == 1 ? 0 : kLoads33[b - 2].second;
        for (int t = 0; t < T; ++t) {
            double f = std::round(uni(0.8, 1.2) * 100) / 100;
            n.p_load.push_back(std::round(p0 * f * 10) / 10);
            n.q_load.push_back(std::round(q0 * f * 10) / 10);
        }
        net.grid_nodes.push_back(n);
    }

    for (size_t i = 0; i < kBranches33.size(); ++i) {
        const auto& br = kBranches33[i];
        GridLine l;
        l.id = fmt::format("l{}_{}", br.from, br.to);
        l.from = br.from - 1;
        l.to = br.to - 1;
        l.zone = net.grid_nodes[l.to].zone;
        l.r_pu = br.r_ohm / z_base;
        l.x_pu = br.x_ohm / z_base;
        l.length_km = std::round(std::clamp(0.25 + 0.6 * br.r_ohm, 0.2, 1.4) * 100) / 100;
        l.poles = std::max(1, static_cast<int>(std::llround(l.length_km * 1000 / 50)));
        l.wire_segments = l.poles;
        l.harden_cost = std::round(20000 * l.length_km);
        net.lines.push_back(l);
    }

    // hydrogen side
    std::vector<int> crit_h = {3, 13, 18};
    std::vector<double> h_base(22, 0.0);
    for (int b = 2; b <= 21; ++b) h_base[b] = std::round(uni(15, 55));
    h_base[3] += 20;
    h_base[13] += 20;
    h_base[18] += 15;
    for (int b = 1; b <= 21; ++b) {
        HydrogenNode n;
        n.id = fmt::format("h{}", b);
        n.zone = b <= 8 ? 0 : (b <= 12 || b >= 17 ? 1 : 2);
        if (b >= 13 && b <= 16) n.zone = 2;
        n.ut_cap = b == 1 ? 1600 : 0;
        n.is_critical = std::count(crit_h.begin(), crit_h.end(), b) > 0;
        n.shed_weight = n.is_critical ? 50.0 : std::round(uni(1.0, 5.0) * 10) / 10;
        for (int t = 0; t < T; ++t) {
            double f = std::round(uni(0.8, 1.2) * 100) / 100;
            n.h2_load.push_back(b == 1 ? 0.0 : std::round(h_base[b] * f * 10) / 10);
        }
        net.h2_nodes.push_back(n);
    }
    for (size_t i = 0; i < kPipes21.size(); ++i) {
        Pipeline p;
        p.id = fmt::format("p{}_{}", kPipes21[i].first, kPipes21[i].second);
        p.from = kPipes21[i].first - 1;
        p.to = kPipes21[i].second - 1;
        p.zone = net.h2_nodes[p.to].zone;
        p.length_km = std::round(uni(0.4, 1.2) * 100) / 100;
        p.segments = std::max(1, static_cast<int>(std::llround(p.length_km * 1000 / 200)));
        p.in_ssa = std::count(kSsaPipes.begin(), kSsaPipes.end(), static_cast<int>(i)) > 0;
        p.harden_cost = std::round(37500 * p.length_km);
        net.pipes.push_back(p);
    }

    // four stations coupling the networks
    struct StationSpot {
        int g, h;
    };
    std::vector<StationSpot> spots = {{6, 5}, {13, 10}, {25, 15}, {30, 20}};
    for (size_t s = 0; s < spots.size(); ++s) {
        HydrogenStation st;
        st.id = fmt::format("s{}", s + 1);
        st.grid_node = spots[s].g - 1;
        st.h2_node = spots[s].h - 1;
        st.e_max = 150;
        st.charge_cap = 80;
        st.discharge_cap = 80;
        st.eta_charge = 0.95;
        st.eta_discharge = 0.95;
        st.beta_h2p = 2.2;
        st.beta_p2h = 5.0;
        st.h2p_p_cap = 250;
        st.p2h_p_cap = 250;
        st.h2p_q_cap = 150;
        st.p2h_q_cap = 0;
        net.stations.push_back(st);
    }

    // flow caps from downstream peak demand (plus conversion headroom)
    {
        std::vector<std::vector<int>> kids(34);
        for (const auto& br : kBranches33) kids[br.from].push_back(br.to);
        std::vector<double> down_p(34, 0), down_q(34, 0);
        for (int b = 33; b >= 1; --b) {
            double peak_p = 0, peak_q = 0;
            for (int t = 0; t < T; ++t) {
                peak_p = std::max(peak_p, net.grid_nodes[b - 1].p_load[t]);
                peak_q = std::max(peak_q, net.grid_nodes[b - 1].q_load[t]);
            }
            for (const auto& st : net.stations)
                if (st.grid_node == b - 1) peak_p += st.p2h_p_cap;
            down_p[b] = peak_p;
            down_q[b] = peak_q;
            for (int k : kids[b]) {
                down_p[b] += down_p[k];
                down_q[b] += down_q[k];
            }
        }
        for (auto& l : net.lines) {
            l.p_max = std::round(1.5 * down_p[l.to + 1] + 150);
            l.q_max = std::round(1.5 * down_q[l.to + 1] + 120);
        }
        std::vector<std::vector<int>> hkids(22);
        for (const auto& pr : kPipes21) hkids[pr.first].push_back(pr.second);
        std::vector<double> down_f(22, 0);
        for (int b = 21; b >= 1; --b) {
            double peak = 0;
            for (int t = 0; t < T; ++t) peak = std::max(peak, net.h2_nodes[b - 1].h2_load[t]);
            for (const auto& st : net.stations)
                if (st.h2_node == b - 1) peak += std::max(st.charge_cap, st.h2p_p_cap / st.beta_h2p);
            down_f[b] = peak;
            for (int k : hkids[b]) down_f[b] += down_f[k];
        }
        for (auto& p : net.pipes) p.f_max = std::round(1.5 * down_f[p.to + 1] + 60);
    }

    auto bad = validate_network(net);
    for (const auto& v : bad) fmt::print("ieee33 invalid: {}\n", v);
    write(dir / "ieee33.instance", serialize_instance(net));

    // fragility parameters
    std::string fr = "# Fragility parameters for the 33/21 instance.\nversion 1\n\n[poles]\n";
    std::mt19937_64 rng2(77);
    auto uni2 = [&](double lo, double hi) {
        return lo + (hi - lo) * std::uniform_real_distribution<double>(0, 1)(rng2);
    };
    for (const auto& l : net.lines)
        fr += fmt::format("{} a0={:.4g} b0=0.18 a1={:.4g} b1=0.12\n", l.id, 1.0e-6 * uni2(0.8, 1.2),
                          2.6e-7 * uni2(0.8, 1.2));
    fr += "\n[wires]\n";
    for (const auto& l : net.lines)
        fr += fmt::format(
            "{} chi0=1.0 chi1=0.3 direct0=0:0,30:0,55:0.002,80:0.007 "
            "indirect0=0:0,30:0,55:0.003,80:0.01 "
            "direct1=0:0,30:0,55:0.0008,80:0.0028 "
            "indirect1=0:0,30:0,55:0.0012,80:0.004\n",
            l.id);
    fr += "\n[pipes]\n";
    for (const auto& p : net.pipes)
        fr += fmt::format("{} z0={:.4g} sigma0=0.32 z1={:.4g} sigma1=0.36\n", p.id,
                          0.0089 * uni2(0.95, 1.05), 0.0030 * uni2(0.95, 1.05));
    write(dir / "ieee33.fragility", fr);

    // four disaster levels
    struct Level {
        double wind[3];
        double rain[3];
    };
    // zone peaks inside the level bands; z2 carries the heavier rainfall
    std::vector<Level> levels = {{{35, 37.5, 40}, {11, 12, 14}},
                                 {{40, 42.5, 45}, {14, 15, 17}},
                                 {{45, 47.5, 50}, {17, 18, 20}},
                                 {{50, 52.5, 55}, {20, 21, 22}}};
    // set-level ratios keep the lifted set nonempty on the binary support;
    // the chance-constraint ratios are calibrated on the SSA projection
    const char* gamma_rows[4] = {
        "gamma1 30\ngamma2 40\nhlcc_gamma1 0.3\nhlcc_gamma2 1.5\n",
        "gamma1 60\ngamma2 80\nhlcc_gamma1 0.5\nhlcc_gamma2 1.5\n",
        "gamma1 90\ngamma2 120\nhlcc_gamma1 1.5\nhlcc_gamma2 1.7\n",
        "gamma1 90\ngamma2 135\nhlcc_gamma1 2.0\nhlcc_gamma2 2.9\n"};
    for (size_t lv = 0; lv < levels.size(); ++lv) {
        std::string fc = fmt::format("# Disaster level {} forecast.\nversion 1\n\n[intensity]\n",
                                     lv + 1);
        fc += "profile 0.5,1.0,1.0,0.5\n";
        fc += "wind_var 4\nrain_var 9\nzone_corr 0.6\nperiod_corr 0.5\n\n[peaks]\n";
        for (int z = 0; z < 3; ++z)
            fc += fmt::format("z{} wind={:.6g} rain={:.6g}\n", z, levels[lv].wind[z],
                              levels[lv].rain[z]);
        fc += fmt::format("\n[gammas]\ngamma_d1 1\ngamma_d2 2\n{}", gamma_rows[lv]);
        write(dir / fmt::format("ieee33-level{}.forecast", lv + 1), fc);
    }
}

/// Small two-zone fixture with strongly correlated intensities; sized so the
/// cross-moment rows actually steer the hardening choice.
void make_vola(const std::filesystem::path& dir) {
    std::string inst = R"(# Two-zone fixture with correlated intensities.
version 1

[horizon]
periods 2
s_base_kva 1000
v0_pu 1.0
vmin_pu 0.9
vmax_pu 1.1

[zones]
z0 wind_min=0,0 wind_max=80,80 rain_min=0,0 rain_max=45,45
z1 wind_min=0,0 wind_max=80,80 rain_min=0,0 rain_max=45,45

[grid_nodes]
g0 zone=z0 substation=1 sub_p_cap=6000 sub_q_cap=4000 p_load=0,0 q_load=0,0
g1 zone=z0 p_load=250,250 q_load=120,120 shed_weight=3
g2 zone=z0 p_load=180,180 q_load=90,90 shed_weight=2
g3 zone=z1 p_load=220,220 q_load=110,110 shed_weight=3
g4 zone=z1 p_load=150,150 q_load=70,70 shed_weight=1

[grid_lines]
la from=g0 to=g1 zone=z0 length_km=0.5 r_pu=0.012 x_pu=0.024 p_max=1400 q_max=900 harden_cost=10000
lb from=g1 to=g2 zone=z0 length_km=0.5 r_pu=0.010 x_pu=0.02 p_max=700 q_max=500 harden_cost=10000
lc from=g0 to=g3 zone=z1 length_km=0.5 r_pu=0.012 x_pu=0.024 p_max=1200 q_max=800 harden_cost=10000
ld from=g3 to=g4 zone=z1 length_km=0.5 r_pu=0.010 x_pu=0.02 p_max=600 q_max=400 harden_cost=10000

[h2_nodes]
h0 zone=z0 ut_cap=600 h2_load=0,0
h1 zone=z0 h2_load=50,50 shed_weight=2
h2 zone=z1 h2_load=50,50 shed_weight=2

[pipelines]
pa from=h0 to=h1 zone=z0 length_km=0.6 f_max=300 in_ssa=1 harden_cost=22500
pb from=h1 to=h2 zone=z1 length_km=0.6 f_max=200 in_ssa=0 harden_cost=22500

[stations]
s0 grid_node=g4 h2_node=h2 e_max=120 charge_cap=60 discharge_cap=60 eta_charge=0.95 eta_discharge=0.95 beta_h2p=2.2 beta_p2h=5 h2p_p_cap=120 p2h_p_cap=120 h2p_q_cap=80 p2h_q_cap=0

[costs]
budget 20000
e0_total 120
e_shed_base 15
h2_shed_base 100
)";
    write(dir / "vola2z.instance", inst);

    std::string fr = R"(# Fragility for the correlated two-zone fixture.
version 1

[poles]
la a0=1.1e-6 b0=0.18 a1=2.8e-7 b1=0.12
lb a0=1.0e-6 b0=0.18 a1=2.6e-7 b1=0.12
lc a0=1.1e-6 b0=0.18 a1=2.8e-7 b1=0.12
ld a0=1.0e-6 b0=0.18 a1=2.6e-7 b1=0.12

[pipes]
pa z0=0.0105 sigma0=0.4 z1=0.0036 sigma1=0.45
pb z0=0.0100 sigma0=0.4 z1=0.0035 sigma1=0.45
)";
    write(dir / "vola2z.fragility", fr);

    std::string fc = R"(# Strongly correlated zones, mid disaster level.
version 1

[intensity]
profile 0.75,1.0
wind_var 4
rain_var 9
zone_corr 0.9
period_corr 0.6

[peaks]
z0 wind=50 rain=19
z1 wind=49 rain=18

[gammas]
gamma_d1 1
gamma_d2 2
gamma1 0.3
gamma2 1200
)";
    write(dir / "vola2z.forecast", fc);
}

}  // namespace

int main(int argc, char** argv) {
    std::filesystem::path dir = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(dir);
    make_ieee33(dir);
    make_vola(dir);
    return 0;
}
