#include "ehdn/instance_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ehdn {
namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open '{}'", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        if (tok[0] == '#') break;
        out.push_back(tok);
    }
    return out;
}

struct Record {
    std::string id;
    std::map<std::string, std::string> kv;
    int lineno = 0;
};

struct Section {
    std::string name;
    std::vector<Record> records;                       // "id k=v ..." lines
    std::vector<std::pair<std::string, std::string>> scalars;  // "key value" lines
};

struct Document {
    std::string origin;
    int version = 0;
    std::vector<Section> sections;

    const Section* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
    const Section& need(const std::string& name) const {
        const Section* s = find(name);
        if (!s) fail_data("{}: missing section [{}]", origin, name);
        return *s;
    }
};

Document parse_document(const std::string& text, const std::string& origin) {
    Document doc;
    doc.origin = origin;
    std::istringstream in(text);
    std::string line;
    Section* cur = nullptr;
    int lineno = 0;
    bool version_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0].front() == '[') {
            if (toks[0].back() != ']')
                fail_data("{}:{}: malformed section header '{}'", origin, lineno, toks[0]);
            doc.sections.push_back({toks[0].substr(1, toks[0].size() - 2), {}, {}});
            cur = &doc.sections.back();
            continue;
        }
        if (!version_seen) {
            if (toks[0] != "version" || toks.size() != 2)
                fail_data("{}:{}: first entry must be 'version <n>'", origin, lineno);
            doc.version = std::stoi(toks[1]);
            version_seen = true;
            continue;
        }
        if (!cur) fail_data("{}:{}: data before any section", origin, lineno);
        if (toks.size() == 2 && toks[1].find('=') == std::string::npos) {
            cur->scalars.emplace_back(toks[0], toks[1]);
            continue;
        }
        Record r;
        r.id = toks[0];
        r.lineno = lineno;
        for (size_t i = 1; i < toks.size(); ++i) {
            auto eq = toks[i].find('=');
            if (eq == std::string::npos)
                fail_data("{}:{}: expected key=value, got '{}'", origin, lineno, toks[i]);
            r.kv[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
        }
        cur->records.push_back(std::move(r));
    }
    if (!version_seen) fail_data("{}: missing mandatory version field", origin);
    return doc;
}

class FieldReader {
public:
    FieldReader(const Document& doc, const std::string& section, const Record& rec)
        : doc_(doc), section_(section), rec_(rec) {}

    ~FieldReader() = default;

    std::string str(const std::string& key) const {
        auto it = rec_.kv.find(key);
        if (it == rec_.kv.end())
            fail_data("{}: [{}] '{}': missing field '{}'", doc_.origin, section_, rec_.id, key);
        used_.push_back(key);
        return it->second;
    }
    double num(const std::string& key) const {
        try {
            return std::stod(str(key));
        } catch (const std::exception&) {
            fail_data("{}: [{}] '{}': field '{}' is not a number", doc_.origin, section_, rec_.id,
                      key);
        }
    }
    double num_or(const std::string& key, double dflt) const {
        return rec_.kv.count(key) ? num(key) : dflt;
    }
    int integer(const std::string& key) const { return static_cast<int>(std::llround(num(key))); }
    int integer_or(const std::string& key, int dflt) const {
        return rec_.kv.count(key) ? integer(key) : dflt;
    }
    bool flag_or(const std::string& key, bool dflt) const {
        if (!rec_.kv.count(key)) return dflt;
        std::string v = str(key);
        if (v == "1" || v == "true") return true;
        if (v == "0" || v == "false") return false;
        fail_data("{}: [{}] '{}': field '{}' must be 0/1", doc_.origin, section_, rec_.id, key);
    }
    std::vector<double> series(const std::string& key, int expected) const {
        std::string v = str(key);
        std::vector<double> out;
        std::istringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                fail_data("{}: [{}] '{}': field '{}' has non-numeric entry '{}'", doc_.origin,
                          section_, rec_.id, key, item);
            }
        }
        if (expected >= 0 && static_cast<int>(out.size()) != expected)
            fail_data("{}: [{}] '{}': field '{}' needs {} values, got {}", doc_.origin, section_,
                      rec_.id, key, expected, out.size());
        return out;
    }
    bool has(const std::string& key) const { return rec_.kv.count(key) > 0; }
    void reject_unknown(std::initializer_list<const char*> known) const {
        for (const auto& [k, v] : rec_.kv) {
            (void)v;
            if (std::find_if(known.begin(), known.end(),
                             [&](const char* s) { return k == s; }) == known.end())
                fail_data("{}: [{}] '{}': unknown field '{}'", doc_.origin, section_, rec_.id, k);
        }
    }

private:
    const Document& doc_;
    std::string section_;
    const Record& rec_;
    mutable std::vector<std::string> used_;
};

double scalar_num(const Document& doc, const Section& s, const std::string& key, bool required,
                  double dflt = 0.0) {
    for (const auto& [k, v] : s.scalars)
        if (k == key) {
            try {
                return std::stod(v);
            } catch (const std::exception&) {
                fail_data("{}: [{}]: '{}' is not a number", doc.origin, s.name, key);
            }
        }
    if (required) fail_data("{}: [{}]: missing '{}'", doc.origin, s.name, key);
    return dflt;
}

int derive_poles(double length_km) {
    return std::max(1, static_cast<int>(std::llround(length_km * 1000.0 / 50.0)));
}
int derive_pipe_segments(double length_km) {
    return std::max(1, static_cast<int>(std::llround(length_km * 1000.0 / 200.0)));
}

}  // namespace

Network parse_instance_text(const std::string& text, const std::string& origin) {
    Document doc = parse_document(text, origin);
    if (doc.version != 1) fail_data("{}: unsupported instance version {}", origin, doc.version);

    Network net;
    net.version = doc.version;

    const Section& hor = doc.need("horizon");
    net.periods = static_cast<int>(scalar_num(doc, hor, "periods", true));
    if (net.periods < 1) fail_data("{}: [horizon] periods must be >= 1", origin);
    net.s_base_kva = scalar_num(doc, hor, "s_base_kva", false, 1000.0);
    net.v0_pu = scalar_num(doc, hor, "v0_pu", false, 1.0);
    net.vmin_pu = scalar_num(doc, hor, "vmin_pu", false, 0.9);
    net.vmax_pu = scalar_num(doc, hor, "vmax_pu", false, 1.1);

    std::map<std::string, int> zone_ix, gnode_ix, hnode_ix;

    for (const auto& r : doc.need("zones").records) {
        FieldReader f(doc, "zones", r);
        f.reject_unknown({"wind_min", "wind_max", "rain_min", "rain_max"});
        Zone z;
        z.id = r.id;
        z.wind_min = f.series("wind_min", net.periods);
        z.wind_max = f.series("wind_max", net.periods);
        z.rain_min = f.series("rain_min", net.periods);
        z.rain_max = f.series("rain_max", net.periods);
        if (zone_ix.count(z.id)) fail_data("{}: duplicate zone id '{}'", origin, z.id);
        zone_ix[z.id] = static_cast<int>(net.zones.size());
        net.zones.push_back(std::move(z));
    }

    auto zone_ref = [&](const std::string& section, const std::string& id,
                        const std::string& zid) {
        auto it = zone_ix.find(zid);
        if (it == zone_ix.end())
            fail_data("{}: [{}] '{}': dangling zone reference '{}'", origin, section, id, zid);
        return it->second;
    };

    for (const auto& r : doc.need("grid_nodes").records) {
        FieldReader f(doc, "grid_nodes", r);
        f.reject_unknown({"zone", "p_load", "q_load", "shed_weight", "substation", "critical",
                          "sub_p_cap", "sub_q_cap"});
        GridNode n;
        n.id = r.id;
        n.zone = zone_ref("grid_nodes", r.id, f.str("zone"));
        n.p_load = f.series("p_load", net.periods);
        n.q_load = f.series("q_load", net.periods);
        n.shed_weight = f.num_or("shed_weight", 1.0);
        n.is_substation = f.flag_or("substation", false);
        n.is_critical = f.flag_or("critical", false);
        n.sub_p_cap = f.num_or("sub_p_cap", 0.0);
        n.sub_q_cap = f.num_or("sub_q_cap", 0.0);
        if (gnode_ix.count(n.id)) fail_data("{}: duplicate grid node id '{}'", origin, n.id);
        gnode_ix[n.id] = static_cast<int>(net.grid_nodes.size());
        net.grid_nodes.push_back(std::move(n));
    }

    auto gnode_ref = [&](const std::string& section, const std::string& id,
                         const std::string& nid) {
        auto it = gnode_ix.find(nid);
        if (it == gnode_ix.end())
            fail_data("{}: [{}] '{}': dangling grid node reference '{}'", origin, section, id, nid);
        return it->second;
    };

    for (const auto& r : doc.need("grid_lines").records) {
        FieldReader f(doc, "grid_lines", r);
        f.reject_unknown({"from", "to", "zone", "length_km", "r_pu", "x_pu", "p_max", "q_max",
                          "poles", "wire_segments", "harden_cost"});
        GridLine l;
        l.id = r.id;
        l.from = gnode_ref("grid_lines", r.id, f.str("from"));
        l.to = gnode_ref("grid_lines", r.id, f.str("to"));
        l.zone = zone_ref("grid_lines", r.id, f.str("zone"));
        l.length_km = f.num("length_km");
        l.r_pu = f.num("r_pu");
        l.x_pu = f.num("x_pu");
        l.p_max = f.num("p_max");
        l.q_max = f.num("q_max");
        l.poles = f.integer_or("poles", derive_poles(l.length_km));
        l.wire_segments = f.integer_or("wire_segments", l.poles);
        l.harden_cost = f.num("harden_cost");
        net.lines.push_back(std::move(l));
    }

    for (const auto& r : doc.need("h2_nodes").records) {
        FieldReader f(doc, "h2_nodes", r);
        f.reject_unknown({"zone", "h2_load", "shed_weight", "critical", "ut_cap"});
        HydrogenNode n;
        n.id = r.id;
        n.zone = zone_ref("h2_nodes", r.id, f.str("zone"));
        n.h2_load = f.series("h2_load", net.periods);
        n.shed_weight = f.num_or("shed_weight", 1.0);
        n.is_critical = f.flag_or("critical", false);
        n.ut_cap = f.num_or("ut_cap", 0.0);
        if (hnode_ix.count(n.id)) fail_data("{}: duplicate hydrogen node id '{}'", origin, n.id);
        hnode_ix[n.id] = static_cast<int>(net.h2_nodes.size());
        net.h2_nodes.push_back(std::move(n));
    }

    auto hnode_ref = [&](const std::string& section, const std::string& id,
                         const std::string& nid) {
        auto it = hnode_ix.find(nid);
        if (it == hnode_ix.end())
            fail_data("{}: [{}] '{}': dangling hydrogen node reference '{}'", origin, section, id,
                      nid);
        return it->second;
    };

    for (const auto& r : doc.need("pipelines").records) {
        FieldReader f(doc, "pipelines", r);
        f.reject_unknown(
            {"from", "to", "zone", "length_km", "f_max", "segments", "in_ssa", "harden_cost"});
        Pipeline p;
        p.id = r.id;
        p.from = hnode_ref("pipelines", r.id, f.str("from"));
        p.to = hnode_ref("pipelines", r.id, f.str("to"));
        p.zone = zone_ref("pipelines", r.id, f.str("zone"));
        p.length_km = f.num("length_km");
        p.f_max = f.num("f_max");
        p.segments = f.integer_or("segments", derive_pipe_segments(p.length_km));
        p.in_ssa = f.flag_or("in_ssa", false);
        p.harden_cost = f.num("harden_cost");
        net.pipes.push_back(std::move(p));
    }

    for (const auto& r : doc.need("stations").records) {
        FieldReader f(doc, "stations", r);
        f.reject_unknown({"grid_node", "h2_node", "e_max", "charge_cap", "discharge_cap",
                          "eta_charge", "eta_discharge", "beta_h2p", "beta_p2h", "h2p_p_cap",
                          "p2h_p_cap", "h2p_q_cap", "p2h_q_cap"});
        HydrogenStation s;
        s.id = r.id;
        s.grid_node = gnode_ref("stations", r.id, f.str("grid_node"));
        s.h2_node = hnode_ref("stations", r.id, f.str("h2_node"));
        s.e_max = f.num("e_max");
        s.charge_cap = f.num("charge_cap");
        s.discharge_cap = f.num("discharge_cap");
        s.eta_charge = f.num("eta_charge");
        s.eta_discharge = f.num("eta_discharge");
        s.beta_h2p = f.num("beta_h2p");
        s.beta_p2h = f.num("beta_p2h");
        s.h2p_p_cap = f.num("h2p_p_cap");
        s.p2h_p_cap = f.num("p2h_p_cap");
        s.h2p_q_cap = f.num_or("h2p_q_cap", 0.0);
        s.p2h_q_cap = f.num_or("p2h_q_cap", 0.0);
        net.stations.push_back(std::move(s));
    }

    const Section& costs = doc.need("costs");
    net.budget = scalar_num(doc, costs, "budget", true);
    net.e0_total = scalar_num(doc, costs, "e0_total", true);
    net.e_shed_base = scalar_num(doc, costs, "e_shed_base", true);
    net.h2_shed_base = scalar_num(doc, costs, "h2_shed_base", true);

    auto bad = validate_network(net);
    if (!bad.empty()) fail_data("{}: invalid instance: {}", origin, bad.front());
    return net;
}

Network parse_instance(const std::filesystem::path& path) {
    return parse_instance_text(read_file(path), path.string());
}

std::string serialize_instance(const Network& net) {
    std::string out;
    auto series = [](const std::vector<double>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.10g}", i ? "," : "", v[i]);
        return s;
    };
    out += "version 1\n\n[horizon]\n";
    out += fmt::format("periods {}\n", net.periods);
    out += fmt::format("s_base_kva {:.10g}\nv0_pu {:.10g}\nvmin_pu {:.10g}\nvmax_pu {:.10g}\n",
                       net.s_base_kva, net.v0_pu, net.vmin_pu, net.vmax_pu);
    out += "\n[zones]\n";
    for (const auto& z : net.zones)
        out += fmt::format("{} wind_min={} wind_max={} rain_min={} rain_max={}\n", z.id,
                           series(z.wind_min), series(z.wind_max), series(z.rain_min),
                           series(z.rain_max));
    out += "\n[grid_nodes]\n";
    for (const auto& n : net.grid_nodes)
        out += fmt::format(
            "{} zone={} p_load={} q_load={} shed_weight={:.10g} substation={} critical={} "
            "sub_p_cap={:.10g} sub_q_cap={:.10g}\n",
            n.id, net.zones[n.zone].id, series(n.p_load), series(n.q_load), n.shed_weight,
            n.is_substation ? 1 : 0, n.is_critical ? 1 : 0, n.sub_p_cap, n.sub_q_cap);
    out += "\n[grid_lines]\n";
    for (const auto& l : net.lines)
        out += fmt::format(
            "{} from={} to={} zone={} length_km={:.10g} r_pu={:.10g} x_pu={:.10g} p_max={:.10g} "
            "q_max={:.10g} poles={} wire_segments={} harden_cost={:.10g}\n",
            l.id, net.grid_nodes[l.from].id, net.grid_nodes[l.to].id, net.zones[l.zone].id,
            l.length_km, l.r_pu, l.x_pu, l.p_max, l.q_max, l.poles, l.wire_segments,
            l.harden_cost);
    out += "\n[h2_nodes]\n";
    for (const auto& n : net.h2_nodes)
        out += fmt::format(
            "{} zone={} h2_load={} shed_weight={:.10g} critical={} ut_cap={:.10g}\n", n.id,
            net.zones[n.zone].id, series(n.h2_load), n.shed_weight, n.is_critical ? 1 : 0,
            n.ut_cap);
    out += "\n[pipelines]\n";
    for (const auto& p : net.pipes)
        out += fmt::format(
            "{} from={} to={} zone={} length_km={:.10g} f_max={:.10g} segments={} in_ssa={} "
            "harden_cost={:.10g}\n",
            p.id, net.h2_nodes[p.from].id, net.h2_nodes[p.to].id, net.zones[p.zone].id,
            p.length_km, p.f_max, p.segments, p.in_ssa ? 1 : 0, p.harden_cost);
    out += "\n[stations]\n";
    for (const auto& s : net.stations)
        out += fmt::format(
            "{} grid_node={} h2_node={} e_max={:.10g} charge_cap={:.10g} discharge_cap={:.10g} "
            "eta_charge={:.10g} eta_discharge={:.10g} beta_h2p={:.10g} beta_p2h={:.10g} "
            "h2p_p_cap={:.10g} p2h_p_cap={:.10g} h2p_q_cap={:.10g} p2h_q_cap={:.10g}\n",
            s.id, net.grid_nodes[s.grid_node].id, net.h2_nodes[s.h2_node].id, s.e_max,
            s.charge_cap, s.discharge_cap, s.eta_charge, s.eta_discharge, s.beta_h2p, s.beta_p2h,
            s.h2p_p_cap, s.p2h_p_cap, s.h2p_q_cap, s.p2h_q_cap);
    out += "\n[costs]\n";
    out += fmt::format("budget {:.10g}\ne0_total {:.10g}\ne_shed_base {:.10g}\nh2_shed_base {:.10g}\n",
                       net.budget, net.e0_total, net.e_shed_base, net.h2_shed_base);
    return out;
}

FragilityParams parse_fragility_text(const std::string& text, const Network& net,
                                     const std::string& origin) {
    Document doc = parse_document(text, origin);
    if (doc.version != 1) fail_data("{}: unsupported fragility version {}", origin, doc.version);

    std::map<std::string, int> line_ix, pipe_ix;
    for (size_t i = 0; i < net.lines.size(); ++i) line_ix[net.lines[i].id] = static_cast<int>(i);
    for (size_t i = 0; i < net.pipes.size(); ++i) pipe_ix[net.pipes[i].id] = static_cast<int>(i);

    FragilityParams fp;
    fp.lines.resize(net.lines.size());
    fp.pipes.resize(net.pipes.size());
    std::vector<bool> line_seen(net.lines.size(), false), pipe_seen(net.pipes.size(), false);

    auto parse_table = [&](const std::string& raw, const std::string& id,
                           const std::string& field) {
        PiecewiseCurve c;
        std::istringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                fail_data("{}: [wires] '{}': field '{}' needs v:p pairs", origin, id, field);
            double v = std::stod(item.substr(0, colon));
            double p = std::stod(item.substr(colon + 1));
            if (!c.v.empty() && v <= c.v.back())
                fail_data("{}: [wires] '{}': field '{}' abscissae must increase", origin, id,
                          field);
            if (p < 0 || p > 1)
                fail_data("{}: [wires] '{}': field '{}' has probability outside [0,1]", origin, id,
                          field);
            c.v.push_back(v);
            c.p.push_back(p);
        }
        if (c.empty()) fail_data("{}: [wires] '{}': empty table '{}'", origin, id, field);
        return c;
    };

    for (const auto& r : doc.need("poles").records) {
        auto it = line_ix.find(r.id);
        if (it == line_ix.end())
            fail_data("{}: [poles]: unknown line '{}'", origin, r.id);
        FieldReader f(doc, "poles", r);
        f.reject_unknown({"a0", "b0", "a1", "b1"});
        LineFragility& lf = fp.lines[it->second];
        lf.pole[0] = {f.num("a0"), f.num("b0")};
        lf.pole[1] = {f.num("a1"), f.num("b1")};
        for (int s = 0; s < 2; ++s)
            if (lf.pole[s].a <= 0 || lf.pole[s].b <= 0)
                fail_data("{}: [poles] '{}': a and b must be > 0", origin, r.id);
        line_seen[it->second] = true;
    }
    if (const Section* wires = doc.find("wires")) {
        for (const auto& r : wires->records) {
            auto it = line_ix.find(r.id);
            if (it == line_ix.end()) fail_data("{}: [wires]: unknown line '{}'", origin, r.id);
            FieldReader f(doc, "wires", r);
            f.reject_unknown(
                {"chi0", "chi1", "direct0", "indirect0", "direct1", "indirect1"});
            for (int s = 0; s < 2; ++s) {
                WireCurves wc;
                wc.chi = f.num(s ? "chi1" : "chi0");
                wc.direct = parse_table(f.str(s ? "direct1" : "direct0"), r.id,
                                        s ? "direct1" : "direct0");
                wc.indirect = parse_table(f.str(s ? "indirect1" : "indirect0"), r.id,
                                          s ? "indirect1" : "indirect0");
                fp.lines[it->second].wire[s] = std::move(wc);
            }
        }
    }
    for (const auto& r : doc.need("pipes").records) {
        auto it = pipe_ix.find(r.id);
        if (it == pipe_ix.end()) fail_data("{}: [pipes]: unknown pipeline '{}'", origin, r.id);
        FieldReader f(doc, "pipes", r);
        f.reject_unknown({"z0", "sigma0", "z1", "sigma1"});
        PipeFragility& pf = fp.pipes[it->second];
        pf.seg[0] = {f.num("z0"), f.num("sigma0")};
        pf.seg[1] = {f.num("z1"), f.num("sigma1")};
        for (int s = 0; s < 2; ++s)
            if (pf.seg[s].z <= 0 || pf.seg[s].sigma <= 0)
                fail_data("{}: [pipes] '{}': z and sigma must be > 0", origin, r.id);
        pipe_seen[it->second] = true;
    }

    for (size_t i = 0; i < net.lines.size(); ++i)
        if (!line_seen[i])
            fail_data("{}: missing pole fragility for line '{}'", origin, net.lines[i].id);
    for (size_t i = 0; i < net.pipes.size(); ++i)
        if (!pipe_seen[i])
            fail_data("{}: missing fragility for pipeline '{}'", origin, net.pipes[i].id);
    return fp;
}

FragilityParams parse_fragility(const std::filesystem::path& path, const Network& net) {
    return parse_fragility_text(read_file(path), net, path.string());
}

Forecast parse_forecast_text(const std::string& text, const Network& net,
                             const std::string& origin) {
    Document doc = parse_document(text, origin);
    if (doc.version != 1) fail_data("{}: unsupported forecast version {}", origin, doc.version);
    Forecast fc;
    const Section& in = doc.need("intensity");
    for (const auto& [k, v] : in.scalars) {
        if (k == "wind_var")
            fc.wind_var = std::stod(v);
        else if (k == "rain_var")
            fc.rain_var = std::stod(v);
        else if (k == "zone_corr")
            fc.zone_corr = std::stod(v);
        else if (k == "period_corr")
            fc.period_corr = std::stod(v);
        else if (k == "profile") {
            std::istringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) fc.profile.push_back(std::stod(item));
        } else
            fail_data("{}: [intensity]: unknown field '{}'", origin, k);
    }
    if (static_cast<int>(fc.profile.size()) != net.periods)
        fail_data("{}: [intensity] profile needs {} entries", origin, net.periods);

    fc.wind_peak.assign(net.zones.size(), 0.0);
    fc.rain_peak.assign(net.zones.size(), 0.0);
    std::vector<bool> seen(net.zones.size(), false);
    for (const auto& r : doc.need("peaks").records) {
        int z = -1;
        for (size_t i = 0; i < net.zones.size(); ++i)
            if (net.zones[i].id == r.id) z = static_cast<int>(i);
        if (z < 0) fail_data("{}: [peaks]: unknown zone '{}'", origin, r.id);
        FieldReader f(doc, "peaks", r);
        f.reject_unknown({"wind", "rain"});
        fc.wind_peak[z] = f.num("wind");
        fc.rain_peak[z] = f.num("rain");
        seen[z] = true;
    }
    for (size_t i = 0; i < net.zones.size(); ++i)
        if (!seen[i]) fail_data("{}: [peaks]: missing zone '{}'", origin, net.zones[i].id);

    const Section& g = doc.need("gammas");
    fc.gamma_d1 = scalar_num(doc, g, "gamma_d1", false, 1.0);
    fc.gamma_d2 = scalar_num(doc, g, "gamma_d2", false, 2.0);
    fc.gamma1 = scalar_num(doc, g, "gamma1", true);
    fc.gamma2 = scalar_num(doc, g, "gamma2", true);
    fc.hlcc_gamma1 = scalar_num(doc, g, "hlcc_gamma1", false, -1.0);
    fc.hlcc_gamma2 = scalar_num(doc, g, "hlcc_gamma2", false, -1.0);
    return fc;
}

Forecast parse_forecast(const std::filesystem::path& path, const Network& net) {
    return parse_forecast_text(read_file(path), net, path.string());
}

}  // namespace ehdn
