#include "hetinf/io.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "hetinf/charts.hpp"

namespace hetinf {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(Errc::IoError, "cannot open " + path + " for writing");
    return f;
}

void finish(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw Error(Errc::IoError, "short write to " + path);
}

json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::IoError, "cannot open " + path);
    try {
        json j;
        f >> j;
        return j;
    } catch (const std::exception& e) {
        throw Error(Errc::IoError, path + ": " + e.what());
    }
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec_from(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json params_json(const Params& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}};
}

Params params_from(const json& j) {
    Params p;
    p.alpha = j.at("alpha").get<double>();
    p.beta = j.at("beta").get<double>();
    p.gamma = j.at("gamma").get<double>();
    return p;
}

LinMode mode_from(const std::string& s) {
    for (LinMode m : {LinMode::GapInBeta, LinMode::HetInfinity, LinMode::PeriodicGap})
        if (s == lin_mode_name(m)) return m;
    throw Error(Errc::IoError, "unknown problem mode '" + s + "'");
}

const char* event_kind_name(BranchEvent::Kind k) {
    return k == BranchEvent::Kind::Zero ? "zero" : "fold";
}

json scalars_json(const BranchPoint& pt, const Branch& br, const BvpLayout& lay) {
    json s = json::object();
    for (int k = 0; k < lay.n_scalars; ++k) {
        const std::string name = k < static_cast<int>(br.scalar_names.size())
                                     ? br.scalar_names[k]
                                     : "p" + std::to_string(k);
        s[name] = pt.x[lay.ix_scalar(k)];
    }
    return s;
}

}  // namespace

void write_orbit_csv(const std::string& path, const std::vector<OrbitSegment>& segs) {
    auto f = open_out(path);
    f << "t_normalized,chart,c1,c2,c3\n";
    for (const OrbitSegment& seg : segs) {
        const char* name = chart_name(seg.chart);
        for (size_t i = 0; i < seg.t.size(); ++i)
            f << fmt17(seg.t[i]) << ',' << name << ',' << fmt17(seg.x[i][0]) << ','
              << fmt17(seg.x[i][1]) << ',' << fmt17(seg.x[i][2]) << '\n';
    }
    finish(f, path);
}

void write_branch_csv(const std::string& path, const Branch& br, const BvpLayout& lay) {
    auto f = open_out(path);
    f << "step,s";
    for (int k = 0; k < lay.n_scalars; ++k)
        f << ','
          << (k < static_cast<int>(br.scalar_names.size()) ? br.scalar_names[k]
                                                           : "p" + std::to_string(k));
    const size_t nmon = br.points.empty() ? 0 : br.points.front().mon.size();
    for (size_t m = 0; m < nmon; ++m) f << ",mon_" << m;
    f << '\n';
    for (size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& pt = br.points[i];
        f << i << ',' << fmt17(pt.s);
        for (int k = 0; k < lay.n_scalars; ++k) f << ',' << fmt17(pt.x[lay.ix_scalar(k)]);
        for (size_t m = 0; m < nmon; ++m) f << ',' << fmt17(m < pt.mon.size() ? pt.mon[m] : 0.0);
        f << '\n';
    }
    finish(f, path);
}

void write_lin_branch_csv(const std::string& path, const Branch& br, const LinProblem& lp) {
    const BvpLayout& lay = lp.layout();
    const LinSetup st = lp.snapshot();
    const int nfB = st.ntstB * st.ncol;
    auto f = open_out(path);
    f << "step,s,alpha,beta,eta,theta_B,T0,TB,delta_0,"
         "u0_x,u0_y,u0_z,uB1_x,uB1_y,uB1_z\n";
    for (size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& pt = br.points[i];
        const auto sc = [&](int k, double frozen) {
            return k >= 0 ? pt.x[lay.ix_scalar(k)] : frozen;
        };
        const auto node = [&](int seg, int g, int c) { return pt.x[lay.ix_node(seg, g, c)]; };
        const Vec3 uB1{node(0, nfB, 0), node(0, nfB, 1), node(0, nfB, 2)};
        const Vec3 gl = blownup_to_original({ChartId::BlownUp, uB1}).p;
        f << i << ',' << fmt17(pt.s) << ',' << fmt17(sc(lp.iAlpha(), st.params.alpha)) << ','
          << fmt17(sc(lp.iBeta(), st.params.beta)) << ',' << fmt17(sc(lp.iEta(), 0.0)) << ','
          << fmt17(sc(lp.iTheta(), 0.0)) << ',' << fmt17(sc(lp.iT0(), 0.0)) << ','
          << fmt17(sc(lp.iTB(), 0.0)) << ',' << fmt17(sc(lp.iDelta0(), st.delta0));
        for (int c = 0; c < 3; ++c) f << ',' << fmt17(node(1, 0, c));
        for (int c = 0; c < 3; ++c) f << ',' << fmt17(gl[c]);
        f << '\n';
    }
    finish(f, path);
}

void write_events_json(const std::string& path, const Branch& br, const BvpLayout& lay) {
    json j;
    j["end"] = branch_end_name(br.end);
    j["n_points"] = br.points.size();
    j["events"] = json::array();
    for (const BranchEvent& ev : br.events) {
        json e;
        e["kind"] = event_kind_name(ev.kind);
        e["index"] = ev.index;
        e["s"] = ev.s;
        e["refined_param"] = ev.refined_param;
        e["scalars"] = scalars_json(ev.point, br, lay);
        j["events"].push_back(std::move(e));
    }
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish(f, path);
}

void write_metadata_json(const std::string& path, const std::vector<std::string>& argv_effective,
                         const std::vector<std::pair<std::string, std::string>>& extra) {
    json j;
    j["argv_effective"] = argv_effective;
    for (const auto& [k, v] : extra) j[k] = v;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish(f, path);
}

void save_lin(const std::string& path, const LinProblem& lp) {
    const LinSetup s = lp.snapshot();
    json j;
    j["kind"] = "lin_problem";
    j["mode"] = lin_mode_name(s.mode);
    j["params"] = params_json(s.params);
    j["ntst"] = s.ntst;
    j["ntstB"] = s.ntstB;
    j["ncol"] = s.ncol;
    j["delta0"] = s.delta0;
    j["deltaB"] = s.deltaB;
    j["psi"] = vec_json(s.psi);
    j["eta0"] = s.eta0;
    j["es_ref"] = vec_json(s.es_ref);
    j["pbase"] = vec_json(s.pbase);
    j["efloquet"] = vec_json(s.efloquet);
    j["tmB"] = lp.problem().segs[0].mesh.tm;
    j["tm0"] = lp.problem().segs[1].mesh.tm;
    j["x"] = lp.unknowns();
    auto f = open_out(path);
    f << j.dump() << '\n';
    finish(f, path);
}

std::unique_ptr<LinProblem> load_lin(const std::string& path) {
    const json j = read_json(path);
    try {
        if (j.at("kind").get<std::string>() != "lin_problem")
            throw Error(Errc::IoError, path + " is not a saved connection problem");
        LinSetup s;
        s.mode = mode_from(j.at("mode").get<std::string>());
        s.params = params_from(j.at("params"));
        s.ntst = j.at("ntst").get<int>();
        s.ntstB = j.value("ntstB", 0);
        s.ncol = j.at("ncol").get<int>();
        s.delta0 = j.at("delta0").get<double>();
        s.deltaB = j.at("deltaB").get<double>();
        s.psi = vec_from(j.at("psi"));
        s.eta0 = j.at("eta0").get<double>();
        s.es_ref = vec_from(j.at("es_ref"));
        s.pbase = vec_from(j.at("pbase"));
        s.efloquet = vec_from(j.at("efloquet"));
        std::vector<double> x = j.at("x").get<std::vector<double>>();
        auto lp = std::make_unique<LinProblem>(s, std::move(x));
        if (j.contains("tmB"))
            lp->set_mesh_times(j.at("tmB").get<std::vector<double>>(),
                               j.at("tm0").get<std::vector<double>>());
        return lp;
    } catch (const json::exception& e) {
        throw Error(Errc::IoError, path + ": " + e.what());
    }
}

void save_periodic(const std::string& path, const PeriodicOrbit& po) {
    json j;
    j["kind"] = "periodic_orbit";
    j["params"] = params_json(po.params);
    j["ntst"] = po.ntst;
    j["ncol"] = po.ncol;
    j["period"] = po.period;
    j["x"] = json::array();
    for (const Vec3& v : po.x) j["x"].push_back(vec_json(v));
    auto f = open_out(path);
    f << j.dump() << '\n';
    finish(f, path);
}

PeriodicOrbit load_periodic(const std::string& path) {
    const json j = read_json(path);
    try {
        if (j.at("kind").get<std::string>() != "periodic_orbit")
            throw Error(Errc::IoError, path + " is not a saved periodic orbit");
        PeriodicOrbit po;
        po.params = params_from(j.at("params"));
        po.ntst = j.at("ntst").get<int>();
        po.ncol = j.at("ncol").get<int>();
        po.period = j.at("period").get<double>();
        for (const json& v : j.at("x")) po.x.push_back(vec_from(v));
        if (static_cast<int>(po.x.size()) != po.ntst * po.ncol + 1)
            throw Error(Errc::IoError, path + ": node count disagrees with the mesh");
        return po;
    } catch (const json::exception& e) {
        throw Error(Errc::IoError, path + ": " + e.what());
    }
}

}  // namespace hetinf
