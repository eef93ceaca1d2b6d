#pragma once

// JSON ingestion of set and campaign configs, and the CSV report emitter.
// Schemas are documented in docs/schemas.md with shipped examples under
// docs/configs/.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rieszlab/verify.hpp"

namespace rieszlab {

using nlohmann::json;

namespace detail {

inline Point parse_point(const json& j, const char* what) {
    if (!j.is_array() || j.size() < 1 || j.size() > 3)
        throw std::invalid_argument(std::string(what) + ": expected an array of 1-3 coordinates");
    Point p{0, 0, 0};
    for (std::size_t k = 0; k < j.size(); ++k) p[k] = j[k].get<double>();
    return p;
}

inline std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline SetSpec parse_set_spec(const json& j) {
    if (!j.contains("dim") || !j.contains("parts"))
        throw std::invalid_argument("set spec: required keys are \"dim\" and \"parts\"");
    SetSpec s;
    s.dim = j.at("dim").get<int>();
    for (const auto& pj : j.at("parts")) {
        const std::string type = pj.at("type").get<std::string>();
        if (type == "interval") {
            s.parts.push_back(Primitive::interval(pj.at("a").get<double>(), pj.at("b").get<double>()));
        } else if (type == "ball") {
            s.parts.push_back(Primitive::ball(detail::parse_point(pj.at("center"), "ball center"),
                                              pj.at("radius").get<double>()));
        } else if (type == "sphere") {
            s.parts.push_back(Primitive::sphere(detail::parse_point(pj.at("center"), "sphere center"),
                                                pj.at("radius").get<double>()));
        } else if (type == "ellipsoid") {
            s.parts.push_back(
                Primitive::ellipsoid(detail::parse_point(pj.at("center"), "ellipsoid center"),
                                     detail::parse_point(pj.at("semi_axes"), "semi_axes")));
        } else if (type == "annulus") {
            s.parts.push_back(Primitive::annulus(detail::parse_point(pj.at("center"), "annulus center"),
                                                 pj.at("r_inner").get<double>(),
                                                 pj.at("r_outer").get<double>()));
        } else {
            throw std::invalid_argument("set spec: unknown primitive type \"" + type + "\"");
        }
    }
    s.validate();
    return s;
}

inline SetSpec load_set_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open set config: " + path);
    json j;
    in >> j;
    return parse_set_spec(j);
}

inline MomentOrder parse_moment_order(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "log") return MomentOrder::log();
        throw std::invalid_argument("q value: expected a number or \"log\"");
    }
    return MomentOrder::power(j.get<double>());
}

inline Grading parse_grading(const std::string& s) {
    if (s == "uniform") return Grading::uniform;
    if (s == "endpoint_refined") return Grading::endpoint_refined;
    throw std::invalid_argument("grading: expected \"uniform\" or \"endpoint_refined\"");
}

inline SolverOptions::Method parse_solver_method(const std::string& s) {
    if (s == "active-set" || s == "active_set") return SolverOptions::Method::active_set;
    if (s == "pgd" || s == "projected-gradient" || s == "projected_gradient")
        return SolverOptions::Method::projected_gradient;
    throw std::invalid_argument("solver method: expected \"active-set\" or \"pgd\"");
}

inline CampaignSpec parse_campaign(const json& j) {
    CampaignSpec c;
    const std::string th = j.at("theorem").get<std::string>();
    if (th == "T1_newton")
        c.theorem = Theorem::T1_newton;
    else if (th == "T2_codim_one")
        c.theorem = Theorem::T2_codim_one;
    else if (th == "P4_threshold")
        c.theorem = Theorem::P4_threshold;
    else if (th == "C3_sweep")
        c.theorem = Theorem::C3_sweep;
    else
        throw std::invalid_argument("campaign: unknown theorem \"" + th + "\"");

    c.n = j.at("n").get<int>();
    if (j.at("p").is_string()) {
        if (j.at("p").get<std::string>() != "log")
            throw std::invalid_argument("campaign: p must be a number or \"log\"");
        c.p_is_log = true;
    } else {
        c.p_is_log = false;
        c.p = j.at("p").get<double>();
    }
    for (const auto& qj : j.at("q_values")) c.q_values.push_back(parse_moment_order(qj));
    for (const auto& rj : j.at("resolutions")) c.resolutions.push_back(rj.get<int>());

    int index = 0;
    for (const auto& sj : j.at("sets")) {
        NamedSet ns;
        ns.name = sj.contains("name") ? sj.at("name").get<std::string>() : "set" + std::to_string(index);
        ns.spec = parse_set_spec(sj);
        c.sets.push_back(std::move(ns));
        ++index;
    }
    if (j.contains("solver")) {
        const auto& sv = j.at("solver");
        if (sv.contains("method")) c.solver.method = parse_solver_method(sv.at("method").get<std::string>());
        if (sv.contains("tol")) c.solver.tol = sv.at("tol").get<double>();
        if (sv.contains("max_iter")) c.solver.max_iter = sv.at("max_iter").get<int>();
    }
    if (j.contains("grading")) c.grading = parse_grading(j.at("grading").get<std::string>());
    if (j.contains("jscan")) {
        const auto& js = j.at("jscan");
        if (js.contains("enabled")) c.jscan.enabled = js.at("enabled").get<bool>();
        if (js.contains("r_max")) c.jscan.r_max = js.at("r_max").get<double>();
        if (js.contains("z_max")) c.jscan.z_max = js.at("z_max").get<double>();
        if (js.contains("nr")) c.jscan.nr = js.at("nr").get<int>();
        if (js.contains("nz")) c.jscan.nz = js.at("nz").get<int>();
        if (js.contains("quad_nodes")) c.jscan.quad_nodes = js.at("quad_nodes").get<int>();
    }
    c.validate();
    return c;
}

inline CampaignSpec load_campaign(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open campaign config: " + path);
    json j;
    in >> j;
    return parse_campaign(j);
}

// Machine-readable report: one row per (set, resolution, q); 17 significant
// digits; deterministic row order.
inline std::string campaign_csv(const CampaignReport& rep) {
    std::ostringstream os;
    os << "set_id,n,p,q,resolution,capacity_K,matched_radius,moment_K,moment_ball,gap,"
          "error_estimate,verdict\n";
    for (const auto& r : rep.records) {
        os << r.set_name << ',' << rep.n << ',';
        os << (rep.p_is_log ? std::string("log") : detail::format17(rep.p)) << ',';
        os << (r.cmp.q.is_log ? std::string("log") : detail::format17(r.cmp.q.q)) << ',';
        os << r.resolution << ',' << detail::format17(r.capacity_K) << ','
           << detail::format17(r.cmp.matched_radius) << ',' << detail::format17(r.cmp.moment_K) << ','
           << detail::format17(r.cmp.moment_ball) << ',' << detail::format17(r.cmp.gap) << ','
           << detail::format17(r.cmp.error_estimate) << ',' << verdict_label(r.cmp.verdict) << '\n';
    }
    return os.str();
}

inline void emit_csv(const CampaignReport& rep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << campaign_csv(rep);
    if (!out) throw std::runtime_error("write failed: " + path);
}

// CI gate used by `verify`: exit 3 when any record is violated.
inline bool any_violated(const CampaignReport& rep) {
    for (const auto& r : rep.records)
        if (r.cmp.verdict == Verdict::violated) return true;
    return false;
}

// J-grid CSV: r,z,value rows after a header.
inline void emit_jgrid_csv(const JGrid& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "r,z,J_v_minus_u\n";
    for (std::size_t i = 0; i < g.r_nodes.size(); ++i)
        for (std::size_t j = 0; j < g.z_nodes.size(); ++j)
            out << detail::format17(g.r_nodes[i]) << ',' << detail::format17(g.z_nodes[j]) << ','
                << detail::format17(g.at(i, j)) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rieszlab
