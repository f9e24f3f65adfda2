#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfk/geometry.hpp"

namespace pfk {

using json = nlohmann::json;

// Inline CLI records and catalog files share one schema:
//   {"type":"ball","n":2,"r":1.0}            (optional "center":[x,y])
//   {"type":"rectangle","a":1.0,"b":2.0}
//   {"type":"polygon","vertices":[[x,y],...]}
//   {"type":"annulus","n":2,"rho":0.5,"R":1.0}
inline Domain domain_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw InvalidInput("domain record: expected an object with a \"type\" field");
    const std::string type = j.at("type").get<std::string>();
    try {
        if (type == "ball") {
            Ball b;
            b.n = j.value("n", 2);
            b.r = j.at("r").get<double>();
            if (j.contains("center")) {
                b.center[0] = j.at("center").at(0).get<double>();
                b.center[1] = j.at("center").at(1).get<double>();
            }
            Domain d = b;
            validate(d);
            return d;
        }
        if (type == "rectangle") {
            Rectangle r{j.at("a").get<double>(), j.at("b").get<double>()};
            Domain d = r;
            validate(d);
            return d;
        }
        if (type == "polygon") {
            Polygon2D p;
            for (const auto& v : j.at("vertices"))
                p.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            Domain d = p;
            validate(d);
            return d;
        }
        if (type == "annulus") {
            Annulus a;
            a.n = j.value("n", 2);
            a.rho = j.at("rho").get<double>();
            a.R = j.at("R").get<double>();
            Domain d = a;
            validate(d);
            return d;
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("domain record: ") + e.what());
    }
    throw InvalidInput("domain record: unknown type \"" + type + "\"");
}

inline json domain_to_json(const Domain& d) {
    struct V {
        json operator()(const Ball& b) const {
            json j{{"type", "ball"}, {"n", b.n}, {"r", b.r}};
            if (b.center[0] != 0.0 || b.center[1] != 0.0) j["center"] = {b.center[0], b.center[1]};
            return j;
        }
        json operator()(const Rectangle& r) const {
            return json{{"type", "rectangle"}, {"a", r.a}, {"b", r.b}};
        }
        json operator()(const Polygon2D& p) const {
            json verts = json::array();
            for (const auto& v : p.vertices) verts.push_back({v[0], v[1]});
            return json{{"type", "polygon"}, {"vertices", verts}};
        }
        json operator()(const Annulus& a) const {
            return json{{"type", "annulus"}, {"n", a.n}, {"rho", a.rho}, {"R", a.R}};
        }
    };
    return std::visit(V{}, d);
}

struct CatalogEntry {
    std::string name;
    Domain domain;
};

struct Catalog {
    std::string name = "default";
    std::vector<CatalogEntry> entries;
    std::vector<double> p_list{1.25, 1.5, 2.0, 3.0, 4.0};
    int resolution = 128;
    std::map<std::string, double> tolerance_overrides;
};

inline Catalog default_catalog() {
    Catalog c;
    const double s = std::sqrt(pi);
    c.entries = {
        {"unit_disk", Ball{2, 1.0, {0.0, 0.0}}},
        {"unit_square", Rectangle{1.0, 1.0}},
        {"rectangle_2x1", Rectangle{2.0, 1.0}},
        {"square_area_pi", Rectangle{s, s}},
        {"annulus_half", Annulus{2, 0.5, 1.0}},
    };
    return c;
}

inline Catalog catalog_from_json(const json& j) {
    Catalog c;
    try {
        c.name = j.value("name", std::string("catalog"));
        if (j.contains("resolution")) c.resolution = j.at("resolution").get<int>();
        if (j.contains("p_list")) {
            c.p_list.clear();
            for (const auto& v : j.at("p_list")) c.p_list.push_back(v.get<double>());
        }
        std::vector<std::string> seen;
        for (const auto& rec : j.at("domains")) {
            CatalogEntry e;
            e.name = rec.at("name").get<std::string>();
            for (const auto& s : seen)
                if (s == e.name) throw InvalidInput("catalog: duplicate domain name " + e.name);
            seen.push_back(e.name);
            e.domain = domain_from_json(rec);
            c.entries.push_back(std::move(e));
        }
        if (j.contains("tolerances"))
            for (auto it = j.at("tolerances").begin(); it != j.at("tolerances").end(); ++it)
                c.tolerance_overrides[it.key()] = it.value().get<double>();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("catalog: ") + e.what());
    }
    if (c.entries.empty()) throw InvalidInput("catalog: no domains");
    return c;
}

inline json catalog_to_json(const Catalog& c) {
    json j;
    j["name"] = c.name;
    j["resolution"] = c.resolution;
    j["p_list"] = c.p_list;
    j["domains"] = json::array();
    for (const auto& e : c.entries) {
        json rec = domain_to_json(e.domain);
        rec["name"] = e.name;
        j["domains"].push_back(rec);
    }
    if (!c.tolerance_overrides.empty()) {
        json t;
        for (const auto& [k, v] : c.tolerance_overrides) t[k] = v;
        j["tolerances"] = t;
    }
    return j;
}

}  // namespace pfk
