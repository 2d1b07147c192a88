#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "doprd/instance.hpp"

namespace doprd {

inline constexpr const char* kInstanceFormat = "doprd-instance";
inline constexpr int kInstanceFormatVersion = 1;

inline nlohmann::json to_json(const Instance& inst) {
    using nlohmann::json;
    json j;
    j["format"] = kInstanceFormat;
    j["version"] = kInstanceFormatVersion;
    j["name"] = inst.name;
    j["depot"] = {inst.depot.x, inst.depot.y};
    j["deadline"] = inst.deadline;
    const auto& p = inst.meta;
    j["params"] = {{"beta", p.beta},
                   {"delta", p.delta},
                   {"c", p.c},
                   {"seed", p.seed},
                   {"t_standard", p.t_standard},
                   {"horizon", p.horizon},
                   {"sigma0", p.sigma0},
                   {"rounding", p.rounding == DistanceRounding::ceil ? "ceil" : "floor"},
                   {"nonstandard", p.nonstandard}};
    json cs = json::array();
    for (const auto& c : inst.customers) {
        cs.push_back({{"id", c.id},
                      {"x", c.pos.x},
                      {"y", c.pos.y},
                      {"true_release", c.true_release},
                      {"mode", to_string(c.mode)},
                      {"estimate_mean", c.estimate_mean},
                      {"estimate_std", c.estimate_std}});
    }
    j["customers"] = std::move(cs);
    json rows = json::array();
    for (int i = 0; i < inst.travel.size(); ++i) {
        json row = json::array();
        for (int k = 0; k < inst.travel.size(); ++k) row.push_back(inst.travel(i, k));
        rows.push_back(std::move(row));
    }
    j["travel"] = std::move(rows);
    return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kInstanceFormat) throw ParseError("not a doprd instance file");
        if (j.at("version").get<int>() != kInstanceFormatVersion) throw ParseError("unsupported instance version");
        Instance inst;
        inst.name = j.value("name", std::string{});
        inst.depot = {j.at("depot").at(0).get<double>(), j.at("depot").at(1).get<double>()};
        inst.deadline = j.at("deadline").get<double>();
        const auto& p = j.at("params");
        inst.meta.beta = p.at("beta").get<double>();
        inst.meta.delta = p.at("delta").get<double>();
        inst.meta.c = p.at("c").get<double>();
        inst.meta.seed = p.at("seed").get<std::uint64_t>();
        inst.meta.t_standard = p.at("t_standard").get<double>();
        inst.meta.horizon = p.at("horizon").get<double>();
        inst.meta.sigma0 = p.at("sigma0").get<double>();
        inst.meta.rounding = p.at("rounding").get<std::string>() == "floor" ? DistanceRounding::floor : DistanceRounding::ceil;
        inst.meta.nonstandard = p.at("nonstandard").get<bool>();
        for (const auto& c : j.at("customers")) {
            Customer cu;
            cu.id = c.at("id").get<int>();
            cu.pos = {c.at("x").get<double>(), c.at("y").get<double>()};
            cu.true_release = c.at("true_release").get<double>();
            cu.mode = release_mode_from_string(c.at("mode").get<std::string>());
            cu.estimate_mean = c.at("estimate_mean").get<double>();
            cu.estimate_std = c.at("estimate_std").get<double>();
            inst.customers.push_back(cu);
        }
        if (j.contains("travel")) {
            const auto& rows = j.at("travel");
            const int n = static_cast<int>(rows.size());
            inst.travel = TravelMatrix(n);
            for (int a = 0; a < n; ++a) {
                if (static_cast<int>(rows.at(a).size()) != n) throw ParseError("travel matrix is not square");
                for (int b = 0; b < n; ++b) inst.travel(a, b) = rows.at(a).at(b).get<Duration>();
            }
        } else {
            std::vector<Point> pts;
            for (const auto& c : inst.customers) pts.push_back(c.pos);
            inst.travel = travel_matrix(inst.depot, pts, inst.meta.rounding);
        }
        validate(inst);
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("instance file: ") + e.what());
    } catch (const ParameterError& e) {
        throw ParseError(std::string("instance file: ") + e.what());
    }
}

inline std::string write_instance_string(const Instance& inst) { return to_json(inst).dump(1) + "\n"; }

inline Instance read_instance_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("instance file: ") + e.what());
    }
    return instance_from_json(j);
}

inline void write_instance_file(const Instance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << write_instance_string(inst);
}

inline Instance read_instance_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_instance_string(buf.str());
}

}  // namespace doprd
