#include "closure/cut.hpp"

#include <cstdio>

#include "json.hpp"

namespace closure {

namespace {

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string cut_to_json_string(const Cut& cut) {
    nlohmann::ordered_json j;
    j["coeffs"] = nlohmann::ordered_json::array();
    for (const auto& e : cut.coeffs) j["coeffs"].push_back({e.index, e.value});
    j["rhs"] = cut.rhs;
    j["space"] = cut.space == CutSpace::standard ? "standard" : "original";
    if (cut.origin) {
        nlohmann::ordered_json jo;
        jo["instance_id"] = cut.origin->instance_id;
        if (cut.origin->basis_hash)
            jo["basis_hash"] = hex64(*cut.origin->basis_hash);
        else
            jo["basis_hash"] = nullptr;
        if (cut.origin->row_index)
            jo["row_index"] = *cut.origin->row_index;
        else
            jo["row_index"] = nullptr;
        j["origin"] = std::move(jo);
    } else {
        j["origin"] = nullptr;
    }
    return j.dump();
}

Cut cut_from_json_string(const std::string& text) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
    Cut cut;
    for (const auto& e : j.at("coeffs")) {
        int index = e.at(0).get<int>();
        if (index < 0) throw Error("cut coefficient with negative index");
        cut.coeffs.push_back({index, e.at(1).get<double>()});
    }
    cut.rhs = j.at("rhs").get<double>();
    const std::string space = j.at("space").get<std::string>();
    if (space == "standard")
        cut.space = CutSpace::standard;
    else if (space == "original")
        cut.space = CutSpace::original;
    else
        throw Error("unknown cut space '" + space + "'");
    if (j.contains("origin") && !j.at("origin").is_null()) {
        const auto& jo = j.at("origin");
        CutOrigin origin;
        origin.instance_id = jo.value("instance_id", std::string{});
        if (jo.contains("basis_hash") && jo.at("basis_hash").is_string())
            origin.basis_hash = std::stoull(jo.at("basis_hash").get<std::string>(), nullptr, 16);
        if (jo.contains("row_index") && jo.at("row_index").is_number())
            origin.row_index = jo.at("row_index").get<int>();
        cut.origin = std::move(origin);
    }
    return cut;
}

}  // namespace closure
