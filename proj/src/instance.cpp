#include "closure/instance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "closure/mps.hpp"
#include "json.hpp"

namespace closure {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Sense s) {
    switch (s) {
        case Sense::le: return "<=";
        case Sense::eq: return "=";
        case Sense::ge: return ">=";
    }
    return "?";
}

Sense sense_from_string(const std::string& s) {
    if (s == "<=") return Sense::le;
    if (s == "=") return Sense::eq;
    if (s == ">=") return Sense::ge;
    throw ConversionError("unknown constraint sense '" + s + "'");
}

void MilpInstance::validate() const {
    const int n = static_cast<int>(vars.size());
    for (const auto& v : vars) {
        if (v.lower > v.upper)
            throw ConversionError("variable '" + v.name + "' has lower > upper");
        if (std::isnan(v.lower) || std::isnan(v.upper) || !std::isfinite(v.obj_coeff))
            throw ConversionError("variable '" + v.name + "' has non-finite data");
    }
    for (const auto& c : constraints) {
        int prev = -1;
        for (const auto& e : c.coeffs) {
            if (e.index < 0 || e.index >= n)
                throw ConversionError("constraint '" + c.name + "' references variable index " +
                                      std::to_string(e.index));
            if (e.index <= prev)
                throw ConversionError("constraint '" + c.name + "' has unsorted or duplicate indices");
            if (e.value == 0.0)
                throw ConversionError("constraint '" + c.name + "' stores an explicit zero");
            if (!std::isfinite(e.value))
                throw ConversionError("constraint '" + c.name + "' has a non-finite coefficient");
            prev = e.index;
        }
        if (!std::isfinite(c.rhs))
            throw ConversionError("constraint '" + c.name + "' has non-finite rhs");
    }
}

namespace {

ordered_json encode_bound(double v) {
    if (v == kInf) return "+inf";
    if (v == -kInf) return "-inf";
    return v;
}

double decode_bound(const ordered_json& j, double infinite_means) {
    if (j.is_null()) return infinite_means;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "+inf" || s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ConversionError("bad bound literal '" + s + "'");
    }
    return j.get<double>();
}

}  // namespace

std::string MilpInstance::to_json_string() const {
    ordered_json j;
    j["name"] = name;
    j["objective_sense"] = objective_sense == ObjSense::minimize ? "min" : "max";
    j["vars"] = ordered_json::array();
    for (const auto& v : vars) {
        ordered_json jv;
        jv["name"] = v.name;
        jv["lower"] = encode_bound(v.lower);
        jv["upper"] = encode_bound(v.upper);
        jv["is_integer"] = v.is_integer;
        jv["obj_coeff"] = v.obj_coeff;
        j["vars"].push_back(std::move(jv));
    }
    j["constraints"] = ordered_json::array();
    for (const auto& c : constraints) {
        ordered_json jc;
        jc["name"] = c.name;
        jc["coeffs"] = ordered_json::array();
        for (const auto& e : c.coeffs) jc["coeffs"].push_back({e.index, e.value});
        jc["sense"] = to_string(c.sense);
        jc["rhs"] = c.rhs;
        j["constraints"].push_back(std::move(jc));
    }
    return j.dump(2) + "\n";
}

MilpInstance MilpInstance::from_json_string(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    MilpInstance inst;
    inst.name = j.at("name").get<std::string>();
    const std::string sense = j.at("objective_sense").get<std::string>();
    if (sense == "min")
        inst.objective_sense = ObjSense::minimize;
    else if (sense == "max")
        inst.objective_sense = ObjSense::maximize;
    else
        throw ConversionError("bad objective_sense '" + sense + "'");
    for (const auto& jv : j.at("vars")) {
        Variable v;
        v.name = jv.at("name").get<std::string>();
        v.lower = decode_bound(jv.at("lower"), -kInf);
        v.upper = decode_bound(jv.at("upper"), kInf);
        v.is_integer = jv.at("is_integer").get<bool>();
        v.obj_coeff = jv.at("obj_coeff").get<double>();
        inst.vars.push_back(std::move(v));
    }
    for (const auto& jc : j.at("constraints")) {
        Constraint c;
        c.name = jc.at("name").get<std::string>();
        for (const auto& e : jc.at("coeffs"))
            c.coeffs.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
        c.sense = sense_from_string(jc.at("sense").get<std::string>());
        c.rhs = jc.at("rhs").get<double>();
        inst.constraints.push_back(std::move(c));
    }
    inst.validate();
    return inst;
}

void MilpInstance::save_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << to_json_string();
}

MilpInstance MilpInstance::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

MilpInstance MilpInstance::load(const std::string& path) {
    auto ends_with = [&](const std::string& suffix) {
        return path.size() >= suffix.size() &&
               path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".mps") || ends_with(".MPS")) {
        std::ifstream in(path);
        if (!in) throw Error("cannot read '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_mps(ss.str());
    }
    return load_json(path);
}

uint64_t instance_signature(const MilpInstance& inst) {
    HashStream h;
    h.add(static_cast<uint64_t>(inst.vars.size()));
    for (const auto& v : inst.vars) h.add(v.is_integer);
    h.add(static_cast<uint64_t>(inst.constraints.size()));
    for (const auto& c : inst.constraints) {
        h.add(static_cast<int>(c.sense));
        h.add(static_cast<uint64_t>(c.coeffs.size()));
        for (const auto& e : c.coeffs) {
            h.add(e.index);
            h.add(e.value);
        }
    }
    return h.value();
}

}  // namespace closure
