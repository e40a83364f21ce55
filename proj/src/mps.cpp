#include "closure/mps.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace closure {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, int line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected a number, got '" + tok + "'", line_no);
    }
}

struct RowInfo {
    Sense sense;
    int index;  // position among constraints, -1 for the objective / free rows
};

}  // namespace

MilpInstance parse_mps(const std::string& text) {
    MilpInstance inst;
    std::unordered_map<std::string, RowInfo> rows;
    std::unordered_map<std::string, int> cols;
    std::string obj_row_name;
    std::unordered_map<std::string, std::unordered_set<int>> seen_coeffs;  // row -> col set
    std::unordered_set<int> rhs_seen;
    bool obj_rhs_seen = false;
    std::map<int, double> ranges;  // constraint index -> range value, ordered
    std::unordered_set<int> lower_set, upper_set;

    enum class Section { none, objsense, rows, columns, rhs, ranges, bounds, done };
    Section section = Section::none;
    bool saw_rows = false, saw_columns = false;
    bool integer_mode = false;

    auto require_col = [&](const std::string& name, int line_no) -> int {
        auto it = cols.find(name);
        if (it == cols.end()) throw ParseError("unknown column '" + name + "'", line_no);
        return it->second;
    };
    auto require_row = [&](const std::string& name, int line_no) -> const RowInfo& {
        auto it = rows.find(name);
        if (it == rows.end()) throw ParseError("unknown row '" + name + "'", line_no);
        return it->second;
    };

    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '*') continue;

        if (!std::isspace(static_cast<unsigned char>(line[0]))) {
            auto toks = tokenize(line);
            const std::string& head = toks[0];
            if (head == "NAME") {
                if (toks.size() > 1) inst.name = toks[1];
            } else if (head == "OBJSENSE") {
                section = Section::objsense;
                if (toks.size() > 1) {
                    const std::string& s = toks[1];
                    inst.objective_sense = (s == "MAX" || s == "MAXIMIZE")
                                               ? ObjSense::maximize
                                               : ObjSense::minimize;
                    section = Section::none;
                }
            } else if (head == "ROWS") {
                section = Section::rows;
                saw_rows = true;
            } else if (head == "COLUMNS") {
                if (!saw_rows) throw ParseError("COLUMNS before ROWS", line_no);
                section = Section::columns;
                saw_columns = true;
            } else if (head == "RHS") {
                section = Section::rhs;
            } else if (head == "RANGES") {
                section = Section::ranges;
            } else if (head == "BOUNDS") {
                section = Section::bounds;
            } else if (head == "ENDATA") {
                section = Section::done;
                break;
            } else {
                throw ParseError("unknown section '" + head + "'", line_no);
            }
            continue;
        }

        auto toks = tokenize(line);
        if (toks.empty()) continue;

        switch (section) {
            case Section::objsense: {
                const std::string& s = toks[0];
                inst.objective_sense =
                    (s == "MAX" || s == "MAXIMIZE") ? ObjSense::maximize : ObjSense::minimize;
                section = Section::none;
                break;
            }
            case Section::rows: {
                if (toks.size() != 2) throw ParseError("malformed ROWS entry", line_no);
                const std::string& kind = toks[0];
                const std::string& name = toks[1];
                if (rows.count(name)) throw ParseError("duplicate row '" + name + "'", line_no);
                if (kind == "N") {
                    // first N row is the objective, later ones are free rows
                    rows[name] = {Sense::eq, -1};
                    if (obj_row_name.empty()) obj_row_name = name;
                } else if (kind == "L" || kind == "G" || kind == "E") {
                    Sense s = kind == "L" ? Sense::le : kind == "G" ? Sense::ge : Sense::eq;
                    rows[name] = {s, static_cast<int>(inst.constraints.size())};
                    inst.constraints.push_back({name, {}, s, 0.0});
                } else {
                    throw ParseError("bad row type '" + kind + "'", line_no);
                }
                break;
            }
            case Section::columns: {
                bool is_marker = false;
                for (const auto& t : toks)
                    if (t.find("MARKER") != std::string::npos) is_marker = true;
                if (is_marker) {
                    for (const auto& t : toks) {
                        if (t.find("INTORG") != std::string::npos) integer_mode = true;
                        if (t.find("INTEND") != std::string::npos) integer_mode = false;
                    }
                    break;
                }
                if (toks.size() < 3 || toks.size() % 2 == 0)
                    throw ParseError("malformed COLUMNS entry", line_no);
                const std::string& cname = toks[0];
                int ci;
                auto it = cols.find(cname);
                if (it == cols.end()) {
                    ci = static_cast<int>(inst.vars.size());
                    cols[cname] = ci;
                    Variable v;
                    v.name = cname;
                    v.is_integer = integer_mode;
                    inst.vars.push_back(std::move(v));
                } else {
                    ci = it->second;
                }
                for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
                    const RowInfo& ri = require_row(toks[k], line_no);
                    double v = parse_number(toks[k + 1], line_no);
                    if (!seen_coeffs[toks[k]].insert(ci).second)
                        throw ParseError("duplicate coefficient for column '" + cname +
                                             "' in row '" + toks[k] + "'",
                                         line_no);
                    if (toks[k] == obj_row_name) {
                        inst.vars[static_cast<std::size_t>(ci)].obj_coeff = v;
                    } else if (ri.index >= 0 && v != 0.0) {
                        inst.constraints[static_cast<std::size_t>(ri.index)].coeffs.push_back(
                            {ci, v});
                    }
                }
                break;
            }
            case Section::rhs: {
                if (toks.size() < 3 || toks.size() % 2 == 0)
                    throw ParseError("malformed RHS entry", line_no);
                for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
                    const RowInfo& ri = require_row(toks[k], line_no);
                    double v = parse_number(toks[k + 1], line_no);
                    if (toks[k] == obj_row_name) {
                        // objective constant convention: not representable, ignored
                        if (obj_rhs_seen) throw ParseError("duplicate objective rhs", line_no);
                        obj_rhs_seen = true;
                        continue;
                    }
                    if (ri.index < 0) continue;  // free row
                    if (!rhs_seen.insert(ri.index).second)
                        throw ParseError("duplicate rhs for row '" + toks[k] + "'", line_no);
                    inst.constraints[static_cast<std::size_t>(ri.index)].rhs = v;
                }
                break;
            }
            case Section::ranges: {
                if (toks.size() < 3 || toks.size() % 2 == 0)
                    throw ParseError("malformed RANGES entry", line_no);
                for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
                    const RowInfo& ri = require_row(toks[k], line_no);
                    if (ri.index < 0) throw ParseError("range on objective row", line_no);
                    double v = parse_number(toks[k + 1], line_no);
                    if (ranges.count(ri.index))
                        throw ParseError("duplicate range for row '" + toks[k] + "'", line_no);
                    ranges[ri.index] = v;
                }
                break;
            }
            case Section::bounds: {
                if (toks.size() < 3) throw ParseError("malformed BOUNDS entry", line_no);
                const std::string& key = toks[0];
                int ci = require_col(toks[2], line_no);
                Variable& var = inst.vars[static_cast<std::size_t>(ci)];
                bool needs_value = key == "LO" || key == "UP" || key == "FX" || key == "LI" ||
                                   key == "UI";
                if (needs_value && toks.size() < 4)
                    throw ParseError("bound '" + key + "' needs a value", line_no);
                double v = needs_value ? parse_number(toks[3], line_no) : 0.0;
                auto set_lower = [&](double x) {
                    if (!lower_set.insert(ci).second)
                        throw ParseError("duplicate lower bound for '" + var.name + "'", line_no);
                    var.lower = x;
                };
                auto set_upper = [&](double x) {
                    if (!upper_set.insert(ci).second)
                        throw ParseError("duplicate upper bound for '" + var.name + "'", line_no);
                    var.upper = x;
                };
                if (key == "LO") {
                    set_lower(v);
                } else if (key == "UP") {
                    set_upper(v);
                } else if (key == "FX") {
                    set_lower(v);
                    set_upper(v);
                } else if (key == "FR") {
                    set_lower(-kInf);
                    set_upper(kInf);
                } else if (key == "MI") {
                    set_lower(-kInf);
                } else if (key == "PL") {
                    set_upper(kInf);
                } else if (key == "BV") {
                    set_lower(0.0);
                    set_upper(1.0);
                    var.is_integer = true;
                } else if (key == "LI") {
                    set_lower(std::ceil(v - 1e-9));
                    var.is_integer = true;
                } else if (key == "UI") {
                    set_upper(std::floor(v + 1e-9));
                    var.is_integer = true;
                } else {
                    throw ParseError("bad bound type '" + key + "'", line_no);
                }
                break;
            }
            case Section::none:
            case Section::done:
                throw ParseError("data outside any section", line_no);
        }
    }

    if (!saw_rows) throw ParseError("missing ROWS section", line_no);
    if (!saw_columns) throw ParseError("missing COLUMNS section", line_no);
    if (obj_row_name.empty()) throw ParseError("no objective (N) row", line_no);

    // Ranged rows become two-sided: the base row keeps one side, a companion
    // row appended after all base rows carries the other.
    for (const auto& [idx, r] : ranges) {
        Constraint& base = inst.constraints[static_cast<std::size_t>(idx)];
        double lo, hi;
        if (base.sense == Sense::le) {
            lo = base.rhs - std::abs(r);
            hi = base.rhs;
        } else if (base.sense == Sense::ge) {
            lo = base.rhs;
            hi = base.rhs + std::abs(r);
        } else {
            lo = base.rhs + std::min(r, 0.0);
            hi = base.rhs + std::max(r, 0.0);
            base.sense = Sense::ge;
            base.rhs = lo;
        }
        Constraint companion = base;
        companion.name = base.name + "_rng";
        if (base.sense == Sense::le) {
            companion.sense = Sense::ge;
            companion.rhs = lo;
        } else {
            companion.sense = Sense::le;
            companion.rhs = hi;
        }
        inst.constraints.push_back(std::move(companion));
    }

    for (auto& c : inst.constraints) sort_sparse(c.coeffs);
    inst.validate();
    return inst;
}

}  // namespace closure
