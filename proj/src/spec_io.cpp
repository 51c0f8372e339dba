#include "delaystab/spec_io.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace delaystab {

namespace {

using nlohmann::json;

double get_number(const json& j, const char* key) {
    if (!j.contains(key)) throw SpecError(std::string("missing field '") + key + "'");
    const json& v = j.at(key);
    if (!v.is_number()) throw SpecError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

DelayDistribution from_fields(const std::string& kind,
                              const std::map<std::string, double>& scalars,
                              const std::vector<Atom>& atoms, bool has_atoms) {
    auto need = [&](const char* key) -> double {
        auto it = scalars.find(key);
        if (it == scalars.end())
            throw SpecError(std::string("missing field '") + key + "' for kind '" + kind + "'");
        return it->second;
    };
    auto expect_only = [&](std::initializer_list<const char*> keys) {
        for (const auto& [k, v] : scalars) {
            (void)v;
            bool ok = false;
            for (const char* allowed : keys)
                if (k == allowed) ok = true;
            if (!ok) throw SpecError("unexpected field '" + k + "' for kind '" + kind + "'");
        }
        if (has_atoms && kind != "discrete")
            throw SpecError("'atoms' is only valid for kind 'discrete'");
    };
    try {
        if (kind == "dirac") {
            expect_only({"delay"});
            return DelayDistribution::dirac(need("delay"));
        }
        if (kind == "discrete") {
            expect_only({});
            if (!has_atoms) throw SpecError("kind 'discrete' needs an 'atoms' array");
            return DelayDistribution::discrete(atoms);
        }
        if (kind == "exponential") {
            expect_only({"mean"});
            return DelayDistribution::exponential(need("mean"));
        }
        if (kind == "gamma") {
            expect_only({"order", "mean"});
            const double order = need("order");
            if (order != static_cast<int>(order))
                throw SpecError("gamma 'order' must be an integer");
            return DelayDistribution::gamma(static_cast<int>(order), need("mean"));
        }
        if (kind == "uniform") {
            expect_only({"lower", "upper"});
            return DelayDistribution::uniform(need("lower"), need("upper"));
        }
    } catch (const std::invalid_argument& e) {
        throw SpecError(std::string("invalid distribution: ") + e.what());
    }
    throw SpecError("unknown kind '" + kind + "'");
}

}  // namespace

DelayDistribution parse_distribution_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw SpecError("spec must be a JSON object");
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw SpecError("spec needs a string 'kind' field");
    const std::string kind = j.at("kind").get<std::string>();

    std::map<std::string, double> scalars;
    std::vector<Atom> atoms;
    bool has_atoms = false;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") continue;
        if (key == "atoms") {
            if (!value.is_array()) throw SpecError("'atoms' must be an array");
            has_atoms = true;
            for (const json& a : value) {
                if (!a.is_object()) throw SpecError("each atom must be an object");
                for (const auto& [ak, av] : a.items()) {
                    (void)av;
                    if (ak != "delay" && ak != "weight")
                        throw SpecError("unexpected atom field '" + ak + "'");
                }
                atoms.push_back({get_number(a, "delay"), get_number(a, "weight")});
            }
            continue;
        }
        if (!value.is_number()) throw SpecError("field '" + key + "' must be a number");
        scalars[key] = value.get<double>();
    }
    return from_fields(kind, scalars, atoms, has_atoms);
}

namespace {

// Tiny TOML-subset reader: 'key = value' lines, [[atoms]] array-of-tables,
// '#' comments, bare/quoted keys, string and float values. Enough for the
// distribution spec schema; anything else is rejected.
struct TomlLine {
    enum Type { kKeyValue, kArrayTable } type;
    std::string key;
    std::string value;
};

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string drop_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

double parse_toml_number(const std::string& raw) {
    const std::string v = strip(raw);
    if (v.empty()) throw SpecError("expected a number in TOML value");
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        throw SpecError("malformed TOML number '" + v + "'");
    return x;
}

std::string parse_toml_string(const std::string& raw) {
    const std::string v = strip(raw);
    if (v.size() < 2 || v.front() != '"' || v.back() != '"')
        throw SpecError("expected a quoted TOML string, got '" + v + "'");
    return v.substr(1, v.size() - 2);
}

}  // namespace

DelayDistribution parse_distribution_toml(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::string kind;
    std::map<std::string, double> scalars;
    std::vector<Atom> atoms;
    bool has_atoms = false;

    // current_atom == nullptr means keys belong to the top-level table.
    std::map<std::string, double>* current_atom = nullptr;
    std::vector<std::map<std::string, double>> atom_tables;

    while (std::getline(in, raw)) {
        const std::string line = strip(drop_comment(raw));
        if (line.empty()) continue;
        if (line == "[[atoms]]") {
            has_atoms = true;
            atom_tables.emplace_back();
            current_atom = &atom_tables.back();
            continue;
        }
        if (line.front() == '[')
            throw SpecError("unsupported TOML table '" + line + "'");
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw SpecError("malformed TOML line '" + line + "'");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw SpecError("malformed TOML line '" + line + "'");
        if (current_atom) {
            (*current_atom)[key] = parse_toml_number(value);
        } else if (key == "kind") {
            kind = parse_toml_string(value);
        } else {
            scalars[key] = parse_toml_number(value);
        }
    }
    if (kind.empty()) throw SpecError("spec needs a string 'kind' field");
    for (const auto& tbl : atom_tables) {
        for (const auto& [k, v] : tbl) {
            (void)v;
            if (k != "delay" && k != "weight")
                throw SpecError("unexpected atom field '" + k + "'");
        }
        auto d = tbl.find("delay"), w = tbl.find("weight");
        if (d == tbl.end() || w == tbl.end())
            throw SpecError("each [[atoms]] table needs 'delay' and 'weight'");
        atoms.push_back({d->second, w->second});
    }
    return from_fields(kind, scalars, atoms, has_atoms);
}

DelayDistribution parse_distribution_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SpecError("cannot open spec file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();

    auto ends_with = [&](const char* suffix) {
        const std::string s(suffix);
        return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with(".json")) return parse_distribution_json(text);
    if (ends_with(".toml")) return parse_distribution_toml(text);
    const std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return parse_distribution_json(text);
    return parse_distribution_toml(text);
}

std::string emit_distribution_json(const DelayDistribution& dist) {
    json j;
    j["kind"] = dist.kind_name();
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiracMass>) {
                j["delay"] = k.location;
            } else if constexpr (std::is_same_v<T, DiscreteMixture>) {
                json arr = json::array();
                for (const Atom& at : k.atoms)
                    arr.push_back({{"delay", at.delay}, {"weight", at.weight}});
                j["atoms"] = std::move(arr);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                j["mean"] = k.mean;
            } else if constexpr (std::is_same_v<T, GammaKernel>) {
                j["order"] = k.order;
                j["mean"] = k.mean;
            } else {
                j["lower"] = k.lower;
                j["upper"] = k.upper;
            }
        },
        dist.kind());
    return j.dump();
}

}  // namespace delaystab
