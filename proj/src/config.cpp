#include "rmtlab/config.hpp"

#include "rmtlab/errors.hpp"

#include <cmath>

namespace rmtlab {

std::string symmetry_name(Symmetry s) {
    return s == Symmetry::hermitian ? "hermitian" : "real_symmetric";
}

std::string normalization_name(Normalization n) {
    switch (n) {
        case Normalization::raw:
            return "raw";
        case Normalization::coarse:
            return "coarse";
        case Normalization::fine:
            return "fine";
    }
    return "raw";
}

std::string atom_kind_name(AtomKind k) {
    switch (k) {
        case AtomKind::gaussian:
            return "gaussian";
        case AtomKind::two_point:
            return "two_point";
        case AtomKind::discrete:
            return "discrete";
        case AtomKind::mixture:
            return "mixture";
    }
    return "gaussian";
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

const Json& require_key(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key, "missing required key");
    return *it;
}

double get_number(const Json& j, const std::string& key, const std::string& path) {
    const auto& v = require_key(j, key, path);
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

std::uint64_t get_unsigned(const Json& j, const std::string& key, const std::string& path) {
    const auto& v = require_key(j, key, path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(path + "." + key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& path) {
    const auto& v = require_key(j, key, path);
    if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(path + "." + key, "unknown key");
    }
}

Json atom_to_json(const AtomDistribution& atom) {
    if (atom.cap()) throw DomainError("atom_to_json: truncated atoms are derived, not serialized");
    Json j;
    j["kind"] = atom_kind_name(atom.kind());
    j["scale"] = atom.scale();
    j["complex"] = atom.is_complex();
    switch (atom.kind()) {
        case AtomKind::gaussian:
            break;
        case AtomKind::two_point:
            j["theta"] = *atom.theta();
            break;
        case AtomKind::discrete: {
            Json pts = Json::array();
            for (const auto& p : atom.points()) pts.push_back(Json::array({p.value, p.probability}));
            j["points"] = pts;
            break;
        }
        case AtomKind::mixture: {
            Json comps = Json::array();
            for (std::size_t i = 0; i < atom.components().size(); ++i)
                comps.push_back({{"weight", atom.weights()[i]},
                                 {"atom", atom_to_json(atom.components()[i])}});
            j["components"] = comps;
            break;
        }
    }
    return j;
}

AtomDistribution atom_from_json(const Json& j, const std::string& path) {
    const std::string kind = get_string(j, "kind", path);
    AtomDistribution base;
    try {
        if (kind == "gaussian") {
            reject_unknown_keys(j, {"kind", "scale", "complex", "variance"}, path);
            const double var = j.contains("variance") ? get_number(j, "variance", path) : 1.0;
            base = AtomDistribution::gaussian(var);
        } else if (kind == "two_point") {
            reject_unknown_keys(j, {"kind", "scale", "complex", "theta"}, path);
            base = AtomDistribution::two_point(get_number(j, "theta", path));
        } else if (kind == "discrete") {
            reject_unknown_keys(j, {"kind", "scale", "complex", "points"}, path);
            const auto& pts = require_key(j, "points", path);
            if (!pts.is_array()) throw ConfigError(path + ".points", "expected an array");
            std::vector<AtomPoint> points;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const auto& p = pts[i];
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError(path + ".points[" + std::to_string(i) + "]",
                                      "expected [value, probability]");
                points.push_back({p[0].get<double>(), p[1].get<double>()});
            }
            base = AtomDistribution::discrete(std::move(points));
        } else if (kind == "mixture") {
            reject_unknown_keys(j, {"kind", "scale", "complex", "components"}, path);
            const auto& comps = require_key(j, "components", path);
            if (!comps.is_array()) throw ConfigError(path + ".components", "expected an array");
            std::vector<double> weights;
            std::vector<AtomDistribution> atoms;
            for (std::size_t i = 0; i < comps.size(); ++i) {
                const std::string sub = path + ".components[" + std::to_string(i) + "]";
                weights.push_back(get_number(comps[i], "weight", sub));
                atoms.push_back(atom_from_json(require_key(comps[i], "atom", sub), sub + ".atom"));
            }
            base = AtomDistribution::mixture(std::move(weights), std::move(atoms));
        } else {
            throw ConfigError(path + ".kind", "unknown atom kind '" + kind + "'");
        }
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    if (j.contains("scale")) {
        const double s = get_number(j, "scale", path);
        if (!(s > 0.0)) throw ConfigError(path + ".scale", "must be positive");
        base = base.scaled(s);
    }
    if (j.contains("complex")) {
        const auto& c = j["complex"];
        if (!c.is_boolean()) throw ConfigError(path + ".complex", "expected a boolean");
        if (c.get<bool>()) base = base.complexified();
    }
    return base;
}

Json ensemble_to_json(const EnsembleSpec& spec) {
    Json j;
    j["symmetry"] = symmetry_name(spec.symmetry);
    j["n"] = spec.n;
    j["off_diag"] = atom_to_json(spec.off_diag);
    j["diag"] = atom_to_json(spec.diag);
    j["johansson_t"] = spec.johansson_t ? Json(*spec.johansson_t) : Json(nullptr);
    j["normalization"] = normalization_name(spec.normalization);
    j["truncation"] = spec.truncation ? Json(*spec.truncation) : Json(nullptr);
    return j;
}

namespace {

Normalization parse_normalization(const Json& j, const std::string& path) {
    if (!j.contains("normalization")) return Normalization::raw;
    const std::string s = get_string(j, "normalization", path);
    if (s == "raw") return Normalization::raw;
    if (s == "coarse") return Normalization::coarse;
    if (s == "fine") return Normalization::fine;
    throw ConfigError(path + ".normalization", "expected raw, coarse or fine, got '" + s + "'");
}

std::optional<double> optional_number(const Json& j, const std::string& key,
                                      const std::string& path) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return get_number(j, key, path);
}

}  // namespace

EnsembleSpec ensemble_from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    EnsembleSpec spec;
    if (j.contains("preset")) {
        reject_unknown_keys(j, {"preset", "n", "normalization", "johansson_t", "truncation"}, path);
        const std::string preset = get_string(j, "preset", path);
        const auto n = get_unsigned(j, "n", path);
        const auto norm = parse_normalization(j, path);
        if (preset == "gue") {
            spec = EnsembleSpec::gue(n, norm);
        } else if (preset == "goe") {
            spec = EnsembleSpec::goe(n, norm);
        } else {
            throw ConfigError(path + ".preset", "unknown preset '" + preset + "'");
        }
    } else {
        reject_unknown_keys(j, {"symmetry", "n", "off_diag", "diag", "johansson_t", "normalization",
                                "truncation"},
                            path);
        const std::string sym = get_string(j, "symmetry", path);
        if (sym == "hermitian") {
            spec.symmetry = Symmetry::hermitian;
        } else if (sym == "real_symmetric") {
            spec.symmetry = Symmetry::real_symmetric;
        } else {
            throw ConfigError(path + ".symmetry", "expected hermitian or real_symmetric");
        }
        spec.n = get_unsigned(j, "n", path);
        spec.off_diag = atom_from_json(require_key(j, "off_diag", path), path + ".off_diag");
        spec.diag = atom_from_json(require_key(j, "diag", path), path + ".diag");
        spec.normalization = parse_normalization(j, path);
    }
    spec.johansson_t = optional_number(j, "johansson_t", path);
    spec.truncation = optional_number(j, "truncation", path);
    try {
        spec.validate();
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    return spec;
}

}  // namespace rmtlab
