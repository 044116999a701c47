#pragma once

// Structured-text (JSON) form of atoms and ensemble specs. Doubles are
// written with max_digits10 so parse(dump(x)) reproduces x bit for bit.

#include "rmtlab/ensemble.hpp"

#include <json.hpp>
#include <string>

namespace rmtlab {

using Json = nlohmann::json;

Json atom_to_json(const AtomDistribution& atom);
/// `path` prefixes the key path reported in ConfigError messages.
AtomDistribution atom_from_json(const Json& j, const std::string& path = "atom");

Json ensemble_to_json(const EnsembleSpec& spec);
/// Accepts the full form written by ensemble_to_json, or a preset
/// {"preset": "gue" | "goe", "n": ..., "normalization": ...}.
EnsembleSpec ensemble_from_json(const Json& j, const std::string& path = "ensemble");

std::string symmetry_name(Symmetry s);
std::string normalization_name(Normalization n);
std::string atom_kind_name(AtomKind k);

/// Canonical text: object keys sorted, fixed indentation.
std::string canonical_dump(const Json& j);

/// Typed accessors that raise ConfigError naming the full key path.
const Json& require_key(const Json& j, const std::string& key, const std::string& path);
double get_number(const Json& j, const std::string& key, const std::string& path);
std::uint64_t get_unsigned(const Json& j, const std::string& key, const std::string& path);
std::string get_string(const Json& j, const std::string& key, const std::string& path);
void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& path);

}  // namespace rmtlab
