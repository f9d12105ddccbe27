#pragma once

#include <string>

#include <json.hpp>

#include "rankforge/forms.hpp"

namespace rankforge {

// Map file format:
//   {"p":2,"dims":[2,2],"target_dim":1,
//    "parts":[{"subset":[1,2],"coeffs":[...]}]}
// Subsets are sorted 1-based coordinate lists; coeffs run row-major over
// (j_i for i in subset, out). target_dim defaults to 1. Parts not listed are
// zero.
nlohmann::json map_to_json(const MultiaffineMap& f);
nlohmann::json map_to_json(const MultilinearMap& f);

// Throws InputError for anything that does not follow the format.
MultiaffineMap map_from_json(const nlohmann::json& doc);
MultiaffineMap load_map(const std::string& path);

nlohmann::json subset_to_json(CoordSet s);
CoordSet subset_from_json(const nlohmann::json& doc, std::size_t arity);

// Reads and parses a JSON file, mapping I/O and syntax failures to InputError.
nlohmann::json read_json_file(const std::string& path);

} // namespace rankforge
