#pragma once
// JSON wire format (schema tag "mapwh/1") for process descriptions.
//
//   {
//     "schema": "mapwh/1",
//     "n": 2,
//     "kind": "subordinator",            // optional, default "subordinator"
//     "pi": [0.5, 0.5],
//     "Q": [[-1.0, 1.0], [1.0, -1.0]],   // nested rows or flat length n*n
//     "components": [
//       {"kill": 0.0, "center": 1.0, "gauss": 0.0,
//        "jumps_pos": {"atom0": 0.0,
//                      "terms": [{"w": 1.0, "p": 0, "beta": 1.0}],
//                      "side": "pos"},
//        "jumps_neg": {...}},            // optional, default empty
//       ...
//     ],
//     "trans": [[measure, ...], ...]     // optional, default delta_0 matrix;
//   }                                    // entries may use "side": "both"
//                                        // with "terms" up and "terms_neg"
//                                        // down
//
// Structural problems (wrong type, missing field, out-of-range value such as
// beta <= 0) raise SchemaError carrying the JSON path of the offending value;
// sign/semantic violations are left to validate_spec.

#include <string>

#include "mapwh/map_spec.hpp"

namespace mapwh {

MapSpec spec_from_json_text(const std::string& text);
MapSpec load_spec(const std::string& path);

std::string spec_to_json_text(const MapSpec& s, int indent = 2);
void save_spec(const MapSpec& s, const std::string& path);

}  // namespace mapwh
