/*
 * Copyright 2026 The FleetLens Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FLEETLENS_CODEC_HPP_
#define FLEETLENS_CODEC_HPP_

#include <string>
#include <string_view>

#include "fleetlens/telemetry.hpp"

namespace fleetlens {

// Wire precision of the summary packet.
inline constexpr int kStatDecimals = 6;        // mm, mv
inline constexpr int kPercentileDecimals = 4;  // px, py, pz
inline constexpr int kCoordinateDecimals = 6;  // lat, lon
inline constexpr int kDurationDecimals = 3;    // wd

// Encodes a summary as a single-line JSON object with short keys:
//   vid ws wd mm mv px[4] py[4] pz[4] lat lon gq n
// Floating fields are written at fixed precision, so the packet is
// deterministic for a given summary.
std::string encode_summary(const WindowSummary& s);

// Inverse of encode_summary. Throws CodecError naming the first missing or
// mistyped key.
WindowSummary decode_summary(std::string_view bytes);

// Snaps every floating field to its wire precision. For a quantized summary
// decode_summary(encode_summary(s)) == s holds exactly.
WindowSummary quantize_for_wire(const WindowSummary& s);

// Rewrites a JSON object whose keys use the long field names (vehicle_id,
// window_start, ...) to the short packet keys. Unknown keys are kept as is.
std::string shorten_keys(std::string_view json_object);

}  // namespace fleetlens

#endif  // FLEETLENS_CODEC_HPP_
