#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "dfr/rewards.hpp"
#include "dfr/types.hpp"

namespace dfr {

// JSON wire forms shared by the dataset files, the scorer and the sidecar.
// Boxes are [x1, y1, x2, y2]; labels are "real" / "fake".

nlohmann::json to_json(const RegionBox& rb);
nlohmann::json to_json(const DmaRecord& record);
nlohmann::json to_json(const RewardVector& v);
nlohmann::json to_json(const RewardWeights& w);

/// Throws ValidationError naming the offending field.
RegionBox region_box_from_json(const nlohmann::json& j);
/// Parses and validates a DMA record. Extra fields are ignored.
DmaRecord dma_record_from_json(const nlohmann::json& j);

/// Compact single-line dump that never throws on invalid UTF-8.
std::string dump_line(const nlohmann::json& j);

}  // namespace dfr
