#pragma once

// Internal JSON helpers shared between the tree and forest serializers.

#include <nlohmann/json.hpp>

#include "ract/tree.hpp"

namespace ract {

nlohmann::json tree_to_json_obj(const ClassificationTree& t);
ClassificationTree tree_from_json_obj(const nlohmann::json& j);

}  // namespace ract
