#pragma once

// nlohmann::json conversions shared by the report, defense and experiment
// sources. Not installed.

#include <json.hpp>

#include "axrx/attacks.hpp"
#include "axrx/defenses.hpp"

namespace axrx {

using Json = nlohmann::json;

Json attack_spec_json(const AttackSpec& spec);
AttackSpec attack_spec_from(const Json& j);
Json defense_spec_json(const DefenseSpec& spec);
DefenseSpec defense_spec_from(const Json& j);

}  // namespace axrx
