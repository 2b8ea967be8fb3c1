#pragma once

#include <string>

#include "renyikey/protocol.hpp"

namespace renyikey {

/// JSON document with dims, Kraus operators (row-major [re, im] pairs),
/// observables and ideal frequencies.
std::string protocol_to_json(const ProtocolInstance& inst, int indent = -1);

/// Inverse of protocol_to_json. Invariants are re-checked on load.
ProtocolInstance protocol_from_json(const std::string& text);

}  // namespace renyikey
