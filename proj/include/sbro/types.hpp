#pragma once

#include <cstdint>
#include <vector>

namespace sbro {

// Selection flags for the trailing window of rounds, one buffer per client,
// oldest first. Buffers never hold more than kSelectionWindow entries.
using ParticipationHistory = std::vector<std::vector<std::uint8_t>>;

inline constexpr int kSelectionWindow = 5;

}  // namespace sbro
