#pragma once

#include "hidm/hidm.hpp"

namespace fixture {

/// Two-layer example: M = (2, 4), N = (4, 2), k = (1, 2).
inline hidm::CharacterizationVectors small_example() { return hidm::derive({2, 4}, {4, 2}, {1, 2}); }

/// 4-layer rate-1/2 optimum at N_b = 12.
inline hidm::CharacterizationVectors rate_half_optimum() {
  return hidm::derive({2, 64, 64, 64}, {11, 2, 2, 2}, {2, 3, 4, 8});
}

/// 4-layer rate-3/4 optimum at N_b = 12.
inline hidm::CharacterizationVectors rate_three_quarter_four_layer() {
  return hidm::derive({2, 64, 64, 64}, {11, 2, 2, 2}, {4, 5, 3, 8});
}

/// 7-layer rate-3/4 design at N_b = 12.
inline hidm::CharacterizationVectors rate_three_quarter_seven_layer() {
  return hidm::derive({2, 64, 64, 64, 64, 64, 64}, {11, 2, 2, 2, 2, 2, 2}, {4, 4, 5, 4, 4, 4, 8});
}

}  // namespace fixture
