#pragma once

#include <cstddef>
#include <vector>

namespace regmod::detail {

/// Advances a mixed-radix counter, last position fastest.  Returns false after
/// the last combination (the counter is then reset to all zeros).
inline bool advance(std::vector<std::size_t>& idx, const std::vector<std::size_t>& radix) {
  for (std::size_t k = idx.size(); k > 0; --k) {
    if (++idx[k - 1] < radix[k - 1]) return true;
    idx[k - 1] = 0;
  }
  return false;
}

}  // namespace regmod::detail
