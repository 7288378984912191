#pragma once

#include <cstddef>

namespace cpmon {

/// Maximum of a per-split statistic and the split point attaining it.
struct SplitMaximum {
    double value = 0.0;
    std::size_t k = 0;
};

} // namespace cpmon
