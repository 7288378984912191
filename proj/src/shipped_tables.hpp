#pragma once

#include <string_view>
#include <vector>

namespace cpmon::detail {

struct EmbeddedCsv {
    std::string_view name;
    std::string_view content;
};

/// CSV files under data/, named "<dir>/<file>", embedded at build time.
const std::vector<EmbeddedCsv>& shipped_table_sources();

} // namespace cpmon::detail
