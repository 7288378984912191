#include "cpmon/parallel.hpp"

#include <cstdlib>
#include <string>

namespace cpmon {

unsigned default_thread_count() {
    if (const char* env = std::getenv("CPMON_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) {
                return static_cast<unsigned>(v);
            }
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace cpmon
