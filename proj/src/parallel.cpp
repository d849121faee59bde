#include "phom/parallel.hpp"

#include <cstdlib>
#include <thread>

namespace phom {

unsigned default_threads()
{
    if (const char* env = std::getenv("PHOM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace phom
