#include "modlaw/rng.hpp"

namespace modlaw {

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept
{
    const std::uint64_t limit = max() - max() % bound;
    for (;;) {
        const std::uint64_t x = (*this)();
        if (x < limit)
            return x % bound;
    }
}

} // namespace modlaw
