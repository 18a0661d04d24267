#include "emulsion/random.hpp"

namespace emulsion {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, Stream stream, std::uint64_t index) {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ static_cast<std::uint64_t>(stream));
    return splitmix64(k ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double unit_uniform(std::uint64_t key) {
    return static_cast<double>(key >> 11) * 0x1.0p-53;
}

std::uint64_t CounterStream::at(std::uint64_t i) const {
    return splitmix64(key_ ^ splitmix64(i));
}

} // namespace emulsion
