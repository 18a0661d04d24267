#pragma once

#include "emulsion/entropy.hpp"
#include "emulsion/interface.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace emulsion {

std::string sha256_hex(const std::string& data);

// JSON artifacts under a cache directory, named by a hash of their cache key. A file
// whose recorded kind, version or key differs from the request is refused, never reused.
class Cache {
public:
    explicit Cache(std::string dir);

    const std::string& dir() const { return dir_; }
    bool enabled() const { return !dir_.empty(); }
    std::string path_for(const std::string& kind, const std::string& key) const;

    std::optional<nlohmann::json> load(const std::string& kind, const std::string& key, int version) const;
    void store(const std::string& kind, const std::string& key, const nlohmann::json& j) const;

    EntropyTable entropy_table(const EntropyTableConfig& config) const;
    void load_interface(InterfaceTable& table) const;
    void save_interface(const InterfaceTable& table) const;

private:
    std::string dir_;
};

struct cache_mismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace emulsion
