#include "emulsion/cache.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace emulsion {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return os.str();
}

Cache::Cache(std::string dir) : dir_(std::move(dir)) {}

std::string Cache::path_for(const std::string& kind, const std::string& key) const {
    return (fs::path(dir_) / (kind + "-" + sha256_hex(key).substr(0, 16) + ".json")).string();
}

std::optional<nlohmann::json> Cache::load(const std::string& kind, const std::string& key, int version) const {
    if (!enabled()) {
        return std::nullopt;
    }
    const std::string path = path_for(kind, key);
    std::ifstream in(path);
    if (!in) {
        return std::nullopt;
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw cache_mismatch("unreadable cache file " + path + ": " + e.what());
    }
    if (j.value("kind", std::string()) != kind || j.value("version", -1) != version ||
        j.value("cache_key", std::string()) != key) {
        throw cache_mismatch("cache file " + path + " does not match the requested " + kind +
                             " (version or key differs); remove it to rebuild");
    }
    return j;
}

void Cache::store(const std::string& kind, const std::string& key, const nlohmann::json& j) const {
    if (!enabled()) {
        return;
    }
    fs::create_directories(dir_);
    const std::string path = path_for(kind, key);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump() << '\n';
        if (!out) {
            throw std::runtime_error("cannot write cache file " + tmp);
        }
    }
    fs::rename(tmp, path);
}

EntropyTable Cache::entropy_table(const EntropyTableConfig& config) const {
    const std::string key = config.cache_key();
    if (auto j = load("entropy_table", key, EntropyTable::kVersion)) {
        return EntropyTable::from_json(*j);
    }
    EntropyTable t = EntropyTable::build(config);
    store("entropy_table", key, t.to_json());
    return t;
}

void Cache::load_interface(InterfaceTable& table) const {
    if (auto j = load("interface_table", table.cache_key(), InterfaceTable::kVersion)) {
        table.merge_json(*j);
    }
}

void Cache::save_interface(const InterfaceTable& table) const {
    if (table.dirty()) {
        store("interface_table", table.cache_key(), table.to_json());
    }
}

} // namespace emulsion
