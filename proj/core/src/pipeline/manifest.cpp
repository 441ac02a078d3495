#include "wag3d/pipeline/manifest.hpp"

#include <fstream>

#include "wag3d/common.hpp"

#include <json.hpp>

namespace wag3d {

uint64_t hash_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot open ", path);
    uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (is.eof()) break;
    }
    return h;
}

void RunManifest::add_artifact(const std::string& role, const std::string& path) {
    artifacts[role] = path;
    artifact_hashes[path] = hash_file(path);
}

void RunManifest::save(const std::string& path) const {
    nlohmann::ordered_json j;
    j["tool_version"] = tool_version;
    j["config_hash"] = config_hash;
    j["config"] = config_text;
    j["seed"] = seed;
    j["artifacts"] = artifacts;
    nlohmann::ordered_json hashes;
    for (const auto& [p, h] : artifact_hashes) hashes[p] = h;
    j["artifact_hashes"] = hashes;
    j["numbers"] = numbers;
    std::ofstream os(path);
    require(os.good(), "cannot open ", path, " for writing");
    os << j.dump(2) << "\n";
    require(os.good(), "write failed for ", path);
}

} // namespace wag3d
