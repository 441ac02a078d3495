#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace wag3d {

inline const char* kToolVersion = "wag3d 0.1.0";

// Provenance record for one run: the config, every emitted artifact with its
// content hash, and the seeds in play.
struct RunManifest {
    std::string tool_version = kToolVersion;
    uint64_t config_hash = 0;
    std::string config_text;
    uint64_t seed = 0;
    std::map<std::string, std::string> artifacts;      // role -> path
    std::map<std::string, uint64_t> artifact_hashes;   // path -> FNV-1a of bytes
    std::map<std::string, double> numbers;             // summary figures

    void add_artifact(const std::string& role, const std::string& path);
    void save(const std::string& path) const;
};

uint64_t hash_file(const std::string& path);

} // namespace wag3d
