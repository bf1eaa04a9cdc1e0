#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nnrules/network.hpp"

namespace nnrules {

struct LayerArtifact {
    LayerTap tap;
    bool acts = false;
    std::string tree_file;  // relative to the working directory
};

// manifest.json ties a working directory's artifacts together so prove and
// monitor can re-load what analyze wrote.
struct Manifest {
    int format_version = 1;
    std::string model_path;
    int post_type = 0;
    int inptype = 0;
    std::uint64_t seed = 0;
    bool has_ruleset = false;
    std::vector<LayerArtifact> layers;
    std::map<std::string, std::string> file_hashes;  // relative path -> fnv1a-64
};

std::string tree_filename(const LayerTap& tap);
std::string fnv1a_hex(const std::string& bytes);
std::string hash_file(const std::string& path);

void save_manifest(const Manifest& manifest, const std::string& dir);
Manifest load_manifest(const std::string& dir);

}  // namespace nnrules
