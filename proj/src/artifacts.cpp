#include "nnrules/artifacts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nnrules {

std::string tree_filename(const LayerTap& tap) {
    return "trees/" + tap.layer_name + (tap.post_activation ? "" : "__pre") + ".json";
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) raise(ErrorKind::IoFailure, "cannot open " + path + " for hashing");
    std::stringstream ss;
    ss << f.rdbuf();
    return fnv1a_hex(ss.str());
}

void save_manifest(const Manifest& manifest, const std::string& dir) {
    nlohmann::ordered_json doc;
    doc["format_version"] = manifest.format_version;
    doc["model_path"] = manifest.model_path;
    doc["post_type"] = manifest.post_type;
    doc["inptype"] = manifest.inptype;
    doc["seed"] = manifest.seed;
    doc["has_ruleset"] = manifest.has_ruleset;
    auto layers = nlohmann::ordered_json::array();
    for (const LayerArtifact& l : manifest.layers)
        layers.push_back({{"tap", tap_to_string(l.tap)},
                          {"acts", l.acts},
                          {"tree_file", l.tree_file}});
    doc["layers"] = std::move(layers);
    doc["file_hashes"] = manifest.file_hashes;

    std::string path = (std::filesystem::path(dir) / "manifest.json").string();
    std::ofstream f(path);
    if (!f) raise(ErrorKind::IoFailure, "cannot write " + path);
    f << doc.dump(2) << "\n";
}

Manifest load_manifest(const std::string& dir) {
    std::string path = (std::filesystem::path(dir) / "manifest.json").string();
    std::ifstream f(path);
    if (!f) raise(ErrorKind::IoFailure, "no manifest.json in " + dir + " (run analyze first)");
    nlohmann::json doc;
    try {
        f >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::SchemaViolation, std::string("manifest.json: ") + e.what());
    }
    Manifest m;
    try {
        m.format_version = doc.at("format_version").get<int>();
        m.model_path = doc.at("model_path").get<std::string>();
        m.post_type = doc.at("post_type").get<int>();
        m.inptype = doc.at("inptype").get<int>();
        m.seed = doc.at("seed").get<std::uint64_t>();
        m.has_ruleset = doc.at("has_ruleset").get<bool>();
        for (const auto& jl : doc.at("layers")) {
            LayerArtifact l;
            l.tap = tap_from_string(jl.at("tap").get<std::string>());
            l.acts = jl.at("acts").get<bool>();
            l.tree_file = jl.at("tree_file").get<std::string>();
            m.layers.push_back(std::move(l));
        }
        if (doc.contains("file_hashes"))
            m.file_hashes = doc["file_hashes"].get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::SchemaViolation, std::string("manifest.json: ") + e.what());
    }
    return m;
}

}  // namespace nnrules
