#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace hetnet {

std::string sha256_hex(const std::string& bytes);

struct Artifact {
    std::string name;
    std::string kind;   // csv, json, zip
    std::string sha256;
    size_t bytes = 0;
};

// Writes the files of one command run into `dir` and records them in index.json.
// The index carries a timestamp that is not part of any digest.
class ArtifactWriter {
public:
    ArtifactWriter(std::filesystem::path dir, std::string command, nlohmann::json config);

    void write(const std::string& name, const std::string& content, const std::string& kind);
    void write_json(const std::string& name, const nlohmann::json& j);
    // Store-only zip of every csv artifact written so far, plus an index of its members.
    void write_plot_bundle(const std::string& name = "plot_bundle.zip");
    void finish(const nlohmann::json& summary, bool pass);

    const std::vector<Artifact>& artifacts() const { return artifacts_; }

private:
    std::filesystem::path dir_;
    std::string command_;
    nlohmann::json config_;
    std::vector<Artifact> artifacts_;
    std::vector<std::pair<std::string, std::string>> csv_;
};

// Uncompressed zip archive (method 0) with CRC-32 from zlib.
std::string zip_store(const std::vector<std::pair<std::string, std::string>>& files);

} // namespace hetnet
