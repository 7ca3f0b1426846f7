#include "credo/manifest.hpp"

#include <chrono>

#include "credo/io.hpp"
#include "credo/sha256.hpp"

namespace credo::cli {

std::string hash_file(const std::filesystem::path& path) {
    return sha256_hex(io::read_file(path));
}

ManifestBuilder::ManifestBuilder(std::string command, nlohmann::json config_snapshot) {
    manifest_["tool"] = "credo";
    manifest_["tool_version"] = kToolVersion;
    manifest_["command"] = std::move(command);
    manifest_["config"] = std::move(config_snapshot);
    manifest_["inputs"] = nlohmann::json::object();
    manifest_["outputs"] = nlohmann::json::object();
    const auto now = std::chrono::system_clock::now();
    manifest_["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
}

void ManifestBuilder::add_input(const std::string& name, const std::filesystem::path& path) {
    manifest_["inputs"][name] = {{"path", path.string()}, {"sha256", hash_file(path)}};
}

void ManifestBuilder::add_output(const std::string& name, const std::filesystem::path& path) {
    manifest_["outputs"][name] = {{"path", path.string()}, {"sha256", hash_file(path)}};
}

void ManifestBuilder::add_field(const std::string& key, nlohmann::json value) {
    manifest_[key] = std::move(value);
}

nlohmann::json ManifestBuilder::build() const { return manifest_; }

void ManifestBuilder::write(const std::filesystem::path& path) const {
    io::write_file(path, manifest_.dump(2) + "\n");
}

}  // namespace credo::cli
