#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace credo::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Every subcommand writes a manifest next to its artifacts: the full config
// snapshot, seeds, and SHA-256 hashes of inputs and outputs, so any artifact
// is reproducible from its manifest alone. The timestamp is the only field
// allowed to differ between identical re-runs.
class ManifestBuilder {
public:
    ManifestBuilder(std::string command, nlohmann::json config_snapshot);

    void add_input(const std::string& name, const std::filesystem::path& path);
    void add_output(const std::string& name, const std::filesystem::path& path);
    void add_field(const std::string& key, nlohmann::json value);

    nlohmann::json build() const;
    void write(const std::filesystem::path& path) const;

private:
    nlohmann::json manifest_;
};

std::string hash_file(const std::filesystem::path& path);

}  // namespace credo::cli
