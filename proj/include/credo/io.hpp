#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace credo::io {

// Fixed-format double renderings so artifacts are byte-stable across runs.
std::string fmt_g17(double v);  // shortest round-trip (%.17g)
std::string fmt_f6(double v);   // fixed 6 decimals

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Minimal CSV support for the schemas used here: no quoting, no embedded
// commas or newlines in fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// FASTA with 60-column wrapping and ">seq_<index>" headers.
std::string to_fasta(const std::vector<std::string>& sequences);
std::vector<std::string> parse_fasta(const std::string& text);

}  // namespace credo::io
