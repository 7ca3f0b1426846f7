#include "credo/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace credo::io {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_f6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t start = 0;
        while (true) {
            const size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::string to_fasta(const std::vector<std::string>& sequences) {
    std::string out;
    for (size_t i = 0; i < sequences.size(); ++i) {
        out += ">seq_" + std::to_string(i) + "\n";
        const std::string& s = sequences[i];
        for (size_t pos = 0; pos < s.size(); pos += 60) {
            out += s.substr(pos, 60);
            out += '\n';
        }
    }
    return out;
}

std::vector<std::string> parse_fasta(const std::string& text) {
    std::vector<std::string> seqs;
    std::istringstream in(text);
    std::string line;
    bool have_record = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '>') {
            seqs.emplace_back();
            have_record = true;
        } else {
            if (!have_record) throw std::runtime_error("FASTA: sequence data before first header");
            seqs.back() += line;
        }
    }
    return seqs;
}

}  // namespace credo::io
