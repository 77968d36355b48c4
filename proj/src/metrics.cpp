#include "v2x/metrics.hpp"

#include <cstdio>
#include <filesystem>

#include "v2x/errors.hpp"

namespace v2x {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string RunManifest::to_text() const {
    std::string out;
    out += "# v2xsim run manifest\n";
    out += "# version " + std::string(kVersion) + "\n";
    out += "# verb " + verb + "\n";
    SimConfig c = config;
    c.seed = seed;
    out += config_to_text(c);
    return out;
}

std::string RunManifest::write(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    const std::string text = to_text();
    std::ofstream os(dir + "/manifest.cfg", std::ios::trunc);
    if (!os) throw MissingArtifactError("cannot write manifest in " + dir);
    os << text;
    os.close();
    return fnv1a64_hex(text);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     const std::string& manifest_hash, std::uint64_t seed)
    : out_(path, std::ios::trunc), columns_(columns.size()) {
    if (!out_) throw MissingArtifactError("cannot open output file: " + path);
    out_ << "# manifest manifest.cfg fnv1a64=" << manifest_hash << " seed=" << seed << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw StructuralError("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
}

std::string CsvWriter::num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string CsvWriter::num(long v) { return std::to_string(v); }

}  // namespace v2x
