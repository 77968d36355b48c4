#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "v2x/config.hpp"

namespace v2x {

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

/// Writes the resolved run manifest (verb, version, seed, full config) and
/// returns the hash that attributable output files must carry.
struct RunManifest {
    std::string verb;
    std::uint64_t seed = 0;
    SimConfig config;

    std::string to_text() const;
    /// Writes <dir>/manifest.cfg; returns its content hash (hex).
    std::string write(const std::string& dir) const;
};

/// CSV file with a manifest-hash comment line and a fixed header. Values are
/// rendered with deterministic formatting.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns,
              const std::string& manifest_hash, std::uint64_t seed);

    void row(const std::vector<std::string>& cells);
    static std::string num(double v);
    static std::string num(long v);

private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace v2x
