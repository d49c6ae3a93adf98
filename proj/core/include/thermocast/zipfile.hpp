#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace thermocast {

// Minimal store-only (no compression) ZIP writer/reader for checkpoint
// archives. Entry timestamps are fixed so archives are byte-reproducible.

std::uint32_t crc32_bytes(const void* data, std::size_t n, std::uint32_t seed = 0);

class ZipWriter {
public:
    explicit ZipWriter(std::filesystem::path path);
    void add(const std::string& name, const std::vector<std::uint8_t>& bytes);
    void add(const std::string& name, const std::string& text);
    // Writes the central directory and atomically renames into place.
    void finish();

private:
    struct Entry {
        std::string name;
        std::uint32_t crc;
        std::uint32_t size;
        std::uint32_t offset;
    };
    std::filesystem::path path_;
    std::filesystem::path tmp_path_;
    std::vector<Entry> entries_;
    std::vector<std::uint8_t> buffer_;
    bool finished_ = false;
};

class ZipReader {
public:
    explicit ZipReader(const std::filesystem::path& path);  // throws ConfigError
    std::vector<std::string> names() const;
    bool contains(const std::string& name) const;
    std::vector<std::uint8_t> read(const std::string& name) const;
    std::string read_text(const std::string& name) const;

private:
    struct Entry {
        std::string name;
        std::uint32_t crc;
        std::uint32_t size;
        std::uint32_t offset;  // of the local header
    };
    std::vector<std::uint8_t> data_;
    std::vector<Entry> entries_;
};

}  // namespace thermocast
