#include "dflow/zip.hpp"

#include <array>
#include <cstdint>

namespace dflow {

namespace {

std::array<uint32_t, 256> crc_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

uint32_t crc32(const std::string& data) {
    static const auto table = crc_table();
    uint32_t c = 0xFFFFFFFFu;
    for (unsigned char byte : std::string_view(data))
        c = table[(c ^ byte) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void put16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put32(std::string& out, uint32_t v) {
    put16(out, static_cast<uint16_t>(v & 0xFFFF));
    put16(out, static_cast<uint16_t>(v >> 16));
}

uint16_t get16(const std::string& s, size_t off) {
    return static_cast<uint8_t>(s[off]) | (static_cast<uint8_t>(s[off + 1]) << 8);
}

uint32_t get32(const std::string& s, size_t off) {
    return get16(s, off) | (static_cast<uint32_t>(get16(s, off + 2)) << 16);
}

} // namespace

std::string make_zip(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string out;
    std::string central;
    for (const auto& [name, data] : entries) {
        uint32_t crc = crc32(data);
        uint32_t offset = static_cast<uint32_t>(out.size());

        put32(out, 0x04034b50);  // local file header
        put16(out, 20);          // version needed
        put16(out, 0);           // flags
        put16(out, 0);           // method: store
        put16(out, 0);           // mod time (zeroed)
        put16(out, 0);           // mod date (zeroed)
        put32(out, crc);
        put32(out, static_cast<uint32_t>(data.size()));
        put32(out, static_cast<uint32_t>(data.size()));
        put16(out, static_cast<uint16_t>(name.size()));
        put16(out, 0);  // extra length
        out += name;
        out += data;

        put32(central, 0x02014b50);  // central directory header
        put16(central, 20);          // version made by
        put16(central, 20);          // version needed
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put32(central, crc);
        put32(central, static_cast<uint32_t>(data.size()));
        put32(central, static_cast<uint32_t>(data.size()));
        put16(central, static_cast<uint16_t>(name.size()));
        put16(central, 0);  // extra
        put16(central, 0);  // comment
        put16(central, 0);  // disk number
        put16(central, 0);  // internal attrs
        put32(central, 0);  // external attrs
        put32(central, offset);
        central += name;
    }

    uint32_t central_offset = static_cast<uint32_t>(out.size());
    out += central;
    put32(out, 0x06054b50);  // end of central directory
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<uint16_t>(entries.size()));
    put16(out, static_cast<uint16_t>(entries.size()));
    put32(out, static_cast<uint32_t>(central.size()));
    put32(out, central_offset);
    put16(out, 0);  // comment length
    return out;
}

std::vector<std::string> zip_entry_names(const std::string& archive) {
    std::vector<std::string> names;
    size_t pos = 0;
    while (pos + 30 <= archive.size() && get32(archive, pos) == 0x04034b50) {
        uint32_t size = get32(archive, pos + 18);
        uint16_t name_len = get16(archive, pos + 26);
        uint16_t extra_len = get16(archive, pos + 28);
        if (pos + 30 + name_len > archive.size()) break;
        names.push_back(archive.substr(pos + 30, name_len));
        pos += 30 + name_len + extra_len + size;
    }
    return names;
}

} // namespace dflow
