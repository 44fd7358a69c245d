#include "zip.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>

#include "air/error.hpp"

namespace air::detail {

namespace {

constexpr std::uint32_t kLocalHeader = 0x04034b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kEndOfCentral = 0x06054b50;

std::uint16_t u16(std::string_view s, std::size_t at) {
    if (at + 2 > s.size()) throw IoError("corrupt archive: truncated header");
    return std::uint16_t(std::uint8_t(s[at]) | std::uint8_t(s[at + 1]) << 8);
}

std::uint32_t u32(std::string_view s, std::size_t at) {
    if (at + 4 > s.size()) throw IoError("corrupt archive: truncated header");
    return std::uint32_t(u16(s, at)) | std::uint32_t(u16(s, at + 2)) << 16;
}

void put16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
    put16(out, std::uint16_t(v & 0xffff));
    put16(out, std::uint16_t(v >> 16));
}

std::string inflate_raw(std::string_view data, std::size_t expected, const std::string& name) {
    std::string out(expected, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw IoError("zlib initialisation failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = uInt(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = uInt(out.size());
    int rc = inflate(&zs, Z_FINISH);
    std::size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected)
        throw IoError("corrupt archive: cannot inflate member '" + name + "'");
    return out;
}

std::string deflate_raw(std::string_view data) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("zlib initialisation failed");
    std::string out(deflateBound(&zs, uLong(data.size())), '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = uInt(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = uInt(out.size());
    int rc = deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw IoError("zlib deflate failed");
    return out;
}

}  // namespace

std::map<std::string, std::string> unzip(std::string_view archive) {
    if (archive.size() < 22) throw IoError("corrupt archive: too small to be a ZIP file");
    // The end-of-central-directory record sits within the last 64 KiB + 22 bytes.
    std::size_t eocd = std::string_view::npos;
    std::size_t lowest = archive.size() > 65557 ? archive.size() - 65557 : 0;
    for (std::size_t i = archive.size() - 22 + 1; i-- > lowest;) {
        if (u32(archive, i) == kEndOfCentral) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string_view::npos) throw IoError("corrupt archive: no end of central directory");
    std::size_t count = u16(archive, eocd + 10);
    std::size_t offset = u32(archive, eocd + 16);
    if (offset == 0xffffffffu || count == 0xffff) throw IoError("unsupported archive: ZIP64");

    std::map<std::string, std::string> out;
    std::size_t p = offset;
    for (std::size_t i = 0; i < count; ++i) {
        if (u32(archive, p) != kCentralHeader) throw IoError("corrupt archive: bad central directory");
        std::uint16_t flags = u16(archive, p + 8);
        std::uint16_t method = u16(archive, p + 10);
        std::uint32_t crc = u32(archive, p + 16);
        std::size_t csize = u32(archive, p + 20);
        std::size_t usize = u32(archive, p + 24);
        std::size_t name_len = u16(archive, p + 28);
        std::size_t extra_len = u16(archive, p + 30);
        std::size_t comment_len = u16(archive, p + 32);
        std::size_t local = u32(archive, p + 42);
        if (p + 46 + name_len > archive.size()) throw IoError("corrupt archive: truncated name");
        std::string name(archive.substr(p + 46, name_len));
        p += 46 + name_len + extra_len + comment_len;

        if (flags & 0x1) throw IoError("unsupported archive: encrypted member '" + name + "'");
        if (u32(archive, local) != kLocalHeader)
            throw IoError("corrupt archive: bad local header for '" + name + "'");
        std::size_t data_at = local + 30 + u16(archive, local + 26) + u16(archive, local + 28);
        if (data_at + csize > archive.size())
            throw IoError("corrupt archive: member '" + name + "' is truncated");
        std::string_view raw = archive.substr(data_at, csize);
        std::string data;
        if (method == 0) {
            data = std::string(raw);
        } else if (method == 8) {
            data = inflate_raw(raw, usize, name);
        } else {
            throw IoError("unsupported compression method " + std::to_string(method) + " for '" +
                          name + "'");
        }
        auto actual = crc32(0L, reinterpret_cast<const Bytef*>(data.data()), uInt(data.size()));
        if (actual != crc) throw IoError("corrupt archive: CRC mismatch in '" + name + "'");
        out.emplace(std::move(name), std::move(data));
    }
    return out;
}

std::string zip(const std::vector<std::pair<std::string, std::string>>& members) {
    std::string out;
    std::string central;
    for (const auto& [name, data] : members) {
        std::uint32_t crc =
            std::uint32_t(crc32(0L, reinterpret_cast<const Bytef*>(data.data()), uInt(data.size())));
        std::string packed = deflate_raw(data);
        std::uint32_t local_offset = std::uint32_t(out.size());

        put32(out, kLocalHeader);
        put16(out, 20);  // version needed
        put16(out, 0);   // flags
        put16(out, 8);   // deflate
        put16(out, 0);   // mod time
        put16(out, 0x21);  // mod date: 1980-01-01
        put32(out, crc);
        put32(out, std::uint32_t(packed.size()));
        put32(out, std::uint32_t(data.size()));
        put16(out, std::uint16_t(name.size()));
        put16(out, 0);
        out += name;
        out += packed;

        put32(central, kCentralHeader);
        put16(central, 20);  // made by
        put16(central, 20);
        put16(central, 0);
        put16(central, 8);
        put16(central, 0);
        put16(central, 0x21);
        put32(central, crc);
        put32(central, std::uint32_t(packed.size()));
        put32(central, std::uint32_t(data.size()));
        put16(central, std::uint16_t(name.size()));
        put16(central, 0);  // extra
        put16(central, 0);  // comment
        put16(central, 0);  // disk
        put16(central, 0);  // internal attrs
        put32(central, 0);  // external attrs
        put32(central, local_offset);
        central += name;
    }
    std::uint32_t central_offset = std::uint32_t(out.size());
    out += central;
    put32(out, kEndOfCentral);
    put16(out, 0);
    put16(out, 0);
    put16(out, std::uint16_t(members.size()));
    put16(out, std::uint16_t(members.size()));
    put32(out, std::uint32_t(central.size()));
    put32(out, central_offset);
    put16(out, 0);
    return out;
}

}  // namespace air::detail
