#include "stopspacing/zip_archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "stopspacing/error.hpp"

namespace stopspacing::zip {

namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSig = 0x02014b50;
constexpr std::uint32_t kEndOfCentralDirSig = 0x06054b50;
constexpr std::size_t kEndOfCentralDirSize = 22;

// 1980-01-01 00:00:00 in DOS format.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) throw Error(ErrorCode::not_a_zip, "truncated zip archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(read_u16(b, at)) |
         (static_cast<std::uint32_t>(read_u16(b, at + 2)) << 16);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  put_u16(out, static_cast<std::uint16_t>(v & 0xffff));
  put_u16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < data.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + offset), chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string inflate_raw(std::string_view compressed, std::size_t expected_size) {
  std::string out(expected_size, '\0');
  z_stream stream{};
  if (inflateInit2(&stream, -MAX_WBITS) != Z_OK) {
    throw Error(ErrorCode::io, "zlib inflateInit failed");
  }
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  stream.avail_in = static_cast<uInt>(compressed.size());
  stream.next_out = reinterpret_cast<Bytef*>(out.data());
  stream.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&stream, Z_FINISH);
  const auto produced = stream.total_out;
  inflateEnd(&stream);
  if (rc != Z_STREAM_END || produced != expected_size) {
    throw Error(ErrorCode::not_a_zip, "corrupt deflate stream in zip member");
  }
  return out;
}

std::string deflate_raw(std::string_view data) {
  z_stream stream{};
  if (deflateInit2(&stream, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorCode::io, "zlib deflateInit failed");
  }
  std::string out(deflateBound(&stream, static_cast<uLong>(data.size())), '\0');
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  stream.avail_in = static_cast<uInt>(data.size());
  stream.next_out = reinterpret_cast<Bytef*>(out.data());
  stream.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&stream, Z_FINISH);
  out.resize(stream.total_out);
  deflateEnd(&stream);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::io, "zlib deflate failed");
  return out;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

bool has_zip_magic(std::string_view bytes) {
  return bytes.size() >= 4 && bytes[0] == 'P' && bytes[1] == 'K' &&
         ((bytes[2] == '\x03' && bytes[3] == '\x04') ||
          (bytes[2] == '\x05' && bytes[3] == '\x06'));
}

bool is_zip_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char head[4] = {};
  in.read(head, 4);
  return in.gcount() == 4 && has_zip_magic(std::string_view(head, 4));
}

Archive::Archive(std::string bytes) : bytes_(std::move(bytes)) {
  const std::string_view b = bytes_;
  if (!has_zip_magic(b) || b.size() < kEndOfCentralDirSize) {
    throw Error(ErrorCode::not_a_zip, "not a zip archive");
  }
  // The end record sits in the last 22 bytes plus an optional comment.
  std::size_t eocd = std::string_view::npos;
  const std::size_t lowest = b.size() > 0xffff + kEndOfCentralDirSize
                                 ? b.size() - 0xffff - kEndOfCentralDirSize
                                 : 0;
  for (std::size_t at = b.size() - kEndOfCentralDirSize + 1; at-- > lowest;) {
    if (read_u32(b, at) == kEndOfCentralDirSig) {
      eocd = at;
      break;
    }
  }
  if (eocd == std::string_view::npos) {
    throw Error(ErrorCode::not_a_zip, "zip end-of-central-directory record not found");
  }
  const std::uint16_t count = read_u16(b, eocd + 10);
  const std::uint32_t cd_offset = read_u32(b, eocd + 16);
  if (cd_offset == 0xffffffffu || count == 0xffff) {
    throw Error(ErrorCode::not_a_zip, "ZIP64 archives are not supported");
  }
  std::size_t at = cd_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (read_u32(b, at) != kCentralHeaderSig) {
      throw Error(ErrorCode::not_a_zip, "corrupt zip central directory");
    }
    Entry e;
    e.method = read_u16(b, at + 10);
    e.crc32 = read_u32(b, at + 16);
    e.compressed_size = read_u32(b, at + 20);
    e.uncompressed_size = read_u32(b, at + 24);
    const std::uint16_t name_len = read_u16(b, at + 28);
    const std::uint16_t extra_len = read_u16(b, at + 30);
    const std::uint16_t comment_len = read_u16(b, at + 32);
    e.local_header_offset = read_u32(b, at + 42);
    if (at + 46 + name_len > b.size()) {
      throw Error(ErrorCode::not_a_zip, "corrupt zip central directory");
    }
    e.name = std::string(b.substr(at + 46, name_len));
    names_.push_back(e.name);
    entries_.push_back(std::move(e));
    at += 46 + name_len + extra_len + comment_len;
  }
}

Archive Archive::open(const std::filesystem::path& path) {
  return Archive(read_file_bytes(path));
}

std::optional<std::string> Archive::find_by_basename(std::string_view basename) const {
  for (const auto& name : names_) {
    if (name.empty() || name.back() == '/') continue;
    if (name.rfind("__MACOSX/", 0) == 0) continue;
    const auto slash = name.find_last_of('/');
    const std::string_view leaf =
        slash == std::string::npos ? std::string_view(name) : std::string_view(name).substr(slash + 1);
    if (leaf == basename) return name;
  }
  return std::nullopt;
}

std::string Archive::read(std::string_view name) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Entry& e) { return e.name == name; });
  if (it == entries_.end()) {
    throw Error(ErrorCode::io, "zip member not found: " + std::string(name));
  }
  const std::string_view b = bytes_;
  const std::size_t at = it->local_header_offset;
  if (read_u32(b, at) != kLocalHeaderSig) {
    throw Error(ErrorCode::not_a_zip, "corrupt zip local header");
  }
  const std::size_t data_at = at + 30 + read_u16(b, at + 26) + read_u16(b, at + 28);
  if (data_at + it->compressed_size > b.size()) {
    throw Error(ErrorCode::not_a_zip, "truncated zip member " + it->name);
  }
  const std::string_view data = b.substr(data_at, it->compressed_size);
  std::string out;
  if (it->method == 0) {
    out = std::string(data);
  } else if (it->method == 8) {
    out = inflate_raw(data, it->uncompressed_size);
  } else {
    throw Error(ErrorCode::not_a_zip,
                "unsupported zip compression method " + std::to_string(it->method));
  }
  if (crc_of(out) != it->crc32) {
    throw Error(ErrorCode::not_a_zip, "CRC mismatch in zip member " + it->name);
  }
  return out;
}

void Writer::add(std::string name, std::string_view contents) {
  members_.emplace_back(std::move(name), std::string(contents));
}

std::string Writer::finish() const {
  std::string out;
  std::string central;
  for (const auto& [name, contents] : members_) {
    const std::string packed = deflate_raw(contents);
    const std::uint32_t crc = crc_of(contents);
    const auto offset = static_cast<std::uint32_t>(out.size());

    put_u32(out, kLocalHeaderSig);
    put_u16(out, 20);  // version needed
    put_u16(out, 0);   // flags
    put_u16(out, 8);   // deflate
    put_u16(out, kDosTime);
    put_u16(out, kDosDate);
    put_u32(out, crc);
    put_u32(out, static_cast<std::uint32_t>(packed.size()));
    put_u32(out, static_cast<std::uint32_t>(contents.size()));
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    put_u16(out, 0);
    out += name;
    out += packed;

    put_u32(central, kCentralHeaderSig);
    put_u16(central, 20);  // version made by
    put_u16(central, 20);
    put_u16(central, 0);
    put_u16(central, 8);
    put_u16(central, kDosTime);
    put_u16(central, kDosDate);
    put_u32(central, crc);
    put_u32(central, static_cast<std::uint32_t>(packed.size()));
    put_u32(central, static_cast<std::uint32_t>(contents.size()));
    put_u16(central, static_cast<std::uint16_t>(name.size()));
    put_u16(central, 0);  // extra
    put_u16(central, 0);  // comment
    put_u16(central, 0);  // disk
    put_u16(central, 0);  // internal attrs
    put_u32(central, 0);  // external attrs
    put_u32(central, offset);
    central += name;
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put_u32(out, kEndOfCentralDirSig);
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, static_cast<std::uint16_t>(members_.size()));
  put_u16(out, static_cast<std::uint16_t>(members_.size()));
  put_u32(out, static_cast<std::uint32_t>(central.size()));
  put_u32(out, cd_offset);
  put_u16(out, 0);
  return out;
}

void Writer::write(const std::filesystem::path& path) const {
  const std::string bytes = finish();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

}  // namespace stopspacing::zip
