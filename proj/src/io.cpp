#include "csc/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>

#include "csc/error.hpp"

namespace csc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_request: return "bad_request";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::missing_term: return "missing_term";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::invalid_state: return "invalid_state";
    case ErrorCode::data_error: return "data_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::format_error: return "format_error";
    case ErrorCode::transport: return "transport";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

LineReader::LineReader(const std::filesystem::path& path) : buffer_(1 << 16) {
  compressed_ = has_magic(path, "\x1f\x8b");
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) {
    throw Error(ErrorCode::io_error, "cannot open " + path.string(), path.string());
  }
  gzbuffer(f, 1 << 17);
  handle_ = f;
}

LineReader::~LineReader() {
  if (handle_ != nullptr) gzclose(static_cast<gzFile>(handle_));
}

bool LineReader::next(std::string& line) {
  line.clear();
  auto f = static_cast<gzFile>(handle_);
  bool any = false;
  while (gzgets(f, buffer_.data(), static_cast<int>(buffer_.size())) != nullptr) {
    any = true;
    std::size_t n = std::strlen(buffer_.data());
    line.append(buffer_.data(), n);
    if (n > 0 && buffer_[n - 1] == '\n') break;
  }
  if (!any) {
    int err = 0;
    const char* msg = gzerror(f, &err);
    if (err != Z_OK && err != Z_STREAM_END) {
      throw Error(ErrorCode::io_error, std::string("read error: ") + msg);
    }
    return false;
  }
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
  return true;
}

bool has_magic(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::string head(magic.size(), '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  return in.gcount() == static_cast<std::streamsize>(magic.size()) && head == magic;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view text) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

TermSet read_term_set(const std::filesystem::path& path) {
  LineReader reader(path);
  TermSet terms;
  std::string line;
  while (reader.next(line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    terms.insert(ascii_lower(t));
  }
  return terms;
}

namespace binary {
namespace {

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw Error(ErrorCode::format_error, "unexpected end of binary data");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void write_u8(std::ostream& out, std::uint8_t v) { put(out, v); }
void write_u32(std::ostream& out, std::uint32_t v) { put(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { put(out, v); }
void write_i32(std::ostream& out, std::int32_t v) { put(out, v); }
void write_f32(std::ostream& out, float v) { put(out, v); }
void write_f64(std::ostream& out, double v) { put(out, v); }

void write_string(std::ostream& out, std::string_view s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint8_t read_u8(std::istream& in) { return get<std::uint8_t>(in); }
std::uint32_t read_u32(std::istream& in) { return get<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return get<std::uint64_t>(in); }
std::int32_t read_i32(std::istream& in) { return get<std::int32_t>(in); }
float read_f32(std::istream& in) { return get<float>(in); }
double read_f64(std::istream& in) { return get<double>(in); }

std::string read_string(std::istream& in, std::uint32_t max_len) {
  auto n = read_u32(in);
  if (n > max_len) throw Error(ErrorCode::format_error, "string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (in.gcount() != static_cast<std::streamsize>(n)) {
    throw Error(ErrorCode::format_error, "unexpected end of binary data");
  }
  return s;
}

void expect_magic(std::istream& in, std::string_view magic, const std::string& what) {
  std::string head(magic.size(), '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || head != magic) {
    throw Error(ErrorCode::format_error, what + ": bad magic, expected " + std::string(magic));
  }
}

}  // namespace binary
}  // namespace csc
