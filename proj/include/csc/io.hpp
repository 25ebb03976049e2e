#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace csc {

using TermSet = std::unordered_set<std::string>;

// Reads text line by line from a plain or gzip file. Compression is detected
// from the first two bytes, never from the file name.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Next line without its trailing "\n" / "\r\n". False at end of input.
  bool next(std::string& line);
  bool compressed() const noexcept { return compressed_; }

 private:
  void* handle_ = nullptr;  // gzFile
  bool compressed_ = false;
  std::vector<char> buffer_;
};

bool has_magic(const std::filesystem::path& path, std::string_view magic);

std::string ascii_lower(std::string_view text);
std::string_view trim(std::string_view text);
std::vector<std::string_view> split_ws(std::string_view line);

// Reads one word per line; blank lines and "#" comments are skipped; words
// are lowercased.
TermSet read_term_set(const std::filesystem::path& path);

// Little-endian binary helpers shared by the cache and model formats.
namespace binary {

void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_i32(std::ostream& out, std::int32_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, std::string_view s);

std::uint8_t read_u8(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
std::int32_t read_i32(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in, std::uint32_t max_len = 1u << 20);

void expect_magic(std::istream& in, std::string_view magic, const std::string& what);

}  // namespace binary
}  // namespace csc
