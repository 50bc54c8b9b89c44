#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rwr/walk.hpp"

namespace rwr {

// Writes to path.tmp in the same directory, then renames over path.
void write_file_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

// Trace checkpoint, little-endian:
//   "RWTR" | u32 version | u32 d | i64 N (0 for Z^d) | u64 seed | u64 stream_id |
//   u64 steps | i64 start[d] | move codes, 3 bits each, LSB-first.
struct TraceCheckpoint {
  WalkTrace trace;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

std::string encode_trace(const TraceCheckpoint& c);
TraceCheckpoint decode_trace(const std::string& bytes);
void save_trace(const std::string& path, const TraceCheckpoint& c);
TraceCheckpoint load_trace(const std::string& path);

namespace le {
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
inline void put_i64(std::string& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::uint8_t byte();
  std::string bytes(std::size_t n);
  std::size_t remaining() const { return s_.size() - pos_; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};
}  // namespace le

}  // namespace rwr
