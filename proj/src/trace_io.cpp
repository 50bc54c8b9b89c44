#include "rwr/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rwr {

void write_file_atomic(const std::string& path, const std::string& bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("rename failed: " + tmp + " -> " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace le {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint8_t Reader::byte() {
  if (pos_ >= s_.size()) throw std::runtime_error("truncated input");
  return static_cast<std::uint8_t>(s_[pos_++]);
}

std::uint32_t Reader::u32() {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
  return v;
}

std::uint64_t Reader::u64() {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
  return v;
}

std::string Reader::bytes(std::size_t n) {
  if (remaining() < n) throw std::runtime_error("truncated input");
  std::string out = s_.substr(pos_, n);
  pos_ += n;
  return out;
}

}  // namespace le

namespace {
constexpr std::uint32_t kTraceVersion = 1;
}

std::string encode_trace(const TraceCheckpoint& c) {
  const WalkTrace& tr = c.trace;
  if (tr.dim() > 4) throw std::domain_error("encode_trace: 3-bit move codes support d <= 4");
  std::string out = "RWTR";
  le::put_u32(out, kTraceVersion);
  le::put_u32(out, static_cast<std::uint32_t>(tr.dim()));
  le::put_i64(out, tr.ambient().torus ? tr.ambient().torus->side() : 0);
  le::put_u64(out, c.seed);
  le::put_u64(out, c.stream_id);
  le::put_u64(out, tr.length());
  for (auto x : tr.start()) le::put_i64(out, x);
  std::string packed((3 * tr.length() + 7) / 8, '\0');
  std::size_t bit = 0;
  for (auto code : tr.moves()) {
    for (int j = 0; j < 3; ++j, ++bit)
      if ((code >> j) & 1) packed[bit / 8] = static_cast<char>(packed[bit / 8] | (1 << (bit % 8)));
  }
  return out + packed;
}

TraceCheckpoint decode_trace(const std::string& bytes) {
  le::Reader r(bytes);
  if (r.bytes(4) != "RWTR") throw std::runtime_error("trace checkpoint: bad magic");
  if (r.u32() != kTraceVersion) throw std::runtime_error("trace checkpoint: unsupported version");
  int d = static_cast<int>(r.u32());
  std::int64_t N = r.i64();
  TraceCheckpoint c{WalkTrace(Ambient::lattice(d), Point(d)), 0, 0};
  c.seed = r.u64();
  c.stream_id = r.u64();
  std::uint64_t steps = r.u64();
  Point start(d);
  for (int i = 0; i < d; ++i) start[i] = r.i64();
  std::string packed = r.bytes((3 * steps + 7) / 8);
  std::vector<std::uint8_t> moves(steps);
  std::size_t bit = 0;
  for (auto& m : moves) {
    int code = 0;
    for (int j = 0; j < 3; ++j, ++bit)
      if ((static_cast<unsigned char>(packed[bit / 8]) >> (bit % 8)) & 1) code |= 1 << j;
    m = static_cast<std::uint8_t>(code);
  }
  Ambient amb = N > 0 ? Ambient::of(TorusSpec(d, N)) : Ambient::lattice(d);
  c.trace = WalkTrace(amb, start, std::move(moves));
  return c;
}

void save_trace(const std::string& path, const TraceCheckpoint& c) { write_file_atomic(path, encode_trace(c)); }

TraceCheckpoint load_trace(const std::string& path) { return decode_trace(read_file(path)); }

}  // namespace rwr
