#include "asrlab/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace asrlab {

namespace {

void put_u32(std::vector<char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::vector<char>& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
}
std::uint16_t get_u16(const unsigned char* p) { return p[0] | (p[1] << 8); }

}  // namespace

void write_wav(const std::string& path, const Waveform& x) {
  const std::uint32_t n = static_cast<std::uint32_t>(x.samples.size());
  const std::uint32_t data_bytes = n * 2;
  std::vector<char> buf;
  buf.reserve(44 + data_bytes);
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  put_u32(buf, 36 + data_bytes);
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(buf, 16);
  put_u16(buf, 1);  // PCM
  put_u16(buf, 1);  // mono
  put_u32(buf, static_cast<std::uint32_t>(x.sample_rate));
  put_u32(buf, static_cast<std::uint32_t>(x.sample_rate) * 2);
  put_u16(buf, 2);   // block align
  put_u16(buf, 16);  // bits
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  put_u32(buf, data_bytes);
  for (double s : x.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(std::lround(c * 32767.0));
    put_u16(buf, static_cast<std::uint16_t>(q));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw WavFormatError("write_wav: cannot open " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw WavFormatError("read_wav: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0)
    throw WavFormatError("read_wav: missing RIFF magic");
  if (std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw WavFormatError("read_wav: missing WAVE form type");

  // chunk walk
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;
  while (pos + 8 <= buf.size()) {
    const char* id = reinterpret_cast<const char*>(buf.data() + pos);
    const std::uint32_t len = get_u32(buf.data() + pos + 4);
    if (pos + 8 + len > buf.size())
      throw WavFormatError("read_wav: chunk '" + std::string(id, 4) + "' overruns file");
    const unsigned char* body = buf.data() + pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw WavFormatError("read_wav: fmt chunk too short");
      format = get_u16(body);
      channels = get_u16(body + 2);
      rate = get_u32(body + 4);
      bits = get_u16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (!have_fmt) throw WavFormatError("read_wav: no fmt chunk");
  if (format != 1) throw WavFormatError("read_wav: format tag " + std::to_string(format) + ", want PCM (1)");
  if (channels != 1) throw WavFormatError("read_wav: " + std::to_string(channels) + " channels, want mono");
  if (bits != 16) throw WavFormatError("read_wav: " + std::to_string(bits) + " bits, want 16");
  if (rate != 16000) throw WavFormatError("read_wav: sample rate " + std::to_string(rate) + ", want 16000");
  if (data == nullptr) throw WavFormatError("read_wav: no data chunk");

  Waveform x;
  x.sample_rate = 16000;
  x.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    const auto q = static_cast<std::int16_t>(get_u16(data + 2 * i));
    x.samples[i] = q / 32767.0;
  }
  return x;
}

}  // namespace asrlab
