#include "amf/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amf {

namespace {

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void append_f32_le(std::string& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

double read_f32_le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

// parses "<magic>\n<width> <height>[ <count>]\n", returns offset past header
size_t parse_header(const std::string& data, const std::string& path, const char* magic,
                    int fields, long long* out) {
  const size_t magic_len = std::strlen(magic);
  if (data.size() < magic_len + 1 || data.compare(0, magic_len, magic) != 0 ||
      data[magic_len] != '\n')
    throw std::runtime_error(path + ": bad magic, expected " + magic);
  size_t pos = magic_len + 1;
  for (int f = 0; f < fields; ++f) {
    while (pos < data.size() && data[pos] == ' ') ++pos;
    size_t end = pos;
    while (end < data.size() && data[end] >= '0' && data[end] <= '9') ++end;
    if (end == pos) throw std::runtime_error(path + ": malformed " + magic + " header");
    out[f] = std::stoll(data.substr(pos, end - pos));
    pos = end;
  }
  if (pos >= data.size() || data[pos] != '\n')
    throw std::runtime_error(path + ": malformed " + magic + " header");
  return pos + 1;
}

std::string encode_amff(int width, int height, const std::vector<double>& values) {
  std::string out = "AMFF\n" + std::to_string(width) + " " + std::to_string(height) + "\n";
  out.reserve(out.size() + values.size() * 4);
  for (double v : values) append_f32_le(out, v);
  return out;
}

std::vector<double> decode_amff(const std::string& path, int* width, int* height) {
  const std::string data = read_all(path);
  long long dims[2];
  const size_t off = parse_header(data, path, "AMFF", 2, dims);
  if (dims[0] < 1 || dims[1] < 1) throw std::runtime_error(path + ": invalid AMFF dimensions");
  const size_t n = static_cast<size_t>(dims[0]) * static_cast<size_t>(dims[1]);
  if (data.size() - off < n * 4)
    throw std::runtime_error(path + ": truncated AMFF payload");
  std::vector<double> values(n);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data()) + off;
  for (size_t k = 0; k < n; ++k, p += 4) {
    values[k] = read_f32_le(p);
    if (!std::isfinite(values[k]))
      throw std::runtime_error(path + ": non-finite value in AMFF payload");
  }
  *width = static_cast<int>(dims[0]);
  *height = static_cast<int>(dims[1]);
  return values;
}

size_t packed_row_bytes(int width) { return (static_cast<size_t>(width) + 7) / 8; }

}  // namespace

void atomic_write_bytes(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

void amff_write(const std::string& path, const ScalarField& f) {
  atomic_write_bytes(path, encode_amff(f.width, f.height, f.values));
}

void amff_write(const std::string& path, const ProbabilityField& p) {
  atomic_write_bytes(path, encode_amff(p.width, p.height, p.theta));
}

ScalarField amff_read(const std::string& path) {
  ScalarField f;
  f.values = decode_amff(path, &f.width, &f.height);
  return f;
}

ProbabilityField amff_read_probability(const std::string& path) {
  ProbabilityField p;
  p.theta = decode_amff(path, &p.width, &p.height);
  for (double& v : p.theta) {
    if (v < -1e-6 || v > 1.0 + 1e-6)
      throw std::runtime_error(path + ": probability value outside [0,1]");
    v = std::clamp(v, 0.0, 1.0);
  }
  return p;
}

void pgm_write(const std::string& path, const LabelField& z) {
  std::string out =
      "P5\n" + std::to_string(z.width) + " " + std::to_string(z.height) + "\n255\n";
  out.reserve(out.size() + z.labels.size());
  for (auto v : z.labels) out.push_back(static_cast<char>(v ? 255 : 0));
  atomic_write_bytes(path, out);
}

void pgm_write(const std::string& path, const ScalarField& gray) {
  std::string out =
      "P5\n" + std::to_string(gray.width) + " " + std::to_string(gray.height) + "\n255\n";
  out.reserve(out.size() + gray.values.size());
  for (double v : gray.values) {
    const int g = static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0)));
    out.push_back(static_cast<char>(g));
  }
  atomic_write_bytes(path, out);
}

namespace {

struct PgmData {
  int width = 0, height = 0, maxval = 0;
  std::vector<unsigned char> pixels;
};

PgmData parse_pgm(const std::string& path) {
  const std::string data = read_all(path);
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    throw std::runtime_error(path + ": not a binary PGM (P5) file");
  size_t pos = 2;
  int fields[3];
  for (int f = 0; f < 3; ++f) {
    // skip whitespace and comment lines
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    size_t end = pos;
    while (end < data.size() && std::isdigit(static_cast<unsigned char>(data[end]))) ++end;
    if (end == pos) throw std::runtime_error(path + ": malformed PGM header");
    fields[f] = std::stoi(data.substr(pos, end - pos));
    pos = end;
  }
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    throw std::runtime_error(path + ": malformed PGM header");
  ++pos;
  PgmData out;
  out.width = fields[0];
  out.height = fields[1];
  out.maxval = fields[2];
  if (out.width < 1 || out.height < 1 || out.maxval < 1 || out.maxval > 255)
    throw std::runtime_error(path + ": unsupported PGM header values");
  const size_t n = static_cast<size_t>(out.width) * out.height;
  if (data.size() - pos < n) throw std::runtime_error(path + ": truncated PGM payload");
  out.pixels.assign(data.begin() + static_cast<long>(pos),
                    data.begin() + static_cast<long>(pos + n));
  return out;
}

}  // namespace

LabelField pgm_read_labels(const std::string& path) {
  const PgmData d = parse_pgm(path);
  LabelField z(d.width, d.height);
  for (size_t k = 0; k < d.pixels.size(); ++k) z.labels[k] = d.pixels[k] >= 128 ? 1 : 0;
  return z;
}

ScalarField pgm_read(const std::string& path) {
  const PgmData d = parse_pgm(path);
  ScalarField f(d.width, d.height);
  for (size_t k = 0; k < d.pixels.size(); ++k) f.values[k] = d.pixels[k];
  return f;
}

void samples_write(const std::string& path, const SampleSet& samples) {
  std::string out = "AMFS\n" + std::to_string(samples.width) + " " +
                    std::to_string(samples.height) + " " +
                    std::to_string(samples.particles.size()) + "\n";
  const size_t row_bytes = packed_row_bytes(samples.width);
  out.reserve(out.size() + samples.particles.size() * row_bytes * samples.height);
  for (const auto& p : samples.particles) {
    for (int j = 0; j < samples.height; ++j) {
      for (size_t byte = 0; byte < row_bytes; ++byte) {
        unsigned char b = 0;
        for (int bit = 0; bit < 8; ++bit) {
          const int i = static_cast<int>(byte) * 8 + bit;
          if (i < samples.width && p.labels.at(i, j)) b |= static_cast<unsigned char>(0x80 >> bit);
        }
        out.push_back(static_cast<char>(b));
      }
    }
  }
  atomic_write_bytes(path, out);
}

SampleSet samples_read(const std::string& path) {
  const std::string data = read_all(path);
  long long hdr[3];
  const size_t off = parse_header(data, path, "AMFS", 3, hdr);
  if (hdr[0] < 1 || hdr[1] < 1 || hdr[2] < 0)
    throw std::runtime_error(path + ": invalid AMFS header");
  SampleSet out;
  out.width = static_cast<int>(hdr[0]);
  out.height = static_cast<int>(hdr[1]);
  const size_t count = static_cast<size_t>(hdr[2]);
  const size_t row_bytes = packed_row_bytes(out.width);
  const size_t need = count * row_bytes * out.height;
  if (data.size() - off < need) throw std::runtime_error(path + ": truncated AMFS payload");

  const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data()) + off;
  out.particles.reserve(count);
  for (size_t s = 0; s < count; ++s) {
    GibbsParticle particle;
    particle.labels = LabelField(out.width, out.height);
    for (int j = 0; j < out.height; ++j) {
      for (int i = 0; i < out.width; ++i) {
        const unsigned char b = p[j * row_bytes + static_cast<size_t>(i) / 8];
        particle.labels.at(i, j) = (b >> (7 - i % 8)) & 1u;
      }
    }
    p += row_bytes * out.height;
    out.particles.push_back(std::move(particle));
  }
  return out;
}

}  // namespace amf
