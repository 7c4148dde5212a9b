#include "sega/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>

namespace sega {

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(where) + ": shape mismatch (" +
                                std::to_string(a.height) + "x" + std::to_string(a.width) +
                                "x" + std::to_string(a.channels) + " vs " +
                                std::to_string(b.height) + "x" + std::to_string(b.width) +
                                "x" + std::to_string(b.channels) + ")");
}

double Rng::next_normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = next_unit();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  have_spare_ = true;
  return r * std::cos(t);
}

GradientField sample_gaussian(const RngStream& stream, int d) {
  if (d < 1) throw std::invalid_argument("sample_gaussian: d must be >= 1");
  GradientField out(1, d, 1);
  Rng rng(stream);
  for (double& v : out.data) v = rng.next_normal();
  return out;
}

GradientField sample_gaussian(const RngStream& stream, int height, int width,
                              int channels) {
  GradientField out(height, width, channels);
  Rng rng(stream);
  for (double& v : out.data) v = rng.next_normal();
  return out;
}

double lp_norm(const Tensor& field, Norm p) {
  if (field.data.empty()) throw std::invalid_argument("lp_norm: empty field");
  switch (p) {
    case Norm::l1: {
      double s = 0.0;
      for (double v : field.data) s += std::abs(v);
      return s;
    }
    case Norm::l2: {
      double s = 0.0;
      for (double v : field.data) s += v * v;
      return std::sqrt(s);
    }
    case Norm::linf: {
      double s = 0.0;
      for (double v : field.data) s = std::max(s, std::abs(v));
      return s;
    }
  }
  throw std::invalid_argument("lp_norm: unknown norm");
}

double mean_abs(const Tensor& field) {
  if (field.data.empty()) throw std::invalid_argument("mean_abs: empty field");
  double s = 0.0;
  for (double v : field.data) s += std::abs(v);
  return s / static_cast<double>(field.data.size());
}

double rms(const Tensor& field) {
  if (field.data.empty()) throw std::invalid_argument("rms: empty field");
  double s = 0.0;
  for (double v : field.data) s += v * v;
  return std::sqrt(s / static_cast<double>(field.data.size()));
}

Image clamp_image(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// SEGT
// ---------------------------------------------------------------------------

namespace {

void put_u32le(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xFF));
  buf.push_back(static_cast<char>((v >> 8) & 0xFF));
  buf.push_back(static_cast<char>((v >> 16) & 0xFF));
  buf.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_segt(const std::string& path, const Tensor& t) {
  std::string buf;
  buf.reserve(16 + t.data.size() * 4);
  buf += "SEGT";
  put_u32le(buf, 3);
  put_u32le(buf, static_cast<std::uint32_t>(t.height));
  put_u32le(buf, static_cast<std::uint32_t>(t.width));
  put_u32le(buf, static_cast<std::uint32_t>(t.channels));
  for (double v : t.data) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32le(buf, bits);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_segt: cannot open " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write_segt: short write to " + path);
}

Tensor read_segt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_segt: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < 8 || std::memcmp(p, "SEGT", 4) != 0)
    throw IoError("read_segt: bad magic in " + path);
  const std::uint32_t rank = get_u32le(p + 4);
  if (rank < 1 || rank > 3) throw IoError("read_segt: unsupported rank in " + path);
  if (buf.size() < 8 + 4 * static_cast<std::size_t>(rank))
    throw IoError("read_segt: truncated header in " + path);
  std::uint32_t dims[3] = {1, 1, 1};
  for (std::uint32_t i = 0; i < rank; ++i) dims[i] = get_u32le(p + 8 + 4 * i);
  int h = 1, w = 1, c = 1;
  if (rank == 1) {
    w = static_cast<int>(dims[0]);
  } else if (rank == 2) {
    h = static_cast<int>(dims[0]);
    w = static_cast<int>(dims[1]);
  } else {
    h = static_cast<int>(dims[0]);
    w = static_cast<int>(dims[1]);
    c = static_cast<int>(dims[2]);
  }
  Tensor t(h, w, c);
  const std::size_t need = 8 + 4 * static_cast<std::size_t>(rank) + 4 * t.data.size();
  if (buf.size() != need) throw IoError("read_segt: payload size mismatch in " + path);
  const unsigned char* q = p + 8 + 4 * rank;
  for (std::size_t i = 0; i < t.data.size(); ++i, q += 4) {
    const std::uint32_t bits = get_u32le(q);
    float f;
    std::memcpy(&f, &bits, 4);
    t.data[i] = static_cast<double>(f);
  }
  return t;
}

// ---------------------------------------------------------------------------
// PPM
// ---------------------------------------------------------------------------

void write_ppm(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_ppm: channels must be 1 or 3");
  std::string buf = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  buf.reserve(buf.size() + static_cast<std::size_t>(img.height) * img.width * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = img.at(y, x, img.channels == 1 ? 0 : c);
        const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
        buf.push_back(static_cast<char>(static_cast<unsigned char>(q)));
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_ppm: cannot open " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write_ppm: short write to " + path);
}

namespace {

// Skips whitespace and '#' comments between PPM header tokens.
int next_ppm_token(std::istream& in) {
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (!std::isspace(ch)) {
      return ch;
    }
    ch = in.get();
  }
  return EOF;
}

int read_ppm_int(std::istream& in) {
  int ch = next_ppm_token(in);
  if (ch == EOF || !std::isdigit(ch)) throw IoError("read_ppm: malformed header");
  int v = 0;
  while (ch != EOF && std::isdigit(ch)) {
    v = v * 10 + (ch - '0');
    ch = in.get();
  }
  return v;
}

}  // namespace

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_ppm: cannot open " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '6') throw IoError("read_ppm: not a P6 file: " + path);
  const int w = read_ppm_int(in);
  const int h = read_ppm_int(in);
  const int maxval = read_ppm_int(in);
  if (maxval != 255) throw IoError("read_ppm: only 8-bit PPM supported: " + path);
  Image img(h, w, 3);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw IoError("read_ppm: truncated pixel data in " + path);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = static_cast<double>(row[static_cast<std::size_t>(x) * 3 + c]) / 255.0;
  }
  return img;
}

}  // namespace sega
