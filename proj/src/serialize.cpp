#include "mnflow/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace mnflow {

namespace {

constexpr char kMagic[4] = {'M', 'N', 'F', '1'};

void write_header(std::ofstream& out, const DomainSpec& d,
                  std::uint8_t payload) {
  out.write(kMagic, 4);
  std::uint8_t kind = d.kind == DomainKind::PeriodicBox ? 0 : 1;
  out.write(reinterpret_cast<const char*>(&kind), 1);
  out.write(reinterpret_cast<const char*>(&payload), 1);
  if (d.kind == DomainKind::PeriodicBox) {
    std::uint32_t n = static_cast<std::uint32_t>(d.n);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&d.L), 8);
  } else {
    std::uint32_t nr = static_cast<std::uint32_t>(d.nr);
    out.write(reinterpret_cast<const char*>(&nr), 4);
    out.write(reinterpret_cast<const char*>(&d.R0), 8);
    out.write(reinterpret_cast<const char*>(&d.R), 8);
  }
}

void read_header(std::ifstream& in, const DomainSpec& d,
                 std::uint8_t expect_payload) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("snapshot: bad magic");
  std::uint8_t kind, payload;
  in.read(reinterpret_cast<char*>(&kind), 1);
  in.read(reinterpret_cast<char*>(&payload), 1);
  std::uint8_t want_kind = d.kind == DomainKind::PeriodicBox ? 0 : 1;
  if (kind != want_kind || payload != expect_payload)
    throw std::runtime_error("snapshot: header mismatch");
  if (d.kind == DomainKind::PeriodicBox) {
    std::uint32_t n;
    double L;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&L), 8);
    if (n != static_cast<std::uint32_t>(d.n) || L != d.L)
      throw std::runtime_error("snapshot: box geometry mismatch");
  } else {
    std::uint32_t nr;
    double R0, R;
    in.read(reinterpret_cast<char*>(&nr), 4);
    in.read(reinterpret_cast<char*>(&R0), 8);
    in.read(reinterpret_cast<char*>(&R), 8);
    if (nr != static_cast<std::uint32_t>(d.nr) || R0 != d.R0 || R != d.R)
      throw std::runtime_error("snapshot: shell geometry mismatch");
  }
}

void write_payload(std::ofstream& out, const Scalar& f) {
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
}

void read_payload(std::ifstream& in, Scalar& f, std::size_t n) {
  f.resize(n);
  in.read(reinterpret_cast<char*>(f.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("snapshot: truncated payload");
}

}  // namespace

void write_scalar_bin(const std::string& path, const Scalar& f,
                      const DomainSpec& d) {
  if (f.size() != d.points())
    throw std::invalid_argument("snapshot: field size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path);
  write_header(out, d, 0);
  write_payload(out, f);
}

Scalar read_scalar_bin(const std::string& path, const DomainSpec& d) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path);
  read_header(in, d, 0);
  Scalar f;
  read_payload(in, f, d.points());
  return f;
}

void write_state_bin(const std::string& path, const FieldState& s,
                     const DomainSpec& d) {
  s.check_shape(d);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path);
  write_header(out, d, 1);
  std::uint8_t frame = s.frame == Frame::Euler ? 0 : 1;
  out.write(reinterpret_cast<const char*>(&frame), 1);
  out.write(reinterpret_cast<const char*>(&s.time), 8);
  write_payload(out, s.theta);
  for (const auto& c : s.vel) write_payload(out, c);
}

FieldState read_state_bin(const std::string& path, const DomainSpec& d) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path);
  read_header(in, d, 1);
  FieldState s;
  std::uint8_t frame;
  in.read(reinterpret_cast<char*>(&frame), 1);
  in.read(reinterpret_cast<char*>(&s.time), 8);
  s.frame = frame == 0 ? Frame::Euler : Frame::Lagrange;
  read_payload(in, s.theta, d.points());
  s.vel.resize(d.vel_comps());
  for (auto& c : s.vel) read_payload(in, c, d.points());
  return s;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(path), ncols_(header.size()) {
  if (!out_) throw std::runtime_error("csv: cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_)
    throw std::invalid_argument("csv: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::row_mixed(const std::vector<std::string>& cells) {
  if (cells.size() != ncols_)
    throw std::invalid_argument("csv: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace mnflow
