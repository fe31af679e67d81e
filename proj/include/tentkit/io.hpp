#pragma once

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>

#include "tentkit/core.hpp"

namespace tentkit {

namespace detail {

inline void put_bytes_le(std::ostream& os, const void* p, std::size_t n) {
  std::array<char, 8> b{};
  std::memcpy(b.data(), p, n);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.begin() + n);
  os.write(b.data(), static_cast<std::streamsize>(n));
}

inline void get_bytes_le(std::istream& is, void* p, std::size_t n) {
  std::array<char, 8> b{};
  if (!is.read(b.data(), static_cast<std::streamsize>(n))) throw format_error("truncated HSF1 stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.begin() + n);
  std::memcpy(p, b.data(), n);
}

template <class T>
void put_le(std::ostream& os, T v) {
  put_bytes_le(os, &v, sizeof v);
}

template <class T>
T get_le(std::istream& is) {
  T v{};
  get_bytes_le(is, &v, sizeof v);
  return v;
}

}  // namespace detail

// HSF1: "HSF1", int32 d, n_space, m_scale, n_scales, f64 side, s_min, s_max,
// u8 complex flag, then f64 samples (re, im interleaved when complex).
template <class Scalar>
void write_hsf1(std::ostream& os, const BasicHalfSpaceField<Scalar>& f) {
  const Domain& dom = f.domain();
  os.write("HSF1", 4);
  detail::put_le<std::int32_t>(os, dom.d());
  detail::put_le<std::int32_t>(os, dom.n_space());
  detail::put_le<std::int32_t>(os, dom.m_scale());
  detail::put_le<std::int32_t>(os, dom.n_scales());
  detail::put_le<double>(os, dom.side());
  detail::put_le<double>(os, dom.s_min());
  detail::put_le<double>(os, dom.s_max());
  constexpr bool cplx = !std::is_arithmetic_v<Scalar>;
  detail::put_le<std::uint8_t>(os, cplx ? 1 : 0);
  for (const auto& v : f.values()) {
    if constexpr (cplx) {
      detail::put_le<double>(os, v.real());
      detail::put_le<double>(os, v.imag());
    } else {
      detail::put_le<double>(os, v);
    }
  }
  if (!os) throw format_error("failed writing HSF1 stream");
}

using AnyHalfSpaceField = std::variant<HalfSpaceField, ComplexHalfSpaceField>;

inline AnyHalfSpaceField read_hsf1(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "HSF1", 4) != 0) throw format_error("not an HSF1 stream");
  auto d = detail::get_le<std::int32_t>(is);
  auto n = detail::get_le<std::int32_t>(is);
  auto m = detail::get_le<std::int32_t>(is);
  auto ns = detail::get_le<std::int32_t>(is);
  auto side = detail::get_le<double>(is);
  auto s_min = detail::get_le<double>(is);
  auto s_max = detail::get_le<double>(is);
  auto flag = detail::get_le<std::uint8_t>(is);
  if (flag > 1) throw format_error("bad HSF1 complex flag");
  Domain dom = [&] {
    try {
      return Domain(d, side, n, s_min, s_max, m);
    } catch (const parameter_error& e) {
      throw format_error(std::string("bad HSF1 header: ") + e.what());
    }
  }();
  if (dom.n_scales() != ns) throw format_error("HSF1 n_scales inconsistent with scale range");
  if (flag == 0) {
    std::vector<double> v(dom.size());
    for (auto& x : v) x = detail::get_le<double>(is);
    return HalfSpaceField(dom, std::move(v));
  }
  std::vector<std::complex<double>> v(dom.size());
  for (auto& x : v) {
    double re = detail::get_le<double>(is);
    double im = detail::get_le<double>(is);
    x = {re, im};
  }
  return ComplexHalfSpaceField(dom, std::move(v));
}

template <class Scalar>
void save_hsf1(const std::string& path, const BasicHalfSpaceField<Scalar>& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot open " + path);
  write_hsf1(os, f);
}

inline AnyHalfSpaceField load_hsf1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("cannot open " + path);
  return read_hsf1(is);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

inline bool skip_line(const std::string& line) {
  auto b = line.find_first_not_of(" \t\r");
  return b == std::string::npos || line[b] == '#';
}

inline double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw format_error("bad number '" + s + "'");
  }
  if (pos != s.size()) throw format_error("bad number '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s) {
  double v = parse_double(s);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw format_error("bad integer '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace detail

// d = 1 only: lines "j, x, value"; unlisted samples are zero. A non-numeric first line is a header.
inline HalfSpaceField read_field_csv(std::istream& is, const Domain& dom) {
  if (dom.d() != 1) throw parameter_error("CSV field import is defined for d = 1");
  HalfSpaceField f(dom);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (detail::skip_line(line)) continue;
    auto cells = detail::split_csv(line);
    if (first) {
      first = false;
      try {
        detail::parse_double(cells.at(0));
      } catch (const std::exception&) {
        continue;
      }
    }
    if (cells.size() != 3) throw format_error("expected 'j, x, value'");
    int j = detail::parse_int(cells[0]);
    int x = detail::parse_int(cells[1]);
    f.set(j, {x}, detail::parse_double(cells[2]));
  }
  return f;
}

// Lines "i_0, ..., i_{d-1}, value".
inline BoundaryField read_boundary_csv(std::istream& is, const Domain& dom) {
  BoundaryField f(dom);
  std::string line;
  std::vector<int> idx(dom.d());
  while (std::getline(is, line)) {
    if (detail::skip_line(line)) continue;
    auto cells = detail::split_csv(line);
    if (cells.size() != static_cast<std::size_t>(dom.d()) + 1) throw format_error("expected d indices and a value");
    for (int a = 0; a < dom.d(); ++a) idx[a] = detail::parse_int(cells[a]);
    f.set(idx, detail::parse_double(cells.back()));
  }
  return f;
}

inline void write_sequence_csv(std::ostream& os, const CubeSequence& s) {
  os.precision(17);
  for (const auto& [q, v] : s.entries()) {
    os << q.k;
    for (int o : q.offset) os << ", " << o;
    os << ", " << v << "\n";
  }
}

// Lines "k, offset..., value".
inline CubeSequence read_sequence_csv(std::istream& is) {
  CubeSequence s;
  std::string line;
  while (std::getline(is, line)) {
    if (detail::skip_line(line)) continue;
    auto cells = detail::split_csv(line);
    if (cells.size() < 3) throw format_error("expected 'k, offset..., value'");
    DyadicCube q{detail::parse_int(cells[0]), {}};
    for (std::size_t i = 1; i + 1 < cells.size(); ++i) q.offset.push_back(detail::parse_int(cells[i]));
    s.set(q, detail::parse_double(cells.back()));
  }
  return s;
}

}  // namespace tentkit
