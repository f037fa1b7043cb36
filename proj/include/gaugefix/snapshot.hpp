#pragma once

// Field snapshots: a flat little-endian binary file plus a JSON sidecar.
//
// Layout (all little-endian):
//   offset  0  char[8]   magic "GFSNAP01"
//   offset  8  uint32    grid_n
//   offset 12  uint32    component count (6)
//   offset 16  float64   domain_length
//   offset 24  char[6][8] component names, NUL padded: A_x A_y A_z pi_x pi_y pi_z
//   offset 72  float64[6][N³] grids in component order, each row-major with x slowest

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaugefix/errors.hpp"
#include "gaugefix/maxwell_field.hpp"

namespace gaugefix::snapshot {

inline constexpr std::array<char, 8> magic{'G', 'F', 'S', 'N', 'A', 'P', '0', '1'};
inline constexpr std::array<const char*, 6> component_names{"A_x", "A_y", "A_z",
                                                            "pi_x", "pi_y", "pi_z"};
inline constexpr std::size_t header_bytes = 72;

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw SnapshotError("snapshot truncated");
  return to_little(v);
}

}  // namespace detail

inline std::string sidecar_path(const std::string& path) { return path + ".json"; }

inline nlohmann::json sidecar(const GridSpec& g) {
  nlohmann::json j;
  j["format"] = "gaugefix-snapshot";
  j["version"] = 1;
  j["grid_n"] = g.n;
  j["domain_length"] = g.length;
  j["components"] = component_names;
  j["byte_order"] = "little";
  j["value_type"] = "float64";
  j["layout"] = "row-major, x slowest";
  j["header_bytes"] = header_bytes;
  return j;
}

inline void write(const std::string& path, const FieldState& s) {
  s.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw SnapshotError("cannot open '" + path + "' for writing");
  os.write(magic.data(), magic.size());
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.n));
  detail::put<std::uint32_t>(os, 6);
  detail::put<double>(os, s.grid.length);
  for (const char* name : component_names) {
    std::array<char, 8> field{};
    std::copy_n(name, std::strlen(name), field.begin());
    os.write(field.data(), field.size());
  }
  for (const auto* v : {&s.a, &s.pi}) {
    for (const auto& comp : v->c) {
      for (double x : comp) detail::put<double>(os, x);
    }
  }
  if (!os) throw SnapshotError("failed writing '" + path + "'");
  std::ofstream js(sidecar_path(path));
  if (!js) throw SnapshotError("cannot open sidecar for '" + path + "'");
  js << sidecar(s.grid).dump(2) << '\n';
}

inline FieldState read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot open snapshot '" + path + "'");
  std::array<char, 8> m{};
  is.read(m.data(), m.size());
  if (!is || m != magic) throw SnapshotError("'" + path + "' is not a gaugefix snapshot");
  const auto n = detail::get<std::uint32_t>(is);
  const auto ncomp = detail::get<std::uint32_t>(is);
  const auto length = detail::get<double>(is);
  if (ncomp != 6) throw SnapshotError("snapshot must hold 6 components");
  if (n < 4 || n > 4096 || n % 2 != 0) throw SnapshotError("snapshot has invalid grid_n");
  for (const char* name : component_names) {
    std::array<char, 8> field{};
    is.read(field.data(), field.size());
    if (!is || std::strncmp(field.data(), name, field.size()) != 0) {
      throw SnapshotError("snapshot component order is not A_x A_y A_z pi_x pi_y pi_z");
    }
  }
  GridSpec g{static_cast<int>(n), length};
  try {
    g.validate();
  } catch (const Error& e) {
    throw SnapshotError(std::string("snapshot header: ") + e.what());
  }
  FieldState s = FieldState::zeros(g);
  for (auto* v : {&s.a, &s.pi}) {
    for (auto& comp : v->c) {
      for (double& x : comp) x = detail::get<double>(is);
    }
  }
  is.peek();
  if (!is.eof()) throw SnapshotError("snapshot has trailing bytes");
  if (!s.finite()) throw SnapshotError("snapshot holds non-finite values");
  return s;
}

}  // namespace gaugefix::snapshot
