// Copyright 2026 The jtcr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "jtcr/common.hpp"
#include "jtcr/data.hpp"
#include "jtcr/model.hpp"

namespace jtcr::io {

static_assert(std::endian::native == std::endian::little, "checkpoint layout assumes a little-endian host");

/// Writes `bytes` to `path` through a temporary file and a rename, so the
/// file is either complete or absent.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw DataError("write failed for '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A trained model with the id <-> index maps it was trained on.
struct Checkpoint {
  model::LatentModel model;
  std::vector<std::string> user_ids;
  std::vector<std::string> poi_ids;

  friend bool operator==(const Checkpoint& a, const Checkpoint& b) {
    return a.model.U == b.model.U && a.model.V == b.model.V && a.model.alpha == b.model.alpha &&
           a.model.lambda == b.model.lambda && a.user_ids == b.user_ids && a.poi_ids == b.poi_ids;
  }
};

inline Checkpoint make_checkpoint(const model::LatentModel& m, const data::Dataset& ds) {
  Checkpoint c{m, ds.user_ids(), {}};
  c.poi_ids.reserve(ds.num_pois());
  for (const auto& p : ds.pois()) c.poi_ids.push_back(p.id);
  return c;
}

/// Empty string if the checkpoint indexes match the dataset, else a reason.
inline std::string index_mismatch(const Checkpoint& c, const data::Dataset& ds) {
  if (c.user_ids.size() != ds.num_users())
    return "user count " + std::to_string(c.user_ids.size()) + " != " + std::to_string(ds.num_users());
  if (c.poi_ids.size() != ds.num_pois())
    return "poi count " + std::to_string(c.poi_ids.size()) + " != " + std::to_string(ds.num_pois());
  for (Index i = 0; i < ds.num_users(); ++i)
    if (c.user_ids[i] != ds.user_id(i)) return "user index " + std::to_string(i) + " is '" + c.user_ids[i] + "', dataset has '" + ds.user_id(i) + "'";
  for (Index j = 0; j < ds.num_pois(); ++j)
    if (c.poi_ids[j] != ds.poi(j).id) return "poi index " + std::to_string(j) + " is '" + c.poi_ids[j] + "', dataset has '" + ds.poi(j).id + "'";
  return {};
}

// Layout, little-endian:
//   char[8]  "JTCRCKP1"
//   u32      version (1)
//   u32      d
//   u64      n, m
//   f64      alpha, lambda
//   f64[d*n] U, column-major
//   f64[d*m] V, column-major
//   n x { u32 length, bytes } user ids
//   m x { u32 length, bytes } poi ids
inline constexpr char kCheckpointMagic[8] = {'J', 'T', 'C', 'R', 'C', 'K', 'P', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {
template <class T>
void put(std::string& out, const T& v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void get_doubles(double* dst, std::size_t count) {
    if (count > (bytes_.size() - pos_) / sizeof(double)) throw DataError("checkpoint truncated");
    std::memcpy(dst, bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
  }
  std::string get_string() {
    const auto len = get<std::uint32_t>();
    need(len);
    std::string s(bytes_.substr(pos_, len));
    pos_ += len;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t k) const {
    if (bytes_.size() - pos_ < k) throw DataError("checkpoint truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};
}  // namespace detail

inline std::string serialize(const Checkpoint& c) {
  const auto& m = c.model;
  if (c.user_ids.size() != static_cast<std::size_t>(m.U.cols()) ||
      c.poi_ids.size() != static_cast<std::size_t>(m.V.cols()) || m.U.rows() != m.V.rows())
    throw ConfigError("checkpoint shape mismatch");
  std::string out;
  out.reserve(48 + 8 * static_cast<std::size_t>(m.U.size() + m.V.size()));
  out.append(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put(out, kCheckpointVersion);
  detail::put(out, static_cast<std::uint32_t>(m.U.rows()));
  detail::put(out, static_cast<std::uint64_t>(m.U.cols()));
  detail::put(out, static_cast<std::uint64_t>(m.V.cols()));
  detail::put(out, m.alpha);
  detail::put(out, m.lambda);
  out.append(reinterpret_cast<const char*>(m.U.data()), sizeof(double) * static_cast<std::size_t>(m.U.size()));
  out.append(reinterpret_cast<const char*>(m.V.data()), sizeof(double) * static_cast<std::size_t>(m.V.size()));
  for (const auto* ids : {&c.user_ids, &c.poi_ids})
    for (const auto& s : *ids) {
      detail::put(out, static_cast<std::uint32_t>(s.size()));
      out += s;
    }
  return out;
}

inline Checkpoint deserialize(std::string_view bytes) {
  if (bytes.size() < sizeof kCheckpointMagic || std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    throw DataError("not a checkpoint (bad magic)");
  detail::Reader r(bytes.substr(sizeof kCheckpointMagic));
  if (r.get<std::uint32_t>() != kCheckpointVersion) throw DataError("unsupported checkpoint version");
  const auto d = r.get<std::uint32_t>();
  const auto n = r.get<std::uint64_t>();
  const auto m = r.get<std::uint64_t>();
  if (d == 0 || n > bytes.size() || m > bytes.size() || (n + m > 0 && d > bytes.size() / 8 / (n + m)))
    throw DataError("checkpoint header corrupt");
  Checkpoint c;
  c.model.alpha = r.get<double>();
  c.model.lambda = r.get<double>();
  c.model.U.resize(d, static_cast<Eigen::Index>(n));
  c.model.V.resize(d, static_cast<Eigen::Index>(m));
  r.get_doubles(c.model.U.data(), static_cast<std::size_t>(c.model.U.size()));
  r.get_doubles(c.model.V.data(), static_cast<std::size_t>(c.model.V.size()));
  c.user_ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) c.user_ids.push_back(r.get_string());
  c.poi_ids.reserve(m);
  for (std::uint64_t j = 0; j < m; ++j) c.poi_ids.push_back(r.get_string());
  if (!r.done()) throw DataError("trailing bytes in checkpoint");
  return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_file_atomic(path, serialize(c));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize(read_file(path)); }

}  // namespace jtcr::io
