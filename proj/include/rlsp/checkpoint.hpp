#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "rlsp/error.hpp"
#include "rlsp/mdn.hpp"
#include "rlsp/nn.hpp"
#include "rlsp/vae.hpp"
#include "rlsp/world_models.hpp"

// Flat binary checkpoints (host byte order, little-endian on supported platforms):
//   "RLSPCKPT" | u32 format version | u32 kind | body
// Blocks used by the bodies:
//   vector:     u32 n | f64 x[n]
//   normalizer: vector mean | vector std
//   mlp:        u32 activation | u32 count | u32 sizes[count] | per layer: f64 W[out][in] row-major, f64 b[out]
namespace rlsp::ckpt {

inline constexpr std::array<char, 8> kMagic{'R', 'L', 'S', 'P', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kVersion = 1;

enum class Kind : std::uint32_t { regressor = 1, density = 2, encoder = 3, vector = 4, inverse_dynamics = 5 };

inline void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
inline void put_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

inline std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ConfigError("checkpoint: truncated file");
  return v;
}
inline double get_f64(std::istream& in) {
  double v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ConfigError("checkpoint: truncated file");
  return v;
}

inline void put_header(std::ostream& out, Kind kind) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(kind));
}

inline void expect_header(std::istream& in, Kind kind) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ConfigError("checkpoint: bad magic bytes");
  if (get_u32(in) != kVersion) throw ConfigError("checkpoint: unsupported format version");
  if (get_u32(in) != static_cast<std::uint32_t>(kind)) throw ConfigError("checkpoint: unexpected model kind");
}

inline void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v(i));
}
inline Eigen::VectorXd get_vector(std::istream& in) {
  Eigen::VectorXd v(get_u32(in));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get_f64(in);
  return v;
}

inline void put_normalizer(std::ostream& out, const Normalizer& n) {
  put_vector(out, n.mean);
  put_vector(out, n.std);
}
inline Normalizer get_normalizer(std::istream& in) {
  Normalizer n;
  n.mean = get_vector(in);
  n.std = get_vector(in);
  return n;
}

inline void put_mlp(std::ostream& out, const Mlp& m) {
  put_u32(out, static_cast<std::uint32_t>(m.activation()));
  put_u32(out, static_cast<std::uint32_t>(m.sizes().size()));
  for (int s : m.sizes()) put_u32(out, static_cast<std::uint32_t>(s));
  for (int l = 0; l < m.num_layers(); ++l) {
    const auto w = m.weight(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) put_f64(out, w(i, j));
    const auto b = m.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) put_f64(out, b(i));
  }
}
inline Mlp get_mlp(std::istream& in) {
  const auto act = static_cast<Activation>(get_u32(in));
  std::vector<int> sizes(get_u32(in));
  for (int& s : sizes) s = static_cast<int>(get_u32(in));
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) total += static_cast<Eigen::Index>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  Mlp m(sizes, act, Eigen::VectorXd::Zero(total));
  for (int l = 0; l < m.num_layers(); ++l) {
    auto w = m.weight(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = get_f64(in);
    auto b = m.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = get_f64(in);
  }
  return m;
}

inline void save(std::ostream& out, const Regressor& r) {
  put_header(out, Kind::regressor);
  put_normalizer(out, r.input_norm);
  put_mlp(out, r.net);
  put_f64(out, r.train_loss);
}
inline void load(std::istream& in, Regressor& r) {
  expect_header(in, Kind::regressor);
  r.input_norm = get_normalizer(in);
  r.net = get_mlp(in);
  r.train_loss = get_f64(in);
}

inline void save(std::ostream& out, const MixtureDensityModel& m) {
  put_header(out, Kind::density);
  put_u32(out, static_cast<std::uint32_t>(m.head.components));
  put_f64(out, m.head.fixed_variance);
  put_u32(out, static_cast<std::uint32_t>(m.target_dim));
  put_normalizer(out, m.input_norm);
  put_mlp(out, m.net);
  put_vector(out, m.lower);
  put_vector(out, m.upper);
  put_f64(out, m.train_loss);
}
inline void load(std::istream& in, MixtureDensityModel& m) {
  expect_header(in, Kind::density);
  m.head.components = static_cast<int>(get_u32(in));
  m.head.fixed_variance = get_f64(in);
  m.target_dim = static_cast<int>(get_u32(in));
  m.input_norm = get_normalizer(in);
  m.net = get_mlp(in);
  m.lower = get_vector(in);
  m.upper = get_vector(in);
  m.train_loss = get_f64(in);
}

inline void save(std::ostream& out, const EncoderDecoder& e) {
  put_header(out, Kind::encoder);
  put_u32(out, static_cast<std::uint32_t>(e.latent_dim));
  put_f64(out, e.kl_weight);
  put_normalizer(out, e.input_norm);
  put_mlp(out, e.encoder);
  put_mlp(out, e.decoder);
  put_f64(out, e.train_loss);
  put_f64(out, e.train_recon_loss);
}
inline void load(std::istream& in, EncoderDecoder& e) {
  expect_header(in, Kind::encoder);
  e.latent_dim = static_cast<int>(get_u32(in));
  e.kl_weight = get_f64(in);
  e.input_norm = get_normalizer(in);
  e.encoder = get_mlp(in);
  e.decoder = get_mlp(in);
  e.train_loss = get_f64(in);
  e.train_recon_loss = get_f64(in);
}

inline void save(std::ostream& out, const InverseDynamics& d) {
  put_header(out, Kind::inverse_dynamics);
  put_u32(out, static_cast<std::uint32_t>(d.state_dim));
  put_f64(out, d.noise_std);
  put_normalizer(out, d.target_norm);
  put_vector(out, d.clip_low);
  put_vector(out, d.clip_high);
  save(out, d.model);
}
inline void load(std::istream& in, InverseDynamics& d) {
  expect_header(in, Kind::inverse_dynamics);
  d.state_dim = static_cast<int>(get_u32(in));
  d.noise_std = get_f64(in);
  d.target_norm = get_normalizer(in);
  d.clip_low = get_vector(in);
  d.clip_high = get_vector(in);
  load(in, d.model);
}

inline void save(std::ostream& out, const Eigen::VectorXd& v) {
  put_header(out, Kind::vector);
  put_vector(out, v);
}
inline void load(std::istream& in, Eigen::VectorXd& v) {
  expect_header(in, Kind::vector);
  v = get_vector(in);
}

template <class T>
void save_file(const std::string& path, const T& obj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  save(out, obj);
}

template <class T>
T load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  T obj;
  load(in, obj);
  return obj;
}

}  // namespace rlsp::ckpt
