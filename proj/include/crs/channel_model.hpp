#pragma once

// Channel realizations for the two-user MISO broadcast channel with one
// eavesdropper and a relaying user, plus their generation and JSON I/O.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "crs/error.hpp"
#include "crs/rng.hpp"

namespace crs {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;

struct NoiseVariances {
  double u1 = 1.0;  // U1, phase I
  double u2 = 1.0;  // U2, phase I
  double u3 = 1.0;  // U2, relay phase
  double e1 = 1.0;  // eavesdropper, phase I
  double e2 = 1.0;  // eavesdropper, relay phase

  bool operator==(const NoiseVariances&) const = default;
};

struct ChannelSet {
  int n_t = 2;
  CVec h1;  // S -> U1
  CVec h2;  // S -> U2
  CVec g1;  // S -> E
  Complex h3;  // U1 -> U2
  Complex g2;  // U1 -> E
  NoiseVariances sigma2;

  bool operator==(const ChannelSet& o) const {
    return n_t == o.n_t && h1 == o.h1 && h2 == o.h2 && g1 == o.g1 &&
           h3 == o.h3 && g2 == o.g2 && sigma2 == o.sigma2;
  }
};

struct PowerBudget {
  double p_t = 1.0;  // transmit power at S, linear
  double p_r = 1.0;  // relay power at U1, linear
};

// Per-link variances of the i.i.d. CN(0, s) entries.
struct ChannelStats {
  double h1 = 1.0;
  double h2 = 1.0;
  double g1 = 1.0;
  double h3 = 1.0;
  double g2 = 1.0;
};

inline void validate(const ChannelStats& s) {
  if (!(s.h1 > 0 && s.h2 > 0 && s.g1 > 0 && s.h3 > 0 && s.g2 > 0))
    throw DomainError("channel statistics must be positive");
}

inline void validate(const PowerBudget& pb) {
  if (!(pb.p_t > 0 && pb.p_r > 0))
    throw DomainError("power budget must be positive");
}

inline void validate(const ChannelSet& cs) {
  if (cs.n_t < 2) throw InvalidDimension("n_t must be at least 2");
  const auto n = static_cast<Eigen::Index>(cs.n_t);
  if (cs.h1.size() != n || cs.h2.size() != n || cs.g1.size() != n)
    throw InvalidDimension("channel vector length differs from n_t");
  const auto& v = cs.sigma2;
  if (!(v.u1 > 0 && v.u2 > 0 && v.u3 > 0 && v.e1 > 0 && v.e2 > 0))
    throw DomainError("noise variances must be positive");
}

// Swaps the user roles when U2 has the stronger direct channel. The relay
// links h3 and g2 and the relay-phase noise are left untouched.
inline ChannelSet order_users(ChannelSet cs) {
  if (cs.h1.norm() < cs.h2.norm()) {
    std::swap(cs.h1, cs.h2);
    std::swap(cs.sigma2.u1, cs.sigma2.u2);
  }
  return cs;
}

inline ChannelSet generate_channel_set(CounterRng rng, int n_t,
                                       const ChannelStats& stats) {
  if (n_t < 2) throw InvalidDimension("n_t must be at least 2");
  validate(stats);
  ChannelSet cs;
  cs.n_t = n_t;
  cs.h1.resize(n_t);
  cs.h2.resize(n_t);
  cs.g1.resize(n_t);
  for (int i = 0; i < n_t; ++i) cs.h1[i] = rng.next_complex_gaussian(stats.h1);
  for (int i = 0; i < n_t; ++i) cs.h2[i] = rng.next_complex_gaussian(stats.h2);
  for (int i = 0; i < n_t; ++i) cs.g1[i] = rng.next_complex_gaussian(stats.g1);
  cs.h3 = rng.next_complex_gaussian(stats.h3);
  cs.g2 = rng.next_complex_gaussian(stats.g2);
  return order_users(std::move(cs));
}

inline ChannelSet generate_channel_set(std::uint64_t seed, int n_t,
                                       const ChannelStats& stats) {
  return generate_channel_set(CounterRng(seed), n_t, stats);
}

// ---------------------------------------------------------------------------
// JSON schema
//
//   {
//     "n_t": 2,
//     "h1": [[re, im], ...],  "h2": [...],  "g1": [...],   // length n_t
//     "h3": [re, im],         "g2": [re, im],
//     "sigma2": {"u1": ., "u2": ., "u3": ., "e1": ., "e2": .}
//   }
//
// Doubles are written with 17 significant digits so load(save(cs)) == cs.
// Unknown keys are rejected.

namespace detail {

inline nlohmann::json complex_to_json(Complex z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

inline nlohmann::json cvec_to_json(const CVec& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v[i]));
  return a;
}

inline Complex complex_from_json(const nlohmann::json& j,
                                 const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(field, "expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline CVec cvec_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field, "expected an array of [re, im]");
  CVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] =
        complex_from_json(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

inline const nlohmann::json& require(const nlohmann::json& obj,
                                     const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(key, "missing");
  return *it;
}

inline void reject_unknown(const nlohmann::json& obj,
                           std::initializer_list<const char*> known,
                           const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ParseError(prefix + it.key(), "unknown key");
  }
}

inline double positive_number(const nlohmann::json& j,
                              const std::string& field) {
  if (!j.is_number()) throw ParseError(field, "expected a number");
  const double v = j.get<double>();
  if (!(v > 0)) throw ParseError(field, "must be positive");
  return v;
}

}  // namespace detail

inline nlohmann::json to_json(const ChannelSet& cs) {
  nlohmann::json j;
  j["n_t"] = cs.n_t;
  j["h1"] = detail::cvec_to_json(cs.h1);
  j["h2"] = detail::cvec_to_json(cs.h2);
  j["g1"] = detail::cvec_to_json(cs.g1);
  j["h3"] = detail::complex_to_json(cs.h3);
  j["g2"] = detail::complex_to_json(cs.g2);
  j["sigma2"] = {{"u1", cs.sigma2.u1},
                 {"u2", cs.sigma2.u2},
                 {"u3", cs.sigma2.u3},
                 {"e1", cs.sigma2.e1},
                 {"e2", cs.sigma2.e2}};
  return j;
}

inline ChannelSet channel_set_from_json(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ParseError("<root>", "expected an object");
  reject_unknown(j, {"n_t", "h1", "h2", "g1", "h3", "g2", "sigma2"}, "");
  ChannelSet cs;
  const auto& nt = require(j, "n_t");
  if (!nt.is_number_integer()) throw ParseError("n_t", "expected an integer");
  cs.n_t = nt.get<int>();
  cs.h1 = cvec_from_json(require(j, "h1"), "h1");
  cs.h2 = cvec_from_json(require(j, "h2"), "h2");
  cs.g1 = cvec_from_json(require(j, "g1"), "g1");
  cs.h3 = complex_from_json(require(j, "h3"), "h3");
  cs.g2 = complex_from_json(require(j, "g2"), "g2");
  const auto& s = require(j, "sigma2");
  if (!s.is_object()) throw ParseError("sigma2", "expected an object");
  reject_unknown(s, {"u1", "u2", "u3", "e1", "e2"}, "sigma2.");
  cs.sigma2.u1 = positive_number(require(s, "u1"), "sigma2.u1");
  cs.sigma2.u2 = positive_number(require(s, "u2"), "sigma2.u2");
  cs.sigma2.u3 = positive_number(require(s, "u3"), "sigma2.u3");
  cs.sigma2.e1 = positive_number(require(s, "e1"), "sigma2.e1");
  cs.sigma2.e2 = positive_number(require(s, "e2"), "sigma2.e2");
  validate(cs);
  return cs;
}

inline std::string channel_set_to_string(const ChannelSet& cs) {
  return to_json(cs).dump(2) + "\n";
}

inline ChannelSet channel_set_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("<root>", e.what());
  }
  return channel_set_from_json(j);
}

inline void save_channel_set(const ChannelSet& cs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << channel_set_to_string(cs);
  if (!out) throw Error("write to '" + path + "' failed");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ChannelSet load_channel_set(const std::string& path) {
  return channel_set_from_string(read_file(path));
}

// FNV-1a over raw bytes, printed as 16 hex digits.
inline std::string fingerprint(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kHex[h & 0xf];
  return out;
}

inline std::string fingerprint(const ChannelSet& cs) {
  return fingerprint(channel_set_to_string(cs));
}

}  // namespace crs
