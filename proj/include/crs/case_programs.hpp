#pragma once

// Linearized convex subproblems for the four secrecy sign patterns.
//
// Case k fixes which private streams keep their secrecy term:
//   Case1: R_p1 >= C_1e, R_p2 >= C_2e     objective keeps both pairs
//   Case2: R_p1 >= C_1e, R_p2 <= C_2e     keeps pair 1
//   Case3: R_p1 <= C_1e, R_p2 >= C_2e     keeps pair 2
//   Case4: R_p1 <= C_1e, R_p2 <= C_2e     common term only
//
// Every rate is split into auxiliaries alpha (rate), beta (rate per unit
// time) and rho (SINR). Quantities that must be bounded from below (a
// legitimate rate in a retained pair, the eavesdropper rate in a dropped
// pair) use the minorants phi_lb / psi_lb and keep 2^beta <= 1 + rho exact;
// quantities bounded from above use theta_ub / omega_lb / gamma_tangent.
// Every point feasible for the subproblem is therefore feasible for the
// original case constraints.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "crs/convex_program.hpp"
#include "crs/rate_engine.hpp"
#include "crs/surrogate.hpp"

namespace crs {

enum class CaseId { kCase1 = 1, kCase2 = 2, kCase3 = 3, kCase4 = 4 };

inline constexpr std::array<CaseId, 4> kAllCases = {CaseId::kCase1, CaseId::kCase2,
                                                    CaseId::kCase3, CaseId::kCase4};

inline int case_number(CaseId c) { return static_cast<int>(c); }

// True when private pair `user` (1 or 2) has R_pk >= C_ke in this case and
// therefore contributes alpha_pk - alpha_ke to the objective.
inline bool pair_retained(CaseId c, int user) {
  const int k = case_number(c);
  return user == 1 ? (k == 1 || k == 2) : (k == 1 || k == 3);
}

// Structural restrictions that carve the baseline schemes out of CRS.
struct Restriction {
  bool theta_one = false;      // no relay phase
  bool no_common = false;      // p_c = 0, common-stream blocks dropped
  bool no_private2 = false;    // p_2 = 0, private pair 2 dropped

  bool operator==(const Restriction&) const = default;
};

inline constexpr double kThetaMin = 1e-3;
inline constexpr double kRhoFloor = 1e-6;

// Index order inside the four- and three-element auxiliary arrays.
enum PrivateSlot { kP1 = 0, kP2 = 1, k1E = 2, k2E = 3 };
enum CommonSlot { kC1 = 0, kC2 = 1, kCE = 2 };

struct ScaIterate {
  PrecoderDesign design;
  std::array<double, 4> alpha_p{}, beta_p{}, rho_p{};
  std::array<double, 3> alpha_c{}, beta_c{}, rho_c{};
};

// Slot of every decision variable. Precoders are realified as [Re; Im].
struct VariableLayout {
  int n_t = 2;
  int p_c = 0, p_1 = 0, p_2 = 0;
  int theta = 0, t_c = 0;
  std::array<int, 4> alpha_p{}, beta_p{}, rho_p{};
  std::array<int, 3> alpha_c{}, beta_c{}, rho_c{};
  int size = 0;

  explicit VariableLayout(int nt = 2) : n_t(nt) {
    int k = 0;
    p_c = k;
    k += 2 * nt;
    p_1 = k;
    k += 2 * nt;
    p_2 = k;
    k += 2 * nt;
    theta = k++;
    t_c = k++;
    for (auto& i : alpha_p) i = k++;
    for (auto& i : alpha_c) i = k++;
    for (auto& i : beta_p) i = k++;
    for (auto& i : beta_c) i = k++;
    for (auto& i : rho_p) i = k++;
    for (auto& i : rho_c) i = k++;
    size = k;
  }

  VectorXd pack(const ScaIterate& it, double t_c_value) const {
    VectorXd x(size);
    x.segment(p_c, 2 * n_t) = realify(it.design.p_c);
    x.segment(p_1, 2 * n_t) = realify(it.design.p_1);
    x.segment(p_2, 2 * n_t) = realify(it.design.p_2);
    x[theta] = it.design.theta;
    x[t_c] = t_c_value;
    for (int i = 0; i < 4; ++i) {
      x[alpha_p[i]] = it.alpha_p[i];
      x[beta_p[i]] = it.beta_p[i];
      x[rho_p[i]] = it.rho_p[i];
    }
    for (int i = 0; i < 3; ++i) {
      x[alpha_c[i]] = it.alpha_c[i];
      x[beta_c[i]] = it.beta_c[i];
      x[rho_c[i]] = it.rho_c[i];
    }
    return x;
  }

  ScaIterate unpack(const VectorXd& x) const {
    ScaIterate it;
    it.design.p_c = complexify(x.segment(p_c, 2 * n_t));
    it.design.p_1 = complexify(x.segment(p_1, 2 * n_t));
    it.design.p_2 = complexify(x.segment(p_2, 2 * n_t));
    it.design.theta = x[theta];
    for (int i = 0; i < 4; ++i) {
      it.alpha_p[i] = x[alpha_p[i]];
      it.beta_p[i] = x[beta_p[i]];
      it.rho_p[i] = x[rho_p[i]];
    }
    for (int i = 0; i < 3; ++i) {
      it.alpha_c[i] = x[alpha_c[i]];
      it.beta_c[i] = x[beta_c[i]];
      it.rho_c[i] = x[rho_c[i]];
    }
    return it;
  }
};

struct CaseProgram {
  CaseId case_id = CaseId::kCase1;
  Restriction restriction;
  VariableLayout layout;
  ConvexProgram program;
};

namespace detail {

// Caps that keep the feasible set compact; far outside any reachable value.
struct AuxBounds {
  double sinr_cap;
  double rate_cap;
};

inline AuxBounds aux_bounds(const ChannelSet& cs, const PowerBudget& pb) {
  const auto& s = cs.sigma2;
  const double min_noise = std::min({s.u1, s.u2, s.u3, s.e1, s.e2});
  const double direct =
      pb.p_t * std::max({cs.h1.squaredNorm(), cs.h2.squaredNorm(), cs.g1.squaredNorm()});
  const double relay = pb.p_r * std::max(std::norm(cs.h3), std::norm(cs.g2));
  const double cap = 10.0 * (1.0 + (direct + relay) / min_noise);
  return {cap, std::log2(1.0 + cap) + 1.0};
}

class Stamper {
 public:
  explicit Stamper(const VariableLayout& l) : l_(l) {}

  // Linear form coeff . realify(p) where p starts at `offset`.
  LinearForm vec(int offset, const VectorXd& coeff) const {
    LinearForm f;
    for (Eigen::Index i = 0; i < coeff.size(); ++i)
      f.add(offset + static_cast<int>(i), coeff[i]);
    return f;
  }

  // The two squared forms of |h^H p|^2 for the precoder at `offset`.
  std::vector<LinearForm> gain_squares(const CVec& h, int offset) const {
    const auto g = gain_forms(h);
    return {vec(offset, g.re), vec(offset, g.im)};
  }

  LinearForm pair_linear(const PairBundle& b, int beta) const {
    LinearForm f;
    f.add(l_.theta, b.c_theta).add(beta, b.c_beta);
    f.constant = b.c0;
    return f;
  }

  LinearForm pair_square(const PairBundle& b, int beta) const {
    LinearForm f;
    f.add(l_.theta, 1.0).add(beta, b.s);
    return f;
  }

  // alpha - phi(theta, beta) - extra <= 0 : quadratic with weight 1/4.
  Constraint rate_lower(std::string name, int alpha, int beta, ExpansionPair at,
                        const LinearForm& extra) const {
    const auto b = phi_bundle(at);
    Constraint c;
    c.kind = BlockKind::kQuadratic;
    c.name = std::move(name);
    c.weight = -b.w;
    c.squares = {pair_square(b, beta)};
    c.affine.add(alpha, 1.0).add(pair_linear(b, beta), -1.0).add(extra, -1.0);
    return c;
  }

  // theta_ub(theta, beta) + extra - alpha <= 0.
  Constraint rate_upper(std::string name, int alpha, int beta, ExpansionPair at,
                        const LinearForm& extra) const {
    const auto b = theta_bundle(at);
    Constraint c;
    c.kind = BlockKind::kQuadratic;
    c.name = std::move(name);
    c.weight = b.w;
    c.squares = {pair_square(b, beta)};
    c.affine.add(pair_linear(b, beta)).add(extra).add(alpha, -1.0);
    return c;
  }

  // sum_m |h^H p_m|^2 + noise - psi(p_sig, h, rho) <= 0.
  Constraint sinr_lower(std::string name, const CVec& h, int sig,
                        const std::vector<int>& interferers, int rho,
                        const CVec& sig0, double rho0, double noise) const {
    const auto psi = psi_bundle(h, sig0, rho0);
    Constraint c;
    c.kind = BlockKind::kQuadratic;
    c.name = std::move(name);
    c.weight = 1.0;
    for (int m : interferers)
      for (auto& f : gain_squares(h, m)) c.squares.push_back(std::move(f));
    c.affine.add(vec(sig, psi.coeff_p), -1.0).add(rho, -psi.coeff_rho);
    c.affine.constant = noise;
    return c;
  }

  // |h^H p_sig|^2 / rho - omega(interferers) - noise <= 0. Each interferer is
  // (slot, expansion vector); the sum of single-vector tangents is the tangent
  // of the sum.
  Constraint sinr_upper(std::string name, const CVec& h, int sig,
                        const std::vector<std::pair<int, const CVec*>>& interferers,
                        int rho, double noise) const {
    Constraint c;
    c.kind = BlockKind::kQuadOverLinear;
    c.name = std::move(name);
    c.squares = gain_squares(h, sig);
    c.denominator.add(rho, 1.0);
    const CVec zero = CVec::Zero(h.size());
    double c0 = 0.0;
    for (const auto& [slot, p0] : interferers) {
      const auto om = omega_bundle(h, *p0, zero);
      c.affine.add(vec(slot, om.coeff_a), -1.0);
      c0 += om.c0;
    }
    c.affine.constant = -c0 - noise;
    return c;
  }

  // 2^beta - 1 - rho <= 0.
  Constraint exp_lower(std::string name, int beta, int rho) const {
    Constraint c;
    c.kind = BlockKind::kExponential;
    c.name = std::move(name);
    c.exponent.add(beta, 1.0);
    c.affine.add(rho, -1.0).shift(-1.0);
    return c;
  }

  // 1 + rho - gamma(beta) <= 0.
  Constraint exp_upper(std::string name, int beta, int rho, double beta0) const {
    const auto g = gamma_bundle(beta0);
    LinearForm f;
    f.add(rho, 1.0).add(beta, -g.slope);
    f.constant = 1.0 - g.c0;
    return Constraint::affine_le(std::move(name), std::move(f));
  }

  // a - b <= 0
  Constraint le(std::string name, int a, int b) const {
    LinearForm f;
    f.add(a, 1.0).add(b, -1.0);
    return Constraint::affine_le(std::move(name), std::move(f));
  }

 private:
  const VariableLayout& l_;
};

inline void require_positive_rho(double rho, const char* what) {
  if (!(rho > 0)) throw DomainError(std::string("expansion point has nonpositive ") + what);
}

}  // namespace detail

inline CaseProgram assemble(CaseId case_id, const ScaIterate& at, const ChannelSet& cs,
                            const PowerBudget& pb, const Restriction& rs = {}) {
  validate(cs);
  validate(pb);
  const int nt = cs.n_t;
  const auto n = static_cast<Eigen::Index>(nt);
  const auto& d0 = at.design;
  if (d0.p_c.size() != n || d0.p_1.size() != n || d0.p_2.size() != n)
    throw InvalidDimension("expansion point precoders do not match n_t");

  CaseProgram out{case_id, rs, VariableLayout(nt), {}};
  const auto& L = out.layout;
  auto& P = out.program;
  const auto caps = detail::aux_bounds(cs, pb);
  const double acap = 4.0 * caps.rate_cap;

  // Variables, in layout order.
  for (const char* name : {"pc", "p1", "p2"})
    for (const char* part : {"re", "im"})
      for (int i = 0; i < nt; ++i)
        P.add_var(std::string(name) + "." + part + "[" + std::to_string(i) + "]");
  P.add_var("theta", kThetaMin, 1.0);
  P.add_var("t_c", -acap, acap);
  for (const char* nm : {"alpha_p1", "alpha_p2", "alpha_1e", "alpha_2e"}) P.add_var(nm, -acap, acap);
  for (const char* nm : {"alpha_c1", "alpha_c2", "alpha_ce"}) P.add_var(nm, -acap, acap);
  for (const char* nm : {"beta_p1", "beta_p2", "beta_1e", "beta_2e"}) P.add_var(nm, -1.0, caps.rate_cap);
  for (const char* nm : {"beta_c1", "beta_c2", "beta_ce"}) P.add_var(nm, -1.0, caps.rate_cap);
  for (const char* nm : {"rho_p1", "rho_p2", "rho_1e", "rho_2e"}) P.add_var(nm, kRhoFloor, caps.sinr_cap);
  for (const char* nm : {"rho_c1", "rho_c2", "rho_ce"}) P.add_var(nm, kRhoFloor, caps.sinr_cap);

  auto fix_block = [&](int offset, int len) {
    for (int i = 0; i < len; ++i) P.fix(offset + i, 0.0);
  };
  if (rs.theta_one) P.fix(L.theta, 1.0);
  if (rs.no_common) {
    fix_block(L.p_c, 2 * nt);
    P.fix(L.t_c, 0.0);
    for (int i = 0; i < 3; ++i) {
      P.fix(L.alpha_c[i], 0.0);
      P.fix(L.beta_c[i], 0.0);
      P.fix(L.rho_c[i], 1.0);
    }
  }
  if (rs.no_private2) {
    fix_block(L.p_2, 2 * nt);
    for (int i : {kP2, k2E}) {
      P.fix(L.alpha_p[i], 0.0);
      P.fix(L.beta_p[i], 0.0);
      P.fix(L.rho_p[i], 1.0);
    }
  }

  const detail::Stamper st(L);
  const double theta0 = d0.theta;
  const auto& s2 = cs.sigma2;
  const std::array<const CVec*, 2> h{&cs.h1, &cs.h2};
  const std::array<double, 2> noise{s2.u1, s2.u2};
  const std::array<int, 2> priv{L.p_1, L.p_2};
  const std::array<const CVec*, 2> priv0{&d0.p_1, &d0.p_2};
  auto& C = P.constraints;

  // Relay-phase rates are constants, so (1 - theta) * rate is affine.
  const double relay_u2 = std::log2(1.0 + pb.p_r * std::norm(cs.h3) / s2.u3);
  const double relay_e = std::log2(1.0 + pb.p_r * std::norm(cs.g2) / s2.e2);
  auto relay_term = [&](double rate) {
    LinearForm f;
    f.add(L.theta, -rate);
    f.constant = rate;
    return f;
  };

  if (!rs.no_common) {
    C.push_back(st.le("t_c<=alpha_c1", L.t_c, L.alpha_c[kC1]));
    C.push_back(st.le("t_c<=alpha_c2", L.t_c, L.alpha_c[kC2]));
    for (int k = 0; k < 2; ++k) {
      const std::string tag = "c" + std::to_string(k + 1);
      detail::require_positive_rho(at.rho_c[k], "rho_c");
      C.push_back(st.rate_lower("rate_" + tag, L.alpha_c[k], L.beta_c[k], {theta0, at.beta_c[k]},
                                k == 1 ? relay_term(relay_u2) : LinearForm{}));
      C.push_back(st.sinr_lower("sinr_" + tag, *h[k], L.p_c, {L.p_1, L.p_2}, L.rho_c[k], d0.p_c,
                                at.rho_c[k], noise[k]));
      C.push_back(st.exp_lower("exp_" + tag, L.beta_c[k], L.rho_c[k]));
    }
    C.push_back(st.rate_upper("leak_ce", L.alpha_c[kCE], L.beta_c[kCE], {theta0, at.beta_c[kCE]},
                              relay_term(relay_e)));
    C.push_back(st.sinr_upper("sinr_ce", cs.g1, L.p_c, {{L.p_1, &d0.p_1}, {L.p_2, &d0.p_2}},
                              L.rho_c[kCE], s2.e1));
    C.push_back(st.exp_upper("exp_ce", L.beta_c[kCE], L.rho_c[kCE], at.beta_c[kCE]));
    C.push_back(st.le("alpha_ce<=alpha_c1", L.alpha_c[kCE], L.alpha_c[kC1]));
    C.push_back(st.le("alpha_ce<=alpha_c2", L.alpha_c[kCE], L.alpha_c[kC2]));
    P.objective.add(L.t_c, 1.0).add(L.alpha_c[kCE], -1.0);
  }

  for (int k = 0; k < 2; ++k) {
    if (k == 1 && rs.no_private2) continue;
    const int other = 1 - k;
    const int user = k + 1;
    const std::string ps = "p" + std::to_string(user);
    const std::string es = std::to_string(user) + "e";
    const int ap = L.alpha_p[k], bp = L.beta_p[k], rp = L.rho_p[k];
    const int ae = L.alpha_p[2 + k], be = L.beta_p[2 + k], re = L.rho_p[2 + k];
    if (pair_retained(case_id, user)) {
      detail::require_positive_rho(at.rho_p[k], "rho_p");
      C.push_back(st.rate_lower("rate_" + ps, ap, bp, {theta0, at.beta_p[k]}, {}));
      C.push_back(st.sinr_lower("sinr_" + ps, *h[k], priv[k], {priv[other]}, rp, *priv0[k],
                                at.rho_p[k], noise[k]));
      C.push_back(st.exp_lower("exp_" + ps, bp, rp));
      C.push_back(st.rate_upper("leak_" + es, ae, be, {theta0, at.beta_p[2 + k]}, {}));
      C.push_back(st.sinr_upper("sinr_" + es, cs.g1, priv[k],
                                {{L.p_c, &d0.p_c}, {priv[other], priv0[other]}}, re, s2.e1));
      C.push_back(st.exp_upper("exp_" + es, be, re, at.beta_p[2 + k]));
      C.push_back(st.le("sign_" + std::to_string(user), ae, ap));
      P.objective.add(ap, 1.0).add(ae, -1.0);
    } else {
      detail::require_positive_rho(at.rho_p[2 + k], "rho_e");
      C.push_back(st.rate_upper("rate_" + ps, ap, bp, {theta0, at.beta_p[k]}, {}));
      C.push_back(st.sinr_upper("sinr_" + ps, *h[k], priv[k], {{priv[other], priv0[other]}}, rp,
                                noise[k]));
      C.push_back(st.exp_upper("exp_" + ps, bp, rp, at.beta_p[k]));
      C.push_back(st.rate_lower("leak_" + es, ae, be, {theta0, at.beta_p[2 + k]}, {}));
      C.push_back(st.sinr_lower("sinr_" + es, cs.g1, priv[k], {L.p_c, priv[other]}, re,
                                *priv0[k], at.rho_p[2 + k], s2.e1));
      C.push_back(st.exp_lower("exp_" + es, be, re));
      C.push_back(st.le("sign_" + std::to_string(user), ap, ae));
    }
  }

  Constraint power;
  power.kind = BlockKind::kPowerBall;
  power.name = "power";
  for (int i = 0; i < 6 * nt; ++i) power.ball.push_back(L.p_c + i);
  power.affine.constant = -pb.p_t;
  C.push_back(std::move(power));
  return out;
}

// Signed slacks of the original (nonconvex) case constraints evaluated with
// the exact rate engine. Feasible when every entry is >= -tol.
struct CaseResiduals {
  double secrecy = 0;    // R_c - C_ce
  double power = 0;      // P_T - tr(P P^H)
  double theta_pos = 0;  // theta
  double theta_max = 0;  // 1 - theta
  double sign1 = 0;      // R_p1 - C_1e (Case1/2) or C_1e - R_p1 (Case3/4)
  double sign2 = 0;

  std::array<double, 6> values() const {
    return {secrecy, power, theta_pos, theta_max, sign1, sign2};
  }
  double min() const {
    const auto v = values();
    return *std::min_element(v.begin(), v.end());
  }
};

inline CaseResiduals original_case_residuals(CaseId case_id, const PrecoderDesign& d,
                                             const ChannelSet& cs, const PowerBudget& pb) {
  const auto r = achievable_rates(d, cs, pb);
  CaseResiduals res;
  res.secrecy = r.r_c - r.c_ce;
  res.power = pb.p_t - d.power();
  res.theta_pos = d.theta;
  res.theta_max = 1.0 - d.theta;
  res.sign1 = pair_retained(case_id, 1) ? r.r_p1 - r.c_1e : r.c_1e - r.r_p1;
  res.sign2 = pair_retained(case_id, 2) ? r.r_p2 - r.c_2e : r.c_2e - r.r_p2;
  return res;
}

inline CaseResiduals original_case_residuals(CaseId case_id, const ScaIterate& x,
                                             const ChannelSet& cs, const PowerBudget& pb) {
  return original_case_residuals(case_id, x.design, cs, pb);
}

// Auxiliaries for a design obtained by turning every auxiliary inequality
// into an equality with the exact SINRs and rates, then backing off by
// `margin` so the result is strictly inside the subproblem assembled at
// itself whenever the design satisfies the case constraints strictly.
inline ScaIterate iterate_from_design(CaseId case_id, const PrecoderDesign& d,
                                      const ChannelSet& cs, const PowerBudget& pb,
                                      const Restriction& rs = {}, double margin = 1e-7) {
  const auto g = compute_sinrs(d, cs, pb);
  const double th = d.theta;
  ScaIterate it;
  it.design = d;
  auto lower = [&](double sinr, double& rho, double& beta, double& alpha, double extra) {
    rho = std::max(sinr * (1.0 - margin), kRhoFloor * (1.0 + margin));
    beta = std::log2(1.0 + rho) - margin;
    alpha = th * beta + extra - margin;
  };
  auto upper = [&](double sinr, double& rho, double& beta, double& alpha, double extra) {
    rho = std::max(sinr * (1.0 + margin) + margin, kRhoFloor * (1.0 + margin));
    beta = std::log2(1.0 + rho) + margin;
    alpha = th * beta + extra + margin;
  };
  const double relay_u2 = (1.0 - th) * std::log2(1.0 + g.gc2_p2);
  const double relay_e = (1.0 - th) * std::log2(1.0 + g.gce2);

  if (rs.no_common) {
    it.rho_c = {1, 1, 1};
  } else {
    lower(g.gc1, it.rho_c[kC1], it.beta_c[kC1], it.alpha_c[kC1], 0.0);
    lower(g.gc2, it.rho_c[kC2], it.beta_c[kC2], it.alpha_c[kC2], relay_u2);
    upper(g.gce1, it.rho_c[kCE], it.beta_c[kCE], it.alpha_c[kCE], relay_e);
  }
  const std::array<double, 2> gp{g.gp1, g.gp2};
  const std::array<double, 2> ge{g.g1e, g.g2e};
  for (int k = 0; k < 2; ++k) {
    if (k == 1 && rs.no_private2) {
      it.rho_p[kP2] = it.rho_p[k2E] = 1.0;
      continue;
    }
    if (pair_retained(case_id, k + 1)) {
      lower(gp[k], it.rho_p[k], it.beta_p[k], it.alpha_p[k], 0.0);
      upper(ge[k], it.rho_p[2 + k], it.beta_p[2 + k], it.alpha_p[2 + k], 0.0);
    } else {
      upper(gp[k], it.rho_p[k], it.beta_p[k], it.alpha_p[k], 0.0);
      lower(ge[k], it.rho_p[2 + k], it.beta_p[2 + k], it.alpha_p[2 + k], 0.0);
    }
  }
  return it;
}

// Epigraph value consistent with an iterate, just inside min(alpha_c1, alpha_c2).
inline double epigraph_start(const ScaIterate& it, const Restriction& rs, double margin = 1e-7) {
  if (rs.no_common) return 0.0;
  return std::min(it.alpha_c[kC1], it.alpha_c[kC2]) - margin;
}

inline VectorXd pack_start(const CaseProgram& cp, const ScaIterate& it) {
  return cp.layout.pack(it, epigraph_start(it, cp.restriction));
}

}  // namespace crs
