#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgf/jet.hpp"

namespace cgf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ModelKind { Flat4, HalfPlane, TaubNUT, EguchiHanson, GibbonsHawking, CP2 };

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kThetaEps = 1e-8;

struct ChartPoint {
  std::string chart;
  Vec coords;
  int dimension() const { return static_cast<int>(coords.size()); }
};

// Gamma[a](b, c) = Γ^a_bc
using Christoffel = std::vector<Mat>;

struct KillingField {
  std::string name;
  std::function<Vec(const Vec&)> at;
};

enum class Duality { SD, ASD, Mixed };

struct TwoForm {
  Mat components;
  Duality duality = Duality::Mixed;
};

class Model {
 public:
  virtual ~Model() = default;
  virtual ModelKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual std::vector<std::string> coord_names() const = 0;
  virtual std::map<std::string, double> params() const { return {}; }
  // coordinate index -> period; metadata only
  virtual std::map<int, double> angle_periods() const { return {}; }
  // empty string when x is inside the validity box
  virtual std::string violated(const Vec& x) const = 0;
  // rows are coframe one-forms e^a, columns chart components
  virtual void coframe_jet(const Vec& x, std::array<Jet, 16>& E) const = 0;
  virtual Mat coframe_at(const Vec& x) const = 0;
  virtual bool hyperkahler() const { return false; }
  // Schouten tensor is schouten_coefficient() * g
  virtual double schouten_coefficient() const { return 0.0; }
  virtual std::vector<KillingField> killing_fields() const { return {}; }

  void check(const Vec& x) const {
    if (x.size() != dim()) throw DomainError(name() + ": expected " + std::to_string(dim()) + " coordinates");
    const std::string v = violated(x);
    if (!v.empty()) throw DomainError(name() + ": " + v);
  }
  bool valid(const Vec& x) const { return x.size() == dim() && violated(x).empty() && x.allFinite(); }
};

using ModelPtr = std::shared_ptr<const Model>;

// Models provide `template <class T> void coframe(const T* x, T* E) const`.
template <class Derived>
class ModelBase : public Model {
 public:
  void coframe_jet(const Vec& x, std::array<Jet, 16>& E) const override {
    const int n = dim();
    std::array<Jet, 4> xj;
    for (int i = 0; i < n; ++i) xj[i] = Jet(x[i], i);
    static_cast<const Derived*>(this)->template coframe<Jet>(xj.data(), E.data());
  }
  Mat coframe_at(const Vec& x) const override {
    check(x);
    const int n = dim();
    std::array<double, 16> E{};
    static_cast<const Derived*>(this)->template coframe<double>(x.data(), E.data());
    Mat M(n, n);
    for (int a = 0; a < n; ++a)
      for (int m = 0; m < n; ++m) M(a, m) = E[a * n + m];
    return M;
  }
};

namespace detail {

inline std::string angle_box(const Vec& x, int ith) {
  if (!(x[ith] > kThetaEps && x[ith] < kPi - kThetaEps)) return "theta outside (1e-8, pi-1e-8)";
  return {};
}

template <class T>
void sigma_forms(const T& th, const T& ps, T s1[4], T s2[4], T s3[4]) {
  using std::cos;
  using std::sin;
  // chart order (r, theta, phi, psi)
  s1[0] = T(0.0); s1[1] = cos(ps); s1[2] = sin(ps) * sin(th); s1[3] = T(0.0);
  s2[0] = T(0.0); s2[1] = -sin(ps); s2[2] = cos(ps) * sin(th); s2[3] = T(0.0);
  s3[0] = T(0.0); s3[1] = T(0.0); s3[2] = cos(th); s3[3] = T(1.0);
}

}  // namespace detail

class Flat4 final : public ModelBase<Flat4> {
 public:
  ModelKind kind() const override { return ModelKind::Flat4; }
  std::string name() const override { return "flat4"; }
  int dim() const override { return 4; }
  std::vector<std::string> coord_names() const override { return {"x", "y", "z", "w"}; }
  std::string violated(const Vec&) const override { return {}; }
  bool hyperkahler() const override { return true; }
  template <class T>
  void coframe(const T*, T* E) const {
    for (int a = 0; a < 4; ++a)
      for (int m = 0; m < 4; ++m) E[a * 4 + m] = T(a == m ? 1.0 : 0.0);
  }
  std::vector<KillingField> killing_fields() const override {
    std::vector<KillingField> out;
    for (int i = 0; i < 4; ++i)
      out.push_back({"d" + coord_names()[i], [i](const Vec&) { Vec k = Vec::Zero(4); k[i] = 1.0; return k; }});
    return out;
  }
};

// g = (dx^2 + dy^2) / y^2
class HalfPlane final : public ModelBase<HalfPlane> {
 public:
  ModelKind kind() const override { return ModelKind::HalfPlane; }
  std::string name() const override { return "half_plane"; }
  int dim() const override { return 2; }
  std::vector<std::string> coord_names() const override { return {"x", "y"}; }
  std::string violated(const Vec& x) const override { return x[1] > 0.0 ? std::string{} : "y must be positive"; }
  template <class T>
  void coframe(const T* x, T* E) const {
    E[0] = 1.0 / x[1]; E[1] = T(0.0);
    E[2] = T(0.0); E[3] = 1.0 / x[1];
  }
};

// V = 1 + m/r, omega = m cos(theta) dphi, chart (r, theta, phi, psi).
class TaubNUT final : public ModelBase<TaubNUT> {
 public:
  explicit TaubNUT(double m = 1.0) : m_(m) {
    if (!(m >= 0.0)) throw DomainError("taub_nut: m must be non-negative");
  }
  double m() const { return m_; }
  ModelKind kind() const override { return ModelKind::TaubNUT; }
  std::string name() const override { return "taub_nut"; }
  int dim() const override { return 4; }
  std::vector<std::string> coord_names() const override { return {"r", "theta", "phi", "psi"}; }
  std::map<std::string, double> params() const override { return {{"m", m_}}; }
  std::map<int, double> angle_periods() const override { return {{2, 2 * kPi}, {3, 4 * kPi}}; }
  std::string violated(const Vec& x) const override {
    if (!(x[0] > 1e-6)) return "r must exceed 1e-6";
    return detail::angle_box(x, 1);
  }
  bool hyperkahler() const override { return true; }
  template <class T>
  void coframe(const T* x, T* E) const {
    using std::cos;
    using std::sin;
    using std::sqrt;
    const T& r = x[0];
    const T st = sin(x[1]), ct = cos(x[1]), sp = sin(x[2]), cp = cos(x[2]);
    const T sv = sqrt(1.0 + m_ / r);
    // e^i = sqrt(V) dx^i in polar components, e^4 = (dpsi + m cos(theta) dphi)/sqrt(V)
    E[0] = sv * st * cp; E[1] = sv * r * ct * cp; E[2] = -sv * r * st * sp; E[3] = T(0.0);
    E[4] = sv * st * sp; E[5] = sv * r * ct * sp; E[6] = sv * r * st * cp; E[7] = T(0.0);
    E[8] = sv * ct; E[9] = -sv * r * st; E[10] = T(0.0); E[11] = T(0.0);
    E[12] = T(0.0); E[13] = T(0.0); E[14] = m_ * ct / sv; E[15] = 1.0 / sv;
  }
  std::vector<KillingField> killing_fields() const override {
    const double m = m_;
    return {
        {"dpsi", [](const Vec&) { Vec k = Vec::Zero(4); k[3] = 1.0; return k; }},
        {"dphi", [](const Vec&) { Vec k = Vec::Zero(4); k[2] = 1.0; return k; }},
        {"X1", [m](const Vec& x) {
           Vec k(4);
           k << 0.0, -std::sin(x[2]), -std::cos(x[2]) / std::tan(x[1]), m * std::cos(x[2]) / std::sin(x[1]);
           return k;
         }},
        {"X2", [m](const Vec& x) {
           Vec k(4);
           k << 0.0, std::cos(x[2]), -std::sin(x[2]) / std::tan(x[1]), m * std::sin(x[2]) / std::sin(x[1]);
           return k;
         }},
    };
  }

 private:
  double m_;
};

inline std::vector<KillingField> su2_right_fields() {
  return {
      {"R1", [](const Vec& x) {
         Vec k(4);
         k << 0.0, -std::sin(x[2]), -std::cos(x[2]) / std::tan(x[1]), std::cos(x[2]) / std::sin(x[1]);
         return k;
       }},
      {"R2", [](const Vec& x) {
         Vec k(4);
         k << 0.0, std::cos(x[2]), -std::sin(x[2]) / std::tan(x[1]), std::sin(x[2]) / std::sin(x[1]);
         return k;
       }},
      {"R3", [](const Vec&) { Vec k = Vec::Zero(4); k[2] = 1.0; return k; }},
  };
}

// g = dr^2/f^2 + r^2/4 (s1^2 + s2^2) + r^2 f^2/4 s3^2, f = sqrt(1 - alpha^4/r^4).
class EguchiHanson final : public ModelBase<EguchiHanson> {
 public:
  explicit EguchiHanson(double alpha = 1.0) : alpha_(alpha) {
    if (!(alpha > 0.0)) throw DomainError("eguchi_hanson: alpha must be positive");
  }
  double alpha() const { return alpha_; }
  ModelKind kind() const override { return ModelKind::EguchiHanson; }
  std::string name() const override { return "eguchi_hanson"; }
  int dim() const override { return 4; }
  std::vector<std::string> coord_names() const override { return {"r", "theta", "phi", "psi"}; }
  std::map<std::string, double> params() const override { return {{"alpha", alpha_}}; }
  std::map<int, double> angle_periods() const override { return {{2, 2 * kPi}, {3, 2 * kPi}}; }
  std::string violated(const Vec& x) const override {
    if (!(x[0] > alpha_)) return "r must exceed alpha";
    return detail::angle_box(x, 1);
  }
  bool hyperkahler() const override { return true; }
  template <class T>
  void coframe(const T* x, T* E) const {
    using std::sqrt;
    const T& r = x[0];
    const T k = alpha_ / r;
    const T f = sqrt(1.0 - k * k * k * k);
    T s1[4], s2[4], s3[4];
    detail::sigma_forms(x[1], x[3], s1, s2, s3);
    for (int m = 0; m < 4; ++m) {
      E[m] = 0.5 * r * s1[m];
      E[4 + m] = 0.5 * r * s2[m];
      E[8 + m] = 0.5 * r * f * s3[m];
      E[12 + m] = T(0.0);
    }
    E[12] = 1.0 / f;
  }
  std::vector<KillingField> killing_fields() const override {
    auto out = su2_right_fields();
    out.push_back({"dpsi", [](const Vec&) { Vec k = Vec::Zero(4); k[3] = 1.0; return k; }});
    return out;
  }

 private:
  double alpha_;
};

struct GHCenter {
  Vec3 position;
  double weight = 1.0;
};

// g = V dx.dx + V^{-1} (dtau + omega)^2 with V = eps + sum m_i/|x - p_i|,
// omega = sum m_i (z - z_i)/r_i ((x - x_i) dy - (y - y_i) dx)/rho_i^2; chart (x, y, z, tau).
class GibbonsHawking final : public ModelBase<GibbonsHawking> {
 public:
  GibbonsHawking(double eps, std::vector<GHCenter> centers) : eps_(eps), centers_(std::move(centers)) {
    if (centers_.empty() && !(eps_ > 0.0)) throw DomainError("gibbons_hawking: need eps > 0 or centers");
    for (const auto& c : centers_)
      if (c.position.x() != 0.0 || c.position.y() != 0.0)
        throw DomainError("gibbons_hawking: centers must lie on the z axis");
  }
  static GibbonsHawking taub_nut(double m) { return GibbonsHawking(1.0, {{Vec3(0, 0, 0), m}}); }
  static GibbonsHawking eguchi_hanson(double alpha) {
    return GibbonsHawking(0.0, {{Vec3(0, 0, -alpha), 1.0}, {Vec3(0, 0, alpha), 1.0}});
  }
  double eps() const { return eps_; }
  const std::vector<GHCenter>& centers() const { return centers_; }
  ModelKind kind() const override { return ModelKind::GibbonsHawking; }
  std::string name() const override { return "gibbons_hawking"; }
  int dim() const override { return 4; }
  std::vector<std::string> coord_names() const override { return {"x", "y", "z", "tau"}; }
  std::map<std::string, double> params() const override {
    std::map<std::string, double> p{{"eps", eps_}};
    for (size_t i = 0; i < centers_.size(); ++i) {
      p["z" + std::to_string(i)] = centers_[i].position.z();
      p["m" + std::to_string(i)] = centers_[i].weight;
    }
    return p;
  }
  std::string violated(const Vec& x) const override {
    const double rho = std::hypot(x[0], x[1]);
    if (!(rho > 1e-8)) return "point on the z axis (string singularity of omega)";
    for (const auto& c : centers_)
      if (!((x.head<3>() - c.position).norm() > 1e-6)) return "point at a centre of V";
    if (!(V(x.head<3>()) > 0.0)) return "V must be positive";
    return {};
  }
  bool hyperkahler() const override { return true; }

  template <class T>
  T V_t(const T* x) const {
    using std::sqrt;
    T v = T(eps_);
    for (const auto& c : centers_) {
      const T dz = x[2] - c.position.z();
      v += c.weight / sqrt(x[0] * x[0] + x[1] * x[1] + dz * dz);
    }
    return v;
  }
  template <class T>
  void omega_t(const T* x, T& wx, T& wy) const {
    using std::sqrt;
    wx = T(0.0);
    wy = T(0.0);
    const T rho2 = x[0] * x[0] + x[1] * x[1];
    for (const auto& c : centers_) {
      const T dz = x[2] - c.position.z();
      const T ri = sqrt(rho2 + dz * dz);
      const T s = c.weight * dz / (ri * rho2);
      wx -= s * x[1];
      wy += s * x[0];
    }
  }
  double V(const Vec3& p) const { return V_t<double>(p.data()); }
  Vec3 omega(const Vec3& p) const {
    double wx, wy;
    omega_t<double>(p.data(), wx, wy);
    return {wx, wy, 0.0};
  }

  template <class T>
  void coframe(const T* x, T* E) const {
    using std::sqrt;
    const T v = V_t(x);
    const T sv = sqrt(v);
    T wx, wy;
    omega_t(x, wx, wy);
    for (int i = 0; i < 16; ++i) E[i] = T(0.0);
    E[0] = sv; E[5] = sv; E[10] = sv;
    E[12] = wx / sv; E[13] = wy / sv; E[15] = 1.0 / sv;
  }
  std::vector<KillingField> killing_fields() const override {
    return {{"dtau", [](const Vec&) { Vec k = Vec::Zero(4); k[3] = 1.0; return k; }},
            {"rot_z", [](const Vec& x) { Vec k = Vec::Zero(4); k[0] = -x[1]; k[1] = x[0]; return k; }}};
  }

 private:
  double eps_;
  std::vector<GHCenter> centers_;
};

// Fubini-Study: dr^2/(1+r^2)^2 + r^2 s3^2/(4(1+r^2)^2) + r^2 (s1^2+s2^2)/(4(1+r^2)).
// Tetrad e1 = A s2, e2 = A s1, e3 = B s3, e4 = dr/(1+r^2).
class CP2 final : public ModelBase<CP2> {
 public:
  ModelKind kind() const override { return ModelKind::CP2; }
  std::string name() const override { return "cp2"; }
  int dim() const override { return 4; }
  std::vector<std::string> coord_names() const override { return {"r", "theta", "phi", "psi"}; }
  std::map<int, double> angle_periods() const override { return {{2, 2 * kPi}, {3, 2 * kPi}}; }
  std::string violated(const Vec& x) const override {
    if (!(x[0] > 1e-6)) return "r must exceed 1e-6";
    return detail::angle_box(x, 1);
  }
  double schouten_coefficient() const override { return 1.0; }
  template <class T>
  void coframe(const T* x, T* E) const {
    using std::sqrt;
    const T& r = x[0];
    const T q = 1.0 + r * r;
    const T A = r / (2.0 * sqrt(q));
    const T B = r / (2.0 * q);
    T s1[4], s2[4], s3[4];
    detail::sigma_forms(x[1], x[3], s1, s2, s3);
    for (int m = 0; m < 4; ++m) {
      E[m] = A * s2[m];
      E[4 + m] = A * s1[m];
      E[8 + m] = B * s3[m];
      E[12 + m] = T(0.0);
    }
    E[12] = 1.0 / q;
  }
  std::vector<KillingField> killing_fields() const override {
    auto out = su2_right_fields();
    out.push_back({"dpsi", [](const Vec&) { Vec k = Vec::Zero(4); k[3] = 1.0; return k; }});
    return out;
  }
};

// ---------------------------------------------------------------------------
// evaluators

inline Mat metric_at(const Model& M, const Vec& x) {
  const Mat E = M.coframe_at(x);
  return E.transpose() * E;
}

inline Mat inverse_metric_at(const Model& M, const Vec& x) {
  const Mat Ei = M.coframe_at(x).inverse();
  return Ei * Ei.transpose();
}

// frame vectors as columns: E_a^mu
inline Mat frame_at(const Model& M, const Vec& x) { return M.coframe_at(x).inverse(); }

// metric and its first partials dg[k](i,j) = d_k g_ij
inline std::pair<Mat, std::vector<Mat>> metric_jet(const Model& M, const Vec& x) {
  M.check(x);
  const int n = M.dim();
  std::array<Jet, 16> E;
  M.coframe_jet(x, E);
  Mat g = Mat::Zero(n, n);
  std::vector<Mat> dg(n, Mat::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet s(0.0);
      for (int a = 0; a < n; ++a) s += E[a * n + i] * E[a * n + j];
      g(i, j) = g(j, i) = s.v;
      for (int k = 0; k < n; ++k) dg[k](i, j) = dg[k](j, i) = s.d[k];
    }
  return {g, dg};
}

inline Christoffel christoffel_from(const Mat& g, const std::vector<Mat>& dg) {
  const int n = static_cast<int>(g.rows());
  const Mat gi = g.inverse();
  Christoffel G(n, Mat::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += gi(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
        G[a](b, c) = G[a](c, b) = 0.5 * s;
      }
  return G;
}

inline Christoffel christoffel_at(const Model& M, const Vec& x) {
  auto [g, dg] = metric_jet(M, x);
  return christoffel_from(g, dg);
}

// Γ^a_bc v^b w^c
inline Vec contract(const Christoffel& G, const Vec& v, const Vec& w) {
  const int n = static_cast<int>(v.size());
  Vec out(n);
  for (int a = 0; a < n; ++a) out[a] = v.dot(G[a] * w);
  return out;
}

inline Mat schouten_at(const Model& M, const Vec& x) {
  if (M.kind() == ModelKind::HalfPlane)
    throw UnsupportedError("schouten_at: the two-dimensional half-plane has no Schouten tensor");
  if (M.schouten_coefficient() == 0.0) {
    M.check(x);
    return Mat::Zero(M.dim(), M.dim());
  }
  return M.schouten_coefficient() * metric_at(M, x);
}

// frame (orthonormal) components <-> chart components
inline Mat form_to_chart(const Mat& E, const Mat& Ff) { return E.transpose() * Ff * E; }
inline Mat form_to_frame(const Mat& E, const Mat& Fc) {
  const Mat Ei = E.inverse();
  return Ei.transpose() * Fc * Ei;
}

inline Mat ewedge(int a, int b) {
  Mat F = Mat::Zero(4, 4);
  F(a, b) = 1.0;
  F(b, a) = -1.0;
  return F;
}

// Hodge star on frame components with e1^e2^e3^e4 positive
inline Mat hodge_frame(const Mat& F) {
  Mat S(4, 4);
  S(0, 1) = F(2, 3); S(0, 2) = -F(1, 3); S(0, 3) = F(1, 2);
  S(1, 2) = F(0, 3); S(1, 3) = -F(0, 2); S(2, 3) = F(0, 1);
  for (int i = 0; i < 4; ++i) {
    S(i, i) = 0.0;
    for (int j = 0; j < i; ++j) S(i, j) = -S(j, i);
  }
  return S;
}

inline Mat hodge_star(const Model& M, const Vec& x, const Mat& Fc) {
  const Mat E = M.coframe_at(x);
  return form_to_chart(E, hodge_frame(form_to_frame(E, Fc)));
}

inline Duality classify_duality(const Model& M, const Vec& x, const Mat& Fc, double tol = 1e-10) {
  const Mat E = M.coframe_at(x);
  const Mat Ff = form_to_frame(E, Fc);
  const Mat S = hodge_frame(Ff);
  const double scale = std::max(1.0, Ff.norm());
  if ((S - Ff).norm() < tol * scale) return Duality::SD;
  if ((S + Ff).norm() < tol * scale) return Duality::ASD;
  return Duality::Mixed;
}

// Omega^1 = e14 + e23, Omega^2 = e24 + e31, Omega^3 = e34 + e12 in frame components
inline std::array<Mat, 3> sd_frame_basis() {
  return {ewedge(0, 3) + ewedge(1, 2), ewedge(1, 3) + ewedge(2, 0), ewedge(2, 3) + ewedge(0, 1)};
}

inline std::array<TwoForm, 3> sd_two_forms_at(const Model& M, const Vec& x) {
  if (!M.hyperkahler()) throw UnsupportedError("sd_two_forms_at: " + M.name() + " is not hyper-Kahler");
  const Mat E = M.coframe_at(x);
  const auto B = sd_frame_basis();
  std::array<TwoForm, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = {form_to_chart(E, B[i]), Duality::SD};
  return out;
}

// sum_i c^i Omega^i in chart components
inline Mat sd_combination(const Model& M, const Vec& x, const Vec3& c) {
  const auto O = sd_two_forms_at(M, x);
  return c[0] * O[0].components + c[1] * O[1].components + c[2] * O[2].components;
}

// ---------------------------------------------------------------------------
// construction helpers

inline ModelPtr make_flat4() { return std::make_shared<Flat4>(); }
inline ModelPtr make_half_plane() { return std::make_shared<HalfPlane>(); }
inline ModelPtr make_taub_nut(double m) { return std::make_shared<TaubNUT>(m); }
inline ModelPtr make_eguchi_hanson(double alpha) { return std::make_shared<EguchiHanson>(alpha); }
inline ModelPtr make_cp2() { return std::make_shared<CP2>(); }
inline ModelPtr make_gibbons_hawking(double eps, std::vector<GHCenter> c) {
  return std::make_shared<GibbonsHawking>(eps, std::move(c));
}

}  // namespace cgf
