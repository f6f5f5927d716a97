#include "magatom/fields.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "magatom/errors.hpp"

namespace magatom {

FieldModel FieldModel::linear(const Vec3& H0, const Mat3& G) {
  const double asym = G.asymmetry();
  if (!(asym <= kInvariantTolerance)) {
    std::ostringstream msg;
    msg << "field gradient must be symmetric (curl H = 0): max |G_ij - G_ji| = " << asym;
    throw ValidationError(msg.str());
  }
  const double tr = G.trace();
  if (!(std::fabs(tr) <= kInvariantTolerance)) {
    std::ostringstream msg;
    msg << "field gradient must be traceless (div H = 0): trace = " << tr;
    throw ValidationError(msg.str());
  }
  if (!is_finite(H0)) throw ValidationError("field H0 must be finite");
  return FieldModel(Linear{H0, G});
}

FieldModel FieldModel::stern_gerlach(double h, double g) {
  return linear({0.0, 0.0, h}, Mat3::diag(-g, 0.0, g));
}

const Vec3& FieldModel::H0() const {
  return std::visit([](const auto& m) -> const Vec3& { return m.H0; }, model_);
}

Mat3 FieldModel::gradient() const {
  if (const auto* lin = std::get_if<Linear>(&model_)) return lin->G;
  return Mat3::zero();
}

bool operator==(const FieldModel& a, const FieldModel& b) {
  if (a.is_uniform() != b.is_uniform()) return false;
  return a.H0() == b.H0() && a.gradient() == b.gradient();
}

Vec3 evaluate_field(const FieldModel& f, const Vec3& x) {
  if (f.is_uniform()) return f.H0();
  return f.H0() + f.gradient() * x;
}

Vec3 vector_potential(const FieldModel& f, const Vec3& x) {
  Vec3 a = 0.5 * cross(f.H0(), x);
  if (f.is_linear()) a += (1.0 / 3.0) * cross(f.gradient() * x, x);
  return a;
}

double nonuniformity(const FieldModel& f, double atom_size) {
  const double g = f.gradient().norm();
  const double h = norm(f.H0());
  if (g == 0.0) return 0.0;
  if (h == 0.0) return std::numeric_limits<double>::infinity();
  return g * atom_size / h;
}

GaugeFunction GaugeFunction::quadratic(const Mat3& Q) {
  if (!(Q.asymmetry() <= FieldModel::kInvariantTolerance))
    throw ValidationError("quadratic gauge matrix must be symmetric");
  return GaugeFunction(Quadratic{Q});
}

double GaugeFunction::value(const Vec3& x) const {
  if (const auto* lin = std::get_if<Linear>(&fn_)) return dot(lin->k, x);
  const auto& q = std::get<Quadratic>(fn_);
  return dot(x, q.Q * x);
}

Vec3 GaugeFunction::gradient(const Vec3& x) const {
  if (const auto* lin = std::get_if<Linear>(&fn_)) return lin->k;
  const auto& q = std::get<Quadratic>(fn_);
  return 2.0 * (q.Q * x);
}

Vec3 PotentialField::A(const Vec3& x) const { return vector_potential(field_, x) + gauge_gradient(x); }

Vec3 PotentialField::gauge_gradient(const Vec3& x) const {
  Vec3 g;
  for (const auto& fn : gauges_) g += fn.gradient(x);
  return g;
}

PotentialField PotentialField::with_gauge(const GaugeFunction& g) const {
  PotentialField out = *this;
  out.gauges_.push_back(g);
  return out;
}

PotentialField gauge_transform(const FieldModel& f, const GaugeFunction& g) {
  return PotentialField(f).with_gauge(g);
}

PotentialField gauge_transform(const PotentialField& p, const GaugeFunction& g) { return p.with_gauge(g); }

}  // namespace magatom
