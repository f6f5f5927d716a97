#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "magatom/vec3.hpp"

namespace magatom {

// Static external magnetic field. Either uniform, or linear in position:
// H(x) = H0 + G x with G symmetric (curl-free) and traceless (divergence-free).
class FieldModel {
 public:
  struct Uniform {
    Vec3 H0;
  };
  struct Linear {
    Vec3 H0;
    Mat3 G;
  };

  // Tolerance on |G_ij - G_ji| and |tr G| at construction.
  static constexpr double kInvariantTolerance = 1e-12;

  FieldModel() : model_(Uniform{}) {}

  static FieldModel uniform(const Vec3& H0) { return FieldModel(Uniform{H0}); }
  // Throws ValidationError when G is not symmetric and traceless.
  static FieldModel linear(const Vec3& H0, const Mat3& G);
  // H0 = (0, 0, h), G = diag(-g, 0, g): gradient along the z axis.
  static FieldModel stern_gerlach(double h, double g);

  bool is_uniform() const { return std::holds_alternative<Uniform>(model_); }
  bool is_linear() const { return !is_uniform(); }

  const Vec3& H0() const;
  // Zero matrix for the uniform model.
  Mat3 gradient() const;

  const std::variant<Uniform, Linear>& model() const { return model_; }

  friend bool operator==(const FieldModel& a, const FieldModel& b);

 private:
  explicit FieldModel(Uniform u) : model_(u) {}
  explicit FieldModel(Linear l) : model_(l) {}

  std::variant<Uniform, Linear> model_;
};

Vec3 evaluate_field(const FieldModel& f, const Vec3& x);

// Poincare gauge anchored at the origin: A(x) = 1/2 H0 x x + 1/3 (G x) x x,
// whose curl is H(x) for both variants.
Vec3 vector_potential(const FieldModel& f, const Vec3& x);

// |G| a / |H0|: how far the field departs from uniform across an atom of
// size a. Reported, not enforced. Infinite when H0 = 0 and G != 0.
double nonuniformity(const FieldModel& f, double atom_size);

// Scalar gauge function with an exact gradient.
class GaugeFunction {
 public:
  struct Linear {
    Vec3 k;  // Lambda(x) = k.x
  };
  struct Quadratic {
    Mat3 Q;  // Lambda(x) = x^T Q x, Q symmetric
  };

  GaugeFunction() : fn_(Linear{}) {}
  static GaugeFunction linear(const Vec3& k) { return GaugeFunction(Linear{k}); }
  // Throws ValidationError for asymmetric Q.
  static GaugeFunction quadratic(const Mat3& Q);

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;

 private:
  explicit GaugeFunction(Linear l) : fn_(l) {}
  explicit GaugeFunction(Quadratic q) : fn_(q) {}

  std::variant<Linear, Quadratic> fn_;
};

// A vector potential paired with the field it generates. Gauge transforms
// change A but never H.
class PotentialField {
 public:
  PotentialField() = default;
  explicit PotentialField(FieldModel f) : field_(std::move(f)) {}

  Vec3 A(const Vec3& x) const;
  Vec3 H(const Vec3& x) const { return evaluate_field(field_, x); }
  // Sum of the gradients of every gauge function applied so far.
  Vec3 gauge_gradient(const Vec3& x) const;

  const FieldModel& field() const { return field_; }
  const std::vector<GaugeFunction>& gauges() const { return gauges_; }

  PotentialField with_gauge(const GaugeFunction& g) const;

 private:
  FieldModel field_;
  std::vector<GaugeFunction> gauges_;
};

// A'(x) = A(x) + grad Lambda(x).
PotentialField gauge_transform(const FieldModel& f, const GaugeFunction& g);
PotentialField gauge_transform(const PotentialField& p, const GaugeFunction& g);

}  // namespace magatom
