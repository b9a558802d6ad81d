#pragma once

#include <limits>
#include <optional>
#include <variant>

#include "weaklab/qgrid/grid.hpp"

namespace weaklab::qgrid {

struct FreeSpace {};

// V = height on [left, right], zero elsewhere.
struct Barrier {
  double height = 0.0;
  double left = 0.0;
  double right = 0.0;
};

// V = m omega^2 (x - center)^2 / 2.
struct Harmonic {
  double omega = 1.0;
  double center = 0.0;
};

// Uniform field E(t) = amplitude cos(omega t + phase) while t_on <= t < t_off.
// It enters the Hamiltonian as -q E(t) x.
struct DriveField {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double t_on = -std::numeric_limits<double>::infinity();
  double t_off = std::numeric_limits<double>::infinity();

  double at(double t) const;
};

class PotentialModel {
 public:
  using Shape = std::variant<FreeSpace, Barrier, Harmonic>;

  PotentialModel() = default;
  explicit PotentialModel(Shape shape, std::optional<DriveField> drive = std::nullopt)
      : shape_(shape), drive_(drive) {}

  static PotentialModel free_space() { return PotentialModel(FreeSpace{}); }
  static PotentialModel barrier(double height, double left, double right) {
    return PotentialModel(Barrier{height, left, right});
  }
  static PotentialModel harmonic(double omega, double center = 0.0) {
    return PotentialModel(Harmonic{omega, center});
  }
  PotentialModel with_drive(const DriveField& d) const { return PotentialModel(shape_, d); }

  const Shape& shape() const noexcept { return shape_; }
  const std::optional<DriveField>& drive() const noexcept { return drive_; }
  bool time_dependent() const noexcept { return drive_.has_value(); }

  // Time-independent part V(x).
  double static_at(double x, const Physics& phys) const;
  RVec static_values(const Grid1D& g, const Physics& phys) const;
  // Drive field E(t); zero without a drive.
  double field(double t) const { return drive_ ? drive_->at(t) : 0.0; }
  // Full V(x,t) = V(x) - q E(t) x.
  RVec values(const Grid1D& g, double t, const Physics& phys) const;

  // Rejects shapes the grid cannot resolve.
  void check_resolution(const Grid1D& g) const;

 private:
  Shape shape_ = FreeSpace{};
  std::optional<DriveField> drive_;
};

}  // namespace weaklab::qgrid
