#pragma once

#include "pdim/comoments.hpp"
#include "pdim/nig.hpp"

#include <limits>
#include <string>

namespace pdim {

enum class NuMeasure { excess_kurtosis, squared_skewness };

const char* to_string(NuMeasure m);
// Accepts "excess_kurtosis" / "squared_skewness"; throws InvalidInput otherwise.
NuMeasure parse_nu_measure(const std::string& s);

struct NuValue {
  double value = 0.0;
  // False when the value is not a usable positive nu (<= 1e-6).
  bool positive = false;
};

inline constexpr double kNuFloor = 1e-6;

// Raw weights are accepted; nu is leverage invariant.
NuValue nu(const Vector& w, const CoMomentSet& c, NuMeasure m);

// Reference random variable Z.  nu(Z) comes analytically from the NIG law.
class ReferenceAsset {
 public:
  ReferenceAsset(const NigParams& p, NuMeasure m, std::string description = "");
  // Direct nu(Z); must be positive.
  ReferenceAsset(double nu_value, std::string description = "");

  double nu_value() const { return nu_value_; }
  const std::string& description() const { return description_; }

 private:
  double nu_value_;
  std::string description_;
};

// nu of an equal-weight average of k iid copies of Z: nu(Z) / k.
double reference_curve(double k, const ReferenceAsset& ref);

struct DiversificationValue {
  double value = 0.0;
  // False when nu(portfolio) <= 1e-6; value is then +infinity.
  bool defined = false;
  double portfolio_nu = 0.0;
};

DiversificationValue diversification(const Vector& w, const CoMomentSet& c,
                                     const ReferenceAsset& ref, NuMeasure m);

// Both supported measures decay as 1/k under iid averaging, so the
// dimensionality equals the diversification measure.
DiversificationValue dimensionality(const Vector& w, const CoMomentSet& c,
                                    const ReferenceAsset& ref, NuMeasure m);

// Three-asset toy example: two assets with correlation rho, one independent.
// Weight of the independent asset under risk parity and under the maximum
// diversification ratio portfolio.  Throws unless -1 < rho < 1.
double toy_rp_weight(double rho);
double toy_dr_weight(double rho);

}  // namespace pdim
