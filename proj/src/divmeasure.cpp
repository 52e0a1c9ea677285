#include "pdim/divmeasure.hpp"

#include "pdim/error.hpp"

#include <cmath>

namespace pdim {

const char* to_string(NuMeasure m) {
  return m == NuMeasure::excess_kurtosis ? "excess_kurtosis" : "squared_skewness";
}

NuMeasure parse_nu_measure(const std::string& s) {
  if (s == "excess_kurtosis") return NuMeasure::excess_kurtosis;
  if (s == "squared_skewness") return NuMeasure::squared_skewness;
  throw InvalidInput("unknown nu measure '" + s + "'");
}

NuValue nu(const Vector& w, const CoMomentSet& c, NuMeasure m) {
  NuValue out;
  if (m == NuMeasure::excess_kurtosis) {
    out.value = portfolio_kurtosis(w, c) - 3.0;
  } else {
    const double s = portfolio_skewness(w, c);
    out.value = s * s;
  }
  out.positive = out.value > kNuFloor;
  return out;
}

ReferenceAsset::ReferenceAsset(const NigParams& p, NuMeasure m, std::string description)
    : nu_value_(0.0), description_(std::move(description)) {
  const MarginTarget mom = nig_moments(p);
  nu_value_ = m == NuMeasure::excess_kurtosis ? mom.kurtosis - 3.0 : mom.skewness * mom.skewness;
  if (!(nu_value_ > 0.0))
    throw InvalidInput(std::string("reference asset has nonpositive ") + to_string(m));
}

ReferenceAsset::ReferenceAsset(double nu_value, std::string description)
    : nu_value_(nu_value), description_(std::move(description)) {
  if (!(nu_value_ > 0.0) || !std::isfinite(nu_value_))
    throw InvalidInput("reference nu must be positive and finite");
}

double reference_curve(double k, const ReferenceAsset& ref) {
  if (!(k >= 1.0)) throw InvalidInput("reference curve needs k >= 1");
  return ref.nu_value() / k;
}

DiversificationValue diversification(const Vector& w, const CoMomentSet& c,
                                     const ReferenceAsset& ref, NuMeasure m) {
  const NuValue v = nu(w, c, m);
  DiversificationValue out;
  out.portfolio_nu = v.value;
  out.defined = v.positive;
  out.value = v.positive ? ref.nu_value() / v.value : std::numeric_limits<double>::infinity();
  return out;
}

DiversificationValue dimensionality(const Vector& w, const CoMomentSet& c,
                                    const ReferenceAsset& ref, NuMeasure m) {
  return diversification(w, c, ref, m);
}

namespace {
void check_rho(double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw InvalidInput("toy example needs -1 < rho < 1");
}
}  // namespace

double toy_rp_weight(double rho) {
  check_rho(rho);
  return (2.0 * std::sqrt(1.0 + rho) - (1.0 + rho)) / (3.0 - rho);
}

double toy_dr_weight(double rho) {
  check_rho(rho);
  return (1.0 + rho) / (3.0 + rho);
}

}  // namespace pdim
