#pragma once

#include <map>
#include <string>

#include "fqsl/estimates.hpp"

namespace fqsl {

/// Pinned lemma ratio constants, keyed by lemma name.
using Calibration = std::map<std::string, double>;

/// Reads a flat JSON object {lemma: constant}. Throws FqslError on I/O or
/// format problems.
Calibration load_calibration(const std::string& path);
void save_calibration(const Calibration& c, const std::string& path);

/// Throws if the lemma has no entry.
double pinned_constant(const Calibration& c, Lemma l);

/// The sweep parameters the committed constants were fitted with:
/// q = 5, exponents 7/11, degrees 1..8, D_eval = 64, M = -1 for basic1 and
/// M = 3 for basic3.
LemmaParams calibration_params(Lemma l);
inline constexpr int kCalibrationDegLo = 1;
inline constexpr int kCalibrationDegHi = 8;

/// Runs every sweep and rounds each maximum ratio up to 3 significant digits.
Calibration calibrate();

}  // namespace fqsl
