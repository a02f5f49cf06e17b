#include "fqsl/calibration.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

namespace fqsl {

Calibration load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FqslError("cannot open calibration file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FqslError("calibration file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw FqslError("calibration file must hold a JSON object");
    Calibration c;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw FqslError("calibration entry '" + k + "' is not a number");
        c[k] = v.get<double>();
    }
    return c;
}

void save_calibration(const Calibration& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FqslError("cannot write calibration file " + path);
    out << nlohmann::json(c).dump(2) << '\n';
}

double pinned_constant(const Calibration& c, Lemma l) {
    const auto it = c.find(lemma_name(l));
    if (it == c.end()) throw FqslError("no pinned constant for " + lemma_name(l));
    return it->second;
}

LemmaParams calibration_params(Lemma l) {
    LemmaParams p;
    p.ctx = FieldCtx::create(5, 1);
    p.alpha = Rational(7, 11);
    p.beta = Rational(7, 11);
    p.M = l == Lemma::Basic3 ? 3 : -1;
    p.D_eval = 64;
    return p;
}

Calibration calibrate() {
    Calibration c;
    for (auto l : {Lemma::Basic1, Lemma::Basic2, Lemma::Basic2Zero, Lemma::Basic3}) {
        const auto rows = check_basic_lemma(l, calibration_params(l), kCalibrationDegLo, kCalibrationDegHi);
        double mx = 0;
        for (const auto& r : rows) mx = std::max(mx, r.ratio);
        c[lemma_name(l)] = round_up_3sig(mx);
    }
    return c;
}

}  // namespace fqsl
