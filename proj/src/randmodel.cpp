#include "fqsl/randmodel.hpp"

#include <algorithm>
#include <cmath>

#include "fqsl/parallel.hpp"

namespace fqsl {

namespace {

inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

bool residue_in_band(const ModelParams& params, const Poly& s) {
    const int ds = deg(s);
    return ds > params.M && ds <= params.D && ds < params.N;
}

}  // namespace

void ModelParams::validate() const {
    if (ctx.q() == 0) throw FqslError("model: field not set");
    if (N < 1) throw FqslError("model: N must be >= 1");
    if (M < 0) throw FqslError("model: M must be >= 0");
    if (D < M) throw FqslError("model: D must be >= M");
    if (D > max_degree(ctx)) throw FqslError("model: D exceeds the polynomial capacity");
    if (N > max_degree(ctx) + 1) throw FqslError("model: N exceeds the polynomial capacity");
    if (gamma <= Rational(0) || gamma >= Rational(1)) throw FqslError("model: gamma must lie in (0,1)");
    if (epsilon && (*epsilon <= Rational(0) || *epsilon >= Rational(1))) {
        throw FqslError("model: epsilon must lie in (0,1)");
    }
    const std::uint64_t qN = checked_pow(ctx.q(), N);
    for (auto s : S) {
        if (s >= qN) throw FqslError("model: residue " + std::to_string(s) + " outside G_N");
    }
}

std::vector<Poly> residue_polys(const ModelParams& params) {
    std::vector<Poly> out;
    out.reserve(params.S.size());
    for (auto s : params.S) out.push_back(decode(params.ctx, s, params.N));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool admissible(const ModelParams& params, const Poly& x) {
    if (x.is_zero()) return false;
    const int d = deg(x);
    if (d <= params.M || d > params.D) return false;
    const Poly r = residue_mod_tN(x, params.N);
    const std::uint64_t code = encode_residue(r, params.N);
    return std::find(params.S.begin(), params.S.end(), code) != params.S.end();
}

double degree_prob(const ModelParams& params, int d) {
    return std::exp(-to_double(params.gamma) * d * std::log(static_cast<double>(params.ctx.q())));
}

double prob_of(const ModelParams& params, const Poly& x) {
    return admissible(params, x) ? degree_prob(params, deg(x)) : 0.0;
}

std::uint64_t admissible_count(const ModelParams& params) {
    const auto residues = residue_polys(params);
    long double total = 0;
    for (const auto& s : residues) total += residue_in_band(params, s) ? 1 : 0;
    const long double q = static_cast<long double>(params.ctx.q());
    for (int d = std::max(params.M + 1, params.N); d <= params.D; ++d) {
        total += residues.size() * (q - 1) * std::pow(q, d - params.N);
    }
    return total > 1e18L ? UINT64_MAX : static_cast<std::uint64_t>(total);
}

double expected_size(const ModelParams& params) {
    const auto residues = residue_polys(params);
    const double q = static_cast<double>(params.ctx.q());
    double sum = 0, comp = 0;
    auto add = [&](double v) {
        // Neumaier summation
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    };
    for (const auto& s : residues) {
        if (residue_in_band(params, s)) add(degree_prob(params, deg(s)));
    }
    for (int d = std::max(params.M + 1, params.N); d <= params.D; ++d) {
        add(residues.size() * (q - 1) * std::pow(q, d - params.N) * degree_prob(params, d));
    }
    return sum + comp;
}

std::vector<Poly> enumerate_admissible(const ModelParams& params) {
    std::vector<Poly> out;
    for_each_admissible(params, [&](const Poly& x) { out.push_back(x); });
    std::sort(out.begin(), out.end());
    return out;
}

double inclusion_variate(std::uint64_t seed, const Poly& x) noexcept {
    std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC909ull);
    for (int i = 0; i < 4; ++i) h = mix64(h ^ mix64(x.w[i] + 0x9E3779B97F4A7C15ull * (i + 1)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

OmegaSample sample_omega(const ModelParams& params) {
    params.validate();
    if (admissible_count(params) > kMaxAdmissible) throw FqslError("admissible window too large");
    OmegaSample out;
    out.params = params;
    const auto residues = residue_polys(params);
    std::vector<double> probs(params.D + 1, 0.0);
    for (int d = 0; d <= params.D; ++d) probs[d] = degree_prob(params, d);
    const auto parts = map_chunks<std::vector<Poly>>(residues.size(), 1, [&](std::size_t lo, std::size_t hi) {
        std::vector<Poly> local;
        for (std::size_t i = lo; i < hi; ++i) {
            const Poly& s = residues[i];
            auto visit = [&](const Poly& x) {
                if (inclusion_variate(params.seed, x) < probs[deg(x)]) local.push_back(x);
            };
            if (residue_in_band(params, s)) visit(s);
            for (int d = std::max(params.M + 1, params.N); d <= params.D; ++d) {
                detail::for_each_with_residue_degree(s, params.N, d, visit);
            }
        }
        return local;
    });
    for (const auto& part : parts) out.members.insert(out.members.end(), part.begin(), part.end());
    std::sort(out.members.begin(), out.members.end());
    return out;
}

}  // namespace fqsl
