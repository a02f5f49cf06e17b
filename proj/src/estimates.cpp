#include "fqsl/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "fqsl/numeric.hpp"
#include "fqsl/parallel.hpp"

namespace fqsl {

namespace {

double qpow(std::uint64_t q, double e) { return std::pow(static_cast<double>(q), e); }

// Weight table w[d] = q^{-c d} for d = 0..D.
std::vector<double> weights(std::uint64_t q, const Rational& c, int D) {
    std::vector<double> w(std::max(D, 0) + 1);
    for (int d = 0; d <= D; ++d) w[d] = qpow(q, -to_double(c) * d);
    return w;
}

// Calls fn(x) for every polynomial of exact degree d, d >= 0.
template <class F>
void for_each_of_degree(const FieldCtx& ctx, int d, F&& fn) {
    detail::for_each_with_residue_degree(p_zero(ctx), 0, d, fn);
}

std::uint64_t terms_up_to(std::uint64_t q, int lo, int hi) {
    long double total = 0;
    for (int d = std::max(lo, 0); d <= hi; ++d) total += (q - 1) * std::pow(static_cast<long double>(q), d);
    return total > 1e18L ? UINT64_MAX : static_cast<std::uint64_t>(total);
}

void check_sigma(const SigmaQuery& qy) {
    if (qy.ctx.q() == 0) throw FqslError("sigma: field not set");
    if (qy.M < -1) throw FqslError("sigma: M must be >= -1");
    if (qy.D < qy.M + 1) throw FqslError("sigma: need D >= M + 1");
}

}  // namespace

double sigma_direct(const SigmaQuery& qy) {
    check_sigma(qy);
    const std::uint64_t q = qy.ctx.q();
    if (qy.D > max_degree(qy.ctx)) throw FqslError("sigma: D exceeds the polynomial capacity");
    if (terms_up_to(q, qy.M + 1, qy.D) > kMaxSigmaTerms) throw FqslError("sigma: window too large");
    const int dn = qy.n.is_zero() ? 0 : deg(qy.n);
    const int top = std::max(qy.D, dn);
    const auto wa = weights(q, qy.alpha, top), wb = weights(q, qy.beta, top);
    CompensatedSum sum;
    for (int d = std::max(qy.M + 1, 0); d <= qy.D; ++d) {
        for_each_of_degree(qy.ctx, d, [&](const Poly& x) {
            const Poly y = sub_fast(qy.n, x);
            if (!y.is_zero()) sum += wa[d] * wb[deg(y)];
        });
    }
    return sum.value();
}

double sigma_closed(const SigmaQuery& qy) {
    check_sigma(qy);
    const double q = static_cast<double>(qy.ctx.q());
    const double a = to_double(qy.alpha), b = to_double(qy.beta);
    auto cnt = [&](int d) { return (q - 1) * std::pow(q, d); };
    CompensatedSum sum;
    for (int d = std::max(qy.M + 1, 0); d <= qy.D; ++d) {
        const double wa = std::pow(q, -a * d);
        if (qy.n.is_zero()) {
            sum += cnt(d) * wa * std::pow(q, -b * d);
            continue;
        }
        const int N0 = deg(qy.n);
        if (d != N0) {
            sum += cnt(d) * wa * std::pow(q, -b * std::max(d, N0));
            continue;
        }
        // leading coefficient differs from n's: deg(n - x) = N0
        sum += (q - 2) * std::pow(q, N0) * wa * std::pow(q, -b * N0);
        // same leading coefficient: n - x runs over G_{N0} once; z = 0 adds nothing
        for (int e = 0; e < N0; ++e) sum += wa * cnt(e) * std::pow(q, -b * e);
    }
    return sum.value();
}

double geometric_tail(std::uint64_t q, const Rational& gamma, int R) {
    if (gamma <= Rational(1)) throw FqslError("geometric tail needs gamma > 1");
    const double g = to_double(gamma);
    const double qd = static_cast<double>(q);
    return (qd - 1) * std::pow(qd, (1 - g) * (R + 1)) / (1 - std::pow(qd, 1 - g));
}

// ---- lemma sweeps ----

Lemma parse_lemma(std::string_view name) {
    if (name == "basic1") return Lemma::Basic1;
    if (name == "basic2") return Lemma::Basic2;
    if (name == "basic2-a0") return Lemma::Basic2Zero;
    if (name == "basic3") return Lemma::Basic3;
    throw FqslError("unknown lemma '" + std::string(name) + "'");
}

std::string lemma_name(Lemma l) {
    switch (l) {
        case Lemma::Basic1: return "basic1";
        case Lemma::Basic2: return "basic2";
        case Lemma::Basic2Zero: return "basic2-a0";
        case Lemma::Basic3: return "basic3";
    }
    return "?";
}

std::string status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

bool in_open_unit(const Rational& r) { return r > Rational(0) && r < Rational(1); }

void require_pair(const Rational& a, const Rational& b, const char* what) {
    if (!in_open_unit(a) || !in_open_unit(b) || a + b <= Rational(1)) {
        throw FqslError(std::string(what) + ": need both exponents in (0,1) with sum > 1");
    }
}

// Closed form of the basic 3 sum over M < deg x <= D.
double basic3_closed(std::uint64_t qq, const Rational& phi, const Rational& kappa, int dr, int M, int D) {
    const double q = static_cast<double>(qq), f = to_double(phi), k = to_double(kappa);
    auto cnt = [&](int d) { return (q - 1) * std::pow(q, d); };
    auto wk = [&](int e) { return std::pow(q, -k * std::max(e, M)); };
    CompensatedSum sum;
    for (int d = std::max(M + 1, 0); d <= D; ++d) {
        const double wf = std::pow(q, -f * d);
        if (d != dr) {
            sum += cnt(d) * wf * wk(std::max(d, dr));
            continue;
        }
        sum += (q - 2) * std::pow(q, d) * wf * wk(d);
        sum += wf * std::pow(q, -k * M);  // r + x = 0
        for (int e = 0; e < d; ++e) sum += wf * cnt(e) * wk(e);
    }
    return sum.value();
}

// Basic 2 sum: explicit terms for deg x <= m, closed form above.
double basic2_value(const FieldCtx& ctx, const Rational& gamma, const Poly& a, const Poly& b, int m, int D) {
    const std::uint64_t q = ctx.q();
    const double g = to_double(gamma);
    CompensatedSum sum;
    sum += basic2_direct(ctx, gamma, a, b, m);
    for (int d = m + 1; d <= D; ++d) sum += (q - 1) * qpow(q, d) * qpow(q, (1 - 4 * g) * d);
    return sum.value();
}

Poly sweep_poly(const FieldCtx& ctx, std::uint32_t lead_idx, int d) {
    // lead * t^d + 1 (just the constant when d = 0)
    if (d == 0) return p_monomial(ctx, ctx.from_index(lead_idx), 0);
    return p_add(p_monomial(ctx, ctx.from_index(lead_idx), d), p_monomial(ctx, ctx.one(), 0));
}

}  // namespace

double basic3_direct(const FieldCtx& ctx, const Rational& phi, const Rational& kappa, const Poly& r, int M, int D) {
    const std::uint64_t q = ctx.q();
    if (terms_up_to(q, M + 1, D) > kMaxSigmaTerms) throw FqslError("basic3: window too large");
    const int top = std::max(D, r.is_zero() ? 0 : deg(r));
    const auto wf = weights(q, phi, top);
    const auto wk = weights(q, kappa, std::max(top, M));
    CompensatedSum sum;
    for (int d = std::max(M + 1, 0); d <= D; ++d) {
        for_each_of_degree(ctx, d, [&](const Poly& x) {
            const Poly s = add_fast(r, x);
            const int e = s.is_zero() ? M : std::max(deg(s), M);
            sum += wf[d] * (e < 0 ? 1.0 : wk[e]);
        });
    }
    return sum.value();
}

double basic2_direct(const FieldCtx& ctx, const Rational& gamma, const Poly& a, const Poly& b, int D) {
    const std::uint64_t q = ctx.q();
    if (terms_up_to(q, 0, D) > kMaxSigmaTerms) throw FqslError("basic2: window too large");
    const int top = std::max({D, a.is_zero() ? 0 : deg(a), b.is_zero() ? 0 : deg(b)});
    const auto wg = weights(q, gamma, top);
    const auto wb = weights(q, Rational(2) * gamma - Rational(1), top);
    CompensatedSum sum;
    for (int d = 0; d <= D; ++d) {
        for_each_of_degree(ctx, d, [&](const Poly& x) {
            const Poly xa = add_fast(x, a), xb = add_fast(x, b);
            if (xa.is_zero() || xb.is_zero()) return;  // q^{mu deg 0} = 0
            sum += wg[d] * wg[deg(xa)] * wb[deg(xb)];
        });
    }
    return sum.value();
}

std::vector<BoundReport> check_basic_lemma(Lemma which, const LemmaParams& params, int deg_lo, int deg_hi) {
    const FieldCtx& ctx = params.ctx;
    if (ctx.q() == 0) throw FqslError("lemma: field not set");
    if (deg_lo < 0 || deg_hi < deg_lo) throw FqslError("lemma: bad degree range");
    if (deg_hi > max_degree(ctx)) throw FqslError("lemma: degree beyond the polynomial capacity");
    if (params.D_eval < deg_hi + 1) throw FqslError("lemma: D_eval must exceed the sweep");
    const std::uint64_t q = ctx.q();
    const int D = params.D_eval;
    struct Point {
        int degree;
        std::string label;
        Poly a, b;
    };
    std::vector<Point> points;
    switch (which) {
        case Lemma::Basic1:
            require_pair(params.alpha, params.beta, "basic1");
            if (params.M < -1) throw FqslError("basic1: M must be >= -1");
            for (int d = deg_lo; d <= deg_hi; ++d) points.push_back({d, "deg n = " + std::to_string(d), {}, {}});
            break;
        case Lemma::Basic3:
            require_pair(params.alpha, params.beta, "basic3");
            if (params.M < 0) throw FqslError("basic3: M must be >= 0");
            for (int d = deg_lo; d <= deg_hi; ++d) points.push_back({d, "deg r = " + std::to_string(d), {}, {}});
            break;
        case Lemma::Basic2:
        case Lemma::Basic2Zero: {
            if (params.alpha <= Rational(1, 2) || params.alpha >= Rational(2, 3)) {
                throw FqslError("basic2: need 1/2 < gamma < 2/3");
            }
            if (q < 3) throw FqslError("basic2 sweep needs q >= 3");
            const int d0 = std::max(deg_lo, 1);
            for (int d = d0; d <= deg_hi; ++d) {
                const Poly b = sweep_poly(ctx, 2, d);
                if (which == Lemma::Basic2Zero) {
                    points.push_back({d, "a = 0, deg b = " + std::to_string(d), p_zero(ctx), b});
                    continue;
                }
                const std::string ds = std::to_string(d), hs = std::to_string(d / 2);
                points.push_back({d, "deg a = " + hs + " < deg b = " + ds, sweep_poly(ctx, 1, d / 2), b});
                points.push_back({d, "deg a = deg b = " + ds + ", same lead", sweep_poly(ctx, 2, d), sweep_poly(ctx, 2, d) == b ? p_add(b, p_monomial(ctx, ctx.one(), 0)) : b});
                points.push_back({d, "deg a = deg b = " + ds + ", other lead", sweep_poly(ctx, 1, d), b});
                points.push_back({d, "deg a = " + ds + " > deg b = " + hs, sweep_poly(ctx, 1, d), sweep_poly(ctx, 2, d / 2)});
            }
            break;
        }
    }
    const auto parts = map_chunks<BoundReport>(points.size(), 1, [&](std::size_t lo, std::size_t) {
        const Point& pt = points[lo];
        BoundReport r;
        r.lemma = which;
        r.degree = pt.degree;
        r.point = pt.label;
        const double al = to_double(params.alpha), be = to_double(params.beta);
        switch (which) {
            case Lemma::Basic1: {
                SigmaQuery qy;
                qy.ctx = ctx;
                qy.alpha = params.alpha;
                qy.beta = params.beta;
                qy.n = p_monomial(ctx, ctx.one(), pt.degree);
                qy.M = params.M;
                qy.D = D;
                r.quantity = sigma_closed(qy);
                r.bound_expr = qpow(q, -(al + be - 1) * std::max(pt.degree, params.M));
                r.tail_estimate = geometric_tail(q, params.alpha + params.beta, D);
                break;
            }
            case Lemma::Basic3:
                r.quantity = basic3_closed(q, params.alpha, params.beta, pt.degree, params.M, D);
                r.bound_expr = qpow(q, (1 - al - be) * std::max(pt.degree, params.M));
                r.tail_estimate = geometric_tail(q, params.alpha + params.beta, D);
                break;
            case Lemma::Basic2:
            case Lemma::Basic2Zero: {
                const int m = std::max(pt.a.is_zero() ? 0 : deg(pt.a), deg(pt.b));
                r.quantity = basic2_value(ctx, params.alpha, pt.a, pt.b, m, D);
                const int span = which == Lemma::Basic2Zero ? deg(pt.b) : deg(pt.a) + deg(pt.b);
                r.bound_expr = qpow(q, (1 - 2 * al) * span);
                r.tail_estimate = geometric_tail(q, Rational(4) * params.alpha - Rational(1), D);
                break;
            }
        }
        r.ratio = r.quantity / r.bound_expr;
        return r;
    });
    return parts;
}

CheckStatus judge_sweep(const std::vector<BoundReport>& rows, double pinned) {
    bool inconclusive = false;
    for (const auto& r : rows) {
        if (!std::isfinite(r.ratio) || r.ratio > pinned) return CheckStatus::Fail;
        const double gap = pinned * r.bound_expr - r.quantity;
        if (r.tail_estimate >= 0.01 * gap) inconclusive = true;
    }
    return inconclusive ? CheckStatus::Inconclusive : CheckStatus::Pass;
}

double round_up_3sig(double x) {
    if (!(x > 0) || !std::isfinite(x)) throw FqslError("round_up_3sig needs a positive finite value");
    const double scale = std::pow(10.0, std::floor(std::log10(x)) - 2);
    double r = std::ceil(x / scale) * scale;
    if (r <= x) r += scale;
    return r;
}

// ---- expectations ----

ExpKind parse_exp_kind(std::string_view name) {
    if (name == "Qn") return ExpKind::Qn;
    if (name == "Tn") return ExpKind::Tn;
    if (name == "Rn") return ExpKind::Rn;
    if (name == "Bn") return ExpKind::Bn;
    if (name == "U" || name == "Ur") return ExpKind::U;
    if (name == "V" || name == "Vr") return ExpKind::V;
    if (name == "W" || name == "Wr") return ExpKind::W;
    if (name == "U'" || name == "Up") return ExpKind::Uprime;
    if (name == "V'" || name == "Vp") return ExpKind::Vprime;
    throw FqslError("unknown family kind '" + std::string(name) + "'");
}

std::string exp_kind_name(ExpKind k) {
    switch (k) {
        case ExpKind::Qn: return "Qn";
        case ExpKind::Tn: return "Tn";
        case ExpKind::Rn: return "Rn";
        case ExpKind::Bn: return "Bn";
        case ExpKind::U: return "U";
        case ExpKind::V: return "V";
        case ExpKind::W: return "W";
        case ExpKind::Uprime: return "U'";
        case ExpKind::Vprime: return "V'";
    }
    return "?";
}

namespace {

Family to_family(ExpKind k) {
    switch (k) {
        case ExpKind::U: return Family::U;
        case ExpKind::V: return Family::V;
        case ExpKind::W: return Family::W;
        case ExpKind::Uprime: return Family::Uprime;
        case ExpKind::Vprime: return Family::Vprime;
        default: throw FqslError("not a U/V/W family");
    }
}

// The admissible window with per-element probabilities, grouped by residue.
struct Window {
    const ModelParams& params;
    PolySet A;
    std::vector<double> p;
    std::vector<std::uint64_t> res;
    std::unordered_map<Poly, std::uint32_t, PolyHash> idx;
    std::vector<Poly> class_res;                       // residue polynomial per class
    std::vector<std::vector<std::uint32_t>> classes;   // member indices per class
    std::vector<std::uint32_t> class_of;
    std::unordered_map<std::uint64_t, std::uint32_t> class_by_code;

    explicit Window(const ModelParams& m) : params(m) {
        m.validate();
        if (admissible_count(m) > kMaxExpectationWindow) throw FqslError("expectation: window too large");
        A = enumerate_admissible(m);
        const int N = m.N;
        p.resize(A.size());
        res.resize(A.size());
        class_of.resize(A.size());
        idx.reserve(A.size() * 2);
        std::map<std::uint64_t, std::vector<std::uint32_t>> groups;
        for (std::uint32_t i = 0; i < A.size(); ++i) {
            p[i] = degree_prob(m, deg(A[i]));
            res[i] = encode_residue(A[i], N);
            idx.emplace(A[i], i);
            groups[res[i]].push_back(i);
        }
        for (auto& [code, members] : groups) {
            class_by_code.emplace(code, static_cast<std::uint32_t>(classes.size()));
            class_res.push_back(residue_mod_tN(A[members.front()], N));
            for (auto i : members) class_of[i] = static_cast<std::uint32_t>(classes.size());
            classes.push_back(std::move(members));
        }
    }

    std::optional<std::uint32_t> find(const Poly& x) const {
        auto it = idx.find(x);
        if (it == idx.end()) return std::nullopt;
        return it->second;
    }
    std::optional<std::uint32_t> class_for(const Poly& residue) const {
        auto it = class_by_code.find(encode_residue(residue, params.N));
        if (it == class_by_code.end()) return std::nullopt;
        return it->second;
    }
    double prob_of_set(std::vector<std::uint32_t> ids) const {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        double r = 1;
        for (auto i : ids) r *= p[i];
        return r;
    }
};

using Triple = std::array<std::uint32_t, 3>;
using Quad = std::array<std::uint32_t, 4>;

// Visits Q_n members inside the window, each once (classes c1 < c2 < c3).
// Work is split by c1; each chunk folds into its own accumulator.
template <class Acc, class F>
std::vector<Acc> fold_Q(const Window& W, const Poly& n, F&& fn) {
    const std::size_t C = W.classes.size();
    const Poly rn = residue_mod_tN(n, W.params.N);
    return map_chunks<Acc>(C, 1, [&](std::size_t c1, std::size_t) {
        Acc acc{};
        for (std::size_t c2 = c1 + 1; c2 < C; ++c2) {
            const Poly r3 = residue_mod_tN(sub_fast(sub_fast(rn, W.class_res[c1]), W.class_res[c2]), W.params.N);
            const auto c3 = W.class_for(r3);
            if (!c3 || *c3 <= c2) continue;
            for (auto i : W.classes[c1]) {
                const Poly rest = sub_fast(n, W.A[i]);
                for (auto j : W.classes[c2]) {
                    if (auto k = W.find(sub_fast(rest, W.A[j]))) fn(acc, i, j, *k);
                }
            }
        }
        return acc;
    });
}

std::vector<Triple> window_Q(const Window& W, const Poly& n) {
    const auto parts = fold_Q<std::vector<Triple>>(
        W, n, [](std::vector<Triple>& acc, std::uint32_t i, std::uint32_t j, std::uint32_t k) { acc.push_back({i, j, k}); });
    std::vector<Triple> out;
    for (const auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    return out;
}

std::vector<Quad> window_R(const Window& W, const Poly& n) {
    if (!W.params.epsilon) throw FqslError("R_n needs epsilon");
    if (n.is_zero()) throw FqslError("R_n is defined for n != 0");
    const Rational eps = *W.params.epsilon;
    const std::size_t C = W.classes.size();
    long double work = 0;
    for (std::size_t a = 0; a < C; ++a)
        for (std::size_t b = a + 1; b < C; ++b)
            for (std::size_t c = b + 1; c < C; ++c)
                work += static_cast<long double>(W.classes[a].size()) * W.classes[b].size() * W.classes[c].size();
    if (work > 2e9L) throw FqslError("expectation: R_n window too large");
    const Poly rn = residue_mod_tN(n, W.params.N);
    const int dn = deg(n);
    auto parts = map_chunks<std::vector<Quad>>(C, 1, [&](std::size_t c1, std::size_t) {
        std::vector<Quad> local;
        for (std::size_t c2 = c1 + 1; c2 < C; ++c2) {
            for (std::size_t c3 = c2 + 1; c3 < C; ++c3) {
                const Poly r4 = residue_mod_tN(
                    sub_fast(sub_fast(sub_fast(rn, W.class_res[c1]), W.class_res[c2]), W.class_res[c3]), W.params.N);
                const auto c4 = W.class_for(r4);
                if (!c4 || *c4 <= c3) continue;
                for (auto i : W.classes[c1]) {
                    for (auto j : W.classes[c2]) {
                        const Poly s = sub_fast(sub_fast(n, W.A[i]), W.A[j]);
                        for (auto k : W.classes[c3]) {
                            const auto l = W.find(sub_fast(s, W.A[k]));
                            if (!l) continue;
                            const int m = std::min({deg(W.A[i]), deg(W.A[j]), deg(W.A[k]), deg(W.A[*l])});
                            if (le_scaled(m, eps, dn)) local.push_back({i, j, k, *l});
                        }
                    }
                }
            }
        }
        return local;
    });
    std::vector<Quad> out;
    for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    return out;
}

// Ordered pairs (a, b) in the window with a + b = x1 + x4, a = x1 and b = x4 mod t^N.
void pair_list(const Window& W, std::uint32_t x1, std::uint32_t x4, std::vector<std::pair<std::uint32_t, std::uint32_t>>& P) {
    P.clear();
    const Poly s = add_fast(W.A[x1], W.A[x4]);
    for (auto a : W.classes[W.class_of[x1]]) {
        if (auto b = W.find(sub_fast(s, W.A[a]))) P.emplace_back(a, *b);
    }
}

bool same_pair(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    return (a == c && b == d) || (a == d && b == c);
}

double expect_T(const Window& W, const Poly& n) {
    const auto Q = window_Q(W, n);
    std::size_t maxc = 0;
    for (const auto& c : W.classes) maxc = std::max(maxc, c.size());
    if (static_cast<long double>(Q.size()) * 3 * W.A.size() * maxc > 2e9L) {
        throw FqslError("expectation: T_n window too large");
    }
    auto parts = map_chunks<CompensatedSum>(Q.size(), 8, [&](std::size_t lo, std::size_t hi) {
        CompensatedSum sum;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> P;
        for (std::size_t t = lo; t < hi; ++t) {
            const Triple& th = Q[t];
            for (int pos = 0; pos < 3; ++pos) {
                const std::uint32_t x1 = th[pos];
                for (std::uint32_t x4 = 0; x4 < W.A.size(); ++x4) {
                    pair_list(W, x1, x4, P);
                    const std::uint32_t base[4] = {th[0], th[1], th[2], x4};
                    auto outside = [&](std::uint32_t x) { return std::find(base, base + 4, x) == base + 4; };
                    // weight of a pair's elements beyond theta and x4
                    auto f = [&](std::uint32_t a, std::uint32_t b) {
                        double r = outside(a) ? W.p[a] : 1.0;
                        if (b != a && outside(b)) r *= W.p[b];
                        return r;
                    };
                    // Distinct unordered pairs with one sum are disjoint, so
                    // the union over (x5, x6), (x7, x8) factorizes unless the
                    // two coincide as unordered pairs.
                    double all = 0, kept = 0, same = 0;
                    for (const auto& [a, b] : P) {
                        const double w = f(a, b);
                        all += w;
                        if (same_pair(x1, x4, a, b)) continue;
                        kept += w;
                        const bool swapped = a != b && W.class_of[b] == W.class_of[x1];
                        same += w * w * (swapped ? 2 : 1);
                    }
                    const double rest = kept * all - same;
                    // (x2, x3) in either order
                    if (rest > 0) sum += 2 * W.prob_of_set({th[0], th[1], th[2], x4}) * rest;
                }
            }
        }
        return sum;
    });
    CompensatedSum total;
    for (const auto& s : parts) total += s;
    return total.value();
}

double expect_B(const Window& W, const Poly& n) {
    const auto R = window_R(W, n);
    std::size_t maxc = 0;
    for (const auto& c : W.classes) maxc = std::max(maxc, c.size());
    if (static_cast<long double>(R.size()) * 4 * W.A.size() * maxc > 2e9L) {
        throw FqslError("expectation: B_n window too large");
    }
    auto parts = map_chunks<CompensatedSum>(R.size(), 8, [&](std::size_t lo, std::size_t hi) {
        CompensatedSum sum;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> P;
        for (std::size_t t = lo; t < hi; ++t) {
            const Quad& th = R[t];
            for (int pos = 0; pos < 4; ++pos) {
                const std::uint32_t x1 = th[pos];
                for (std::uint32_t x5 = 0; x5 < W.A.size(); ++x5) {
                    pair_list(W, x1, x5, P);
                    for (const auto& [x6, x7] : P) {
                        if (same_pair(x1, x5, x6, x7)) continue;
                        // 3! orders of the remaining members
                        sum += 6 * W.prob_of_set({th[0], th[1], th[2], th[3], x5, x6, x7});
                    }
                }
            }
        }
        return sum;
    });
    CompensatedSum total;
    for (const auto& s : parts) total += s;
    return total.value();
}

double expect_family(const Window& W, ExpKind k, const Poly& r) {
    const std::size_t n = W.A.size();
    if ((k == ExpKind::Uprime || k == ExpKind::Vprime || k == ExpKind::W) &&
        static_cast<long double>(n) * n > 4e9L) {
        throw FqslError("expectation: window too large for a quadratic family");
    }
    auto parts = map_chunks<CompensatedSum>(n, 256, [&](std::size_t lo, std::size_t hi) {
        CompensatedSum sum;
        for (std::size_t i = lo; i < hi; ++i) {
            const Poly& x1 = W.A[i];
            switch (k) {
                case ExpKind::U:
                case ExpKind::V: {
                    const auto j = W.find(k == ExpKind::U ? sub_fast(r, x1) : sub_fast(x1, r));
                    if (j && *j != i) sum += W.p[i] * W.p[*j];
                    break;
                }
                case ExpKind::Uprime:
                case ExpKind::Vprime:
                    for (std::size_t j = 0; j < n; ++j) {
                        if (j == i) continue;
                        const Poly s = add_fast(x1, W.A[j]);
                        const auto l = W.find(k == ExpKind::Uprime ? sub_fast(r, s) : sub_fast(s, r));
                        if (l && *l != i && *l != j) sum += W.p[i] * W.p[j] * W.p[*l];
                    }
                    break;
                case ExpKind::W: {
                    // x1 plays x4; L = ordered (a, b), a + b = r + x4, all distinct
                    const Poly v = add_fast(r, x1);
                    double s1 = 0, s2 = 0;
                    for (std::size_t a = 0; a < n; ++a) {
                        if (a == i) continue;
                        const auto b = W.find(sub_fast(v, W.A[a]));
                        if (!b || *b == a || *b == i) continue;
                        const double pr = W.p[a] * W.p[*b];
                        s1 += pr;
                        s2 += pr * pr;
                    }
                    // (c, d) ranges over L minus (a, b) and (b, a)
                    sum += W.p[i] * (s1 * s1 - 2 * s2);
                    break;
                }
                default:
                    break;
            }
        }
        return sum;
    });
    CompensatedSum total;
    for (const auto& s : parts) total += s;
    return total.value();
}

}  // namespace

double expectation_exact(ExpKind kind, const ModelParams& params, const Poly& target) {
    const Window W(params);
    switch (kind) {
        case ExpKind::Qn: {
            const auto parts = fold_Q<CompensatedSum>(
                W, target, [&](CompensatedSum& acc, std::uint32_t i, std::uint32_t j, std::uint32_t k) {
                    acc += W.p[i] * W.p[j] * W.p[k];
                });
            CompensatedSum sum;
            for (const auto& part : parts) sum += part;
            return sum.value();
        }
        case ExpKind::Rn: {
            CompensatedSum sum;
            for (const auto& th : window_R(W, target)) sum += W.p[th[0]] * W.p[th[1]] * W.p[th[2]] * W.p[th[3]];
            return sum.value();
        }
        case ExpKind::Tn: return expect_T(W, target);
        case ExpKind::Bn: return expect_B(W, target);
        default: return expect_family(W, kind, target);
    }
}

double delta_exact(ExpKind kind, const ModelParams& params, const Poly& target) {
    const Window W(params);
    if (kind == ExpKind::Qn) {
        // Members with equal sums meet in at most one element: any two of
        // them fix the third. So each intersecting ordered pair shares exactly
        // one x and contributes p(theta) p(theta') / p(x).
        struct Acc {
            std::vector<double> s1, s2;  // per element: sum of p(theta), of p(theta)^2
        };
        const std::size_t size = W.A.size();
        const auto parts = fold_Q<Acc>(W, target, [&](Acc& acc, std::uint32_t i, std::uint32_t j, std::uint32_t k) {
            const std::uint32_t th[3] = {i, j, k};
            for (int a = 0; a < 3; ++a) {
                const Poly third = sub_fast(sub_fast(target, W.A[th[a]]), W.A[th[(a + 1) % 3]]);
                if (!(third == W.A[th[(a + 2) % 3]])) throw std::logic_error("Q_n member with a free third element");
            }
            if (acc.s1.empty()) {
                acc.s1.assign(size, 0);
                acc.s2.assign(size, 0);
            }
            const double pr = W.p[i] * W.p[j] * W.p[k];
            for (auto x : th) {
                acc.s1[x] += pr;
                acc.s2[x] += pr * pr;
            }
        });
        std::vector<CompensatedSum> s1(size), s2(size);
        for (const auto& part : parts) {
            for (std::size_t x = 0; x < part.s1.size(); ++x) {
                s1[x] += part.s1[x];
                s2[x] += part.s2[x];
            }
        }
        CompensatedSum sum;
        for (std::size_t x = 0; x < W.A.size(); ++x) {
            const double a = s1[x].value();
            if (a > 0) sum += (a * a - s2[x].value()) / W.p[x];
        }
        return sum.value();
    }
    if (kind == ExpKind::Rn) {
        const auto R = window_R(W, target);
        std::vector<std::vector<std::uint32_t>> by_elem(W.A.size());
        for (std::uint32_t t = 0; t < R.size(); ++t)
            for (auto x : R[t]) by_elem[x].push_back(t);
        std::vector<std::uint32_t> stamp(R.size(), UINT32_MAX);
        CompensatedSum sum;
        for (std::uint32_t t = 0; t < R.size(); ++t) {
            stamp[t] = t;
            for (auto x : R[t]) {
                for (auto u : by_elem[x]) {
                    if (stamp[u] == t) continue;
                    stamp[u] = t;
                    std::vector<std::uint32_t> uni(R[t].begin(), R[t].end());
                    uni.insert(uni.end(), R[u].begin(), R[u].end());
                    sum += W.prob_of_set(uni);
                }
            }
        }
        return sum.value();
    }
    throw FqslError("delta is implemented for Qn and Rn");
}

std::uint64_t sample_count(ExpKind kind, const OmegaSample& w, const Poly& target) {
    switch (kind) {
        case ExpKind::Qn: return count_Qn(w, target);
        case ExpKind::Tn: return count_Tn(w, target);
        case ExpKind::Rn: return count_Rn(w, target);
        case ExpKind::Bn: return count_Bn(w, target);
        default: return family_count(w.members, to_family(kind), target);
    }
}

ExpectationReport expectation_report(ExpKind kind, const ModelParams& params, const Poly& target, int trials) {
    ExpectationReport rep;
    rep.mu = expectation_exact(kind, params, target);
    if (kind == ExpKind::Qn || kind == ExpKind::Rn) rep.delta = delta_exact(kind, params, target);
    if (trials > 0) {
        const auto counts = map_chunks<std::vector<double>>(trials, 16, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> local;
            ModelParams m = params;
            for (std::size_t t = lo; t < hi; ++t) {
                m.seed = params.seed + t;
                local.push_back(static_cast<double>(sample_count(kind, sample_omega(m), target)));
            }
            return local;
        });
        CompensatedSum s, ss;
        for (const auto& part : counts)
            for (double c : part) {
                s += c;
                ss += c * c;
            }
        const double mean = s.value() / trials;
        const double var = trials > 1 ? std::max(0.0, (ss.value() - trials * mean * mean) / (trials - 1)) : 0.0;
        rep.mc_mean = mean;
        rep.mc_stderr = std::sqrt(var / trials);
    }
    return rep;
}

JansonReport janson_empirical(const ModelParams& params, const Poly& target, int trials) {
    if (trials < 1) throw FqslError("janson: trials must be positive");
    JansonReport rep;
    rep.trials = trials;
    rep.mu = expectation_exact(ExpKind::Qn, params, target);
    if (rep.mu <= 0) throw FqslError("janson: empty family (mu = 0)");
    rep.delta = delta_exact(ExpKind::Qn, params, target);
    if (rep.delta >= rep.mu) throw FqslError("janson: delta >= mu, the inequality does not apply");
    const auto hits = map_chunks<std::uint64_t>(trials, 16, [&](std::size_t lo, std::size_t hi) {
        std::uint64_t h = 0;
        ModelParams m = params;
        for (std::size_t t = lo; t < hi; ++t) {
            m.seed = params.seed + t;
            h += static_cast<double>(count_Qn(sample_omega(m), target)) <= rep.mu / 2 ? 1 : 0;
        }
        return h;
    });
    std::uint64_t total = 0;
    for (auto h : hits) total += h;
    rep.p_hat = static_cast<double>(total) / trials;
    rep.bound = std::exp(-rep.mu / 16);
    rep.slack = 3 * std::sqrt(rep.p_hat * (1 - rep.p_hat) / trials);
    return rep;
}

VectorFamily family_vectors(ExpKind kind, const OmegaSample& w, const Poly& target) {
    VectorFamily F;
    switch (kind) {
        case ExpKind::Qn: {
            std::vector<std::array<Poly, 3>> wit;
            count_Qn(w.members, w.params.N, target, &wit);
            F.H = 3;
            for (const auto& t : wit) F.vectors.emplace_back(t.begin(), t.end());
            break;
        }
        case ExpKind::Rn: {
            if (!w.params.epsilon) throw FqslError("R_n needs epsilon");
            std::vector<std::array<Poly, 4>> wit;
            count_Rn(w.members, w.params.N, *w.params.epsilon, target, &wit);
            F.H = 4;
            for (const auto& t : wit) F.vectors.emplace_back(t.begin(), t.end());
            break;
        }
        case ExpKind::Tn:
        case ExpKind::Bn: throw FqslError("vector families are built for Qn, Rn and U/V/W kinds");
        default: {
            const Family f = to_family(kind);
            F.H = family_arity(f);
            F.vectors = family_members(w.members, f, target);
        }
    }
    return F;
}

KdsvReport kdsv_probability_empirical(ExpKind kind, const ModelParams& params, const std::vector<Poly>& targets,
                                      int K, int trials) {
    if (K < 1) throw FqslError("K must be positive");
    if (trials < 1) throw FqslError("trials must be positive");
    KdsvReport rep;
    rep.K = K;
    rep.trials = trials;
    CompensatedSum bound;
    for (const auto& r : targets) {
        const double e = expectation_exact(kind, params, r);
        if (e > 0) bound += std::exp(K * std::log(e) - std::lgamma(K + 1.0));
    }
    rep.bound = bound.value();
    const auto hits = map_chunks<std::uint64_t>(trials, 16, [&](std::size_t lo, std::size_t hi) {
        std::uint64_t h = 0;
        ModelParams m = params;
        for (std::size_t t = lo; t < hi; ++t) {
            m.seed = params.seed + t;
            const auto w = sample_omega(m);
            for (const auto& r : targets) {
                const auto F = family_vectors(kind, w, r);
                if (F.vectors.size() >= static_cast<std::size_t>(K) && find_k_dsv(F, K)) {
                    ++h;
                    break;
                }
            }
        }
        return h;
    });
    for (auto h : hits) rep.hits += h;
    rep.frequency = static_cast<double>(rep.hits) / trials;
    rep.stderr_ = std::sqrt(rep.frequency * (1 - rep.frequency) / trials);
    return rep;
}

}  // namespace fqsl
