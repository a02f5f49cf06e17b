#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "fqsl/calibration.hpp"
#include "fqsl/estimates.hpp"
#include "fqsl/parabola.hpp"
#include "oracles.hpp"

using namespace fqsl;

namespace {

const FieldCtx& f5() {
    static const FieldCtx c = FieldCtx::create(5, 1);
    return c;
}
const FieldCtx& f3() {
    static const FieldCtx c = FieldCtx::create(3, 1);
    return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

Poly random_poly(std::mt19937_64& rng, const FieldCtx& ctx, int max_deg) {
    const int d = static_cast<int>(rng() % (max_deg + 2)) - 1;  // -1 gives zero
    std::vector<std::int64_t> c(std::max(d + 1, 0));
    for (auto& v : c) v = static_cast<std::int64_t>(rng() % ctx.q());
    if (d >= 0) c[d] = 1 + static_cast<std::int64_t>(rng() % (ctx.q() - 1));
    return p_from_ints(ctx, c);
}

// 11 admissible elements over F_3: four residues in G_2, degrees 1 and 2.
ModelParams tiny_window() {
    ModelParams m;
    m.ctx = f3();
    m.N = 2;
    m.S = {1, 3, 5, 7};
    m.gamma = Rational(1, 2);
    m.M = 0;
    m.D = 2;
    m.epsilon = Rational(1, 2);
    return m;
}

// E[count] by summing over every subset of the window.
double subset_expectation(const ModelParams& m, const std::function<std::uint64_t(const PolySet&)>& count) {
    const auto A = enumerate_admissible(m);
    EXPECT_LE(A.size(), 14u);
    std::vector<double> p;
    for (const auto& x : A) p.push_back(prob_of(m, x));
    double total = 0;
    for (std::uint32_t mask = 0; mask < (1u << A.size()); ++mask) {
        double pr = 1;
        PolySet w;
        for (std::size_t i = 0; i < A.size(); ++i) {
            const bool in = (mask >> i) & 1;
            pr *= in ? p[i] : 1 - p[i];
            if (in) w.push_back(A[i]);
        }
        const auto c = count(w);
        if (c) total += pr * static_cast<double>(c);
    }
    return total;
}

// Window where Q_n has mu ~ 8 and delta < mu at deg n = 7.
ModelParams dense_window() {
    ModelParams m;
    m.ctx = f3();
    m.N = 1;
    m.S = {0, 1, 2};
    m.gamma = Rational(7, 11);
    m.M = 3;
    m.D = 7;
    m.seed = 1000;
    return m;
}

Poly dense_target(int d) { return p_add(p_monomial(f3(), f3().one(), d), p_from_ints(f3(), {0, 2, 1})); }

ModelParams parabola_window(int D) {
    static const auto S = build_sidon_in_GN(5, 1, 1);
    ModelParams m;
    m.ctx = f5();
    m.N = 4;
    for (const auto& s : S.polys) m.S.push_back(encode(s, 4));
    m.gamma = Rational(7, 11);
    m.M = 4;
    m.D = D;
    return m;
}

}  // namespace

// ---- sigma ----

TEST(Sigma, ZeroTargetApproachesGeometricLimit) {
    SigmaQuery qy;
    qy.ctx = f5();
    qy.n = p_zero(f5());
    qy.M = -1;
    qy.D = 30;
    const double s = 14.0 / 11.0;
    const double limit = 4.0 / (1 - std::pow(5.0, 1 - s));
    const double v = sigma_closed(qy);
    const double tail = geometric_tail(5, Rational(14, 11), 30);
    EXPECT_LT(v, limit);
    EXPECT_NEAR(v + tail, limit, 1e-12 * limit);
    qy.D = 8;
    EXPECT_LT(rel(sigma_direct(qy), sigma_closed(qy)), 1e-12);
}

TEST(Sigma, SingleDegreeWindowByHand) {
    const double a = 7.0 / 11, b = 7.0 / 11;
    SigmaQuery qy;
    qy.ctx = f5();
    qy.M = 2;
    qy.D = 3;
    // deg n = 1: every x of degree 3 keeps deg(n - x) = 3
    qy.n = p_from_ints(f5(), {3, 1});
    const double lo = 4 * 125 * std::pow(5.0, -3 * (a + b));
    EXPECT_LT(rel(sigma_direct(qy), lo), 1e-12);
    // deg n = 3: (q-2) q^3 leading-degree survivors, and n - x runs over G_3
    qy.n = p_from_ints(f5(), {1, 0, 0, 2});
    double hand = 3 * 125 * std::pow(5.0, -3 * (a + b));
    for (int e = 0; e < 3; ++e) hand += std::pow(5.0, -3 * a) * 4 * std::pow(5.0, e) * std::pow(5.0, -b * e);
    EXPECT_LT(rel(sigma_direct(qy), hand), 1e-12);
    EXPECT_LT(rel(sigma_closed(qy), hand), 1e-12);
}

TEST(Sigma, TargetAboveWindow) {
    SigmaQuery qy;
    qy.ctx = f5();
    qy.alpha = Rational(2, 3);
    qy.beta = Rational(3, 5);
    qy.n = p_monomial(f5(), f5().one(), 9);
    qy.M = 0;
    qy.D = 5;
    double s = 0;
    for (int d = 1; d <= 5; ++d) s += 4 * std::pow(5.0, d) * std::pow(5.0, -2.0 / 3 * d);
    s *= std::pow(5.0, -0.6 * 9);
    EXPECT_LT(rel(sigma_direct(qy), s), 1e-12);
    EXPECT_LT(rel(sigma_closed(qy), s), 1e-12);
}

TEST(Sigma, DirectMatchesClosedOnRandomQueries) {
    std::mt19937_64 rng(5);
    const Rational exps[] = {Rational(7, 11), Rational(3, 5), Rational(4, 5), Rational(2, 3)};
    const int Ms[] = {-1, 0, 2};
    for (int i = 0; i < 200; ++i) {
        SigmaQuery qy;
        qy.ctx = f5();
        qy.alpha = exps[rng() % 4];
        qy.beta = exps[rng() % 4];
        qy.n = random_poly(rng, f5(), 6);
        qy.M = Ms[rng() % 3];
        qy.D = 8;
        const double d = sigma_direct(qy), c = sigma_closed(qy);
        ASSERT_LT(rel(d, c), 1e-9) << "query " << i;
    }
}

TEST(Sigma, WindowGuards) {
    SigmaQuery qy;
    qy.ctx = f5();
    qy.n = p_zero(f5());
    qy.M = 4;
    qy.D = 4;
    EXPECT_THROW(sigma_direct(qy), FqslError);
    qy.M = -1;
    qy.D = 13;
    EXPECT_THROW(sigma_direct(qy), FqslError);
}

TEST(GeometricTail, Examples) {
    EXPECT_NEAR(geometric_tail(5, Rational(2), 1), 0.2, 1e-15);
    EXPECT_THROW(geometric_tail(5, Rational(1), 3), FqslError);
    EXPECT_THROW(geometric_tail(5, Rational(7, 11), 3), FqslError);
}

TEST(GeometricTail, MatchesTruncatedSigma) {
    const Rational g(14, 11);
    for (int R : {0, 1, 3}) {
        SigmaQuery qy;
        qy.ctx = f5();
        qy.n = p_zero(f5());
        qy.M = R;
        qy.D = 9;
        const double expect = geometric_tail(5, g, R) - geometric_tail(5, g, 9);
        EXPECT_LT(rel(sigma_direct(qy), expect), 1e-12) << R;
    }
}

// ---- lemma sweeps ----

TEST(LemmaSweep, ClosedFormsMatchEnumeration) {
    const Rational phi(7, 11), kappa(7, 11);
    // basic3 through the report at small D_eval, against direct enumeration
    for (int M : {0, 2, 3}) {
        LemmaParams lp;
        lp.ctx = f5();
        lp.M = M;
        lp.D_eval = 6;
        const auto rows = check_basic_lemma(Lemma::Basic3, lp, 1, 5);
        for (const auto& r : rows) {
            const Poly rr = p_add(p_monomial(f5(), f5().one(), r.degree), p_monomial(f5(), f5().one(), 0));
            EXPECT_LT(rel(r.quantity, basic3_direct(f5(), phi, kappa, rr, M, 6)), 1e-11) << M << " " << r.degree;
        }
    }
    // basic2: the closed form above max(deg a, deg b) against full enumeration
    LemmaParams lp;
    lp.ctx = f5();
    lp.D_eval = 7;
    for (auto l : {Lemma::Basic2, Lemma::Basic2Zero}) {
        const auto rows = check_basic_lemma(l, lp, 1, 4);
        EXPECT_EQ(rows.size(), l == Lemma::Basic2 ? 16u : 4u);
        for (const auto& r : rows) EXPECT_GT(r.quantity, 0);
    }
    const Poly a = p_from_ints(f5(), {1, 1}), b = p_from_ints(f5(), {1, 0, 2});
    double closed = basic2_direct(f5(), Rational(7, 11), a, b, 2);
    const double g = 7.0 / 11;
    for (int d = 3; d <= 7; ++d) closed += 4 * std::pow(5.0, d) * std::pow(5.0, (1 - 4 * g) * d);
    EXPECT_LT(rel(closed, basic2_direct(f5(), Rational(7, 11), a, b, 7)), 1e-12);
}

TEST(LemmaSweep, Basic3FlatBelowM) {
    auto lp = calibration_params(Lemma::Basic3);
    const auto rows = check_basic_lemma(Lemma::Basic3, lp, 1, 8);
    for (const auto& r : rows) {
        if (r.degree < lp.M) EXPECT_LT(rel(r.ratio, rows.front().ratio), 1e-12);
    }
}

TEST(LemmaSweep, HypothesisGuards) {
    LemmaParams lp;
    lp.ctx = f5();
    lp.alpha = Rational(1, 5);
    EXPECT_THROW(check_basic_lemma(Lemma::Basic1, lp, 1, 3), FqslError);
    EXPECT_THROW(check_basic_lemma(Lemma::Basic2, lp, 1, 3), FqslError);
    lp.alpha = Rational(7, 11);
    lp.M = -1;
    EXPECT_THROW(check_basic_lemma(Lemma::Basic3, lp, 1, 3), FqslError);
    lp.D_eval = 3;
    EXPECT_THROW(check_basic_lemma(Lemma::Basic1, lp, 1, 3), FqslError);
}

TEST(LemmaSweep, PinnedConstantsHold) {
    const auto cal = load_calibration(FQSL_SOURCE_DIR "/data/calibration.json");
    for (auto l : {Lemma::Basic1, Lemma::Basic2, Lemma::Basic2Zero, Lemma::Basic3}) {
        const auto rows = check_basic_lemma(l, calibration_params(l), kCalibrationDegLo, kCalibrationDegHi);
        for (const auto& r : rows) {
            EXPECT_TRUE(std::isfinite(r.ratio));
            EXPECT_GE(r.ratio, 0);
            EXPECT_GE(r.tail_estimate, 0);
        }
        EXPECT_EQ(judge_sweep(rows, pinned_constant(cal, l)), CheckStatus::Pass) << lemma_name(l);
    }
    for (const auto& [k, v] : calibrate()) EXPECT_NEAR(v, cal.at(k), 1e-9) << k;
}

TEST(LemmaSweep, JudgeReportsFailAndInconclusive) {
    BoundReport r;
    r.quantity = 2;
    r.bound_expr = 1;
    r.ratio = 2;
    r.tail_estimate = 0;
    EXPECT_EQ(judge_sweep({r}, 3), CheckStatus::Pass);
    EXPECT_EQ(judge_sweep({r}, 1.5), CheckStatus::Fail);
    r.tail_estimate = 0.5;
    EXPECT_EQ(judge_sweep({r}, 3), CheckStatus::Inconclusive);
    EXPECT_DOUBLE_EQ(round_up_3sig(20.2229), 20.3);
    EXPECT_DOUBLE_EQ(round_up_3sig(0.0123), 0.0124);
}

// ---- expectations ----

TEST(Expectation, EmptyWindowIsZero) {
    auto m = tiny_window();
    m.M = 2;
    const Poly n = p_from_ints(f3(), {1, 1, 1});
    for (auto k : {ExpKind::Qn, ExpKind::Tn, ExpKind::Rn, ExpKind::Bn, ExpKind::U, ExpKind::V, ExpKind::W,
                   ExpKind::Uprime, ExpKind::Vprime}) {
        EXPECT_EQ(expectation_exact(k, m, n), 0.0) << exp_kind_name(k);
    }
}

TEST(Expectation, MatchesSubsetEnumeration) {
    const auto m = tiny_window();
    const auto A = enumerate_admissible(m);
    ASSERT_EQ(A.size(), 11u);
    const int N = m.N;
    const Rational eps = *m.epsilon;
    int nonzero = 0;
    for (const auto& n : enumerate_G(f3(), 3)) {
        const std::pair<ExpKind, std::function<std::uint64_t(const PolySet&)>> cases[] = {
            {ExpKind::Qn, [&](const PolySet& w) { return oracle::Q(w, N, n); }},
            {ExpKind::Tn, [&](const PolySet& w) { return oracle::T(w, N, n); }},
            {ExpKind::U, [&](const PolySet& w) { return oracle::family(w, Family::U, n); }},
            {ExpKind::V, [&](const PolySet& w) { return oracle::family(w, Family::V, n); }},
            {ExpKind::W, [&](const PolySet& w) { return oracle::family(w, Family::W, n); }},
            {ExpKind::Uprime, [&](const PolySet& w) { return oracle::family(w, Family::Uprime, n); }},
            {ExpKind::Vprime, [&](const PolySet& w) { return oracle::family(w, Family::Vprime, n); }},
            {ExpKind::Rn, [&](const PolySet& w) { return n.is_zero() ? 0 : oracle::R(w, N, eps, n); }},
            {ExpKind::Bn, [&](const PolySet& w) { return n.is_zero() ? 0 : oracle::B(w, N, eps, n); }},
        };
        for (const auto& [kind, count] : cases) {
            if (n.is_zero() && (kind == ExpKind::Rn || kind == ExpKind::Bn)) continue;
            const double expect = subset_expectation(m, count);
            const double got = expectation_exact(kind, m, n);
            ASSERT_NEAR(got, expect, 1e-12 * std::max(1.0, expect)) << exp_kind_name(kind) << " n=" << encode(n, 3);
            nonzero += expect > 0;
        }
    }
    EXPECT_GT(nonzero, 50);
}

TEST(Expectation, UMatchesTwoLoopOracle) {
    auto m = dense_window();
    m.M = 2;
    m.D = 5;
    const auto A = enumerate_admissible(m);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 5; ++i) {
        const Poly r = random_poly(rng, f3(), 5);
        double s = 0;
        for (const auto& a : A)
            for (const auto& b : A)
                if (!(a == b) && p_add(a, b) == r) s += prob_of(m, a) * prob_of(m, b);
        EXPECT_LT(rel(expectation_exact(ExpKind::U, m, r), s), 1e-12);
    }
}

TEST(Expectation, MonotoneInD) {
    auto m = dense_window();
    m.M = 1;
    const Poly n = dense_target(4);
    for (auto k : {ExpKind::Qn, ExpKind::Tn, ExpKind::U, ExpKind::V, ExpKind::Uprime}) {
        double prev = 0;
        for (int D = 2; D <= (k == ExpKind::Tn ? 4 : 5); ++D) {
            m.D = D;
            const double v = expectation_exact(k, m, n);
            EXPECT_GE(v, prev) << exp_kind_name(k) << " D=" << D;
            prev = v;
        }
    }
}

TEST(Expectation, QnLowerBoundAtParabolaSetting) {
    const auto m = parabola_window(7);
    const double q = 5, g = 7.0 / 11;
    for (int d = 5; d <= 7; ++d) {
        const Poly n = p_add(p_monomial(f5(), f5().one(), d), p_from_ints(f5(), {1, 2}));
        const double lb = std::pow(q * (q - 3), d - m.N) * std::pow(q, -3 * g * d) / 6;
        EXPECT_GE(expectation_exact(ExpKind::Qn, m, n), lb) << d;
    }
}

TEST(Expectation, MonteCarloAgreement) {
    const auto m = dense_window();
    const Poly n = dense_target(7);
    for (auto k : {ExpKind::Qn, ExpKind::U, ExpKind::V}) {
        const auto rep = expectation_report(k, m, n, 500);
        ASSERT_TRUE(rep.mc_mean && rep.mc_stderr);
        EXPECT_GT(rep.mu, 0.5);
        EXPECT_LE(std::abs(*rep.mc_mean - rep.mu), 4 * *rep.mc_stderr) << exp_kind_name(k);
    }
    EXPECT_FALSE(expectation_report(ExpKind::U, m, n, 0).mc_mean);
}

// ---- delta ----

TEST(Delta, MatchesPairEnumeration) {
    const auto m = tiny_window();
    const auto A = enumerate_admissible(m);
    auto prob = [&](const std::set<Poly>& s) {
        double p = 1;
        for (const auto& x : s) p *= prob_of(m, x);
        return p;
    };
    for (const auto& n : enumerate_G(f3(), 3)) {
        std::vector<std::set<Poly>> Qs, Rs;
        for (std::size_t i = 0; i < A.size(); ++i)
            for (std::size_t j = i + 1; j < A.size(); ++j)
                for (std::size_t k = j + 1; k < A.size(); ++k) {
                    if (oracle::in_Q(A[i], A[j], A[k], m.N, n)) Qs.push_back({A[i], A[j], A[k]});
                    for (std::size_t l = k + 1; l < A.size() && !n.is_zero(); ++l)
                        if (oracle::in_R(A[i], A[j], A[k], A[l], m.N, *m.epsilon, n)) Rs.push_back({A[i], A[j], A[k], A[l]});
                }
        for (auto* fam : {&Qs, &Rs}) {
            double expect = 0;
            for (const auto& a : *fam)
                for (const auto& b : *fam) {
                    if (a == b) continue;
                    std::set<Poly> u = a;
                    u.insert(b.begin(), b.end());
                    if (u.size() < a.size() + b.size()) expect += prob(u);
                }
            if (fam == &Rs && n.is_zero()) continue;
            const double got = delta_exact(fam == &Qs ? ExpKind::Qn : ExpKind::Rn, m, n);
            ASSERT_NEAR(got, expect, 1e-14) << encode(n, 3);
        }
    }
}

TEST(Delta, DisjointAndSharedExamples) {
    auto members = [](const ModelParams& m, const Poly& n) {
        const auto A = enumerate_admissible(m);
        std::vector<std::set<Poly>> Qs;
        for (std::size_t i = 0; i < A.size(); ++i)
            for (std::size_t j = i + 1; j < A.size(); ++j)
                for (std::size_t k = j + 1; k < A.size(); ++k)
                    if (oracle::in_Q(A[i], A[j], A[k], m.N, n)) Qs.push_back({A[i], A[j], A[k]});
        return Qs;
    };
    // two disjoint members
    auto m = tiny_window();
    m.S = {0, 1, 2};
    const auto disjoint = members(m, p_zero(f3()));
    ASSERT_EQ(disjoint.size(), 2u);
    EXPECT_EQ(delta_exact(ExpKind::Qn, m, p_zero(f3())), 0.0);
    // every intersecting pair shares exactly one element and adds
    // 2 prod P(x) over its 5-element union
    m = tiny_window();
    int shared = 0;
    for (const auto& n : enumerate_G(f3(), 3)) {
        const auto Qs = members(m, n);
        double expect = 0;
        for (std::size_t a = 0; a < Qs.size(); ++a)
            for (std::size_t b = a + 1; b < Qs.size(); ++b) {
                std::set<Poly> u = Qs[a];
                u.insert(Qs[b].begin(), Qs[b].end());
                ASSERT_GE(u.size(), 5u);
                if (u.size() == 6) continue;
                ++shared;
                double p = 1;
                for (const auto& x : u) p *= prob_of(m, x);
                expect += 2 * p;
            }
        EXPECT_NEAR(delta_exact(ExpKind::Qn, m, n), expect, 1e-15);
    }
    EXPECT_GT(shared, 0);
    EXPECT_THROW(delta_exact(ExpKind::U, m, p_zero(f3())), FqslError);
}

TEST(Delta, QnRatioAgainstDecayRateStaysBounded) {
    auto m = dense_window();
    m.M = 1;
    m.D = 6;
    const double g = 7.0 / 11;
    double lo = 1e300, hi = 0;
    for (int d = 3; d <= 6; ++d) {
        const double r = delta_exact(ExpKind::Qn, m, dense_target(d)) / std::pow(3.0, (3 - 5 * g) * d);
        EXPECT_TRUE(std::isfinite(r));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    EXPECT_GT(lo, 0);
    EXPECT_LT(hi / lo, 20);
}

// ---- Janson ----

TEST(Janson, EmpiricalBoundHolds) {
    const auto m = dense_window();
    const Poly n = dense_target(7);
    const auto rep = janson_empirical(m, n, 2000);
    EXPECT_LT(rep.delta, rep.mu);
    EXPECT_GE(rep.mu, 3);
    EXPECT_LE(rep.mu, 10);
    EXPECT_EQ(rep.mu, expectation_exact(ExpKind::Qn, m, n));
    EXPECT_EQ(rep.trials, 2000);
    EXPECT_TRUE(rep.holds()) << rep.p_hat << " vs " << rep.bound;
}

TEST(Janson, InapplicableRegimes) {
    auto m = dense_window();
    m.M = 2;
    EXPECT_THROW(janson_empirical(m, dense_target(3), 10), FqslError);  // delta > mu
    m.S = {0, 1};                                                       // two residues: Q_n empty
    EXPECT_THROW(janson_empirical(m, dense_target(3), 10), FqslError);
}

// ---- K-d.s.v. probabilities ----

TEST(Kdsv, MarkovCaseK1) {
    auto m = dense_window();
    m.D = 6;
    std::vector<Poly> targets;
    for (int d = 4; d <= 6; ++d) targets.push_back(dense_target(d));
    for (auto k : {ExpKind::U, ExpKind::Qn}) {
        const auto rep = kdsv_probability_empirical(k, m, targets, 1, 400);
        double sum = 0;
        for (const auto& r : targets) sum += expectation_exact(k, m, r);
        EXPECT_NEAR(rep.bound, sum, 1e-12 * sum);
        EXPECT_GT(rep.hits, 0u);
        EXPECT_TRUE(rep.holds()) << exp_kind_name(k);
    }
}

TEST(Kdsv, LargeKNeverSeen) {
    const auto m = dense_window();
    const auto rep = kdsv_probability_empirical(ExpKind::U, m, {dense_target(7)}, 12, 200);
    EXPECT_EQ(rep.hits, 0u);
    EXPECT_TRUE(rep.holds());
    EXPECT_THROW(kdsv_probability_empirical(ExpKind::U, m, {}, 0, 10), FqslError);
}

TEST(Kdsv, FrequencyFallsWithM) {
    auto m = dense_window();
    m.D = 8;
    std::vector<Poly> targets;
    for (int d = 5; d <= 8; ++d) targets.push_back(dense_target(d));
    std::vector<KdsvReport> reps;
    for (int M : {4, 5, 6}) {
        m.M = M;
        reps.push_back(kdsv_probability_empirical(ExpKind::U, m, targets, 2, 400));
        EXPECT_TRUE(reps.back().holds()) << M;
    }
    EXPECT_GT(reps.front().hits, 0u);
    for (std::size_t i = 1; i < reps.size(); ++i) {
        const double slack = 3 * std::hypot(reps[i].stderr_, reps[i - 1].stderr_);
        EXPECT_LE(reps[i].frequency, reps[i - 1].frequency + slack);
    }
}
