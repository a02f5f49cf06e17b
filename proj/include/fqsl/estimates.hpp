#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fqsl/combinat.hpp"
#include "fqsl/randmodel.hpp"

namespace fqsl {

// ---- convolution sums ----

/// sum over M < deg x <= D of q^{-alpha deg x} q^{-beta deg(n - x)}, with
/// q^{mu deg 0} = 0.
struct SigmaQuery {
    FieldCtx ctx;
    Rational alpha{7, 11};
    Rational beta{7, 11};
    Poly n;
    int M = -1;
    int D = 8;
};

/// Upper bound on terms sigma_direct will visit.
inline constexpr std::uint64_t kMaxSigmaTerms = 100'000'000;

/// Term-by-term enumeration with compensated summation.
double sigma_direct(const SigmaQuery& qy);
/// Degree-class aggregation in O(D) operations.
double sigma_closed(const SigmaQuery& qy);

/// sum over deg x > R of q^{-gamma deg x} = (q-1) q^{(1-gamma)(R+1)} / (1 - q^{1-gamma}).
/// Throws for gamma <= 1.
double geometric_tail(std::uint64_t q, const Rational& gamma, int R);

// ---- lemma ratio sweeps ----

enum class Lemma { Basic1, Basic2, Basic2Zero, Basic3 };
/// "basic1", "basic2", "basic2-a0", "basic3".
Lemma parse_lemma(std::string_view name);
std::string lemma_name(Lemma l);

struct LemmaParams {
    FieldCtx ctx;
    Rational alpha{7, 11};  // basic1 alpha, basic2 gamma, basic3 phi
    Rational beta{7, 11};   // basic1 beta, basic3 kappa
    int M = -1;             // basic1 and basic3 only
    int D_eval = 64;        // degrees above are covered by the tail term
};

enum class CheckStatus { Pass, Fail, Inconclusive };
std::string status_name(CheckStatus s);

struct BoundReport {
    Lemma lemma = Lemma::Basic1;
    int degree = 0;            // sweep coordinate
    std::string point;         // human-readable description of the evaluation point
    double quantity = 0;       // truncated left side
    double bound_expr = 0;     // right side without its implied constant
    double ratio = 0;
    double tail_estimate = 0;  // bound on the part of the left side above D_eval
};

/// Evaluates the left side (degrees up to D_eval plus a geometric tail bound)
/// and the right side at every sweep degree. Throws if the lemma's hypotheses
/// fail.
std::vector<BoundReport> check_basic_lemma(Lemma which, const LemmaParams& params, int deg_lo, int deg_hi);

/// Pass if every ratio stays below the pinned constant, Inconclusive if some
/// tail is at least 1% of the gap to the pinned bound, else Fail.
CheckStatus judge_sweep(const std::vector<BoundReport>& rows, double pinned);

/// Smallest value with 3 significant digits that is >= x.
double round_up_3sig(double x);

/// Left side of the basic 3 sum by direct enumeration over M < deg x <= D.
double basic3_direct(const FieldCtx& ctx, const Rational& phi, const Rational& kappa, const Poly& r, int M, int D);
/// Left side of the basic 2 sum by direct enumeration over 0 <= deg x <= D.
double basic2_direct(const FieldCtx& ctx, const Rational& gamma, const Poly& a, const Poly& b, int D);

// ---- expectations over the random model ----

enum class ExpKind { Qn, Tn, Rn, Bn, U, V, W, Uprime, Vprime };
/// "Qn", "Tn", "Rn", "Bn", "U", "V", "W", "U'", "V'".
ExpKind parse_exp_kind(std::string_view name);
std::string exp_kind_name(ExpKind k);

/// Largest admissible window the exact expectations will enumerate.
inline constexpr std::uint64_t kMaxExpectationWindow = 2'000'000;

/// Sum over family members (drawn from the admissible window) of the product
/// of inclusion probabilities over the member's distinct elements.
double expectation_exact(ExpKind kind, const ModelParams& params, const Poly& target);

/// Sum over ordered pairs of distinct intersecting members of the probability
/// that both lie in the sample. kind must be Qn or Rn.
double delta_exact(ExpKind kind, const ModelParams& params, const Poly& target);

/// Count of the family in a concrete sample, matching expectation_exact.
std::uint64_t sample_count(ExpKind kind, const OmegaSample& w, const Poly& target);

struct ExpectationReport {
    double mu = 0;
    double delta = 0;
    std::optional<double> mc_mean;
    std::optional<double> mc_stderr;
};

/// Exact expectation plus a Monte-Carlo mean over seeds params.seed .. params.seed + trials - 1.
/// delta is filled for Qn and Rn.
ExpectationReport expectation_report(ExpKind kind, const ModelParams& params, const Poly& target, int trials);

struct JansonReport {
    double mu = 0;
    double delta = 0;
    double p_hat = 0;
    double bound = 0;  // exp(-mu / 16)
    double slack = 0;  // 3 sqrt(p_hat (1 - p_hat) / trials)
    int trials = 0;
    bool holds() const { return p_hat <= bound + slack; }
};

/// Empirical P(|Q_n(w)| <= mu / 2) against exp(-mu / 16). Throws if delta >= mu
/// or mu = 0.
JansonReport janson_empirical(const ModelParams& params, const Poly& target, int trials);

struct KdsvReport {
    int K = 0;
    int trials = 0;
    std::uint64_t hits = 0;
    double frequency = 0;
    double stderr_ = 0;
    double bound = 0;  // sum over targets of E|F|^K / K!
    bool holds() const { return frequency <= bound + 3 * stderr_; }
};

/// Frequency of samples in which some target's family contains a K-d.s.v.
KdsvReport kdsv_probability_empirical(ExpKind kind, const ModelParams& params, const std::vector<Poly>& targets,
                                      int K, int trials);

/// Members of a family in a sample, as vectors (sets listed in ascending order).
VectorFamily family_vectors(ExpKind kind, const OmegaSample& w, const Poly& target);

}  // namespace fqsl
