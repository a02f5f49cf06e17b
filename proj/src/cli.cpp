#include "fqsl/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fqsl/calibration.hpp"
#include "fqsl/combinat.hpp"
#include "fqsl/estimates.hpp"
#include "fqsl/lifting.hpp"
#include "fqsl/parabola.hpp"
#include "fqsl/parallel.hpp"
#include "fqsl/randmodel.hpp"

namespace fqsl {

using nlohmann::json;

// ---- manifest ----

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

json RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["params"] = params;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["version"] = version;
    j["timestamp"] = timestamp;
    j["output_digest"] = output_digest;
    j["inputs"] = inputs;
    return j;
}

RunManifest RunManifest::from_json(const json& j) {
    try {
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.params = j.at("params");
        if (!m.params.is_object()) throw FqslError("manifest params must be an object");
        if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
        m.version = j.value("version", std::string(kArtifactVersion));
        m.timestamp = j.value("timestamp", std::string());
        m.output_digest = j.value("output_digest", std::string());
        if (j.contains("inputs")) m.inputs = j["inputs"].get<std::map<std::string, std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw FqslError(std::string("malformed manifest: ") + e.what());
    }
}

std::vector<std::string> RunManifest::argv() const {
    std::vector<std::string> out;
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    for (const auto& [key, v] : params.items()) {
        if (v.is_boolean()) {
            if (v.get<bool>()) out.push_back("--" + key);
        } else if (v.is_array()) {
            for (const auto& e : v) out.push_back("--" + key + "=" + scalar(e));
        } else if (!v.is_null()) {
            out.push_back("--" + key + "=" + scalar(v));
        }
    }
    return out;
}

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FqslError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FqslError(what + ": " + e.what());
    }
}

// Thrown by a command after its output is complete, to set the exit code.
struct Outcome {
    int code = kExitOk;
    std::string message;
};

// A parsed command: params feed the manifest, run produces the output.
struct Prepared {
    json params = json::object();
    std::optional<std::uint64_t> seed;
    std::map<std::string, std::string> inputs;
    std::function<std::string(Outcome&)> run;
};

std::string lines(const std::vector<json>& rows) {
    std::string s;
    for (const auto& r : rows) s += r.dump() + "\n";
    return s;
}

std::string doc(const json& j) { return j.dump(2) + "\n"; }

// ---- model options shared by sample / expectations / janson-check ----

struct ModelOpts {
    std::uint32_t p = 5;
    int h = 1;
    int N = 4;
    std::string S = "parabola";
    std::string gamma = "7/11";
    int M = 4;
    int D = 8;
    std::string epsilon;
    std::uint64_t seed = 0;

    void add(CLI::App* app) {
        app->add_option("--p", p, "characteristic");
        app->add_option("--h", h, "extension degree");
        app->add_option("--N", N, "residue modulus degree");
        app->add_option("--S", S, "residues: parabola, all, or comma-separated codes in G_N");
        app->add_option("--gamma", gamma, "density exponent a/b");
        app->add_option("--M", M, "degree floor (exclusive)");
        app->add_option("--D", D, "degree cap");
        app->add_option("--epsilon", epsilon, "small-summand ratio a/b");
        app->add_option("--seed", seed);
    }
    void record(json& j) const {
        j["p"] = p;
        j["h"] = h;
        j["N"] = N;
        j["S"] = S;
        j["gamma"] = gamma;
        j["M"] = M;
        j["D"] = D;
        if (!epsilon.empty()) j["epsilon"] = epsilon;
        j["seed"] = seed;
    }
    ModelParams build() const {
        ModelParams m;
        m.ctx = FieldCtx::create(p, h);
        m.N = N;
        m.gamma = parse_rational(gamma);
        m.M = M;
        m.D = D;
        if (!epsilon.empty()) m.epsilon = parse_rational(epsilon);
        m.seed = seed;
        if (N < 1) throw FqslError("N must be positive");
        if (S == "parabola") {
            if (N % 4 != 0) throw FqslError("--S parabola needs N divisible by 4");
            const auto set = build_sidon_in_GN(p, h, N / 4);
            for (const auto& s : set.polys) m.S.push_back(encode(s, N));
        } else if (S == "all") {
            const auto all = enumerate_G(m.ctx, N);
            for (const auto& s : all) m.S.push_back(encode(s, N));
        } else {
            std::stringstream ss(S);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    std::size_t used = 0;
                    m.S.push_back(std::stoull(item, &used));
                    if (used != item.size()) throw std::invalid_argument(item);
                } catch (const std::exception&) {
                    throw FqslError("bad residue code '" + item + "'");
                }
            }
            std::sort(m.S.begin(), m.S.end());
            m.S.erase(std::unique(m.S.begin(), m.S.end()), m.S.end());
        }
        m.validate();
        return m;
    }
};

std::vector<Poly> parse_targets(const FieldCtx& ctx, const std::vector<std::string>& texts) {
    std::vector<Poly> out;
    for (const auto& t : texts) out.push_back(parse_poly(ctx, t));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

json poly_list(const FieldCtx& ctx, const std::vector<Poly>& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back(to_string(ctx, x));
    return a;
}

// Sample files: the output of `sample`, or any object with p, h and members.
OmegaSample load_sample(const std::string& path, const std::string& text) {
    const json j = parse_json(text, path);
    try {
        OmegaSample w;
        auto& m = w.params;
        m.ctx = FieldCtx::create(j.at("p").get<std::uint32_t>(), j.value("h", 1));
        m.N = j.value("N", 1);
        if (j.contains("S_codes")) m.S = j["S_codes"].get<std::vector<std::uint64_t>>();
        if (j.contains("gamma")) m.gamma = parse_rational(j["gamma"].get<std::string>());
        m.M = j.value("M", 0);
        m.D = j.value("D", max_degree(m.ctx));
        if (j.contains("epsilon") && !j["epsilon"].is_null()) m.epsilon = parse_rational(j["epsilon"].get<std::string>());
        m.seed = j.value("seed", std::uint64_t{0});
        std::vector<Poly> xs;
        for (const auto& s : j.at("members")) xs.push_back(parse_poly(m.ctx, s.get<std::string>()));
        w.members = make_set(xs);
        if (w.members.size() != xs.size()) throw FqslError(path + ": duplicate members");
        return w;
    } catch (const json::exception& e) {
        throw FqslError(path + ": " + e.what());
    }
}

// ---- commands ----

void cmd_construct(CLI::App* app, Prepared& prep) {
    auto o = std::make_shared<std::tuple<std::uint32_t, int, int, bool, bool, std::string>>(5, 1, 1, false, false, "product");
    auto& [p, h, M0, b3, b4, ambient] = *o;
    app->add_option("p,--p", p, "characteristic (prime > 3)")->required();
    app->add_option("h,--h", h, "extension degree")->required();
    app->add_option("M0,--M0", M0, "F_{q'} has q' = q^{2 M0}")->required();
    app->add_flag("--verify-basis3", b3);
    app->add_flag("--verify-basis4", b4);
    app->add_option("--ambient", ambient)->check(CLI::IsMember({"product", "GN"}));
    app->callback([o, &prep] {
        auto& [p, h, M0, b3, b4, ambient] = *o;
        prep.params = {{"p", p}, {"h", h}, {"M0", M0}, {"verify-basis3", b3}, {"verify-basis4", b4}, {"ambient", ambient}};
        const auto ctx = ParabolaCtx::create(p, h, M0);
        prep.run = [o, ctx](Outcome& oc) {
            auto& [p, h, M0, b3, b4, ambient] = *o;
            json j;
            j["p"] = p;
            j["h"] = h;
            j["M0"] = M0;
            j["q_prime"] = ctx.q_prime();
            j["ambient"] = ambient;
            const bool gn = ambient == "GN";
            const SidonSet S = gn ? build_sidon_in_GN(p, h, M0) : build_parabola(ctx);
            j["size"] = S.size();
            json els = json::array();
            if (gn) {
                j["N"] = S.N;
                for (const auto& x : S.polys) els.push_back(encode(x, S.N));
            } else {
                for (const auto& [x, y] : S.pairs) els.push_back({S.field.to_string(x), S.field.to_string(y)});
            }
            j["elements"] = els;
            const auto sid = verify_sidon(S);
            j["sidon"] = {{"max_multiplicity", sid.max_multiplicity}, {"is_sidon", sid.is_sidon()}};
            bool ok = sid.is_sidon();
            auto basis = [&](const BasisReport& r) {
                ok = ok && r.verified();
                return json{{"min_reps", r.min_reps},
                            {"targets", r.targets},
                            {"failing", gn ? r.failing_polys.size() : r.failing_targets.size()},
                            {"exhaustive", r.exhaustive},
                            {"verified", r.verified()}};
            };
            if (b3) j["basis3"] = basis(gn ? verify_basis3_in_GN(S) : verify_basis3_distinct(ctx));
            if (b4) j["basis4"] = basis(verify_basis4_distinct(ctx));
            if (!ok) oc = {kExitCheckFailed, "verification failed"};
            return doc(j);
        };
    });
}

void cmd_sample(CLI::App* app, Prepared& prep) {
    auto o = std::make_shared<ModelOpts>();
    o->add(app);
    app->callback([o, &prep] {
        o->record(prep.params);
        prep.seed = o->seed;
        const ModelParams m = o->build();
        prep.run = [o, m](Outcome&) {
            const auto w = sample_omega(m);
            json j;
            o->record(j);
            j["S_codes"] = m.S;
            j["expected_size"] = expected_size(m);
            j["size"] = w.members.size();
            j["members"] = poly_list(m.ctx, w.members);
            return doc(j);
        };
    });
}

void cmd_lift(CLI::App* app, Prepared& prep) {
    auto o = std::make_shared<std::tuple<std::string, std::string, bool, int>>("b22", "", false, 11);
    auto& [mode, in, ineq, max_deg] = *o;
    app->add_option("--mode", mode)->check(CLI::IsMember({"b22", "sidon"}));
    app->add_option("--in", in, "sample JSON")->required();
    app->add_flag("--inequalities", ineq, "also check the lifting inequalities for every target up to --max-deg");
    app->add_option("--max-deg", max_deg);
    app->callback([o, &prep] {
        auto& [mode, in, ineq, max_deg] = *o;
        prep.params = {{"mode", mode}, {"in", in}, {"inequalities", ineq}, {"max-deg", max_deg}};
        const std::string text = read_file(in);
        prep.inputs[in] = "sha256:" + sha256_hex(text);
        const OmegaSample w = load_sample(in, text);
        const LiftMode lm = parse_lift_mode(mode);
        prep.run = [o, w, lm](Outcome& oc) {
            const auto& ctx = w.params.ctx;
            const auto rep = lift(w.members, lm);
            json j;
            j["mode"] = lift_mode_name(lm);
            j["input_size"] = w.members.size();
            j["removed"] = poly_list(ctx, rep.removed);
            j["survivors"] = poly_list(ctx, rep.survivors);
            json wit = json::array();
            for (const auto& [x, t] : rep.witnesses) wit.push_back({{"element", to_string(ctx, x)}, {"tuple", poly_list(ctx, t)}});
            j["witnesses"] = wit;
            j["survivors_ok"] = rep.survivors_ok;
            bool ok = rep.survivors_ok;
            if (std::get<2>(*o)) {
                const auto iq = verify_lift_inequalities_all(w, std::get<3>(*o));
                json rows = json::array();
                for (const auto& r : iq.rows) {
                    rows.push_back({{"target", to_string(ctx, r.n)},
                                    {"family", r.sidon ? "R" : "Q"},
                                    {"lifted", r.lifted},
                                    {"count", r.count},
                                    {"penalty", r.penalty},
                                    {"holds", r.holds()}});
                }
                j["inequalities"] = {{"rows", rows}, {"violations", iq.violations}};
                ok = ok && iq.all_hold();
            }
            if (!ok) oc = {kExitCheckFailed, "lifting check failed"};
            return doc(j);
        };
    });
}

void cmd_count(CLI::App* app, Prepared& prep) {
    auto o = std::make_shared<std::tuple<std::string, std::string, std::vector<std::string>, bool, std::string>>(
        "", "Qn", std::vector<std::string>{}, false, "");
    auto& [in, kind, targets, all, epsilon] = *o;
    app->add_option("--in", in, "sample JSON")->required();
    app->add_option("--kind", kind, "Qn, Tn, Rn, Bn, U, V, W, U', V'");
    app->add_option("--target", targets, "target polynomial (repeatable)");
    app->add_flag("--all", all, "every target with a nonempty Q_n (Qn/Tn) or R_n (Rn/Bn)");
    app->add_option("--epsilon", epsilon, "override the sample's epsilon");
    app->callback([o, &prep] {
        auto& [in, kind, targets, all, epsilon] = *o;
        prep.params = {{"in", in}, {"kind", kind}, {"target", targets}, {"all", all}};
        if (!epsilon.empty()) prep.params["epsilon"] = epsilon;
        const std::string text = read_file(in);
        prep.inputs[in] = "sha256:" + sha256_hex(text);
        OmegaSample w = load_sample(in, text);
        if (!epsilon.empty()) w.params.epsilon = parse_rational(epsilon);
        const ExpKind k = parse_exp_kind(kind);
        const bool rb = k == ExpKind::Rn || k == ExpKind::Bn;
        if (rb && !w.params.epsilon) throw FqslError("Rn/Bn need an epsilon");
        if (all == !targets.empty()) throw FqslError("give either --all or at least one --target");
        if (all && k != ExpKind::Qn && k != ExpKind::Tn && !rb) throw FqslError("--all is for Qn, Tn, Rn and Bn");
        const auto ts = parse_targets(w.params.ctx, targets);
        if (rb) {
            for (const auto& t : ts)
                if (t.is_zero()) throw FqslError("R_n needs n != 0");
        }
        prep.run = [w, k, ts, all = all, rb](Outcome&) {
            const auto& ctx = w.params.ctx;
            std::vector<json> rows;
            if (all && !rb) {
                for (const auto& r : qt_all_targets(w.members, w.params.N))
                    rows.push_back({{"target", to_string(ctx, r.n)}, {"Qn", r.Q}, {"Tn", r.T}});
            } else if (all) {
                for (const auto& r : rb_all_targets(w.members, w.params.N, *w.params.epsilon))
                    rows.push_back({{"target", to_string(ctx, r.n)}, {"Rn", r.R}, {"Bn", r.B}});
            } else {
                for (const auto& t : ts)
                    rows.push_back({{"target", to_string(ctx, t)}, {"kind", exp_kind_name(k)}, {"count", sample_count(k, w, t)}});
            }
            return lines(rows);
        };
    });
}

void cmd_sums(CLI::App* app, Prepared& prep) {
    struct Opts {
        std::string lemma = "basic1";
        std::uint32_t p = 5;
        int h = 1;
        std::string alpha = "7/11", beta = "7/11";
        int M = -1;
        int D_eval = 64;
        int deg_min = 1, deg_max = 8;
        std::string calibration;
        std::string n;  // sigma mode
        int D = 8;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--lemma", o->lemma, "basic1, basic2, basic2-a0, basic3, or sigma");
    app->add_option("--p", o->p);
    app->add_option("--h", o->h);
    app->add_option("--alpha,--gamma,--phi", o->alpha);
    app->add_option("--beta,--kappa", o->beta);
    app->add_option("--M", o->M);
    app->add_option("--D-eval", o->D_eval);
    app->add_option("--deg-min", o->deg_min);
    app->add_option("--deg-max", o->deg_max);
    app->add_option("--calibration", o->calibration, "pinned constants; sets the exit status");
    app->add_option("--n", o->n, "sigma mode: the target polynomial");
    app->add_option("--D", o->D, "sigma mode: the degree cap");
    app->callback([o, &prep] {
        prep.params = {{"lemma", o->lemma}, {"p", o->p}, {"h", o->h}, {"alpha", o->alpha}, {"beta", o->beta}, {"M", o->M}};
        const FieldCtx ctx = FieldCtx::create(o->p, o->h);
        if (o->lemma == "sigma") {
            prep.params["n"] = o->n;
            prep.params["D"] = o->D;
            SigmaQuery qy{ctx, parse_rational(o->alpha), parse_rational(o->beta), parse_poly(ctx, o->n), o->M, o->D};
            prep.run = [qy](Outcome&) {
                const double d = sigma_direct(qy), c = sigma_closed(qy);
                return lines({{{"direct", d}, {"closed", c}, {"relative_gap", std::abs(d - c) / std::max(std::abs(d), 1e-300)}}});
            };
            return;
        }
        prep.params["D-eval"] = o->D_eval;
        prep.params["deg-min"] = o->deg_min;
        prep.params["deg-max"] = o->deg_max;
        const Lemma l = parse_lemma(o->lemma);
        LemmaParams lp{ctx, parse_rational(o->alpha), parse_rational(o->beta), o->M, o->D_eval};
        std::optional<double> pinned;
        if (!o->calibration.empty()) {
            prep.params["calibration"] = o->calibration;
            const std::string text = read_file(o->calibration);
            prep.inputs[o->calibration] = "sha256:" + sha256_hex(text);
            pinned = pinned_constant(load_calibration(o->calibration), l);
        }
        prep.run = [o, l, lp, pinned](Outcome& oc) {
            const auto rows = check_basic_lemma(l, lp, o->deg_min, o->deg_max);
            std::vector<json> out;
            double mx = 0;
            for (const auto& r : rows) {
                out.push_back({{"lemma", lemma_name(r.lemma)},
                               {"degree", r.degree},
                               {"point", r.point},
                               {"quantity", r.quantity},
                               {"bound_expr", r.bound_expr},
                               {"ratio", r.ratio},
                               {"tail_estimate", r.tail_estimate}});
                mx = std::max(mx, r.ratio);
            }
            json summary{{"summary", true}, {"lemma", lemma_name(l)}, {"max_ratio", mx}};
            if (pinned) {
                const auto st = judge_sweep(rows, *pinned);
                summary["pinned"] = *pinned;
                summary["status"] = status_name(st);
                if (st == CheckStatus::Fail) oc = {kExitCheckFailed, "ratio above the pinned constant"};
                if (st == CheckStatus::Inconclusive) oc = {kExitInconclusive, "tail too large for a verdict"};
            }
            out.push_back(summary);
            return lines(out);
        };
    });
}

void cmd_expectations(CLI::App* app, Prepared& prep) {
    auto o = std::make_shared<std::tuple<ModelOpts, std::string, std::vector<std::string>, int>>(
        ModelOpts{}, "Qn", std::vector<std::string>{}, 0);
    auto& [mo, kind, targets, trials] = *o;
    mo.add(app);
    app->add_option("--kind", kind);
    app->add_option("--target", targets, "target polynomial (repeatable)")->required();
    app->add_option("--trials", trials, "Monte-Carlo samples (0 = none)");
    app->callback([o, &prep] {
        auto& [mo, kind, targets, trials] = *o;
        mo.record(prep.params);
        prep.params["kind"] = kind;
        prep.params["target"] = targets;
        prep.params["trials"] = trials;
        prep.seed = mo.seed;
        const ModelParams m = mo.build();
        const ExpKind k = parse_exp_kind(kind);
        if (trials < 0) throw FqslError("trials must be >= 0");
        const auto ts = parse_targets(m.ctx, targets);
        prep.run = [m, k, ts, trials = trials](Outcome&) {
            std::vector<json> rows;
            for (const auto& t : ts) {
                const auto rep = expectation_report(k, m, t, trials);
                json r{{"kind", exp_kind_name(k)}, {"target", to_string(m.ctx, t)}, {"mu", rep.mu}};
                if (k == ExpKind::Qn || k == ExpKind::Rn) r["delta"] = rep.delta;
                if (rep.mc_mean) {
                    r["mc_mean"] = *rep.mc_mean;
                    r["mc_stderr"] = *rep.mc_stderr;
                }
                rows.push_back(r);
            }
            return lines(rows);
        };
    });
}

void cmd_janson(CLI::App* app, Prepared& prep) {
    auto o = std::make_shared<std::tuple<ModelOpts, std::string, int>>(ModelOpts{}, "", 2000);
    auto& [mo, target, trials] = *o;
    mo.add(app);
    app->add_option("--target", target)->required();
    app->add_option("--trials", trials);
    app->callback([o, &prep] {
        auto& [mo, target, trials] = *o;
        mo.record(prep.params);
        prep.params["target"] = target;
        prep.params["trials"] = trials;
        prep.seed = mo.seed;
        const ModelParams m = mo.build();
        const Poly n = parse_poly(m.ctx, target);
        if (trials < 1) throw FqslError("trials must be positive");
        prep.run = [m, n, trials = trials](Outcome& oc) {
            const auto r = janson_empirical(m, n, trials);
            json j{{"target", to_string(m.ctx, n)}, {"mu", r.mu},         {"delta", r.delta}, {"p_hat", r.p_hat},
                   {"bound", r.bound},               {"slack", r.slack},   {"trials", r.trials}, {"holds", r.holds()}};
            if (!r.holds()) oc = {kExitCheckFailed, "empirical probability above the bound"};
            return doc(j);
        };
    });
}

void cmd_calibrate(CLI::App* app, Prepared& prep) {
    auto o = std::make_shared<std::pair<std::string, std::string>>();
    app->add_option("--write", o->first, "store the fitted constants here");
    app->add_option("--check", o->second, "judge every sweep against these pinned constants");
    app->callback([o, &prep] {
        if (!o->first.empty()) prep.params["write"] = o->first;
        std::optional<Calibration> pinned;
        if (!o->second.empty()) {
            prep.params["check"] = o->second;
            prep.inputs[o->second] = "sha256:" + sha256_hex(read_file(o->second));
            pinned = load_calibration(o->second);
        }
        prep.run = [o, pinned](Outcome& oc) {
            json j;
            json lemmas = json::object();
            Calibration fitted;
            bool failed = false, inconclusive = false;
            for (auto l : {Lemma::Basic1, Lemma::Basic2, Lemma::Basic2Zero, Lemma::Basic3}) {
                const auto lp = calibration_params(l);
                const auto rows = check_basic_lemma(l, lp, kCalibrationDegLo, kCalibrationDegHi);
                double mx = 0, tail = 0;
                for (const auto& r : rows) {
                    mx = std::max(mx, r.ratio);
                    tail = std::max(tail, r.tail_estimate);
                }
                const std::string name = lemma_name(l);
                fitted[name] = round_up_3sig(mx);
                json e{{"max_ratio", mx}, {"constant", fitted[name]}, {"max_tail", tail}, {"M", lp.M}, {"D_eval", lp.D_eval}};
                if (pinned) {
                    const auto st = judge_sweep(rows, pinned_constant(*pinned, l));
                    e["status"] = status_name(st);
                    failed |= st == CheckStatus::Fail;
                    inconclusive |= st == CheckStatus::Inconclusive;
                }
                lemmas[name] = e;
            }
            j["q"] = 5;
            j["exponents"] = "7/11";
            j["degrees"] = {kCalibrationDegLo, kCalibrationDegHi};
            j["lemmas"] = lemmas;
            if (!o->first.empty()) save_calibration(fitted, o->first);
            if (failed) oc = {kExitCheckFailed, "a sweep exceeds its pinned constant"};
            else if (inconclusive) oc = {kExitInconclusive, "a tail is too large for a verdict"};
            return doc(j);
        };
    });
}

struct ThreadGuard {
    int saved = thread_count();
    ~ThreadGuard() { set_thread_count(saved); }
};

CliResult execute_impl(std::span<const std::string> args, int depth);

void cmd_replay(CLI::App* app, Prepared& prep, int depth, std::optional<RunManifest>& inner) {
    auto path = std::make_shared<std::string>();
    app->add_option("path", *path, "manifest JSON")->required();
    app->callback([path, &prep, depth, &inner] {
        if (depth > 0) throw FqslError("replay of a replay");
        const RunManifest m = RunManifest::from_json(parse_json(read_file(*path), *path));
        if (m.command == "replay") throw FqslError("replay of a replay");
        for (const auto& [file, digest] : m.inputs) {
            if ("sha256:" + sha256_hex(read_file(file)) != digest) throw FqslError("input " + file + " changed since the run");
        }
        prep.run = [m, depth, &inner](Outcome& oc) {
            std::vector<std::string> argv{m.command};
            for (auto& a : m.argv()) argv.push_back(std::move(a));
            CliResult r = execute_impl(argv, depth + 1);
            inner = r.manifest;
            if (r.exit_code == kExitValidation) throw FqslError("replayed command rejected: " + r.diagnostics);
            const std::string digest = "sha256:" + sha256_hex(r.output);
            if (digest != m.output_digest) {
                oc = {kExitCheckFailed, "digest mismatch: recorded " + m.output_digest + ", replayed " + digest};
            } else if (r.exit_code != kExitOk) {
                oc = {r.exit_code, r.diagnostics};
            }
            return r.output;
        };
    });
}

CliResult execute_impl(std::span<const std::string> args, int depth) {
    CliResult res;
    CLI::App app{"Experiments on Sidon sets and additive bases in F_q[t]", "fqsl"};
    app.set_help_flag("--help", "print help");  // -h would clash with the extension degree
    app.require_subcommand(1, 1);
    int threads = 0;
    std::string out_path, manifest_path;
    app.add_option("--threads", threads, "worker cap (default: FQSL_THREADS or all cores)")->check(CLI::PositiveNumber);
    app.add_option("--out", out_path, "write the output here instead of stdout");
    app.add_option("--manifest", manifest_path, "write the run manifest here instead of stderr");

    Prepared prep;
    std::optional<RunManifest> inner;
    const std::pair<const char*, const char*> cmds[] = {
        {"construct", "build and verify the parabola Sidon set"},
        {"sample", "draw a random set"},
        {"lift", "remove B2[2] or Sidon violations from a sample"},
        {"count", "count representation families in a sample"},
        {"sums", "lemma ratio sweeps and the convolution-sum oracle"},
        {"expectations", "exact expectations with optional Monte-Carlo check"},
        {"janson-check", "empirical lower-tail probability of |Q_n|"},
        {"calibrate", "fit or check the pinned lemma constants"},
        {"replay", "rerun a command from its manifest and compare digests"},
    };
    for (const auto& [name, help] : cmds) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->set_help_flag("--help", "print help");
        sub->fallthrough();
        const std::string n = name;
        if (n == "construct") cmd_construct(sub, prep);
        else if (n == "sample") cmd_sample(sub, prep);
        else if (n == "lift") cmd_lift(sub, prep);
        else if (n == "count") cmd_count(sub, prep);
        else if (n == "sums") cmd_sums(sub, prep);
        else if (n == "expectations") cmd_expectations(sub, prep);
        else if (n == "janson-check") cmd_janson(sub, prep);
        else if (n == "calibrate") cmd_calibrate(sub, prep);
        else cmd_replay(sub, prep, depth, inner);
    }

    ThreadGuard guard;
    std::string command;
    try {
        // CLI11 consumes the arguments from the back
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
        command = app.get_subcommands().front()->get_name();
    } catch (const CLI::CallForHelp& e) {
        std::ostringstream os;
        app.exit(e, os, os);
        res.output = os.str();
        return res;
    } catch (const CLI::CallForAllHelp& e) {
        std::ostringstream os;
        app.exit(e, os, os);
        res.output = os.str();
        return res;
    } catch (const CLI::ParseError& e) {
        res.exit_code = kExitValidation;
        res.diagnostics = e.what();
        return res;
    } catch (const std::exception& e) {
        res.exit_code = kExitValidation;
        res.diagnostics = e.what();
        return res;
    }
    if (threads > 0) set_thread_count(threads);

    Outcome oc;
    try {
        res.output = prep.run(oc);
    } catch (const std::exception& e) {
        res.exit_code = kExitValidation;
        res.diagnostics = e.what();
        res.output.clear();
        return res;
    }
    res.exit_code = oc.code;
    res.diagnostics = oc.message;
    if (command == "replay") {
        res.manifest = inner;
        if (res.manifest) res.manifest->timestamp = utc_now();
        return res;
    }
    RunManifest m;
    m.command = command;
    m.params = prep.params;
    m.seed = prep.seed;
    m.timestamp = utc_now();
    m.output_digest = "sha256:" + sha256_hex(res.output);
    m.inputs = prep.inputs;
    res.manifest = m;
    return res;
}

// Global options that only matter to run_cli.
std::pair<std::string, std::string> output_targets(std::span<const std::string> args) {
    std::string out, manifest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        auto take = [&](const std::string& flag, std::string& dst) {
            if (a == flag && i + 1 < args.size()) dst = args[i + 1];
            if (a.rfind(flag + "=", 0) == 0) dst = a.substr(flag.size() + 1);
        };
        take("--out", out);
        take("--manifest", manifest);
    }
    return {out, manifest};
}

}  // namespace

CliResult execute(std::span<const std::string> args) { return execute_impl(args, 0); }

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    const CliResult r = execute(args);
    if (r.exit_code == kExitValidation) {
        err << "error: " << r.diagnostics << "\n";
        return r.exit_code;
    }
    const auto [out_path, manifest_path] = output_targets(args);
    try {
        if (out_path.empty()) {
            out << r.output;
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw FqslError("cannot write " + out_path);
            f << r.output;
        }
        if (r.manifest) {
            const std::string text = r.manifest->to_json().dump();
            if (manifest_path.empty()) {
                err << text << "\n";
            } else {
                std::ofstream f(manifest_path);
                if (!f) throw FqslError("cannot write " + manifest_path);
                f << r.manifest->to_json().dump(2) << "\n";
            }
        }
    } catch (const FqslError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    if (!r.diagnostics.empty()) err << r.diagnostics << "\n";
    return r.exit_code;
}

}  // namespace fqsl
