#include "fqsl/parabola.hpp"

#include <unordered_map>

#include "fqsl/parallel.hpp"

namespace fqsl {

namespace {

// Index-level tables for a small field: elements are their canonical indices.
struct FieldTables {
    std::uint32_t q = 0;
    std::vector<std::uint32_t> add;  // q * q
    std::vector<std::uint32_t> neg;
    std::vector<std::uint32_t> sq;

    explicit FieldTables(const FieldCtx& f) {
        if (f.q() > 4096) throw FqslError("field too large for exhaustive tables");
        q = static_cast<std::uint32_t>(f.q());
        const auto elems = f.enumerate();
        add.resize(std::size_t{q} * q);
        neg.resize(q);
        sq.resize(q);
        for (std::uint32_t i = 0; i < q; ++i) {
            neg[i] = static_cast<std::uint32_t>(f.index(f.neg(elems[i])));
            sq[i] = static_cast<std::uint32_t>(f.index(f.mul(elems[i], elems[i])));
            for (std::uint32_t j = 0; j < q; ++j) {
                add[std::size_t{i} * q + j] = static_cast<std::uint32_t>(f.index(f.add(elems[i], elems[j])));
            }
        }
    }
    std::uint32_t plus(std::uint32_t a, std::uint32_t b) const noexcept { return add[std::size_t{a} * q + b]; }
    std::uint32_t minus(std::uint32_t a, std::uint32_t b) const noexcept { return plus(a, neg[b]); }
};

}  // namespace

ParabolaCtx ParabolaCtx::create(std::uint32_t p, int h, int M0) {
    if (!is_prime(p)) throw FqslError("parabola: " + std::to_string(p) + " is not prime");
    if (p <= 3) throw FqslError("parabola: characteristic must exceed 3");
    if (h < 1 || M0 < 1) throw FqslError("parabola: h and M0 must be >= 1");
    if (2 * h * M0 > kMaxExtension) throw FqslError("parabola: 2*h*M0 exceeds the supported extension degree");
    ParabolaCtx ctx;
    ctx.base = FieldCtx::create(p, h);
    ctx.M0 = M0;
    ctx.prime_ctx = FieldCtx::create(p, 2 * h * M0);
    return ctx;
}

SidonSet build_parabola(const FieldCtx& field) {
    SidonSet S;
    S.ambient = SidonSet::Ambient::Product;
    S.field = field;
    for (const auto& x : field.enumerate()) S.pairs.emplace_back(x, field.mul(x, x));
    return S;
}

SidonSet build_parabola(const ParabolaCtx& ctx) { return build_parabola(ctx.prime_ctx); }

std::uint64_t rep_diff_count(const SidonSet& S, const FieldPair& e) {
    if (S.ambient != SidonSet::Ambient::Product) throw FqslError("rep_diff_count: set lives in G_N");
    const FieldCtx& f = S.field;
    std::unordered_map<std::uint64_t, std::uint64_t> index;
    auto key = [&](const FieldPair& a) { return f.index(a.first) * f.q() + f.index(a.second); };
    for (const auto& a : S.pairs) ++index[key(a)];
    std::uint64_t count = 0;
    for (const auto& a : S.pairs) {
        // a - a' = e  <=>  a' = a - e
        const FieldPair target{f.sub(a.first, e.first), f.sub(a.second, e.second)};
        const auto it = index.find(key(target));
        if (it != index.end()) count += it->second;
    }
    return count;
}

std::uint64_t rep_diff_count(const SidonSet& S, const Poly& e) {
    if (S.ambient != SidonSet::Ambient::GN) throw FqslError("rep_diff_count: set lives in a product of fields");
    std::unordered_map<Poly, std::uint64_t, PolyHash> index;
    for (const auto& a : S.polys) ++index[a];
    std::uint64_t count = 0;
    for (const auto& a : S.polys) {
        const auto it = index.find(p_sub(a, e));
        if (it != index.end()) count += it->second;
    }
    return count;
}

SidonReport verify_sidon(const SidonSet& S) {
    SidonReport rep;
    const std::size_t n = S.size();
    if (S.ambient == SidonSet::Ambient::Product) {
        const FieldTables t(S.field);
        const std::size_t cells = std::size_t{t.q} * t.q;
        std::vector<std::uint64_t> hist(cells, 0);
        std::vector<std::pair<std::size_t, std::size_t>> first(cells);
        std::vector<std::uint32_t> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = static_cast<std::uint32_t>(S.field.index(S.pairs[i].first));
            ys[i] = static_cast<std::uint32_t>(S.field.index(S.pairs[i].second));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t cell = std::size_t{t.minus(xs[i], xs[j])} * t.q + t.minus(ys[i], ys[j]);
                if (cell == 0) continue;
                if (hist[cell] == 0) first[cell] = {i, j};
                if (++hist[cell] > rep.max_multiplicity) {
                    rep.max_multiplicity = hist[cell];
                    if (hist[cell] == 2) rep.witness = std::array<std::size_t, 4>{first[cell].first, first[cell].second, i, j};
                }
            }
        }
        return rep;
    }
    std::unordered_map<Poly, std::pair<std::uint64_t, std::pair<std::size_t, std::size_t>>, PolyHash> hist;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Poly d = p_sub(S.polys[i], S.polys[j]);
            if (d.is_zero()) continue;
            auto& slot = hist[d];
            if (slot.first == 0) slot.second = {i, j};
            if (++slot.first > rep.max_multiplicity) {
                rep.max_multiplicity = slot.first;
                if (slot.first == 2) rep.witness = std::array<std::size_t, 4>{slot.second.first, slot.second.second, i, j};
            }
        }
    }
    return rep;
}

SystemCount count_system_solutions(const ParabolaCtx& ctx, const FieldElem& a, const FieldElem& b) {
    const FieldTables t(ctx.prime_ctx);
    const auto ai = static_cast<std::uint32_t>(ctx.prime_ctx.index(a));
    const auto bi = static_cast<std::uint32_t>(ctx.prime_ctx.index(b));
    SystemCount c;
    for (std::uint32_t x = 0; x < t.q; ++x) {
        for (std::uint32_t y = 0; y < t.q; ++y) {
            const std::uint32_t z = t.minus(t.minus(ai, x), y);
            if (t.plus(t.plus(t.sq[x], t.sq[y]), t.sq[z]) != bi) continue;
            ++c.total;
            const bool distinct = x != y && y != z && x != z;
            const bool zero = x == 0 || y == 0 || z == 0;
            if (distinct) ++c.distinct_coords;
            if (zero) ++c.with_zero_coord;
            if (distinct && !zero) ++c.distinct_nonzero;
        }
    }
    c.repeated_coords = c.total - c.distinct_coords;
    return c;
}

std::vector<SystemCount> system_count_table(const ParabolaCtx& ctx) {
    const FieldTables t(ctx.prime_ctx);
    const std::size_t q = t.q;
    // one histogram pass over all (x, y, z); chunked over x
    const auto parts = map_chunks<std::vector<SystemCount>>(q, 8, [&](std::size_t lo, std::size_t hi) {
        std::vector<SystemCount> local(q * q);
        for (std::size_t x = lo; x < hi; ++x) {
            for (std::uint32_t y = 0; y < q; ++y) {
                const std::uint32_t sxy = t.plus(static_cast<std::uint32_t>(x), y);
                const std::uint32_t qxy = t.plus(t.sq[x], t.sq[y]);
                for (std::uint32_t z = 0; z < q; ++z) {
                    auto& c = local[std::size_t{t.plus(sxy, z)} * q + t.plus(qxy, t.sq[z])];
                    ++c.total;
                    const bool distinct = x != y && y != z && x != z;
                    const bool zero = x == 0 || y == 0 || z == 0;
                    if (distinct) ++c.distinct_coords;
                    if (zero) ++c.with_zero_coord;
                    if (distinct && !zero) ++c.distinct_nonzero;
                }
            }
        }
        return local;
    });
    std::vector<SystemCount> table(q * q);
    for (const auto& part : parts) {
        for (std::size_t i = 0; i < table.size(); ++i) {
            table[i].total += part[i].total;
            table[i].distinct_coords += part[i].distinct_coords;
            table[i].with_zero_coord += part[i].with_zero_coord;
            table[i].distinct_nonzero += part[i].distinct_nonzero;
        }
    }
    for (auto& c : table) c.repeated_coords = c.total - c.distinct_coords;
    return table;
}

BasisReport verify_basis3_distinct(const ParabolaCtx& ctx) {
    const auto table = system_count_table(ctx);
    const std::uint64_t q = ctx.q_prime();
    BasisReport rep;
    rep.targets = table.size();
    rep.min_reps = UINT64_MAX;
    for (std::size_t g = 0; g < table.size(); ++g) {
        rep.min_reps = std::min(rep.min_reps, table[g].distinct_coords);
        if (table[g].distinct_coords == 0) {
            rep.failing_targets.emplace_back(ctx.prime_ctx.from_index(g / q), ctx.prime_ctx.from_index(g % q));
        }
    }
    return rep;
}

BasisReport verify_basis4_distinct(const ParabolaCtx& ctx) {
    const auto table = system_count_table(ctx);
    const std::uint64_t q = ctx.q_prime();
    BasisReport rep;
    rep.targets = table.size();
    rep.device_min = UINT64_MAX;
    for (const auto& c : table) rep.device_min = std::min(rep.device_min, c.distinct_nonzero);
    std::vector<std::uint64_t> counts;
    if (q <= kBasis4ExhaustiveLimit) {
        const FieldTables t(ctx.prime_ctx);
        const auto parts = map_chunks<std::vector<std::uint64_t>>(q, 4, [&](std::size_t lo, std::size_t hi) {
            std::vector<std::uint64_t> local(q * q, 0);
            for (std::size_t i = lo; i < hi; ++i) {
                const auto xi = static_cast<std::uint32_t>(i);
                for (std::uint32_t j = xi + 1; j < q; ++j) {
                    const std::uint32_t a2 = t.plus(xi, j), b2 = t.plus(t.sq[xi], t.sq[j]);
                    for (std::uint32_t k = j + 1; k < q; ++k) {
                        const std::uint32_t a3 = t.plus(a2, k), b3 = t.plus(b2, t.sq[k]);
                        for (std::uint32_t l = k + 1; l < q; ++l) {
                            ++local[std::size_t{t.plus(a3, l)} * q + t.plus(b3, t.sq[l])];
                        }
                    }
                }
            }
            return local;
        });
        counts.assign(q * q, 0);
        for (const auto& part : parts) {
            for (std::size_t g = 0; g < counts.size(); ++g) counts[g] += part[g];
        }
    } else {
        rep.exhaustive = false;
        // each ordered distinct nonzero triple for g, plus (0,0), is a 4-set; 6 orders per set
        counts.resize(q * q);
        for (std::size_t g = 0; g < counts.size(); ++g) counts[g] = table[g].distinct_nonzero / 6;
    }
    rep.min_reps = UINT64_MAX;
    for (std::size_t g = 0; g < counts.size(); ++g) {
        rep.min_reps = std::min(rep.min_reps, counts[g]);
        if (counts[g] == 0) {
            rep.failing_targets.emplace_back(ctx.prime_ctx.from_index(g / q), ctx.prime_ctx.from_index(g % q));
        }
    }
    return rep;
}

DeviationTable deviation_table(const ParabolaCtx& ctx) {
    const auto table = system_count_table(ctx);
    const auto q = static_cast<std::int64_t>(ctx.q_prime());
    DeviationTable d;
    for (const auto& c : table) {
        const std::int64_t dev = static_cast<std::int64_t>(c.total) - q;
        ++d.histogram[dev];
        d.max_abs_deviation = std::max<std::uint64_t>(d.max_abs_deviation, static_cast<std::uint64_t>(dev < 0 ? -dev : dev));
        d.max_repeated = std::max(d.max_repeated, c.repeated_coords);
    }
    return d;
}

FieldPair iso_to_product(const ParabolaCtx& ctx, const Poly& f) {
    if (f.p != ctx.base.p() || f.h != ctx.base.h()) throw FqslError("iso_to_product: polynomial over a different field");
    if (deg(f) >= 4 * ctx.M0) throw FqslError("iso_to_product: degree must be below 4*M0");
    const int half = 2 * ctx.base.h() * ctx.M0;
    FieldPair e;
    for (int i = 0; i < half; ++i) {
        e.first.coords[i] = static_cast<std::uint16_t>(f.lane(i));
        e.second.coords[i] = static_cast<std::uint16_t>(f.lane(half + i));
    }
    return e;
}

Poly iso_from_product(const ParabolaCtx& ctx, const FieldPair& e) {
    const int half = 2 * ctx.base.h() * ctx.M0;
    Poly f = p_zero(ctx.base);
    if (2 * half > kPolyLanes) throw FqslError("iso_from_product: G_{4 M0} exceeds polynomial capacity");
    for (int i = 0; i < half; ++i) {
        f.set_lane(i, e.first.coords[i]);
        f.set_lane(half + i, e.second.coords[i]);
    }
    return f;
}

SidonSet build_sidon_in_GN(std::uint32_t p, int h, int M0) {
    const ParabolaCtx ctx = ParabolaCtx::create(p, h, M0);
    const SidonSet prod = build_parabola(ctx);
    SidonSet S;
    S.ambient = SidonSet::Ambient::GN;
    S.field = ctx.base;
    S.N = 4 * M0;
    S.polys.reserve(prod.pairs.size());
    for (const auto& e : prod.pairs) S.polys.push_back(iso_from_product(ctx, e));
    return S;
}

BasisReport verify_basis3_in_GN(const SidonSet& S) {
    if (S.ambient != SidonSet::Ambient::GN) throw FqslError("verify_basis3_in_GN: set lives in a product of fields");
    const std::uint64_t targets = checked_pow(S.field.q(), S.N);
    if (targets > 10'000'000) throw FqslError("verify_basis3_in_GN: group too large");
    const std::size_t n = S.polys.size();
    std::vector<std::uint64_t> counts(targets, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Poly sij = p_add(S.polys[i], S.polys[j]);
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                ++counts[encode(add_fast(sij, S.polys[k]), S.N)];
            }
        }
    }
    BasisReport rep;
    rep.targets = targets;
    rep.min_reps = UINT64_MAX;
    for (std::uint64_t g = 0; g < targets; ++g) {
        rep.min_reps = std::min(rep.min_reps, counts[g]);
        if (counts[g] == 0) rep.failing_polys.push_back(decode(S.field, g, S.N));
    }
    return rep;
}

}  // namespace fqsl
