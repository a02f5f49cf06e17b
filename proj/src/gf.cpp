#include "fqsl/gf.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace fqsl {

namespace {

constexpr std::uint64_t kPowLimit = std::uint64_t{1} << 62;

// Arithmetic on PrimePoly, kept local: only irreducibility testing needs it.
void trim(PrimePoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

PrimePoly poly_mod(PrimePoly a, const PrimePoly& m, std::uint32_t p) {
    trim(a);
    const std::size_t dm = m.size() - 1;
    const std::uint64_t lead_inv = [&] {
        // m is monic everywhere this is used
        return std::uint64_t{1};
    }();
    while (a.size() > dm) {
        const std::uint64_t c = a.back() * lead_inv % p;
        const std::size_t shift = a.size() - 1 - dm;
        for (std::size_t i = 0; i <= dm; ++i) {
            a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + (p - c) * m[i]) % p);
        }
        trim(a);
    }
    return a;
}

PrimePoly poly_mulmod(const PrimePoly& a, const PrimePoly& b, const PrimePoly& m, std::uint32_t p) {
    if (a.empty() || b.empty()) return {};
    PrimePoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            r[i + j] = static_cast<std::uint32_t>((r[i + j] + std::uint64_t{a[i]} * b[j]) % p);
        }
    }
    return poly_mod(std::move(r), m, p);
}

std::uint64_t inv_mod(std::uint64_t a, std::uint64_t p) {
    std::uint64_t r = 1, e = p - 2;
    a %= p;
    while (e) {
        if (e & 1) r = r * a % p;
        a = a * a % p;
        e >>= 1;
    }
    return r;
}

PrimePoly poly_gcd(PrimePoly a, PrimePoly b, std::uint32_t p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        // make b monic so poly_mod applies
        const std::uint64_t li = inv_mod(b.back(), p);
        for (auto& c : b) c = static_cast<std::uint32_t>(c * li % p);
        PrimePoly r = poly_mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

std::uint64_t checked_pow(std::uint64_t base, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (base != 0 && r > kPowLimit / base) throw FqslError("power exceeds 2^62");
        r *= base;
    }
    return r;
}

bool is_irreducible(std::uint32_t p, const PrimePoly& f_in) {
    PrimePoly f = f_in;
    trim(f);
    if (f.size() < 2) throw FqslError("is_irreducible: degree must be >= 1");
    if (f.back() != 1) throw FqslError("is_irreducible: polynomial must be monic");
    const int n = static_cast<int>(f.size()) - 1;
    if (n == 1) return true;
    // f is irreducible iff gcd(f, t^{p^i} - t) = 1 for 1 <= i <= n/2.
    PrimePoly x = poly_mod(PrimePoly{0, 1}, f, p);
    PrimePoly power = x;
    for (int i = 1; i <= n / 2; ++i) {
        PrimePoly acc{1};
        PrimePoly base = power;
        std::uint64_t e = p;
        while (e) {
            if (e & 1) acc = poly_mulmod(acc, base, f, p);
            base = poly_mulmod(base, base, f, p);
            e >>= 1;
        }
        power = acc;
        PrimePoly diff = power;
        diff.resize(std::max<std::size_t>(diff.size(), 2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        trim(diff);
        if (diff.empty()) return false;
        const PrimePoly g = poly_gcd(f, diff, p);
        if (g.size() > 1) return false;
    }
    return true;
}

FieldCtx::FieldCtx(std::uint32_t p, int h, PrimePoly modulus)
    : p_(p), h_(h), q_(checked_pow(p, h)), modulus_(std::move(modulus)) {}

FieldCtx FieldCtx::create(std::uint32_t p, int h) {
    if (!is_prime(p)) throw FqslError("field_new: " + std::to_string(p) + " is not prime");
    if (h < 1) throw FqslError("field_new: extension degree must be >= 1");
    if (h > kMaxExtension) throw FqslError("field_new: extension degree exceeds " + std::to_string(kMaxExtension));
    if (p > 65521) throw FqslError("field_new: characteristic too large");
    const std::uint64_t count = checked_pow(p, h);
    for (std::uint64_t code = 0; code < count; ++code) {
        PrimePoly f(static_cast<std::size_t>(h) + 1, 0);
        std::uint64_t c = code;
        for (int i = 0; i < h; ++i) {
            f[i] = static_cast<std::uint32_t>(c % p);
            c /= p;
        }
        f[h] = 1;
        if (is_irreducible(p, f)) return FieldCtx(p, h, std::move(f));
    }
    throw FqslError("field_new: no irreducible polynomial found");
}

FieldElem FieldCtx::one() const noexcept {
    FieldElem e;
    e.coords[0] = 1;
    return e;
}

FieldElem FieldCtx::add(const FieldElem& a, const FieldElem& b) const noexcept {
    FieldElem r;
    for (int i = 0; i < h_; ++i) {
        std::uint32_t s = std::uint32_t{a.coords[i]} + b.coords[i];
        if (s >= p_) s -= p_;
        r.coords[i] = static_cast<std::uint16_t>(s);
    }
    return r;
}

FieldElem FieldCtx::neg(const FieldElem& a) const noexcept {
    FieldElem r;
    for (int i = 0; i < h_; ++i) {
        r.coords[i] = static_cast<std::uint16_t>(a.coords[i] == 0 ? 0 : p_ - a.coords[i]);
    }
    return r;
}

FieldElem FieldCtx::sub(const FieldElem& a, const FieldElem& b) const noexcept { return add(a, neg(b)); }

FieldElem FieldCtx::mul(const FieldElem& a, const FieldElem& b) const noexcept {
    std::array<std::uint64_t, 2 * kMaxExtension> prod{};
    for (int i = 0; i < h_; ++i) {
        if (a.coords[i] == 0) continue;
        for (int j = 0; j < h_; ++j) {
            prod[i + j] = (prod[i + j] + std::uint64_t{a.coords[i]} * b.coords[j]) % p_;
        }
    }
    // reduce with the monic modulus: t^h = -(m_0 + ... + m_{h-1} t^{h-1})
    for (int k = 2 * h_ - 2; k >= h_; --k) {
        const std::uint64_t c = prod[k];
        if (c == 0) continue;
        prod[k] = 0;
        for (int i = 0; i < h_; ++i) {
            prod[k - h_ + i] = (prod[k - h_ + i] + (p_ - c) * modulus_[i]) % p_;
        }
    }
    FieldElem r;
    for (int i = 0; i < h_; ++i) r.coords[i] = static_cast<std::uint16_t>(prod[i]);
    return r;
}

FieldElem FieldCtx::pow(FieldElem a, std::uint64_t e) const noexcept {
    FieldElem r = one();
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

FieldElem FieldCtx::inv(const FieldElem& a) const {
    if (is_zero(a)) throw FqslError("fe_inv: zero has no inverse");
    return pow(a, q_ - 2);
}

std::uint64_t FieldCtx::index(const FieldElem& a) const noexcept {
    std::uint64_t idx = 0;
    for (int i = h_ - 1; i >= 0; --i) idx = idx * p_ + a.coords[i];
    return idx;
}

FieldElem FieldCtx::from_index(std::uint64_t idx) const {
    if (idx >= q_) throw FqslError("field element index out of range");
    FieldElem r;
    for (int i = 0; i < h_; ++i) {
        r.coords[i] = static_cast<std::uint16_t>(idx % p_);
        idx /= p_;
    }
    return r;
}

FieldElem FieldCtx::from_coords(std::span<const std::uint32_t> coords) const {
    if (static_cast<int>(coords.size()) > h_) throw FqslError("too many coordinates for field element");
    FieldElem r;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        r.coords[i] = static_cast<std::uint16_t>(coords[i] % p_);
    }
    return r;
}

std::vector<FieldElem> FieldCtx::enumerate() const {
    std::vector<FieldElem> out;
    out.reserve(q_);
    for (std::uint64_t i = 0; i < q_; ++i) out.push_back(from_index(i));
    return out;
}

std::string FieldCtx::to_string(const FieldElem& a) const {
    if (h_ == 1) return std::to_string(a.coords[0]);
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < h_; ++i) {
        if (i) os << ',';
        os << a.coords[i];
    }
    os << ']';
    return os.str();
}

FieldElem FieldCtx::parse(std::string_view text) const {
    auto parse_int = [&](std::string_view s) -> std::int64_t {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
            throw FqslError("bad field element text: '" + std::string(text) + "'");
        }
        return v;
    };
    auto reduce = [&](std::int64_t v) {
        const auto pp = static_cast<std::int64_t>(p_);
        return static_cast<std::uint32_t>(((v % pp) + pp) % pp);
    };
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']') throw FqslError("bad field element text: '" + std::string(text) + "'");
        std::string_view body = text.substr(1, text.size() - 2);
        std::vector<std::uint32_t> coords;
        while (!body.empty()) {
            const auto comma = body.find(',');
            coords.push_back(reduce(parse_int(body.substr(0, comma))));
            if (comma == std::string_view::npos) break;
            body.remove_prefix(comma + 1);
        }
        return from_coords(coords);
    }
    const std::uint32_t c = reduce(parse_int(text));
    return from_coords(std::span<const std::uint32_t>(&c, 1));
}

}  // namespace fqsl
