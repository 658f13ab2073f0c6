#include "dcbm/wad.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>

namespace dcbm {

namespace mp = boost::multiprecision;
using int256 = mp::int256_t;
using uint256 = mp::uint256_t;

namespace {

[[noreturn]] void overflow() { throw std::overflow_error("wad: arithmetic overflow"); }

Wad checked(int256 raw) {
    static const int256 limit = int256(WAD_RAW_LIMIT);
    if (raw > limit || raw < -limit) overflow();
    return Wad(static_cast<int128>(raw));
}

const int256 SCALE256 = int256(WAD_SCALE);

}  // namespace

Wad wad_add(Wad a, Wad b) { return checked(int256(a.raw) + int256(b.raw)); }
Wad wad_sub(Wad a, Wad b) { return checked(int256(a.raw) - int256(b.raw)); }
Wad wad_neg(Wad a) { return Wad(-a.raw); }

Wad wad_mul(Wad a, Wad b) {
    // Truncation toward zero (int256 division truncates toward zero).
    return checked(int256(a.raw) * int256(b.raw) / SCALE256);
}

Wad wad_div(Wad a, Wad b) {
    if (b.raw == 0) throw std::domain_error("wad: division by zero");
    return checked(int256(a.raw) * SCALE256 / int256(b.raw));
}

Wad wad_abs(Wad a) { return a.raw < 0 ? Wad(-a.raw) : a; }
Wad wad_min(Wad a, Wad b) { return a.raw < b.raw ? a : b; }
Wad wad_max(Wad a, Wad b) { return a.raw > b.raw ? a : b; }
Wad wad_clamp(Wad x, Wad lo, Wad hi) { return wad_min(wad_max(x, lo), hi); }

namespace {

// ln(2) truncated to 18 decimals.
const Wad LN2 = Wad(static_cast<int128>(693147180559945309LL));

// ln(m) for m in [1, 2) via 2*atanh((m-1)/(m+1)).
Wad ln_mantissa(Wad m) {
    Wad t = wad_div(wad_sub(m, WAD_ONE), wad_add(m, WAD_ONE));  // |t| <= 1/3
    Wad t2 = wad_mul(t, t);
    Wad term = t;
    int256 acc = int256(t.raw);
    for (int k = 3; k <= 41; k += 2) {
        term = wad_mul(term, t2);
        if (term.raw == 0) break;
        acc += int256(term.raw) / k;
    }
    return checked(acc * 2);
}

}  // namespace

Wad wad_ln(Wad x) {
    if (x.raw <= 0) throw std::domain_error("wad_ln: nonpositive argument");
    // Normalize x = m * 2^e with m in [1, 2).
    int e = 0;
    int128 r = x.raw;
    while (r >= 2 * WAD_SCALE) { r /= 2; ++e; }
    while (r < WAD_SCALE) { r *= 2; --e; }
    // Halving truncates; the discarded fraction is < 1 raw unit per shift and
    // irrelevant at the 1e-6 relative target.
    Wad m = ln_mantissa(Wad(r));
    return checked(int256(m.raw) + int256(LN2.raw) * e);
}

Wad wad_exp(Wad x) {
    if (x.raw == 0) return WAD_ONE;
    // x = n*ln2 + r with r in [0, ln2).
    int128 n128 = x.raw / LN2.raw;
    Wad r = Wad(x.raw - n128 * LN2.raw);
    if (r.raw < 0) { r = wad_add(r, LN2); n128 -= 1; }
    if (n128 > 140 || n128 < -140) {
        if (n128 > 0) overflow();
        return WAD_ZERO;  // underflow to zero
    }
    int n = static_cast<int>(n128);
    // e^r by Taylor series; r < 0.694 so terms decay fast.
    Wad term = WAD_ONE;
    int256 acc = SCALE256;
    for (int k = 1; k <= 30; ++k) {
        term = Wad(static_cast<int128>(int256(term.raw) * int256(r.raw) / SCALE256 / k));
        if (term.raw == 0) break;
        acc += int256(term.raw);
    }
    if (n >= 0) return checked(acc << n);
    return checked(acc >> (-n));
}

Wad wad_tanh(Wad x) {
    if (x.raw < 0) return wad_neg(wad_tanh(Wad(-x.raw)));
    static const Wad SATURATED = Wad(WAD_SCALE - 1);
    if (x.raw >= 8 * WAD_SCALE) return SATURATED;
    Wad e2x = wad_exp(Wad(2 * x.raw));  // <= e^16, well in range
    Wad t = wad_div(wad_sub(e2x, WAD_ONE), wad_add(e2x, WAD_ONE));
    return wad_min(t, SATURATED);
}

Wad wad_sqrt(Wad x) {
    if (x.raw < 0) throw std::domain_error("wad_sqrt: negative argument");
    if (x.raw == 0) return WAD_ZERO;
    uint256 n = uint256(static_cast<unsigned __int128>(x.raw)) *
                uint256(static_cast<unsigned __int128>(WAD_SCALE));
    uint256 root = mp::sqrt(n);  // floor square root
    return Wad(static_cast<int128>(static_cast<unsigned __int128>(root)));
}

double wad_to_double(Wad w) { return static_cast<double>(w.raw) / 1e18; }

Wad wad_from_double(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("wad_from_double: non-finite");
    long double scaled = static_cast<long double>(v) * 1e18L;
    if (scaled > static_cast<long double>(WAD_RAW_LIMIT) ||
        scaled < -static_cast<long double>(WAD_RAW_LIMIT))
        overflow();
    return Wad(static_cast<int128>(roundl(scaled)));
}

std::string to_decimal_string(Wad w) {
    unsigned __int128 mag = w.raw < 0 ? static_cast<unsigned __int128>(-(w.raw))
                                      : static_cast<unsigned __int128>(w.raw);
    unsigned __int128 ip = mag / static_cast<unsigned __int128>(WAD_SCALE);
    unsigned __int128 fp = mag % static_cast<unsigned __int128>(WAD_SCALE);
    auto u128_to_string = [](unsigned __int128 v) {
        if (v == 0) return std::string("0");
        std::string s;
        while (v > 0) { s.push_back(static_cast<char>('0' + static_cast<int>(v % 10))); v /= 10; }
        return std::string(s.rbegin(), s.rend());
    };
    std::string frac = u128_to_string(fp);
    frac.insert(frac.begin(), 18 - frac.size(), '0');
    std::string out = (w.raw < 0 ? "-" : "") + u128_to_string(ip) + "." + frac;
    return out;
}

Wad from_decimal_string(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("wad: empty decimal string");
    bool neg = false;
    size_t i = 0;
    if (s[0] == '-' || s[0] == '+') { neg = s[0] == '-'; i = 1; }
    unsigned __int128 ip = 0;
    bool any = false;
    for (; i < s.size() && s[i] != '.'; ++i) {
        if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("wad: bad decimal string");
        ip = ip * 10 + static_cast<unsigned>(s[i] - '0');
        if (ip > static_cast<unsigned __int128>(WAD_RAW_LIMIT)) overflow();
        any = true;
    }
    unsigned __int128 fp = 0;
    int fdigits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("wad: bad decimal string");
            if (fdigits < 18) { fp = fp * 10 + static_cast<unsigned>(s[i] - '0'); ++fdigits; }
            any = true;
        }
    }
    if (!any) throw std::invalid_argument("wad: bad decimal string");
    while (fdigits < 18) { fp *= 10; ++fdigits; }
    int256 raw = int256(static_cast<unsigned __int128>(ip)) * SCALE256 +
                 int256(static_cast<unsigned __int128>(fp));
    if (neg) raw = -raw;
    return checked(raw);
}

}  // namespace dcbm
