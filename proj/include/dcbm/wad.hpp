// 18-decimal fixed-point ("WAD") arithmetic on signed 128-bit raw values.
//
// All operations are pure integer arithmetic with truncation toward zero,
// so results are bit-identical across platforms. Products and quotients go
// through 256-bit intermediates; anything that would leave the representable
// range throws instead of wrapping.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dcbm {

using int128 = __int128;

struct Wad {
    int128 raw = 0;  // value = raw / 1e18

    constexpr Wad() = default;
    constexpr explicit Wad(int128 r) : raw(r) {}

    friend constexpr bool operator==(Wad a, Wad b) { return a.raw == b.raw; }
    friend constexpr bool operator!=(Wad a, Wad b) { return a.raw != b.raw; }
    friend constexpr bool operator<(Wad a, Wad b) { return a.raw < b.raw; }
    friend constexpr bool operator<=(Wad a, Wad b) { return a.raw <= b.raw; }
    friend constexpr bool operator>(Wad a, Wad b) { return a.raw > b.raw; }
    friend constexpr bool operator>=(Wad a, Wad b) { return a.raw >= b.raw; }
};

inline constexpr int128 WAD_SCALE = static_cast<int128>(1000000000000000000LL);
// Representable range: |value| <= 1e20, i.e. |raw| <= 1e38.
inline constexpr int128 WAD_RAW_LIMIT =
    static_cast<int128>(100000000000000000000ULL) *  // 1e20
    static_cast<int128>(1000000000000000000ULL);     // * 1e18

inline constexpr Wad WAD_ONE{WAD_SCALE};
inline constexpr Wad WAD_ZERO{0};

Wad wad_add(Wad a, Wad b);
Wad wad_sub(Wad a, Wad b);
Wad wad_neg(Wad a);
Wad wad_mul(Wad a, Wad b);
Wad wad_div(Wad a, Wad b);

// Natural log; x > 0 required. Range reduction by powers of two plus an
// atanh series on the [1,2) mantissa.
Wad wad_ln(Wad x);

// exp(x) for |x| <= ~40; throws on overflow of the result.
Wad wad_exp(Wad x);

// tanh(x); odd extension for x < 0. Saturates to (1 - 1e-18) for x >= 8,
// and is strictly below 1 everywhere.
Wad wad_tanh(Wad x);

// floor(sqrt(x)); x >= 0 required.
Wad wad_sqrt(Wad x);

Wad wad_abs(Wad a);
Wad wad_min(Wad a, Wad b);
Wad wad_max(Wad a, Wad b);
Wad wad_clamp(Wad x, Wad lo, Wad hi);

double wad_to_double(Wad w);
// Nearest representable Wad; throws if out of range or non-finite.
Wad wad_from_double(double v);

std::string to_decimal_string(Wad w);
Wad from_decimal_string(std::string_view s);

}  // namespace dcbm
