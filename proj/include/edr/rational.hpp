#ifndef EDR_RATIONAL_HPP
#define EDR_RATIONAL_HPP

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

namespace edr {

// Exact arbitrary-precision rational. All money amounts, valuations and
// LP coefficients are Rat; binary64 is used only on the float solve path.
using Rat = mpq_class;

// Parses "900", "-3", "316.5", "950/3". Returns nullopt on anything else
// (including NaN/inf spellings and empty strings).
std::optional<Rat> parse_rational(const std::string& text);

// Canonical "p" or "p/q" form.
std::string format_rational(const Rat& value);

// Fixed-point rendering with `decimals` digits after the point, rounding
// half away from zero.
std::string format_decimal(const Rat& value, int decimals);

// Shortest decimal string that round-trips the double (used for float-mode
// values in JSON/CSV output).
std::string format_double(double value);

inline double to_double(const Rat& value) { return value.get_d(); }

Rat rat_abs(const Rat& value);
Rat rat_min(const Rat& a, const Rat& b);
Rat rat_max(const Rat& a, const Rat& b);

// The two-argument mpq_class constructor does not canonicalize; always
// build fractions through this helper.
inline Rat rat_frac(long num, unsigned long den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Integer power for exact g-welfare evaluation; requires exponent != 0.
Rat rat_pow(const Rat& base, int exponent);

}  // namespace edr

#endif
