#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace fractalnet {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;

// Accepts "p/q", "p" or a decimal literal such as "0.25" (converted exactly).
Rational parse_rational(std::string_view text);

// Always "p/q", including q = 1.
std::string format_rational(const Rational& value);

inline double to_double(const Rational& value) { return value.get_d(); }

RationalVector mat_vec(const RationalMatrix& m, const RationalVector& v);
RationalMatrix mat_mul(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix identity_matrix(std::size_t n);

}  // namespace fractalnet
