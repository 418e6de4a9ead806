#include "fractalnet/rational.hpp"

#include "fractalnet/error.hpp"

#include <cctype>

namespace fractalnet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSpecError: return "SpecError";
    case ErrorCode::kRegularityViolation: return "RegularityViolation";
    case ErrorCode::kWeightError: return "WeightError";
    case ErrorCode::kMatrixError: return "MatrixError";
    case ErrorCode::kSymbolOutOfRange: return "SymbolOutOfRange";
    case ErrorCode::kGenerationError: return "GenerationError";
    case ErrorCode::kDepthExceedsTruncation: return "DepthExceedsTruncation";
    case ErrorCode::kTruncationBoundary: return "TruncationBoundary";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kFrontierCenter: return "FrontierCenter";
    case ErrorCode::kJunctionInconsistency: return "JunctionInconsistency";
    case ErrorCode::kLocalizationError: return "LocalizationError";
    case ErrorCode::kMatricesMissing: return "MatricesMissing";
    case ErrorCode::kNotSeparable: return "NotSeparable";
    case ErrorCode::kFrontierState: return "FrontierState";
    case ErrorCode::kInvalidPath: return "InvalidPath";
    case ErrorCode::kBadInterval: return "BadInterval";
    case ErrorCode::kEmbeddingError: return "EmbeddingError";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
  }
  return "UnknownError";
}

namespace {

bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
  if (!is_integer_literal(s)) {
    throw Error(ErrorCode::kSpecError, "malformed rational '" + std::string(whole) + "'");
  }
  std::string digits(s[0] == '+' ? s.substr(1) : s);
  return mpz_class(digits, 10);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash), text);
    mpz_class den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw Error(ErrorCode::kSpecError, "zero denominator in '" + std::string(text) + "'");
    Rational r(num, den);
    r.canonicalize();
    return r;
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    bool negative = !int_part.empty() && int_part[0] == '-';
    std::string_view magnitude = int_part;
    if (!magnitude.empty() && (magnitude[0] == '-' || magnitude[0] == '+')) magnitude.remove_prefix(1);
    mpz_class whole = magnitude.empty() ? mpz_class(0) : parse_integer(magnitude, text);
    mpz_class frac = frac_part.empty() ? mpz_class(0) : parse_integer(frac_part, text);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac_part.size());
    Rational r(whole * scale + frac, scale);
    r.canonicalize();
    return negative ? Rational(-r) : r;
  }
  return Rational(parse_integer(text, text));
}

std::string format_rational(const Rational& value) {
  Rational v = value;
  v.canonicalize();
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

RationalVector mat_vec(const RationalMatrix& m, const RationalVector& v) {
  RationalVector out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    Rational acc = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (m[i][j] != 0) acc += m[i][j] * v[j];
    }
    out[i] = acc;
  }
  return out;
}

RationalMatrix mat_mul(const RationalMatrix& a, const RationalMatrix& b) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  const std::size_t p = k == 0 ? 0 : b[0].size();
  RationalMatrix out(n, RationalVector(p, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l] == 0) continue;
      for (std::size_t j = 0; j < p; ++j) out[i][j] += a[i][l] * b[l][j];
    }
  }
  return out;
}

RationalMatrix identity_matrix(std::size_t n) {
  RationalMatrix out(n, RationalVector(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) out[i][i] = 1;
  return out;
}

}  // namespace fractalnet
