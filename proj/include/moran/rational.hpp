#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace moran {

using bigint = boost::multiprecision::cpp_int;
using bigrat = boost::multiprecision::cpp_rational;

// Exact conversion; every binary64 value is a dyadic rational.
inline bigrat rat_from_double(double x) { return bigrat(x); }

inline double rat_to_double(const bigrat& r) { return r.convert_to<double>(); }

// Accepts "p/q" with integer p, q (q > 0) or a plain integer string.
bigrat parse_rational(const std::string& s);

}  // namespace moran
