//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_DECIMAL_HPP_
#define SOLCUR_DECIMAL_HPP_

#include <string>
#include <string_view>

namespace solcur {

// Fixed-point text with `decimals` fraction digits, rounded half away from
// zero on the shortest decimal representation of value (so 0.425 -> "0.43"
// even though the nearest double is slightly below 0.425). Negative results
// that round to zero print without a sign. Locale independent.
std::string format_fixed(double value, int decimals);

// Shortest text that parses back to the same double.
std::string format_shortest(double value);

// Locale-independent strict parse of a double; returns false on trailing
// garbage or empty input.
bool parse_double(std::string_view text, double &out);

}  // namespace solcur

#endif  // SOLCUR_DECIMAL_HPP_
