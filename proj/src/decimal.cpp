//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/decimal.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <system_error>

namespace solcur {

std::string format_shortest(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) throw std::runtime_error("to_chars failed");
  return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int decimals) {
  if (!std::isfinite(value)) throw std::domain_error("non-finite value");
  if (decimals < 0) throw std::invalid_argument("negative decimals");
  const bool negative = std::signbit(value);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), std::fabs(value),
                                 std::chars_format::scientific);
  if (res.ec != std::errc()) throw std::runtime_error("to_chars failed");
  const std::string sci(buf, res.ptr);

  // sci = d[.ddd]e(+|-)XX
  const std::size_t e_pos = sci.find('e');
  std::string digits;
  for (std::size_t i = 0; i < e_pos; ++i) {
    if (sci[i] != '.') digits += sci[i];
  }
  const int exponent = std::atoi(sci.c_str() + e_pos + 1);

  // value = 0.<digits> * 10^(exponent + 1); int_len digits precede the point.
  int int_len = exponent + 1;
  if (int_len <= 0) {
    digits.insert(0, static_cast<std::size_t>(-int_len + 1), '0');
    int_len = 1;
  }
  const std::size_t keep = static_cast<std::size_t>(int_len + decimals);
  if (digits.size() < keep) digits.append(keep - digits.size(), '0');

  std::string kept = digits.substr(0, keep);
  if (digits.size() > keep && digits[keep] >= '5') {
    int i = static_cast<int>(kept.size()) - 1;
    while (i >= 0 && kept[static_cast<std::size_t>(i)] == '9') {
      kept[static_cast<std::size_t>(i)] = '0';
      --i;
    }
    if (i >= 0) {
      ++kept[static_cast<std::size_t>(i)];
    } else {
      kept.insert(kept.begin(), '1');
      ++int_len;
    }
  }

  std::string int_part = kept.substr(0, static_cast<std::size_t>(int_len));
  const std::string frac_part = kept.substr(static_cast<std::size_t>(int_len));
  const std::size_t nonzero = int_part.find_first_not_of('0');
  int_part = nonzero == std::string::npos ? "0" : int_part.substr(nonzero);

  const bool is_zero = int_part == "0" &&
                       frac_part.find_first_not_of('0') == std::string::npos;
  std::string out = (negative && !is_zero) ? "-" : "";
  out += int_part;
  if (decimals > 0) {
    out += '.';
    out += frac_part;
  }
  return out;
}

bool parse_double(std::string_view text, double &out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

}  // namespace solcur
