#include "ponsim/sim_time.hpp"

#include <array>
#include <cctype>
#include <cmath>

#include "ponsim/errors.hpp"

namespace ponsim {

SimTime SimTime::from_seconds(double seconds) {
  if (!(seconds >= 0.0) || !std::isfinite(seconds))
    throw TimeArithmeticError("SimTime::from_seconds needs a finite non-negative value");
  const double t = std::round(seconds * static_cast<double>(kTicksPerSecond));
  if (t >= 1.8e19) throw TimeArithmeticError("SimTime::from_seconds overflow");
  return SimTime(static_cast<rep>(t));
}

namespace {

__extension__ using u128 = unsigned __int128;

struct Unit {
  std::string_view suffix;
  SimTime::rep ticks;
};

constexpr std::array<Unit, 5> kUnits{{
    {"ps", 1},
    {"ns", SimTime::kTicksPerNs},
    {"us", SimTime::kTicksPerUs},
    {"ms", SimTime::kTicksPerMs},
    {"s", SimTime::kTicksPerSecond},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

SimTime parse_duration(std::string_view text) {
  std::string_view s = trim(text);
  SimTime::rep scale = 1;
  // Longest suffix first so "ms" is not read as "s".
  for (const auto& u : kUnits) {
    if (s.size() > u.suffix.size() && s.substr(s.size() - u.suffix.size()) == u.suffix) {
      scale = u.ticks;
      s = trim(s.substr(0, s.size() - u.suffix.size()));
      break;
    }
  }
  if (s.empty()) throw InvalidInputs("empty duration: '" + std::string(text) + "'");

  // Exact decimal parse: integer part and fractional digits kept separately.
  u128 whole = 0;
  u128 frac = 0;
  u128 frac_scale = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  for (char c : s) {
    if (c == '.') {
      if (seen_dot) throw InvalidInputs("malformed duration: '" + std::string(text) + "'");
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw InvalidInputs("malformed duration: '" + std::string(text) + "'");
    seen_digit = true;
    const unsigned d = static_cast<unsigned>(c - '0');
    if (seen_dot) {
      if (frac_scale > static_cast<u128>(1e30))
        throw InvalidInputs("too many digits in duration: '" + std::string(text) + "'");
      frac = frac * 10 + d;
      frac_scale *= 10;
    } else {
      whole = whole * 10 + d;
      if (whole > static_cast<u128>(std::numeric_limits<SimTime::rep>::max()))
        throw InvalidInputs("duration overflow: '" + std::string(text) + "'");
    }
  }
  if (!seen_digit) throw InvalidInputs("malformed duration: '" + std::string(text) + "'");

  const u128 frac_ticks_num = frac * scale;
  if (frac_ticks_num % frac_scale != 0)
    throw InvalidInputs("duration is not a whole number of picoseconds: '" +
                        std::string(text) + "'");
  const u128 total = whole * scale + frac_ticks_num / frac_scale;
  if (total > static_cast<u128>(std::numeric_limits<SimTime::rep>::max()))
    throw InvalidInputs("duration overflow: '" + std::string(text) + "'");
  return SimTime::ticks(static_cast<SimTime::rep>(total));
}

std::string to_string(SimTime t) {
  const SimTime::rep v = t.count();
  if (v == 0) return "0s";
  // Largest unit not exceeding the value; fractional digits are exact.
  for (auto it = kUnits.rbegin(); it != kUnits.rend(); ++it) {
    if (v >= it->ticks || it->ticks == 1) {
      const SimTime::rep whole = v / it->ticks;
      SimTime::rep rem = v % it->ticks;
      std::string out = std::to_string(whole);
      if (rem != 0) {
        std::string digits;
        SimTime::rep scale = it->ticks;
        while (rem != 0 && scale > 1) {
          scale /= 10;
          digits.push_back(static_cast<char>('0' + rem / scale));
          rem %= scale;
        }
        out += "." + digits;
      }
      return out + std::string(it->suffix);
    }
  }
  return std::to_string(v) + "ps";
}

}  // namespace ponsim
