#include "tatraj/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "tatraj/error.hpp"
#include "tatraj/io.hpp"

namespace tatraj {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// zeta(2) .. zeta(40)
constexpr std::array<double, 39> kZeta = {
    1.6449340668482264365, 1.2020569031595942854, 1.0823232337111381915, 1.0369277551433699263,
    1.0173430619844491397, 1.0083492773819228268, 1.0040773561979443394, 1.0020083928260822144,
    1.0009945751278180853, 1.0004941886041194646, 1.0002460865533080483, 1.0001227133475784891,
    1.0000612481350587048, 1.0000305882363070205, 1.0000152822594086519, 1.0000076371976378998,
    1.0000038172932649998, 1.0000019082127165539, 1.0000009539620338728, 1.0000004769329867878,
    1.0000002384505027277, 1.0000001192199259653, 1.0000000596081890513, 1.0000000298035035147,
    1.0000000149015548284, 1.0000000074507117898, 1.0000000037253340248, 1.0000000018626597235,
    1.0000000009313274324, 1.0000000004656629065, 1.0000000002328311834, 1.0000000001164155017,
    1.0000000000582077209, 1.0000000000291038504, 1.0000000000145519219, 1.0000000000072759598,
    1.0000000000036379795, 1.0000000000018189897, 1.0000000000009094948};

constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,  771.32342877765313,
    -176.61502916214059,  12.507343278686905,    -0.13857109526572012, 9.9843695780195716e-6,
    1.5056327351493116e-7};

constexpr double kLanczosG = 7.0;

void require_positive(double x, const char* fn) {
  if (!(x > 0.0)) throw Error(Errc::DomainError, std::string(fn) + " requires x > 0, got " + format_double(x));
}

// ln Gamma(1 + z) = -gamma z + sum_{k>=2} (-1)^k zeta(k) z^k / k, |z| <= 0.25.
double log_gamma_1p_series(double z) {
  double sum = 0.0;
  double power = z;  // z^(k-1) before the update below
  for (std::size_t i = 0; i < kZeta.size(); ++i) {
    const int k = static_cast<int>(i) + 2;
    power *= z;
    const double term = kZeta[i] * power / k;
    sum += (k % 2 == 0) ? term : -term;
  }
  return -kEulerGamma * z + sum;
}

double log_gamma_lanczos(double x) {
  x -= 1.0;
  double a = kLanczos[0];
  const double t = x + kLanczosG + 0.5;
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (x + static_cast<double>(i));
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (std::isinf(x)) return x;
  if (std::abs(x - 1.0) <= 0.25) return log_gamma_1p_series(x - 1.0);
  if (std::abs(x - 2.0) <= 0.25) return log_gamma_1p_series(x - 2.0) + std::log1p(x - 2.0);
  if (x < 0.5) return log_gamma(x + 1.0) - std::log(x);
  return log_gamma_lanczos(x);
}

double digamma(double x) {
  require_positive(x, "digamma");
  if (std::isinf(x)) return x;
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  // -sum B_{2k} / (2k x^{2k}), k = 1..7
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  if (std::isinf(x)) return 0.0;
  double shift = 0.0;
  while (x < 10.0) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum B_{2k} / x^{2k+1}
  const double series =
      inv * (1.0 + inv * (0.5 + inv * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 * (1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66)))))));
  return shift + series;
}

}  // namespace tatraj
