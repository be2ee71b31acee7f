#include "ffm/bessel.hpp"

#include <cmath>
#include <cstdlib>

namespace ffm::special {

namespace {

// Start index for the backward recurrence: well above both nmax and |x| so the
// seeded tail has decayed below double precision by the time it reaches nmax.
int recurrence_start(int nmax, double ax) {
  const int base = std::max(nmax, static_cast<int>(std::ceil(ax)));
  int start = base + 20 + static_cast<int>(std::sqrt(40.0 * (base + 1)));
  return start + (start % 2);  // even, so the normalisation sum ends on J_0
}

}  // namespace

std::vector<double> bessel_j_table(int nmax, double x) {
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  const double ax = std::abs(x);
  if (ax == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int start = recurrence_start(nmax, ax);
  std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  double norm = 0.0;
  for (int n = start; n >= 1; --n) {
    j[n - 1] = (2.0 * n / ax) * j[n] - j[n + 1];
    // Rescale to keep the recurrence in range.
    if (std::abs(j[n - 1]) > 1e250) {
      for (int m = n - 1; m <= start; ++m) j[m] *= 1e-250;
      norm *= 1e-250;
    }
    if ((n - 1) % 2 == 0 && n - 1 > 0) norm += 2.0 * j[n - 1];
  }
  norm += j[0];
  for (int n = 0; n <= nmax; ++n) {
    double v = j[n] / norm;
    if (x < 0.0 && (n % 2 == 1)) v = -v;
    out[n] = v;
  }
  return out;
}

double bessel_j(int n, double x) {
  const int an = std::abs(n);
  double v = bessel_j_table(an, x)[an];
  if (n < 0 && (an % 2 == 1)) v = -v;
  return v;
}

double bessel_j_prime(int n, double x) {
  return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
}

}  // namespace ffm::special
