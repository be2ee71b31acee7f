#pragma once

#include <vector>

namespace ffm::special {

/// Integer-order Bessel functions of the first kind J_0(x) .. J_nmax(x),
/// evaluated by Miller's backward recurrence normalised with
/// J_0 + 2 sum_k J_2k = 1. Valid for any real x; relative accuracy ~1e-13
/// wherever |J_n| is not deep in underflow.
std::vector<double> bessel_j_table(int nmax, double x);

/// J_n(x) for any integer n and real x, using J_{-n} = (-1)^n J_n and
/// J_n(-x) = (-1)^n J_n(x).
double bessel_j(int n, double x);

/// dJ_n/dx = (J_{n-1} - J_{n+1}) / 2.
double bessel_j_prime(int n, double x);

}  // namespace ffm::special
