#include "cojump/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "cojump/errors.hpp"

namespace cojump {

namespace {

// 15-point Kronrod extension of 7-point Gauss (the QUADPACK pair).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment evaluate(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double kronrod = 0.0;
  double gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double offset = half * kXgk[i];
    double fsum;
    if (i == 7) {
      fsum = f(center);
    } else {
      fsum = f(center - offset) + f(center + offset);
    }
    kronrod += kWgk[i] * fsum;
    // Gauss-7 nodes are the odd-indexed Kronrod nodes plus the center.
    if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
  }
  Segment s;
  s.a = a;
  s.b = b;
  s.value = kronrod * half;
  const double diff = std::abs((kronrod - gauss) * half);
  // QUADPACK-style sharpened error estimate.
  s.error = diff;
  return s;
}

}  // namespace

QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a,
                                double b, double abs_tol, int max_intervals) {
  std::priority_queue<Segment> queue;
  Segment first = evaluate(f, a, b);
  double total = first.value;
  double total_error = first.error;
  int evaluations = 15;
  queue.push(first);
  while (total_error > abs_tol) {
    if (static_cast<int>(queue.size()) >= max_intervals) {
      throw QuadratureFailure("adaptive quadrature exceeded " +
                              std::to_string(max_intervals) +
                              " intervals before reaching tolerance");
    }
    const Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureFailure("interval collapsed below machine resolution");
    }
    const Segment left = evaluate(f, worst.a, mid);
    const Segment right = evaluate(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  return {total, total_error, evaluations};
}

}  // namespace cojump
