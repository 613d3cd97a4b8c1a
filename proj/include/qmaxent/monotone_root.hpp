#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qmaxent/error.hpp"

namespace qmaxent {

struct MonotoneRootOptions {
  double tol = 1e-10;    // required |f(x)| at the returned root
  int max_iter = 500;    // bracketing plus refinement evaluations
  double x_limit = 1e4;  // bracket search gives up beyond |x| > x_limit
};

struct MonotoneRoot {
  double x = 0.0;
  double residual = 0.0;  // |f(x)|
  int iterations = 0;
};

/// Root of a strictly decreasing function f, starting from x = 0.
///
/// `eval(x)` returns {f(x), f'(x)}. A bracket is grown geometrically away
/// from zero in the direction of the sign change, then refined by Newton
/// steps that fall back to bisection whenever the Newton iterate leaves the
/// bracket or fails to shrink it by half. Refinement continues past `tol`
/// until the bracket or step collapses to rounding level, so the returned x
/// is accurate to near machine precision whenever f is.
///
/// Throws Infeasible if no sign change is found within x_limit and
/// MaxIterExceeded if the evaluation budget runs out.
template <typename Eval>
MonotoneRoot find_decreasing_root(Eval&& eval, const MonotoneRootOptions& opts) {
  MonotoneRoot out;
  auto [f0, df0] = eval(0.0);
  ++out.iterations;
  if (f0 == 0.0) return out;

  // f decreasing: f(0) > 0 means the root lies at positive x.
  const double direction = f0 > 0.0 ? 1.0 : -1.0;
  double inner = 0.0;
  double f_inner = f0;
  double df_inner = df0;
  double outer = direction * std::min(1.0, opts.x_limit);
  double f_outer = 0.0;
  double df_outer = 0.0;
  for (;;) {
    if (out.iterations >= opts.max_iter) {
      fail(ErrorKind::MaxIterExceeded, "root bracketing exceeded iteration budget");
    }
    auto [f, df] = eval(outer);
    ++out.iterations;
    if (f == 0.0) {
      out.x = outer;
      return out;
    }
    if ((f > 0.0) != (f0 > 0.0)) {
      f_outer = f;
      df_outer = df;
      break;
    }
    inner = outer;
    f_inner = f;
    df_inner = df;
    if (std::abs(outer) >= opts.x_limit) {
      fail(ErrorKind::Infeasible, "no sign change within |x| <= " + std::to_string(opts.x_limit));
    }
    outer = direction * std::min(2.0 * std::abs(outer), opts.x_limit);
  }

  // lo/hi are ordered so that f(lo) > 0 > f(hi).
  double lo = direction > 0 ? inner : outer;
  double hi = direction > 0 ? outer : inner;
  double f_lo = direction > 0 ? f_inner : f_outer;
  double f_hi = direction > 0 ? f_outer : f_inner;
  double x = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
  double fx = x == lo ? f_lo : f_hi;
  double dfx = x == lo ? (direction > 0 ? df_inner : df_outer) : (direction > 0 ? df_outer : df_inner);

  constexpr double eps = std::numeric_limits<double>::epsilon();
  while (out.iterations < opts.max_iter) {
    const double width = hi - lo;
    double next = 0.0;
    const bool newton_ok = dfx < 0.0 && std::isfinite(dfx);
    if (newton_ok) next = x - fx / dfx;
    if (!newton_ok || !(next > lo && next < hi) || std::abs(next - x) > 0.5 * width) {
      next = lo + 0.5 * width;
    }
    const double step = std::abs(next - x);
    auto [fn, dfn] = eval(next);
    ++out.iterations;
    x = next;
    fx = fn;
    dfx = dfn;
    if (fx > 0.0) {
      lo = x;
    } else if (fx < 0.0) {
      hi = x;
    }
    const double floor = 4.0 * eps * (1.0 + std::abs(x));
    if (fx == 0.0 || (std::abs(fx) <= opts.tol && (step <= floor || hi - lo <= floor))) {
      out.x = x;
      out.residual = std::abs(fx);
      return out;
    }
    if (hi - lo <= floor) break;
  }
  out.x = x;
  out.residual = std::abs(fx);
  if (out.residual <= opts.tol) return out;
  fail(ErrorKind::MaxIterExceeded,
       "root refinement stopped with residual " + std::to_string(out.residual));
}

}  // namespace qmaxent
