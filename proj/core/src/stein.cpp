#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "lsslab/diagnostics.hpp"
#include "lsslab/errors.hpp"
#include "lsslab/normal.hpp"

namespace lsslab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRootHalfPi = 1.2533141373155002512;  // sqrt(pi / 2)
constexpr double kBoundSlack = 1e-9;

// h = c0 - c1 x on (a, b].
struct Piece {
  double a;
  double b;
  double c0;
  double c1;
};

std::array<Piece, 3> pieces(const SteinContext& ctx) {
  const double end = ctx.w0 + ctx.theta;
  return {Piece{-kInf, ctx.w0, 1.0, 0.0}, Piece{ctx.w0, end, 1.0 + ctx.w0 / ctx.theta, 1.0 / ctx.theta},
          Piece{end, kInf, 0.0, 0.0}};
}

// exp((w^2 - a^2) / 2) erfcx(|a| / sqrt 2), zero at infinite a.
double scaled_tail(double w, double a) {
  if (std::isinf(a)) return 0.0;
  return std::exp(0.5 * (w - a) * (w + a)) * erfcx(std::abs(a) / std::numbers::sqrt2);
}

double scaled_exp(double w, double a) {
  if (std::isinf(a)) return 0.0;
  return std::exp(0.5 * (w - a) * (w + a));
}

}  // namespace

double stein_Nh(double w0, double theta) {
  if (!(theta > 0.0)) raise(ErrorKind::kInvalidArgument, "Stein ramp needs theta > 0");
  const double end = w0 + theta;
  return normal_cdf(w0) + (1.0 + w0 / theta) * (normal_cdf(end) - normal_cdf(w0)) -
         (normal_pdf(w0) - normal_pdf(end)) / theta;
}

SteinContext make_stein_context(double w0, double theta) {
  return {w0, theta, stein_Nh(w0, theta)};
}

double stein_Nh(const SteinContext& ctx) { return stein_Nh(ctx.w0, ctx.theta); }

double stein_h(const SteinContext& ctx, double w) {
  if (w <= ctx.w0) return 1.0;
  if (w <= ctx.w0 + ctx.theta) return 1.0 + (ctx.w0 - w) / ctx.theta;
  return 0.0;
}

double stein_solution(const SteinContext& ctx, double w) {
  if (!(std::abs(w) <= 30.0)) raise(ErrorKind::kOutOfRange, "Stein solution needs |w| <= 30");
  double acc = 0.0;
  if (w <= 0.0) {
    // g = e^{w^2/2} int_{-inf}^{w} (h - Nh) e^{-x^2/2} dx; every piece lies left of w <= 0.
    for (const auto& pc : pieces(ctx)) {
      const double a = pc.a;
      const double b = std::min(pc.b, w);
      if (!(a < b)) continue;
      const double e = kRootHalfPi * (scaled_tail(w, b) - scaled_tail(w, a));
      const double f = scaled_exp(w, a) - scaled_exp(w, b);
      acc += (pc.c0 - ctx.Nh) * e - pc.c1 * f;
    }
    return acc;
  }
  // g = -e^{w^2/2} int_{w}^{inf} (h - Nh) e^{-x^2/2} dx for w > 0.
  for (const auto& pc : pieces(ctx)) {
    const double a = std::max(pc.a, w);
    const double b = pc.b;
    if (!(a < b)) continue;
    const double e = kRootHalfPi * (scaled_tail(w, a) - scaled_tail(w, b));
    const double f = scaled_exp(w, a) - scaled_exp(w, b);
    acc -= (pc.c0 - ctx.Nh) * e - pc.c1 * f;
  }
  return acc;
}

SteinBoundReport stein_bound_check(const SteinContext& ctx, double lo, double hi,
                                   std::size_t points, double fd_step) {
  if (points < 2 || !(hi > lo)) raise(ErrorKind::kInvalidArgument, "bad Stein grid");
  SteinBoundReport rep;
  rep.points = points;
  rep.min_g = kInf;
  rep.max_g = -kInf;
  double gp_min = kInf;
  double gp_max = -kInf;
  const double spacing = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double w = lo + spacing * static_cast<double>(i);
    const double g = stein_solution(ctx, w);
    rep.min_g = std::min(rep.min_g, g);
    rep.max_g = std::max(rep.max_g, g);
    if (g < -kBoundSlack || g > 1.0 + kBoundSlack) ++rep.violations;

    const bool near_kink = std::abs(w - ctx.w0) <= 2.0 * spacing ||
                           std::abs(w - ctx.w0 - ctx.theta) <= 2.0 * spacing;
    if (near_kink) continue;
    const double gp =
        (stein_solution(ctx, w + fd_step) - stein_solution(ctx, w - fd_step)) / (2.0 * fd_step);
    ++rep.derivative_points;
    rep.max_abs_gprime = std::max(rep.max_abs_gprime, std::abs(gp));
    gp_min = std::min(gp_min, gp);
    gp_max = std::max(gp_max, gp);
    if (std::abs(gp) > 1.0 + kBoundSlack) ++rep.violations;
    rep.max_residual =
        std::max(rep.max_residual, std::abs(gp - w * g - (stein_h(ctx, w) - ctx.Nh)));
  }
  rep.gprime_range = rep.derivative_points > 0 ? gp_max - gp_min : 0.0;
  if (rep.gprime_range > 1.0 + kBoundSlack) ++rep.violations;
  return rep;
}

}  // namespace lsslab
