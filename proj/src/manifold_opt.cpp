#include "kentreg/manifold_opt.hpp"

namespace kentreg {

namespace {

Mat3 drop_locked_component(const Mat3& grad, const Mat3& r, const Vec3& axis) {
  const Mat3 omega = grad * r.transpose();
  Vec3 w(omega(2, 1), omega(0, 2), omega(1, 0));
  w -= axis * axis.dot(w);
  Mat3 hat;
  hat << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return hat * r;
}

}  // namespace

MinimizeResult minimize(const RotationObjective& obj, const Mat3& r0,
                        const MinimizeOptions& options) {
  MinimizeResult res;
  res.rotation = project_to_rotation(r0);
  res.value = objective_value(obj, res.rotation);
  res.value_trace.push_back(res.value);

  const double lipschitz = 2.0 * std::abs(obj.beta) * obj.a.norm() * obj.b.norm() +
                           std::abs(obj.kappa) * obj.c.norm();
  double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  auto descent = [&](const Mat3& r) {
    const Mat3 g = riemannian_gradient(obj, r);
    return options.locked_axis ? drop_locked_component(g, r, *options.locked_axis) : g;
  };

  for (int it = 0; it < options.max_iters; ++it) {
    const Mat3 grad = descent(res.rotation);
    res.gradient_norm = grad.norm();
    if (res.gradient_norm <= options.tolerance) {
      res.converged = true;
      return res;
    }

    const double slope = res.gradient_norm * res.gradient_norm;
    bool accepted = false;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      const Mat3 candidate = project_to_rotation(res.rotation - step * grad);
      const double value = objective_value(obj, candidate);
      if (value <= res.value - options.armijo * step * slope) {
        res.rotation = candidate;
        res.value = value;
        res.value_trace.push_back(value);
        accepted = true;
        break;
      }
      step *= options.shrink;
    }
    res.iterations = it + 1;
    // No representable decrease left: we are at the round-off floor.
    if (!accepted) break;
    step /= options.shrink;
  }
  res.gradient_norm = descent(res.rotation).norm();
  res.converged = res.gradient_norm <= options.tolerance;
  return res;
}

}  // namespace kentreg
