#include "crowdsim/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crowdsim/errors.hpp"

namespace crowdsim {

namespace {

double angle_between(Vec2 reference, Vec2 d) {
  if (reference.x == 0.0 && reference.y == 0.0) return 0.0;
  return std::atan2(cross(reference, d), dot(reference, d));
}

// Midpoint-rule average of f(|d + w tau|) h(tau) over [0, horizon]. Nodes with
// zero predicted distance are a null set of the tau integral and are dropped.
double averaged_kernel(const Kernel& f, Vec2 d, Vec2 w, const VelocityModel& model) {
  const auto n = model.quadrature_nodes;
  const double horizon = model.dt_max;
  const double step = horizon / static_cast<double>(n);
  const bool weighted = model.variant == Variant::predict_weighted;
  if (w == Vec2{} && !weighted) {
    // Constant integrand: return the instantaneous value without rounding.
    const double s = norm(d);
    return s == 0.0 ? 0.0 : f(s);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = (static_cast<double>(k) + 0.5) * step;
    const double s = norm(d + tau * w);
    if (s == 0.0) continue;
    const double value = f(s);
    sum += weighted ? value * model.weight_fn(tau, horizon) : value;
  }
  return sum / static_cast<double>(n);
}

std::size_t bin_of(double coord, double width, std::size_t count) {
  if (!(coord > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(coord / width), count - 1);
}

}  // namespace

double WeightFunction::operator()(double tau, double horizon) const {
  switch (kind) {
    case Kind::constant:
      return 1.0;
    case Kind::linear_decay:
      return std::clamp(1.0 - tau / horizon, 0.0, 1.0);
    case Kind::exponential_decay:
      return std::exp(-rate * tau);
  }
  return 1.0;
}

double VelocityModel::horizon() const {
  switch (variant) {
    case Variant::predict_fixed:
      return dt_pred;
    case Variant::predict_interval:
    case Variant::predict_weighted:
      return dt_max;
    default:
      return 0.0;
  }
}

VelocityField VelocityField::desired(const TwoScaleState& state, const VelocityModel& model) {
  VelocityField field;
  for (std::size_t i = 0; i < 2; ++i) {
    field.agents[i].assign(state.pops[i].micro.size(), model.v_des[i]);
    field.cells[i].assign(state.grid().cell_count(), model.v_des[i]);
  }
  return field;
}

double alpha_angle(Vec2 x, Vec2 y, Vec2 reference_velocity) {
  if (x == y) throw std::domain_error("alpha_angle: y coincides with x");
  return angle_between(reference_velocity, y - x);
}

double predicted_kernel_arg(Vec2 x, Vec2 y, Vec2 vx, Vec2 vy, double tau) {
  return norm((y + tau * vy) - (x + tau * vx));
}

double interval_averaged_kernel(const Kernel& f, Vec2 x, Vec2 y, Vec2 vx, Vec2 vy,
                                const VelocityModel& model) {
  if (!(model.dt_max > 0.0)) throw ContractViolation("interval_averaged_kernel: dt_max must be > 0");
  if (model.quadrature_nodes == 0) throw ContractViolation("interval_averaged_kernel: need >= 1 node");
  return averaged_kernel(f, y - x, vy - vx, model);
}

InteractionEvaluator::InteractionEvaluator(const TwoScaleState& state, const Domain& domain,
                                           const VelocityModel& model, const VelocityField* guess,
                                           NeighborSearch search)
    : state_(state), domain_(domain), model_(model), guess_(guess), search_(search) {
  if (model_.is_implicit() && guess_ == nullptr) {
    throw ContractViolation("implicit velocity variant requires a velocity guess");
  }
  double max_speed = 0.0;
  if (guess_ != nullptr && model_.horizon() > 0.0) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (const auto& v : guess_->agents[i]) max_speed = std::max(max_speed, norm(v));
      for (const auto& v : guess_->cells[i]) max_speed = std::max(max_speed, norm(v));
    }
  }
  cutoff_ = model_.kernels.interaction_range() + 2.0 * max_speed * model_.horizon();

  if (search_ != NeighborSearch::cell_list) return;
  for (std::size_t src = 0; src < 2; ++src) {
    auto& b = bins_[src];
    b.nbx = std::max<std::size_t>(1, static_cast<std::size_t>(domain_.length / cutoff_));
    b.nby = std::max<std::size_t>(1, static_cast<std::size_t>(domain_.width / cutoff_));
    b.wx = domain_.length / static_cast<double>(b.nbx);
    b.wy = domain_.width / static_cast<double>(b.nby);
    b.members.assign(b.nbx * b.nby, {});
    const auto& agents = state_.pops[src].micro.agents;
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const auto bx = bin_of(agents[k].position.x, b.wx, b.nbx);
      const auto by = bin_of(agents[k].position.y, b.wy, b.nby);
      b.members[by * b.nbx + bx].push_back(k);
    }
  }
}

std::vector<std::size_t> InteractionEvaluator::candidates(std::size_t source, Vec2 x) const {
  const auto& b = bins_[source];
  const auto bx = static_cast<long>(bin_of(x.x, b.wx, b.nbx));
  const auto by = static_cast<long>(bin_of(x.y, b.wy, b.nby));
  const auto nbx = static_cast<long>(b.nbx);
  const auto nby = static_cast<long>(b.nby);
  const bool periodic = domain_.boundary_x == BoundaryX::periodic;

  std::vector<long> columns;
  if (periodic && nbx < 3) {
    for (long c = 0; c < nbx; ++c) columns.push_back(c);
  } else {
    for (long c = bx - 1; c <= bx + 1; ++c) {
      if (periodic) columns.push_back((c + nbx) % nbx);
      else if (c >= 0 && c < nbx) columns.push_back(c);
    }
  }
  std::vector<std::size_t> out;
  for (long r = std::max(0L, by - 1); r <= std::min(nby - 1, by + 1); ++r) {
    for (long c : columns) {
      const auto& m = b.members[static_cast<std::size_t>(r * nbx + c)];
      out.insert(out.end(), m.begin(), m.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vec2 InteractionEvaluator::pair_term(std::size_t pop, std::size_t source, Vec2 d, Vec2 vx, Vec2 vy) const {
  const double s = norm(d);
  if (s == 0.0) return {};
  const auto& kp = model_.kernels;
  const bool own = pop == source;
  const Vec2 reference = model_.variant == Variant::actual_angle ? vx : model_.v_des[pop];
  const double g = g_aniso(angle_between(reference, d), kp);

  double value = 0.0;
  switch (model_.variant) {
    case Variant::explicit_:
    case Variant::actual_angle:
      value = own ? f_own(s, kp) : f_opp(s, kp);
      break;
    case Variant::predict_fixed: {
      const double sp = norm(d + model_.dt_pred * (vy - vx));
      if (sp == 0.0) return {};
      value = own ? f_own(sp, kp) : f_opp(sp, kp);
      break;
    }
    case Variant::predict_interval:
    case Variant::predict_weighted: {
      const Kernel f = own ? Kernel([&](double r) { return f_own(r, kp); })
                           : Kernel([&](double r) { return f_opp(r, kp); });
      value = averaged_kernel(f, d, vy - vx, model_);
      break;
    }
  }
  if (value == 0.0) return {};
  return (value * g / s) * d;
}

Vec2 InteractionEvaluator::micro_sum(std::size_t pop, std::size_t source, const Probe& probe) const {
  const auto& agents = state_.pops[source].micro.agents;
  Vec2 sum;
  auto add = [&](std::size_t k) {
    const Vec2 vy = guess_ != nullptr ? guess_->agents[source][k] : model_.v_des[source];
    sum += pair_term(pop, source, domain_.displacement(probe.position, agents[k].position),
                     probe.velocity, vy);
  };
  if (search_ == NeighborSearch::direct) {
    for (std::size_t k = 0; k < agents.size(); ++k) add(k);
  } else {
    for (auto k : candidates(source, probe.position)) add(k);
  }
  return sum;
}

Vec2 InteractionEvaluator::macro_integral(std::size_t pop, std::size_t source, const Probe& probe) const {
  const auto& field = state_.pops[source].macro;
  const auto& grid = field.grid();
  const double h = grid.h();
  const auto nx = static_cast<long>(grid.nx());
  const auto ny = static_cast<long>(grid.ny());
  Vec2 sum;
  auto add = [&](std::size_t c) {
    const double mass = field.cell_mass(c);
    if (mass == 0.0) return;
    const Vec2 d = domain_.displacement(probe.position, grid.center(c));
    if (norm(d) < 0.1 * h) return;
    const Vec2 vy = guess_ != nullptr ? guess_->cells[source][c] : model_.v_des[source];
    sum += mass * pair_term(pop, source, d, probe.velocity, vy);
  };

  if (search_ == NeighborSearch::direct) {
    for (std::size_t c = 0; c < grid.cell_count(); ++c) add(c);
    return sum;
  }
  const long reach = static_cast<long>(std::ceil(cutoff_ / h)) + 1;
  const long ci = static_cast<long>(std::floor(probe.position.x / h));
  const long cj = static_cast<long>(std::floor(probe.position.y / h));
  std::vector<long> columns;
  if (domain_.boundary_x == BoundaryX::periodic && 2 * reach + 1 >= nx) {
    for (long i = 0; i < nx; ++i) columns.push_back(i);
  } else {
    for (long i = ci - reach; i <= ci + reach; ++i) {
      if (domain_.boundary_x == BoundaryX::periodic) columns.push_back(((i % nx) + nx) % nx);
      else if (i >= 0 && i < nx) columns.push_back(i);
    }
    std::sort(columns.begin(), columns.end());
  }
  for (long j = std::max(0L, cj - reach); j <= std::min(ny - 1, cj + reach); ++j) {
    for (long i : columns) add(static_cast<std::size_t>(j * nx + i));
  }
  return sum;
}

InteractionParts InteractionEvaluator::parts(std::size_t pop, const Probe& probe) const {
  const std::size_t other = 1 - pop;
  InteractionParts p;
  if (model_.kernels.F_own != 0.0) {
    p.own_micro = micro_sum(pop, pop, probe);
    p.own_macro = macro_integral(pop, pop, probe);
  }
  if (model_.kernels.F_opp != 0.0) {
    p.opp_micro = micro_sum(pop, other, probe);
    p.opp_macro = macro_integral(pop, other, probe);
  }
  if (probe.wall && model_.kernels.F_w != 0.0) {
    const auto c = wall_clearance(domain_, probe.position);
    p.wall = -f_wall(c.distance, model_.kernels) * c.inward_normal;
  }
  return p;
}

Vec2 InteractionEvaluator::evaluate(std::size_t pop, const Probe& probe, bool* capped) const {
  const std::size_t other = 1 - pop;
  const double theta_own = state_.pops[pop].theta;
  const double theta_opp = state_.pops[other].theta;
  Vec2 v;
  if (model_.kernels.F_own != 0.0) {
    if (theta_own != 0.0) v += theta_own * micro_sum(pop, pop, probe);
    if (theta_own != 1.0) v += (1.0 - theta_own) * macro_integral(pop, pop, probe);
  }
  if (model_.kernels.F_opp != 0.0) {
    if (theta_opp != 0.0) v += theta_opp * micro_sum(pop, other, probe);
    if (theta_opp != 1.0) v += (1.0 - theta_opp) * macro_integral(pop, other, probe);
  }
  if (probe.wall && model_.kernels.F_w != 0.0) {
    const auto c = wall_clearance(domain_, probe.position);
    v += -f_wall(c.distance, model_.kernels) * c.inward_normal;
  }
  const double speed = norm(v);
  const bool clamp = speed > model_.speed_cap;
  if (clamp) v *= model_.speed_cap / speed;
  if (capped != nullptr) *capped = clamp;
  return v;
}

Vec2 interaction_velocity(const Probe& probe, std::size_t pop, const TwoScaleState& state,
                          const Domain& domain, const VelocityModel& model,
                          const VelocityField* guess) {
  return InteractionEvaluator(state, domain, model, guess, NeighborSearch::direct).evaluate(pop, probe);
}

VelocitySolution apply_velocity_map(const TwoScaleState& state, const Domain& domain,
                                    const VelocityModel& model, const VelocityField* guess,
                                    NeighborSearch search) {
  const InteractionEvaluator eval(state, domain, model, guess, search);
  VelocitySolution out;
  out.field = VelocityField::desired(state, model);
  const auto& grid = state.grid();
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& pop = state.pops[i];
    for (std::size_t k = 0; k < pop.micro.size(); ++k) {
      const Vec2 current = guess != nullptr ? guess->agents[i][k] : model.v_des[i];
      bool capped = false;
      out.field.agents[i][k] =
          model.v_des[i] + eval.evaluate(i, Probe{pop.micro.agents[k].position, current, true}, &capped);
      out.capped += capped ? 1 : 0;
    }
    if (pop.theta == 1.0 || macro_mass(pop.macro) == 0.0) continue;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      if (grid.phi(c) == 0.0) continue;
      const Vec2 current = guess != nullptr ? guess->cells[i][c] : model.v_des[i];
      bool capped = false;
      out.field.cells[i][c] = model.v_des[i] + eval.evaluate(i, Probe{grid.center(c), current, false}, &capped);
      out.capped += capped ? 1 : 0;
    }
  }
  return out;
}

namespace {

double max_difference(const VelocityField& a, const VelocityField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < a.agents[i].size(); ++k) {
      worst = std::max(worst, norm(a.agents[i][k] - b.agents[i][k]));
    }
    for (std::size_t c = 0; c < a.cells[i].size(); ++c) {
      worst = std::max(worst, norm(a.cells[i][c] - b.cells[i][c]));
    }
  }
  return worst;
}

}  // namespace

VelocitySolution solve_implicit_velocity(const TwoScaleState& state, const Domain& domain,
                                         const VelocityModel& model) {
  if (!model.is_implicit()) throw ContractViolation("solve_implicit_velocity: variant is explicit");
  if (!(model.fp_tol > 0.0) || model.fp_max_iter == 0) {
    throw ContractViolation("solve_implicit_velocity: need fp_tol > 0 and fp_max_iter >= 1");
  }
  VelocityField current = VelocityField::desired(state, model);
  VelocitySolution next;
  for (std::size_t n = 1; n <= model.fp_max_iter; ++n) {
    next = apply_velocity_map(state, domain, model, &current);
    next.iterations = n;
    next.residual = max_difference(next.field, current);
    if (next.residual < model.fp_tol) {
      next.converged = true;
      return next;
    }
    current = next.field;
  }
  next.converged = false;
  return next;
}

VelocitySolution resolve_velocities(const TwoScaleState& state, const Domain& domain,
                                    const VelocityModel& model) {
  if (model.is_implicit()) return solve_implicit_velocity(state, domain, model);
  return apply_velocity_map(state, domain, model, nullptr);
}

}  // namespace crowdsim
