#include "binlat/informed.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "binlat/errors.hpp"

namespace binlat {

void validate(const TraderSpec& trader, double dt) {
  if (!(dt > 0)) throw ValidationError("trader: dt must be positive");
  if (!std::isfinite(trader.lambda) || trader.lambda < 0)
    throw ValidationError("trader: lambda must be finite and nonnegative");
  if (!(trader.lambda * std::sqrt(dt) < 1.0))
    throw ValidationError("trader: lambda sqrt(dt) must stay below 1 for a valid signal");
  if (!std::isfinite(trader.n_forwards))
    throw ValidationError("trader: n_forwards must be finite");
}

double signal_accuracy(double lambda, double dt) {
  TraderSpec probe;
  probe.lambda = lambda;
  validate(probe, dt);
  return 0.5 * (1.0 + lambda * std::sqrt(dt));
}

double information_ratio(double lambda, double p) {
  if (!(p > 0 && p < 1)) throw ValidationError("information_ratio: p must lie in (0,1)");
  if (!(lambda >= 0)) throw ValidationError("information_ratio: lambda must be nonnegative");
  return 2.0 * lambda * std::sqrt(p * (1.0 - p));
}

double risk_adjusted_return(double n_forwards, double theta, double lambda, double p) {
  if (!(p > 0 && p < 1)) throw ValidationError("risk_adjusted_return: p must lie in (0,1)");
  return (theta + 2.0 * n_forwards * lambda * std::sqrt(p * (1.0 - p))) /
         std::sqrt(1.0 + n_forwards * n_forwards);
}

OptimalAllocation optimal_allocation(double theta, double lambda, double p) {
  if (!(p > 0 && p < 1)) throw ValidationError("optimal_allocation: p must lie in (0,1)");
  if (!(theta > 0))
    throw ValidationError(
        "optimal_allocation: needs a positive market price of risk; the ratio has no "
        "interior maximum otherwise");
  if (!(lambda >= 0)) throw ValidationError("optimal_allocation: lambda must be nonnegative");
  OptimalAllocation out;
  const double edge = 2.0 * lambda * std::sqrt(p * (1.0 - p));
  out.n_opt = edge / theta;
  out.theta_opt = std::sqrt(theta * theta + edge * edge);
  return out;
}

double FourOutcomeLaw::mean() const {
  double m = 0;
  for (int i = 0; i < 4; ++i) m += prob[i] * outcome[i];
  return m;
}

double FourOutcomeLaw::variance() const {
  const double m = mean();
  double v = 0;
  for (int i = 0; i < 4; ++i) v += prob[i] * (outcome[i] - m) * (outcome[i] - m);
  return v;
}

namespace {

struct StepNodes {
  double s_up = 0;
  double s_down = 0;
  double forward = 0;
};

StepNodes step_nodes(const StepInputs& in) {
  if (!(in.spot > 0)) throw ValidationError("step inputs: spot must be positive");
  if (!(in.eta > 0)) throw ValidationError("step inputs: eta must be positive");
  if (!(in.p > 0 && in.p < 1)) throw ValidationError("step inputs: p must lie in (0,1)");
  if (!(in.dt > 0)) throw ValidationError("step inputs: dt must be positive");
  const double sdt = std::sqrt(in.dt);
  const double xi_up = std::sqrt((1.0 - in.p) / in.p);
  const double xi_down = -std::sqrt(in.p / (1.0 - in.p));
  StepNodes nodes;
  nodes.s_up = in.spot * std::exp(in.nu * in.dt + in.eta * sdt * xi_up);
  nodes.s_down = in.spot * std::exp(in.nu * in.dt + in.eta * sdt * xi_down);
  nodes.forward = in.spot * std::exp(in.r * in.dt);
  return nodes;
}

void fill_probs(FourOutcomeLaw* law, double p, double accuracy) {
  law->prob[0] = p * accuracy;
  law->prob[1] = (1.0 - p) * accuracy;
  law->prob[2] = p * (1.0 - accuracy);
  law->prob[3] = (1.0 - p) * (1.0 - accuracy);
}

}  // namespace

FourOutcomeLaw forward_step(const StepInputs& inputs, const TraderSpec& trader) {
  validate(trader, inputs.dt);
  const StepNodes nodes = step_nodes(inputs);
  const double acc = signal_accuracy(trader.lambda, inputs.dt);
  const double n = trader.n_forwards;
  FourOutcomeLaw law;
  law.outcome[0] = n * (nodes.s_up - nodes.forward);
  law.outcome[1] = n * (nodes.forward - nodes.s_down);
  law.outcome[2] = n * (nodes.forward - nodes.s_up);
  law.outcome[3] = n * (nodes.s_down - nodes.forward);
  fill_probs(&law, inputs.p, acc);
  return law;
}

FourOutcomeLaw enhanced_step_distribution(const StepInputs& inputs, const TraderSpec& trader) {
  validate(trader, inputs.dt);
  const StepNodes nodes = step_nodes(inputs);
  const double acc = signal_accuracy(trader.lambda, inputs.dt);
  const double n = trader.n_forwards;
  FourOutcomeLaw law;
  law.outcome[0] = nodes.s_up + n * (nodes.s_up - nodes.forward);
  law.outcome[1] = nodes.s_down + n * (nodes.forward - nodes.s_down);
  law.outcome[2] = nodes.s_up + n * (nodes.forward - nodes.s_up);
  law.outcome[3] = nodes.s_down + n * (nodes.s_down - nodes.forward);
  fill_probs(&law, inputs.p, acc);
  return law;
}

double csy_step_q(double nu, double r, double eta, double p, double dt) {
  if (!(eta > 0)) throw ValidationError("csy_step_q: eta must be positive");
  if (!(p > 0 && p < 1)) throw ValidationError("csy_step_q: p must lie in (0,1)");
  if (!(dt > 0)) throw ValidationError("csy_step_q: dt must be positive");
  return p - ((nu - r) / eta) * std::sqrt(p * (1.0 - p) * dt);
}

InformedStep informed_step(const StepInputs& inputs, const TraderSpec& trader,
                           int step_index) {
  validate(trader, inputs.dt);
  if (!(inputs.eta > 0)) throw ValidationError("informed_step: eta must be positive");
  if (!(inputs.p > 0 && inputs.p < 1))
    throw ValidationError("informed_step: p must lie in (0,1)");
  const double convexity_adjusted = inputs.nu - 0.5 * inputs.eta * inputs.eta;
  if (!(inputs.r > 0) || !(convexity_adjusted > inputs.r)) {
    std::string where = step_index >= 0 ? " at step " + std::to_string(step_index) : "";
    throw ValidationError("informed_step: admissibility needs nu - eta^2/2 > r > 0" + where +
                          " (nu=" + std::to_string(inputs.nu) +
                          ", eta=" + std::to_string(inputs.eta) +
                          ", r=" + std::to_string(inputs.r) + ")");
  }
  InformedStep st;
  st.theta_forward = (convexity_adjusted - inputs.r) / inputs.eta;
  if (trader.lambda == 0) {
    st.dividend = 0;
    st.n_opt = 0;
  } else {
    const double edge = 2.0 * trader.lambda * std::sqrt(inputs.p * (1.0 - inputs.p));
    st.dividend = inputs.eta * (std::sqrt(st.theta_forward * st.theta_forward + edge * edge) -
                                st.theta_forward);
    st.n_opt = edge / st.theta_forward;
  }
  st.nu_informed = inputs.nu + st.dividend;
  st.theta_pricing = (st.nu_informed - inputs.r) / inputs.eta;
  st.q = csy_step_q(st.nu_informed, inputs.r, inputs.eta, inputs.p, inputs.dt);
  return st;
}

ConditionalPriceResult price_informed(const ConditionalTreeInputs& inputs,
                                      const OptionSpec& option) {
  const int n = inputs.grid.steps();
  if (n < 1) throw ValidationError("price_informed: grid has no steps");
  if (!inputs.grid.is_uniform())
    throw ValidationError("price_informed: conditional trees need a uniform grid");
  validate(inputs.params);
  if (!(inputs.s0 > 0)) throw ValidationError("price_informed: s0 must be positive");
  const double dt = inputs.grid.dt(0);
  validate(inputs.trader, dt);
  if (inputs.intensity.xi.size() < n)
    throw ValidationError("price_informed: intensity series has " +
                          std::to_string(inputs.intensity.xi.size()) + " steps, grid needs " +
                          std::to_string(n));

  std::vector<double> rates(static_cast<std::size_t>(n));
  if (inputs.r_steps.size() == 1) {
    std::fill(rates.begin(), rates.end(), inputs.r_steps[0]);
  } else if (inputs.r_steps.size() == static_cast<std::size_t>(n)) {
    rates = inputs.r_steps;
  } else {
    throw ValidationError("price_informed: r_steps must hold 1 or " + std::to_string(n) +
                          " rates, got " + std::to_string(inputs.r_steps.size()));
  }

  IntensitySeries local = inputs.intensity;
  local.xi = inputs.intensity.xi.head(n).eval();
  const VolatilityLadder ladder = eta_ladder(inputs.params, local, dt, inputs.eta_indexing);
  const double p = local.p;

  ConditionalPriceResult out;
  out.eta = ladder.eta;
  out.q.resize(n);
  out.nu_informed.resize(n);
  out.dividend.resize(n);
  out.theta_forward.resize(n);
  out.n_opt.resize(n);

  constexpr double kQClampEps = 1e-12;
  std::vector<OneStepMove> moves(static_cast<std::size_t>(n));
  const double sdt = std::sqrt(dt);
  const double xi_up = local.xi_up;
  const double xi_down = local.xi_down;
  for (int k = 0; k < n; ++k) {
    StepInputs step;
    step.spot = inputs.s0;  // not used by the pricing weight
    step.nu = inputs.params.nu;
    step.eta = ladder.eta[k];
    step.r = rates[static_cast<std::size_t>(k)];
    step.p = p;
    step.dt = dt;
    const InformedStep st = informed_step(step, inputs.trader, k);

    double q = st.q;
    bool clamped = false;
    if (!(q > 0 && q < 1)) {
      if (inputs.tree.q_policy == QPolicy::strict)
        throw ArbitrageError(k, q,
                             "price_informed: pricing weight " + std::to_string(q) +
                                 " outside (0,1) at step " + std::to_string(k));
      q = std::clamp(q, kQClampEps, 1.0 - kQClampEps);
      clamped = true;
      ++out.clamp_count;
    }

    OneStepMove mv;
    mv.p = p;
    mv.m1 = ladder.eta[k] * sdt * xi_up;
    mv.m2 = ladder.eta[k] * sdt * xi_down;
    mv.up_log = inputs.params.nu * dt + mv.m1;
    mv.down_log = inputs.params.nu * dt + mv.m2;
    mv.q_exact = q;
    mv.q_approx = q;
    mv.clamped = clamped;
    moves[static_cast<std::size_t>(k)] = mv;

    out.q[k] = q;
    out.nu_informed[k] = st.nu_informed;
    out.dividend[k] = st.dividend;
    out.theta_forward[k] = st.theta_forward;
    out.n_opt[k] = st.n_opt;
  }

  MarketParams tree_params;
  tree_params.mu = inputs.params.nu;
  tree_params.sigma = inputs.params.sigma;
  tree_params.r = rates[0];

  const Lattice lattice = Lattice::from_moves(inputs.grid, tree_params, std::move(moves),
                                              inputs.s0, Measure::risk_neutral_approx,
                                              inputs.tree);
  out.recombining = lattice.recombining();

  PricingOptions popts = inputs.pricing;
  popts.r_steps = rates;
  PriceResult priced = price_backward_induction(lattice, option, rates[0], popts);
  out.value = priced.value;
  out.tree = std::move(priced);
  return out;
}

ConditionalPriceResult csy_price(const ConditionalTreeInputs& inputs, const OptionSpec& option) {
  ConditionalTreeInputs plain = inputs;
  plain.trader = TraderSpec{};
  return price_informed(plain, option);
}

}  // namespace binlat
