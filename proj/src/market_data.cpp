#include "binlat/market_data.hpp"

#include <algorithm>
#include <cmath>

#include "binlat/csv.hpp"
#include "binlat/errors.hpp"
#include "binlat/mathutil.hpp"

namespace binlat {

namespace {

void require_finite_positive(double v, const std::string& context) {
  if (!std::isfinite(v) || v <= 0.0)
    throw ValidationError(context + ": price must be positive and finite");
}

// P(X <= k) and P(X >= k) for X ~ Binomial(n, p), by direct pmf summation.
// Terms come from lgamma logs; fine through the n used by the sign test.
void binom_tails(int k, int n, double p, double* lower, double* upper) {
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double pmf = std::exp(log_binom_coef(n, i) + i * lp + (n - i) * lq);
    if (i <= k) lo += pmf;
    if (i >= k) hi += pmf;
  }
  *lower = lo;
  *upper = hi;
}

std::int64_t group_key(const Date& d, Interval iv) {
  switch (iv) {
    case Interval::week:
      return week_index(d);
    case Interval::month:
      return static_cast<std::int64_t>(d.y) * 12 + (d.m - 1);
    case Interval::year:
      return d.y;
  }
  throw ValidationError("unknown interval");
}

}  // namespace

double RateCurve::at(const Date& d) const {
  if (dates.empty()) throw ValidationError("empty rate curve");
  auto it = std::upper_bound(dates.begin(), dates.end(), d);
  if (it == dates.begin()) return rate[0];
  return rate[static_cast<Eigen::Index>(it - dates.begin()) - 1];
}

PriceSeries load_price_series(const std::string& path) {
  CsvTable t = read_csv(path);
  require_header(t, {"date", "close"}, path);
  if (t.rows.empty()) throw ValidationError(path + ": no data rows");
  PriceSeries s;
  s.dates.reserve(t.rows.size());
  s.close.resize(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string ctx = path + ":" + std::to_string(i + 2);
    Date d = parse_date(t.rows[i][0]);
    if (!s.dates.empty() && !(s.dates.back() < d))
      throw ValidationError(ctx + ": dates must be strictly increasing");
    double close = parse_double_field(t.rows[i][1], ctx);
    require_finite_positive(close, ctx);
    s.dates.push_back(d);
    s.close[static_cast<Eigen::Index>(i)] = close;
  }
  return s;
}

RateCurve load_rate_curve(const std::string& path) {
  CsvTable t = read_csv(path);
  require_header(t, {"date", "rate"}, path);
  if (t.rows.empty()) throw ValidationError(path + ": no data rows");
  RateCurve c;
  c.rate.resize(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string ctx = path + ":" + std::to_string(i + 2);
    Date d = parse_date(t.rows[i][0]);
    if (!c.dates.empty() && !(c.dates.back() < d))
      throw ValidationError(ctx + ": dates must be strictly increasing");
    double r = parse_double_field(t.rows[i][1], ctx);
    if (!std::isfinite(r)) throw ValidationError(ctx + ": rate must be finite");
    c.dates.push_back(d);
    c.rate[static_cast<Eigen::Index>(i)] = r;
  }
  return c;
}

OptionChain load_option_chain(const std::string& path) {
  CsvTable t = read_csv(path);
  require_header(t, {"quote_date", "expiry", "strike", "kind", "price"}, path);
  if (t.rows.empty()) throw ValidationError(path + ": no data rows");
  OptionChain chain;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string ctx = path + ":" + std::to_string(i + 2);
    Date qd = parse_date(t.rows[i][0]);
    if (i == 0)
      chain.quote_date = qd;
    else if (!(qd == chain.quote_date))
      throw ValidationError(ctx + ": all rows must share one quote date");
    OptionQuote q;
    q.expiry = parse_date(t.rows[i][1]);
    if (!(chain.quote_date < q.expiry))
      throw ValidationError(ctx + ": expiry must postdate the quote date");
    q.strike = parse_double_field(t.rows[i][2], ctx);
    if (!std::isfinite(q.strike) || q.strike <= 0.0)
      throw ValidationError(ctx + ": strike must be positive");
    const std::string& kind = t.rows[i][3];
    if (kind == "call")
      q.kind = OptionKind::call;
    else if (kind == "put")
      q.kind = OptionKind::put;
    else
      throw ValidationError(ctx + ": kind must be 'call' or 'put', got '" + kind + "'");
    q.price = parse_double_field(t.rows[i][4], ctx);
    if (!std::isfinite(q.price) || q.price < 0.0)
      throw ValidationError(ctx + ": price must be non-negative");
    chain.quotes.push_back(q);
  }
  return chain;
}

LogReturnSeries log_returns(const PriceSeries& prices) {
  const Eigen::Index n = prices.close.size();
  if (n < 2) throw ValidationError("log_returns: need at least two observations");
  LogReturnSeries out;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.r = (prices.close.tail(n - 1) / prices.close.head(n - 1)).log();
  return out;
}

std::vector<WindowEstimate> rolling_upturn_probability(const LogReturnSeries& returns,
                                                       int window) {
  const Eigen::Index n = returns.r.size();
  if (window < 1) throw ValidationError("rolling_upturn_probability: window must be >= 1");
  if (n < window)
    throw ValidationError("rolling_upturn_probability: series shorter than window");
  std::vector<WindowEstimate> out;
  out.reserve(static_cast<std::size_t>(n - window + 1));
  int ups = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (returns.r[k] >= 0.0) ++ups;
    if (k >= window) {
      if (returns.r[k - window] >= 0.0) --ups;
    }
    if (k >= window - 1) {
      WindowEstimate e;
      e.window_end = returns.dates[static_cast<std::size_t>(k)];
      e.n_up = ups;
      e.n_total = window;
      e.p_hat = static_cast<double>(ups) / window;
      out.push_back(e);
    }
  }
  return out;
}

double sign_test_two_sided(int n_up, int n_total, double p0) {
  if (n_total < 1) throw ValidationError("sign_test: n_total must be >= 1");
  if (n_up < 0 || n_up > n_total)
    throw ValidationError("sign_test: n_up must lie in [0, n_total]");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError("sign_test: p0 must lie in (0,1)");
  double lower, upper;
  binom_tails(n_up, n_total, p0, &lower, &upper);
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

std::vector<IntervalSignTest> interval_sign_tests(const LogReturnSeries& returns,
                                                  Interval interval, double p0) {
  const std::size_t n = returns.dates.size();
  if (n == 0) throw ValidationError("interval_sign_tests: empty series");

  struct Group {
    std::size_t first, last;
    std::int64_t key;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t key = group_key(returns.dates[i], interval);
    if (groups.empty() || groups.back().key != key)
      groups.push_back({i, i, key});
    else
      groups.back().last = i;
  }

  // Drop edge groups the data does not cover in full calendar terms.
  const Date before = civil_from_days(days_from_civil(returns.dates.front()) - 1);
  const Date after = civil_from_days(days_from_civil(returns.dates.back()) + 1);
  std::size_t lo = 0, hi = groups.size();
  if (!groups.empty() && group_key(before, interval) == groups.front().key) ++lo;
  if (hi > lo && group_key(after, interval) == groups.back().key) --hi;

  std::vector<IntervalSignTest> out;
  for (std::size_t g = lo; g < hi; ++g) {
    IntervalSignTest t;
    t.start = returns.dates[groups[g].first];
    t.end = returns.dates[groups[g].last];
    t.n_total = static_cast<int>(groups[g].last - groups[g].first + 1);
    for (std::size_t i = groups[g].first; i <= groups[g].last; ++i)
      if (returns.r[static_cast<Eigen::Index>(i)] >= 0.0) ++t.n_up;
    t.p_value = sign_test_two_sided(t.n_up, t.n_total, p0);
    out.push_back(t);
  }
  return out;
}

CrrJrImplied crr_jr_implied_p(double mu, double sigma, double r, double dt) {
  if (!(sigma > 0.0)) throw ValidationError("crr_jr_implied_p: sigma must be positive");
  if (!(dt > 0.0)) throw ValidationError("crr_jr_implied_p: dt must be positive");
  CrrJrImplied out;
  const double sqdt = std::sqrt(dt);
  out.p_crr = 0.5 + (mu - sigma * sigma / 2.0) / (2.0 * sigma) * sqdt;
  out.p_jr = 0.5 + std::abs((mu - r) / sigma) * sqdt;
  constexpr double eps = 1e-12;
  for (auto [p, flag] : {std::pair{&out.p_crr, &out.clamped_crr},
                         std::pair{&out.p_jr, &out.clamped_jr}}) {
    if (*p <= 0.0 || *p >= 1.0) {
      *p = std::clamp(*p, eps, 1.0 - eps);
      *flag = true;
    }
  }
  return out;
}

GbmEstimate estimate_gbm_params(const LogReturnSeries& returns, double dt) {
  const Eigen::Index n = returns.r.size();
  if (n < 2) throw ValidationError("estimate_gbm_params: need at least two returns");
  if (!(dt > 0.0)) throw ValidationError("estimate_gbm_params: dt must be positive");
  const double mean = returns.r.mean();
  const double ss = (returns.r - mean).square().sum();
  GbmEstimate e;
  e.n = static_cast<int>(n);
  e.sigma_hat = std::sqrt(ss / (static_cast<double>(n) - 1.0) / dt);
  e.mu_hat = mean / dt + e.sigma_hat * e.sigma_hat / 2.0;
  return e;
}

}  // namespace binlat
