#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "binlat/dates.hpp"

namespace binlat {

struct PriceSeries {
  std::vector<Date> dates;  // strictly increasing
  Eigen::ArrayXd close;     // positive, finite
};

// r[k] = ln(close[k+1]/close[k]); dates hold the return dates (second observation).
struct LogReturnSeries {
  std::vector<Date> dates;
  Eigen::ArrayXd r;
};

struct RateCurve {
  std::vector<Date> dates;
  Eigen::ArrayXd rate;

  // Total lookup: nearest preceding quote, first quote before the curve starts.
  double at(const Date& d) const;
};

enum class OptionKind { call, put };

struct OptionQuote {
  Date expiry;
  double strike = 0;
  OptionKind kind = OptionKind::call;
  double price = 0;
};

struct OptionChain {
  Date quote_date;
  std::vector<OptionQuote> quotes;
};

// CSV schema: date,close
PriceSeries load_price_series(const std::string& path);

// CSV schema: date,rate
RateCurve load_rate_curve(const std::string& path);

// CSV schema: quote_date,expiry,strike,kind,price (kind: call|put).
// All rows must share one quote date; expiries must postdate it.
OptionChain load_option_chain(const std::string& path);

LogReturnSeries log_returns(const PriceSeries& prices);

struct WindowEstimate {
  Date window_end;
  double p_hat = 0;  // fraction of non-negative returns; a zero return counts as an upturn
  int n_up = 0;
  int n_total = 0;
};

// One estimate per window end once `window` observations have accrued.
std::vector<WindowEstimate> rolling_upturn_probability(const LogReturnSeries& returns,
                                                       int window);

// Exact two-sided binomial test of H0: P(upturn) = p0.
// Returns min(1, 2*min(P(X <= n_up), P(X >= n_up))) for X ~ Binomial(n_total, p0).
double sign_test_two_sided(int n_up, int n_total, double p0);

enum class Interval { week, month, year };

struct IntervalSignTest {
  Date start;  // first observation of the interval
  Date end;    // last observation of the interval
  int n_up = 0;
  int n_total = 0;
  double p_value = 1;
};

// Partitions the return series into non-overlapping calendar intervals and runs
// the sign test per interval. Edge intervals that the data does not cover in
// full calendar terms are dropped: the leading group goes when the day before
// the first observation falls in the same group, the trailing group likewise.
std::vector<IntervalSignTest> interval_sign_tests(const LogReturnSeries& returns,
                                                  Interval interval, double p0);

struct CrrJrImplied {
  double p_crr = 0;
  double p_jr = 0;
  bool clamped_crr = false;
  bool clamped_jr = false;
};

// Natural-world upturn probabilities implied by the two classic lattice
// parameterizations at step dt:
//   p_crr = 1/2 + ((mu - sigma^2/2) / (2 sigma)) sqrt(dt)
//   p_jr  = 1/2 + |mu - r| / sigma * sqrt(dt)   (drift-adjusted variant)
// Values falling outside (0,1) are clamped and flagged.
CrrJrImplied crr_jr_implied_p(double mu, double sigma, double r, double dt);

struct GbmEstimate {
  double mu_hat = 0;     // growth rate: mean(r)/dt + sigma_hat^2/2
  double sigma_hat = 0;  // sqrt(unbiased variance of r / dt)
  int n = 0;
};

GbmEstimate estimate_gbm_params(const LogReturnSeries& returns, double dt);

}  // namespace binlat
