#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "binlat/csv.hpp"
#include "binlat/errors.hpp"
#include "binlat/market_data.hpp"

using namespace binlat;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

LogReturnSeries make_returns(const std::vector<std::string>& dates,
                             const std::vector<double>& values) {
  LogReturnSeries out;
  out.r.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < dates.size(); ++i) {
    out.dates.push_back(parse_date(dates[i]));
    out.r[static_cast<Eigen::Index>(i)] = values[i];
  }
  return out;
}

// exact binomial cdf tails in long double, independent of the library routine
double brute_sign_test(int n_up, int n, double p0) {
  long double lo = 0, hi = 0;
  for (int j = 0; j <= n; ++j) {
    long double term = 1.0L;
    for (int i = 0; i < j; ++i) term *= static_cast<long double>(n - i) / (i + 1);
    term *= std::pow(static_cast<long double>(p0), j) *
            std::pow(1.0L - static_cast<long double>(p0), n - j);
    if (j <= n_up) lo += term;
    if (j >= n_up) hi += term;
  }
  const long double p = 2.0L * std::min(lo, hi);
  return static_cast<double>(std::min(1.0L, p));
}

}  // namespace

TEST_CASE("price series loader validates and parses") {
  const std::string path = temp_path("binlat_prices.csv");
  write_text_file(path, "date,close\n2020-01-02,100\n2020-01-03,101.5\n2020-01-06,99\n");
  const PriceSeries ps = load_price_series(path);
  REQUIRE(ps.close.size() == 3);
  CHECK(ps.close[1] == 101.5);
  CHECK(ps.dates[2] == Date{2020, 1, 6});

  write_text_file(path, "date,close\n2020-01-03,100\n2020-01-02,101\n");
  CHECK_THROWS_AS(load_price_series(path), ValidationError);  // dates out of order
  write_text_file(path, "date,close\n2020-01-02,100\n2020-01-02,101\n");
  CHECK_THROWS_AS(load_price_series(path), ValidationError);  // duplicate date
  write_text_file(path, "date,close\n2020-01-02,-5\n");
  CHECK_THROWS_AS(load_price_series(path), ValidationError);  // non-positive price
  std::filesystem::remove(path);
}

TEST_CASE("rate curve lookup is previous-quote with front extension") {
  const std::string path = temp_path("binlat_rates.csv");
  write_text_file(path, "date,rate\n2024-01-05,0.02\n2024-01-10,0.03\n");
  const RateCurve rc = load_rate_curve(path);
  CHECK(rc.at(parse_date("2024-01-01")) == 0.02);
  CHECK(rc.at(parse_date("2024-01-05")) == 0.02);
  CHECK(rc.at(parse_date("2024-01-07")) == 0.02);
  CHECK(rc.at(parse_date("2024-01-10")) == 0.03);
  CHECK(rc.at(parse_date("2030-06-01")) == 0.03);
  std::filesystem::remove(path);
}

TEST_CASE("option chain loader enforces a single quote date and future expiries") {
  const std::string path = temp_path("binlat_chain.csv");
  write_text_file(path,
                  "quote_date,expiry,strike,kind,price\n"
                  "2024-03-01,2024-06-21,100,call,8.5\n"
                  "2024-03-01,2024-06-21,100,put,6.25\n");
  const OptionChain chain = load_option_chain(path);
  CHECK(chain.quote_date == Date{2024, 3, 1});
  REQUIRE(chain.quotes.size() == 2);
  CHECK(chain.quotes[0].kind == OptionKind::call);
  CHECK(chain.quotes[1].kind == OptionKind::put);
  CHECK(chain.quotes[1].price == 6.25);

  write_text_file(path,
                  "quote_date,expiry,strike,kind,price\n"
                  "2024-03-01,2024-06-21,100,call,8.5\n"
                  "2024-03-04,2024-06-21,100,put,6.25\n");
  CHECK_THROWS_AS(load_option_chain(path), ValidationError);  // two quote dates
  write_text_file(path,
                  "quote_date,expiry,strike,kind,price\n"
                  "2024-03-01,2024-02-16,100,call,8.5\n");
  CHECK_THROWS_AS(load_option_chain(path), ValidationError);  // expiry in the past
  write_text_file(path,
                  "quote_date,expiry,strike,kind,price\n"
                  "2024-03-01,2024-06-21,100,straddle,8.5\n");
  CHECK_THROWS_AS(load_option_chain(path), ValidationError);  // unknown kind
  std::filesystem::remove(path);
}

TEST_CASE("log returns are consecutive ratios stamped with the later date") {
  PriceSeries ps;
  ps.dates = {parse_date("2020-01-02"), parse_date("2020-01-03"), parse_date("2020-01-06")};
  ps.close.resize(3);
  ps.close << 100.0, 110.0, 99.0;
  const LogReturnSeries lr = log_returns(ps);
  REQUIRE(lr.r.size() == 2);
  CHECK(lr.r[0] == doctest::Approx(std::log(1.1)).epsilon(1e-15));
  CHECK(lr.r[1] == doctest::Approx(std::log(0.9)).epsilon(1e-15));
  CHECK(lr.dates[0] == Date{2020, 1, 3});
  CHECK(lr.dates[1] == Date{2020, 1, 6});

  PriceSeries tiny;
  tiny.dates = {parse_date("2020-01-02")};
  tiny.close.resize(1);
  tiny.close << 100.0;
  CHECK_THROWS_AS(log_returns(tiny), ValidationError);
}

TEST_CASE("rolling upturn probability counts zeros as upturns") {
  const LogReturnSeries lr = make_returns(
      {"2024-01-02", "2024-01-03", "2024-01-04", "2024-01-05", "2024-01-08"},
      {0.01, -0.02, -0.005, 0.015, 0.0});
  const auto est = rolling_upturn_probability(lr, 3);
  REQUIRE(est.size() == 3);
  CHECK(est[0].window_end == Date{2024, 1, 4});
  CHECK(est[0].n_up == 1);
  CHECK(est[0].n_total == 3);
  CHECK(est[0].p_hat == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(est[1].n_up == 1);
  CHECK(est[2].n_up == 2);  // zero return counts as up
  CHECK(est[2].window_end == Date{2024, 1, 8});
  CHECK_THROWS_AS(rolling_upturn_probability(lr, 0), ValidationError);
  CHECK_THROWS_AS(rolling_upturn_probability(lr, 6), ValidationError);
}

TEST_CASE("two-sided sign test matches exact binomial tails") {
  CHECK(sign_test_two_sided(0, 10, 0.5) == doctest::Approx(0.001953125).epsilon(1e-14));
  CHECK(sign_test_two_sided(8, 10, 0.5) == doctest::Approx(0.109375).epsilon(1e-14));
  CHECK(sign_test_two_sided(5, 10, 0.5) == 1.0);
  CHECK(sign_test_two_sided(3, 15, 0.62) ==
        doctest::Approx(0.002269600087749589).epsilon(1e-12));
  CHECK(sign_test_two_sided(14, 15, 0.62) ==
        doctest::Approx(0.015675836565407112).epsilon(1e-12));

  for (const double p0 : {0.3, 0.5, 0.62}) {
    for (const int n : {1, 2, 7, 18, 30}) {
      for (int k = 0; k <= n; ++k) {
        CHECK(sign_test_two_sided(k, n, p0) ==
              doctest::Approx(brute_sign_test(k, n, p0)).epsilon(1e-10));
      }
    }
  }
  CHECK_THROWS_AS(sign_test_two_sided(5, 4, 0.5), ValidationError);
  CHECK_THROWS_AS(sign_test_two_sided(-1, 4, 0.5), ValidationError);
  CHECK_THROWS_AS(sign_test_two_sided(2, 4, 0.0), ValidationError);
}

TEST_CASE("weekly sign tests drop partially covered edge weeks") {
  // Wed Jan 3 .. Tue Jan 16 2024, weekdays only. The first and last weeks are
  // only partially inside the sample, so a single full week must survive.
  const LogReturnSeries lr = make_returns(
      {"2024-01-03", "2024-01-04", "2024-01-05", "2024-01-08", "2024-01-09",
       "2024-01-10", "2024-01-11", "2024-01-12", "2024-01-15", "2024-01-16"},
      {0.01, 0.01, -0.01, 0.01, 0.01, -0.01, 0.01, -0.01, 0.01, 0.01});
  const auto tests = interval_sign_tests(lr, Interval::week, 0.5);
  REQUIRE(tests.size() == 1);
  CHECK(tests[0].start == Date{2024, 1, 8});
  CHECK(tests[0].end == Date{2024, 1, 12});
  CHECK(tests[0].n_total == 5);
  CHECK(tests[0].n_up == 3);
  CHECK(tests[0].p_value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("monthly sign tests keep only fully covered months") {
  std::vector<std::string> dates;
  std::vector<double> vals;
  // daily observations 2024-01-31 .. 2024-03-01 inclusive
  dates.push_back("2024-01-31");
  vals.push_back(0.01);
  for (int d = 1; d <= 29; ++d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "2024-02-%02d", d);
    dates.emplace_back(buf);
    vals.push_back(d % 3 == 0 ? -0.01 : 0.01);
  }
  dates.push_back("2024-03-01");
  vals.push_back(0.01);
  const auto tests = interval_sign_tests(make_returns(dates, vals), Interval::month, 0.5);
  REQUIRE(tests.size() == 1);
  CHECK(tests[0].start == Date{2024, 2, 1});
  CHECK(tests[0].end == Date{2024, 2, 29});
  CHECK(tests[0].n_total == 29);
  CHECK(tests[0].n_up == 20);
}

TEST_CASE("lattice-implied upturn probabilities obey their closed forms") {
  const double dt = 1.0 / 252.0;
  const CrrJrImplied ex = crr_jr_implied_p(0.08, 0.2, 0.02, dt);
  CHECK(ex.p_crr == doctest::Approx(0.5094491118252307).epsilon(1e-14));
  CHECK(ex.p_jr == doctest::Approx(0.5188982236504613).epsilon(1e-14));
  CHECK_FALSE(ex.clamped_crr);
  CHECK_FALSE(ex.clamped_jr);

  // mu = sigma^2/2 kills the log-drift term
  CHECK(crr_jr_implied_p(0.02, 0.2, 0.05, dt).p_crr == 0.5);
  // mu = r kills the excess-return term
  CHECK(crr_jr_implied_p(0.07, 0.2, 0.07, dt).p_jr == 0.5);
  // the variant uses |mu - r|, so it never drops below one half
  CHECK(crr_jr_implied_p(0.01, 0.2, 0.08, dt).p_jr > 0.5);

  const CrrJrImplied hot = crr_jr_implied_p(50.0, 0.05, 0.0, 1.0);
  CHECK(hot.clamped_crr);
  CHECK(hot.clamped_jr);
  CHECK(hot.p_crr == 1.0 - 1e-12);
  CHECK_THROWS_AS(crr_jr_implied_p(0.08, 0.0, 0.02, dt), ValidationError);
  CHECK_THROWS_AS(crr_jr_implied_p(0.08, 0.2, 0.02, 0.0), ValidationError);
}

TEST_CASE("gbm parameter estimates invert the discretization") {
  // two returns a +/- b give mean a and unbiased variance 2 b^2 exactly
  const LogReturnSeries lr =
      make_returns({"2024-01-02", "2024-01-03"}, {0.001 + 0.004, 0.001 - 0.004});
  const GbmEstimate est = estimate_gbm_params(lr, 1.0 / 252.0);
  CHECK(est.n == 2);
  CHECK(est.sigma_hat == doctest::Approx(0.0897997772825746).epsilon(1e-14));
  CHECK(est.mu_hat == doctest::Approx(0.256032).epsilon(1e-14));

  const LogReturnSeries single = make_returns({"2024-01-02"}, {0.01});
  CHECK_THROWS_AS(estimate_gbm_params(single, 1.0 / 252.0), ValidationError);
  CHECK_THROWS_AS(estimate_gbm_params(lr, 0.0), ValidationError);
}
