#pragma once

#include <string>
#include <vector>

namespace zrp {

// Per-site jump rates c_x(.): tabulated head c_x(0..k_head) plus an exact
// linear tail c_x(k) = tail_theta[x] * k for k > k_head.
class RateFamily {
  public:
    RateFamily(std::vector<std::vector<double>> head, std::vector<double> tail_theta);

    int sites() const { return static_cast<int>(head_.size()); }
    int k_head() const { return k_head_; }
    double tail_theta(int x) const { return theta_[x]; }
    const std::vector<double>& head(int x) const { return head_[x]; }

    double rate(int x, long k) const {
        if (k <= k_head_) return head_[x][static_cast<std::size_t>(k)];
        return theta_[x] * static_cast<double>(k);
    }

    // log c_x(k)! with c_x(0)! = 1.
    double log_rate_factorial(int x, long k) const;

    // Largest/smallest slope of c_x over k >= 1 (head and tail): the envelope
    // constants of the family, c_lo[x]*k <= c_x(k) <= c_hi[x]*k.
    double min_slope(int x) const { return c_lo_[x]; }
    double max_slope(int x) const { return c_hi_[x]; }
    double min_slope() const;
    double max_slope() const;

    bool homogeneous() const;

    std::string to_spec_text() const;

  private:
    std::vector<std::vector<double>> head_;
    std::vector<double> theta_;
    std::vector<std::vector<double>> log_fact_prefix_;  // per site, log c!(0..k_head)
    std::vector<double> c_lo_, c_hi_;
    int k_head_ = 0;
};

// Validating constructor wrapper; error messages name the violated contract
// (NonzeroAtZero, NonpositiveRate, NonpositiveTail).
RateFamily build_rate_family(std::vector<std::vector<double>> head, std::vector<double> tail_theta);

// Named models used throughout the test and acceptance suites.
//   linear            c(k) = k
//   linear-theta:t    c(k) = t*k
//   alternating:a,b   c_x(k) = a*k on even sites, b*k on odd sites
//   staircase         c(k) = k + 0.5*(k mod 2)
RateFamily preset_rates(const std::string& name, int sites);

// Plain-text key/value rate file (grammar in the README).
RateFamily parse_rate_spec(const std::string& text);
RateFamily load_rate_spec(const std::string& path);

// h_x(k) = (k+1) / c_x(k+1)
double h_factor(const RateFamily& rf, int x, long k);

struct ConditionReport {
    double a1 = 0.0;        // (LG): sup |c(k+1)-c(k)|
    int k0 = 0;             // (M): smallest admissible step
    double a2 = 0.0;        // (M): inf c(k+k0)-c(k)
    double c1 = 0.0;        // lower envelope slope
    double c2 = 0.0;        // upper envelope slope
    double B = 0.0;         // (a1/a2)*k0*(k0+1) + k0 + 1
    double E_inf = 0.0;     // inf sqrt(r) mu(R=r) over the sample
    double E_sup = 0.0;
    bool lg_ok = false;
    bool m_ok = false;
    bool e_ok = false;
};

// Scans the head table plus tail for the (LG)/(M) constants, and evaluates the
// (E) statistic sqrt(r)*mu_{Lambda,phi(r/|Lambda|)}(R=r) on the given
// (|Lambda|, r) sample pairs by exact convolution.
ConditionReport verify_conditions(const RateFamily& rf, int k0_max,
                                  const std::vector<std::pair<int, long>>& e_sample = {});

// inf over k >= 0 of c_x(k+k0) - c_x(k), minimized over sites.
double monotonicity_infimum(const RateFamily& rf, int k0);

// Colour rate split for a homogeneous rate c:
//   c1(k1,k2) = k1*c(k1+k2)/(k1+k2), c2 = c(k1+k2) - c1; c1(0,m) = 0.
std::pair<double, double> colour_rates(const RateFamily& hom, long k1, long k2);

// Rates for one colour conditioned on the other colour's configuration eta2:
//   c~_x(k) = k*c(k + eta2[x]) / (k + eta2[x]).
RateFamily conditioned_rate_family(const RateFamily& hom, const std::vector<int>& eta2);

// Same site pattern continued periodically onto `sites` sites.
RateFamily cycle_to_sites(const RateFamily& rf, int sites);

// Restriction of the family to a subset of its sites.
RateFamily subfamily(const RateFamily& rf, const std::vector<int>& sites);

}  // namespace zrp
