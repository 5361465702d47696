#include "zrp/rates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "zrp/common.hpp"
#include "zrp/measures.hpp"

namespace zrp {

RateFamily::RateFamily(std::vector<std::vector<double>> head, std::vector<double> tail_theta)
    : head_(std::move(head)), theta_(std::move(tail_theta)) {
    if (head_.empty() || head_.size() != theta_.size())
        throw ConfigError("rate family: need one head table and one tail coefficient per site");
    k_head_ = static_cast<int>(head_[0].size()) - 1;
    for (const auto& h : head_)
        if (static_cast<int>(h.size()) != k_head_ + 1)
            throw ConfigError("rate family: head tables must share one K_head");
    if (k_head_ < 0) throw ConfigError("rate family: head table must contain at least c(0)");

    for (int x = 0; x < sites(); ++x) {
        if (head_[x][0] != 0.0)
            throw ConfigError("rate family: NonzeroAtZero (c_" + std::to_string(x) + "(0) != 0)");
        for (int k = 1; k <= k_head_; ++k)
            if (!(head_[x][static_cast<std::size_t>(k)] > 0.0))
                throw ConfigError("rate family: NonpositiveRate (c_" + std::to_string(x) + "(" +
                                  std::to_string(k) + ") <= 0)");
        if (!(theta_[x] > 0.0))
            throw ConfigError("rate family: NonpositiveTail (theta_" + std::to_string(x) + " <= 0)");
    }

    log_fact_prefix_.resize(head_.size());
    c_lo_.resize(head_.size());
    c_hi_.resize(head_.size());
    for (int x = 0; x < sites(); ++x) {
        auto& pre = log_fact_prefix_[static_cast<std::size_t>(x)];
        pre.resize(static_cast<std::size_t>(k_head_) + 1, 0.0);
        double lo = theta_[x], hi = theta_[x];
        for (int k = 1; k <= k_head_; ++k) {
            pre[static_cast<std::size_t>(k)] =
                pre[static_cast<std::size_t>(k - 1)] + std::log(head_[x][static_cast<std::size_t>(k)]);
            double slope = head_[x][static_cast<std::size_t>(k)] / static_cast<double>(k);
            lo = std::min(lo, slope);
            hi = std::max(hi, slope);
        }
        c_lo_[x] = lo;
        c_hi_[x] = hi;
    }
}

double RateFamily::log_rate_factorial(int x, long k) const {
    if (k <= 0) return 0.0;
    if (k <= k_head_) return log_fact_prefix_[static_cast<std::size_t>(x)][static_cast<std::size_t>(k)];
    // head part + sum_{j=k_head+1..k} log(theta*j)
    double head_part = log_fact_prefix_[static_cast<std::size_t>(x)].back();
    double n_tail = static_cast<double>(k - k_head_);
    double tail_part = n_tail * std::log(theta_[x]) + std::lgamma(static_cast<double>(k) + 1.0) -
                       std::lgamma(static_cast<double>(k_head_) + 1.0);
    return head_part + tail_part;
}

double RateFamily::min_slope() const {
    return *std::min_element(c_lo_.begin(), c_lo_.end());
}

double RateFamily::max_slope() const {
    return *std::max_element(c_hi_.begin(), c_hi_.end());
}

bool RateFamily::homogeneous() const {
    for (int x = 1; x < sites(); ++x)
        if (head_[x] != head_[0] || theta_[x] != theta_[0]) return false;
    return true;
}

std::string RateFamily::to_spec_text() const {
    std::ostringstream out;
    out << "sites = " << sites() << "\n";
    for (int x = 0; x < sites(); ++x) {
        out << "head." << x << " = [";
        for (int k = 0; k <= k_head_; ++k) {
            if (k) out << ", ";
            out << head_[x][static_cast<std::size_t>(k)];
        }
        out << "]\n";
        out << "tail_theta." << x << " = " << theta_[x] << "\n";
    }
    return out.str();
}

RateFamily build_rate_family(std::vector<std::vector<double>> head, std::vector<double> tail_theta) {
    return RateFamily(std::move(head), std::move(tail_theta));
}

namespace {

// k + 0.5*(k mod 2), tabulated far enough that every evaluation in the test
// and acceptance suites stays inside the head.
std::vector<double> staircase_head(int k_head) {
    std::vector<double> h(static_cast<std::size_t>(k_head) + 1, 0.0);
    for (int k = 1; k <= k_head; ++k) h[static_cast<std::size_t>(k)] = k + 0.5 * (k % 2);
    return h;
}

}  // namespace

RateFamily preset_rates(const std::string& name, int sites) {
    if (sites < 1) throw ConfigError("preset_rates: need at least one site");
    auto linear_like = [&](const std::vector<double>& thetas) {
        std::vector<std::vector<double>> head(static_cast<std::size_t>(sites), {0.0});
        std::vector<double> theta(static_cast<std::size_t>(sites));
        for (int x = 0; x < sites; ++x) theta[static_cast<std::size_t>(x)] = thetas[static_cast<std::size_t>(x) % thetas.size()];
        return RateFamily(std::move(head), std::move(theta));
    };

    if (name == "linear") return linear_like({1.0});
    if (name.rfind("linear-theta:", 0) == 0) {
        double t = std::stod(name.substr(13));
        return linear_like({t});
    }
    if (name.rfind("alternating:", 0) == 0) {
        std::string rest = name.substr(12);
        auto comma = rest.find(',');
        if (comma == std::string::npos) throw ConfigError("preset alternating needs two thetas, e.g. alternating:1,2");
        double t1 = std::stod(rest.substr(0, comma));
        double t2 = std::stod(rest.substr(comma + 1));
        return linear_like({t1, t2});
    }
    if (name == "staircase") {
        const int k_head = 1024;
        std::vector<std::vector<double>> head(static_cast<std::size_t>(sites), staircase_head(k_head));
        std::vector<double> theta(static_cast<std::size_t>(sites), 1.0);
        return RateFamily(std::move(head), std::move(theta));
    }
    throw ConfigError("unknown rate preset: " + name);
}

RateFamily parse_rate_spec(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int sites = -1;
    std::vector<std::vector<double>> head;
    std::vector<double> theta;
    std::vector<double> head_all;
    double theta_all = std::numeric_limits<double>::quiet_NaN();

    auto parse_list = [](const std::string& v) {
        std::string s = v;
        std::erase(s, '[');
        std::erase(s, ']');
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream ls(s);
        std::vector<double> out;
        double x;
        while (ls >> x) out.push_back(x);
        if (out.empty()) throw ConfigError("rate spec: empty head list");
        return out;
    };

    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw ConfigError("rate spec line " + std::to_string(lineno) + ": expected key = value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        key.erase(std::remove_if(key.begin(), key.end(), [](char c) { return c == ' ' || c == '\t'; }), key.end());

        if (key == "sites") {
            sites = std::stoi(val);
            if (sites < 1) throw ConfigError("rate spec: sites must be >= 1");
            head.assign(static_cast<std::size_t>(sites), {});
            theta.assign(static_cast<std::size_t>(sites), std::numeric_limits<double>::quiet_NaN());
        } else if (key == "head") {
            head_all = parse_list(val);
        } else if (key == "tail_theta") {
            theta_all = std::stod(val);
        } else if (key.rfind("head.", 0) == 0) {
            if (sites < 0) throw ConfigError("rate spec: sites must come before per-site keys");
            int x = std::stoi(key.substr(5));
            if (x < 0 || x >= sites) throw ConfigError("rate spec: site index out of range: " + key);
            head[static_cast<std::size_t>(x)] = parse_list(val);
        } else if (key.rfind("tail_theta.", 0) == 0) {
            if (sites < 0) throw ConfigError("rate spec: sites must come before per-site keys");
            int x = std::stoi(key.substr(11));
            if (x < 0 || x >= sites) throw ConfigError("rate spec: site index out of range: " + key);
            theta[static_cast<std::size_t>(x)] = std::stod(val);
        } else {
            throw ConfigError("rate spec: unknown key '" + key + "'");
        }
    }
    if (sites < 0) throw ConfigError("rate spec: missing 'sites'");
    for (int x = 0; x < sites; ++x) {
        auto& h = head[static_cast<std::size_t>(x)];
        if (h.empty()) {
            if (head_all.empty()) throw ConfigError("rate spec: no head for site " + std::to_string(x));
            h = head_all;
        }
        double& t = theta[static_cast<std::size_t>(x)];
        if (std::isnan(t)) {
            if (std::isnan(theta_all)) throw ConfigError("rate spec: no tail_theta for site " + std::to_string(x));
            t = theta_all;
        }
    }
    return RateFamily(std::move(head), std::move(theta));
}

RateFamily load_rate_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open rate spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_rate_spec(buf.str());
}

double h_factor(const RateFamily& rf, int x, long k) {
    return static_cast<double>(k + 1) / rf.rate(x, k + 1);
}

double monotonicity_infimum(const RateFamily& rf, int k0) {
    double inf = std::numeric_limits<double>::infinity();
    for (int x = 0; x < rf.sites(); ++x) {
        // mixed head/tail region
        for (long k = 0; k <= rf.k_head(); ++k)
            inf = std::min(inf, rf.rate(x, k + k0) - rf.rate(x, k));
        // pure tail: constant increment theta*k0
        inf = std::min(inf, rf.tail_theta(x) * k0);
    }
    return inf;
}

ConditionReport verify_conditions(const RateFamily& rf, int k0_max,
                                  const std::vector<std::pair<int, long>>& e_sample) {
    ConditionReport rep;
    double a1 = 0.0;
    for (int x = 0; x < rf.sites(); ++x) {
        for (long k = 0; k <= rf.k_head(); ++k)
            a1 = std::max(a1, std::abs(rf.rate(x, k + 1) - rf.rate(x, k)));
        a1 = std::max(a1, rf.tail_theta(x));
    }
    rep.a1 = a1;
    rep.lg_ok = std::isfinite(a1);

    for (int k0 = 1; k0 <= k0_max; ++k0) {
        double inf = monotonicity_infimum(rf, k0);
        if (inf > 0.0) {
            rep.k0 = k0;
            rep.a2 = inf;
            rep.m_ok = true;
            break;
        }
    }
    if (!rep.m_ok)
        throw NumericError("verify_conditions: MNotSatisfied (no k0 <= " + std::to_string(k0_max) +
                           " with positive monotonicity infimum)");

    rep.c1 = rf.min_slope();
    rep.c2 = rf.max_slope();
    rep.B = (rep.a1 / rep.a2) * rep.k0 * (rep.k0 + 1) + rep.k0 + 1;

    if (!e_sample.empty()) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const auto& [n, r] : e_sample) {
            if (n < 2) throw ConfigError("verify_conditions: (E) sample sizes must be >= 2");
            double s = condition_e_statistic(rf, n, r);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        rep.E_inf = lo;
        rep.E_sup = hi;
        rep.e_ok = lo > 0.0 && std::isfinite(hi);
    }
    return rep;
}

std::pair<double, double> colour_rates(const RateFamily& hom, long k1, long k2) {
    if (k1 == 0) return {0.0, k2 > 0 ? hom.rate(0, k2) : 0.0};
    double total = hom.rate(0, k1 + k2);
    double c1 = static_cast<double>(k1) * total / static_cast<double>(k1 + k2);
    return {c1, total - c1};
}

RateFamily cycle_to_sites(const RateFamily& rf, int sites) {
    if (sites == rf.sites()) return rf;
    std::vector<std::vector<double>> head(static_cast<std::size_t>(sites));
    std::vector<double> theta(static_cast<std::size_t>(sites));
    for (int x = 0; x < sites; ++x) {
        head[static_cast<std::size_t>(x)] = rf.head(x % rf.sites());
        theta[static_cast<std::size_t>(x)] = rf.tail_theta(x % rf.sites());
    }
    return RateFamily(std::move(head), std::move(theta));
}

RateFamily subfamily(const RateFamily& rf, const std::vector<int>& sites) {
    std::vector<std::vector<double>> head;
    std::vector<double> theta;
    head.reserve(sites.size());
    theta.reserve(sites.size());
    for (int x : sites) {
        head.push_back(rf.head(x));
        theta.push_back(rf.tail_theta(x));
    }
    return RateFamily(std::move(head), std::move(theta));
}

RateFamily conditioned_rate_family(const RateFamily& hom, const std::vector<int>& eta2) {
    if (!hom.homogeneous())
        throw ConfigError("conditioned_rate_family: base rate must be homogeneous");
    int sites = static_cast<int>(eta2.size());
    int k_head = hom.k_head();
    std::vector<std::vector<double>> head(static_cast<std::size_t>(sites));
    std::vector<double> theta(static_cast<std::size_t>(sites), hom.tail_theta(0));
    for (int x = 0; x < sites; ++x) {
        if (eta2[static_cast<std::size_t>(x)] < 0)
            throw ConfigError("conditioned_rate_family: eta2 must be nonnegative");
        long m = eta2[static_cast<std::size_t>(x)];
        auto& h = head[static_cast<std::size_t>(x)];
        h.resize(static_cast<std::size_t>(k_head) + 1, 0.0);
        for (long k = 1; k <= k_head; ++k)
            h[static_cast<std::size_t>(k)] =
                static_cast<double>(k) * hom.rate(0, k + m) / static_cast<double>(k + m);
        // for k > k_head: c(k+m) = theta*(k+m), so the conditioned rate is exactly theta*k
    }
    return RateFamily(std::move(head), std::move(theta));
}

}  // namespace zrp
