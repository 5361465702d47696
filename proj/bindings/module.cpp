// Python bindings for the zero range process toolkit. The module mirrors the
// C++ surface at operation granularity; heavyweight objects (rate families,
// ensembles, generators) are opaque handles with value-returning methods.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "zrp/bdchain.hpp"
#include "zrp/common.hpp"
#include "zrp/dynamics.hpp"
#include "zrp/llt.hpp"
#include "zrp/ordering.hpp"
#include "zrp/spectral.hpp"

namespace py = pybind11;
using namespace zrp;

namespace {

struct PyEnsemble {
    std::shared_ptr<CanonicalEnsemble> ens;
};

struct PyGenerator {
    GeneratorMatrix gen;
};

PyEnsemble make_ensemble(const std::string& rates, int dim, int side, long r) {
    Lattice lat = Lattice::cube(dim, side);
    RateFamily rf = preset_rates(rates, lat.size());
    return {std::make_shared<CanonicalEnsemble>(canonical(rf, lat, r))};
}

py::dict condition_report_dict(const ConditionReport& rep) {
    py::dict d;
    d["a1"] = rep.a1;
    d["k0"] = rep.k0;
    d["a2"] = rep.a2;
    d["c1"] = rep.c1;
    d["c2"] = rep.c2;
    d["B"] = rep.B;
    d["E_inf"] = rep.E_inf;
    d["E_sup"] = rep.E_sup;
    d["lg_ok"] = rep.lg_ok;
    d["m_ok"] = rep.m_ok;
    d["e_ok"] = rep.e_ok;
    return d;
}

}  // namespace

PYBIND11_MODULE(_zrp, m) {
    m.doc() = "inhomogeneous zero range process: measures, spectral constants, birth-death "
              "reductions, local limit scans, dynamics";

    py::register_exception<ConfigError>(m, "ZrpConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "ZrpNumericError", PyExc_RuntimeError);

    py::class_<RateFamily>(m, "RateFamily")
        .def(py::init([](std::vector<std::vector<double>> head, std::vector<double> theta) {
                 return build_rate_family(std::move(head), std::move(theta));
             }),
             py::arg("head"), py::arg("tail_theta"))
        .def_property_readonly("sites", &RateFamily::sites)
        .def_property_readonly("k_head", &RateFamily::k_head)
        .def("rate", &RateFamily::rate, py::arg("site"), py::arg("k"))
        .def("spec_text", &RateFamily::to_spec_text)
        .def("__repr__", [](const RateFamily& rf) {
            return "<RateFamily sites=" + std::to_string(rf.sites()) + ">";
        });

    m.def("preset_rates", &preset_rates, py::arg("name"), py::arg("sites"),
          "named rate families: linear, linear-theta:t, alternating:a,b, staircase");
    m.def("parse_rate_spec", &parse_rate_spec, py::arg("text"));
    m.def("verify_conditions",
          [](const RateFamily& rf, int k0_max, const std::vector<std::pair<int, long>>& sample) {
              return condition_report_dict(verify_conditions(rf, k0_max, sample));
          },
          py::arg("rates"), py::arg("k0_max") = 8,
          py::arg("e_sample") = std::vector<std::pair<int, long>>{});
    m.def("h_factor", &h_factor, py::arg("rates"), py::arg("site"), py::arg("k"));
    m.def("colour_rates", &colour_rates, py::arg("rates"), py::arg("k1"), py::arg("k2"));
    m.def("conditioned_rate_family", &conditioned_rate_family, py::arg("rates"), py::arg("eta2"));

    m.def("marginal_pmf",
          [](const RateFamily& rf, int site, double phi) {
              auto mg = marginal(rf, site, phi);
              return py::make_tuple(mg.pmf, mg.Z);
          },
          py::arg("rates"), py::arg("site"), py::arg("phi"));
    m.def("phi_of_rho",
          [](const RateFamily& rf, double rho) { return phi_of_rho(rf, rho); }, py::arg("rates"),
          py::arg("rho"));
    m.def("moment_table",
          [](const RateFamily& rf, double phi, int order) {
              auto t = moments(rf, phi, order);
              py::dict d;
              d["rho_avg"] = t.rho_avg;
              d["sigma2_avg"] = t.sigma2_avg;
              py::list site;
              for (const auto& s : t.site) {
                  py::dict sd;
                  sd["rho"] = s.rho;
                  sd["sigma2"] = s.sigma2;
                  sd["central"] = s.central;
                  sd["cumulant"] = s.cumulant;
                  site.append(sd);
              }
              d["site"] = site;
              return d;
          },
          py::arg("rates"), py::arg("phi"), py::arg("order") = 8);

    py::class_<PyEnsemble>(m, "CanonicalEnsemble")
        .def_property_readonly("size", [](const PyEnsemble& e) { return e.ens->size(); })
        .def_property_readonly("r", [](const PyEnsemble& e) { return e.ens->r; })
        .def_property_readonly("states", [](const PyEnsemble& e) { return e.ens->states; })
        .def_property_readonly("nu", [](const PyEnsemble& e) { return e.ens->nu; })
        .def("site_marginal", [](const PyEnsemble& e, int x) { return e.ens->site_marginal(x); })
        .def("__repr__", [](const PyEnsemble& e) {
            return "<CanonicalEnsemble states=" + std::to_string(e.ens->size()) + ">";
        });

    m.def("canonical", &make_ensemble, py::arg("rates"), py::arg("dim"), py::arg("side"),
          py::arg("particles"));

    py::class_<PyGenerator>(m, "Generator")
        .def_property_readonly("size", [](const PyGenerator& g) { return g.gen.size(); })
        .def("stationarity_defect", [](const PyGenerator& g) { return stationarity_defect(g.gen); })
        .def("reversibility_defect", [](const PyGenerator& g) { return reversibility_defect(g.gen); })
        .def("dirichlet_form",
             [](const PyGenerator& g, const std::vector<double>& f) { return dirichlet_form(g.gen, f); })
        .def("entropy_production",
             [](const PyGenerator& g, const std::vector<double>& f) {
                 return entropy_production(g.gen, f);
             })
        .def("spectral_gap", [](const PyGenerator& g) { return spectral_gap(g.gen).gap; })
        .def("estimate_constant",
             [](const PyGenerator& g, const std::string& kind, int restarts, std::uint64_t seed) {
                 EstimateOptions opts;
                 opts.restarts = restarts;
                 opts.seed = seed;
                 ConstantKind ck = kind == "ls" ? ConstantKind::log_sobolev
                                                : ConstantKind::entropy_dissipation;
                 if (kind != "ls" && kind != "ed") throw ConfigError("kind must be 'ls' or 'ed'");
                 return estimate_constant(g.gen, ck, opts).value;
             },
             py::arg("kind"), py::arg("restarts") = 32, py::arg("seed") = 20240901);

    m.def("build_generator",
          [](const PyEnsemble& e, const std::string& topology) {
              return PyGenerator{build_generator(e.ens, topology_from_string(topology))};
          },
          py::arg("ensemble"), py::arg("topology") = "nn");

    m.def("spectral_report",
          [](const std::string& rates, int dim, int side, long r, int restarts) {
              auto e = make_ensemble(rates, dim, side, r);
              auto gen = build_generator(e.ens, Topology::nearest_neighbour);
              EstimateOptions opts;
              opts.restarts = restarts;
              auto rep = spectral_report(gen, opts);
              py::dict d;
              d["gap"] = rep.gap;
              d["C_SG"] = rep.c_sg;
              d["C_LS_hat"] = rep.c_ls_hat;
              d["C_ED_hat"] = rep.c_ed_hat;
              return d;
          },
          py::arg("rates"), py::arg("dim"), py::arg("side"), py::arg("particles"),
          py::arg("restarts") = 32);

    m.def("rothaus_check",
          [](const std::vector<double>& nu, const std::vector<double>& f) {
              auto res = rothaus_check(nu, f);
              return py::make_tuple(res.lhs, res.rhs, res.holds);
          },
          py::arg("nu"), py::arg("f"));

    // birth-death layer ------------------------------------------------------
    m.def("boundary_count_law",
          [](const PyEnsemble& e, const std::vector<int>& half1) {
              return boundary_count_law(*e.ens, half1).gamma1;
          },
          py::arg("ensemble"), py::arg("half1"));
    m.def("metropolis_chain",
          [](const std::vector<double>& gamma) {
              auto chain = metropolis_chain(gamma);
              py::dict d;
              d["birth"] = chain.birth;
              d["death"] = chain.death;
              d["stationary"] = chain.stationary;
              d["gap"] = spectral_gap(chain.generator()).gap;
              return d;
          },
          py::arg("gamma"));
    m.def("single_site_chain",
          [](const PyEnsemble& e, int x) {
              auto chain = single_site_chain(*e.ens, x);
              py::dict d;
              d["birth"] = chain.birth;
              d["death"] = chain.death;
              d["stationary"] = chain.stationary;
              d["gap"] = spectral_gap(chain.generator()).gap;
              return d;
          },
          py::arg("ensemble"), py::arg("site"));
    m.def("two_site_logsob",
          [](const PyEnsemble& e, int restarts) {
              EstimateOptions opts;
              opts.restarts = restarts;
              return two_site_logsob(*e.ens, opts);
          },
          py::arg("ensemble"), py::arg("restarts") = 20);
    m.def("miclo_check",
          [](const std::vector<double>& gamma) {
              auto res = miclo_check(gamma, default_a0_grid());
              py::dict d;
              d["satisfied"] = res.satisfied;
              d["A0_min"] = res.a0_min;
              d["rbar"] = res.rbar;
              return d;
          },
          py::arg("gamma"));
    m.def("conditional_difference_check",
          [](const PyEnsemble& e, const std::vector<int>& half1, const std::vector<double>& f, long r1) {
              auto res = conditional_difference_check(*e.ens, half1, f, r1);
              py::dict d;
              d["lhs"] = res.lhs;
              d["rhs"] = res.rhs;
              d["abs_err"] = res.abs_err;
              d["mirror_err"] = res.mirror_err;
              return d;
          },
          py::arg("ensemble"), py::arg("half1"), py::arg("f"), py::arg("r1"));

    // local limit layer -----------------------------------------------------
    m.def("hermite", &hermite, py::arg("degree"), py::arg("x"));
    m.def("edgeworth_terms", [](int j) {
        py::list out;
        for (const auto& t : edgeworth_terms(j)) out.append(py::make_tuple(t.k, t.a));
        return out;
    });
    m.def("sum_pmf",
          [](const RateFamily& rf, int sites, double phi) { return sum_distribution(rf, sites, phi).pmf; },
          py::arg("rates"), py::arg("sites"), py::arg("phi"));
    m.def("llt_normal",
          [](const RateFamily& rf, int sites, long r, int order) {
              auto res = llt_normal(rf, sites, r, order);
              return py::make_tuple(res.approx, res.exact, res.abs_err);
          },
          py::arg("rates"), py::arg("sites"), py::arg("r"), py::arg("order") = 2);
    m.def("llt_normal_sup_error", &llt_normal_sup_error, py::arg("rates"), py::arg("sites"),
          py::arg("phi"), py::arg("order"), py::arg("z_max") = 6.0);
    m.def("llt_poisson",
          [](const RateFamily& rf, int sites, long r, long k) {
              auto res = llt_poisson(rf, sites, r, k);
              return py::make_tuple(res.approx, res.exact, res.abs_err);
          },
          py::arg("rates"), py::arg("sites"), py::arg("r"), py::arg("k"));
    m.def("condition_e_statistic", &condition_e_statistic, py::arg("rates"), py::arg("sites"),
          py::arg("r"));

    // ordering / dynamics -----------------------------------------------------
    m.def("check_stochastic_domination",
          [](const PyEnsemble& lo, const PyEnsemble& hi) {
              auto res = check_stochastic_domination(*lo.ens, *hi.ens);
              py::dict d;
              d["dominated"] = res.dominated;
              d["coupling_support"] = res.coupling.size();
              if (!res.dominated) {
                  d["nu_lo_event"] = res.nu_lo_event;
                  d["nu_hi_event"] = res.nu_hi_event;
              }
              return d;
          },
          py::arg("lower"), py::arg("upper"));

    m.def("simulate",
          [](const RateFamily& rf, int dim, int side, long r, const std::string& topology,
             double horizon, double sample_dt, std::uint64_t seed) {
              Lattice lat = Lattice::cube(dim, side);
              SimOptions opts;
              opts.horizon = horizon;
              opts.sample_dt = sample_dt;
              opts.seed = seed;
              SimTopology topo = topology == "complete" ? SimTopology::complete
                                                        : SimTopology::nearest_neighbour;
              auto traj = simulate(rf, lat, random_initial(lat.size(), r, derive_seed(seed, 1)), topo,
                                   opts);
              py::dict d;
              d["events"] = traj.events;
              d["times"] = traj.sample_times;
              d["samples"] = traj.samples;
              return d;
          },
          py::arg("rates"), py::arg("dim"), py::arg("side"), py::arg("particles"),
          py::arg("topology") = "nn", py::arg("horizon") = 10.0, py::arg("sample_dt") = 0.1,
          py::arg("seed") = 1);

    m.def("estimate_decay",
          [](const PyEnsemble& e, int site, int replicas, int inner, double horizon,
             std::uint64_t seed) {
              DecayOptions opts;
              opts.replicas = replicas;
              opts.inner = inner;
              opts.horizon = horizon;
              opts.seed = seed;
              auto est = estimate_decay(
                  *e.ens,
                  [site](const Configuration& eta) {
                      return static_cast<double>(eta[static_cast<std::size_t>(site)]);
                  },
                  opts);
              return py::make_tuple(est.lambda_hat, est.stderr_hat);
          },
          py::arg("ensemble"), py::arg("site") = 0, py::arg("replicas") = 400, py::arg("inner") = 48,
          py::arg("horizon") = 2.0, py::arg("seed") = 7);

    m.def("colour_projection_check",
          [](const RateFamily& rf, int dim, int side, long r1, long r2) {
              auto check = colour_projection_check(rf, Lattice::cube(dim, side), r1, r2);
              return py::make_tuple(check.max_entry_error, check.colour_states);
          },
          py::arg("rates"), py::arg("dim"), py::arg("side"), py::arg("r1"), py::arg("r2"));

    m.def("coupled_order_sim",
          [](const RateFamily& rf, int dim, int side, const std::vector<int>& eta0,
             const std::vector<int>& xi0, long events, std::uint64_t seed) {
              auto res = coupled_order_sim(rf, Lattice::cube(dim, side), eta0, xi0, events, seed);
              py::dict d;
              d["order_preserved"] = res.order_preserved;
              d["events"] = res.events;
              if (res.violation_time) d["violation_time"] = *res.violation_time;
              return d;
          },
          py::arg("rates"), py::arg("dim"), py::arg("side"), py::arg("eta0"), py::arg("xi0"),
          py::arg("events") = 1000, py::arg("seed") = 1);
}
