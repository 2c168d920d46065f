#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orbilab/classical.hpp"
#include "orbilab/dimension.hpp"
#include "orbilab/liberation.hpp"
#include "orbilab/microstates.hpp"
#include "orbilab/ncalg.hpp"
#include "orbilab/sampling.hpp"
#include "orbilab/transport.hpp"

namespace py = pybind11;
using namespace orbilab;

namespace {

Word word_from_letters(const std::vector<std::tuple<int, int, bool>>& letters) {
  Word w;
  for (const auto& [fam, var, adj] : letters) w.letters.push_back({fam, var, adj});
  return w;
}

TracialSpec spec_from_json_str(const std::string& text) {
  return TracialSpec::from_json(nlohmann::json::parse(text));
}

MicrostateParams params_from(int n, int m, double delta, std::optional<double> cutoff) {
  MicrostateParams p{n, m, delta, cutoff};
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_orbilab, mod) {
  mod.doc() = "Numerical laboratory for orbital microstates of matrix tuples";

  py::class_<RngStream>(mod, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("master_seed"),
           py::arg("stream_index") = 0)
      .def("uniform", &RngStream::uniform)
      .def("normal", &RngStream::normal)
      .def("substream", &RngStream::substream);

  // sampling
  py::enum_<HaarGroup>(mod, "HaarGroup")
      .value("UNITARY", HaarGroup::Unitary)
      .value("SPECIAL_UNITARY", HaarGroup::SpecialUnitary)
      .value("TORUS", HaarGroup::Torus);
  mod.def(
      "haar_unitary",
      [](int n, HaarGroup g, RngStream& rng) { return haar_unitary(n, g, rng).mat(); },
      py::arg("n"), py::arg("group"), py::arg("rng"));
  mod.def(
      "gue", [](int n, RngStream& rng) { return gue(n, rng).mat(); }, py::arg("n"),
      py::arg("rng"));
  mod.def("uniform_permutation", &uniform_permutation);
  mod.def("check_factorization", [](int n, long samples, RngStream& rng) {
    const FactorizationReport r = check_factorization(n, samples, rng);
    return py::dict(py::arg("vandermonde_gof_pvalue") = r.vandermonde_gof_pvalue,
                    py::arg("eigenvector_invariance_pvalue") =
                        r.eigenvector_invariance_pvalue,
                    py::arg("sample_count") = r.sample_count);
  });

  // linear algebra
  mod.def("eigh_descending", [](const CMatrix& a) {
    const EighResult f = eigh(HermitianMatrix(a));
    return py::make_tuple(f.spectrum.values(), f.basis.mat());
  });
  mod.def("operator_norm", &operator_norm);
  mod.def("tracial_norm", &tracial_norm, py::arg("a"), py::arg("p"));
  mod.def("unitary_exp",
          [](const CMatrix& h) { return unitary_exp(HermitianMatrix(h)).mat(); });

  // tracial specs and words
  py::class_<TracialSpec>(mod, "TracialSpec")
      .def_static("semicircular", &TracialSpec::semicircular)
      .def_static("projection", &TracialSpec::projection)
      .def_static("finite_atoms", &TracialSpec::finite_atoms)
      .def_static("fubm_unitary", &TracialSpec::fubm_unitary)
      .def_static("exp_semicircular_unitary", &TracialSpec::exp_semicircular_unitary)
      .def_static("matrix_model", &TracialSpec::matrix_model)
      .def_static("free_product", &TracialSpec::free_product)
      .def_static("liberated", &TracialSpec::liberated)
      .def_static("from_json_str", &spec_from_json_str)
      .def("family_count", &TracialSpec::family_count)
      .def("operator_bound", &TracialSpec::operator_bound)
      .def("to_json_str", [](const TracialSpec& s) { return s.to_json().dump(); })
      .def("moment", [](const TracialSpec& s,
                        const std::vector<std::tuple<int, int, bool>>& letters) {
        return s.moment(word_from_letters(letters));
      });
  mod.def("eval_word", [](const std::vector<std::tuple<int, int, bool>>& letters,
                          const std::vector<std::vector<CMatrix>>& assignment) {
    return eval_word(word_from_letters(letters), assignment);
  });
  mod.def("mf_free_deviation", &mf_free_deviation, py::arg("families"), py::arg("m"),
          py::arg("budget") = 1'000'000);

  // microstates
  mod.def("reference_microstates", &reference_microstates);
  mod.def(
      "gamma_orb_contains",
      [](const std::vector<CMatrix>& u, const std::vector<std::vector<CMatrix>>& xi,
         const TracialSpec& target, int n, int m, double delta,
         std::optional<double> cutoff, std::optional<std::vector<CMatrix>> presence) {
        const MicrostateParams p = params_from(n, m, delta, cutoff);
        return gamma_orb_contains(u, xi, target, p, presence ? &*presence : nullptr);
      },
      py::arg("u"), py::arg("xi"), py::arg("target"), py::arg("n"), py::arg("m"),
      py::arg("delta"), py::arg("cutoff") = std::nullopt,
      py::arg("presence") = std::nullopt);
  mod.def(
      "estimate_orbital_measure",
      [](const TracialSpec& target, const std::vector<std::vector<CMatrix>>& xi, int n,
         int m, double delta, long samples, std::uint64_t seed, int workers) {
        const MicrostateParams p = params_from(n, m, delta, std::nullopt);
        const OrbitalEstimate est =
            estimate_orbital_measure(target, xi, p, samples, RngStream(seed), nullptr,
                                     workers);
        return py::dict(py::arg("n_samples") = est.n_samples, py::arg("hits") = est.hits,
                        py::arg("hit_fraction") = est.hit_fraction,
                        py::arg("wilson_lo") = est.wilson_lo,
                        py::arg("wilson_hi") = est.wilson_hi,
                        py::arg("zero_hits") = est.zero_hits,
                        py::arg("log_measure_per_n2") = est.log_measure_per_n2,
                        py::arg("log_upper_per_n2") = est.log_upper_per_n2);
      },
      py::arg("target"), py::arg("xi"), py::arg("n"), py::arg("m"), py::arg("delta"),
      py::arg("samples"), py::arg("seed"), py::arg("workers") = 1);
  mod.def("align_conjugation",
          [](const std::vector<CMatrix>& a, const std::vector<CMatrix>& b, double p,
             int budget) {
            const AlignmentResult r = align_conjugation(a, b, p, budget);
            return py::make_tuple(r.u, r.residual, r.converged);
          },
          py::arg("a"), py::arg("b"), py::arg("p") = 2.0, py::arg("budget") = 500);

  // classical analogue
  py::class_<JointDistribution>(mod, "JointDistribution")
      .def(py::init([](std::vector<double> sx, std::vector<double> sy,
                       Eigen::MatrixXd probs) {
        JointDistribution j{std::move(sx), std::move(sy), std::move(probs)};
        j.validate();
        return j;
      }))
      .def_static("from_json_str",
                  [](const std::string& text) {
                    return JointDistribution::from_json(nlohmann::json::parse(text));
                  })
      .def("to_json_str", [](const JointDistribution& j) { return j.to_json().dump(); })
      .def("mixed_moment", &JointDistribution::mixed_moment);
  mod.def("mutual_information", &mutual_information);
  mod.def("h_sym_exact", [](const JointDistribution& j, int n, double delta) {
    const HSymExact h = h_sym_exact(j, n, delta);
    return py::dict(py::arg("value") = h.value, py::arg("neg_infinity") = h.neg_infinity,
                    py::arg("accepted_count") = h.accepted_count,
                    py::arg("total_count") = h.total_count);
  });
  mod.def("h_sym_mc",
          [](const JointDistribution& j, int n, int m, double delta, long samples,
             std::uint64_t seed, int workers) {
            const HSymMC h = h_sym_mc(j, n, m, delta, samples, RngStream(seed), workers);
            return py::dict(py::arg("value") = h.value, py::arg("hits") = h.hits,
                            py::arg("hit_fraction") = h.hit_fraction,
                            py::arg("neg_infinity") = h.neg_infinity,
                            py::arg("wilson_lo") = h.wilson_lo,
                            py::arg("wilson_hi") = h.wilson_hi);
          },
          py::arg("joint"), py::arg("n"), py::arg("m"), py::arg("delta"),
          py::arg("samples"), py::arg("seed"), py::arg("workers") = 1);

  // covering/packing and dimension formulas
  py::class_<PointCloud>(mod, "PointCloud")
      .def(py::init<Eigen::MatrixXd>())
      .def("size", &PointCloud::size);
  py::enum_<SolveMode>(mod, "SolveMode")
      .value("EXACT", SolveMode::Exact)
      .value("GREEDY", SolveMode::Greedy);
  mod.def("covering_number", &covering_number);
  mod.def("packing_number", &packing_number);
  mod.def("check_kp_sandwich", [](const PointCloud& c, double eps) {
    const SandwichReport r = check_kp_sandwich(c, eps);
    return py::dict(py::arg("p_eps") = r.p_eps, py::arg("k_2eps") = r.k_2eps,
                    py::arg("p_4eps") = r.p_4eps, py::arg("holds") = r.holds);
  });
  mod.def("delta0_hyperfinite", [](const std::string& profile_json) {
    const HyperfiniteProfile p =
        HyperfiniteProfile::from_json(nlohmann::json::parse(profile_json));
    const Delta0Result r = delta0_hyperfinite(p);
    return py::make_tuple(rational_to_string(r.value), r.residual_flagged);
  });
  mod.def("delta0_compose",
          [](const std::vector<std::string>& profile_jsons, const std::string& relation,
             std::optional<std::string> custom) {
            std::vector<HyperfiniteProfile> profiles;
            for (const auto& text : profile_jsons) {
              profiles.push_back(HyperfiniteProfile::from_json(nlohmann::json::parse(text)));
            }
            ComposeRelation rel = ComposeRelation::Free;
            if (relation == "identical") rel = ComposeRelation::Identical;
            if (relation == "custom") rel = ComposeRelation::Custom;
            std::optional<Rational> term;
            if (custom) term = parse_rational(nlohmann::json(*custom));
            const ComposeResult r = delta0_compose(profiles, rel, term);
            return py::make_tuple(rational_to_string(r.delta0_orb),
                                  rational_to_string(r.delta0_join));
          },
          py::arg("profiles"), py::arg("relation") = "free",
          py::arg("custom_term") = std::nullopt);

  // transport
  mod.def(
      "wasserstein2",
      [](const std::vector<double>& mu, const std::vector<double>& nu,
         const Eigen::MatrixXd& sq_cost, const std::string& method, double reg) {
        const W2Result r =
            wasserstein2(DiscreteMeasure{mu}, DiscreteMeasure{nu}, sq_cost,
                         method == "entropic" ? OTMethod::Entropic : OTMethod::Exact, reg);
        return py::dict(py::arg("distance") = r.distance,
                        py::arg("coupling") = r.plan.coupling,
                        py::arg("cost") = r.plan.cost, py::arg("gap") = r.gap,
                        py::arg("converged") = r.converged);
      },
      py::arg("mu"), py::arg("nu"), py::arg("sq_cost"), py::arg("method") = "exact",
      py::arg("reg") = 0.0);
  mod.def("metric_comparison",
          [](const std::vector<CMatrix>& u, const std::vector<CMatrix>& v) {
            const MetricComparison r = metric_comparison(u, v);
            return py::dict(py::arg("d_hs") = r.d_hs,
                            py::arg("d_geod_upper") = r.d_geod_upper,
                            py::arg("ordered") = r.ordered,
                            py::arg("branch_ambiguous") = r.branch_ambiguous);
          });
  mod.def("talagrand_check",
          [](int n, long samples, std::uint64_t seed) {
            RngStream rng(seed);
            const TalagrandReport r = talagrand_check(
                n, [](const CMatrix& u) { return u.trace().real() >= 0.0; }, samples, rng);
            return py::dict(py::arg("gamma_mass_est") = r.gamma_mass_est,
                            py::arg("entropy") = r.entropy, py::arg("w2_est") = r.w2_est,
                            py::arg("bound") = r.bound,
                            py::arg("allowance") = r.allowance,
                            py::arg("holds_within_ci") = r.holds_within_ci);
          },
          py::arg("n"), py::arg("samples"), py::arg("seed"));

  // liberation
  py::enum_<CurveGenerator>(mod, "CurveGenerator")
      .value("FUBM", CurveGenerator::Fubm)
      .value("EXP_SQRT_T", CurveGenerator::ExpSqrtT);
  mod.def(
      "fubm_mean_trace",
      [](int n, const std::vector<double>& t_grid, int steps_per_unit, int copies,
         std::uint64_t seed, int workers) {
        const FubmPath path = simulate_fubm(n, t_grid, steps_per_unit, copies,
                                            RngStream(seed), Retraction::Polar, workers);
        const FubmStats stats = fubm_stats(path);
        std::vector<double> re;
        for (const Complex& c : stats.mean_trace) re.push_back(c.real());
        return py::make_tuple(stats.times, re, stats.mean_trace_se);
      },
      py::arg("n"), py::arg("t_grid"), py::arg("steps_per_unit"), py::arg("copies"),
      py::arg("seed"), py::arg("workers") = 1);
  mod.def(
      "delta0orb_curve",
      [](const TracialSpec& x_joint, int n, int m, double delta,
         const std::vector<double>& eps_grid, long samples, std::uint64_t seed,
         CurveGenerator gen, int workers) {
        const MicrostateParams p = params_from(n, m, delta, std::nullopt);
        const auto xi = reference_microstates(x_joint, n);
        const DimensionCurve c =
            delta0orb_curve(x_joint, xi, p, eps_grid, samples, RngStream(seed), gen,
                            workers);
        return py::dict(py::arg("epsilons") = c.epsilons, py::arg("values") = c.values,
                        py::arg("zero_hit") = c.zero_hit,
                        py::arg("upper_values") = c.upper_values,
                        py::arg("hit_fractions") = c.hit_fractions);
      },
      py::arg("x_joint"), py::arg("n"), py::arg("m"), py::arg("delta"),
      py::arg("eps_grid"), py::arg("samples"), py::arg("seed"),
      py::arg("generator") = CurveGenerator::Fubm, py::arg("workers") = 1);
}
