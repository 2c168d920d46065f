#include "orbilab/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "orbilab/classical.hpp"
#include "orbilab/dimension.hpp"
#include "orbilab/liberation.hpp"
#include "orbilab/microstates.hpp"
#include "orbilab/ncalg.hpp"
#include "orbilab/sampling.hpp"
#include "orbilab/stats.hpp"
#include "orbilab/transport.hpp"

namespace orbilab {

namespace {

constexpr const char* kGueNote = "gue normalization: tr_N(A^2) has mean 1";
constexpr const char* kSdeNote =
    "sde: dU = i U dH - (1/2) U dt, increments with tr_N(dH^2) mean dt";

std::string num_or(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return CsvWriter::num(x);
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& columns,
                     const std::vector<std::pair<std::string, std::string>>& header)
    : out_(path), n_columns_(columns.size()) {
  if (!out_) {
    throw std::runtime_error("cannot open artifact file " + path.string());
  }
  for (const auto& [key, value] : header) {
    out_ << "# " << key << " = " << value << "\n";
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out_ << (i ? "," : "") << columns[i];
  }
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_) {
    throw std::logic_error("CSV row width mismatch");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out_ << (i ? "," : "") << cells[i];
  }
  out_ << "\n";
}

std::string CsvWriter::num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string CsvWriter::num(long long x) { return std::to_string(x); }

RunContext::RunContext(std::string experiment, Config params, std::uint64_t seed,
                       int workers, std::filesystem::path out_dir,
                       std::optional<std::chrono::steady_clock::time_point> deadline)
    : experiment_(std::move(experiment)),
      params_(std::move(params)),
      seed_(seed),
      workers_(workers),
      out_dir_(std::move(out_dir)),
      deadline_(deadline) {
  std::filesystem::create_directories(out_dir_);
}

void RunContext::check_budget() const {
  if (deadline_ && std::chrono::steady_clock::now() > *deadline_) {
    throw BudgetExceeded();
  }
}

std::vector<std::pair<std::string, std::string>> RunContext::header_block(
    const std::vector<std::pair<std::string, std::string>>& notes) const {
  std::vector<std::pair<std::string, std::string>> h;
  h.push_back({"orbilab", kOrbilabVersion});
  h.push_back({"experiment", experiment_});
  h.push_back({"seed", std::to_string(seed_)});
  for (const auto& [key, value] : params_.entries()) {
    h.push_back({key, value.echo()});
  }
  for (const auto& note : notes) h.push_back(note);
  return h;
}

CsvWriter RunContext::open_csv(const std::string& filename,
                               const std::vector<std::string>& columns,
                               const std::vector<std::pair<std::string, std::string>>& notes) {
  artifacts_.push_back((out_dir_ / filename).string());
  return CsvWriter(out_dir_ / filename, columns, header_block(notes));
}

void RunContext::write_json(const std::string& filename,
                            const nlohmann::ordered_json& payload) {
  artifacts_.push_back((out_dir_ / filename).string());
  std::ofstream out(out_dir_ / filename);
  if (!out) throw std::runtime_error("cannot open artifact file " + filename);
  nlohmann::ordered_json wrapped;
  wrapped["orbilab"] = kOrbilabVersion;
  wrapped["experiment"] = experiment_;
  wrapped["seed"] = seed_;
  nlohmann::ordered_json params;
  for (const auto& [key, value] : params_.entries()) params[key] = value.echo();
  wrapped["params"] = std::move(params);
  wrapped["report"] = payload;
  out << wrapped.dump(2) << "\n";
}

namespace {

// targets available to experiment configs by name
TracialSpec target_from_params(const Config& p) {
  const std::string name = p.get_string("params.target");
  const double alpha = p.get_double("params.alpha", 0.5);
  if (name == "free-projections") {
    return TracialSpec::free_product(
        {TracialSpec::projection(alpha), TracialSpec::projection(alpha)});
  }
  if (name == "identical-projections") {
    CMatrix proj = CMatrix::Zero(2, 2);
    proj(0, 0) = 1.0;
    return TracialSpec::matrix_model({{proj}, {proj}});
  }
  if (name == "free-rademacher") {
    const TracialSpec sign = TracialSpec::finite_atoms({1.0, -1.0}, {0.5, 0.5});
    return TracialSpec::free_product({sign, sign});
  }
  if (name == "single-projection") return TracialSpec::projection(alpha);
  if (name == "single-semicircular") return TracialSpec::semicircular();
  if (name == "spec-file") {
    std::ifstream in(p.get_string("params.spec_file"));
    if (!in) throw std::invalid_argument("cannot open spec_file");
    nlohmann::json j;
    in >> j;
    return TracialSpec::from_json(j);
  }
  throw std::invalid_argument("unknown target '" + name + "'");
}

MicrostateParams microstate_params(const Config& p) {
  MicrostateParams mp;
  mp.n = static_cast<int>(p.get_int("params.N"));
  mp.m = static_cast<int>(p.get_int("params.m"));
  mp.delta = p.get_double("params.delta");
  if (p.has("params.cutoff")) mp.cutoff = p.get_double("params.cutoff");
  mp.validate();
  return mp;
}

void run_asymptotic_freeness(RunContext& ctx) {
  const int n = static_cast<int>(ctx.params().get_int("params.N"));
  const int m = static_cast<int>(ctx.params().get_int("params.m"));
  const long trials = ctx.params().get_int("params.trials");
  if (n < 1 || m < 1 || trials < 1) {
    throw std::invalid_argument("asymptotic-freeness: N, m, trials must be positive");
  }
  const auto sign_ref = reference_microstates(
      TracialSpec::finite_atoms({1.0, -1.0}, {0.5, 0.5}), n);
  CsvWriter csv = ctx.open_csv("asymptotic_freeness.csv",
                               {"trial", "deviation", "m", "N", "seed"});
  for (long t = 0; t < trials; ++t) {
    ctx.check_budget();
    RngStream stream = ctx.stream(1 + t);
    const CMatrix u1 = haar_unitary(n, HaarGroup::Unitary, stream).mat();
    const CMatrix u2 = haar_unitary(n, HaarGroup::Unitary, stream).mat();
    const CMatrix a = u1 * sign_ref[0][0] * u1.adjoint();
    const CMatrix b = u2 * sign_ref[0][0] * u2.adjoint();
    const double dev = mf_free_deviation({{a}, {b}}, m);
    csv.row({CsvWriter::num(static_cast<long long>(t)), CsvWriter::num(dev),
             CsvWriter::num(static_cast<long long>(m)),
             CsvWriter::num(static_cast<long long>(n)),
             std::to_string(ctx.seed())});
  }
}

void run_orbital_measure(RunContext& ctx) {
  const TracialSpec target = target_from_params(ctx.params());
  const MicrostateParams mp = microstate_params(ctx.params());
  const long samples = ctx.params().get_int("params.samples");
  const auto xi = reference_microstates(target, mp.n);
  ctx.check_budget();
  const OrbitalEstimate est = estimate_orbital_measure(target, xi, mp, samples,
                                                       ctx.stream(0), nullptr,
                                                       ctx.workers());
  CsvWriter csv = ctx.open_csv(
      "orbital_measure.csv",
      {"N", "m", "delta", "R", "n_samples", "hits", "hit_fraction", "wilson_lo",
       "wilson_hi", "log_measure_per_N2", "seed"});
  csv.row({CsvWriter::num(static_cast<long long>(mp.n)),
           CsvWriter::num(static_cast<long long>(mp.m)), CsvWriter::num(mp.delta),
           mp.cutoff ? CsvWriter::num(*mp.cutoff) : "none",
           CsvWriter::num(static_cast<long long>(est.n_samples)),
           CsvWriter::num(static_cast<long long>(est.hits)),
           CsvWriter::num(est.hit_fraction), CsvWriter::num(est.wilson_lo),
           CsvWriter::num(est.wilson_hi), num_or(est.log_measure_per_n2),
           std::to_string(ctx.seed())});
}

JointDistribution joint_from_params(const Config& p) {
  const std::string name = p.get_string("params.joint");
  JointDistribution j;
  j.support_x = {1.0, 0.0};
  j.support_y = {1.0, 0.0};
  j.probs.resize(2, 2);
  if (name == "bernoulli-identical") {
    j.probs << 0.5, 0.0, 0.0, 0.5;
    return j;
  }
  if (name == "bernoulli-independent") {
    j.probs << 0.25, 0.25, 0.25, 0.25;
    return j;
  }
  if (name == "bernoulli-anticorrelated") {
    j.probs << 0.0, 0.5, 0.5, 0.0;
    return j;
  }
  if (name == "joint-file") {
    std::ifstream in(p.get_string("params.joint_file"));
    if (!in) throw std::invalid_argument("cannot open joint_file");
    nlohmann::json doc;
    in >> doc;
    return JointDistribution::from_json(doc);
  }
  throw std::invalid_argument("unknown joint '" + name + "'");
}

void run_hsym_mi(RunContext& ctx) {
  const JointDistribution joint = joint_from_params(ctx.params());
  const std::vector<double> n_list = ctx.params().get_double_list("params.N_list");
  const double exact_delta = ctx.params().get_double("params.exact_delta");
  const long mc_samples = ctx.params().get_int("params.mc_samples", 0);
  const int mc_m = static_cast<int>(ctx.params().get_int("params.mc_m", 2));
  const double mc_delta = ctx.params().get_double("params.mc_delta", 0.06);
  const double mi = mutual_information(joint);

  CsvWriter csv = ctx.open_csv(
      "hsym_mi.csv",
      {"N", "h_exact", "h_exact_neg_inf", "accepted_count", "total_count", "mc_value",
       "mc_hits", "mc_wilson_lo", "mc_wilson_hi", "mutual_information"});
  for (double n_raw : n_list) {
    ctx.check_budget();
    const int n = static_cast<int>(n_raw);
    const HSymExact exact = h_sym_exact(joint, n, exact_delta);
    std::string mc_value = "none", mc_hits = "none", mc_lo = "none", mc_hi = "none";
    if (mc_samples > 0) {
      const HSymMC mc =
          h_sym_mc(joint, n, mc_m, mc_delta, mc_samples, ctx.stream(0), ctx.workers());
      mc_value = num_or(mc.value);
      mc_hits = CsvWriter::num(static_cast<long long>(mc.hits));
      mc_lo = CsvWriter::num(mc.wilson_lo);
      mc_hi = CsvWriter::num(mc.wilson_hi);
    }
    csv.row({CsvWriter::num(static_cast<long long>(n)), num_or(exact.value),
             exact.neg_infinity ? "1" : "0",
             std::to_string(exact.accepted_count), std::to_string(exact.total_count),
             mc_value, mc_hits, mc_lo, mc_hi, CsvWriter::num(mi)});
  }
}

void run_factorization(RunContext& ctx) {
  const int n = static_cast<int>(ctx.params().get_int("params.N"));
  const long samples = ctx.params().get_int("params.samples");
  RngStream rng = ctx.stream(0);
  ctx.check_budget();
  const FactorizationReport r = check_factorization(n, samples, rng);
  CsvWriter csv = ctx.open_csv(
      "factorization.csv",
      {"N", "samples", "vandermonde_gof_pvalue", "eigenvector_invariance_pvalue"},
      {{"note", kGueNote}});
  csv.row({CsvWriter::num(static_cast<long long>(n)),
           CsvWriter::num(static_cast<long long>(r.sample_count)),
           CsvWriter::num(r.vandermonde_gof_pvalue),
           CsvWriter::num(r.eigenvector_invariance_pvalue)});
}

Retraction retraction_from(const Config& p) {
  const std::string name = p.get_string("params.retraction", "polar");
  if (name == "polar") return Retraction::Polar;
  if (name == "exponential") return Retraction::Exponential;
  throw std::invalid_argument("unknown retraction '" + name + "'");
}

void run_fubm_stats(RunContext& ctx) {
  const int n = static_cast<int>(ctx.params().get_int("params.N"));
  const int copies = static_cast<int>(ctx.params().get_int("params.copies"));
  const int steps = static_cast<int>(ctx.params().get_int("params.steps_per_unit", 1000));
  std::vector<double> grid = ctx.params().get_double_list("params.t_grid");
  if (grid.empty() || grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
  ctx.check_budget();
  const FubmPath path = simulate_fubm(n, grid, steps, copies, ctx.stream(0),
                                      retraction_from(ctx.params()), ctx.workers());
  ctx.check_budget();
  const FubmStats stats = fubm_stats(path);
  CsvWriter csv = ctx.open_csv(
      "fubm_stats.csv",
      {"t", "mean_trace_re", "mean_trace_im", "trace_se", "drift_target",
       "mean_opnorm_dist", "mean_hs_dist"},
      {{"note", kSdeNote},
       {"step_size", CsvWriter::num(1.0 / steps)},
       {"retraction", ctx.params().get_string("params.retraction", "polar")}});
  for (std::size_t k = 0; k < stats.times.size(); ++k) {
    csv.row({CsvWriter::num(stats.times[k]), CsvWriter::num(stats.mean_trace[k].real()),
             CsvWriter::num(stats.mean_trace[k].imag()),
             CsvWriter::num(stats.mean_trace_se[k]),
             CsvWriter::num(std::exp(-stats.times[k] / 2)),
             CsvWriter::num(stats.mean_opnorm_dist[k]),
             CsvWriter::num(stats.mean_hs_dist[k])});
  }
}

void run_delta0orb_curve(RunContext& ctx) {
  const TracialSpec x_joint = target_from_params(ctx.params());
  const MicrostateParams mp = microstate_params(ctx.params());
  const std::vector<double> eps_grid = ctx.params().get_double_list("params.eps_grid");
  const long samples = ctx.params().get_int("params.samples");
  const std::string gen_name = ctx.params().get_string("params.generator", "fubm");
  const int steps = static_cast<int>(ctx.params().get_int("params.steps_per_unit", 1000));
  CurveGenerator gen;
  if (gen_name == "fubm") {
    gen = CurveGenerator::Fubm;
  } else if (gen_name == "exp-sqrt-t") {
    gen = CurveGenerator::ExpSqrtT;
  } else {
    throw std::invalid_argument("unknown generator '" + gen_name + "'");
  }
  const auto xi = reference_microstates(x_joint, mp.n);
  ctx.check_budget();
  const DimensionCurve curve = delta0orb_curve(x_joint, xi, mp, eps_grid, samples,
                                               ctx.stream(0), gen, ctx.workers(), steps);
  CsvWriter csv = ctx.open_csv(
      "delta0orb_curve.csv",
      {"eps", "value", "upper_value", "hit_fraction", "zero_hit"},
      {{"note", kSdeNote}, {"generator", gen_name}});
  for (std::size_t k = 0; k < curve.epsilons.size(); ++k) {
    csv.row({CsvWriter::num(curve.epsilons[k]), num_or(curve.values[k]),
             num_or(curve.upper_values[k]), CsvWriter::num(curve.hit_fractions[k]),
             curve.zero_hit[k] ? "1" : "0"});
  }
}

void run_dimension_formulas(RunContext& ctx) {
  std::ifstream in(ctx.params().get_string("params.profile_file"));
  if (!in) throw std::invalid_argument("cannot open profile_file");
  nlohmann::json doc;
  in >> doc;
  std::vector<HyperfiniteProfile> profiles;
  if (doc.is_array()) {
    for (const auto& p : doc) profiles.push_back(HyperfiniteProfile::from_json(p));
  } else {
    profiles.push_back(HyperfiniteProfile::from_json(doc));
  }
  const std::string relation = ctx.params().get_string("params.relation", "free");
  ComposeRelation rel;
  std::optional<Rational> custom;
  if (relation == "free") {
    rel = ComposeRelation::Free;
  } else if (relation == "identical") {
    rel = ComposeRelation::Identical;
  } else if (relation == "custom") {
    rel = ComposeRelation::Custom;
    custom = parse_rational(nlohmann::json(ctx.params().get_string("params.custom_term")));
  } else {
    throw std::invalid_argument("unknown relation '" + relation + "'");
  }

  CsvWriter csv = ctx.open_csv(
      "dimension_formulas.csv",
      {"kind", "label", "delta0", "delta0_orb", "delta0_join"});
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const Delta0Result d = delta0_hyperfinite(profiles[i]);
    csv.row({"profile", std::to_string(i), rational_to_string(d.value), "", ""});
  }
  const ComposeResult composed = delta0_compose(profiles, rel, custom);
  csv.row({"compose", relation, "", rational_to_string(composed.delta0_orb),
           rational_to_string(composed.delta0_join)});
}

void run_covering_packing(RunContext& ctx) {
  const int n_points = static_cast<int>(ctx.params().get_int("params.n_points"));
  const int n_clouds = static_cast<int>(ctx.params().get_int("params.n_clouds"));
  const int eps_count = static_cast<int>(ctx.params().get_int("params.eps_count", 5));
  if (n_points < 1 || n_points > 64) {
    throw std::invalid_argument("covering-packing: n_points must be in [1, 64]");
  }
  CsvWriter csv = ctx.open_csv(
      "covering_packing.csv",
      {"cloud", "eps", "p_eps", "k_2eps", "p_4eps", "holds"});
  for (int c = 0; c < n_clouds; ++c) {
    ctx.check_budget();
    RngStream stream = ctx.stream(1 + c);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < n_points; ++i) {
      Eigen::VectorXd p(2);
      p << stream.uniform(), stream.uniform();
      pts.push_back(p);
    }
    const PointCloud cloud = PointCloud::from_points(pts);
    // eps ladder from the distance scale of the cloud
    double median = 0.0;
    {
      std::vector<double> d;
      for (int i = 0; i < n_points; ++i) {
        for (int j = i + 1; j < n_points; ++j) d.push_back(cloud.dist(i, j));
      }
      if (d.empty()) d.push_back(1.0);
      std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
      median = d[d.size() / 2];
    }
    for (int e = 1; e <= eps_count; ++e) {
      const double eps = median * e / (eps_count + 1.0) / 2.0;
      const SandwichReport r = check_kp_sandwich(cloud, eps);
      csv.row({CsvWriter::num(static_cast<long long>(c)), CsvWriter::num(eps),
               CsvWriter::num(static_cast<long long>(r.p_eps)),
               CsvWriter::num(static_cast<long long>(r.k_2eps)),
               CsvWriter::num(static_cast<long long>(r.p_4eps)), r.holds ? "1" : "0"});
    }
  }
}

void run_group_covering(RunContext& ctx) {
  const int n_max = static_cast<int>(ctx.params().get_int("params.n_max", 12));
  const std::vector<double> eps_list = ctx.params().get_double_list("params.eps_list");
  CsvWriter csv = ctx.open_csv(
      "group_covering.csv",
      {"n", "subgroup_order", "eps", "k_eps_gamma", "k_eps_h", "p_2eps_quotient", "holds"});
  for (int n = 1; n <= n_max; ++n) {
    ctx.check_budget();
    const FiniteMetricGroup g = FiniteMetricGroup::cyclic(n);
    std::vector<int> gamma(n);
    for (int i = 0; i < n; ++i) gamma[i] = i;
    for (const auto& h : subgroups(g)) {
      for (double eps : eps_list) {
        const HomogeneousCoverReport r = homogeneous_covering_bound(g, h, gamma, eps);
        csv.row({CsvWriter::num(static_cast<long long>(n)),
                 CsvWriter::num(static_cast<long long>(h.size())), CsvWriter::num(eps),
                 CsvWriter::num(static_cast<long long>(r.k_eps_gamma)),
                 CsvWriter::num(static_cast<long long>(r.k_eps_h)),
                 CsvWriter::num(static_cast<long long>(r.p_2eps_quotient)),
                 r.holds ? "1" : "0"});
      }
    }
  }
}

void run_transport_checks(RunContext& ctx) {
  const int n = static_cast<int>(ctx.params().get_int("params.N", 4));
  const long trials = ctx.params().get_int("params.trials", 1000);
  RngStream rng = ctx.stream(0);

  long lipschitz_holds = 0;
  long ordered_holds = 0;
  long branch_flags = 0;
  for (long t = 0; t < trials; ++t) {
    if (t % 100 == 0) ctx.check_budget();
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = rng.complex_normal();
    }
    const HermitianMatrix xi((a + a.adjoint()) / 2.0);
    const UnitaryMatrix u = haar_unitary(n, HaarGroup::Unitary, rng);
    const UnitaryMatrix v = haar_unitary(n, HaarGroup::Unitary, rng);
    if (conjugation_lipschitz_check(xi, u, v).holds) ++lipschitz_holds;

    const MetricComparison mc = metric_comparison(
        {haar_unitary(3, HaarGroup::Unitary, rng).mat()},
        {haar_unitary(3, HaarGroup::Unitary, rng).mat()});
    if (mc.ordered) ++ordered_holds;
    if (mc.branch_ambiguous) ++branch_flags;
  }

  // closed-form transport example: delta_0 vs (delta_0 + delta_2)/2 on the line
  DiscreteMeasure mu{{1.0}};
  DiscreteMeasure nu{{0.5, 0.5}};
  Eigen::MatrixXd cost(1, 2);
  cost << 0.0, 4.0;
  const W2Result w2 = wasserstein2(mu, nu, cost, OTMethod::Exact);

  nlohmann::ordered_json report;
  report["schema"] = "transport-checks/1";
  report["trials"] = trials;
  report["lipschitz_holds"] = lipschitz_holds;
  report["metric_ordered"] = ordered_holds;
  report["metric_branch_flags"] = branch_flags;
  report["w2_example_distance"] = w2.distance;
  report["w2_example_expected"] = std::sqrt(2.0);
  ctx.write_json("transport_checks.json", report);
}

void run_talagrand(RunContext& ctx) {
  const int n = static_cast<int>(ctx.params().get_int("params.N", 2));
  const long samples = ctx.params().get_int("params.samples", 400);
  const std::string restriction = ctx.params().get_string("params.restriction",
                                                          "re-trace-nonneg");
  std::function<bool(const CMatrix&)> pred;
  if (restriction == "re-trace-nonneg") {
    pred = [](const CMatrix& u) { return u.trace().real() >= 0.0; };
  } else if (restriction == "re-trace-quarter") {
    // mass ~ 1/4 on SU(2): both Re Tr >= 0 and Im(u00) >= 0
    pred = [](const CMatrix& u) {
      return u.trace().real() >= 0.0 && u(0, 0).imag() >= 0.0;
    };
  } else {
    throw std::invalid_argument("unknown restriction '" + restriction + "'");
  }
  RngStream rng = ctx.stream(0);
  ctx.check_budget();
  const TalagrandReport r = talagrand_check(n, pred, samples, rng);
  nlohmann::ordered_json report;
  report["schema"] = "talagrand/1";
  report["gamma_mass_est"] = r.gamma_mass_est;
  report["entropy"] = r.entropy;
  report["w2_est"] = r.w2_est;
  report["bound"] = r.bound;
  report["allowance"] = r.allowance;
  report["holds_within_ci"] = r.holds_within_ci;
  ctx.write_json("talagrand.json", report);
}

std::vector<ExperimentDef> build_registry() {
  std::vector<ExperimentDef> defs;
  defs.push_back(
      {"asymptotic-freeness", "Lemma 1.3",
       "deviation from freeness of independently rotated sign matrices",
       {{"N", "int", "matrix dimension", true},
        {"m", "int", "maximal word degree", true},
        {"trials", "int", "number of seeded trials", true}},
       run_asymptotic_freeness});
  defs.push_back(
      {"orbital-measure", "Definition 2.1",
       "Monte Carlo measure of an orbital microstate set",
       {{"target", "string", "target distribution name", true},
        {"alpha", "float", "projection trace where applicable", false},
        {"spec_file", "string", "tracial-spec/1 JSON when target=spec-file", false},
        {"N", "int", "matrix dimension", true},
        {"m", "int", "maximal word degree", true},
        {"delta", "float", "moment tolerance", true},
        {"cutoff", "float", "operator norm cutoff R", false},
        {"samples", "int", "Monte Carlo samples", true}},
       run_orbital_measure});
  defs.push_back(
      {"hsym-mi", "Remark 2.7",
       "permutation microstate entropy against mutual information",
       {{"joint", "string", "joint distribution name", true},
        {"joint_file", "string", "joint/1 JSON when joint=joint-file", false},
        {"N_list", "float-list", "sizes for the exact path", true},
        {"exact_delta", "float", "table tolerance for the exact path", true},
        {"mc_samples", "int", "Monte Carlo samples (0 disables)", false},
        {"mc_m", "int", "moment window degree", false},
        {"mc_delta", "float", "moment window width", false}},
       run_hsym_mi});
  defs.push_back(
      {"factorization", "(F-1.1)",
       "eigenvalue/eigenvector factorization checks of the matrix Gaussian",
       {{"N", "int", "dimension for the eigenvector component", true},
        {"samples", "int", "draws per component", true}},
       run_factorization});
  defs.push_back(
      {"fubm-stats", "Definition 5.1",
       "multiplicative unitary Brownian motion statistics",
       {{"N", "int", "matrix dimension", true},
        {"copies", "int", "independent paths", true},
        {"t_grid", "float-list", "snapshot times", true},
        {"steps_per_unit", "int", "integrator resolution", false},
        {"retraction", "string", "polar or exponential", false}},
       run_fubm_stats});
  defs.push_back(
      {"delta0orb-curve", "Definition 5.1",
       "finite-scale orbital dimension curve under the liberation process",
       {{"target", "string", "target distribution name", true},
        {"alpha", "float", "projection trace where applicable", false},
        {"N", "int", "matrix dimension", true},
        {"m", "int", "maximal word degree", true},
        {"delta", "float", "moment tolerance", true},
        {"eps_grid", "float-list", "decreasing times in (0,1]", true},
        {"samples", "int", "Monte Carlo samples per point", true},
        {"generator", "string", "fubm or exp-sqrt-t", false},
        {"steps_per_unit", "int", "integrator resolution", false}},
       run_delta0orb_curve});
  defs.push_back(
      {"dimension-formulas", "Theorem 5.8",
       "exact dimension formulas for hyperfinite profiles",
       {{"profile_file", "string", "profile/1 JSON (single or array)", true},
        {"relation", "string", "free, identical, or custom", false},
        {"custom_term", "string", "orbital term p/q when relation=custom", false}},
       run_dimension_formulas});
  defs.push_back(
      {"covering-packing", "Definition 5.4",
       "covering/packing sandwich on seeded point clouds",
       {{"n_points", "int", "points per cloud (<= 64)", true},
        {"n_clouds", "int", "seeded clouds", true},
        {"eps_count", "int", "radii per cloud", false}},
       run_covering_packing});
  defs.push_back(
      {"group-covering", "Lemma 5.11",
       "subgroup covering bound on cyclic groups",
       {{"n_max", "int", "largest cyclic order", false},
        {"eps_list", "float-list", "radii", true}},
       run_group_covering});
  defs.push_back(
      {"transport-checks", "Lemma 3.4",
       "conjugation Lipschitz and metric comparison sweeps",
       {{"N", "int", "matrix dimension", false},
        {"trials", "int", "seeded instances", false}},
       run_transport_checks});
  defs.push_back(
      {"talagrand", "Proposition 3.5",
       "transportation cost inequality on the special unitary group",
       {{"N", "int", "group dimension", false},
        {"samples", "int", "cloud size per side", false},
        {"restriction", "string", "named restriction predicate", false}},
       run_talagrand});
  return defs;
}

void validate_against_registry(const ExperimentDef& def, const Config& cfg) {
  for (const ParamSpec& p : def.params) {
    const std::string key = "params." + p.name;
    if (!cfg.has(key)) {
      if (p.required) {
        throw std::invalid_argument("missing required parameter '" + p.name + "'");
      }
      continue;
    }
    const ConfigValue& v = cfg.at(key);
    try {
      if (p.type == "int") {
        v.as_int();
      } else if (p.type == "float") {
        v.as_double();
      } else if (p.type == "string") {
        v.as_string();
      } else if (p.type == "float-list") {
        v.as_double_list();
      } else if (p.type == "bool") {
        v.as_bool();
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("parameter '" + p.name + "' must have type " + p.type);
    }
  }
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("params.", 0) != 0) continue;
    const std::string name = key.substr(7);
    bool known = false;
    for (const ParamSpec& p : def.params) {
      if (p.name == name) known = true;
    }
    if (!known) {
      throw std::invalid_argument("unknown parameter '" + name + "' for experiment " +
                                  def.name);
    }
  }
}

}  // namespace

const std::vector<ExperimentDef>& experiment_registry() {
  static const std::vector<ExperimentDef> registry = build_registry();
  return registry;
}

const ExperimentDef* find_experiment(const std::string& name) {
  for (const ExperimentDef& def : experiment_registry()) {
    if (def.name == name) return &def;
  }
  return nullptr;
}

ExperimentOutcome run_experiment_config(const Config& config,
                                        std::optional<std::uint64_t> seed_override,
                                        std::optional<int> workers_override,
                                        const std::string& out_dir) {
  ExperimentOutcome outcome;
  const ExperimentDef* def = nullptr;
  try {
    const std::string name = config.get_string("experiment");
    def = find_experiment(name);
    if (def == nullptr) {
      throw std::invalid_argument("unknown experiment '" + name + "'");
    }
    validate_against_registry(*def, config);
  } catch (const std::exception& e) {
    outcome.exit_code = 2;
    outcome.error = e.what();
    return outcome;
  }

  const std::uint64_t seed =
      seed_override ? *seed_override
                    : static_cast<std::uint64_t>(config.get_int("seed", 0));
  const int workers =
      workers_override ? *workers_override
                       : static_cast<int>(config.get_int("workers", 1));

  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (const char* budget = std::getenv("ORBILAB_BUDGET_SECONDS")) {
    const double seconds = std::atof(budget);
    if (seconds > 0.0) {
      deadline = std::chrono::steady_clock::now() +
                 std::chrono::milliseconds(static_cast<long>(seconds * 1000));
    }
  }

  RunContext ctx(def->name, config, seed, workers, out_dir, deadline);
  try {
    def->run(ctx);
    outcome.artifacts = ctx.artifacts();
    outcome.exit_code = 0;
  } catch (const BudgetExceeded&) {
    outcome.exit_code = 3;
    outcome.error = "budget exceeded; artifacts may be partial";
    outcome.artifacts = ctx.artifacts();
  } catch (const std::exception& e) {
    outcome.exit_code = 2;
    outcome.error = e.what();
  }
  return outcome;
}

}  // namespace orbilab
