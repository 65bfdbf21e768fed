// Batch front end: eig | verify | branch | sweep, each reading one JSON
// config and writing CSV/JSON/SVG outputs into --out.  Exit codes: 0 ok,
// 1 check failure, 2 config error.

#include "specgal/specgal.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace specgal;

namespace {

struct CliArgs {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

RunConfig load(const CliArgs& a) {
  RunConfig cfg = load_config(a.config);
  if (a.seed_set) cfg.seed = a.seed;
  return cfg;
}

int cmd_eig(const CliArgs& args) {
  const RunConfig cfg = load(args);
  const DomainSpec dom = cfg.domain_spec();
  const GridValues g = cfg.weight_grid(dom);
  const StabilityWindow w = stability_window(dom, g, cfg.delta);
  for (double e : cfg.eps_grid)
    if (e > w.s_star * (1.0 + 1e-12))
      throw ConfigError("eps_grid exceeds the stability window s_* = " + fmt_g17(w.s_star));

  const PerturbedCurve curve = perturbed_curve(dom, g, cfg.eps_grid, "config-weight");
  std::vector<Decomposition> decs;
  for (const auto& [eps, pair] : curve.pairs)
    decs.push_back(decompose(pair, eps, curve.pairs.front().second, dom, g, cfg.exceptional_tol));
  const BoundsReport bounds = verify_bounds(curve, decs, w, dom, g);
  const AuxSpectrum aux = aux_spectrum(dom, g, std::min(cfg.aux_count, dom.basis_size()),
                                       cfg.exceptional_tol);

  write_text_file(fs::path(args.out) / "curve.csv", curve_csv(curve, decs, bounds));
  nlohmann::json ja = aux_spectrum_json(aux);
  ja["stability_window"] = {{"delta", w.delta}, {"s_star", w.s_star}};
  write_text_file(fs::path(args.out) / "aux_spectrum.json", ja.dump(2) + "\n");

  std::cout << "eig: " << curve.pairs.size() << " eps points, bounds "
            << (bounds.all_pass ? "pass" : "FAIL") << "\n";
  return bounds.all_pass ? 0 : 1;
}

int cmd_verify(const CliArgs& args) {
  const RunConfig cfg = load(args);
  const std::vector<CheckResult> checks = run_verification(cfg);
  bool all = true;
  nlohmann::json rows = nlohmann::json::array();
  for (const CheckResult& c : checks) {
    all = all && c.pass;
    rows.push_back({{"name", c.name}, {"pass", c.pass}, {"slack", c.slack}, {"detail", c.detail}});
    std::cout << (c.pass ? "  ok  " : " FAIL ") << c.name << "  (slack " << fmt_g17(c.slack) << ")\n";
  }
  nlohmann::json rep;
  rep["checks"] = rows;
  rep["passed"] = all;
  write_text_file(fs::path(args.out) / "report.json", rep.dump(2) + "\n");
  std::cout << (all ? "verify: all checks passed\n" : "verify: FAILURES present\n");
  return all ? 0 : 1;
}

int cmd_branch(const CliArgs& args) {
  const RunConfig cfg = load(args);
  const DomainSpec dom = cfg.domain_spec();
  ResidualSystem sys(dom, cfg.nonlinearity_kind(), cfg.cont_eps);
  const ContinuationParams prm = cfg.continuation_params();

  const Branch plus = trace_branch(sys, +1, prm);
  const Branch minus = trace_branch(sys, -1, prm);
  write_text_file(fs::path(args.out) / "branch.csv", branch_csv(plus));
  write_text_file(fs::path(args.out) / "diagram.svg", diagram_svg({&plus, &minus}));

  const auto scan = positivity_scan(plus);
  const Alternative alt = classify_alternative(sys, plus, prm);
  std::cout << "branch: " << plus.points.size() << " points, termination "
            << to_string(plus.termination) << ", sign touch "
            << (scan ? std::to_string(*scan) : std::string("none")) << ", classified "
            << (alt.kind == Alternative::Kind::global_candidate
                    ? std::string("global_candidate")
                    : "returns_to(" + fmt_g17(alt.lambda_star) + ")")
            << "\n";
  if (plus.termination == Termination::corrector_failure)
    std::cerr << "branch: corrector failure recorded in termination column\n";
  return 0;
}

int cmd_sweep(const CliArgs& args) {
  const RunConfig cfg = load(args);
  const DomainSpec dom = cfg.domain_spec();
  const SweepReport rep =
      epsilon_sweep(dom, cfg.nonlinearity_kind(), cfg.eps_grid, cfg.sign, cfg.continuation_params());

  write_text_file(fs::path(args.out) / "sweep.json", sweep_json(rep).dump(2) + "\n");
  write_text_file(fs::path(args.out) / "distances.csv", distances_csv(rep));

  // limit diagnostics on the tail of the limit branch
  const Branch& limit = rep.branches[static_cast<std::size_t>(rep.limit_index)];
  std::vector<BranchPoint> tail;
  for (double target : cfg.tail_targets) {
    const BranchPoint* best = nullptr;
    double besterr = std::numeric_limits<double>::infinity();
    for (const BranchPoint& p : limit.points) {
      if (p.step == 0) continue;
      int di = 0;
      p.c.cwiseAbs().maxCoeff(&di);
      const double err = std::abs(std::abs(p.c[di]) - target);
      if (err < besterr) {
        besterr = err;
        best = &p;
      }
    }
    if (best) tail.push_back(*best);
  }
  std::sort(tail.begin(), tail.end(),
            [](const BranchPoint& a, const BranchPoint& b) { return a.norm_x > b.norm_x; });
  const WeightLimitReport wl = weight_limit_diagnostic(dom, tail);
  const VanishingReport vr = vanishing_ratio_diagnostic(dom, tail, cfg.mask_tol);
  write_text_file(fs::path(args.out) / "limit_diagnostics.csv", limit_diagnostics_csv(wl, vr));

  int failed = 0;
  for (const std::string& e : rep.errors)
    if (!e.empty()) ++failed;
  std::cout << "sweep: " << rep.eps_list.size() << " branches, " << failed << " failed, liminf "
            << (rep.liminf_pass ? "pass" : "FAIL") << "\n";
  return failed == static_cast<int>(rep.eps_list.size()) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral-Galerkin toolkit for perturbed eigencurves and global solution branches"};
  app.require_subcommand(1);

  CliArgs args;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "JSON run configuration")->required();
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--seed", args.seed, "seed for randomized checks")
        ->each([&](const std::string&) { args.seed_set = true; });
  };

  CLI::App* eig = app.add_subcommand("eig", "perturbed eigenpair curve, decomposition and bounds");
  CLI::App* verify = app.add_subcommand("verify", "run the invariant battery, write report.json");
  CLI::App* branch = app.add_subcommand("branch", "trace one bifurcation branch pair");
  CLI::App* sweep = app.add_subcommand("sweep", "trace branches over the eps grid and compare");
  for (CLI::App* sub : {eig, verify, branch, sweep}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (eig->parsed()) return cmd_eig(args);
    if (verify->parsed()) return cmd_verify(args);
    if (branch->parsed()) return cmd_branch(args);
    if (sweep->parsed()) return cmd_sweep(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
