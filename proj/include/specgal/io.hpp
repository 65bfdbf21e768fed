#pragma once

#include "specgal/continuation.hpp"
#include "specgal/convergence.hpp"
#include "specgal/eigensolve.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace specgal {

/// Doubles in file outputs are printed with %.17g: round-trip exact and
/// byte-stable across runs of the same build, which the golden-file checks
/// rely on.
inline std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

// Column orders below are frozen; see the format notes in the README.

inline std::string curve_csv(const PerturbedCurve& curve, const std::vector<Decomposition>& decs,
                             const BoundsReport& bounds) {
  std::string s =
      "eps,lambda,kappa_eps,alpha,beta,eta_norm_x,pass_rayleigh,pass_kappa_positive,"
      "pass_alpha,pass_beta,pass_kappa_upper,pass_below_second,pass_eta_sq\n";
  for (std::size_t i = 0; i < curve.pairs.size(); ++i) {
    const auto& [eps, pair] = curve.pairs[i];
    const Decomposition& d = decs[i];
    const BoundsRow& r = bounds.rows[i];
    s += fmt_g17(eps) + "," + fmt_g17(pair.lambda) + "," + fmt_g17(d.kappa_eps) + "," +
         fmt_g17(d.alpha) + "," + fmt_g17(d.beta) + "," + fmt_g17(d.eta_norm_x) + "," +
         std::to_string(r.rayleigh_bracket ? 1 : 0) + "," + std::to_string(r.kappa_positive ? 1 : 0) +
         "," + std::to_string(r.alpha_in_range ? 1 : 0) + "," + std::to_string(r.beta_sign ? 1 : 0) +
         "," + std::to_string(r.kappa_upper ? 1 : 0) + "," +
         std::to_string(r.below_second_gap ? 1 : 0) + "," + std::to_string(r.eta_sq_bound ? 1 : 0) +
         "\n";
  }
  return s;
}

inline nlohmann::json aux_spectrum_json(const AuxSpectrum& aux) {
  nlohmann::json j;
  j["lambdas"] = aux.lambdas;
  j["kappa0"] = aux.kappa0;
  if (aux.bracket_index)
    j["bracket_index"] = *aux.bracket_index;
  else
    j["bracket_index"] = nullptr;
  j["exceptional"] = aux.exceptional_index.has_value();
  if (aux.exceptional_index) j["exceptional_index"] = *aux.exceptional_index;
  return j;
}

inline std::string branch_csv(const Branch& br) {
  std::string s = "step,lambda,norm_x,min_on_grid,termination\n";
  for (const BranchPoint& p : br.points)
    s += std::to_string(p.step) + "," + fmt_g17(p.lambda) + "," + fmt_g17(p.norm_x) + "," +
         fmt_g17(p.min_on_grid) + "," + to_string(br.termination) + "\n";
  return s;
}

inline std::string distances_csv(const SweepReport& rep) {
  std::string s = "i,j,eps_i,eps_j,distance\n";
  const int n = static_cast<int>(rep.eps_list.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s += std::to_string(i) + "," + std::to_string(j) + "," +
           fmt_g17(rep.eps_list[static_cast<std::size_t>(i)]) + "," +
           fmt_g17(rep.eps_list[static_cast<std::size_t>(j)]) + "," + fmt_g17(rep.distances(i, j)) +
           "\n";
  return s;
}

inline nlohmann::json sweep_json(const SweepReport& rep) {
  nlohmann::json j;
  j["eps_list"] = rep.eps_list;
  j["lambda0"] = rep.lambda0;
  j["kappa0"] = rep.kappa0;
  j["lambda_bif"] = rep.lambda_bif;
  j["liminf"] = {{"defect", rep.liminf_defect}, {"pass", rep.liminf_pass}};
  std::vector<std::vector<double>> dm;
  for (int i = 0; i < rep.distances.rows(); ++i) {
    std::vector<double> row;
    for (int jj = 0; jj < rep.distances.cols(); ++jj) row.push_back(rep.distances(i, jj));
    dm.push_back(std::move(row));
  }
  j["distances"] = dm;
  nlohmann::json branches = nlohmann::json::array();
  for (const Branch& b : rep.branches)
    branches.push_back({{"eps", b.eps},
                        {"sign", b.sign},
                        {"points", b.points.size()},
                        {"termination", to_string(b.termination)}});
  j["branches"] = branches;
  j["limit_index"] = rep.limit_index;
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& e : rep.errors) errs.push_back(e);
  j["errors"] = errs;
  return j;
}

inline std::string limit_diagnostics_csv(const WeightLimitReport& wl, const VanishingReport& vr) {
  std::string s = "diagnostic,norm_x,value_a,value_b\n";
  for (const auto& r : wl.rows)
    s += "weight_limit," + fmt_g17(r.norm_x) + "," + fmt_g17(r.eig_distance) + ",0\n";
  for (const auto& r : vr.rows) {
    if (r.indeterminate)
      s += "vanishing_ratio," + fmt_g17(r.norm_x) + ",indeterminate,indeterminate\n";
    else
      s += "vanishing_ratio," + fmt_g17(r.norm_x) + "," + fmt_g17(r.det_ratio_sup) + "," +
           fmt_g17(r.linear_ratio_sup) + "\n";
  }
  return s;
}

/// Minimal lambda vs ||u||_X diagram; presentation only, excluded from
/// golden-file comparisons.
inline std::string diagram_svg(const std::vector<const Branch*>& branches) {
  double lmin = 1e300, lmax = -1e300, nmin = 0.0, nmax = -1e300;
  for (const Branch* b : branches)
    for (const BranchPoint& p : b->points) {
      lmin = std::min(lmin, p.lambda);
      lmax = std::max(lmax, p.lambda);
      nmax = std::max(nmax, p.norm_x);
    }
  if (!(lmax > lmin)) {
    lmin -= 0.5;
    lmax += 0.5;
  }
  if (!(nmax > nmin)) nmax = 1.0;
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  const auto px = [&](double l) { return ml + (l - lmin) / (lmax - lmin) * (W - ml - mr); };
  const auto py = [&](double n) { return H - mb - (n - nmin) / (nmax - nmin) * (H - mt - mb); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
                  "viewBox=\"0 0 640 480\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<line x1=\"" + fmt_g17(ml) + "\" y1=\"" + fmt_g17(H - mb) + "\" x2=\"" + fmt_g17(W - mr) +
       "\" y2=\"" + fmt_g17(H - mb) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt_g17(ml) + "\" y1=\"" + fmt_g17(mt) + "\" x2=\"" + fmt_g17(ml) +
       "\" y2=\"" + fmt_g17(H - mb) + "\" stroke=\"black\"/>\n";
  for (const Branch* b : branches) {
    const char* color = b->sign > 0 ? "#1f77b4" : "#d62728";
    std::string pts;
    for (const BranchPoint& p : b->points)
      pts += fmt_g17(px(p.lambda)) + "," + fmt_g17(py(p.norm_x)) + " ";
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
         pts + "\"/>\n";
  }
  s += "<text x=\"" + fmt_g17(W / 2) + "\" y=\"" + fmt_g17(H - 12) +
       "\" text-anchor=\"middle\" font-size=\"14\">lambda</text>\n";
  s += "<text x=\"18\" y=\"" + fmt_g17(H / 2) +
       "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 " + fmt_g17(H / 2) +
       ")\">|u|_X</text>\n";
  s += "<text x=\"" + fmt_g17(ml - 5) + "\" y=\"" + fmt_g17(H - mb + 16) +
       "\" text-anchor=\"end\" font-size=\"11\">" + fmt_g17(lmin) + "</text>\n";
  s += "<text x=\"" + fmt_g17(W - mr) + "\" y=\"" + fmt_g17(H - mb + 16) +
       "\" text-anchor=\"end\" font-size=\"11\">" + fmt_g17(lmax) + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace specgal
