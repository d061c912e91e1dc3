#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "l2betti/l2lab.hpp"
#include "l2betti/version.hpp"

namespace l2betti {

using Json = nlohmann::ordered_json;

/// Everything a run needs, embedded verbatim in every report.  Values ending
/// in _ms are timings and are excluded from the byte-reproducibility
/// contract; all other report content is deterministic given (config, seed).
struct RunConfig {
  std::string command;
  std::string complex_selector = "X";
  std::string family = "sym:3..3";
  std::uint64_t seed = 1;
  int threads = 2;
  double kernel_tolerance = 1e-9;
  double certify_threshold = 0.05;
  std::string kernel_scale = "sym:4";  // prop-d / gamma provenance: sym:M | random:N | ball:R
  std::string working = "sym:3";
  std::size_t truncation_radius = 2;
  unsigned long denominator_limit = 1024;
  std::string gamma_mode = "rational";
  bool negative_control = false;
  std::size_t kesten_radius = 6;
  std::string out_path;  // empty = stdout
  std::string csv_path;
};

inline Json config_to_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["complex"] = c.complex_selector;
  j["family"] = c.family;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["kernel_tolerance"] = c.kernel_tolerance;
  j["certify_threshold"] = c.certify_threshold;
  j["kernel_scale"] = c.kernel_scale;
  j["working"] = c.working;
  j["truncation_radius"] = c.truncation_radius;
  j["denominator_limit"] = c.denominator_limit;
  j["gamma_mode"] = c.gamma_mode;
  j["negative_control"] = c.negative_control;
  j["kesten_radius"] = c.kesten_radius;
  j["out"] = c.out_path;
  j["csv"] = c.csv_path;
  return j;
}

inline LabOptions lab_options(const RunConfig& c) {
  LabOptions o;
  o.rank.threads = c.threads;
  o.rank.seed = c.seed ^ 0x5eedbeefull;
  o.certify_threshold = c.certify_threshold;
  o.seed = c.seed;
  return o;
}

inline Json betti_row_to_json(const BettiRow& row) {
  Json j;
  j["quotient_label"] = row.label;
  j["D"] = row.dimension;
  if (!row.ok) {
    j["error"] = row.error;
    return j;
  }
  Json degrees = Json::array();
  for (std::size_t p = 0; p < row.kernel.size(); ++p) {
    SpectrumSlice s = row.slice(p);
    Json d;
    d["degree"] = p;
    d["dim"] = s.dim;
    d["kernel_dim"] = s.kernel_dim;
    d["normalized"] = row.normalized(p);
    d["lowest_eigenvalues"] = s.lowest;
    d["tolerance"] = s.tolerance;
    d["method"] = s.method;
    degrees.push_back(std::move(d));
  }
  j["degrees"] = std::move(degrees);
  j["timing_ms"] = row.timing_ms;
  return j;
}

inline Json betti_to_json(const BettiTable& t) {
  Json j;
  j["complex"] = t.complex_name;
  j["chi"] = t.chi;
  j["euler_identity_exact"] = t.euler_ok;
  j["partial"] = t.partial;
  Json rows = Json::array();
  for (const BettiRow& r : t.rows) rows.push_back(betti_row_to_json(r));
  j["rows"] = std::move(rows);
  Json trend = Json::array();
  for (std::size_t p = 0; p < t.trend.size(); ++p) {
    Json tr;
    tr["degree"] = p;
    tr["first_normalized"] = t.trend[p].first_norm;
    tr["last_normalized"] = t.trend[p].last_norm;
    tr["nonincreasing"] = t.trend[p].nonincreasing;
    trend.push_back(std::move(tr));
  }
  j["trend"] = std::move(trend);
  return j;
}

inline Json hopf_to_json(const HopfReport& h) {
  Json j;
  j["degenerate"] = h.degenerate;
  j["asymptotic_identity"] = "7 = 8 - 1";
  j["target_b2_normalized"] = h.target_b2;
  j["target_b3_normalized"] = h.target_b3;
  Json rows = Json::array();
  for (const HopfRow& r : h.rows) {
    Json row;
    row["quotient_label"] = r.label;
    row["D"] = r.dimension;
    row["b2_X"] = r.b2_x;
    row["b3_K"] = r.b3_k;
    row["b2_X_normalized"] = r.b2_x_normalized;
    row["eight_minus_b3_K_normalized"] = r.eight_minus_b3_k;
    row["deviation"] = r.deviation;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["deviation_shrinks"] = h.deviation_shrinks;
  return j;
}

inline Json kunneth_to_json(const KunnethReport& k) {
  Json j;
  j["left"] = k.left;
  j["right"] = k.right;
  Json rows = Json::array();
  for (const KunnethRow& r : k.rows) {
    Json row;
    row["quotient_label"] = r.label;
    row["product_betti"] = r.product_betti;
    row["convolution"] = r.convolution;
    row["equal"] = r.equal;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["all_equal"] = k.all_equal;
  return j;
}

inline Json kernel_pair_to_json(const FactorKernelPair& f) {
  Json j;
  j["scale"] = f.scale;
  j["kernel_dim"] = f.kernel_dim;
  j["residual"] = f.residual;
  j["symbolic_residual"] = f.symbolic_residual;
  j["identity_coefficient_u1"] = f.identity_coefficient;
  j["projector_idempotence"] = f.projector_idempotence;
  j["projector_symmetry"] = f.projector_symmetry;
  j["contour_delta"] = f.contour_delta;
  j["u1_support"] = f.u1.support_size();
  j["u2_support"] = f.u2.support_size();
  return j;
}

inline Json gamma_to_json(const AttachingMatrix& am) {
  Json j;
  j["mode"] = am.mode;
  j["scale_N"] = am.scale_n;
  j["denominator_limit"] = am.denominator_limit;
  j["truncation_radius"] = am.truncation_radius;
  j["working_quotient"] = am.working_label;
  j["kernel_scale"] = am.kernel_scale;
  j["dropped_coordinate"] = am.dropped_coordinate;
  j["sigma_min"] = am.sigma_min;
  j["rounding_rule"] = "half-to-even";
  Json entries = Json::array();
  for (std::size_t r = 0; r < am.gamma.rows(); ++r)
    for (std::size_t c = 0; c < am.gamma.cols(); ++c)
      if (!am.gamma.at(r, c).is_zero()) {
        Json e;
        e["row"] = r;
        e["col"] = c;
        e["value"] = am.gamma.at(r, c).to_string();
        entries.push_back(std::move(e));
      }
  j["entries"] = std::move(entries);
  return j;
}

inline Json certify_to_json(const CertifyReport& rep) {
  Json j;
  j["threshold"] = rep.threshold;
  Json rows = Json::array();
  for (const CertifyRow& r : rep.rows) {
    Json row;
    row["quotient_label"] = r.label;
    row["D"] = r.dimension;
    row["kernel_dims"] = r.kernel;
    row["max_normalized"] = r.max_normalized;
    row["euler_zero_exact"] = r.euler_zero;
    row["tor_floor"] = r.tor_floor;
    row["b3_excess_over_floor"] = r.b3_excess;
    if (r.sigma_min_composite >= 0) row["sigma_min_composite"] = r.sigma_min_composite;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["betti"] = betti_to_json(rep.betti);
  j["verdict"] = rep.verdict;
  j["reason"] = rep.reason;
  return j;
}

/// Resolves a complex selector: X | K | X1 | B1 | B2 | B3 | B1xB2 | B1xB2xB3.
inline ChainComplex resolve_complex(const std::string& selector) {
  if (selector == "X") return build_X();
  if (selector == "K") return build_K();
  if (selector == "X1") return wedge_sphere(build_X());
  if (selector == "B1") return build_B(1);
  if (selector == "B2") return build_B(2);
  if (selector == "B3") return build_B(3);
  if (selector == "B1xB2") return tensor_complex(build_B(1), build_B(2));
  if (selector == "B2xB3") return tensor_complex(build_B(2), build_B(3));
  if (selector == "B1xB2xB3")
    return tensor_complex(tensor_complex(build_B(1), build_B(2)), build_B(3));
  throw std::invalid_argument("unknown complex selector '" + selector +
                              "' (expected X, K, X1, B1, B2, B3, B1xB2, B2xB3 or B1xB2xB3)");
}

/// Resolves a kernel-element scale: sym:M, random:N (seeded), or ball:R.
inline KernelElements resolve_kernel_elements(const std::string& scale, std::uint64_t seed) {
  if (scale.starts_with("ball:")) {
    return solve_kernel_elements_ball(std::stoul(scale.substr(5)));
  }
  if (scale.starts_with("sym:")) {
    return solve_kernel_elements_quotient(symmetric_quotient(std::stoul(scale.substr(4))));
  }
  if (scale.starts_with("random:")) {
    auto fam = quotient_family(scale + ",1", seed);
    return solve_kernel_elements_quotient(fam.at(0));
  }
  throw std::invalid_argument("unknown kernel scale '" + scale +
                              "' (expected sym:M, random:N or ball:R)");
}

/// The first triple of a family descriptor (used for working scales).
inline QuotientTriple resolve_triple(const std::string& spec, std::uint64_t seed) {
  auto fam = quotient_family(spec, seed);
  return fam.at(0);
}

/// Skeleton shared by every command's report.
inline Json report_skeleton(const RunConfig& c) {
  Json j;
  j["tool"] = "l2betti";
  j["version"] = std::string(kVersion);
  j["config"] = config_to_json(c);
  j["rows"] = Json::array();
  j["summary"] = Json::object();
  j["verdict"] = "OK";
  return j;
}

/// Atomic write: the report lands complete or not at all.
inline void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

inline void emit_report(const Json& report, const RunConfig& c) {
  const std::string text = report.dump(2) + "\n";
  if (c.out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text_file(c.out_path, text);
}

/// Flat CSV: complex,quotient_label,D,degree,kernel_dim,normalized,lowest_eigenvalues.
inline std::string betti_to_csv(const BettiTable& t) {
  std::ostringstream out;
  out << "complex,quotient_label,D,degree,kernel_dim,normalized,lowest_eigenvalues\n";
  for (const BettiRow& r : t.rows)
    for (std::size_t p = 0; p < r.kernel.size(); ++p) {
      out << t.complex_name << ',' << r.label << ',' << r.dimension << ',' << p << ','
          << r.kernel[p] << ',' << r.normalized(p) << ',';
      if (p < r.lowest.size())
        for (std::size_t i = 0; i < r.lowest[p].size(); ++i) {
          if (i) out << ';';
          out << r.lowest[p][i];
        }
      out << '\n';
    }
  return out.str();
}

}  // namespace l2betti
