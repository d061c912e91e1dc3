// Acceptance suite: runs the ten certification criteria end to end, one
// PASS/FAIL line each, and exits nonzero if any criterion fails.  Rank
// results are memoized process-wide, so identical induced matrices are
// computed once even when several criteria touch them; per-criterion times
// report the marginal cost in the order the criteria run.
//
// Two criteria are known-red and fail honestly with their measured values:
//   - criterion 7: the frozen Kesten window [0.84, 0.8661] at ball radius 6
//     exceeds what any on-ball lower bound can produce (the sharpest is
//     ||x P_6|| = 0.8222);
//   - criterion 10: every exact attaching map factors through the pi2
//     coordinates, so b3(Y) >= prod(|Q_i|+1) - prod|Q_i| at quotient scale
//     and the final-row max normalized Betti cannot reach 0.05 at desk-scale
//     quotient orders.  The constructed gamma attains that floor exactly
//     (zero excess), which the suite also verifies and prints.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "l2betti/l2lab.hpp"
#include "l2betti/report.hpp"

using namespace l2betti;

namespace {

struct Outcome {
  int id;
  std::string name;
  bool pass;
  double seconds;
  std::string note;
};

LabOptions lab_opts() {
  LabOptions o;
  o.rank.threads = 2;
  return o;
}

bool approx_le(double a, double b, double slack = 1e-12) { return a <= b + slack; }

// ---------------------------------------------------------------------------

bool criterion1(std::string& note) {
  ChainComplex x = build_X();
  ChainComplex k = build_K();
  ChainComplex x1 = wedge_sphere(x);
  x.validate();
  k.validate();
  x1.validate();
  ChainComplex y_neg = attach_cells(x1, coordinate_gamma());
  y_neg.validate();
  GroupRingMatrix rational_gamma(9, 8);
  rational_gamma.at(0, 0) = Rational(2, 3) * GroupRingElement::generator(1, 1);
  rational_gamma.at(8, 0) = GroupRingElement::one();
  rational_gamma.at(3, 1) = Rational(-5, 7) * GroupRingElement::generator(2, 2, -1);
  ChainComplex y_rat = attach_cells(x1, rational_gamma);
  y_rat.validate();

  GroupRingMatrix basis = pi2_basis();
  GroupRingMatrix prod_x = x.boundary(2) * basis;
  GroupRingMatrix prod_k = k.boundary(2) * k.boundary(3);
  const std::size_t zero_checks = prod_x.rows() * prod_x.cols() + prod_k.rows() * prod_k.cols();
  bool ok = prod_x.is_zero() && prod_k.is_zero() && zero_checks == 96;
  ok = ok && k.boundary(3) == basis;
  std::ostringstream os;
  os << "d^2=0 exact for X, K, X1, Y(coordinate), Y(rational); " << zero_checks
     << " zero entries of d2*pi2 verified; d3(K) == pi2 basis entrywise";
  note = os.str();
  return ok;
}

bool criterion2(std::string& note) {
  auto family = quotient_family("sym:3..4", 0);
  ChainComplex k = build_K();
  ChainComplex bbb = tensor_complex(tensor_complex(build_B(1), build_B(2)), build_B(3));
  bool boundaries_equal = true;
  for (std::size_t p = 1; p <= 3; ++p)
    boundaries_equal = boundaries_equal && k.boundary(p) == bbb.boundary(p);
  BettiTable bk = luck_betti(k, family, lab_opts());
  BettiTable bt = luck_betti(bbb, family, lab_opts());
  bool betti_equal = bk.rows.size() == bt.rows.size();
  std::ostringstream os;
  for (std::size_t i = 0; i < bk.rows.size() && betti_equal; ++i) {
    betti_equal = bk.rows[i].kernel == bt.rows[i].kernel;
    os << " " << bk.rows[i].label << ":(";
    for (std::size_t p = 0; p < bk.rows[i].kernel.size(); ++p)
      os << (p ? "," : "") << bk.rows[i].kernel[p];
    os << ")";
  }
  note = "boundaries entrywise equal: " + std::string(boundaries_equal ? "yes" : "NO") +
         "; per-quotient Betti vectors" + os.str();
  return boundaries_equal && betti_equal && bk.euler_ok && bt.euler_ok;
}

bool criterion3(std::string& note) {
  auto family = quotient_family("sym:3..4", 0);
  KunnethReport first = kunneth_check(build_B(1), build_B(2), family, lab_opts());
  KunnethReport second =
      kunneth_check(build_B(1), tensor_complex(build_B(2), build_B(3)), family, lab_opts());
  note = std::string("(B,B) exact: ") + (first.all_equal ? "yes" : "NO") +
         "; (B, BxB) exact: " + (second.all_equal ? "yes" : "NO");
  return first.all_equal && second.all_equal;
}

bool criterion4(std::string& note) {
  ChainComplex b = build_B(1);
  BettiTable table = luck_betti(b, quotient_family("sym:2..4", 0), lab_opts());
  bool ok = table.euler_ok;
  std::ostringstream os;
  for (const BettiRow& row : table.rows) {
    const std::size_t q = row.dimension;
    ok = ok && row.kernel[1] == q + 1;
    const double dev = std::abs(row.normalized(1) - 1.0);
    ok = ok && approx_le(dev, 1.0 / static_cast<double>(q));
    os << " |Q|=" << q << ": ker=" << row.kernel[1];
  }
  note = "dim ker Delta_1 = |Q|+1 exactly at" + os.str();
  return ok;
}

bool criterion5(std::string& note) {
  auto small_family = quotient_family("sym:2..3", 0);
  auto giant_family = quotient_family("sym:3..4", 0);
  struct Case {
    const char* name;
    ChainComplex c;
    std::vector<QuotientTriple> family;
    long long chi;
  };
  std::vector<Case> cases;
  cases.push_back({"X", build_X(), giant_family, 7});
  cases.push_back({"X1", wedge_sphere(build_X()), small_family, 8});
  cases.push_back({"K", build_K(), giant_family, -1});
  cases.push_back({"Y", attach_cells(wedge_sphere(build_X()), coordinate_gamma()), small_family, 0});
  bool ok = true;
  for (Case& cs : cases) {
    BettiTable t = luck_betti(cs.c, cs.family, lab_opts());
    ok = ok && t.euler_ok && t.chi == cs.chi;
    for (const BettiRow& row : t.rows) {
      long long sum = 0;
      for (std::size_t p = 0; p < row.kernel.size(); ++p)
        sum += (p % 2 ? -1 : 1) * static_cast<long long>(row.kernel[p]);
      ok = ok && sum == cs.chi * static_cast<long long>(row.dimension);
    }
  }
  note = "exact alternating sums: chi(X)=7D, chi(X1)=8D, chi(K)=-D, chi(Y)=0, zero tolerance";
  return ok;
}

bool criterion6(std::string& note) {
  auto family = quotient_family("sym:3..4", 0);
  BettiTable bx = luck_betti(build_X(), family, lab_opts());
  BettiTable bk = luck_betti(build_K(), family, lab_opts());
  HopfReport rep = hopf_accounting(bx, bk);
  bool ok = rep.deviation_shrinks && rep.rows.size() == 2;
  const HopfRow& a = rep.rows.front();
  const HopfRow& z = rep.rows.back();
  ok = ok && std::abs(z.b2_x_normalized - 7.0) < std::abs(a.b2_x_normalized - 7.0);
  ok = ok && std::abs(z.eight_minus_b3_k - 7.0) < std::abs(a.eight_minus_b3_k - 7.0);
  std::ostringstream os;
  os.precision(5);
  os << std::fixed << "b2(X)/D: " << a.b2_x_normalized << " -> " << z.b2_x_normalized
     << "; 8 - b3(K)/D: " << a.eight_minus_b3_k << " -> " << z.eight_minus_b3_k
     << "; deviation " << a.deviation << " -> " << z.deviation << "; target 7 = 8 - 1";
  note = os.str();
  return ok;
}

bool criterion7(std::string& note) {
  GroupRingElement markov = markov_element(1);
  std::vector<double> vals;
  bool monotone = true, below = true;
  const double limit = std::sqrt(3.0) / 2.0;
  for (std::size_t r : {2u, 4u, 6u, 8u}) {
    double v = ball_norm(markov, 1, r);
    if (!vals.empty()) monotone = monotone && v >= vals.back() - 1e-9;
    below = below && v <= limit + 1e-6;
    vals.push_back(v);
  }
  const double r6 = vals[2];
  const bool window = r6 >= 0.84 && r6 <= 0.8661;
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << "values(2,4,6,8) = " << vals[0] << ", " << vals[1] << ", " << vals[2]
     << ", " << vals[3] << "; nondecreasing: " << (monotone ? "yes" : "NO")
     << "; below sqrt(3)/2: " << (below ? "yes" : "NO") << "; r=6 in [0.84, 0.8661]: "
     << (window ? "yes" : "NO (known-red: on-ball lower bounds cannot reach 0.84 at radius 6)");
  note = os.str();
  return monotone && below && window;
}

bool criterion8(std::string& note) {
  bool ok = true;
  std::ostringstream os;
  os.precision(4);
  for (std::size_t m : {3u, 4u}) {
    FiniteQuotient q = symmetric_quotient(m);
    for (int s = 1; s <= 3; ++s) {
      FactorKernelPair f = solve_factor_kernel_quotient(q, s);
      ok = ok && f.residual <= 1e-10 && f.projector_idempotence <= 1e-9 &&
           f.projector_symmetry <= 1e-9 && f.contour_delta >= 0 && f.contour_delta <= 1e-8;
    }
    FactorKernelPair f1 = solve_factor_kernel_quotient(q, 1);
    os << "order " << q.order() << ": resid " << std::scientific << f1.residual << std::fixed
       << " u1(e)=" << f1.identity_coefficient << "; ";
  }
  // Largest tested quotient: a deterministic random quotient (asymptotically
  // free family), where the 0.5 symmetry target is visible.
  QuotientTriple rt = quotient_family("random:6,1", 1)[0];
  FactorKernelPair fr = solve_factor_kernel_quotient(rt.factor(1), 1);
  ok = ok && fr.residual <= 1e-10;
  const bool coeff_ok = std::abs(fr.identity_coefficient - 0.5) <= 0.1;
  os << "largest (random, order " << rt.factor(1).order() << "): u1(e)=" << fr.identity_coefficient
     << (coeff_ok ? " within 0.1 of 0.5" : " OUTSIDE 0.1 of 0.5");
  note = os.str();
  return ok && coeff_ok;
}

bool criterion9(std::string& note) {
  QuotientTriple t3 = quotient_family("sym:3", 0)[0];
  KernelElements ke3 = solve_kernel_elements_quotient(symmetric_quotient(3));
  YElement y3 = build_y(ke3, &t3);
  QuotientTriple t4 = quotient_family("sym:4", 0)[0];
  KernelElements ke4 = solve_kernel_elements_quotient(symmetric_quotient(4));
  YElement y4 = build_y(ke4, &t4);
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << "chain residual: " << y3.residual << " (order 6 at sym:3), "
     << y4.residual << " (order 24 at sym:4); tolerance 1e-8";
  note = os.str();
  return y3.residual <= 1e-8 && y4.residual <= 1e-8;
}

bool criterion10(std::string& note) {
  std::ostringstream os;
  os.precision(4);
  auto family = quotient_family("sym:2..3+sym:3,3,4", 0);
  LabOptions opt = lab_opts();

  KernelElements ke = solve_kernel_elements_quotient(symmetric_quotient(4));
  GammaOptions gopt;
  gopt.truncation_radius = 2;
  gopt.denominator_limit = 1024;
  AttachingMatrix am = construct_gamma(ke, quotient_family("sym:3", 0)[0], gopt);
  ChainComplex y = attach_cells(wedge_sphere(build_X()), am.gamma);
  CertifyReport rep = certify_Y(y, family, opt);

  bool chi_ok = true, excess_zero = true;
  for (const CertifyRow& r : rep.rows) {
    chi_ok = chi_ok && r.euler_zero;
    excess_zero = excess_zero && r.b3_excess == 0;
  }
  bool strictly_decreasing = true;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
    if (compare_normalized(rep.rows[i + 1].max_kernel, rep.rows[i + 1].dimension,
                           rep.rows[i].max_kernel, rep.rows[i].dimension) >= 0)
      strictly_decreasing = false;
  const CertifyRow& last = rep.rows.back();
  const bool final_below = last.max_normalized < 0.05;
  const bool pass_verdict = rep.verdict == "PASS";

  CertifyReport neg = certify_Y(attach_cells(wedge_sphere(build_X()), coordinate_gamma()),
                                family, opt);
  bool neg_fail = neg.verdict == "FAIL";
  bool neg_b3_to_1 = true;
  double prev_dist = 1e9;
  for (const CertifyRow& r : neg.rows) {
    double dist = std::abs(static_cast<double>(r.kernel[3]) / r.dimension - 1.0);
    neg_b3_to_1 = neg_b3_to_1 && dist < prev_dist;
    prev_dist = dist;
  }
  neg_b3_to_1 = neg_b3_to_1 && prev_dist < 0.5;

  // Integer mode is reported but not required.
  std::string integer_note = "integer mode: ";
  try {
    GammaOptions iopt = gopt;
    iopt.mode = "integer";
    AttachingMatrix iam = construct_gamma(ke, quotient_family("sym:3", 0)[0], iopt);
    integer_note += "N=" + std::to_string(iam.scale_n) +
                    ", sigma_min=" + std::to_string(iam.sigma_min);
  } catch (const std::exception& e) {
    integer_note += std::string("failed (") + e.what() + ")";
  }

  os << std::fixed << "rational gamma: max normalized";
  for (const CertifyRow& r : rep.rows) os << " " << r.max_normalized;
  os << "; strictly decreasing: " << (strictly_decreasing ? "yes" : "NO")
     << "; chi=0 exact: " << (chi_ok ? "yes" : "NO") << "; final < 0.05: "
     << (final_below ? "yes" : "NO (known-red: b3(Y) >= prod(|Q|+1)-prod|Q| for every exact "
                               "attaching map; gamma attains that floor exactly)")
     << "; b3 excess over floor all zero: " << (excess_zero ? "yes" : "NO")
     << "; verdict " << rep.verdict << "; negative control verdict " << neg.verdict
     << " with b3/D -> 1: " << (neg_b3_to_1 ? "yes" : "NO") << "; " << integer_note;
  note = os.str();
  return pass_verdict && strictly_decreasing && chi_ok && final_below && neg_fail && neg_b3_to_1;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    const char* target;
    std::function<bool(std::string&)> run;
  };
  std::vector<Entry> entries = {
      {1, "exact chain identities", "< 1 s", criterion1},
      {2, "K = B^3 per-quotient and entrywise", "< 1 min", criterion2},
      {3, "Kunneth convolution identities", "< 2 min", criterion3},
      {4, "wedge kernel law |Q|+1", "< 1 min", criterion4},
      {5, "exact Euler identities", "in sweeps", criterion5},
      {6, "Hopf accounting 7 = 8 - 1", "< 30 min", criterion6},
      {7, "Kesten ball bounds", "< 1 min", criterion7},
      {8, "kernel elements u1, u2", "< 5 min", criterion8},
      {9, "y in ker h", "< 5 min", criterion9},
      {10, "Y certification + negative control", "<= 1 h", criterion10},
  };
  int failures = 0;
  for (Entry& e : entries) {
    auto t0 = std::chrono::steady_clock::now();
    std::string note;
    bool ok = false;
    try {
      ok = e.run(note);
    } catch (const std::exception& ex) {
      note = std::string("exception: ") + ex.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s (%.1f s, target %s)\n", ok ? "PASS" : "FAIL", e.id,
                e.name, secs, e.target);
    std::printf("         %s\n", note.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::printf("acceptance: %d/10 criteria pass", 10 - failures);
  if (failures)
    std::printf(" (criteria 7 and 10 are documented known-red results; any other failure is a "
                "regression)");
  std::printf("\n");
  return failures == 0 ? 0 : 1;
}
