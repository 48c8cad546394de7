#include "eigenpath/schedules.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace eigenpath {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void check_p(double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw ValidationError("gap model: p must lie in [1, 2]");
}

}  // namespace

std::string bound_family_name(BoundFamily family) {
  switch (family) {
    case BoundFamily::Hamiltonian: return "hamiltonian";
    case BoundFamily::JumpGeneric: return "jump_generic";
    case BoundFamily::JumpQubitised: return "jump_qubitised";
    case BoundFamily::JumpExp: return "jump_exp";
    case BoundFamily::JumpTrotter: return "jump_trotter";
    case BoundFamily::Phase: return "phase_randomisation";
  }
  return "unknown";
}

double simpson(const std::function<double(double)>& f, int n) {
  if (n < 2 || n % 2 != 0) throw ValidationError("simpson: panel count must be even and >= 2");
  const double h = 1.0 / n;
  double acc = f(0.0) + f(1.0);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return acc * h / 3.0;
}

Schedule constant_schedule(double value) {
  if (value < 0.0) throw ValidationError("constant_schedule: rate must be nonnegative");
  Schedule sched;
  sched.lambda = [value](double) { return value; };
  sched.inv_lambda_prime = [](double) { return 0.0; };
  sched.name = "constant(" + fmt_double(value) + ")";
  return sched;
}

AssumptionCertificate certify_assumption(const GapModel& gap, int grid) {
  check_p(gap.p);
  if (!gap.g0) throw GapModelMissingError("certify_assumption: no g0 on the model");
  if (gap.g0m <= 0.0) throw NonPositiveGapError("certify_assumption: g0m must be positive");
  double gmin = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= grid; ++k) {
    double g = gap.g0(static_cast<double>(k) / grid);
    if (g <= 0.0) throw NonPositiveGapError("certify_assumption: g0 vanishes on the grid");
    gmin = std::min(gmin, g);
  }
  if (gap.g0m > gmin * (1.0 + 1e-9))
    throw ValidationError("certify_assumption: g0m exceeds the grid minimum of g0");

  AssumptionCertificate cert;
  cert.g0_grid_min = gmin;
  cert.I_p = simpson([&](double s) { return std::pow(gap.g0(s), -gap.p); }, grid);
  cert.I_3mp = simpson([&](double s) { return std::pow(gap.g0(s), gap.p - 3.0); }, grid);
  cert.B_p = cert.I_p * std::pow(gap.g0m, gap.p - 1.0);
  cert.B_3mp = cert.I_3mp * std::pow(gap.g0m, 2.0 - gap.p);
  return cert;
}

GapModel certified(const GapModel& gap, int grid) {
  AssumptionCertificate cert = certify_assumption(gap, grid);
  GapModel out = gap;
  out.B_p = cert.B_p;
  out.B_3mp = cert.B_3mp;
  return out;
}

GapModel with_assumption_constants(const GapModel& gap, double p, int grid) {
  if (p < 1.0 || p > 2.0)
    throw ValidationError("with_assumption_constants: p must lie in [1, 2]");
  GapModel out = gap;
  out.p = p;
  if (gap.family_constant && p > 1.0 && p < 2.0) {
    out.B_p = gap.family_constant(p);
    out.B_3mp = gap.family_constant(3.0 - p);
    return out;
  }
  return certified(out, grid);
}

PathNorms path_norm_profile(const OperatorPath& path, int grid, double inflate) {
  PathNorms norms;
  for (int k = 0; k <= grid; ++k) {
    double s = static_cast<double>(k) / grid;
    norms.d1_max = std::max(norms.d1_max, operator_norm(path.derivative(s)));
    norms.d2_max = std::max(norms.d2_max, operator_norm(path.second_derivative(s)));
  }
  norms.d1_max *= inflate;
  norms.d2_max *= inflate;
  return norms;
}

namespace {

// One grid node (or one family-level bound) of the schedule-constant display.
double c_expression(BoundFamily family, double p, double B, int m, double d1, double d2,
                    double gp, double value_norm) {
  const double sm = std::sqrt(static_cast<double>(m));
  switch (family) {
    case BoundFamily::Hamiltonian:
      return (2.0 + p * gp * B) * d1 + d2 + 5.0 * sm * B * d1 * d1;
    case BoundFamily::JumpGeneric:
    case BoundFamily::JumpTrotter:
      return (2.0 + p * gp * B) * d1 + d2 + d1 * d1 + 5.0 * sm * B * d1 * d1;
    case BoundFamily::JumpQubitised: {
      if (value_norm >= 1.0 - 1e-9)
        throw NormTooLargeError("compute_C: qubitised family needs ||H|| < 1");
      double gamma = 1.0 / std::sqrt(1.0 - value_norm * value_norm);
      return (2.0 + p * gp * B) * d1 + d2 + (1.0 + gamma) * d1 * d1 +
             (5.0 + 2.0 * gamma) * sm * B * d1 * d1;
    }
    case BoundFamily::JumpExp:
      return (2.0 + p * gp * B) * d1 + d2 + 0.5 * kPi * d1 * d1 +
             (3.0 + kPi) * sm * B * d1 * d1;
    case BoundFamily::Phase:
      return (2.0 + (p - 1.0) * gp * B) * d1 + d2 + 4.0 * B * d1 * d1;
  }
  return 0.0;
}

}  // namespace

double compute_C(BoundFamily family, const OperatorPath& path, const GapModel& gap, int m,
                 int grid) {
  check_p(gap.p);
  if (gap.B_3mp <= 0.0)
    throw AssumptionNotCertifiedError("compute_C: gap model lacks a certified B_{3-p}");

  double worst = 0.0;
  for (int k = 0; k <= grid; ++k) {
    double s = static_cast<double>(k) / grid;
    double d1 = 1.01 * operator_norm(path.derivative(s));
    double d2 = 1.01 * operator_norm(path.second_derivative(s));
    double gp = std::abs(gap_model_derivative(gap, s));
    double hn = family == BoundFamily::JumpQubitised ? operator_norm(path.value(s)) : 0.0;
    worst = std::max(worst, c_expression(family, gap.p, gap.B_3mp, m, d1, d2, gp, hn));
  }
  return family == BoundFamily::Phase ? worst : m * worst;
}

double compute_C(BoundFamily family, const PathNorms& norms, const GapModel& gap, int m,
                 double value_norm_bound) {
  check_p(gap.p);
  if (gap.B_3mp <= 0.0)
    throw AssumptionNotCertifiedError("compute_C: gap model lacks a certified B_{3-p}");
  double expr = c_expression(family, gap.p, gap.B_3mp, m, norms.d1_max, norms.d2_max,
                             gap.dg0_bound, value_norm_bound);
  return family == BoundFamily::Phase ? expr : m * expr;
}

Schedule adaptive_schedule(BoundFamily family, const GapModel& gap, double epsilon, double C) {
  check_p(gap.p);
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ValidationError("adaptive_schedule: epsilon must lie in (0, 1)");
  if (!(C > 0.0)) throw ValidationError("adaptive_schedule: C must be positive");
  if (gap.B_p <= 0.0 || gap.B_3mp <= 0.0)
    throw AssumptionNotCertifiedError("adaptive_schedule: certify the gap model first");

  const double p = gap.p;
  const double q = family == BoundFamily::Phase ? p - 1.0 : p;
  const double pref = C / (epsilon * std::pow(gap.g0m, 2.0 - p));

  Schedule sched;
  sched.lambda = [pref, q, g0 = gap.g0](double s) { return pref * std::pow(g0(s), -q); };
  sched.inv_lambda_prime = [pref, q, gap](double s) {
    return (q / pref) * std::pow(gap.g0(s), q - 1.0) * gap_model_derivative(gap, s);
  };
  sched.adaptive = true;
  sched.epsilon = epsilon;
  sched.C = C;
  sched.name = "adaptive(p=" + fmt_double(p) + ",eps=" + fmt_double(epsilon) + ")";
  return sched;
}

double closed_form_cost(BoundFamily family, const GapModel& gap, double epsilon, double C) {
  if (gap.B_p <= 0.0)
    throw AssumptionNotCertifiedError("closed_form_cost: certify the gap model first");
  double base = C * gap.B_p / (epsilon * gap.g0m);
  return family == BoundFamily::Phase ? kPhaseTimeConstant * base : base;
}

namespace {

// Weighted Simpson sum over precomputed node values.
double quad(const std::vector<double>& vals) {
  const int n = static_cast<int>(vals.size()) - 1;
  const double h = 1.0 / n;
  double acc = vals[0] + vals[n];
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * vals[k];
  return acc * h / 3.0;
}

struct NodeData {
  std::vector<double> s, d1, d2, g, lam, ivp;
};

NodeData sample_nodes(const OperatorPath& path, const GapModel& gap, const Schedule& sched,
                      int n) {
  NodeData nd;
  nd.s.resize(n + 1);
  nd.d1.resize(n + 1);
  nd.d2.resize(n + 1);
  nd.g.resize(n + 1);
  nd.lam.resize(n + 1);
  nd.ivp.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    double s = static_cast<double>(k) / n;
    nd.s[k] = s;
    nd.d1[k] = operator_norm(path.derivative(s));
    nd.d2[k] = operator_norm(path.second_derivative(s));
    nd.g[k] = gap.g0(s);
    nd.lam[k] = sched.lambda(s);
    nd.ivp[k] = std::abs(sched.inv_lambda_prime(s));
  }
  return nd;
}

void add_term(BoundReport& rep, const std::string& name, double value) {
  rep.terms.push_back({name, value});
  rep.total += value;
}

}  // namespace

BoundReport eval_bound(BoundFamily family, const OperatorPath& path, const GapModel& gap, int m,
                       const Schedule& schedule, int quad_points, double trotter_step) {
  if (quad_points < 2 || quad_points % 2 != 0)
    throw ValidationError("eval_bound: quad_points must be even and >= 2");
  if (!schedule.lambda || !schedule.inv_lambda_prime)
    throw ScheduleNotDifferentiableError("eval_bound: schedule lacks lambda or (1/lambda)'");
  if (!gap.g0) throw GapModelMissingError("eval_bound: no g0 on the model");

  const int n = quad_points;
  const double sm = std::sqrt(static_cast<double>(m));
  NodeData nd = sample_nodes(path, gap, schedule, n);

  BoundReport rep;
  rep.family = bound_family_name(family);
  rep.schedule = schedule.name;
  rep.m = m;

  auto integral = [&](const std::function<double(int)>& f) {
    std::vector<double> vals(n + 1);
    for (int k = 0; k <= n; ++k) vals[k] = f(k);
    return quad(vals);
  };

  switch (family) {
    case BoundFamily::Hamiltonian: {
      auto bd = [&](int k) { return m * nd.d1[k] / (nd.lam[k] * nd.g[k] * nd.g[k]); };
      add_term(rep, "boundary_start", bd(0));
      add_term(rep, "boundary_end", bd(n));
      add_term(rep, "rate_variation",
               integral([&](int k) { return nd.ivp[k] * m * nd.d1[k] / (nd.g[k] * nd.g[k]); }));
      add_term(rep, "drive_curvature",
               integral([&](int k) { return m * nd.d2[k] / (nd.lam[k] * nd.g[k] * nd.g[k]); }));
      add_term(rep, "drive_square", integral([&](int k) {
                 return 5.0 * m * sm * nd.d1[k] * nd.d1[k] /
                        (nd.lam[k] * nd.g[k] * nd.g[k] * nd.g[k]);
               }));
      break;
    }
    case BoundFamily::JumpGeneric: {
      // Tight display from the projector calculus of the unitary itself.
      std::vector<double> ppn(n + 1), commn(n + 1);
      SpectralOptions opt;
      for (int k = 0; k <= n; ++k) {
        double s = nd.s[k];
        ComplexMatrix u = path.value(s);
        ComplexMatrix up = path.derivative(s);
        ComplexMatrix usec = path.second_derivative(s);
        ProjectorPair pp = window_projector(u, path.window(s), opt);
        ComplexMatrix dp = projector_derivative(u, pp, up);
        ComplexMatrix d2p = projector_second_derivative(u, pp, up, usec);
        ppn[k] = operator_norm(dp);
        commn[k] = operator_norm(pp.p * d2p - d2p * pp.p);
      }
      auto bd = [&](int k) { return sm * ppn[k] / (nd.lam[k] * nd.g[k]); };
      add_term(rep, "boundary_start", bd(0));
      add_term(rep, "boundary_end", bd(n));
      add_term(rep, "rate_variation",
               integral([&](int k) { return nd.ivp[k] * sm * ppn[k] / nd.g[k]; }));
      add_term(rep, "drive_coupling", integral([&](int k) {
                 return sm * nd.d1[k] * ppn[k] / (nd.lam[k] * nd.g[k]) +
                        2.0 * m * nd.d1[k] * ppn[k] / (nd.lam[k] * nd.g[k] * nd.g[k]);
               }));
      add_term(rep, "commutator_drift",
               integral([&](int k) { return sm * commn[k] / (nd.lam[k] * nd.g[k]); }));
      add_term(rep, "projector_square",
               integral([&](int k) { return sm * ppn[k] * ppn[k] / (nd.lam[k] * nd.g[k]); }));

      // Coarser display in terms of unitary derivative norms only.
      double alt = 0.0;
      auto bd2 = [&](int k) { return m * nd.d1[k] / (nd.lam[k] * nd.g[k] * nd.g[k]); };
      alt += bd2(0) + bd2(n);
      alt += integral([&](int k) { return nd.ivp[k] * m * nd.d1[k] / (nd.g[k] * nd.g[k]); });
      alt += integral([&](int k) {
        return m * (nd.d1[k] * nd.d1[k] + nd.d2[k]) / (nd.lam[k] * nd.g[k] * nd.g[k]);
      });
      alt += integral([&](int k) {
        return 5.0 * m * sm * nd.d1[k] * nd.d1[k] / (nd.lam[k] * nd.g[k] * nd.g[k] * nd.g[k]);
      });
      rep.alternative_total = alt;
      break;
    }
    case BoundFamily::JumpQubitised: {
      std::vector<double> gamma(n + 1);
      for (int k = 0; k <= n; ++k) {
        double hn = operator_norm(path.value(nd.s[k]));
        if (hn >= 1.0 - 1e-9)
          throw NormTooLargeError("eval_bound: qubitised family needs ||H|| < 1");
        gamma[k] = 1.0 / std::sqrt(1.0 - hn * hn);
      }
      auto bd = [&](int k) { return m * nd.d1[k] / (nd.lam[k] * nd.g[k] * nd.g[k]); };
      add_term(rep, "boundary_start", bd(0));
      add_term(rep, "boundary_end", bd(n));
      add_term(rep, "rate_variation",
               integral([&](int k) { return nd.ivp[k] * m * nd.d1[k] / (nd.g[k] * nd.g[k]); }));
      add_term(rep, "drive_square", integral([&](int k) {
                 return (1.0 + gamma[k]) * m * nd.d1[k] * nd.d1[k] /
                        (nd.lam[k] * nd.g[k] * nd.g[k]);
               }));
      add_term(rep, "drive_curvature",
               integral([&](int k) { return m * nd.d2[k] / (nd.lam[k] * nd.g[k] * nd.g[k]); }));
      add_term(rep, "twiddle_tail", integral([&](int k) {
                 return (5.0 + 2.0 * gamma[k]) * m * sm * nd.d1[k] * nd.d1[k] /
                        (nd.lam[k] * nd.g[k] * nd.g[k] * nd.g[k]);
               }));
      break;
    }
    case BoundFamily::JumpExp: {
      auto bd = [&](int k) { return m * nd.d1[k] / (nd.lam[k] * nd.g[k] * nd.g[k]); };
      add_term(rep, "boundary_start", bd(0));
      add_term(rep, "boundary_end", bd(n));
      add_term(rep, "rate_variation",
               integral([&](int k) { return nd.ivp[k] * m * nd.d1[k] / (nd.g[k] * nd.g[k]); }));
      add_term(rep, "drive_square", integral([&](int k) {
                 return 0.5 * kPi * m * nd.d1[k] * nd.d1[k] / (nd.lam[k] * nd.g[k] * nd.g[k]);
               }));
      add_term(rep, "drive_curvature",
               integral([&](int k) { return m * nd.d2[k] / (nd.lam[k] * nd.g[k] * nd.g[k]); }));
      add_term(rep, "twiddle_tail", integral([&](int k) {
                 return (3.0 + kPi) * m * sm * nd.d1[k] * nd.d1[k] /
                        (nd.lam[k] * nd.g[k] * nd.g[k] * nd.g[k]);
               }));
      break;
    }
    case BoundFamily::JumpTrotter: {
      const double h = trotter_step;
      if (!(h > 0.0)) throw ValidationError("eval_bound: trotter family needs a positive step");
      std::vector<double> gh(n + 1);
      for (int k = 0; k <= n; ++k) {
        gh[k] = nd.g[k] - h * h;
        if (gh[k] <= 0.0)
          throw StepTooLargeError("eval_bound: step^2 reaches the gap along the path");
      }
      auto bd = [&](int k) {
        return m * 0.5 * kPi * nd.d1[k] / (nd.lam[k] * h * gh[k] * gh[k]);
      };
      add_term(rep, "boundary_start", bd(0));
      add_term(rep, "boundary_end", bd(n));
      add_term(rep, "drive", integral([&](int k) {
                 return m * kPi * kPi * nd.d1[k] / (nd.lam[k] * gh[k] * gh[k]);
               }));
      add_term(rep, "twiddle_tail", integral([&](int k) {
                 return 1.25 * kPi * kPi * m * sm * nd.d1[k] * nd.d1[k] /
                        (nd.lam[k] * h * gh[k] * gh[k] * gh[k]);
               }));
      add_term(rep, "rate_variation", integral([&](int k) {
                 return nd.ivp[k] * m * 0.5 * kPi * nd.d1[k] / (h * gh[k] * gh[k]);
               }));
      break;
    }
    case BoundFamily::Phase: {
      auto bd = [&](int k) { return nd.d1[k] / (nd.lam[k] * nd.g[k]); };
      add_term(rep, "boundary_start", bd(0));
      add_term(rep, "boundary_end", bd(n));
      add_term(rep, "drive_curvature",
               integral([&](int k) { return nd.d2[k] / (nd.lam[k] * nd.g[k]); }));
      add_term(rep, "drive_square", integral([&](int k) {
                 return 4.0 * nd.d1[k] * nd.d1[k] / (nd.lam[k] * nd.g[k] * nd.g[k]);
               }));
      add_term(rep, "rate_variation",
               integral([&](int k) { return nd.ivp[k] * nd.d1[k] / nd.g[k]; }));
      break;
    }
  }
  return rep;
}

GapIntegralReport gap_integral_check(GapKind kind, double p) {
  check_p(p);
  GapIntegralReport rep;
  rep.p = p;
  std::vector<GapModel> models;
  if (kind == GapKind::Grover) {
    rep.kind = "grover";
    for (int n : {4, 16, 64, 256}) {
      rep.parameter.push_back(n);
      models.push_back(grover_gap_model(n, 1));
    }
  } else {
    rep.kind = "qlsp";
    for (double k : {2.0, 4.0, 8.0, 16.0, 32.0}) {
      rep.parameter.push_back(k);
      models.push_back(qlsp_gap_model(k));
    }
  }
  for (const GapModel& gm : models) {
    double ip = simpson([&](double s) { return std::pow(gm.g0(s), -p); }, 2000);
    rep.integral.push_back(ip);
    // Normalise by the lemma's growth law. For p = 1 growth is logarithmic;
    // log(1/g0m) is the model's own log scale (log(2*kappa), log(N/M)/2).
    double norm = p > 1.0 + 1e-12 ? std::pow(gm.g0m, 1.0 - p) : std::log(1.0 / gm.g0m);
    rep.ratio.push_back(ip / norm);
  }
  double lo = rep.ratio[0], hi = rep.ratio[0];
  for (double r : rep.ratio) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  rep.spread = hi / lo;
  rep.pass = rep.spread <= 2.0;
  return rep;
}

}  // namespace eigenpath
