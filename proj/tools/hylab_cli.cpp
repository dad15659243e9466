// Command-line front end over the hylab C API. Subcommands mirror the
// library surface: kernels, norms, expansions, spectrum, stability
// certificates, q scans, and perturbation sweeps. Options may come from a
// plain key=value file (--config); explicit flags override file entries.

#include "hylab.h"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string g12(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.12g", v);
  return b;
}

std::string g17(double v) {
  char b[48];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

const char* yn(int v) { return v ? "yes" : "no"; }

// Validation and numeric failures carry the process exit code directly.
struct Fail {
  int code;
  std::string msg;
};

[[noreturn]] void fail(int code, const std::string& msg) {
  throw Fail{code, msg};
}

void check(int rc) {
  if (rc != 0) fail(rc, hy_last_error());
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.empty())
      fail(1, what + ": bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(1, what + ": empty list");
  return out;
}

/* ------------------------------------------------------------ trial flags */

struct TrialArgs {
  std::string kind = "ball";
  int d = 1;
  std::string bounds;
  double base = 1.0;
  std::string modes;
  double modulus = 0.0;
  double phase_t = 0.0;
  double phase_offset = 0.0;
  double phase_quad = 0.0;
};

struct TrialHandle {
  hy_trial* t = nullptr;
  TrialHandle() = default;
  TrialHandle(const TrialHandle&) = delete;
  TrialHandle& operator=(const TrialHandle&) = delete;
  ~TrialHandle() { hy_trial_free(t); }
};

void build_trial(const TrialArgs& a, TrialHandle* h) {
  if (a.kind == "ball") {
    h->t = hy_trial_ball(a.d);
  } else if (a.kind == "intervals") {
    if (a.bounds.empty())
      fail(1, "--trial intervals needs --bounds lo,hi[,lo,hi...]");
    const std::vector<double> b = parse_list(a.bounds, "--bounds");
    if (b.size() % 2 != 0) fail(1, "--bounds needs an even number of values");
    h->t = hy_trial_intervals(b.data(), static_cast<int>(b.size() / 2));
  } else if (a.kind == "radial") {
    std::vector<double> m;
    if (!a.modes.empty()) m = parse_list(a.modes, "--modes");
    if (m.size() % 3 != 0) fail(1, "--modes needs k,amp,phase triples");
    h->t = hy_trial_radial(a.base, m.data(), static_cast<int>(m.size() / 3));
  } else {
    fail(1, "unknown --trial '" + a.kind + "' (ball, intervals, radial)");
  }
  if (!h->t) fail(1, hy_last_error());
  if (a.modulus != 0.0) check(hy_trial_constant_modulus(h->t, a.modulus));
  if (a.phase_t != 0.0 || a.phase_offset != 0.0)
    check(hy_trial_linear_phase(h->t, a.phase_t, 0.0, a.phase_offset));
  if (a.phase_quad != 0.0) check(hy_trial_quadratic_phase(h->t, a.phase_quad));
}

/* ------------------------------------------------------------- norm flags */

struct NormArgs {
  double q = 4.0;
  double tol = 0.0;
  int grid_n = 0;
  double freq_cutoff = 0.0;
  double box = 0.0;
  int force_grid = 0;
};

hy_norm_options to_opt(const NormArgs& n) {
  return {n.tol, n.grid_n, n.freq_cutoff, n.box, n.force_grid};
}

double effective_tol(double tol, int d) {
  return tol > 0.0 ? tol : (d == 1 ? 1e-6 : 1e-4);
}

/* -------------------------------------------------------------- all flags */

struct Args {
  TrialArgs trial;
  NormArgs norm;
  std::string config;
  std::string out;

  std::string kernel_kind = "both";

  int want_deficit = 0;

  std::string taylor_op = "expand";
  std::string route = "auto";
  double eps = 0.1;

  int spec_n = 0;
  int spec_angular = 0;
  int spec_count = 50;
  int skip_gap = 0;

  int suite = 0;
  double suite_eps = 0.05;
  unsigned long long seed = 20260822ull;
  double threshold_m = 0.0;
  double threshold_n = 0.0;
  int skip_precompose = 0;

  double q_lo = 3.6;
  double q_hi = 4.4;
  double dq = 0.1;

  std::string family = "modulus";
  std::string params;
  int sweep_d = 1;
};

void add_common(CLI::App* sub, Args* a) {
  sub->add_option("--config", a->config,
                  "key=value file; explicit flags override file entries");
  sub->add_option("--out", a->out, "write results to this CSV file");
}

void add_trial_options(CLI::App* sub, Args* a) {
  sub->add_option("--trial", a->trial.kind,
                  "trial family: ball, intervals, radial");
  sub->add_option("--d", a->trial.d, "dimension for ball trials (1 or 2)");
  sub->add_option("--bounds", a->trial.bounds,
                  "interval endpoints lo,hi[,lo,hi...]");
  sub->add_option("--base", a->trial.base,
                  "base boundary radius for radial trials");
  sub->add_option("--modes", a->trial.modes,
                  "radial boundary modes k,amp,phase[,...]");
  sub->add_option("--modulus", a->trial.modulus,
                  "constant modulus in (0, 1]; 0 leaves the indicator");
  sub->add_option("--phase-t", a->trial.phase_t, "linear phase slope");
  sub->add_option("--phase-offset", a->trial.phase_offset,
                  "constant phase offset");
  sub->add_option("--phase-quad", a->trial.phase_quad,
                  "quadratic phase coefficient");
}

void add_norm_options(CLI::App* sub, Args* a) {
  sub->add_option("--q", a->norm.q, "norm exponent, q > 2");
  sub->add_option("--tol", a->norm.tol,
                  "accuracy target (0: per-dimension default)");
  sub->add_option("--grid-n", a->norm.grid_n,
                  "grid cells per axis (0: path default)");
  sub->add_option("--freq-cutoff", a->norm.freq_cutoff,
                  "frequency window half-width (0: auto from tol)");
  sub->add_option("--box", a->norm.box,
                  "spatial half-width (0: fit the support)");
  sub->add_option("--force-grid", a->norm.force_grid,
                  "route structured trials through the grid path (0/1)");
}

void canon_trial(std::map<std::string, std::string>* m, const TrialArgs& a) {
  (*m)["trial"] = a.kind;
  (*m)["d"] = std::to_string(a.d);
  (*m)["bounds"] = a.bounds;
  (*m)["base"] = g17(a.base);
  (*m)["modes"] = a.modes;
  (*m)["modulus"] = g17(a.modulus);
  (*m)["phase-t"] = g17(a.phase_t);
  (*m)["phase-offset"] = g17(a.phase_offset);
  (*m)["phase-quad"] = g17(a.phase_quad);
}

void canon_norm(std::map<std::string, std::string>* m, const NormArgs& n) {
  (*m)["q"] = g17(n.q);
  (*m)["tol"] = g17(n.tol);
  (*m)["grid-n"] = std::to_string(n.grid_n);
  (*m)["freq-cutoff"] = g17(n.freq_cutoff);
  (*m)["box"] = g17(n.box);
  (*m)["force-grid"] = std::to_string(n.force_grid);
}

std::uint64_t config_hash(const std::string& cmd,
                          const std::map<std::string, std::string>& kv) {
  std::string s = "cmd=" + cmd;
  for (const auto& [k, v] : kv) {
    s += '|';
    s += k;
    s += '=';
    s += v;
  }
  return fnv1a64(s);
}

/* --------------------------------------------------------------- CSV file */

struct Csv {
  std::ofstream out;
  bool active = false;

  void open(const std::string& path, std::uint64_t hash, double q, int d,
            double tol) {
    if (path.empty()) return;
    out.open(path, std::ios::binary);
    if (!out) fail(1, "cannot open '" + path + "' for writing");
    char head[160];
    std::snprintf(head, sizeof head, "# hylab %s config=%016llx q=%s d=%d tol=%s",
                  hy_version(), static_cast<unsigned long long>(hash),
                  g12(q).c_str(), d, g12(tol).c_str());
    out << head << '\n';
    active = true;
  }

  void comment(const std::string& line) {
    if (active) out << "# " << line << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    if (!active) return;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }
};

/* ------------------------------------------------------------ word tables */

const char* path_word(int p) {
  switch (p) {
    case HY_PATH_EXACT_INTERVALS: return "exact-intervals";
    case HY_PATH_RADIAL_BALL: return "radial-ball";
    case HY_PATH_GRID_1D: return "grid-1d";
    default: return "grid-2d";
  }
}

const char* parity_word(int p) {
  switch (p) {
    case HY_PARITY_EVEN: return "even";
    case HY_PARITY_ODD: return "odd";
    default: return "mixed";
  }
}

const char* case_word(int c) {
  switch (c) {
    case HY_CASE_MODULUS: return "modulus";
    case HY_CASE_SUPPORT: return "support";
    default: return "frequency";
  }
}

int family_id(const std::string& name) {
  if (name == "modulus") return HY_FAMILY_MODULUS;
  if (name == "phase-t") return HY_FAMILY_PHASE_QUADRATIC;
  if (name == "phase-affine") return HY_FAMILY_PHASE_AFFINE;
  if (name == "support") return HY_FAMILY_SUPPORT;
  return -1;
}

const char* family_word(int id) {
  switch (id) {
    case HY_FAMILY_MODULUS: return "modulus";
    case HY_FAMILY_PHASE_QUADRATIC: return "phase-t";
    case HY_FAMILY_PHASE_AFFINE: return "phase-affine";
    default: return "support";
  }
}

int route_id(const std::string& name) {
  if (name == "auto") return HY_ROUTE_AUTO;
  if (name == "grid") return HY_ROUTE_GRID;
  if (name == "segments") return HY_ROUTE_SEGMENTS;
  fail(1, "unknown --route '" + name + "' (auto, grid, segments)");
}

/* ------------------------------------------------------------ subcommands */

int run_kernel(const Args& a) {
  std::vector<int> kinds;
  if (a.kernel_kind == "K") kinds = {HY_KERNEL_K};
  else if (a.kernel_kind == "L") kinds = {HY_KERNEL_L};
  else if (a.kernel_kind == "both") kinds = {HY_KERNEL_K, HY_KERNEL_L};
  else fail(1, "unknown --kind '" + a.kernel_kind + "' (K, L, both)");

  std::map<std::string, std::string> canon;
  canon["kind"] = a.kernel_kind;
  canon["q"] = g17(a.norm.q);
  canon["d"] = std::to_string(a.trial.d);
  canon["freq-cutoff"] = g17(a.norm.freq_cutoff);
  const std::uint64_t hash = config_hash("kernel", canon);

  hy_kernel_info first{};
  check(hy_kernel_describe(kinds[0], a.norm.q, a.trial.d, &first));

  Csv csv;
  csv.open(a.out, hash, a.norm.q, a.trial.d, first.tail_tolerance);
  csv.row({"kind", "r", "value"});

  for (int kind : kinds) {
    hy_kernel_info info{};
    check(hy_kernel_describe(kind, a.norm.q, a.trial.d, &info));
    const char* name = kind == HY_KERNEL_K ? "K" : "L";
    std::printf("kernel %s: q %s d %d\n", name, g12(info.q).c_str(), info.d);
    std::printf("  samples 0..%s step %s\n", g12(info.r_max).c_str(),
                g12(info.dr).c_str());
    std::printf("  tail radius %s  tail tolerance %s  tail bound %s\n",
                g12(info.tail_radius).c_str(), g12(info.tail_tolerance).c_str(),
                g12(info.tail_bound).c_str());
    std::printf("  freq cutoff %s  quad error %s\n",
                g12(info.freq_cutoff).c_str(), g12(info.quad_error).c_str());
    csv.comment(std::string("kind=") + name +
                " tail_radius=" + g12(info.tail_radius) +
                " tail_tolerance=" + g12(info.tail_tolerance) +
                " quad_error=" + g12(info.quad_error));
    const int n = static_cast<int>(std::lround(info.r_max / info.dr));
    for (int i = 0; i <= n; ++i) {
      const double r = i * info.dr;
      double v = 0.0;
      check(hy_kernel_eval(kind, a.norm.q, a.trial.d, r, &v));
      csv.row({name, g12(r), g12(v)});
    }
  }
  return 0;
}

int run_norm(const Args& a) {
  TrialHandle h;
  build_trial(a.trial, &h);
  const int d = hy_trial_dim(h.t);
  const hy_norm_options opt = to_opt(a.norm);

  hy_norm_result r{};
  check(hy_norm(h.t, a.norm.q, &opt, &r));

  std::map<std::string, std::string> canon;
  canon_trial(&canon, a.trial);
  canon_norm(&canon, a.norm);
  canon["deficit"] = std::to_string(a.want_deficit);
  const std::uint64_t hash = config_hash("norm", canon);

  std::printf("norm_q = %s +/- %s  (path %s)\n", g12(r.value).c_str(),
              g12(r.budget).c_str(), path_word(r.path));
  std::printf("  integral %s  tail %s  quad error %s  grid error %s\n",
              g12(r.integral).c_str(), g12(r.tail).c_str(),
              g12(r.quad_error).c_str(), g12(r.grid_error).c_str());
  std::printf("  freq cutoff %s  reliable freq %s  grid_n %d\n",
              g12(r.freq_cutoff).c_str(), g12(r.reliable_freq).c_str(),
              r.grid_n);

  Csv csv;
  csv.open(a.out, hash, a.norm.q, d, effective_tol(a.norm.tol, d));

  int code = 0;
  if (a.want_deficit) {
    hy_deficit_result dr{};
    check(hy_deficit(h.t, a.norm.q, &opt, &dr));
    std::printf("deficit = %s +/- %s\n", g12(dr.deficit).c_str(),
                g12(dr.budget).c_str());
    std::printf("  ball %s  trial %s\n", g12(dr.ball_value).c_str(),
                g12(dr.trial_value).c_str());
    std::printf("  dist modulus %s  dist phase^2 %s  dist shape^2 %s\n",
                g12(dr.dist_modulus).c_str(), g12(dr.dist_phase_sq).c_str(),
                g12(dr.dist_shape_sq).c_str());
    std::printf("  implied c %s  sign certified %s\n",
                g12(dr.implied_c).c_str(), yn(dr.sign_certified));
    csv.row({"q", "d", "path", "value", "budget", "integral", "tail",
             "quad_error", "grid_error", "deficit", "deficit_budget",
             "ball_value", "dist_modulus", "dist_phase_sq", "dist_shape_sq",
             "implied_c", "certified"});
    csv.row({g12(r.q), std::to_string(d), path_word(r.path), g12(r.value),
             g12(r.budget), g12(r.integral), g12(r.tail), g12(r.quad_error),
             g12(r.grid_error), g12(dr.deficit), g12(dr.budget),
             g12(dr.ball_value), g12(dr.dist_modulus), g12(dr.dist_phase_sq),
             g12(dr.dist_shape_sq), g12(dr.implied_c),
             std::to_string(dr.sign_certified)});
    if (dr.deficit < -dr.budget) {
      std::printf("flag: deficit below its own error budget\n");
      code = 2;
    }
  } else {
    csv.row({"q", "d", "path", "value", "budget", "integral", "tail",
             "quad_error", "grid_error", "freq_cutoff", "reliable_freq",
             "grid_n"});
    csv.row({g12(r.q), std::to_string(d), path_word(r.path), g12(r.value),
             g12(r.budget), g12(r.integral), g12(r.tail), g12(r.quad_error),
             g12(r.grid_error), g12(r.freq_cutoff), g12(r.reliable_freq),
             std::to_string(r.grid_n)});
  }
  return code;
}

int run_taylor(const Args& a) {
  TrialHandle h;
  build_trial(a.trial, &h);
  const int d = hy_trial_dim(h.t);
  const hy_norm_options opt = to_opt(a.norm);

  std::map<std::string, std::string> canon;
  canon_trial(&canon, a.trial);
  canon_norm(&canon, a.norm);
  canon["op"] = a.taylor_op;
  canon["route"] = a.route;
  canon["eps"] = g17(a.eps);
  const std::uint64_t hash = config_hash("taylor", canon);

  Csv csv;
  csv.open(a.out, hash, a.norm.q, d, effective_tol(a.norm.tol, d));

  if (a.taylor_op == "expand") {
    hy_expansion_result r{};
    check(hy_expand(h.t, a.norm.q, &opt, route_id(a.route), &r));
    std::printf("expansion about the ball (route %s)\n", a.route.c_str());
    std::printf("  base %s  linear %s\n", g12(r.base).c_str(),
                g12(r.linear).c_str());
    std::printf("  quad re sum %s  re diff %s  im sum %s  im diff %s\n",
                g12(r.quad_re_sum).c_str(), g12(r.quad_re_diff).c_str(),
                g12(r.quad_im_sum).c_str(), g12(r.quad_im_diff).c_str());
    std::printf("  predicted %s  direct %s  residual %s +/- %s\n",
                g12(r.predicted).c_str(), g12(r.direct).c_str(),
                g12(r.residual).c_str(), g12(r.budget).c_str());
    std::printf("  perturbation norm %s  small enough %s\n",
                g12(r.h_norm).c_str(), yn(r.small_enough));
    csv.row({"q", "d", "route", "base", "linear", "quad_re_sum",
             "quad_re_diff", "quad_im_sum", "quad_im_diff", "predicted",
             "direct", "residual", "budget", "h_norm", "small_enough"});
    csv.row({g12(r.q), std::to_string(d), a.route, g12(r.base), g12(r.linear),
             g12(r.quad_re_sum), g12(r.quad_re_diff), g12(r.quad_im_sum),
             g12(r.quad_im_diff), g12(r.predicted), g12(r.direct),
             g12(r.residual), g12(r.budget), g12(r.h_norm),
             std::to_string(r.small_enough)});
  } else if (a.taylor_op == "split") {
    hy_split_result r{};
    check(hy_support_split(h.t, a.norm.q, &opt, &r));
    std::printf("support split\n");
    std::printf("  |E delta B| %s  outside linear %s\n",
                g12(r.support_norm).c_str(), g12(r.outside_linear).c_str());
    std::printf("  base %s  core %s\n", g12(r.base).c_str(),
                g12(r.core_norm).c_str());
    std::printf("  predicted %s  direct %s  residual %s +/- %s\n",
                g12(r.predicted).c_str(), g12(r.direct).c_str(),
                g12(r.residual).c_str(), g12(r.budget).c_str());
    csv.row({"q", "d", "support_norm", "outside_linear", "base", "core_norm",
             "predicted", "direct", "residual", "budget"});
    csv.row({g12(r.q), std::to_string(d), g12(r.support_norm),
             g12(r.outside_linear), g12(r.base), g12(r.core_norm),
             g12(r.predicted), g12(r.direct), g12(r.residual), g12(r.budget)});
  } else if (a.taylor_op == "frequency") {
    hy_frequency_result r{};
    check(hy_frequency_bound(h.t, a.norm.q, a.eps, &opt, &r));
    std::printf("oscillation upper bound, split at |g| = %s\n",
                g12(r.eps).c_str());
    std::printf("  base %s  bound %s  direct %s\n", g12(r.base).c_str(),
                g12(r.bound).c_str(), g12(r.direct).c_str());
    std::printf("  margin %s +/- %s  error scale %s\n", g12(r.margin).c_str(),
                g12(r.budget).c_str(), g12(r.error_scale).c_str());
    std::printf("  high measure %s  neg cos measure %s  cos drop %s\n",
                g12(r.high_measure).c_str(), g12(r.neg_cos_measure).c_str(),
                g12(r.cos_drop).c_str());
    std::printf("  inf K %s  drop term %s  quad K %s\n", g12(r.inf_k).c_str(),
                g12(r.drop_term).c_str(), g12(r.quad_k).c_str());
    std::printf("  |g|_2 %s  |f|_1 %s  hypothesis ok %s\n",
                g12(r.g_l2).c_str(), g12(r.f_l1).c_str(),
                yn(r.hypothesis_ok));
    csv.row({"q", "d", "eps", "base", "bound", "direct", "margin", "budget",
             "error_scale", "high_measure", "neg_cos_measure", "cos_drop",
             "inf_k", "drop_term", "quad_k", "quad_sum", "quad_diff", "g_l2",
             "f_l1", "hypothesis_ok"});
    csv.row({g12(r.q), std::to_string(d), g12(r.eps), g12(r.base),
             g12(r.bound), g12(r.direct), g12(r.margin), g12(r.budget),
             g12(r.error_scale), g12(r.high_measure), g12(r.neg_cos_measure),
             g12(r.cos_drop), g12(r.inf_k), g12(r.drop_term), g12(r.quad_k),
             g12(r.quad_sum), g12(r.quad_diff), g12(r.g_l2), g12(r.f_l1),
             std::to_string(r.hypothesis_ok)});
  } else {
    fail(1, "unknown --op '" + a.taylor_op + "' (expand, split, frequency)");
  }
  return 0;
}

int run_spectrum(const Args& a) {
  std::map<std::string, std::string> canon;
  canon["q"] = g17(a.norm.q);
  canon["d"] = std::to_string(a.trial.d);
  canon["n"] = std::to_string(a.spec_n);
  canon["angular-n"] = std::to_string(a.spec_angular);
  canon["count"] = std::to_string(a.spec_count);
  canon["skip-gap"] = std::to_string(a.skip_gap);
  const std::uint64_t hash = config_hash("spectrum", canon);

  if (a.spec_count < 1) fail(1, "--count must be positive");
  std::vector<hy_eigen_row> rows(static_cast<std::size_t>(a.spec_count));
  double asym = 0.0;
  double comm = 0.0;
  check(hy_spectrum(a.norm.q, a.trial.d, a.spec_n, a.spec_angular,
                    a.spec_count, rows.data(), &asym, &comm));

  std::printf("spectrum q %s d %d: %d eigenvalues\n", g12(a.norm.q).c_str(),
              a.trial.d, a.spec_count);
  std::printf("  asymmetry %s  commutator %s\n", g12(asym).c_str(),
              g12(comm).c_str());
  std::printf("  lambda_1 %s (%s)  lambda_2 %s (%s)\n",
              g12(rows[0].value).c_str(), parity_word(rows[0].parity),
              rows.size() > 1 ? g12(rows[1].value).c_str() : "-",
              rows.size() > 1 ? parity_word(rows[1].parity) : "-");
  std::printf("  lambda_%d %s\n", a.spec_count,
              g12(rows.back().value).c_str());

  Csv csv;
  csv.open(a.out, hash, a.norm.q, a.trial.d, 0.0);
  csv.row({"index", "eigenvalue", "parity", "h_overlap"});
  for (std::size_t i = 0; i < rows.size(); ++i)
    csv.row({std::to_string(i + 1), g12(rows[i].value),
             parity_word(rows[i].parity), g12(rows[i].h_overlap)});

  int code = 0;
  if (!a.skip_gap) {
    hy_gap_result gap{};
    check(hy_gap(a.norm.q, a.trial.d, a.spec_n, &gap));
    std::printf("gap c %s  coarse %s  drift %s\n", g12(gap.c).c_str(),
                g12(gap.c_coarse).c_str(), g12(gap.drift).c_str());
    std::printf("  null residual %s  n %d  truncation %d  positive %s\n",
                g12(gap.null_residual).c_str(), gap.n, gap.truncation_n,
                yn(gap.positive));
    csv.comment("gap c=" + g12(gap.c) + " coarse=" + g12(gap.c_coarse) +
                " drift=" + g12(gap.drift) + " positive=" +
                std::to_string(gap.positive));
    if (!gap.positive) {
      std::printf("flag: coercivity estimate is not positive\n");
      code = 2;
    }
  }
  return code;
}

int run_stability(const Args& a) {
  std::map<std::string, std::string> canon;
  canon_trial(&canon, a.trial);
  canon_norm(&canon, a.norm);
  canon["suite"] = std::to_string(a.suite);
  canon["eps"] = g17(a.suite_eps);
  canon["seed"] = std::to_string(a.seed);
  canon["threshold-m"] = g17(a.threshold_m);
  canon["threshold-n"] = g17(a.threshold_n);
  canon["skip-precompose"] = std::to_string(a.skip_precompose);
  const std::uint64_t hash = config_hash("stability", canon);

  const hy_norm_options opt = to_opt(a.norm);

  if (a.suite > 0) {
    hy_suite_result r{};
    check(hy_sign_suite(a.norm.q, a.trial.d, a.suite, a.suite_eps, a.seed,
                        &opt, &r));
    std::printf("sign suite q %s d %d: %d trials at eps %s, seed %llu\n",
                g12(r.q).c_str(), r.d, r.trials, g12(a.suite_eps).c_str(),
                static_cast<unsigned long long>(a.seed));
    std::printf("  failures %d  certified %d  positive c %d\n", r.failures,
                r.certified, r.positive_c);
    std::printf("  min margin %s  min implied c %s  pass %s\n",
                g12(r.min_margin).c_str(), g12(r.min_implied_c).c_str(),
                yn(r.pass));
    Csv csv;
    csv.open(a.out, hash, a.norm.q, a.trial.d,
             effective_tol(a.norm.tol, a.trial.d));
    csv.row({"q", "d", "trials", "eps", "seed", "failures", "certified",
             "positive_c", "min_margin", "min_implied_c", "pass"});
    csv.row({g12(r.q), std::to_string(r.d), std::to_string(r.trials),
             g12(a.suite_eps), std::to_string(a.seed),
             std::to_string(r.failures), std::to_string(r.certified),
             std::to_string(r.positive_c), g12(r.min_margin),
             g12(r.min_implied_c), std::to_string(r.pass)});
    if (!r.pass) {
      std::printf("flag: a trial broke the deficit sign or lost its certificate\n");
      return 2;
    }
    return 0;
  }

  TrialHandle h;
  build_trial(a.trial, &h);
  const int d = hy_trial_dim(h.t);

  hy_certificate_options co{};
  co.norm = opt;
  co.threshold_m = a.threshold_m;
  co.threshold_n = a.threshold_n;
  co.skip_precompose = a.skip_precompose;

  hy_certificate c{};
  check(hy_certificate_run(h.t, a.norm.q, &co, &c));

  std::printf("stability certificate, q %s d %d\n", g12(c.q).c_str(), d);
  std::printf("  deficit %s +/- %s  (ball %s, trial %s)\n",
              g12(c.deficit).c_str(), g12(c.budget).c_str(),
              g12(c.ball_value).c_str(), g12(c.trial_value).c_str());
  std::printf("  case %s  magnitudes: modulus %s support %s frequency %s\n",
              case_word(c.case_label), g12(c.modulus_mag).c_str(),
              g12(c.support_mag).c_str(), g12(c.freq_mag).c_str());
  std::printf("  dist modulus %s  dist phase^2 %s  dist shape^2 %s\n",
              g12(c.dist_modulus).c_str(), g12(c.dist_phase_sq).c_str(),
              g12(c.dist_shape_sq).c_str());
  std::printf("  implied c %s  certified %s  hypothesis ok %s\n",
              g12(c.implied_c).c_str(), yn(c.certified),
              yn(c.hypothesis_ok));
  std::printf("  normalized %s  translation dropped %s  optimizer converged %s\n",
              yn(c.normalized), yn(c.translation_dropped),
              yn(c.optimizer_converged));

  Csv csv;
  csv.open(a.out, hash, a.norm.q, d, effective_tol(a.norm.tol, d));
  csv.row({"q", "d", "case", "deficit", "budget", "ball_value", "trial_value",
           "dist_modulus", "dist_phase_sq", "dist_shape_sq", "implied_c",
           "modulus_mag", "support_mag", "freq_mag", "certified",
           "hypothesis_ok", "normalized", "translation_dropped",
           "optimizer_converged"});
  csv.row({g12(c.q), std::to_string(d), case_word(c.case_label),
           g12(c.deficit), g12(c.budget), g12(c.ball_value),
           g12(c.trial_value), g12(c.dist_modulus), g12(c.dist_phase_sq),
           g12(c.dist_shape_sq), g12(c.implied_c), g12(c.modulus_mag),
           g12(c.support_mag), g12(c.freq_mag), std::to_string(c.certified),
           std::to_string(c.hypothesis_ok), std::to_string(c.normalized),
           std::to_string(c.translation_dropped),
           std::to_string(c.optimizer_converged)});

  if (c.deficit < -c.budget) {
    std::printf("flag: deficit below its own error budget\n");
    return 2;
  }
  return 0;
}

int run_scan_q(const Args& a) {
  TrialHandle h;
  build_trial(a.trial, &h);
  const int d = hy_trial_dim(h.t);
  const hy_norm_options opt = to_opt(a.norm);

  std::map<std::string, std::string> canon;
  canon_trial(&canon, a.trial);
  canon_norm(&canon, a.norm);
  canon["q-lo"] = g17(a.q_lo);
  canon["q-hi"] = g17(a.q_hi);
  canon["dq"] = g17(a.dq);
  const std::uint64_t hash = config_hash("scan-q", canon);

  if (!(a.dq > 0.0)) fail(1, "--dq must be positive");
  const int expect =
      static_cast<int>(std::round((a.q_hi - a.q_lo) / a.dq)) + 1;
  if (expect < 1 || expect > 100000) fail(1, "q range yields no points");
  std::vector<hy_scan_point> pts(static_cast<std::size_t>(expect));
  int count = 0;
  double max_jump = 0.0;
  check(hy_q_scan(h.t, a.q_lo, a.q_hi, a.dq, &opt, pts.data(), expect, &count,
                  &max_jump));
  pts.resize(static_cast<std::size_t>(count));

  std::printf("q scan %s..%s step %s: %d points\n", g12(a.q_lo).c_str(),
              g12(a.q_hi).c_str(), g12(a.dq).c_str(), count);
  std::printf("  max adjacent jump %s\n", g12(max_jump).c_str());

  Csv csv;
  csv.open(a.out, hash, a.norm.q, d, effective_tol(a.norm.tol, d));
  csv.comment("max_jump=" + g12(max_jump) + " dq=" + g12(a.dq));
  csv.row({"q", "norm_root"});
  for (const hy_scan_point& p : pts) csv.row({g12(p.q), g12(p.norm_root)});
  return 0;
}

std::vector<double> default_params(int family, int d) {
  std::vector<double> p;
  if (family == HY_FAMILY_MODULUS) {
    for (int k = 0; k <= 4; ++k) p.push_back(1e-3 * std::pow(10.0, k / 4.0));
  } else if (family == HY_FAMILY_SUPPORT && d == 2) {
    for (int k = 0; k <= 4; ++k)
      p.push_back(0.05 * std::pow(std::sqrt(2.0), k));
  } else if (family == HY_FAMILY_SUPPORT) {
    for (int k = 0; k <= 6; ++k)
      p.push_back(0.0125 * std::pow(std::sqrt(2.0), k));
  } else {
    for (int k = 0; k <= 4; ++k) p.push_back(0.0125 * std::pow(2.0, k));
  }
  return p;
}

// Two-sigma half-width of the fitted slope, recomputed from the used points.
double slope_ci2(const std::vector<hy_sweep_point>& pts) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const hy_sweep_point& p : pts)
    if (p.used && p.deficit > 0.0 && p.distance > 0.0) {
      xs.push_back(std::log(p.distance));
      ys.push_back(std::log(p.deficit));
    }
  const std::size_t n = xs.size();
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - my - slope * (xs[i] - mx);
    ssr += r * r;
  }
  return 2.0 * std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
}

int run_sweep(const Args& a) {
  std::vector<int> families;
  if (a.family == "all") {
    families = {HY_FAMILY_MODULUS, HY_FAMILY_PHASE_QUADRATIC,
                HY_FAMILY_PHASE_AFFINE, HY_FAMILY_SUPPORT};
  } else {
    const int id = family_id(a.family);
    if (id < 0)
      fail(1, "unknown --family '" + a.family +
                  "' (modulus, phase-t, phase-affine, support, all)");
    families = {id};
  }
  if (a.sweep_d != 1 && a.sweep_d != 2) fail(1, "--d must be 1 or 2");

  std::vector<double> given;
  if (!a.params.empty()) {
    given = parse_list(a.params, "--params");
    if (given.size() < 5) fail(1, "--params needs at least 5 values");
  }

  std::map<std::string, std::string> canon;
  canon_norm(&canon, a.norm);
  canon["family"] = a.family;
  canon["params"] = a.params;
  canon["d"] = std::to_string(a.sweep_d);
  const std::uint64_t hash = config_hash("sweep", canon);

  Csv csv;
  csv.open(a.out, hash, a.norm.q, a.sweep_d,
           effective_tol(a.norm.tol, a.sweep_d));
  csv.row({"family", "param", "deficit", "budget", "distance", "used"});

  const hy_norm_options opt = to_opt(a.norm);
  int code = 0;
  for (int family : families) {
    const std::vector<double> params =
        given.empty() ? default_params(family, a.sweep_d) : given;
    std::vector<hy_sweep_point> pts(params.size());
    hy_sweep_fit fit{};
    check(hy_sweep(family, a.norm.q, a.sweep_d, params.data(),
                   static_cast<int>(params.size()), &opt, pts.data(), &fit));
    for (std::size_t i = 0; i < pts.size(); ++i)
      csv.row({family_word(family), g12(pts[i].param), g12(pts[i].deficit),
               g12(pts[i].budget), g12(pts[i].distance),
               std::to_string(pts[i].used)});
    const double ci = slope_ci2(pts);
    if (fit.degenerate) {
      std::printf("sweep %s: degenerate family, deficits at the noise floor\n",
                  family_word(family));
    } else {
      std::printf("sweep %s: slope %s +/- %s (2 sigma, %d of %d points)\n",
                  family_word(family), g12(fit.slope).c_str(),
                  g12(ci).c_str(), fit.used_count,
                  static_cast<int>(pts.size()));
      std::printf("  intercept %s  r2 %s  fit ok %s\n",
                  g12(fit.intercept).c_str(), g12(fit.r2).c_str(),
                  yn(fit.ok));
    }
    csv.comment(std::string(family_word(family)) + " slope=" +
                g12(fit.slope) + " ci2=" + g12(ci) + " r2=" + g12(fit.r2) +
                " used=" + std::to_string(fit.used_count) + " ok=" +
                std::to_string(fit.ok) + " degenerate=" +
                std::to_string(fit.degenerate));
    for (const hy_sweep_point& p : pts)
      if (p.deficit < -p.budget) {
        std::printf("flag: %s deficit %s at param %s below -budget %s\n",
                    family_word(family), g12(p.deficit).c_str(),
                    g12(p.param).c_str(), g12(p.budget).c_str());
        code = 2;
      }
  }
  return code;
}

/* -------------------------------------------------------- config handling */

std::vector<std::string> inject_config(
    const std::vector<std::string>& tokens,
    const std::map<std::string, CLI::App*>& subs) {
  int subpos = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].rfind("-", 0) == 0) continue;
    if (subs.count(tokens[i])) subpos = static_cast<int>(i);
    break;
  }
  if (subpos < 0) return tokens;

  std::string cfg;
  for (std::size_t j = subpos + 1; j < tokens.size(); ++j) {
    const std::string& t = tokens[j];
    if (t == "--config" && j + 1 < tokens.size()) cfg = tokens[j + 1];
    else if (t.rfind("--config=", 0) == 0) cfg = t.substr(9);
  }
  if (cfg.empty()) return tokens;

  CLI::App* sub = subs.at(tokens[subpos]);
  std::set<std::string> valid;
  for (CLI::Option* o : sub->get_options())
    for (const std::string& n : o->get_lnames())
      if (n != "help" && n != "version" && n != "config") valid.insert(n);

  std::ifstream in(cfg);
  if (!in) fail(1, "cannot open config file '" + cfg + "'");
  std::vector<std::string> inject;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(1, cfg + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      fail(1, cfg + ":" + std::to_string(lineno) + ": expected key=value");
    if (!valid.count(key))
      fail(1, cfg + ":" + std::to_string(lineno) + ": unknown key '" + key +
                  "'");
    inject.push_back("--" + key + "=" + val);
  }

  std::vector<std::string> out(tokens.begin(), tokens.begin() + subpos + 1);
  out.insert(out.end(), inject.begin(), inject.end());
  out.insert(out.end(), tokens.begin() + subpos + 1, tokens.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale laboratory for sharpened Hausdorff-Young bounds"};
  app.set_version_flag("--version", std::string(hy_version()));
  app.require_subcommand(1);

  Args a;
  std::map<std::string, CLI::App*> subs;

  CLI::App* kernel = app.add_subcommand(
      "kernel", "tabulate the frequency-side comparison kernels");
  kernel->add_option("--kind", a.kernel_kind, "K, L, or both");
  kernel->add_option("--q", a.norm.q, "norm exponent, q > 2");
  kernel->add_option("--d", a.trial.d, "dimension (1 or 2)");
  kernel->add_option("--freq-cutoff", a.norm.freq_cutoff,
                     "inversion cutoff override (0: auto)");
  add_common(kernel, &a);
  subs["kernel"] = kernel;

  CLI::App* norm = app.add_subcommand(
      "norm", "certified q-th power of a trial transform");
  add_trial_options(norm, &a);
  add_norm_options(norm, &a);
  norm->add_option("--deficit", a.want_deficit,
                   "also report the deficit against the matched ball (0/1)");
  add_common(norm, &a);
  subs["norm"] = norm;

  CLI::App* taylor = app.add_subcommand(
      "taylor", "quadratic expansion about the ball and related bounds");
  add_trial_options(taylor, &a);
  add_norm_options(taylor, &a);
  taylor->add_option("--op", a.taylor_op, "expand, split, or frequency");
  taylor->add_option("--route", a.route,
                     "pairing route for expand: auto, grid, segments");
  taylor->add_option("--eps", a.eps, "phase split level for frequency");
  add_common(taylor, &a);
  subs["taylor"] = taylor;

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "eigenvalues of the pairing operator and the gap");
  spectrum->add_option("--q", a.norm.q, "norm exponent, q > 2");
  spectrum->add_option("--d", a.trial.d, "dimension (1 or 2)");
  spectrum->add_option("--n", a.spec_n, "radial grid size (0: default)");
  spectrum->add_option("--angular-n", a.spec_angular,
                       "angular modes for d = 2 (0: default)");
  spectrum->add_option("--count", a.spec_count, "eigenvalues to report");
  spectrum->add_option("--skip-gap", a.skip_gap,
                       "skip the coercivity estimate (0/1)");
  add_common(spectrum, &a);
  subs["spectrum"] = spectrum;

  CLI::App* stability = app.add_subcommand(
      "stability", "stability certificate for a trial, or a randomized suite");
  add_trial_options(stability, &a);
  add_norm_options(stability, &a);
  stability->add_option("--suite", a.suite,
                        "run this many randomized trials instead");
  stability->add_option("--eps", a.suite_eps,
                        "perturbation size for the suite");
  stability->add_option("--seed", a.seed, "suite random seed");
  stability->add_option("--threshold-m", a.threshold_m,
                        "modulus case threshold (0: default)");
  stability->add_option("--threshold-n", a.threshold_n,
                        "support case threshold (0: default)");
  stability->add_option("--skip-precompose", a.skip_precompose,
                        "skip the affine normalization stage (0/1)");
  add_common(stability, &a);
  subs["stability"] = stability;

  CLI::App* scanq = app.add_subcommand(
      "scan-q", "norm root of a fixed trial across a q range");
  add_trial_options(scanq, &a);
  add_norm_options(scanq, &a);
  scanq->add_option("--q-lo", a.q_lo, "first exponent");
  scanq->add_option("--q-hi", a.q_hi, "last exponent");
  scanq->add_option("--dq", a.dq, "exponent step");
  add_common(scanq, &a);
  subs["scan-q"] = scanq;

  CLI::App* sweep = app.add_subcommand(
      "sweep", "deficit against distance over a perturbation family");
  add_norm_options(sweep, &a);
  sweep->add_option("--family", a.family,
                    "modulus, phase-t, phase-affine, support, or all");
  sweep->add_option("--params", a.params,
                    "comma-separated perturbation sizes (5 or more)");
  sweep->add_option("--d", a.sweep_d, "dimension for the support family");
  add_common(sweep, &a);
  subs["sweep"] = sweep;

  // Later occurrences win, so config-file tokens injected ahead of explicit
  // flags are overridden by them.
  for (auto& [name, sub] : subs)
    for (CLI::Option* o : sub->get_options()) {
      bool skip = false;
      for (const std::string& n : o->get_lnames())
        if (n == "help" || n == "version") skip = true;
      if (!skip) o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }

  try {
    std::vector<std::string> tokens(argv + 1, argv + argc);
    tokens = inject_config(tokens, subs);
    std::reverse(tokens.begin(), tokens.end());
    try {
      app.parse(tokens);
    } catch (const CLI::ParseError& e) {
      if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
          e.get_name() == "CallForVersion")
        return app.exit(e);
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }

    const std::string cmd = app.get_subcommands().at(0)->get_name();
    if (cmd == "kernel") return run_kernel(a);
    if (cmd == "norm") return run_norm(a);
    if (cmd == "taylor") return run_taylor(a);
    if (cmd == "spectrum") return run_spectrum(a);
    if (cmd == "stability") return run_stability(a);
    if (cmd == "scan-q") return run_scan_q(a);
    if (cmd == "sweep") return run_sweep(a);
    std::fprintf(stderr, "error: no subcommand\n");
    return 1;
  } catch (const Fail& f) {
    std::fprintf(stderr, "error: %s\n", f.msg.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
