#ifndef HYLAB_H
#define HYLAB_H

/* C interface to the hylab library.
 *
 * Every function returns a status code: 0 on success, 1 on invalid input or
 * configuration, 2 when a computation fails its own numerical guards. On a
 * nonzero return hy_last_error() describes the failure; the string is
 * thread-local and valid until the next failing call on the same thread.
 * Handle constructors return NULL on failure instead.
 *
 * Options structs treat zero fields as "use the library default", so
 * zero-initializing and setting only what you need is the intended use.
 */

#ifdef __cplusplus
extern "C" {
#endif

#define HY_VERSION "1.0.0"

enum {
  HY_OK = 0,
  HY_INVALID = 1,
  HY_NUMERIC = 2
};

const char* hy_version(void);
const char* hy_last_error(void);

/* ------------------------------------------------------------------ trials */

/* Indicator-majorized trial function: a support set with optional modulus
 * profile (<= 1) and phase. Construct a support, then attach fields. */
typedef struct hy_trial hy_trial;

hy_trial* hy_trial_ball(int d);
/* bounds holds count (lo, hi) pairs; intervals must be disjoint. d = 1. */
hy_trial* hy_trial_intervals(const double* bounds, int count);
/* Star-shaped planar region r < base * (1 + sum amp_k cos(k theta + phase_k));
 * modes holds count (k, amp, phase) triples. d = 2. */
hy_trial* hy_trial_radial(double base, const double* modes, int count);
void hy_trial_free(hy_trial* t);

int hy_trial_dim(const hy_trial* t);
int hy_trial_constant_modulus(hy_trial* t, double value);
int hy_trial_linear_phase(hy_trial* t, double slope_x, double slope_y,
                          double offset);
/* phase coeff * |x|^2 */
int hy_trial_quadratic_phase(hy_trial* t, double coeff);

/* ------------------------------------------------------------------- norms */

typedef struct {
  double tol;         /* absolute accuracy target; 0: 1e-6 (d=1), 1e-4 (d=2) */
  int grid_n;         /* spatial cells per axis; 0: path default */
  double freq_cutoff; /* integration cutoff; 0: smallest with tail <= tol/2 */
  double box;         /* spatial half-width; 0: fit the support */
  int force_grid;     /* route structured trials through the grid path */
} hy_norm_options;

enum {
  HY_PATH_EXACT_INTERVALS = 0,
  HY_PATH_RADIAL_BALL = 1,
  HY_PATH_GRID_1D = 2,
  HY_PATH_GRID_2D = 3
};

typedef struct {
  double q;
  double value;    /* certified upper value: integral + tail allowance */
  double integral; /* computed part of ||f^|^q over the accepted window */
  double tail;
  double quad_error;
  double grid_error;
  double freq_cutoff;
  double reliable_freq;
  double budget; /* tail + quad_error + grid_error */
  int grid_n;
  int path;
} hy_norm_result;

int hy_norm(const hy_trial* t, double q, const hy_norm_options* opt,
            hy_norm_result* out);

typedef struct {
  double q;
  double deficit; /* ball integral minus trial integral, matched windows */
  double budget;
  double ball_value;
  double trial_value;
  double dist_modulus;  /* L1 gap of the modulus profile */
  double dist_phase_sq; /* squared L2 gap to the best affine phase */
  double dist_shape_sq; /* squared symmetric-difference gap to ellipsoids */
  double implied_c;     /* deficit over the summed distances */
  int optimizer_converged;
  int sign_certified; /* certified interval around deficit excludes zero */
} hy_deficit_result;

int hy_deficit(const hy_trial* t, double q, const hy_norm_options* opt,
               hy_deficit_result* out);

/* ----------------------------------------------------------------- kernels */

enum {
  HY_KERNEL_K = 0, /* frequency profile |b|^{q-2} b, b the ball transform */
  HY_KERNEL_L = 1  /* frequency profile |b|^{q-2} */
};

typedef struct {
  double q;
  double r_max;          /* last sampled radius */
  double dr;             /* radial sample spacing */
  double tail_radius;    /* treated as exactly 0 beyond this radius */
  double tail_tolerance; /* declared bound on |value| past tail_radius */
  double freq_cutoff;
  double tail_bound;
  double quad_error; /* sup disagreement between the two inversion cutoffs */
  unsigned long long config_hash;
  int kind;
  int d;
} hy_kernel_info;

int hy_kernel_describe(int kind, double q, int d, hy_kernel_info* out);
int hy_kernel_eval(int kind, double q, int d, double r, double* value);

/* ------------------------------------------------------- expansions, bounds */

enum {
  HY_ROUTE_AUTO = 0,
  HY_ROUTE_GRID = 1,
  HY_ROUTE_SEGMENTS = 2
};

/* Quadratic expansion of ||f^|_q^q about the unit ball indicator. */
typedef struct {
  double q;
  double base;
  double linear;
  double quad_im_sum;
  double quad_im_diff;
  double quad_re_sum;
  double quad_re_diff;
  double predicted;
  double direct;
  double residual; /* direct - predicted; cubic in the perturbation */
  double budget;
  double h_norm;
  int small_enough;
} hy_expansion_result;

int hy_expand(const hy_trial* t, double q, const hy_norm_options* opt,
              int route, hy_expansion_result* out);

/* Support-split decomposition: outside linear term plus a core trial
 * re-supported on the ball. */
typedef struct {
  double q;
  double support_norm; /* |E symmetric-difference B| */
  double outside_linear;
  double base;
  double core_norm;
  double predicted;
  double direct;
  double residual;
  double budget;
} hy_split_result;

int hy_support_split(const hy_trial* t, double q, const hy_norm_options* opt,
                     hy_split_result* out);

/* One-sided upper bound for oscillatory phases, split at |g| = eps. */
typedef struct {
  double q;
  double eps;
  double base;
  double high_measure;    /* |{|g| > eps}| */
  double neg_cos_measure; /* part of it where cos g < 0 */
  double cos_drop;        /* L1 of (1 - cos g) over the kept high region */
  double inf_k;
  double drop_term;
  double quad_k;
  double quad_sum;
  double quad_diff;
  double bound;
  double direct;
  double margin; /* bound - direct; one-sided up to the dropped errors */
  double budget;
  double error_scale; /* size of the dropped error terms */
  double g_l2;
  double f_l1;
  int hypothesis_ok; /* perturbation small enough for the one-sided reading */
} hy_frequency_result;

int hy_frequency_bound(const hy_trial* t, double q, double eps,
                       const hy_norm_options* opt, hy_frequency_result* out);

/* ---------------------------------------------------------------- spectrum */

enum {
  HY_PARITY_EVEN = 0,
  HY_PARITY_ODD = 1,
  HY_PARITY_MIXED = 2
};

typedef struct {
  double value;
  double h_overlap; /* squared overlap with the invariant subspace */
  int parity;
} hy_eigen_row;

/* Leading eigenpairs of the compact pairing operator, largest |value| first.
 * grid_n and angular_n of 0 pick the defaults. */
int hy_spectrum(double q, int d, int grid_n, int angular_n, int count,
                hy_eigen_row* rows, double* asymmetry, double* commutator);

typedef struct {
  double q;
  double c;        /* coercivity constant off the invariant subspace */
  double c_coarse; /* same estimate at half resolution */
  double drift;
  double null_residual;
  int d;
  int n;
  int truncation_n;
  int positive;
} hy_gap_result;

int hy_gap(double q, int d, int grid_n, hy_gap_result* out);

/* --------------------------------------------------------------- stability */

enum {
  HY_CASE_MODULUS = 0,
  HY_CASE_SUPPORT = 1,
  HY_CASE_FREQUENCY = 2
};

typedef struct {
  hy_norm_options norm;
  double threshold_m; /* 0: 10 */
  double threshold_n; /* 0: 10 */
  int skip_precompose;
} hy_certificate_options;

typedef struct {
  double q;
  double deficit;
  double budget;
  double ball_value;
  double trial_value;
  double dist_modulus;
  double dist_phase_sq;
  double dist_shape_sq;
  double implied_c;
  double modulus_mag;
  double support_mag;
  double freq_mag;
  int case_label;
  int certified;
  int hypothesis_ok;
  int normalized;
  int translation_dropped;
  int optimizer_converged;
} hy_certificate;

int hy_certificate_run(const hy_trial* t, double q,
                       const hy_certificate_options* opt, hy_certificate* out);

enum {
  HY_FAMILY_MODULUS = 0,
  HY_FAMILY_PHASE_QUADRATIC = 1,
  HY_FAMILY_PHASE_AFFINE = 2,
  HY_FAMILY_SUPPORT = 3
};

typedef struct {
  double param;
  double deficit;
  double budget;
  double distance;
  int used; /* above the noise floor, entered the fit */
} hy_sweep_point;

typedef struct {
  double slope; /* log deficit against log distance over used points */
  double intercept;
  double r2;
  int used_count;
  int ok;
  int degenerate;
} hy_sweep_fit;

/* params: >= 5 geometric values in (0, 0.2]. d is only read by the support
 * family; the others live on the d = 1 ball. points must hold count entries.
 */
int hy_sweep(int family, double q, int d, const double* params, int count,
             const hy_norm_options* opt, hy_sweep_point* points,
             hy_sweep_fit* fit);

typedef struct {
  double q;
  double min_margin;    /* min of deficit + budget; negative is a refutation */
  double min_implied_c; /* over certified trials */
  int d;
  int trials;
  int failures;
  int certified;
  int positive_c;
  int pass;
} hy_suite_result;

/* Seeded randomized deficit-sign suite over small modulus, support, and
 * phase perturbations, each at most eps in its own magnitude. */
int hy_sign_suite(double q, int d, int trials, double eps,
                  unsigned long long seed, const hy_norm_options* opt,
                  hy_suite_result* out);

/* ------------------------------------------------------------------- scans */

typedef struct {
  double q;
  double norm_root; /* ||t^||_q, the q-th root of the computed power */
} hy_scan_point;

/* Fills up to capacity points; pass points = NULL to query the count. */
int hy_q_scan(const hy_trial* t, double q_lo, double q_hi, double dq,
              const hy_norm_options* opt, hy_scan_point* points, int capacity,
              int* count, double* max_jump);

#ifdef __cplusplus
}
#endif

#endif /* HYLAB_H */
