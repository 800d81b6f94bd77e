#ifndef ONESHOT_H
#define ONESHOT_H

/* C interface to the one-shot information library. Inputs arrive as JSON
 * text, results leave as JSON or CSV text allocated by the library; every
 * function returns a status code that the command line tool reuses as its
 * process exit code. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  ONESHOT_OK = 0,
  ONESHOT_CHECK_FAILED = 1, /* an asserted slack fell below tolerance */
  ONESHOT_INVALID = 2,      /* bad input, bad parameters, exceeded cap */
  ONESHOT_NUMERICAL = 3     /* solver breakdown */
};

/* Message for the most recent failure on the calling thread. */
const char* oneshot_last_error(void);

/* Releases any string handed out through an out parameter. */
void oneshot_string_free(char* s);

typedef struct oneshot_dist oneshot_dist;
typedef struct oneshot_state oneshot_state;

/* Joint table from {"shape":[nx,ny],"weights":[...]} with row-major
 * nonnegative weights. */
int oneshot_dist_load(const char* json_text, oneshot_dist** out);
void oneshot_dist_free(oneshot_dist* d);
int oneshot_dist_shape(const oneshot_dist* d, int* nx, int* ny);

/* Bipartite density operator from {"dims":[da,db],"re":[[...]],"im":[[...]]},
 * hermitian and positive semidefinite, row index a*db + b. */
int oneshot_state_load(const char* json_text, oneshot_state** out);
void oneshot_state_free(oneshot_state* s);

/* kind: imax-partial | imax-full | hmin-partial | hmin-full | is | hs.
 * The first four are the trace-ball smoothed measures and report the
 * optimizing table with its residuals; is/hs are the spectrum quantities. */
int oneshot_classical_measure(const oneshot_dist* d, const char* kind,
                              double eps, char** out_json);

/* kind: imax-partial | imax-full | hmin-partial | hmin-full | dmax |
 * imax | hmin. metric is "P" (purified ball) or "T" (trace ball) and only
 * matters for the smoothed kinds; dmax is the max-divergence against the
 * product of the state's own marginals, imax/hmin the unsmoothed forms. */
int oneshot_quantum_measure(const oneshot_state* s, const char* kind,
                            const char* metric, double eps, char** out_json);

/* CSV "n, exact, predicted, residual, residual*n/log2(n)": the exact
 * i.i.d. spectrum rate of the table against a Gaussian prediction, with
 * the reference fixed to the product of marginals. Entries of ns must be
 * at least 2. */
int oneshot_second_order(const oneshot_dist* d, const int* ns, int count,
                         double eps, char** out_csv);

/* One exact run of the splitting protocol; the JSON report carries the
 * communication and error slacks and the exact output table. Returns
 * ONESHOT_CHECK_FAILED when a slack is below -1e-9. */
int oneshot_split_exact(const oneshot_dist* d, double eps, double delta,
                        char** out_json);
/* Same report plus a seeded Monte-Carlo replay of the sampler. */
int oneshot_split_sample(const oneshot_dist* d, double eps, double delta,
                         long trials, uint64_t seed, char** out_json);

/* Exact hashing experiment at a fixed key length. */
int oneshot_pa_exact(const oneshot_dist* d, int key_bits, char** out_json);
/* Key length picked by the entropy bound at eps - delta. */
int oneshot_pa_theorem(const oneshot_dist* d, double eps, double delta,
                       char** out_json);
/* A run secure at level eps pins the key length below the smoothed
 * entropy; the slack line is asserted only when the run is secure. */
int oneshot_pa_converse(const oneshot_dist* d, double eps, int key_bits,
                        char** out_json);

/* Runs the named check sweep ("all" runs every registered one) and returns
 * its report text. trials <= 0 selects each sweep's default count; replays
 * with the same arguments produce identical bytes. corrupt != 0 drags every
 * slack far below tolerance, a hook for exercising the failure path.
 * Returns ONESHOT_CHECK_FAILED when any line fails. */
int oneshot_thmcheck(const char* which, uint64_t seed, int trials,
                     int corrupt, char** out_text);
/* Newline-separated sweep names accepted by oneshot_thmcheck. */
int oneshot_thmcheck_names(char** out_text);

#ifdef __cplusplus
}
#endif

#endif
