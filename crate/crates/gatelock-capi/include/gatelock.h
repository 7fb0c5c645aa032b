/* C interface of the gatelock netlist locking toolkit. */

#ifndef GATELOCK_H
#define GATELOCK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by fallible entry points; details via
 * `gl_last_error`.
 */
typedef enum GlStatus {
  GlOk = 0,
  GlErrArg = 1,
  GlErrParse = 2,
  GlErrLock = 3,
  GlErrVerify = 4,
} GlStatus;

/**
 * Opaque locked circuit with its ground truth.
 */
typedef struct GlLocked GlLocked;

/**
 * Opaque parsed netlist.
 */
typedef struct GlNetlist GlNetlist;

/**
 * Opaque attack report.
 */
typedef struct GlReport GlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread; valid until the next failing call.
 */
const char *gl_last_error(void);

/**
 * Library version string; caller frees with `gl_string_free`.
 */
char *gl_version(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed before.
 */
void gl_string_free(char *s);

/**
 * Parse `.bench` text into a netlist handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be writable.
 */
enum GlStatus gl_netlist_parse(const char *text, struct GlNetlist **out);

/**
 * Serialize a netlist back to `.bench` text.
 *
 * # Safety
 * `n` must be a live handle from this library.
 */
char *gl_netlist_to_bench(const struct GlNetlist *n);

/**
 * # Safety
 * `n` must be a live handle from this library.
 */
uintptr_t gl_netlist_num_gates(const struct GlNetlist *n);

/**
 * # Safety
 * `n` must be a live handle from this library.
 */
uintptr_t gl_netlist_num_inputs(const struct GlNetlist *n);

/**
 * # Safety
 * `n` must be a live handle from this library.
 */
uintptr_t gl_netlist_num_outputs(const struct GlNetlist *n);

/**
 * # Safety
 * `n` must be a live handle from this library.
 */
uintptr_t gl_netlist_num_key_inputs(const struct GlNetlist *n);

/**
 * # Safety
 * `n` must come from this library and not have been freed before.
 */
void gl_netlist_free(struct GlNetlist *n);

/**
 * Random logic locking with `keys` key gates.
 *
 * # Safety
 * `n` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_lock_rll(const struct GlNetlist *n,
                          uintptr_t keys,
                          uint64_t seed,
                          struct GlLocked **out);

/**
 * Strong logic locking: key gates in clusters converging within two
 * levels.
 *
 * # Safety
 * `n` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_lock_sll(const struct GlNetlist *n,
                          uintptr_t keys,
                          uintptr_t cluster,
                          uint64_t seed,
                          struct GlLocked **out);

/**
 * Countermeasure locking: every repeated instance of each chosen unit
 * function is locked, leaving the structural search nothing to reference.
 *
 * # Safety
 * `n` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_lock_cm(const struct GlNetlist *n,
                         uintptr_t budget_min,
                         uintptr_t budget_max,
                         uint64_t seed,
                         struct GlLocked **out);

/**
 * Borrow the locked netlist; valid while the locked handle lives.
 *
 * # Safety
 * `l` must be a live handle from this library.
 */
struct GlNetlist *gl_locked_netlist(const struct GlLocked *l);

/**
 * Ground-truth key as `keyinput<i>=<bit>` lines.
 *
 * # Safety
 * `l` must be a live handle from this library.
 */
char *gl_locked_key_text(const struct GlLocked *l);

/**
 * Ground-truth JSON record of inserted key gates and families.
 *
 * # Safety
 * `l` must be a live handle from this library.
 */
char *gl_locked_record_json(const struct GlLocked *l);

/**
 * # Safety
 * `l` must come from this library and not have been freed before.
 */
void gl_locked_free(struct GlLocked *l);

/**
 * Run the structural key-recovery attack on a locked netlist. Ground
 * truth never enters: only the netlist handle is read.
 *
 * # Safety
 * `n` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_attack(const struct GlNetlist *n,
                        uint32_t max_layers,
                        uint64_t seed,
                        struct GlReport **out);

/**
 * # Safety
 * `r` must be a live handle from this library.
 */
uintptr_t gl_report_num_keys(const struct GlReport *r);

/**
 * Predicted value at `index` as '0', '1' or 'X'; NUL on a bad index.
 *
 * # Safety
 * `r` must be a live handle from this library.
 */
char gl_report_value(const struct GlReport *r, uintptr_t index);

/**
 * Key-input name at `index`; caller frees.
 *
 * # Safety
 * `r` must be a live handle from this library.
 */
char *gl_report_key_name(const struct GlReport *r, uintptr_t index);

/**
 * Percentage of keys with a definite prediction.
 *
 * # Safety
 * `r` must be a live handle from this library.
 */
double gl_report_sr(const struct GlReport *r);

/**
 * `keyinput<i>=<0|1|X>` lines; caller frees.
 *
 * # Safety
 * `r` must be a live handle from this library.
 */
char *gl_report_predictions_text(const struct GlReport *r);

/**
 * Full report as JSON; caller frees.
 *
 * # Safety
 * `r` must be a live handle from this library.
 */
char *gl_report_json(const struct GlReport *r);

/**
 * # Safety
 * `r` must come from this library and not have been freed before.
 */
void gl_report_free(struct GlReport *r);

/**
 * Simulation equivalence of `original` and `locked` under a key given as
 * `keyinput<i>=<bit>` lines: `*equivalent_out` is 1 when all tested
 * vectors match (exhaustive under 17 shared inputs, else `vectors` seeded
 * random vectors).
 *
 * # Safety
 * Handles must be live; `key_text` must be NUL-terminated;
 * `equivalent_out` must be writable.
 */
enum GlStatus gl_verify(const struct GlNetlist *original,
                        const struct GlNetlist *locked,
                        const char *key_text,
                        uint64_t vectors,
                        uint64_t seed,
                        int32_t *equivalent_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GATELOCK_H */
