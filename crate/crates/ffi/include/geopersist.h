#ifndef GEOPERSIST_H
#define GEOPERSIST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum GpStatus {
  GpStatus_Ok = 0,
  // Malformed input: bad JSON, bad arguments, foreign points.
  GpStatus_InputError = 1,
  // A documented precondition does not hold.
  GpStatus_PreconditionError = 2,
  // A required pointer was null.
  GpStatus_NullPointer = 3,
  // Unexpected internal failure.
  GpStatus_Internal = 4,
} GpStatus;

// Opaque handle to a decorated H1 persistence diagram.
typedef struct GpDiagram GpDiagram;

// Opaque handle to a geodesic space model.
typedef struct GpModel GpModel;

// Opaque handle to a finite sample of a model.
typedef struct GpSample GpSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message of this thread, or null. Free with `gp_string_free`.
char *gp_last_error(void);

// Release a string returned by this library.
//
// # Safety
// `s` must have been returned by a `gp_*` function and not freed yet.
void gp_string_free(char *s);

// Parse a model description (JSON) into a handle.
//
// # Safety
// `json` must point to a NUL-terminated string; `out` must be a valid
// pointer slot.
enum GpStatus gp_model_from_json(const char *json, struct GpModel **out);

// # Safety
// `model` must be a live handle from this library or null.
void gp_model_free(struct GpModel *model);

// # Safety
// `model` must be a live handle.
char *gp_model_to_json(const struct GpModel *model);

// Uniform s-dense sample of the model; index 0 is the basepoint.
//
// # Safety
// `model` must be a live handle; `out` must be a valid pointer slot.
enum GpStatus gp_sample_uniform(const struct GpModel *model,
                                double s,
                                uint64_t seed,
                                bool jitter,
                                struct GpSample **out);

// Add three equidistant points on every catalogue circle of the model.
//
// # Safety
// `model` and `sample` must be live handles; `out` must be valid.
enum GpStatus gp_sample_enrich(const struct GpModel *model,
                               const struct GpSample *sample,
                               struct GpSample **out);

// # Safety
// `sample` must be a live handle.
uintptr_t gp_sample_len(const struct GpSample *sample);

// # Safety
// `sample` must be a live handle.
char *gp_sample_to_json(const struct GpSample *sample);

// # Safety
// `json` must be a NUL-terminated string; `out` must be valid.
enum GpStatus gp_sample_from_json(const char *json, struct GpSample **out);

// # Safety
// `sample` must be a live handle or null.
void gp_sample_free(struct GpSample *sample);

// H1 persistence of the open Rips filtration of the sample over F_p,
// censored at `rmax`.
//
// # Safety
// `model` and `sample` must be live handles; `out` must be valid.
enum GpStatus gp_persist_h1(const struct GpModel *model,
                            const struct GpSample *sample,
                            uint32_t field_p,
                            double rmax,
                            struct GpDiagram **out);

// # Safety
// `diagram` must be a live handle.
uintptr_t gp_diagram_len(const struct GpDiagram *diagram);

// Read one interval; `death` equals `rmax` when `censored` is set.
//
// # Safety
// `diagram` must be a live handle; the out parameters must be valid or null.
enum GpStatus gp_diagram_interval(const struct GpDiagram *diagram,
                                  uintptr_t index,
                                  double *birth,
                                  double *death,
                                  bool *censored);

// # Safety
// `diagram` must be a live handle.
char *gp_diagram_to_json(const struct GpDiagram *diagram);

// # Safety
// `json` must be a NUL-terminated string; `out` must be valid.
enum GpStatus gp_diagram_from_json(const char *json, struct GpDiagram **out);

// # Safety
// `diagram` must be a live handle or null.
void gp_diagram_free(struct GpDiagram *diagram);

// The known model diagram: one interval `(0, l/3]` per catalogue circle.
//
// # Safety
// `model` must be a live handle; `out` must be valid.
enum GpStatus gp_known_diagram(const struct GpModel *model,
                               uint32_t field_p,
                               struct GpDiagram **out);

// Bottleneck distance between two diagrams.
//
// # Safety
// `a` and `b` must be live handles; `distance` must be valid.
enum GpStatus gp_bottleneck(const struct GpDiagram *a, const struct GpDiagram *b, double *distance);

// Check the three intrinsic stability conditions of the sample diagram
// against the model diagram; writes the verdict and a JSON report.
//
// # Safety
// The diagram handles must be live; `pass` must be valid; `report_json`
// may be null to skip the report.
enum GpStatus gp_verify_stability(const struct GpDiagram *model_diagram,
                                  const struct GpDiagram *sample_diagram,
                                  double s,
                                  bool *pass,
                                  char **report_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GEOPERSIST_H */
