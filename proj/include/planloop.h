#ifndef PLANLOOP_H
#define PLANLOOP_H

/* C interface to the planloop library. Strings returned through `char**`
 * out-parameters are heap-allocated UTF-8 and must be released with
 * planloop_string_free. On failure the out-parameter is left NULL and
 * planloop_last_error() describes the error for the calling thread. */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PLANLOOP_API __declspec(dllexport)
#else
#define PLANLOOP_API __attribute__((visibility("default")))
#endif

typedef enum planloop_status {
  PLANLOOP_OK = 0,
  PLANLOOP_ERR_PARSE = 1,
  PLANLOOP_ERR_INVALID_ARGUMENT = 2,
  PLANLOOP_ERR_MODEL = 3,
  PLANLOOP_ERR_TRANSLATION = 4,
  PLANLOOP_ERR_BACKEND = 5,
  PLANLOOP_ERR_LLM = 6,
  PLANLOOP_ERR_CONFIG = 7,
  PLANLOOP_ERR_IO = 8,
  PLANLOOP_ERR_INTERNAL = 9
} planloop_status;

typedef struct planloop_model planloop_model;

PLANLOOP_API const char* planloop_version(void);

/* "<ErrorCode>: <detail>" for the last failed call on this thread, or "". */
PLANLOOP_API const char* planloop_last_error(void);

PLANLOOP_API void planloop_string_free(char* s);

/* {"canonical": text, "ast": {...}} */
PLANLOOP_API planloop_status planloop_parse_domain(const char* domain_text, char** out_json);
PLANLOOP_API planloop_status planloop_parse_problem(const char* domain_text,
                                                    const char* problem_text, char** out_json);

PLANLOOP_API planloop_status planloop_model_create(const char* domain_text,
                                                   const char* problem_text,
                                                   planloop_model** out_model);
PLANLOOP_API void planloop_model_destroy(planloop_model* model);

/* Plan text holds one s-expression per action. Missing single-object
 * arguments (the robot in ball moving) are filled in before checking.
 * `*out_valid` is set to 1 for a valid plan, 0 otherwise. */
PLANLOOP_API planloop_status planloop_validate(const planloop_model* model, const char* plan_text,
                                               int* out_valid, char** out_verdict_json);

/* options: {"planner": "oracle"|"bfs", "max_depth": 16}. Output: JSON array
 * of actions. A BFS search without a result fails with PLANLOOP_ERR_BACKEND. */
PLANLOOP_API planloop_status planloop_solve(const planloop_model* model, const char* options_json,
                                            char** out_plan_json);

/* spec: {"kind", "n", "seed", "count"}. Output: JSON array of instances. */
PLANLOOP_API planloop_status planloop_generate(const char* spec_json, char** out_json);

/* options: {"translator": "reference"|"llm"}. Output: {"kind", "domain",
 * "problem"} with canonical PDDL texts. The LLM translator reads its
 * settings from the environment. */
PLANLOOP_API planloop_status planloop_translate(const char* nl_text, const char* options_json,
                                                char** out_json);

/* config: {"kind", "n", "seed"} or {"nl_text"}, plus "method", "planner",
 * "translator", "max_refinements". Output: transcript JSON. */
PLANLOOP_API planloop_status planloop_run_isr(const char* config_json, char** out_json);

/* config: bench settings. Output: result JSON. */
PLANLOOP_API planloop_status planloop_run_bench(const char* config_json, char** out_json);

/* results: JSON array of bench results. format: "markdown"|"csv"|"json".
 * layout: "method"|"translator". */
PLANLOOP_API planloop_status planloop_emit_table(const char* results_json, const char* format,
                                                 const char* layout, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* PLANLOOP_H */
