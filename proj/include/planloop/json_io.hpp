#pragma once

// JSON shapes for everything that leaves the library: verdicts, plans,
// instances, transcripts and bench results.

#include <json.hpp>

#include "planloop/bench.hpp"
#include "planloop/domains.hpp"
#include "planloop/pddl.hpp"
#include "planloop/refine.hpp"
#include "planloop/validate.hpp"
#include "planloop/world.hpp"

namespace planloop::json_io {

using nlohmann::json;

/// Array of s-expression strings.
json to_json(const world::Plan& plan);
world::Plan plan_from_json(const json& value);

json to_json(const pddl::DomainDef& domain);
json to_json(const pddl::ProblemDef& problem);

/// {outcome, failing_step, reason, literals, action, feedback,
/// feedback_template_version}. Feedback is null for Valid verdicts.
json to_json(const validate::Verdict& verdict, const world::Model& model);

json to_json(const domains::Instance& instance);
domains::Instance instance_from_json(const json& value);

json to_json(const refine::IsrConfig& config);
refine::IsrConfig isr_config_from_json(const json& value, refine::IsrConfig base = {});

/// Versioned; contains no timings, so equal runs serialize identically.
json to_json(const refine::Transcript& transcript);

json to_json(const bench::BenchConfig& config);
bench::BenchConfig bench_config_from_json(const json& value, bench::BenchConfig base = {});
json to_json(const bench::BenchResult& result);
bench::BenchResult bench_result_from_json(const json& value);

}  // namespace planloop::json_io
