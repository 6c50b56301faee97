#pragma once

#include "voice/assessment/types.hpp"

#include <string>
#include <vector>

namespace voice::assessment {

struct FieldWrite {
    std::string field;  // e.g. "demographics.sex"
    std::string value;  // canonical JSON text of the written value
};

/// The parts of a session transcript the consistency rules look at: every
/// state write still in force (writes superseded by a clarification round
/// are dropped by the caller).
struct TranscriptDigest {
    std::vector<FieldWrite> writes;
};

Resolution resolution_for(DiscrepancyKind kind);

/// Identifiers of everything still missing: unassessed components by
/// component name, then required fields by path.
std::vector<std::string> completeness(const AssessmentState& state);

/// Runs every consistency rule. The result is sorted by (kind, field), so it
/// does not depend on rule evaluation order.
std::vector<Discrepancy> check_consistency(const AssessmentState& state, const TranscriptDigest& digest);

}  // namespace voice::assessment
