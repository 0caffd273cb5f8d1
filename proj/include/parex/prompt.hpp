#pragma once

#include "parex/geometry.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace parex {

enum class PromptTierKind { Base, Goals, GoalsConstraints, Spatial };

const char* to_string(PromptTierKind kind);

/// Parses "base", "goals", "goals_constraints" or "spatial".
PromptTierKind prompt_tier_from_string(const std::string& name);

struct PromptTier {
    PromptTierKind tier = PromptTierKind::Base;
    int n_agents = 2;
    double fps = 1.0;
    std::optional<ZoneOccupancy> zones;  // required for the spatial tier
};

/// Section texts with {{N_AGENTS}}, {{FPS}} and {{ZONE_TABLE}} placeholders.
/// Tiers are cumulative: each tier renders its predecessors' sections first.
struct PromptTemplates {
    std::string base;
    std::string goals;
    std::string constraints;
    std::string spatial;

    static PromptTemplates builtin();

    /// Loads base.txt, goals.txt, constraints.txt, spatial.txt from a
    /// directory. Throws std::runtime_error on a missing file.
    static PromptTemplates load_dir(const std::string& dir);
};

/// Instantiates the tier's sections and appends a generation-settings block
/// (temperature 0, top_p 0.2). Deterministic: identical inputs give
/// byte-identical documents. Throws std::invalid_argument for a spatial tier
/// without zones.
std::string render_prompt(const PromptTier& tier,
                          const PromptTemplates& templates = PromptTemplates::builtin());

/// Zone occupancy as CSV: a '#' metadata comment with the zone geometry,
/// header `start_s,end_s,zone`, one row per triplet with frame bounds
/// converted to seconds, sorted by start.
std::string spatial_csv(const ZoneOccupancy& zones, double fps);

/// Reads back a zone CSV written by spatial_csv. Seconds are converted to
/// frames by rounding half-up at the given fps. Requires the geometry
/// metadata comment.
ZoneOccupancy parse_spatial_csv(std::istream& in, double fps);

}  // namespace parex
