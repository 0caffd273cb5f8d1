#include "parex/prompt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace parex {

namespace {

// Fixed-point with up to six decimals, trailing zeros trimmed. Locale
// independent.
std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 6);
    std::string out(buf, ptr);
    if (out.find('.') != std::string::npos) {
        while (out.back() == '0') out.pop_back();
        if (out.back() == '.') out.pop_back();
    }
    return out;
}

std::string format_seconds(FrameIndex frame, double fps) {
    return format_number(static_cast<double>(frame) / fps);
}

void replace_all(std::string& text, const std::string& token, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
}

std::string zone_table(const ZoneOccupancy& zones, double fps) {
    // The CSV body without the metadata comment.
    std::istringstream in(spatial_csv(zones, fps));
    std::string line, out;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        out += line;
        out += '\n';
    }
    return out;
}

constexpr const char* kBaseSection = R"(## Task

A single person's activity was recorded as one continuous timeline, sampled at
{{FPS}} frames per second. Plan how {{N_AGENTS}} people working side by side
could carry out the same work. Cut the original timeline into non-overlapping
segments, assign every segment you keep to exactly one person, and give each
assignment a start frame on a shared plan clock. Segment order may be changed,
and a person may stay idle between segments.

Answer with a single JSON document:
{"video_id": <string>, "fps": <number>, "length_frames": <int>,
 "n_agents": {{N_AGENTS}}, "assignments": [{"agent": <1-based int>,
 "source_start": <int>, "source_end": <int>, "plan_start": <int>}, ...]}
Segments are half-open frame intervals [source_start, source_end).
)";

constexpr const char* kGoalsSection = R"(## Goals

Maximise both of the following:
- Coverage: keep as many of the original frames as possible in some segment.
- Speed-up: make the longest-working person finish as early as possible, so
  the assigned work divided by the plan length is as large as possible.
)";

constexpr const char* kConstraintsSection = R"(## Constraints

While maximising the goals, avoid plans that are physically or logically
impossible:
- Space: two people must never occupy the same spot at the same time.
- Objects: a single object instance can only be in one person's hands at any
  moment; never schedule two people to use the same object concurrently.
- Causality: when one action prepares for or enables another, the first must
  finish before the second starts, and neither may be dropped while keeping
  the other.
- Relocation: give consecutive segments of one person nearby locations, so
  nobody has to jump across the room between segments.
)";

constexpr const char* kSpatialSection = R"(## Zone schedule

The room is divided into zones, and the table below lists when the original
person occupied each zone (times in seconds). Do not assign two people to the
same zone at the same time.

{{ZONE_TABLE}})";

constexpr const char* kSettingsBlock = R"(## Generation settings

temperature: 0
top_p: 0.2
)";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open template file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

const char* to_string(PromptTierKind kind) {
    switch (kind) {
        case PromptTierKind::Base: return "base";
        case PromptTierKind::Goals: return "goals";
        case PromptTierKind::GoalsConstraints: return "goals_constraints";
        case PromptTierKind::Spatial: return "spatial";
    }
    return "unknown";
}

PromptTierKind prompt_tier_from_string(const std::string& name) {
    if (name == "base") return PromptTierKind::Base;
    if (name == "goals") return PromptTierKind::Goals;
    if (name == "goals_constraints") return PromptTierKind::GoalsConstraints;
    if (name == "spatial") return PromptTierKind::Spatial;
    throw std::invalid_argument("unknown prompt tier '" + name + "'");
}

PromptTemplates PromptTemplates::builtin() {
    return {kBaseSection, kGoalsSection, kConstraintsSection, kSpatialSection};
}

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
    PromptTemplates templates;
    templates.base = read_file(dir + "/base.txt");
    templates.goals = read_file(dir + "/goals.txt");
    templates.constraints = read_file(dir + "/constraints.txt");
    templates.spatial = read_file(dir + "/spatial.txt");
    return templates;
}

std::string render_prompt(const PromptTier& tier, const PromptTemplates& templates) {
    std::string text = templates.base;
    if (tier.tier != PromptTierKind::Base) {
        text += "\n" + templates.goals;
    }
    if (tier.tier == PromptTierKind::GoalsConstraints || tier.tier == PromptTierKind::Spatial) {
        text += "\n" + templates.constraints;
    }
    if (tier.tier == PromptTierKind::Spatial) {
        if (!tier.zones) {
            throw std::invalid_argument("render_prompt: spatial tier requires zones");
        }
        text += "\n" + templates.spatial;
        replace_all(text, "{{ZONE_TABLE}}", zone_table(*tier.zones, tier.fps));
    }
    replace_all(text, "{{N_AGENTS}}", std::to_string(tier.n_agents));
    replace_all(text, "{{FPS}}", format_number(tier.fps));
    text += "\n";
    text += kSettingsBlock;
    return text;
}

std::string spatial_csv(const ZoneOccupancy& zones, double fps) {
    std::ostringstream out;
    out << "# zones: ";
    if (const auto* grid = std::get_if<GridGeometry>(&zones.geometry)) {
        out << "grid cell_size=" << format_number(grid->cell_size) << " anchor="
            << format_number(grid->anchor_x) << "," << format_number(grid->anchor_y) << "\n";
    } else {
        const auto& mixture = std::get<MixtureGeometry>(zones.geometry);
        out << "gmm k=" << mixture.components.size() << " seed=" << mixture.seed
            << " max_iters=" << mixture.max_iters << "\n";
        for (const MixtureComponent& c : mixture.components) {
            out << "# component: weight=" << format_number(c.weight) << " mean="
                << format_number(c.mean_x) << "," << format_number(c.mean_y) << " cov="
                << format_number(c.cov_xx) << "," << format_number(c.cov_xy) << ","
                << format_number(c.cov_yy) << "\n";
        }
    }
    out << "start_s,end_s,zone\n";
    std::vector<ZoneTriplet> sorted = zones.triplets;
    std::sort(sorted.begin(), sorted.end(),
              [](const ZoneTriplet& a, const ZoneTriplet& b) { return a.start < b.start; });
    for (const ZoneTriplet& t : sorted) {
        out << format_seconds(t.start, fps) << "," << format_seconds(t.end, fps) << ","
            << t.zone << "\n";
    }
    return out.str();
}

namespace {

double parse_number(const std::string& text, const char* what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(std::string("zone csv: bad ") + what + " '" + text + "'", 0);
    }
    return value;
}

FrameIndex seconds_to_frame(double seconds, double fps) {
    return static_cast<FrameIndex>(std::floor(seconds * fps + 0.5));
}

// "key=value" scanner over a metadata comment.
std::string find_value(const std::string& line, const std::string& key) {
    const std::string token = key + "=";
    const std::size_t pos = line.find(token);
    if (pos == std::string::npos) {
        throw ParseError("zone csv: metadata missing '" + key + "'", 1);
    }
    const std::size_t start = pos + token.size();
    const std::size_t end = line.find(' ', start);
    return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string piece =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        out.push_back(parse_number(piece, what));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

ZoneOccupancy parse_spatial_csv(std::istream& in, double fps) {
    ZoneOccupancy zones;
    std::string line;
    bool have_geometry = false;
    bool have_header = false;
    MixtureGeometry mixture;
    bool is_mixture = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("# zones: grid") == 0) {
                GridGeometry grid;
                grid.cell_size = parse_number(find_value(line, "cell_size"), "cell_size");
                const auto anchor = parse_number_list(find_value(line, "anchor"), "anchor");
                if (anchor.size() != 2) throw ParseError("zone csv: bad anchor", line_no);
                grid.anchor_x = anchor[0];
                grid.anchor_y = anchor[1];
                zones.geometry = grid;
                have_geometry = true;
            } else if (line.find("# zones: gmm") == 0) {
                mixture.seed =
                    static_cast<unsigned>(parse_number(find_value(line, "seed"), "seed"));
                mixture.max_iters =
                    static_cast<int>(parse_number(find_value(line, "max_iters"), "max_iters"));
                is_mixture = true;
                have_geometry = true;
            } else if (line.find("# component:") == 0 && is_mixture) {
                MixtureComponent c;
                c.weight = parse_number(find_value(line, "weight"), "weight");
                const auto mean = parse_number_list(find_value(line, "mean"), "mean");
                const auto cov = parse_number_list(find_value(line, "cov"), "cov");
                if (mean.size() != 2 || cov.size() != 3) {
                    throw ParseError("zone csv: bad component", line_no);
                }
                c.mean_x = mean[0];
                c.mean_y = mean[1];
                c.cov_xx = cov[0];
                c.cov_xy = cov[1];
                c.cov_yy = cov[2];
                mixture.components.push_back(c);
            }
            continue;
        }
        if (!have_header) {
            if (line != "start_s,end_s,zone") {
                throw ParseError("zone csv: bad header '" + line + "'", line_no);
            }
            have_header = true;
            continue;
        }
        std::istringstream row(line);
        std::string start_s, end_s, zone_s;
        if (!std::getline(row, start_s, ',') || !std::getline(row, end_s, ',') ||
            !std::getline(row, zone_s)) {
            throw ParseError("zone csv: expected 3 columns", line_no);
        }
        ZoneTriplet triplet;
        triplet.start = seconds_to_frame(parse_number(start_s, "start_s"), fps);
        triplet.end = seconds_to_frame(parse_number(end_s, "end_s"), fps);
        triplet.zone = static_cast<int>(parse_number(zone_s, "zone"));
        if (triplet.end <= triplet.start) {
            throw ParseError("zone csv: empty triplet", line_no);
        }
        zones.triplets.push_back(triplet);
    }
    if (!have_geometry) {
        throw ParseError("zone csv: missing '# zones: ...' metadata comment", 1);
    }
    if (!have_header) {
        throw ParseError("zone csv: missing 'start_s,end_s,zone' header", 1);
    }
    if (is_mixture) zones.geometry = std::move(mixture);
    return zones;
}

}  // namespace parex
