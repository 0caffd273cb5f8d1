#include "parex/annotations.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace parex {

namespace {

// Line-based CSV reader: comma separation, optional double-quote quoting with
// "" escapes. Quoted fields may not span lines.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    int line() const { return line_; }

    bool next_row(std::vector<std::string>& fields) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            if (raw.empty()) continue;
            split(raw, fields);
            return true;
        }
        return false;
    }

private:
    void split(const std::string& raw, std::vector<std::string>& fields) const {
        fields.clear();
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const char c = raw[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < raw.size() && raw[i + 1] == '"') {
                        cur += '"';
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    cur += c;
                }
            } else if (c == '"' && cur.empty()) {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (quoted) throw ParseError("unterminated quote", line_);
        fields.push_back(std::move(cur));
    }

    std::istream& in_;
    int line_ = 0;
};

void expect_header(CsvReader& reader, const std::string& expected) {
    std::vector<std::string> fields;
    if (!reader.next_row(fields)) {
        throw ParseError("missing header, expected '" + expected + "'", 1);
    }
    std::string joined;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) joined += ',';
        joined += fields[i];
    }
    if (joined != expected) {
        throw ParseError("bad header '" + joined + "', expected '" + expected + "'",
                         reader.line());
    }
}

void expect_columns(const std::vector<std::string>& fields, std::size_t n, int line) {
    if (fields.size() != n) {
        throw ParseError("expected " + std::to_string(n) + " columns, got " +
                             std::to_string(fields.size()),
                         line);
    }
}

std::int64_t parse_int(const std::string& field, const char* what, int line) {
    std::int64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(std::string("bad ") + what + " '" + field + "'", line);
    }
    return value;
}

double parse_double(const std::string& field, const char* what, int line) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(std::string("bad ") + what + " '" + field + "'", line);
    }
    return value;
}

Segment parse_interval(const std::string& start_field, const std::string& stop_field,
                       int line) {
    Segment seg;
    seg.start = parse_int(start_field, "start_frame", line);
    seg.end = parse_int(stop_field, "stop_frame", line);
    if (seg.start < 0) throw ParseError("negative start_frame", line);
    if (seg.end <= seg.start) {
        throw ParseError("stop_frame " + std::to_string(seg.end) + " <= start_frame " +
                             std::to_string(seg.start),
                         line);
    }
    return seg;
}

}  // namespace

const char* to_string(CausalKind kind) {
    return kind == CausalKind::PrepStep ? "prep-step" : "step-step";
}

std::vector<ActionRecord> load_actions(std::istream& in) {
    CsvReader reader(in);
    expect_header(reader, "start_frame,stop_frame,narration,verb,noun");
    std::vector<ActionRecord> records;
    std::vector<std::string> fields;
    while (reader.next_row(fields)) {
        expect_columns(fields, 5, reader.line());
        ActionRecord rec;
        rec.interval = parse_interval(fields[0], fields[1], reader.line());
        rec.narration = fields[2];
        rec.verb = fields[3];
        rec.noun = fields[4];
        if (rec.verb.empty()) throw ParseError("empty verb", reader.line());
        if (rec.noun.empty()) throw ParseError("empty noun", reader.line());
        records.push_back(std::move(rec));
    }
    return records;
}

Trajectory Trajectory::from_samples(std::vector<PoseSample> samples) {
    Trajectory traj;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const PoseSample& s = samples[i];
        if (s.frame < 0) throw ParseError("negative frame " + std::to_string(s.frame), 0);
        if (i > 0 && s.frame <= samples[i - 1].frame) {
            throw ParseError("frames not strictly increasing at frame " +
                                 std::to_string(s.frame),
                             0);
        }
        if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z) ||
            !std::isfinite(s.yaw)) {
            throw ParseError("non-finite pose at frame " + std::to_string(s.frame), 0);
        }
    }
    if (!samples.empty()) {
        traj.index_.assign(static_cast<std::size_t>(samples.back().frame) + 1, -1);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            traj.index_[static_cast<std::size_t>(samples[i].frame)] =
                static_cast<std::int32_t>(i);
        }
    }
    traj.samples_ = std::move(samples);
    return traj;
}

bool Trajectory::has(FrameIndex frame) const {
    return frame >= 0 && frame < length() && index_[static_cast<std::size_t>(frame)] >= 0;
}

std::optional<PoseSample> Trajectory::at(FrameIndex frame) const {
    if (!has(frame)) return std::nullopt;
    return samples_[static_cast<std::size_t>(index_[static_cast<std::size_t>(frame)])];
}

Trajectory load_poses(std::istream& in) {
    CsvReader reader(in);
    expect_header(reader, "frame,x,y,z,yaw");
    std::vector<PoseSample> samples;
    std::vector<std::string> fields;
    while (reader.next_row(fields)) {
        expect_columns(fields, 5, reader.line());
        PoseSample s;
        s.frame = parse_int(fields[0], "frame", reader.line());
        s.x = parse_double(fields[1], "x", reader.line());
        s.y = parse_double(fields[2], "y", reader.line());
        s.z = parse_double(fields[3], "z", reader.line());
        s.yaw = parse_double(fields[4], "yaw", reader.line());
        if (s.frame < 0) throw ParseError("negative frame", reader.line());
        if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z) ||
            !std::isfinite(s.yaw)) {
            throw ParseError("non-finite value", reader.line());
        }
        if (!samples.empty() && s.frame <= samples.back().frame) {
            throw ParseError(s.frame == samples.back().frame
                                 ? "duplicate frame " + std::to_string(s.frame)
                                 : "frames not ascending at " + std::to_string(s.frame),
                             reader.line());
        }
        samples.push_back(s);
    }
    return Trajectory::from_samples(std::move(samples));
}

ObjectTrackSet load_object_tracks(std::istream& in) {
    CsvReader reader(in);
    expect_header(reader, "object_id,start_frame,stop_frame");
    ObjectTrackSet set;
    std::vector<std::string> fields;
    while (reader.next_row(fields)) {
        expect_columns(fields, 3, reader.line());
        if (fields[0].empty()) throw ParseError("empty object_id", reader.line());
        Segment interval = parse_interval(fields[1], fields[2], reader.line());
        auto& intervals = set.tracks[fields[0]];
        for (const Segment& other : intervals) {
            if (overlap_length(interval, other) > 0) {
                throw ParseError("object '" + fields[0] + "' has overlapping intervals",
                                 reader.line());
            }
        }
        intervals.push_back(interval);
    }
    for (auto& [id, intervals] : set.tracks) {
        std::sort(intervals.begin(), intervals.end(),
                  [](const Segment& a, const Segment& b) { return a.start < b.start; });
    }
    return set;
}

std::vector<CausalPair> load_causal_pairs(std::istream& in) {
    CsvReader reader(in);
    expect_header(reader, "kind,cause_start,cause_end,effect_start,effect_end");
    std::vector<CausalPair> pairs;
    std::vector<std::string> fields;
    while (reader.next_row(fields)) {
        expect_columns(fields, 5, reader.line());
        CausalPair pair;
        if (fields[0] == "prep-step") {
            pair.kind = CausalKind::PrepStep;
        } else if (fields[0] == "step-step") {
            pair.kind = CausalKind::StepStep;
        } else {
            throw ParseError("unknown kind '" + fields[0] + "'", reader.line());
        }
        pair.cause = parse_interval(fields[1], fields[2], reader.line());
        pair.effect = parse_interval(fields[3], fields[4], reader.line());
        if (pair.cause.end > pair.effect.start) {
            throw ParseError("cause ends at " + std::to_string(pair.cause.end) +
                                 " after effect starts at " +
                                 std::to_string(pair.effect.start),
                             reader.line());
        }
        pairs.push_back(pair);
    }
    return pairs;
}

namespace {

using nlohmann::ordered_json;

std::int64_t require_int(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number_integer()) {
        throw ParseError(std::string("plan document: missing integer field '") + key + "'", 0);
    }
    return obj[key].get<std::int64_t>();
}

}  // namespace

LoadedPlan load_plan(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("plan document: ") + e.what(), 0);
    }
    if (!doc.is_object()) throw ParseError("plan document: expected a JSON object", 0);

    LoadedPlan loaded;
    ParallelPlan& plan = loaded.plan;
    try {
        loaded.video_id = doc.value("video_id", std::string{});
        plan.n_agents = static_cast<int>(require_int(doc, "n_agents"));
        if (plan.n_agents < 1) throw ParseError("plan document: n_agents must be >= 1", 0);
        plan.timeline.fps = doc.value("fps", 1.0);
        if (!(plan.timeline.fps > 0.0) || !std::isfinite(plan.timeline.fps)) {
            throw ParseError("plan document: fps must be a positive number", 0);
        }
        if (!doc.contains("assignments") || !doc["assignments"].is_array()) {
            throw ParseError("plan document: missing 'assignments' array", 0);
        }
        for (const auto& entry : doc["assignments"]) {
            Assignment a;
            a.agent = static_cast<int>(require_int(entry, "agent"));
            a.segment.start = require_int(entry, "source_start");
            a.segment.end = require_int(entry, "source_end");
            a.plan_start = require_int(entry, "plan_start");
            if (a.agent < 1 || a.agent > plan.n_agents) {
                throw ParseError("plan document: agent " + std::to_string(a.agent) +
                                     " outside [1.." + std::to_string(plan.n_agents) + "]",
                                 0);
            }
            plan.assignments.push_back(a);
        }
        FrameIndex max_end = 1;
        for (const Assignment& a : plan.assignments) {
            max_end = std::max(max_end, a.segment.end);
        }
        plan.timeline.length_frames =
            doc.contains("length_frames") ? require_int(doc, "length_frames") : max_end;
        if (plan.timeline.length_frames < 1) {
            throw ParseError("plan document: length_frames must be >= 1", 0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("plan document: ") + e.what(), 0);
    }
    loaded.report = validate_plan(plan);
    return loaded;
}

void save_plan(const ParallelPlan& plan, std::ostream& out, const std::string& video_id) {
    ordered_json doc;
    doc["video_id"] = video_id;
    doc["fps"] = plan.timeline.fps;
    doc["length_frames"] = plan.timeline.length_frames;
    doc["n_agents"] = plan.n_agents;
    doc["assignments"] = ordered_json::array();
    for (const Assignment& a : plan.assignments) {
        ordered_json entry;
        entry["agent"] = a.agent;
        entry["source_start"] = a.segment.start;
        entry["source_end"] = a.segment.end;
        entry["plan_start"] = a.plan_start;
        doc["assignments"].push_back(std::move(entry));
    }
    out << doc.dump(2) << "\n";
    if (!out) throw ParseError("plan document: write failed", 0);
}

}  // namespace parex
