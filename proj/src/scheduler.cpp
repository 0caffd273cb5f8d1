#include "parex/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace parex {

namespace {

std::string trim(const std::string& s) {
    std::size_t lo = s.find_first_not_of(" \t\r");
    if (lo == std::string::npos) return {};
    std::size_t hi = s.find_last_not_of(" \t\r");
    return s.substr(lo, hi - lo + 1);
}

std::vector<std::string> split_list(const std::string& s, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(trim(s.substr(pos)));
            break;
        }
        out.push_back(trim(s.substr(pos, next - pos)));
        pos = next + sep.size();
    }
    return out;
}

}  // namespace

PrecedenceRules PrecedenceRules::defaults() {
    std::istringstream text(
        "take -> use -> put\n"
        "open -> close\n"
        "take: take, pick-up, get\n"
        "use: *\n"
        "put: put, place, put-down\n"
        "open: open\n"
        "close: close\n");
    return parse(text);
}

PrecedenceRules PrecedenceRules::parse(std::istream& in) {
    PrecedenceRules rules;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string text = trim(raw);
        if (text.empty()) continue;
        if (text.find("->") != std::string::npos) {
            Chain chain;
            chain.classes = split_list(text, "->");
            for (const std::string& cls : chain.classes) {
                if (cls.empty()) throw ParseError("empty class name in chain", line);
            }
            if (chain.classes.size() < 2) {
                throw ParseError("chain needs at least two classes", line);
            }
            rules.chains_.push_back(std::move(chain));
        } else if (const std::size_t colon = text.find(':'); colon != std::string::npos) {
            const std::string name = trim(text.substr(0, colon));
            const std::string body = trim(text.substr(colon + 1));
            if (name.empty()) throw ParseError("empty class name", line);
            if (rules.class_verbs_.count(name) || rules.wildcard_classes_.count(name)) {
                throw ParseError("class '" + name + "' defined twice", line);
            }
            if (body == "*") {
                rules.wildcard_classes_.insert(name);
            } else {
                std::vector<std::string> verbs = split_list(body, ",");
                for (const std::string& v : verbs) {
                    if (v.empty()) throw ParseError("empty verb in class '" + name + "'", line);
                }
                rules.class_verbs_[name] = std::move(verbs);
            }
        } else {
            throw ParseError("expected a chain ('a -> b') or class ('a: v1, v2') line", line);
        }
    }
    rules.validate();
    return rules;
}

void PrecedenceRules::validate() const {
    for (const Chain& chain : chains_) {
        std::set<std::string> seen_classes;
        std::set<std::string> seen_verbs;
        int wildcards = 0;
        for (const std::string& cls : chain.classes) {
            if (!seen_classes.insert(cls).second) {
                throw ParseError("class '" + cls + "' repeats within one chain", 0);
            }
            if (wildcard_classes_.count(cls)) {
                ++wildcards;
                continue;
            }
            auto it = class_verbs_.find(cls);
            if (it == class_verbs_.end()) {
                throw ParseError("chain references undefined class '" + cls + "'", 0);
            }
            for (const std::string& verb : it->second) {
                if (!seen_verbs.insert(verb).second) {
                    throw ParseError("verb '" + verb + "' appears in two classes of one chain",
                                     0);
                }
            }
        }
        if (wildcards > 1) {
            throw ParseError("a chain may contain at most one wildcard class", 0);
        }
    }
}

std::optional<std::size_t> PrecedenceRules::classify(std::size_t chain_index,
                                                     const std::string& verb) const {
    const Chain& chain = chains_.at(chain_index);
    std::optional<std::size_t> wildcard_pos;
    for (std::size_t i = 0; i < chain.classes.size(); ++i) {
        const std::string& cls = chain.classes[i];
        if (wildcard_classes_.count(cls)) {
            wildcard_pos = i;
            continue;
        }
        const auto& verbs = class_verbs_.at(cls);
        if (std::find(verbs.begin(), verbs.end(), verb) != verbs.end()) return i;
    }
    return wildcard_pos;
}

ParallelPlan naive_split(const Timeline& timeline, int n_agents) {
    if (n_agents < 1) throw std::invalid_argument("naive_split: n_agents must be >= 1");
    ParallelPlan plan;
    plan.n_agents = n_agents;
    plan.timeline = timeline;
    const FrameIndex total = timeline.length_frames;
    const FrameIndex base = total / n_agents;
    const FrameIndex remainder = total % n_agents;
    FrameIndex offset = 0;
    for (int agent = 1; agent <= n_agents; ++agent) {
        const FrameIndex len = base + (agent <= remainder ? 1 : 0);
        if (len == 0) continue;
        plan.assignments.push_back({{offset, offset + len}, agent, 0});
        offset += len;
    }
    return plan;
}

std::vector<Task> tasks_from_gt(const std::vector<ActionRecord>& actions,
                                const ObjectTrackSet& tracks) {
    std::vector<Task> tasks;
    tasks.reserve(actions.size());
    for (const ActionRecord& action : actions) {
        Task task;
        task.interval = action.interval;
        task.duration = action.interval.length();
        task.label = action.narration;
        task.cues.push_back({action.verb, action.noun, action.interval.start});
        for (const auto& [id, intervals] : tracks.tracks) {
            for (const Segment& interval : intervals) {
                if (overlap_length(interval, action.interval) > 0) {
                    task.objects.insert(id);
                    break;
                }
            }
        }
        if (task.objects.empty()) task.objects.insert(action.noun);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<Task> tasks_from_windows(const std::vector<ActionRecord>& actions,
                                     const Timeline& timeline, FrameIndex window_frames) {
    if (window_frames < 1) {
        throw std::invalid_argument("tasks_from_windows: window_frames must be >= 1");
    }
    std::vector<Task> tasks;
    for (FrameIndex start = 0; start < timeline.length_frames; start += window_frames) {
        Task task;
        task.interval = {start, std::min(start + window_frames, timeline.length_frames)};
        task.duration = task.interval.length();
        for (const ActionRecord& action : actions) {
            if (!task.interval.contains(action.interval.start)) continue;
            task.objects.insert(action.noun);
            task.cues.push_back({action.verb, action.noun, action.interval.start});
            if (!task.label.empty()) task.label += "; ";
            task.label += action.narration;
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

PrecedenceGraph induce_precedences(const std::vector<Task>& tasks,
                                   const PrecedenceRules& rules) {
    struct Occurrence {
        std::size_t task;
        FrameIndex start;
        std::size_t position;  // class position within the chain
        std::size_t order;     // global cue order, to break start ties
    };

    PrecedenceGraph graph;
    graph.n_tasks = tasks.size();
    std::set<PrecedenceEdge> edges;

    // Group cues by noun once.
    std::map<std::string, std::vector<std::pair<std::size_t, const VerbObjectCue*>>> by_noun;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        for (const VerbObjectCue& cue : tasks[t].cues) {
            by_noun[cue.noun].emplace_back(t, &cue);
        }
    }

    for (auto& [noun, cues] : by_noun) {
        for (std::size_t chain = 0; chain < rules.chains().size(); ++chain) {
            std::vector<Occurrence> occ;
            for (std::size_t i = 0; i < cues.size(); ++i) {
                const auto position = rules.classify(chain, cues[i].second->verb);
                if (position) {
                    occ.push_back({cues[i].first, cues[i].second->source_start, *position, i});
                }
            }
            std::sort(occ.begin(), occ.end(), [](const Occurrence& a, const Occurrence& b) {
                return a.start != b.start ? a.start < b.start : a.order < b.order;
            });
            for (std::size_t i = 0; i < occ.size(); ++i) {
                for (std::size_t j = i + 1; j < occ.size(); ++j) {
                    if (occ[j].position <= occ[i].position) continue;
                    if (occ[j].task != occ[i].task) {
                        edges.insert({occ[i].task, occ[j].task});
                    }
                    break;  // nearest later-class occurrence only
                }
            }
        }
    }

    graph.edges.assign(edges.begin(), edges.end());
    return graph;
}

namespace {

struct BusyInterval {
    FrameIndex start, end;
};

// Earliest t >= lower_bound such that [t, t+duration) avoids every interval.
FrameIndex earliest_gap(std::vector<BusyInterval> busy, FrameIndex lower_bound,
                        FrameIndex duration) {
    std::sort(busy.begin(), busy.end(),
              [](const BusyInterval& a, const BusyInterval& b) { return a.start < b.start; });
    FrameIndex t = lower_bound;
    for (const BusyInterval& b : busy) {
        if (b.start >= t + duration) break;
        t = std::max(t, b.end);
    }
    return t;
}

void check_topology(const std::vector<Task>& tasks, const PrecedenceGraph& graph) {
    if (graph.n_tasks != tasks.size()) {
        throw std::invalid_argument("list_schedule: graph size does not match task count");
    }
    for (const PrecedenceEdge& e : graph.edges) {
        if (e.before >= tasks.size() || e.after >= tasks.size()) {
            throw std::invalid_argument("list_schedule: edge references unknown task");
        }
        if (e.before == e.after) {
            throw std::invalid_argument("list_schedule: self-edge in precedence graph");
        }
    }
    // Kahn pass to reject cycles up front.
    std::vector<int> indegree(tasks.size(), 0);
    for (const PrecedenceEdge& e : graph.edges) ++indegree[e.after];
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (indegree[i] == 0) queue.push_back(i);
    }
    std::size_t visited = 0;
    while (!queue.empty()) {
        const std::size_t u = queue.back();
        queue.pop_back();
        ++visited;
        for (const PrecedenceEdge& e : graph.edges) {
            if (e.before == u && --indegree[e.after] == 0) queue.push_back(e.after);
        }
    }
    if (visited != tasks.size()) {
        throw std::invalid_argument("list_schedule: precedence graph has a cycle");
    }
}

}  // namespace

ParallelPlan list_schedule(const std::vector<Task>& tasks, const PrecedenceGraph& graph,
                           int n_agents, const Timeline& timeline) {
    if (n_agents < 1) throw std::invalid_argument("list_schedule: n_agents must be >= 1");
    for (const Task& task : tasks) {
        if (!task.interval.well_formed() || task.duration != task.interval.length()) {
            throw std::invalid_argument("list_schedule: malformed task interval");
        }
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (std::size_t j = i + 1; j < tasks.size(); ++j) {
            if (overlap_length(tasks[i].interval, tasks[j].interval) > 0) {
                throw std::invalid_argument(
                    "list_schedule: task intervals overlap in source frames");
            }
        }
    }
    check_topology(tasks, graph);

    struct Placement {
        int agent = 0;
        FrameIndex start = 0;
    };
    std::vector<std::optional<Placement>> placed(tasks.size());
    std::vector<int> unscheduled_preds(tasks.size(), 0);
    for (const PrecedenceEdge& e : graph.edges) ++unscheduled_preds[e.after];

    for (std::size_t round = 0; round < tasks.size(); ++round) {
        // Ready task with the earliest source start, ties by index.
        std::size_t chosen = tasks.size();
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (placed[i] || unscheduled_preds[i] > 0) continue;
            if (chosen == tasks.size() ||
                tasks[i].interval.start < tasks[chosen].interval.start) {
                chosen = i;
            }
        }
        if (chosen == tasks.size()) {
            throw std::logic_error("list_schedule: no ready task despite acyclic graph");
        }
        const Task& task = tasks[chosen];

        FrameIndex lower_bound = 0;
        for (const PrecedenceEdge& e : graph.edges) {
            if (e.after == chosen && placed[e.before]) {
                lower_bound = std::max(lower_bound,
                                       placed[e.before]->start + tasks[e.before].duration);
            }
        }

        // Plan intervals already holding any of this task's objects.
        std::vector<BusyInterval> object_busy;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (!placed[i]) continue;
            bool shares = false;
            for (const std::string& obj : task.objects) {
                if (tasks[i].objects.count(obj)) {
                    shares = true;
                    break;
                }
            }
            if (shares) {
                object_busy.push_back(
                    {placed[i]->start, placed[i]->start + tasks[i].duration});
            }
        }

        int best_agent = 0;
        FrameIndex best_start = std::numeric_limits<FrameIndex>::max();
        for (int agent = 1; agent <= n_agents; ++agent) {
            std::vector<BusyInterval> busy = object_busy;
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                if (placed[i] && placed[i]->agent == agent) {
                    busy.push_back({placed[i]->start, placed[i]->start + tasks[i].duration});
                }
            }
            const FrameIndex start = earliest_gap(std::move(busy), lower_bound, task.duration);
            if (start < best_start) {
                best_start = start;
                best_agent = agent;
            }
        }
        placed[chosen] = Placement{best_agent, best_start};
        for (const PrecedenceEdge& e : graph.edges) {
            if (e.before == chosen) --unscheduled_preds[e.after];
        }
    }

    ParallelPlan plan;
    plan.n_agents = n_agents;
    plan.timeline = timeline;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        plan.assignments.push_back({tasks[i].interval, placed[i]->agent, placed[i]->start});
    }
    const ValidationReport report = validate_plan(plan);
    if (!report.ok()) {
        throw std::logic_error("list_schedule: produced an invalid plan\n" +
                               report.to_string());
    }
    return plan;
}

ParallelPlan heft_gt(const AnnotationSet& annotations, int n_agents,
                     const PrecedenceRules& rules) {
    const std::vector<Task> tasks = tasks_from_gt(annotations.actions, annotations.tracks);
    const PrecedenceGraph graph = induce_precedences(tasks, rules);
    return list_schedule(tasks, graph, n_agents, annotations.timeline);
}

ParallelPlan heft_window(const AnnotationSet& annotations, int n_agents,
                         FrameIndex window_frames, const PrecedenceRules& rules) {
    if (window_frames <= 0) {
        window_frames = static_cast<FrameIndex>(std::llround(60.0 * annotations.timeline.fps));
        window_frames = std::max<FrameIndex>(window_frames, 1);
    }
    const std::vector<Task> tasks =
        tasks_from_windows(annotations.actions, annotations.timeline, window_frames);
    const PrecedenceGraph graph = induce_precedences(tasks, rules);
    return list_schedule(tasks, graph, n_agents, annotations.timeline);
}

}  // namespace parex
