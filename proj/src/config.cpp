#include "faery/config.hpp"

#include <fstream>

#include "faery/error.hpp"
#include "faery/parallel.hpp"

namespace faery::config {

using nlohmann::json;

namespace {

const json* child(const json& obj, const char* name) {
    auto it = obj.find(name);
    return it == obj.end() ? nullptr : &*it;
}

bool is_count(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); }

template <typename T>
void read_number(const json& obj, const std::string& path, const char* name, T& out) {
    const json* v = child(obj, name);
    if (v == nullptr || v->is_null()) return;
    const std::string field = path + "." + name;
    if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError(field + ": expected a number");
        out = v->get<T>();
    } else if constexpr (std::is_signed_v<T>) {
        if (!v->is_number_integer()) throw ConfigError(field + ": expected an integer");
        out = v->get<T>();
    } else {
        if (!is_count(*v)) {
            throw ConfigError(field + ": expected a non-negative integer");
        }
        out = v->get<T>();
    }
}

const json& section(const json& doc, const char* name, const json& empty) {
    const json* s = child(doc, name);
    if (s == nullptr || s->is_null()) return empty;
    if (!s->is_object()) throw ConfigError(std::string(name) + ": expected an object");
    return *s;
}

std::string read_string(const json& obj, const std::string& path, const char* name, std::string fallback) {
    const json* v = child(obj, name);
    if (v == nullptr || v->is_null()) return fallback;
    if (!v->is_string()) throw ConfigError(path + "." + name + ": expected a string");
    return v->get<std::string>();
}

void require_positive(std::size_t v, const char* field) {
    if (v == 0) throw ConfigError(std::string(field) + ": must be positive");
}

} // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::maze_meta:
        return "maze_meta";
    case ExperimentKind::grid_ablation:
        return "grid_ablation";
    case ExperimentKind::qd_single:
        return "qd_single";
    case ExperimentKind::transfer_seed_eval:
        return "transfer_seed_eval";
    }
    return "maze_meta";
}

std::size_t ExperimentConfig::resolved_parallelism() const {
    return parallelism == 0 ? default_parallelism() : parallelism;
}

std::uint64_t ExperimentConfig::master_seed() const {
    if (!seed) throw ConfigError("seed: a master seed is required (config field or --seed)");
    return *seed;
}

void ExperimentConfig::validate() const {
    if (!seed) throw ConfigError("seed: a master seed is required (config field or --seed)");
    if (dataset.n < 1) throw ConfigError("dataset.n: must be >= 1");
    require_positive(dataset.train, "dataset.train");
    require_positive(dataset.test, "dataset.test");
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (hidden[i] == 0) throw ConfigError("network.hidden[" + std::to_string(i) + "]: must be positive");
    }
    if (!(bounds.lo < bounds.hi)) throw ConfigError("network.lo/hi: lo must be < hi");
    try {
        maze.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("maze: ") + e.what());
    }
    try {
        mutation.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("mutation: ") + e.what());
    }
    require_positive(meta.mu, "meta.mu");
    require_positive(meta.lambda, "meta.lambda");
    require_positive(meta.m_train, "meta.m_train");
    require_positive(meta.qd.s_max, "qd.s_max");
    require_positive(meta.qd.novelty_k, "qd.novelty_k");
    require_positive(meta.qd.archive_capacity, "qd.archive_capacity");
    if (!(meta.qd.c_lambda > 0.0)) throw ConfigError("qd.c_lambda: must be positive");
    require_positive(ablation_runs, "grid.runs");
    if (grid_step_max < 1) throw ConfigError("grid.step_max: must be >= 1");
    const auto& gl = grid_loop;
    for (const auto& [value, field] : {std::pair{gl.mu, "grid.mu"}, std::pair{gl.lambda, "grid.lambda"},
                                       std::pair{gl.m_train, "grid.m_train"}, std::pair{gl.s_max, "grid.s_max"}}) {
        if (value && *value == 0) throw ConfigError(std::string(field) + ": must be positive");
    }
}

ExperimentConfig from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    int version = kConfigVersion;
    read_number(doc, "config", "format_version", version);
    if (version != kConfigVersion) {
        throw ConfigError("format_version: unsupported version " + std::to_string(version));
    }

    ExperimentConfig cfg;
    const std::string kind = read_string(doc, "config", "kind", "maze_meta");
    if (kind == "maze_meta") {
        cfg.kind = ExperimentKind::maze_meta;
    } else if (kind == "grid_ablation") {
        cfg.kind = ExperimentKind::grid_ablation;
    } else if (kind == "qd_single") {
        cfg.kind = ExperimentKind::qd_single;
    } else if (kind == "transfer_seed_eval") {
        cfg.kind = ExperimentKind::transfer_seed_eval;
    } else {
        throw ConfigError("kind: unknown experiment kind '" + kind + "'");
    }
    if (const json* s = child(doc, "seed"); s != nullptr && !s->is_null()) {
        if (!is_count(*s)) throw ConfigError("seed: expected a non-negative integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    read_number(doc, "config", "parallelism", cfg.parallelism);
    cfg.output_dir = read_string(doc, "config", "output_dir", cfg.output_dir.string());

    const json empty = json::object();
    const auto& ds = section(doc, "dataset", empty);
    read_number(ds, "dataset", "n", cfg.dataset.n);
    read_number(ds, "dataset", "train", cfg.dataset.train);
    read_number(ds, "dataset", "test", cfg.dataset.test);

    const auto& mz = section(doc, "maze", empty);
    cfg.train_file = read_string(mz, "maze", "train_file", "");
    cfg.test_file = read_string(mz, "maze", "test_file", "");
    read_number(mz, "maze", "dt", cfg.maze.dt);
    read_number(mz, "maze", "damping", cfg.maze.damping);
    read_number(mz, "maze", "force_scale", cfg.maze.force_scale);
    read_number(mz, "maze", "radius", cfg.maze.radius);
    read_number(mz, "maze", "episode_length", cfg.maze.episode_length);
    read_number(mz, "maze", "gamma", cfg.maze.gamma);
    read_number(mz, "maze", "init_noise", cfg.maze.init_noise);
    read_number(mz, "maze", "range_fraction", cfg.maze.range_fraction);
    const std::string frame =
        read_string(mz, "maze", "action_frame", cfg.maze.action_frame == maze::ActionFrame::body ? "body" : "world");
    if (frame == "world") {
        cfg.maze.action_frame = maze::ActionFrame::world;
    } else if (frame == "body") {
        cfg.maze.action_frame = maze::ActionFrame::body;
    } else {
        throw ConfigError("maze.action_frame: expected world or body");
    }

    const auto& net = section(doc, "network", empty);
    if (const json* h = child(net, "hidden"); h != nullptr && !h->is_null()) {
        if (!h->is_array()) throw ConfigError("network.hidden: expected an array of positive integers");
        cfg.hidden.clear();
        for (std::size_t i = 0; i < h->size(); ++i) {
            if (!is_count((*h)[i]) || (*h)[i].get<long long>() == 0) {
                throw ConfigError("network.hidden[" + std::to_string(i) + "]: expected a positive integer");
            }
            cfg.hidden.push_back((*h)[i].get<std::size_t>());
        }
    }
    read_number(net, "network", "lo", cfg.bounds.lo);
    read_number(net, "network", "hi", cfg.bounds.hi);

    const auto& mut = section(doc, "mutation", empty);
    read_number(mut, "mutation", "eta", cfg.mutation.eta);
    if (const json* p = child(mut, "per_gene_prob"); p != nullptr && !p->is_null()) {
        if (!p->is_number()) throw ConfigError("mutation.per_gene_prob: expected a number or null");
        cfg.mutation.per_gene_prob = p->get<double>();
    }

    const auto& mt = section(doc, "meta", empty);
    read_number(mt, "meta", "mu", cfg.meta.mu);
    read_number(mt, "meta", "lambda", cfg.meta.lambda);
    read_number(mt, "meta", "m_train", cfg.meta.m_train);
    read_number(mt, "meta", "m_test", cfg.meta.m_test);
    read_number(mt, "meta", "g_outer", cfg.meta.g_outer);
    read_number(mt, "meta", "test_every", cfg.meta.test_every);
    cfg.meta.objectives = meta::parse_objective_mode(
        read_string(mt, "meta", "objectives", meta::to_string(cfg.meta.objectives)));

    const auto& q = section(doc, "qd", empty);
    read_number(q, "qd", "g_qd_max", cfg.meta.qd.g_qd_max);
    read_number(q, "qd", "s_max", cfg.meta.qd.s_max);
    read_number(q, "qd", "c_lambda", cfg.meta.qd.c_lambda);
    read_number(q, "qd", "novelty_k", cfg.meta.qd.novelty_k);
    read_number(q, "qd", "archive_capacity", cfg.meta.qd.archive_capacity);
    const std::string eviction = read_string(q, "qd", "eviction", "uniform_random");
    if (eviction == "uniform_random") {
        cfg.meta.qd.eviction = evo::EvictionPolicy::uniform_random;
    } else if (eviction == "fifo") {
        cfg.meta.qd.eviction = evo::EvictionPolicy::fifo;
    } else {
        throw ConfigError("qd.eviction: expected uniform_random or fifo");
    }

    const auto& gr = section(doc, "grid", empty);
    read_number(gr, "grid", "runs", cfg.ablation_runs);
    read_number(gr, "grid", "step_max", cfg.grid_step_max);
    read_number(gr, "grid", "split_seed", cfg.grid_split_seed);
    auto read_override = [&](const char* name, std::optional<std::size_t>& out) {
        std::size_t v = 0;
        if (const json* x = child(gr, name); x != nullptr && !x->is_null()) {
            read_number(gr, "grid", name, v);
            out = v;
        }
    };
    read_override("mu", cfg.grid_loop.mu);
    read_override("lambda", cfg.grid_loop.lambda);
    read_override("g_outer", cfg.grid_loop.g_outer);
    read_override("m_train", cfg.grid_loop.m_train);
    read_override("g_qd_max", cfg.grid_loop.g_qd_max);
    read_override("s_max", cfg.grid_loop.s_max);
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["format_version"] = kConfigVersion;
    doc["kind"] = to_string(cfg.kind);
    doc["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    doc["parallelism"] = cfg.parallelism;
    doc["output_dir"] = cfg.output_dir.string();
    doc["dataset"] = {{"n", cfg.dataset.n}, {"train", cfg.dataset.train}, {"test", cfg.dataset.test}};
    doc["maze"] = {{"train_file", cfg.train_file.string()},
                   {"test_file", cfg.test_file.string()},
                   {"dt", cfg.maze.dt},
                   {"damping", cfg.maze.damping},
                   {"force_scale", cfg.maze.force_scale},
                   {"radius", cfg.maze.radius},
                   {"episode_length", cfg.maze.episode_length},
                   {"gamma", cfg.maze.gamma},
                   {"init_noise", cfg.maze.init_noise},
                   {"range_fraction", cfg.maze.range_fraction},
                   {"action_frame", cfg.maze.action_frame == maze::ActionFrame::body ? "body" : "world"}};
    doc["network"] = {{"hidden", cfg.hidden}, {"lo", cfg.bounds.lo}, {"hi", cfg.bounds.hi}};
    doc["mutation"] = {{"eta", cfg.mutation.eta},
                       {"per_gene_prob", cfg.mutation.per_gene_prob ? json(*cfg.mutation.per_gene_prob)
                                                                    : json(nullptr)}};
    doc["meta"] = {{"mu", cfg.meta.mu},
                   {"lambda", cfg.meta.lambda},
                   {"m_train", cfg.meta.m_train},
                   {"m_test", cfg.meta.m_test},
                   {"g_outer", cfg.meta.g_outer},
                   {"test_every", cfg.meta.test_every},
                   {"objectives", meta::to_string(cfg.meta.objectives)}};
    doc["qd"] = {{"g_qd_max", cfg.meta.qd.g_qd_max},
                 {"s_max", cfg.meta.qd.s_max},
                 {"c_lambda", cfg.meta.qd.c_lambda},
                 {"novelty_k", cfg.meta.qd.novelty_k},
                 {"archive_capacity", cfg.meta.qd.archive_capacity},
                 {"eviction", cfg.meta.qd.eviction == evo::EvictionPolicy::fifo ? "fifo" : "uniform_random"}};
    auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
    const auto& gl = cfg.grid_loop;
    doc["grid"] = {{"runs", cfg.ablation_runs},
                   {"step_max", cfg.grid_step_max},
                   {"split_seed", cfg.grid_split_seed},
                   {"mu", opt(gl.mu)},
                   {"lambda", opt(gl.lambda)},
                   {"g_outer", opt(gl.g_outer)},
                   {"m_train", opt(gl.m_train)},
                   {"g_qd_max", opt(gl.g_qd_max)},
                   {"s_max", opt(gl.s_max)}};
    return doc;
}

ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

std::uint64_t fingerprint(const ExperimentConfig& cfg) {
    auto doc = to_json(cfg);
    doc.erase("parallelism");
    doc.erase("output_dir");
    doc["meta"].erase("g_outer");
    const std::string text = doc.dump();
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

grid::AblationConfig ablation_config(const ExperimentConfig& cfg) {
    auto out = grid::AblationConfig::defaults();
    out.meta.parallelism = cfg.resolved_parallelism();
    out.step_max = cfg.grid_step_max;
    out.split_seed = cfg.grid_split_seed;
    const auto& gl = cfg.grid_loop;
    if (gl.mu) out.meta.mu = *gl.mu;
    if (gl.lambda) out.meta.lambda = *gl.lambda;
    if (gl.g_outer) out.meta.g_outer = *gl.g_outer;
    if (gl.m_train) out.meta.m_train = *gl.m_train;
    if (gl.g_qd_max) out.meta.qd.g_qd_max = *gl.g_qd_max;
    if (gl.s_max) out.meta.qd.s_max = *gl.s_max;
    return out;
}

} // namespace faery::config
