#include "faery/maze.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "faery/error.hpp"

namespace faery::maze {

namespace {

constexpr std::array<Side, 4> kSides{Side::north, Side::east, Side::south, Side::west};

Cell neighbour(Cell c, Side s) {
    switch (s) {
    case Side::north:
        return {c.x, c.y + 1};
    case Side::east:
        return {c.x + 1, c.y};
    case Side::south:
        return {c.x, c.y - 1};
    case Side::west:
        return {c.x - 1, c.y};
    }
    return c;
}

Side opposite(Side s) {
    switch (s) {
    case Side::north:
        return Side::south;
    case Side::east:
        return Side::west;
    case Side::south:
        return Side::north;
    case Side::west:
        return Side::east;
    }
    return s;
}

bool inside(Cell c, int n) { return c.x >= 0 && c.y >= 0 && c.x < n && c.y < n; }

struct Interval {
    double lo, hi;
};

// Slice, along the motion axis, of the segment grown by the robot radius at
// the fixed cross coordinate.
std::optional<Interval> capsule_slice(const Segment& s, double cross, double r, bool along_x) {
    // Express the segment in (motion, cross) coordinates.
    const double m0 = along_x ? s.x0 : s.y0;
    const double m1 = along_x ? s.x1 : s.y1;
    const double c0 = along_x ? s.y0 : s.x0;
    const double c1 = along_x ? s.y1 : s.x1;
    if (c0 == c1) {
        // Segment parallel to motion.
        const double h = std::abs(cross - c0);
        if (h >= r) return std::nullopt;
        const double w = std::sqrt(r * r - h * h);
        return Interval{m0 - w, m1 + w};
    }
    // Segment across the motion axis, at motion coordinate m0 == m1.
    if (cross >= c0 && cross <= c1) return Interval{m0 - r, m0 + r};
    const double end = cross < c0 ? c0 : c1;
    const double h = std::abs(cross - end);
    if (h >= r) return std::nullopt;
    const double w = std::sqrt(r * r - h * h);
    return Interval{m0 - w, m0 + w};
}

} // namespace

MazeLayout::MazeLayout(int n) : n_(n) {
    if (n < 1) throw ConfigError("maze side must be >= 1");
    closed_.assign(static_cast<std::size_t>(n) * n, 0x0F);
}

bool MazeLayout::closed(Cell c, Side s) const { return (closed_[index(c)] & static_cast<std::uint8_t>(s)) != 0; }

void MazeLayout::open(Cell c, Side s) {
    const Cell other = neighbour(c, s);
    if (!inside(c, n_) || !inside(other, n_)) {
        throw Error("maze: cannot open an outer border");
    }
    closed_[index(c)] &= static_cast<std::uint8_t>(~static_cast<std::uint8_t>(s));
    closed_[index(other)] &= static_cast<std::uint8_t>(~static_cast<std::uint8_t>(opposite(s)));
}

std::size_t MazeLayout::open_internal_borders() const {
    std::size_t count = 0;
    for (int y = 0; y < n_; ++y) {
        for (int x = 0; x < n_; ++x) {
            if (x + 1 < n_ && !closed({x, y}, Side::east)) ++count;
            if (y + 1 < n_ && !closed({x, y}, Side::north)) ++count;
        }
    }
    return count;
}

std::string MazeLayout::canonical_hex() const {
    std::vector<bool> bits;
    bits.reserve(closed_.size() * 2);
    for (int y = 0; y < n_; ++y) {
        for (int x = 0; x < n_; ++x) {
            bits.push_back(closed({x, y}, Side::east));
            bits.push_back(closed({x, y}, Side::south));
        }
    }
    while (bits.size() % 4 != 0) bits.push_back(false);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(bits.size() / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        const int v = (bits[i] << 3) | (bits[i + 1] << 2) | (bits[i + 2] << 1) | static_cast<int>(bits[i + 3]);
        hex.push_back(kHex[v]);
    }
    return hex;
}

MazeLayout MazeLayout::from_canonical_hex(int n, const std::string& hex) {
    MazeLayout m(n);
    const std::size_t nbits = static_cast<std::size_t>(n) * n * 2;
    if (hex.size() != (nbits + 3) / 4) {
        throw DimensionMismatch("maze wall hex", (nbits + 3) / 4, hex.size());
    }
    std::vector<bool> bits;
    for (char ch : hex) {
        int v;
        if (ch >= '0' && ch <= '9') {
            v = ch - '0';
        } else if (ch >= 'a' && ch <= 'f') {
            v = ch - 'a' + 10;
        } else {
            throw Error(std::string("maze wall hex: invalid digit '") + ch + "'");
        }
        for (int b = 3; b >= 0; --b) bits.push_back(((v >> b) & 1) != 0);
    }
    std::size_t i = 0;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const bool east = bits[i++];
            const bool south = bits[i++];
            if (!east) {
                if (x + 1 >= n) throw Error("maze wall hex: open outer east border");
                m.open({x, y}, Side::east);
            }
            if (!south) {
                if (y == 0) throw Error("maze wall hex: open outer south border");
                m.open({x, y}, Side::south);
            }
        }
    }
    return m;
}

std::vector<Segment> MazeLayout::wall_segments() const {
    std::vector<Segment> segs;
    for (int y = 0; y < n_; ++y) {
        for (int x = 0; x < n_; ++x) {
            const double fx = x;
            const double fy = y;
            if (closed({x, y}, Side::south)) segs.push_back({fx, fy, fx + 1, fy});
            if (closed({x, y}, Side::west)) segs.push_back({fx, fy, fx, fy + 1});
            if (y == n_ - 1 && closed({x, y}, Side::north)) segs.push_back({fx, fy + 1, fx + 1, fy + 1});
            if (x == n_ - 1 && closed({x, y}, Side::east)) segs.push_back({fx + 1, fy, fx + 1, fy + 1});
        }
    }
    return segs;
}

MazeLayout generate_maze(int n, Rng& rng) {
    MazeLayout m(n);
    std::vector<bool> visited(static_cast<std::size_t>(n) * n, false);
    auto idx = [n](Cell c) { return static_cast<std::size_t>(c.y) * n + c.x; };
    std::vector<Cell> stack{m.start_cell()};
    visited[idx(m.start_cell())] = true;
    std::vector<Side> options;
    while (!stack.empty()) {
        const Cell c = stack.back();
        options.clear();
        for (auto s : kSides) {
            const Cell o = neighbour(c, s);
            if (inside(o, n) && !visited[idx(o)]) options.push_back(s);
        }
        if (options.empty()) {
            stack.pop_back();
            continue;
        }
        const Side s = options[rng.index(options.size())];
        m.open(c, s);
        const Cell o = neighbour(c, s);
        visited[idx(o)] = true;
        stack.push_back(o);
    }
    return m;
}

std::string render(const MazeLayout& m) {
    const int n = m.n();
    std::ostringstream out;
    for (int y = n - 1; y >= 0; --y) {
        for (int x = 0; x < n; ++x) out << '+' << (m.closed({x, y}, Side::north) ? "---" : "   ");
        out << "+\n";
        for (int x = 0; x < n; ++x) {
            out << (m.closed({x, y}, Side::west) ? '|' : ' ');
            const Cell c{x, y};
            char mark = ' ';
            if (c == m.goal_cell()) {
                mark = 'G';
            } else if (c == m.start_cell()) {
                mark = 'S';
            }
            out << ' ' << mark << ' ';
        }
        out << (m.closed({n - 1, y}, Side::east) ? "|" : " ") << '\n';
    }
    for (int x = 0; x < n; ++x) out << "+---";
    out << "+\n";
    return out.str();
}

void MazeParams::validate() const {
    if (!(dt > 0.0)) throw ConfigError("maze.dt must be positive");
    if (!(damping >= 0.0 && damping < 1.0)) throw ConfigError("maze.damping must lie in [0, 1)");
    if (!(force_scale > 0.0)) throw ConfigError("maze.force_scale must be positive");
    if (!(radius > 0.0 && radius < 0.5)) throw ConfigError("maze.radius must lie in (0, 0.5)");
    if (episode_length == 0) throw ConfigError("maze.episode_length must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("maze.gamma must lie in (0, 1]");
    if (!(init_noise >= 0.0)) throw ConfigError("maze.init_noise must be non-negative");
    if (!(range_fraction > 0.0)) throw ConfigError("maze.range_fraction must be positive");
    // A step may not carry the robot past a neighbouring cell.
    if (dt * dt * force_scale / (1.0 - damping) + radius >= 1.0) {
        throw ConfigError("maze dynamics too fast: per-step travel plus radius must stay below one cell");
    }
}

MazeWorld::MazeWorld(MazeLayout layout, MazeParams params)
    : layout_(std::move(layout)), params_(params), segments_(layout_.wall_segments()) {
    params_.validate();
    const int n = layout_.n();
    range_max_ = params_.range_fraction * n;
    const int reach = std::max(1, static_cast<int>(std::ceil(std::max(range_max_, 2.0 * params_.radius))));
    nearby_.resize(static_cast<std::size_t>(n) * n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double lo_x = x - reach;
            const double hi_x = x + 1 + reach;
            const double lo_y = y - reach;
            const double hi_y = y + 1 + reach;
            auto& list = nearby_[static_cast<std::size_t>(y) * n + x];
            for (std::size_t i = 0; i < segments_.size(); ++i) {
                const auto& s = segments_[i];
                if (s.x1 >= lo_x && s.x0 <= hi_x && s.y1 >= lo_y && s.y0 <= hi_y) list.push_back(i);
            }
        }
    }
}

const std::vector<std::size_t>& MazeWorld::nearby(Vec2 p) const {
    const int n = layout_.n();
    const int x = std::clamp(static_cast<int>(std::floor(p.x)), 0, n - 1);
    const int y = std::clamp(static_cast<int>(std::floor(p.y)), 0, n - 1);
    return nearby_[static_cast<std::size_t>(y) * n + x];
}

MazeSimState MazeWorld::initial_state(Vec2 offset) const {
    const Cell s = layout_.start_cell();
    const double lim = 0.5 - params_.radius;
    MazeSimState st;
    st.position = {s.x + 0.5 + std::clamp(offset.x, -lim, lim), s.y + 0.5 + std::clamp(offset.y, -lim, lim)};
    return st;
}

Vec2 MazeWorld::heading(Vec2 v, Vec2 fallback) {
    const double speed = std::hypot(v.x, v.y);
    if (speed < 1e-6) return fallback;
    return {v.x / speed, v.y / speed};
}

double MazeWorld::rangefinder(Vec2 o, Vec2 d) const {
    double best = range_max_;
    for (auto i : nearby(o)) {
        const auto& s = segments_[i];
        double t;
        if (s.vertical()) {
            if (d.x == 0.0) continue;
            t = (s.x0 - o.x) / d.x;
            if (t < 0.0) continue;
            const double y = o.y + t * d.y;
            if (y < s.y0 || y > s.y1) continue;
        } else {
            if (d.y == 0.0) continue;
            t = (s.y0 - o.y) / d.y;
            if (t < 0.0) continue;
            const double x = o.x + t * d.x;
            if (x < s.x0 || x > s.x1) continue;
        }
        best = std::min(best, t);
    }
    return best;
}

bool MazeWorld::in_goal(Vec2 p) const {
    const Cell g = layout_.goal_cell();
    return p.x >= g.x && p.x <= g.x + 1 && p.y >= g.y && p.y <= g.y + 1;
}

MazeObservation MazeWorld::observe(const MazeSimState& state) const {
    const Vec2 h = state.heading;
    constexpr double c = 0.70710678118654752440;
    const Vec2 right{c * h.x + c * h.y, -c * h.x + c * h.y};
    const Vec2 left{c * h.x - c * h.y, c * h.x + c * h.y};
    MazeObservation obs;
    obs.range_m45 = rangefinder(state.position, right);
    obs.range_0 = rangefinder(state.position, h);
    obs.range_p45 = rangefinder(state.position, left);
    return obs;
}

double MazeWorld::move_axis(Vec2 p, double delta, bool along_x, bool& blocked) const {
    constexpr double eps = 1e-9;
    const double from = along_x ? p.x : p.y;
    const double cross = along_x ? p.y : p.x;
    double to = from + delta;
    blocked = false;
    for (auto i : nearby(p)) {
        const auto slice = capsule_slice(segments_[i], cross, params_.radius, along_x);
        if (!slice) continue;
        if (delta > 0.0 && slice->lo >= from - eps && slice->lo < to) {
            to = std::max(from, slice->lo);
            blocked = true;
        } else if (delta < 0.0 && slice->hi <= from + eps && slice->hi > to) {
            to = std::min(from, slice->hi);
            blocked = true;
        }
    }
    return to;
}

StepResult MazeWorld::step(const MazeSimState& state, Vec2 action) const {
    StepResult r;
    MazeSimState next = state;
    Vec2 force = action;
    if (params_.action_frame == ActionFrame::body) {
        const Vec2 h = state.heading;
        force = {action.x * h.x - action.y * h.y, action.x * h.y + action.y * h.x};
    }
    const double k = params_.dt * params_.force_scale;
    next.velocity = {params_.damping * state.velocity.x + k * force.x,
                     params_.damping * state.velocity.y + k * force.y};
    const Vec2 motion_heading = heading(next.velocity, state.heading);

    bool left = false;
    bool right = false;
    auto record_contact = [&](Vec2 toward_wall) {
        const double cross = motion_heading.x * toward_wall.y - motion_heading.y * toward_wall.x;
        if (cross > -1e-12) left = true;
        if (cross < 1e-12) right = true;
    };

    const double dx = params_.dt * next.velocity.x;
    if (dx != 0.0) {
        bool blocked = false;
        next.position.x = move_axis(next.position, dx, true, blocked);
        if (blocked) {
            next.velocity.x = 0.0;
            record_contact({dx > 0.0 ? 1.0 : -1.0, 0.0});
        }
    }
    const double dy = params_.dt * next.velocity.y;
    if (dy != 0.0) {
        bool blocked = false;
        next.position.y = move_axis(next.position, dy, false, blocked);
        if (blocked) {
            next.velocity.y = 0.0;
            record_contact({0.0, dy > 0.0 ? 1.0 : -1.0});
        }
    }
    next.heading = heading(next.velocity, motion_heading);
    ++next.step;

    r.observation = observe(next);
    r.observation.bumper_left = left ? 1.0 : 0.0;
    r.observation.bumper_right = right ? 1.0 : 0.0;
    r.reward = in_goal(next.position) ? 1.0 : 0.0;
    r.terminated = r.reward > 0.0 || next.step >= params_.episode_length;
    r.state = next;
    return r;
}

EpisodeResult run_episode(const MazeWorld& world, const policy::Genome& genome, const policy::NetworkShape& shape,
                          Vec2 start_offset) {
    const policy::FeedForward net(genome, shape);
    MazeSimState state = world.initial_state(start_offset);
    auto obs = world.observe(state).as_array();
    std::array<double, 2> action{};
    EpisodeResult out;
    double discount = 1.0;
    for (std::size_t t = 0; t < world.params().episode_length; ++t) {
        net(obs, action);
        const auto res = world.step(state, {action[0], action[1]});
        state = res.state;
        out.steps = t + 1;
        if (res.reward > 0.0) {
            out.evaluation.fitness += discount * res.reward;
            out.evaluation.solved = true;
        }
        if (res.terminated) break;
        discount *= world.params().gamma;
        obs = res.observation.as_array();
    }
    const double n = world.layout().n();
    out.final_position = state.position;
    out.evaluation.behavior = {state.position.x / n, state.position.y / n};
    return out;
}

Task<policy::Genome> make_task(const MazeLayout& layout, const MazeParams& params, const policy::NetworkShape& shape,
                               std::uint64_t noise_seed, std::string name) {
    auto world = std::make_shared<const MazeWorld>(layout, params);
    Vec2 offset;
    if (params.init_noise > 0.0) {
        Rng rng(noise_seed);
        offset.x = rng.normal(0.0, params.init_noise);
        offset.y = rng.normal(0.0, params.init_noise);
    }
    return {std::move(name), [world, shape, offset](const policy::Genome& g) {
                return run_episode(*world, g, shape, offset).evaluation;
            }};
}

MazeDataset generate_dataset(int n, std::size_t count_train, std::size_t count_test, std::uint64_t master_seed) {
    if (n < 1) throw ConfigError("maze side must be >= 1");
    if (count_train == 0 || count_test == 0) throw ConfigError("dataset counts must be >= 1");
    const std::size_t total = count_train + count_test;
    const std::size_t max_attempts = 20 * total + 100;
    std::set<std::string> seen;
    MazeDataset ds;
    for (std::size_t attempt = 0; attempt < max_attempts && seen.size() < total; ++attempt) {
        const std::uint64_t seed = derive_seed(master_seed, {key(Stream::dataset), static_cast<std::uint64_t>(n), attempt});
        Rng rng(seed);
        MazeRecord rec{n, seed, generate_maze(n, rng)};
        if (!seen.insert(rec.layout.canonical_hex()).second) continue;
        (ds.train.size() < count_train ? ds.train : ds.test).push_back(std::move(rec));
    }
    if (seen.size() < total) {
        throw Error("cannot generate " + std::to_string(total) + " distinct " + std::to_string(n) + "x" +
                    std::to_string(n) + " mazes: only " + std::to_string(seen.size()) + " found after " +
                    std::to_string(max_attempts) + " attempts");
    }
    return ds;
}

void write_mazes(std::ostream& out, const std::vector<MazeRecord>& records) {
    out << "faery-mazes " << kMazeFileVersion << '\n';
    out << "# n seed walls_hex start_x start_y goal_x goal_y\n";
    for (const auto& r : records) {
        const auto s = r.layout.start_cell();
        const auto g = r.layout.goal_cell();
        out << r.n << ' ' << r.seed << ' ' << r.layout.canonical_hex() << ' ' << s.x << ' ' << s.y << ' ' << g.x
            << ' ' << g.y << '\n';
    }
}

std::vector<MazeRecord> read_mazes(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("maze file: missing header");
    std::istringstream header(line);
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != "faery-mazes") throw Error("maze file: bad header '" + line + "'");
    if (version != kMazeFileVersion) {
        throw Error("maze file: unsupported version " + std::to_string(version));
    }
    std::vector<MazeRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        MazeRecord r;
        std::string hex;
        int sx, sy, gx, gy;
        if (!(row >> r.n >> r.seed >> hex >> sx >> sy >> gx >> gy)) {
            throw Error("maze file line " + std::to_string(line_no) + ": malformed record");
        }
        r.layout = MazeLayout::from_canonical_hex(r.n, hex);
        if (Cell{sx, sy} != r.layout.start_cell() || Cell{gx, gy} != r.layout.goal_cell()) {
            throw Error("maze file line " + std::to_string(line_no) + ": unexpected start/goal cells");
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace faery::maze
