#include "faery/checkpoint.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "faery/error.hpp"

namespace faery::checkpoint {

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'A', 'E', 'R', 'Y', 'C', 'K', 'P'};

// Guards against absurd allocations when a corrupted header is read.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

template <typename U>
void put(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    }
    out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

void put_u32(std::ostream& out, std::size_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) throw Error("checkpoint: value too large for u32 field");
    put(out, static_cast<std::uint32_t>(v));
}

template <typename U>
U get(std::istream& in) {
    std::array<char, sizeof(U)> bytes{};
    if (!in.read(bytes.data(), bytes.size())) throw Error("checkpoint: truncated file");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        value |= static_cast<U>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    }
    return value;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get<std::uint64_t>(in)); }

std::size_t get_count(std::istream& in, const char* what) {
    const auto v = get<std::uint32_t>(in);
    if (v > kMaxElements) throw Error(std::string("checkpoint: implausible ") + what);
    return v;
}

void check_consistent(const Checkpoint& c) {
    c.shape.validate();
    if (c.genomes.size() != c.scores.size()) {
        throw DimensionMismatch("checkpoint scores", c.genomes.size(), c.scores.size());
    }
    const auto p = c.shape.parameter_count();
    for (const auto& g : c.genomes) {
        if (g.size() != p) throw DimensionMismatch("checkpoint genome", p, g.size());
    }
}

nlohmann::json f1_json(double f1) {
    if (std::isinf(f1) && f1 < 0) return "-inf";
    return f1;
}

double f1_from_json(const nlohmann::json& v) {
    if (v.is_string() && v.get<std::string>() == "-inf") return -std::numeric_limits<double>::infinity();
    if (!v.is_number()) throw Error("checkpoint json: f1 must be a number or \"-inf\"");
    return v.get<double>();
}

} // namespace

void write_binary(std::ostream& out, const Checkpoint& c) {
    check_consistent(c);
    out.write(kMagic.data(), kMagic.size());
    put(out, kCheckpointVersion);
    put(out, c.master_seed);
    put(out, c.next_meta_generation);
    put(out, c.config_fingerprint);
    put_u32(out, c.shape.input_dim);
    put_u32(out, c.shape.hidden_dims.size());
    for (auto h : c.shape.hidden_dims) put_u32(out, h);
    put_u32(out, c.shape.output_dim);
    put_f64(out, c.bounds.lo);
    put_f64(out, c.bounds.hi);
    put_u32(out, c.genomes.size());
    put_u32(out, c.shape.parameter_count());
    for (const auto& g : c.genomes) {
        for (double x : g.params()) put_f64(out, x);
    }
    for (const auto& s : c.scores) {
        put(out, static_cast<std::uint64_t>(s.f0));
        put_f64(out, s.f1);
    }
    if (!out) throw Error("checkpoint: write failed");
}

Checkpoint read_binary(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw Error("checkpoint: bad magic");
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw Error("checkpoint: unsupported version " + std::to_string(version));
    }
    Checkpoint c;
    c.master_seed = get<std::uint64_t>(in);
    c.next_meta_generation = get<std::uint64_t>(in);
    c.config_fingerprint = get<std::uint64_t>(in);
    c.shape.input_dim = get_count(in, "input dim");
    const auto hidden = get_count(in, "hidden layer count");
    if (hidden > 1024) throw Error("checkpoint: implausible hidden layer count");
    for (std::size_t i = 0; i < hidden; ++i) c.shape.hidden_dims.push_back(get_count(in, "layer width"));
    c.shape.output_dim = get_count(in, "output dim");
    c.bounds.lo = get_f64(in);
    c.bounds.hi = get_f64(in);
    const auto mu = get_count(in, "population size");
    const auto p = get_count(in, "parameter count");
    c.shape.validate();
    if (p != c.shape.parameter_count()) throw DimensionMismatch("checkpoint parameter count", c.shape.parameter_count(), p);
    for (std::size_t i = 0; i < mu; ++i) {
        std::vector<double> params(p);
        for (auto& x : params) x = get_f64(in);
        c.genomes.emplace_back(std::move(params), c.bounds);
    }
    for (std::size_t i = 0; i < mu; ++i) {
        meta::MetaScore s;
        s.f0 = static_cast<std::size_t>(get<std::uint64_t>(in));
        s.f1 = get_f64(in);
        c.scores.push_back(s);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw Error("checkpoint: trailing bytes");
    return c;
}

void save(const std::filesystem::path& path, const Checkpoint& ckpt) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("checkpoint: cannot write " + tmp.string());
        write_binary(out, ckpt);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("checkpoint: cannot open " + path.string());
    return read_binary(in);
}

nlohmann::json to_json(const Checkpoint& c) {
    check_consistent(c);
    nlohmann::json doc;
    doc["format_version"] = kCheckpointVersion;
    doc["master_seed"] = c.master_seed;
    doc["next_meta_generation"] = c.next_meta_generation;
    doc["config_fingerprint"] = c.config_fingerprint;
    doc["shape"] = {{"input_dim", c.shape.input_dim},
                    {"hidden_dims", c.shape.hidden_dims},
                    {"output_dim", c.shape.output_dim}};
    doc["bounds"] = {{"lo", c.bounds.lo}, {"hi", c.bounds.hi}};
    auto members = nlohmann::json::array();
    for (std::size_t i = 0; i < c.genomes.size(); ++i) {
        const auto params = c.genomes[i].params();
        members.push_back({{"params", std::vector<double>(params.begin(), params.end())},
                           {"f0", c.scores[i].f0},
                           {"f1", f1_json(c.scores[i].f1)}});
    }
    doc["members"] = std::move(members);
    return doc;
}

Checkpoint from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format_version").get<std::uint32_t>() != kCheckpointVersion) {
            throw Error("checkpoint json: unsupported version");
        }
        Checkpoint c;
        c.master_seed = doc.at("master_seed").get<std::uint64_t>();
        c.next_meta_generation = doc.at("next_meta_generation").get<std::uint64_t>();
        c.config_fingerprint = doc.at("config_fingerprint").get<std::uint64_t>();
        const auto& s = doc.at("shape");
        c.shape.input_dim = s.at("input_dim").get<std::size_t>();
        c.shape.hidden_dims = s.at("hidden_dims").get<std::vector<std::size_t>>();
        c.shape.output_dim = s.at("output_dim").get<std::size_t>();
        c.bounds.lo = doc.at("bounds").at("lo").get<double>();
        c.bounds.hi = doc.at("bounds").at("hi").get<double>();
        for (const auto& m : doc.at("members")) {
            c.genomes.emplace_back(m.at("params").get<std::vector<double>>(), c.bounds);
            c.scores.push_back({m.at("f0").get<std::size_t>(), f1_from_json(m.at("f1"))});
        }
        check_consistent(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("checkpoint json: ") + e.what());
    }
}

} // namespace faery::checkpoint
