#pragma once

// Prior-population checkpoints.
//
// Binary layout, little-endian throughout:
//   "FAERYCKP"                      8-byte magic
//   u32  format version
//   u64  master seed
//   u64  next meta-generation       (with the seed this fully positions every RNG stream)
//   u64  config fingerprint
//   u32  input dim, u32 hidden count, u32 hidden[...], u32 output dim
//   f64  lo, f64 hi
//   u32  mu, u32 parameter count
//   f64  params[mu][parameter count]
//   per member: u64 f0, f64 f1
//
// The JSON export carries the same fields; doubles are written with
// round-trip precision and the -inf sentinel as the string "-inf".

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "faery/meta.hpp"
#include "faery/policy.hpp"

namespace faery::checkpoint {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    std::uint64_t master_seed = 0;
    std::uint64_t next_meta_generation = 0;
    std::uint64_t config_fingerprint = 0;
    policy::NetworkShape shape;
    policy::Bounds bounds;
    std::vector<policy::Genome> genomes;
    std::vector<meta::MetaScore> scores;

    meta::PriorPopulation<policy::Genome> prior() const { return {genomes, scores}; }

    bool operator==(const Checkpoint&) const = default;
};

void write_binary(std::ostream& out, const Checkpoint& ckpt);
/// Throws Error on truncation, bad magic, unsupported version or inconsistent sizes.
Checkpoint read_binary(std::istream& in);

/// Writes through a temporary file and a rename so readers never see a partial file.
void save(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load(const std::filesystem::path& path);

nlohmann::json to_json(const Checkpoint& ckpt);
Checkpoint from_json(const nlohmann::json& doc);

} // namespace faery::checkpoint
