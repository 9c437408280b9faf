#include "pathspray/spray.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace pathspray {

namespace {

constexpr std::array<std::uint8_t, 256> make_reverse_table() {
    std::array<std::uint8_t, 256> t{};
    for (unsigned v = 0; v < 256; ++v) {
        unsigned r = 0;
        for (unsigned bit = 0; bit < 8; ++bit)
            if (v & (1u << bit)) r |= 1u << (7 - bit);
        t[v] = static_cast<std::uint8_t>(r);
    }
    return t;
}

constexpr auto kReverse8 = make_reverse_table();

std::uint32_t reverse32(std::uint32_t v) {
    return (static_cast<std::uint32_t>(kReverse8[v & 0xff]) << 24) |
           (static_cast<std::uint32_t>(kReverse8[(v >> 8) & 0xff]) << 16) |
           (static_cast<std::uint32_t>(kReverse8[(v >> 16) & 0xff]) << 8) |
           static_cast<std::uint32_t>(kReverse8[(v >> 24) & 0xff]);
}

}  // namespace

const char* to_string(SprayMethod method) {
    switch (method) {
        case SprayMethod::Plain: return "plain";
        case SprayMethod::Shuffle1: return "shuffle1";
        case SprayMethod::Shuffle2: return "shuffle2";
    }
    return "?";
}

SprayMethod spray_method_from_string(const std::string& name) {
    if (name == "plain") return SprayMethod::Plain;
    if (name == "shuffle1") return SprayMethod::Shuffle1;
    if (name == "shuffle2") return SprayMethod::Shuffle2;
    throw std::invalid_argument("unknown spray method: " + name);
}

std::uint32_t bit_reverse(std::uint64_t j, std::uint32_t ell) {
    if (ell < 1 || ell > 32) throw std::invalid_argument("bit_reverse: ell out of range");
    return reverse32(static_cast<std::uint32_t>(j)) >> (32 - ell);
}

void validate_seed(SpraySeed seed, std::uint32_t ell) {
    if (ell < 1 || ell > 32) throw std::invalid_argument("seed: ell out of range");
    const std::uint64_t m = std::uint64_t{1} << ell;
    if (seed.sa >= m) throw std::invalid_argument("seed: sa must lie in [0, 2^ell)");
    if (seed.sb == 0 || seed.sb >= m || (seed.sb & 1u) == 0)
        throw std::invalid_argument("seed: sb must be odd in (0, 2^ell)");
}

std::uint32_t selection_point(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                              std::uint64_t j) {
    const std::uint32_t mask =
        ell == 32 ? 0xffffffffu : ((std::uint32_t{1} << ell) - 1);
    switch (method) {
        case SprayMethod::Plain:
            return bit_reverse(j, ell);
        case SprayMethod::Shuffle1:
            // The affine map is taken mod 2^ell before reversal; wrapping
            // 32-bit arithmetic followed by the mask computes exactly that.
            return bit_reverse((seed.sa + static_cast<std::uint32_t>(j) * seed.sb) & mask,
                               ell);
        case SprayMethod::Shuffle2:
            return (seed.sa + seed.sb * bit_reverse(j, ell)) & mask;
    }
    throw std::invalid_argument("selection_point: bad method");
}

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

SpraySeed draw_seed(SeedSource& entropy, std::uint32_t ell) {
    const std::uint64_t m = std::uint64_t{1} << ell;
    SpraySeed s;
    s.sa = static_cast<std::uint32_t>(entropy.next() & (m - 1));
    s.sb = static_cast<std::uint32_t>(entropy.next() & (m - 1)) | 1u;
    return s;
}

SprayState::SprayState(std::uint32_t ell, SpraySeed seed, SprayMethod method)
    : ell_(ell), seed_(seed), method_(method) {
    validate_seed(seed, ell);
}

void SprayState::enable_rotation(SeedSource* entropy) {
    if (entropy == nullptr) throw std::invalid_argument("rotation needs an entropy source");
    rotation_ = SeedRotation::EveryPeriod;
    entropy_ = entropy;
}

SpraySeed SprayState::rotate_seed(SeedSource& entropy) {
    SpraySeed fresh = draw_seed(entropy, ell_);
    audit_.push_back(SeedChange{counter_, seed_, fresh});
    seed_ = fresh;
    return fresh;
}

SprayState::Pick SprayState::next_path(const PathProfile& profile) {
    if (profile.total_balls() != (std::uint64_t{1} << ell_))
        throw std::invalid_argument("profile total must equal 2^ell");
    if (path_seq_.size() < profile.path_count()) path_seq_.resize(profile.path_count(), 0);

    const std::uint64_t m = std::uint64_t{1} << ell_;
    // Rotate only at period boundaries: within a period each seed is a
    // bijection, so every path gets exactly its share before the seed moves.
    if (rotation_ == SeedRotation::EveryPeriod && counter_ > 0 && counter_ % m == 0)
        rotate_seed(*entropy_);

    Pick pick;
    pick.flow_seq = counter_;
    pick.point = selection_point(method_, seed_, ell_, counter_);
    pick.path = profile.select_path(pick.point);
    pick.path_seq = path_seq_[pick.path]++;
    ++counter_;
    return pick;
}

}  // namespace pathspray
