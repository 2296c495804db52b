#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "botcal/corpus.hpp"

namespace botcal {

enum class Archetype { spam, fake_follower, porn_like, political };

inline constexpr std::array<Archetype, 4> kAllArchetypes = {
    Archetype::spam, Archetype::fake_follower, Archetype::porn_like, Archetype::political};

std::string_view to_string(Archetype a);
Archetype parse_archetype(std::string_view text);  // throws ValidationError

struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t n_humans = 0;
    std::size_t n_bots = 0;
    std::array<double, 4> archetype_weights{1.0, 1.0, 1.0, 1.0};  // order of kAllArchetypes
    double separation = 1.0;  // 0: classes identically distributed
    std::string name = "synthetic";

    void validate() const;
};

// Pure function of the config. Humans and bots interleave in seeded order.
LabeledCorpus generate_synthetic(const SynthConfig& cfg);

// Weights selecting a single archetype.
std::array<double, 4> only(Archetype a);

}  // namespace botcal
