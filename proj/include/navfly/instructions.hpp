#pragma once

#include <string>
#include <vector>

#include "navfly/rng.hpp"
#include "navfly/scene.hpp"

namespace navfly::data {

/// Slot values of the closed-vocabulary instruction grammar. Exposed so
/// tests can enumerate the full template product.
struct InstructionGrammar {
  std::vector<std::string> motions;
  std::vector<std::string> avoid_verbs;
  std::vector<std::string> obstacle_phrases;
};

const InstructionGrammar& instruction_grammar();

/// Deterministic realization of one template combination.
/// template_idx 0: "<motion> and <verb> <obstacles> to reach the <label>"
/// template_idx 1: "<motion> to reach the <label> ahead"
/// template_idx 2: "<verb> <obstacles> and reach the <label>"
std::string compose_instruction(int template_idx, std::size_t motion_idx, std::size_t verb_idx,
                                std::size_t obstacle_idx, const std::string& label);

/// Random draw from the grammar, naming the target label. Deterministic
/// per RNG state; realized length stays within 8-16 words.
std::string make_instruction(Rng& rng, const world::TargetInstance& target,
                             const world::Scene& scene);

int word_count(const std::string& text);

/// Every word the generator can ever emit (template skeletons, slot
/// values, and the whole target label pool).
std::vector<std::string> instruction_vocabulary();

}  // namespace navfly::data
