#include "navfly/instructions.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "navfly/errors.hpp"

namespace navfly::data {

const InstructionGrammar& instruction_grammar() {
  static const InstructionGrammar grammar{
      {"move forward", "fly ahead", "head straight", "go forward", "fly straight"},
      {"avoid", "dodge", "steer around", "pass by"},
      {"stacked obstacles", "the tall pillars", "the tree clusters", "the stacked boxes",
       "the dense trees", "scattered obstacles"},
  };
  return grammar;
}

std::string compose_instruction(int template_idx, std::size_t motion_idx, std::size_t verb_idx,
                                std::size_t obstacle_idx, const std::string& label) {
  const auto& g = instruction_grammar();
  const std::string& motion = g.motions.at(motion_idx);
  const std::string& verb = g.avoid_verbs.at(verb_idx);
  const std::string& obstacles = g.obstacle_phrases.at(obstacle_idx);
  switch (template_idx) {
    case 0:
      return motion + " and " + verb + " " + obstacles + " to reach the " + label;
    case 1:
      return motion + " to reach the " + label + " ahead";
    case 2:
      return verb + " " + obstacles + " and reach the " + label;
    default:
      throw DomainError("unknown instruction template " + std::to_string(template_idx));
  }
}

std::string make_instruction(Rng& rng, const world::TargetInstance& target,
                             const world::Scene& scene) {
  (void)scene;
  const auto& g = instruction_grammar();
  // Weighted toward the full obstacle-clause form, which matches the
  // corpus' ~12-word average.
  const double roll = rng.uniform();
  const int template_idx = roll < 0.6 ? 0 : (roll < 0.8 ? 1 : 2);
  const std::size_t motion_idx = rng.index(g.motions.size());
  const std::size_t verb_idx = rng.index(g.avoid_verbs.size());
  const std::size_t obstacle_idx = rng.index(g.obstacle_phrases.size());
  return compose_instruction(template_idx, motion_idx, verb_idx, obstacle_idx, target.label);
}

int word_count(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int n = 0;
  while (in >> word) ++n;
  return n;
}

std::vector<std::string> instruction_vocabulary() {
  std::set<std::string> words;
  const auto add_words = [&words](const std::string& phrase) {
    std::istringstream in(phrase);
    std::string w;
    while (in >> w) words.insert(w);
  };
  const auto& g = instruction_grammar();
  for (const auto& m : g.motions) add_words(m);
  for (const auto& v : g.avoid_verbs) add_words(v);
  for (const auto& o : g.obstacle_phrases) add_words(o);
  add_words("and to reach the ahead");
  for (const auto& entry : world::target_label_pool()) add_words(entry.label);
  return {words.begin(), words.end()};
}

}  // namespace navfly::data
