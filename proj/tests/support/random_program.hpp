#ifndef MLC_TEST_RANDOM_PROGRAM_HPP
#define MLC_TEST_RANDOM_PROGRAM_HPP

#include <random>

#include "mlc/interp.hpp"

namespace mlc::testing {

/// A random M program that passes ordering and shape checking, with rules
/// emitted in shuffled order.
struct RandomProgram {
  MProgram program;
  std::vector<std::string> scalar_inputs;
  std::vector<std::pair<std::string, std::uint32_t>> array_inputs;
};

RandomProgram random_program(std::mt19937_64& rng, int rules);

/// A store consistent with the program's declarations: declared inputs only,
/// arrays at their declared length, any mix of undef and floats.
Store random_store(const RandomProgram& p, std::mt19937_64& rng);

}  // namespace mlc::testing

#endif  // MLC_TEST_RANDOM_PROGRAM_HPP
