#ifndef MLC_BACKENDS_HPP
#define MLC_BACKENDS_HPP

// C and Python code generation from BIR. Every variable lives in one flat
// array of values indexed by `StorageLayout` slots.

#include <cstdint>
#include <string>
#include <vector>

#include "mlc/bir.hpp"

namespace mlc {

enum class Language { C, Python };
std::string_view to_string(Language l);

/// One input or output of an emitted unit. `index` is the offset in the
/// entry point's input or output block; arrays take `length` entries.
struct ManifestEntry {
  std::string name;
  std::uint32_t slot = 0;
  std::string role;  // "input" or "output"
  std::uint32_t index = 0;
  std::uint32_t length = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct EmittedUnit {
  Language language = Language::C;
  std::string source;
  std::string entry;
  std::uint32_t total_slots = 0;
  std::vector<ManifestEntry> manifest;

  std::uint32_t input_width() const;
  std::uint32_t output_width() const;
};

struct EmitOptions {
  std::string prefix = "mlc";
  std::size_t chunk_limit = 1000;  // statements per generated function
};

/// External identifiers are kept within this many characters.
inline constexpr std::size_t kMaxIdentifier = 31;

/// C99 against `m_runtime.h`. The entry point is
///   int <prefix>_compute(const m_value *inputs, m_value *outputs,
///                        m_value *state, const char **error_code);
/// returning 0, or 1 with `*error_code` set when a raise fires. `state` must
/// hold `total_slots` values. Throws `IdentifierOverflow` when a generated
/// name would exceed `kMaxIdentifier`.
EmittedUnit emit_c(const BirProgram& program, const StorageLayout& layout,
                   const EmitOptions& options = {});

/// Self-contained Python 3. `compute(inputs)` takes a mapping from names to
/// floats (arrays as lists; None or a missing key is undef) and returns the
/// output mapping with None for undef, or raises `MError(code)`.
EmittedUnit emit_python(const BirProgram& program, const StorageLayout& layout,
                        const EmitOptions& options = {});

/// JSON lines: {"name", "slot", "role", "index", "length"}.
std::string manifest_jsonl(const EmittedUnit& unit);

/// Line-oriented drivers used by the harness. Each stdin line holds one
/// token per input entry (`u` for undef, otherwise 16 hex digits of the
/// binary64 bits); each stdout line is `ok` followed by one token per output
/// entry, or `error CODE`.
std::string emit_c_driver(const EmittedUnit& unit, const EmitOptions& options = {});
std::string emit_python_driver(const EmittedUnit& unit, const std::string& module_name);

/// Encodes the input line for `inputs`, and decodes a result line into a
/// store of outputs.
std::string encode_driver_inputs(const EmittedUnit& unit, const Store& inputs);
RunOutcome decode_driver_outputs(const EmittedUnit& unit, const std::string& line);

}  // namespace mlc

#endif  // MLC_BACKENDS_HPP
