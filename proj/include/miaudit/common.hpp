#pragma once

#include <stdexcept>
#include <string>

namespace miaudit {

// Output schema version stamped into every emitted file.
inline constexpr int kSchemaVersion = 1;

// Exit codes used by the CLI. Each error class maps to one code.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitIngest = 3,
    kExitValidation = 4,
    kExitCapacity = 5,
};

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data-dependent failures: degenerate variance, excluded conversations,
// unknown ids, card validation problems.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "# schema: miaudit/<kind> v<version>" — first line of every text artifact.
inline std::string schema_line(const std::string& kind) {
    return "# schema: miaudit/" + kind + " v" + std::to_string(kSchemaVersion);
}

}  // namespace miaudit
