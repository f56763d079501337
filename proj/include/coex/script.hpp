#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "coex/runtime.hpp"
#include "coex/verify.hpp"

namespace coex::runtime {

struct ScriptError : Error {
    ScriptError(int line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line(line) {}
    int line;
};

struct ScriptResult {
    int failed_expectations = 0;
    bool ok() const { return failed_expectations == 0; }
};

// Replays a simulation script:
//   register <version>
//   view <version>.<name> spec <file.dl>
//   insert <version>.<name> (c1, c2, ...)
//   delete <version>.<name> (c1, c2, ...)
//   expect <version>.<name> {(...), ...}     (also: expect physical.<rel> {...})
//   dump
// '#' starts a comment. Spec paths resolve against base_dir. Failed expect
// commands print a relation diff and are counted; other errors throw
// ScriptError with the line number.
ScriptResult run_script(const std::string& text, const std::filesystem::path& base_dir,
                        const verify::Universe& derivation_bound, std::ostream& out);

}  // namespace coex::runtime
