#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace qat::diag {

enum class Level { info, warning };

using Handler = std::function<void(Level, std::string_view)>;

// Replaces the process-wide diagnostic sink and returns the previous one.
// The default sink prints warnings to stderr and drops info messages.
Handler set_handler(Handler handler);

void emit(Level level, std::string_view message);
inline void warn(std::string_view message) { emit(Level::warning, message); }
inline void info(std::string_view message) { emit(Level::info, message); }

// RAII capture used by tests and the CLI summary.
class ScopedCapture {
public:
    ScopedCapture();
    ~ScopedCapture();
    ScopedCapture(const ScopedCapture&) = delete;
    ScopedCapture& operator=(const ScopedCapture&) = delete;

    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    Handler previous_;
    std::vector<std::string> warnings_;
};

}  // namespace qat::diag
