#include "qat/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace qat::diag {

namespace {

void default_handler(Level level, std::string_view message) {
    if (level == Level::warning) {
        std::cerr << "warning: " << message << '\n';
    }
}

std::mutex& handler_mutex() {
    static std::mutex m;
    return m;
}

Handler& current_handler() {
    static Handler h = default_handler;
    return h;
}

}  // namespace

Handler set_handler(Handler handler) {
    std::lock_guard<std::mutex> lock(handler_mutex());
    Handler previous = std::move(current_handler());
    current_handler() = handler ? std::move(handler) : Handler(default_handler);
    return previous;
}

void emit(Level level, std::string_view message) {
    Handler h;
    {
        std::lock_guard<std::mutex> lock(handler_mutex());
        h = current_handler();
    }
    h(level, message);
}

ScopedCapture::ScopedCapture() {
    previous_ = set_handler([this](Level level, std::string_view message) {
        if (level == Level::warning) {
            warnings_.emplace_back(message);
        }
    });
}

ScopedCapture::~ScopedCapture() { set_handler(std::move(previous_)); }

}  // namespace qat::diag
