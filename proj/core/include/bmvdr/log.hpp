#pragma once

#include <sstream>
#include <string>

namespace bmvdr::log {

enum class Level { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

void set_level(Level level);
Level level();
void write(Level level, const std::string& message);

namespace detail {
class Line {
 public:
  explicit Line(Level level) : level_(level) {}
  ~Line() { write(level_, stream_.str()); }
  template <typename T>
  Line& operator<<(const T& value) {
    stream_ << value;
    return *this;
  }

 private:
  Level level_;
  std::ostringstream stream_;
};
}  // namespace detail

inline detail::Line info() { return detail::Line(Level::kInfo); }
inline detail::Line warn() { return detail::Line(Level::kWarning); }
inline detail::Line debug() { return detail::Line(Level::kDebug); }

}  // namespace bmvdr::log
