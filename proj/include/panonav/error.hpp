#pragma once

#include <stdexcept>
#include <string>

namespace panonav {

enum class Errc {
  invalid_input,  // bad config, malformed file, impossible request
  unreachable,    // no path exists where one is required
  transport,      // network / remote endpoint failure
  replay,         // transcript replay miss
  contract,       // internal invariant violated
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const { return code_; }

  int exit_code() const { return code_ == Errc::transport ? 2 : 1; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace panonav
