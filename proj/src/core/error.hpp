#pragma once

#include <stdexcept>
#include <string>

namespace ds {

/// Error category carried by every exception thrown from the library.
/// The C API maps these one-to-one onto ds_status codes.
enum class ErrCode {
  InvalidArg,
  Shape,
  NonFinite,
  Io,
  Diverged,
  Runtime,
};

class Error : public std::runtime_error {
public:
  Error(ErrCode code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  ErrCode code() const { return code_; }

private:
  ErrCode code_;
};

[[noreturn]] inline void fail(ErrCode code, const std::string& msg) { throw Error(code, msg); }

} // namespace ds
