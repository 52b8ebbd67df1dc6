#pragma once

#include <stdexcept>
#include <string>

namespace locfaults {

// All tool errors carry a stable machine-readable code next to the human
// message. The CLI maps codes to exit status.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct SyntaxError : Error {
  int line, col;
  SyntaxError(int line, int col, const std::string& msg)
      : Error("SyntaxError",
              "line " + std::to_string(line) + ":" + std::to_string(col) +
                  ": " + msg),
        line(line),
        col(col) {}
};

inline Error undeclared_variable(const std::string& name, int line) {
  return Error("UndeclaredVariable",
               "line " + std::to_string(line) + ": undeclared variable '" +
                   name + "'");
}

inline Error type_mismatch(const std::string& msg, int line) {
  return Error("TypeMismatch", "line " + std::to_string(line) + ": " + msg);
}

}  // namespace locfaults
