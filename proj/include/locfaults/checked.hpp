#pragma once

#include "locfaults/errors.hpp"

namespace locfaults {

// Concrete evaluation is done in 64-bit; anything the checked ops cannot
// represent exactly raises DomainOverflow rather than wrapping.
inline long long checked_add(long long a, long long b) {
  long long r;
  if (__builtin_add_overflow(a, b, &r))
    throw Error("DomainOverflow", "integer overflow in addition");
  return r;
}

inline long long checked_sub(long long a, long long b) {
  long long r;
  if (__builtin_sub_overflow(a, b, &r))
    throw Error("DomainOverflow", "integer overflow in subtraction");
  return r;
}

inline long long checked_mul(long long a, long long b) {
  long long r;
  if (__builtin_mul_overflow(a, b, &r))
    throw Error("DomainOverflow", "integer overflow in multiplication");
  return r;
}

inline long long checked_bin(char op, long long a, long long b) {
  switch (op) {
    case '+': return checked_add(a, b);
    case '-': return checked_sub(a, b);
    default: return checked_mul(a, b);
  }
}

}  // namespace locfaults
