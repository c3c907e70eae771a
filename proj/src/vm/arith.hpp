#pragma once

#include <limits>
#include <optional>

#include "gl/module.hpp"
#include "gl/value.hpp"

namespace gl {

// Integer operators shared by both engines. Empty result means arith_error.
inline std::optional<Value> arith(Op op, std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  switch (op) {
    case Op::Add:
      if (__builtin_add_overflow(a, b, &r)) return std::nullopt;
      return Value::integer(r);
    case Op::Sub:
      if (__builtin_sub_overflow(a, b, &r)) return std::nullopt;
      return Value::integer(r);
    case Op::Mul:
      if (__builtin_mul_overflow(a, b, &r)) return std::nullopt;
      return Value::integer(r);
    case Op::Div:
      if (b == 0 || (a == std::numeric_limits<std::int64_t>::min() && b == -1)) return std::nullopt;
      return Value::integer(a / b);
    case Op::Lt: return Value::boolean(a < b);
    case Op::Le: return Value::boolean(a <= b);
    default: return std::nullopt;
  }
}

}  // namespace gl
