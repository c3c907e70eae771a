#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gl {

enum class Tag : std::uint8_t { Int, Bool, Str, Unit, Tuple, List, Closure, Pid, Ref };

std::string_view tag_name(Tag t);

struct HeapObject;
struct TupleObj;
struct ConsObj;
struct ClosureObj;
struct StrObj;

/// A guest runtime value. Scalars are stored inline; strings, tuples, cons
/// cells and closures are immutable shared heap objects, so copying a Value
/// never copies guest data.
class Value {
 public:
  Value() : tag_(Tag::Unit) {}

  static Value integer(std::int64_t v) { return Value(Tag::Int, v); }
  static Value boolean(bool b) { return Value(Tag::Bool, b ? 1 : 0); }
  static Value unit() { return Value(); }
  static Value pid(std::int64_t p) { return Value(Tag::Pid, p); }
  static Value ref(std::int64_t id) { return Value(Tag::Ref, id); }
  static Value str(std::string s);
  static Value tuple(std::vector<Value> items);
  static Value nil() { return Value(Tag::List, 0); }
  static Value cons(Value head, Value tail);
  static Value list(std::span<const Value> items);
  static Value closure(int fn, std::shared_ptr<const std::string> name, int arity,
                       std::vector<Value> captures, std::int64_t id, std::int64_t owner);

  Tag tag() const { return tag_; }
  bool is(Tag t) const { return tag_ == t; }
  bool is_nil() const { return tag_ == Tag::List && !obj_; }
  bool is_cons() const { return tag_ == Tag::List && obj_; }

  std::int64_t as_int() const { return payload_; }
  bool as_bool() const { return payload_ != 0; }
  std::int64_t as_pid() const { return payload_; }
  std::int64_t as_ref() const { return payload_; }
  const std::string& as_str() const;
  const std::vector<Value>& items() const;
  const Value& head() const;
  const Value& tail() const;
  const ClosureObj& as_closure() const;

  /// Collects a proper list into a vector; the value must be a List.
  std::vector<Value> list_items() const;
  std::size_t list_length() const;

 private:
  friend struct ConsObj;
  Value(Tag t, std::int64_t p) : tag_(t), payload_(p) {}
  Value(Tag t, std::shared_ptr<const HeapObject> o) : tag_(t), obj_(std::move(o)) {}

  Tag tag_;
  std::int64_t payload_ = 0;
  std::shared_ptr<const HeapObject> obj_;
};

struct HeapObject {
  virtual ~HeapObject() = default;
};

struct StrObj final : HeapObject {
  explicit StrObj(std::string s) : text(std::move(s)) {}
  std::string text;
};

struct TupleObj final : HeapObject {
  explicit TupleObj(std::vector<Value> v) : items(std::move(v)) {}
  std::vector<Value> items;
};

struct ConsObj final : HeapObject {
  ConsObj(Value h, Value t) : head(std::move(h)), tail(std::move(t)) {}
  ~ConsObj() override;
  Value head;
  Value tail;
};

struct ClosureObj final : HeapObject {
  int fn = 0;
  std::shared_ptr<const std::string> name;
  int arity = 0;
  std::vector<Value> captures;
  std::int64_t id = 0;
  std::int64_t owner = 0;
};

/// Structural equality; closures compare by (owner, id), refs by cell id.
bool value_equal(const Value& a, const Value& b);

/// Guest-accounted allocation units of a value.
std::int64_t value_size(const Value& v);

/// Canonical rendering used in traces, reports and golden files.
std::string format_value(const Value& v);

/// Renders a value as guest source text that parses back to an equal value.
/// Only defined for values without closures, pids or refs.
std::string value_to_source(const Value& v);

std::string quote_string(std::string_view s);

}  // namespace gl
