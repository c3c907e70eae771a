#include "gl/value.hpp"

#include <stdexcept>

namespace gl {

std::string_view tag_name(Tag t) {
  switch (t) {
    case Tag::Int: return "int";
    case Tag::Bool: return "bool";
    case Tag::Str: return "str";
    case Tag::Unit: return "unit";
    case Tag::Tuple: return "tuple";
    case Tag::List: return "list";
    case Tag::Closure: return "closure";
    case Tag::Pid: return "pid";
    case Tag::Ref: return "ref";
  }
  return "?";
}

Value Value::str(std::string s) {
  return Value(Tag::Str, std::make_shared<const StrObj>(std::move(s)));
}

Value Value::tuple(std::vector<Value> items) {
  return Value(Tag::Tuple, std::make_shared<const TupleObj>(std::move(items)));
}

Value Value::cons(Value head, Value tail) {
  return Value(Tag::List, std::make_shared<const ConsObj>(std::move(head), std::move(tail)));
}

Value Value::list(std::span<const Value> items) {
  Value acc = nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) acc = cons(*it, std::move(acc));
  return acc;
}

Value Value::closure(int fn, std::shared_ptr<const std::string> name, int arity,
                     std::vector<Value> captures, std::int64_t id, std::int64_t owner) {
  auto c = std::make_shared<ClosureObj>();
  c->fn = fn;
  c->name = std::move(name);
  c->arity = arity;
  c->captures = std::move(captures);
  c->id = id;
  c->owner = owner;
  return Value(Tag::Closure, std::shared_ptr<const HeapObject>(std::move(c)));
}

const std::string& Value::as_str() const { return static_cast<const StrObj&>(*obj_).text; }
const std::vector<Value>& Value::items() const {
  return static_cast<const TupleObj&>(*obj_).items;
}
const Value& Value::head() const { return static_cast<const ConsObj&>(*obj_).head; }
const Value& Value::tail() const { return static_cast<const ConsObj&>(*obj_).tail; }
const ClosureObj& Value::as_closure() const { return static_cast<const ClosureObj&>(*obj_); }

std::vector<Value> Value::list_items() const {
  std::vector<Value> out;
  for (const Value* p = this; p->is_cons(); p = &p->tail()) out.push_back(p->head());
  return out;
}

std::size_t Value::list_length() const {
  std::size_t n = 0;
  for (const Value* p = this; p->is_cons(); p = &p->tail()) ++n;
  return n;
}

// Long lists would otherwise be released recursively through their tails.
ConsObj::~ConsObj() {
  Value next = std::move(tail);
  while (next.is_cons() && next.obj_.use_count() == 1) {
    auto& cell = const_cast<ConsObj&>(static_cast<const ConsObj&>(*next.obj_));
    Value after = std::move(cell.tail);
    next = std::move(after);
  }
}

namespace {

bool equal_impl(const Value& a, const Value& b) {
  const Value* x = &a;
  const Value* y = &b;
  for (;;) {
    if (x->tag() != y->tag()) return false;
    switch (x->tag()) {
      case Tag::Int:
      case Tag::Bool:
      case Tag::Pid:
      case Tag::Ref:
        return x->as_int() == y->as_int();
      case Tag::Unit:
        return true;
      case Tag::Str:
        return x->as_str() == y->as_str();
      case Tag::Closure:
        return x->as_closure().owner == y->as_closure().owner &&
               x->as_closure().id == y->as_closure().id;
      case Tag::Tuple: {
        const auto& xs = x->items();
        const auto& ys = y->items();
        if (xs.size() != ys.size()) return false;
        for (std::size_t i = 0; i < xs.size(); ++i)
          if (!equal_impl(xs[i], ys[i])) return false;
        return true;
      }
      case Tag::List:
        if (x->is_nil() || y->is_nil()) return x->is_nil() && y->is_nil();
        if (!equal_impl(x->head(), y->head())) return false;
        x = &x->tail();
        y = &y->tail();
        continue;
    }
    return false;
  }
}

void escape_into(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
}

void format_into(std::string& out, const Value& v, bool as_source) {
  switch (v.tag()) {
    case Tag::Int: out += std::to_string(v.as_int()); return;
    case Tag::Bool: out += v.as_bool() ? "true" : "false"; return;
    case Tag::Unit: out += "()"; return;
    case Tag::Str:
      out += '"';
      escape_into(out, v.as_str());
      out += '"';
      return;
    case Tag::Tuple: {
      const auto& xs = v.items();
      out += '(';
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        format_into(out, xs[i], as_source);
      }
      if (xs.size() <= 1) out += ',';
      out += ')';
      return;
    }
    case Tag::List: {
      out += '[';
      bool first = true;
      for (const Value* p = &v; p->is_cons(); p = &p->tail()) {
        if (!first) out += ", ";
        first = false;
        format_into(out, p->head(), as_source);
      }
      out += ']';
      return;
    }
    case Tag::Closure: {
      if (as_source) throw std::invalid_argument("closure has no source form");
      const auto& c = v.as_closure();
      out += "<fun:" + *c.name + "/" + std::to_string(c.arity) + "#" + std::to_string(c.id) + ">";
      return;
    }
    case Tag::Pid:
      if (as_source) throw std::invalid_argument("pid has no source form");
      out += "<pid:" + std::to_string(v.as_pid()) + ">";
      return;
    case Tag::Ref:
      if (as_source) throw std::invalid_argument("ref has no source form");
      out += "<ref:" + std::to_string(v.as_ref()) + ">";
      return;
  }
}

}  // namespace

bool value_equal(const Value& a, const Value& b) { return equal_impl(a, b); }

std::int64_t value_size(const Value& v) {
  switch (v.tag()) {
    case Tag::Int:
    case Tag::Bool:
    case Tag::Unit:
    case Tag::Pid:
      return 0;
    case Tag::Ref:
      return 1;
    case Tag::Str:
      return static_cast<std::int64_t>(v.as_str().size());
    case Tag::Tuple: {
      std::int64_t n = static_cast<std::int64_t>(v.items().size()) + 1;
      for (const auto& c : v.items()) n += value_size(c);
      return n;
    }
    case Tag::List: {
      std::int64_t n = 0;
      for (const Value* p = &v; p->is_cons(); p = &p->tail()) n += 2 + value_size(p->head());
      return n;
    }
    case Tag::Closure: {
      const auto& c = v.as_closure();
      std::int64_t n = static_cast<std::int64_t>(c.captures.size()) + 2;
      for (const auto& x : c.captures) n += value_size(x);
      return n;
    }
  }
  return 0;
}

std::string format_value(const Value& v) {
  std::string out;
  format_into(out, v, false);
  return out;
}

std::string value_to_source(const Value& v) {
  std::string out;
  format_into(out, v, true);
  return out;
}

std::string quote_string(std::string_view s) {
  std::string out = "\"";
  escape_into(out, s);
  out += '"';
  return out;
}

}  // namespace gl
