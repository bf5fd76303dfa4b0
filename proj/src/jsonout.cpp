#include "cmcfol/jsonout.hpp"

#include <cmath>
#include <cstdio>

#include "cmcfol/error.hpp"

namespace cmcfol {

JsonOut& JsonOut::operator[](const std::string& key) {
  if (!std::holds_alternative<Object>(v_))
    throw_usage("JsonOut: indexing a non-object");
  return std::get<Object>(v_).m[key];
}

void JsonOut::push_back(JsonOut v) {
  if (!std::holds_alternative<Array>(v_))
    throw_usage("JsonOut: push_back on a non-array");
  std::get<Array>(v_).v.push_back(std::move(v));
}

namespace {

void write_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void write_number(std::string& out, double d) {
  if (!std::isfinite(d)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  out += buf;
}

void newline_indent(std::string& out, int indent, int depth) {
  if (indent <= 0) return;
  out += '\n';
  out.append(std::size_t(indent) * depth, ' ');
}

}  // namespace

void JsonOut::write(std::string& out, int indent, int depth) const {
  if (std::holds_alternative<std::nullptr_t>(v_)) {
    out += "null";
  } else if (std::holds_alternative<bool>(v_)) {
    out += std::get<bool>(v_) ? "true" : "false";
  } else if (std::holds_alternative<double>(v_)) {
    write_number(out, std::get<double>(v_));
  } else if (std::holds_alternative<std::string>(v_)) {
    write_string(out, std::get<std::string>(v_));
  } else if (std::holds_alternative<Object>(v_)) {
    const auto& m = std::get<Object>(v_).m;
    out += '{';
    bool first = true;
    for (const auto& [k, v] : m) {
      if (!first) out += ',';
      first = false;
      newline_indent(out, indent, depth + 1);
      write_string(out, k);
      out += indent > 0 ? ": " : ":";
      v.write(out, indent, depth + 1);
    }
    if (!m.empty()) newline_indent(out, indent, depth);
    out += '}';
  } else {
    const auto& a = std::get<Array>(v_).v;
    out += '[';
    bool first = true;
    for (const auto& v : a) {
      if (!first) out += ',';
      first = false;
      newline_indent(out, indent, depth + 1);
      v.write(out, indent, depth + 1);
    }
    if (!a.empty()) newline_indent(out, indent, depth);
    out += ']';
  }
}

std::string JsonOut::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  return out;
}

}  // namespace cmcfol
