#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace cmcfol {

// Minimal JSON emitter for CLI output. Object keys are kept in lexicographic
// order and every floating-point number is printed with 17 significant
// digits, so identical inputs produce byte-identical output.
class JsonOut {
public:
  JsonOut() : v_(nullptr) {}
  JsonOut(std::nullptr_t) : v_(nullptr) {}
  JsonOut(bool b) : v_(b) {}
  JsonOut(double d) : v_(d) {}
  JsonOut(int i) : v_(double(i)) {}
  JsonOut(long long i) : v_(double(i)) {}
  JsonOut(std::size_t i) : v_(double(i)) {}
  JsonOut(const char* s) : v_(std::string(s)) {}
  JsonOut(std::string s) : v_(std::move(s)) {}

  static JsonOut object() {
    JsonOut j;
    j.v_ = Object{};
    return j;
  }
  static JsonOut array() {
    JsonOut j;
    j.v_ = Array{};
    return j;
  }

  JsonOut& operator[](const std::string& key);
  void push_back(JsonOut v);

  template <class It>
  static JsonOut number_array(It begin, It end) {
    JsonOut a = array();
    for (It it = begin; it != end; ++it) a.push_back(double(*it));
    return a;
  }

  std::string dump(int indent = 0) const;

private:
  struct Object;
  struct Array;
  using Value = std::variant<std::nullptr_t, bool, double, std::string,
                             Object, Array>;
  struct Object {
    std::map<std::string, JsonOut> m;
  };
  struct Array {
    std::vector<JsonOut> v;
  };
  Value v_;

  void write(std::string& out, int indent, int depth) const;
};

}  // namespace cmcfol
