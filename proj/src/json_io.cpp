#include "mcensus/json_io.hpp"

#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <vector>

namespace mcensus {

namespace {

/// Input iterator over a character buffer that publishes how far the parser
/// has read.
class CountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = char const*;
  using reference = char const&;

  CountingIterator() = default;
  CountingIterator(char const* p, std::size_t* counter) : p_(p), counter_(counter) {}

  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    ++p_;
    if (counter_) ++*counter_;
    return *this;
  }
  CountingIterator operator++(int) {
    auto copy = *this;
    ++*this;
    return copy;
  }
  bool operator==(CountingIterator const& rhs) const { return p_ == rhs.p_; }

 private:
  char const* p_ = nullptr;
  std::size_t* counter_ = nullptr;
};

SourcePosition offset_to_position(std::string_view text, std::size_t offset) {
  SourcePosition pos;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

std::string escape_pointer_token(std::string const& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

/// Builds the DOM while recording, for each value, the offset of its last
/// character (scalars) or opening bracket (containers).
class PositionSax {
 public:
  PositionSax(std::string_view text, std::size_t const* counter,
              std::map<std::string, std::size_t>* offsets)
      : text_(text), counter_(counter), offsets_(offsets) {}

  Json result;
  std::size_t error_offset = 0;
  std::string error_message;

  bool null() { return scalar(Json(nullptr)); }
  bool boolean(bool v) { return scalar(Json(v)); }
  bool number_integer(Json::number_integer_t v) { return scalar(Json(v)); }
  bool number_unsigned(Json::number_unsigned_t v) { return scalar(Json(v)); }
  bool number_float(Json::number_float_t v, std::string const&) { return scalar(Json(v)); }
  bool string(std::string& v) { return scalar(Json(v)); }
  bool binary(Json::binary_t& v) { return scalar(Json(v)); }

  bool start_object(std::size_t) { return open(Json::object()); }
  bool start_array(std::size_t) { return open(Json::array()); }
  bool end_object() { return close(); }
  bool end_array() { return close(); }

  bool key(std::string& k) {
    stack_.back().pending_key = k;
    return true;
  }

  bool parse_error(std::size_t position, std::string const&,
                   nlohmann::detail::exception const& ex) {
    error_offset = position == 0 ? 0 : position - 1;
    error_message = ex.what();
    return false;
  }

 private:
  struct Frame {
    Json value;
    std::string pointer;
    std::string pending_key;
  };

  std::string next_pointer() const {
    if (stack_.empty()) return "";
    auto const& top = stack_.back();
    if (top.value.is_array()) return top.pointer + "/" + std::to_string(top.value.size());
    return top.pointer + "/" + escape_pointer_token(top.pending_key);
  }

  std::size_t scalar_end() const {
    // The lexer may already hold one lookahead character.
    std::size_t off = *counter_ == 0 ? 0 : *counter_ - 1;
    while (off > 0) {
      char const c = text_[off];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',' || c == ']' || c == '}')
        --off;
      else
        break;
    }
    return off;
  }

  void attach(Json value) {
    if (stack_.empty()) {
      result = std::move(value);
      return;
    }
    auto& top = stack_.back();
    if (top.value.is_array())
      top.value.push_back(std::move(value));
    else
      top.value[top.pending_key] = std::move(value);
  }

  bool scalar(Json v) {
    (*offsets_)[next_pointer()] = scalar_end();
    attach(std::move(v));
    return true;
  }

  bool open(Json container) {
    auto ptr = next_pointer();
    (*offsets_)[ptr] = *counter_ == 0 ? 0 : *counter_ - 1;
    stack_.push_back({std::move(container), std::move(ptr), {}});
    return true;
  }

  bool close() {
    auto frame = std::move(stack_.back());
    stack_.pop_back();
    attach(std::move(frame.value));
    return true;
  }

  std::string_view text_;
  std::size_t const* counter_;
  std::map<std::string, std::size_t>* offsets_;
  std::vector<Frame> stack_;
};

}  // namespace

PositionedJson PositionedJson::parse(std::string_view text, std::string source_name) {
  PositionedJson out;
  out.source_ = std::move(source_name);
  std::size_t counter = 0;
  std::map<std::string, std::size_t> offsets;
  PositionSax sax(text, &counter, &offsets);
  CountingIterator first(text.data(), &counter);
  CountingIterator last(text.data() + text.size(), nullptr);
  bool const ok = Json::sax_parse(first, last, &sax);
  if (!ok) {
    auto const pos = offset_to_position(text, sax.error_offset);
    throw ValidationError(out.source_ + ":" + std::to_string(pos.line) + ":" +
                          std::to_string(pos.column) + ": JSON syntax error: " +
                          sax.error_message);
  }
  out.root_ = std::move(sax.result);
  for (auto const& [ptr, off] : offsets) out.positions_[ptr] = offset_to_position(text, off);
  return out;
}

PositionedJson PositionedJson::load_file(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

SourcePosition PositionedJson::position(std::string const& pointer) const {
  // Fall back to the nearest recorded ancestor.
  std::string p = pointer;
  while (true) {
    if (auto it = positions_.find(p); it != positions_.end()) return it->second;
    auto const slash = p.rfind('/');
    if (slash == std::string::npos) return {};
    p.resize(slash);
  }
}

void PositionedJson::fail(std::string const& pointer, std::string const& message) const {
  auto const pos = position(pointer);
  throw ValidationError(source_ + ":" + std::to_string(pos.line) + ":" +
                        std::to_string(pos.column) + ": " + message + " (at '" +
                        (pointer.empty() ? std::string("/") : pointer) + "')");
}

}  // namespace mcensus
