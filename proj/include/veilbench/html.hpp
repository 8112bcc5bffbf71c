#pragma once

// Tolerant (tag-soup) HTML parsing plus the visibility model used everywhere
// else: a page is reduced to (raw source, rendered visible text).
//
// The parser never fails: malformed input surfaces as Diagnostics with byte
// offsets and the best-effort tree is returned anyway.
//
// Visibility rules, applied during extraction:
//   (a) the entire <head> subtree is hidden
//   (b) script / style / template / noscript elements are hidden
//   (c) comment nodes are hidden
//   (d) inline style display:none, visibility:hidden or opacity:0 hides the
//       element and all descendants (case/whitespace tolerant)
//   (e) the `hidden` attribute hides the element and all descendants
// Attribute values (alt, aria-label, title, meta content, ...) are never
// emitted as visible text. Only inline styles are honored; there is no CSS
// cascade. opacity counts as hidden at exactly zero.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "veilbench/common.hpp"

namespace veilbench::html {

// ---------------------------------------------------------------------------
// DOM
// ---------------------------------------------------------------------------

enum class NodeKind { Document, Element, Text, Comment, Doctype };

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct DomNode {
  NodeKind kind = NodeKind::Document;
  std::string name;  // elements only; lowercase
  std::vector<std::pair<std::string, std::string>> attributes;  // ordered
  std::vector<DomNode> children;
  std::string text;  // Text: decoded; Comment/Doctype: verbatim payload
  SourceSpan span;       // full extent in the source
  SourceSpan open_span;  // elements: the start tag's extent

  const std::string* attr(std::string_view n) const {
    for (const auto& [k, v] : attributes)
      if (k == n) return &v;
    return nullptr;
  }
  bool has_attr(std::string_view n) const { return attr(n) != nullptr; }
};

enum class DiagCode {
  ImplicitClose,
  StrayEndTag,
  UnknownEntity,
  InvalidCharRef,
  UnterminatedComment,
  UnterminatedTag,
};

struct Diagnostic {
  DiagCode code;
  std::size_t offset;
  std::string message;
};

struct ParseResult {
  std::string source;
  DomNode root;  // Document node
  std::vector<Diagnostic> diagnostics;
};

// ---------------------------------------------------------------------------
// element classification tables
// ---------------------------------------------------------------------------

inline bool is_void_element(std::string_view n) {
  static const std::set<std::string, std::less<>> k{
      "area", "base", "br",   "col",  "embed",  "hr",  "img",
      "input", "link", "meta", "source", "track", "wbr"};
  return k.count(n) > 0;
}

// content is raw text until the matching end tag
inline bool is_raw_text_element(std::string_view n) {
  return n == "script" || n == "style" || n == "textarea" || n == "title";
}

inline bool is_block_element(std::string_view n) {
  static const std::set<std::string, std::less<>> k{
      "address", "article", "aside",   "blockquote", "body",    "br",
      "dd",      "details", "div",     "dl",         "dt",      "fieldset",
      "figcaption", "figure", "footer", "form",      "h1",      "h2",
      "h3",      "h4",      "h5",      "h6",         "header",  "hr",
      "html",    "li",      "main",    "nav",        "ol",      "p",
      "pre",     "section", "summary", "table",      "tbody",   "tfoot",
      "thead",   "tr",      "ul"};
  return k.count(n) > 0;
}

namespace detail {

inline bool closes_p(std::string_view tag) {
  static const std::set<std::string, std::less<>> k{
      "address", "article", "aside", "blockquote", "details", "div",
      "dl",      "fieldset", "figure", "footer",   "form",    "h1",
      "h2",      "h3",      "h4",    "h5",         "h6",      "header",
      "hr",      "main",    "nav",   "ol",         "p",       "pre",
      "section", "table",   "ul"};
  return k.count(tag) > 0;
}

// start tag `incoming` implicitly closes the open element `open`
inline bool implicitly_closes(std::string_view open, std::string_view incoming) {
  if (open == "p") return closes_p(incoming);
  if (open == "li") return incoming == "li";
  if (open == "option") return incoming == "option";
  if (open == "tr") return incoming == "tr";
  if (open == "td" || open == "th")
    return incoming == "td" || incoming == "th" || incoming == "tr";
  if (open == "dd" || open == "dt")
    return incoming == "dd" || incoming == "dt";
  return false;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

inline bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

// Decodes amp/lt/gt/quot/apos plus numeric references. Unknown named
// entities and invalid numeric references pass through verbatim (with a
// replacement char for the latter) and leave a diagnostic. A bare '&' that
// does not look like an entity is literal text, no diagnostic.
inline std::string decode_entities(std::string_view raw, std::size_t base,
                                   std::vector<Diagnostic>* diags) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    char c = raw[i];
    if (c != '&') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t semi = raw.find(';', i + 1);
    if (semi == std::string_view::npos || semi == i + 1 || semi - i > 32) {
      out.push_back('&');
      ++i;
      continue;
    }
    std::string_view body = raw.substr(i + 1, semi - i - 1);
    if (body[0] == '#') {
      std::uint64_t cp = 0;
      bool ok = body.size() > 1;
      bool hex = body.size() > 2 && (body[1] == 'x' || body[1] == 'X');
      std::size_t k = hex ? 2 : 1;
      if (k >= body.size()) ok = false;
      for (; ok && k < body.size(); ++k) {
        char d = body[k];
        std::uint64_t v;
        if (d >= '0' && d <= '9') v = static_cast<std::uint64_t>(d - '0');
        else if (hex && d >= 'a' && d <= 'f') v = static_cast<std::uint64_t>(d - 'a' + 10);
        else if (hex && d >= 'A' && d <= 'F') v = static_cast<std::uint64_t>(d - 'A' + 10);
        else { ok = false; break; }
        cp = cp * (hex ? 16 : 10) + v;
        if (cp > 0x10ffff) { ok = false; break; }
      }
      if (ok && cp > 0 && cp <= 0x10ffff && !(cp >= 0xd800 && cp <= 0xdfff)) {
        append_utf8(out, static_cast<std::uint32_t>(cp));
      } else {
        if (diags)
          diags->push_back({DiagCode::InvalidCharRef, base + i,
                            "invalid numeric character reference"});
        append_utf8(out, 0xfffd);
      }
      i = semi + 1;
      continue;
    }
    bool named_shape = true;
    for (char d : body)
      if (!is_alnum(d)) { named_shape = false; break; }
    if (!named_shape) {
      out.push_back('&');
      ++i;
      continue;
    }
    if (body == "amp") out.push_back('&');
    else if (body == "lt") out.push_back('<');
    else if (body == "gt") out.push_back('>');
    else if (body == "quot") out.push_back('"');
    else if (body == "apos") out.push_back('\'');
    else {
      if (diags)
        diags->push_back({DiagCode::UnknownEntity, base + i,
                          "unknown entity &" + std::string(body) + ";"});
      out.push_back('&');
      out.append(body);
      out.push_back(';');
      i = semi + 1;
      continue;
    }
    i = semi + 1;
  }
  return out;
}

inline bool is_tag_name_char(char c) {
  return is_alnum(c) || c == '-' || c == '_' || c == ':';
}

class Parser {
public:
  explicit Parser(std::string_view in) : in_(in) {
    stack_.emplace_back();  // document node
    stack_.back().kind = NodeKind::Document;
    stack_.back().span = {0, in.size()};
  }

  ParseResult run() {
    while (pos_ < in_.size()) {
      if (in_[pos_] == '<') {
        dispatch_markup();
      } else {
        text_run();
      }
    }
    // elements still open at end of input close silently (HTML allows
    // omitting </body> and </html>)
    while (stack_.size() > 1) close_top(in_.size());
    ParseResult res;
    res.source.assign(in_.data(), in_.size());
    res.root = std::move(stack_.front());
    res.diagnostics = std::move(diags_);
    return res;
  }

private:
  std::string_view in_;
  std::size_t pos_ = 0;
  std::vector<DomNode> stack_;
  std::vector<Diagnostic> diags_;

  void diag(DiagCode code, std::size_t off, std::string msg) {
    diags_.push_back({code, off, std::move(msg)});
  }

  void close_top(std::size_t end) {
    DomNode n = std::move(stack_.back());
    stack_.pop_back();
    n.span.end = end;
    stack_.back().children.push_back(std::move(n));
  }

  void add_text(std::size_t begin, std::size_t end, bool decode) {
    if (begin >= end) return;
    DomNode t;
    t.kind = NodeKind::Text;
    std::string_view raw = in_.substr(begin, end - begin);
    t.text = decode ? decode_entities(raw, begin, &diags_) : std::string(raw);
    t.span = {begin, end};
    stack_.back().children.push_back(std::move(t));
  }

  void text_run() {
    std::size_t start = pos_;
    std::size_t lt = in_.find('<', pos_);
    if (lt == std::string_view::npos) lt = in_.size();
    pos_ = lt;
    add_text(start, lt, true);
  }

  void dispatch_markup() {
    std::size_t start = pos_;  // at '<'
    if (in_.compare(pos_, 4, "<!--") == 0) {
      comment(start);
    } else if (pos_ + 1 < in_.size() &&
               (in_[pos_ + 1] == '!' || in_[pos_ + 1] == '?')) {
      declaration(start);
    } else if (pos_ + 1 < in_.size() && in_[pos_ + 1] == '/') {
      end_tag(start);
    } else if (pos_ + 1 < in_.size() && is_alpha(in_[pos_ + 1])) {
      start_tag(start);
    } else {
      // '<' followed by anything else is literal text
      std::size_t lt = in_.find('<', pos_ + 1);
      if (lt == std::string_view::npos) lt = in_.size();
      add_text(start, lt, true);
      pos_ = lt;
    }
  }

  static bool is_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }

  void comment(std::size_t start) {
    std::size_t body = start + 4;
    std::size_t close = in_.find("-->", body);
    DomNode n;
    n.kind = NodeKind::Comment;
    if (close == std::string_view::npos) {
      diag(DiagCode::UnterminatedComment, start, "unterminated comment");
      n.text = std::string(in_.substr(body));
      n.span = {start, in_.size()};
      pos_ = in_.size();
    } else {
      n.text = std::string(in_.substr(body, close - body));
      n.span = {start, close + 3};
      pos_ = close + 3;
    }
    stack_.back().children.push_back(std::move(n));
  }

  // <!doctype ...>, <![CDATA[...]]>, <?...> all land here
  void declaration(std::size_t start) {
    std::size_t gt = in_.find('>', start + 2);
    DomNode n;
    n.kind = in_[start + 1] == '!' ? NodeKind::Doctype : NodeKind::Comment;
    if (gt == std::string_view::npos) {
      diag(DiagCode::UnterminatedTag, start, "unterminated markup declaration");
      n.text = std::string(in_.substr(start + 2));
      n.span = {start, in_.size()};
      pos_ = in_.size();
    } else {
      n.text = std::string(in_.substr(start + 2, gt - start - 2));
      n.span = {start, gt + 1};
      pos_ = gt + 1;
    }
    stack_.back().children.push_back(std::move(n));
  }

  void end_tag(std::size_t start) {
    std::size_t i = start + 2;
    std::size_t name_begin = i;
    while (i < in_.size() && is_tag_name_char(in_[i])) ++i;
    std::string name = veilbench::ascii_lower(in_.substr(name_begin, i - name_begin));
    std::size_t gt = in_.find('>', i);
    std::size_t end;
    if (gt == std::string_view::npos) {
      diag(DiagCode::UnterminatedTag, start, "unterminated end tag");
      end = in_.size();
    } else {
      end = gt + 1;
    }
    pos_ = end;
    if (name.empty()) {
      diag(DiagCode::StrayEndTag, start, "end tag with no name ignored");
      return;
    }
    // find the matching open element, top down
    std::size_t match = 0;
    bool found = false;
    for (std::size_t k = stack_.size(); k-- > 1;) {
      if (stack_[k].name == name) {
        match = k;
        found = true;
        break;
      }
    }
    if (!found) {
      diag(DiagCode::StrayEndTag, start,
           "stray end tag </" + name + "> ignored");
      return;
    }
    while (stack_.size() - 1 > match) {
      diag(DiagCode::ImplicitClose, start,
           "unclosed <" + stack_.back().name + "> closed by </" + name + ">");
      close_top(start);
    }
    close_top(end);
  }

  void start_tag(std::size_t start) {
    std::size_t i = start + 1;
    std::size_t name_begin = i;
    while (i < in_.size() && is_tag_name_char(in_[i])) ++i;
    std::string name = veilbench::ascii_lower(in_.substr(name_begin, i - name_begin));

    DomNode n;
    n.kind = NodeKind::Element;
    n.name = name;

    bool self_closing = false;
    bool terminated = false;
    while (i < in_.size()) {
      while (i < in_.size() && veilbench::is_ws(in_[i])) ++i;
      if (i >= in_.size()) break;
      if (in_[i] == '>') {
        ++i;
        terminated = true;
        break;
      }
      if (in_[i] == '/') {
        ++i;
        if (i < in_.size() && in_[i] == '>') {
          ++i;
          self_closing = true;
          terminated = true;
          break;
        }
        continue;  // stray slash inside tag
      }
      parse_attribute(n, i);
    }
    if (!terminated)
      diag(DiagCode::UnterminatedTag, start, "unterminated start tag <" + name + ">");

    n.span = {start, i};       // grows when children arrive
    n.open_span = {start, i};
    pos_ = i;

    // implicit closes forced by this start tag
    while (stack_.size() > 1 && implicitly_closes(stack_.back().name, name)) {
      diag(DiagCode::ImplicitClose, start,
           "<" + name + "> implicitly closes <" + stack_.back().name + ">");
      close_top(start);
    }

    if (is_void_element(name) || self_closing) {
      stack_.back().children.push_back(std::move(n));
      return;
    }

    stack_.push_back(std::move(n));

    if (is_raw_text_element(name) && terminated) raw_text_content(name);
  }

  void parse_attribute(DomNode& n, std::size_t& i) {
    std::size_t name_begin = i;
    while (i < in_.size() && !veilbench::is_ws(in_[i]) && in_[i] != '=' &&
           in_[i] != '>' && in_[i] != '/')
      ++i;
    std::string name = veilbench::ascii_lower(in_.substr(name_begin, i - name_begin));
    if (name.empty()) {
      ++i;  // defensive: never stall
      return;
    }
    std::string value;
    std::size_t j = i;
    while (j < in_.size() && veilbench::is_ws(in_[j])) ++j;
    if (j < in_.size() && in_[j] == '=') {
      ++j;
      while (j < in_.size() && veilbench::is_ws(in_[j])) ++j;
      if (j < in_.size() && (in_[j] == '"' || in_[j] == '\'')) {
        char q = in_[j];
        std::size_t vbegin = ++j;
        std::size_t close = in_.find(q, j);
        if (close == std::string_view::npos) {
          diag(DiagCode::UnterminatedTag, vbegin, "unterminated attribute value");
          value = decode_entities(in_.substr(vbegin), vbegin, &diags_);
          j = in_.size();
        } else {
          value = decode_entities(in_.substr(vbegin, close - vbegin), vbegin, &diags_);
          j = close + 1;
        }
      } else {
        std::size_t vbegin = j;
        while (j < in_.size() && !veilbench::is_ws(in_[j]) && in_[j] != '>')
          ++j;
        value = decode_entities(in_.substr(vbegin, j - vbegin), vbegin, &diags_);
      }
      i = j;
    }
    // first occurrence wins
    if (!n.has_attr(name)) n.attributes.emplace_back(std::move(name), std::move(value));
  }

  void raw_text_content(const std::string& name) {
    // scan for the matching case-insensitive end tag
    std::size_t content_begin = pos_;
    std::string needle = "</" + name;
    std::size_t i = pos_;
    std::size_t content_end = in_.size();
    while (i + needle.size() <= in_.size()) {
      std::size_t k = 0;
      while (k < needle.size() &&
             veilbench::ascii_lower(in_[i + k]) == needle[k])
        ++k;
      if (k == needle.size()) {
        char after = i + k < in_.size() ? in_[i + k] : '>';
        if (after == '>' || veilbench::is_ws(after) || after == '/') {
          content_end = i;
          break;
        }
      }
      ++i;
    }
    bool decode = name == "title" || name == "textarea";
    if (content_end > content_begin) {
      DomNode t;
      t.kind = NodeKind::Text;
      std::string_view raw = in_.substr(content_begin, content_end - content_begin);
      t.text = decode ? decode_entities(raw, content_begin, &diags_)
                      : std::string(raw);
      t.span = {content_begin, content_end};
      stack_.back().children.push_back(std::move(t));
    }
    if (content_end == in_.size()) {
      pos_ = in_.size();
      return;  // closed at end of input by run()
    }
    std::size_t gt = in_.find('>', content_end);
    std::size_t tag_end = gt == std::string_view::npos ? in_.size() : gt + 1;
    if (gt == std::string_view::npos)
      diag(DiagCode::UnterminatedTag, content_end, "unterminated end tag");
    pos_ = tag_end;
    close_top(tag_end);
  }
};

}  // namespace detail

inline ParseResult parse_html(std::string_view input) {
  return detail::Parser(input).run();
}

// ---------------------------------------------------------------------------
// visibility
// ---------------------------------------------------------------------------

enum class HiddenReason {
  HeadSubtree,
  NonContentElement,  // script/style/template/noscript
  CommentNode,
  DisplayNone,
  VisibilityHidden,
  OpacityZero,
  HiddenAttribute,
};

inline const char* to_string(HiddenReason r) {
  switch (r) {
    case HiddenReason::HeadSubtree: return "head_subtree";
    case HiddenReason::NonContentElement: return "non_content_element";
    case HiddenReason::CommentNode: return "comment";
    case HiddenReason::DisplayNone: return "display_none";
    case HiddenReason::VisibilityHidden: return "visibility_hidden";
    case HiddenReason::OpacityZero: return "opacity_zero";
    case HiddenReason::HiddenAttribute: return "hidden_attr";
  }
  return "?";
}

struct VisibilityVerdict {
  bool visible = true;
  HiddenReason reason = HiddenReason::DisplayNone;  // meaningful when hidden
};

namespace detail {

struct StyleDecl {
  std::string property;  // lowercase, trimmed
  std::string value;     // trimmed, original case
};

inline std::vector<StyleDecl> parse_inline_style(std::string_view style) {
  std::vector<StyleDecl> out;
  std::size_t i = 0;
  while (i <= style.size()) {
    std::size_t semi = style.find(';', i);
    if (semi == std::string_view::npos) semi = style.size();
    std::string_view decl = style.substr(i, semi - i);
    std::size_t colon = decl.find(':');
    if (colon != std::string_view::npos) {
      std::string_view prop = veilbench::trim(decl.substr(0, colon));
      std::string_view val = veilbench::trim(decl.substr(colon + 1));
      if (!prop.empty())
        out.push_back({veilbench::ascii_lower(prop), std::string(val)});
    }
    if (semi >= style.size()) break;
    i = semi + 1;
  }
  return out;
}

inline bool is_zero_number(std::string_view v) {
  // accepts 0, 0.0, .0, 0e3 ... ; anything unparseable is not zero
  std::string s(veilbench::trim(v));
  if (s.empty()) return false;
  char* end = nullptr;
  double d = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  return d == 0.0;
}

}  // namespace detail

// Local verdict for one element; ancestry is applied by the traversal.
inline VisibilityVerdict classify_visibility(const DomNode& el) {
  if (el.kind != NodeKind::Element) return {true, HiddenReason::DisplayNone};
  if (el.name == "head") return {false, HiddenReason::HeadSubtree};
  if (el.name == "script" || el.name == "style" || el.name == "template" ||
      el.name == "noscript")
    return {false, HiddenReason::NonContentElement};
  if (const std::string* style = el.attr("style")) {
    for (const auto& d : detail::parse_inline_style(*style)) {
      std::string v = veilbench::ascii_lower(veilbench::trim(d.value));
      if (d.property == "display" && v == "none")
        return {false, HiddenReason::DisplayNone};
      if (d.property == "visibility" && v == "hidden")
        return {false, HiddenReason::VisibilityHidden};
      if (d.property == "opacity" && detail::is_zero_number(v))
        return {false, HiddenReason::OpacityZero};
    }
  }
  if (el.has_attr("hidden")) return {false, HiddenReason::HiddenAttribute};
  return {true, HiddenReason::DisplayNone};
}

struct HiddenRegion {
  HiddenReason reason;
  SourceSpan span;
};

struct ExtractedContent {
  std::string raw_html;
  std::string visible_text;
  std::vector<HiddenRegion> hidden_regions;
};

namespace detail {

class TextBuilder {
public:
  void block_boundary() {
    if (!out_.empty()) pending_newline_ = true;
  }
  void text(std::string_view s) {
    for (char c : s) {
      if (veilbench::is_ws(c)) {
        if (!out_.empty()) pending_space_ = true;
        continue;
      }
      if (pending_newline_) {
        out_.push_back('\n');
      } else if (pending_space_) {
        out_.push_back(' ');
      }
      pending_newline_ = pending_space_ = false;
      out_.push_back(c);
    }
  }
  std::string take() { return std::move(out_); }

private:
  std::string out_;
  bool pending_space_ = false;
  bool pending_newline_ = false;
};

inline void extract_walk(const DomNode& node, TextBuilder& tb,
                         std::vector<HiddenRegion>& hidden) {
  switch (node.kind) {
    case NodeKind::Text:
      tb.text(node.text);
      return;
    case NodeKind::Comment:
      hidden.push_back({HiddenReason::CommentNode, node.span});
      return;
    case NodeKind::Doctype:
      return;
    case NodeKind::Document:
      for (const DomNode& c : node.children) extract_walk(c, tb, hidden);
      return;
    case NodeKind::Element:
      break;
  }
  VisibilityVerdict v = classify_visibility(node);
  if (!v.visible) {
    hidden.push_back({v.reason, node.span});
    return;
  }
  bool block = is_block_element(node.name);
  if (block) tb.block_boundary();
  for (const DomNode& c : node.children) extract_walk(c, tb, hidden);
  if (block) tb.block_boundary();
}

}  // namespace detail

inline ExtractedContent extract_visible_text(const DomNode& root,
                                             std::string_view source) {
  ExtractedContent out;
  out.raw_html.assign(source.data(), source.size());
  detail::TextBuilder tb;
  detail::extract_walk(root, tb, out.hidden_regions);
  out.visible_text = tb.take();
  return out;
}

inline ExtractedContent extract_visible_text(const ParseResult& doc) {
  return extract_visible_text(doc.root, doc.source);
}

// convenience: parse + extract in one step
inline ExtractedContent extract_from_source(std::string_view html) {
  ParseResult pr = parse_html(html);
  return extract_visible_text(pr);
}

// ---------------------------------------------------------------------------
// small traversal helpers shared by the injector and scanner
// ---------------------------------------------------------------------------

template <class Fn>
inline void walk(const DomNode& node, Fn&& fn) {
  fn(node);
  for (const DomNode& c : node.children) walk(c, fn);
}

// collect pointers to every element satisfying pred, in document order
template <class Pred>
inline std::vector<const DomNode*> find_elements(const DomNode& root,
                                                 Pred&& pred) {
  std::vector<const DomNode*> out;
  walk(root, [&](const DomNode& n) {
    if (n.kind == NodeKind::Element && pred(n)) out.push_back(&n);
  });
  return out;
}

inline const DomNode* first_element_named(const DomNode& root,
                                          std::string_view name) {
  auto v = find_elements(root, [&](const DomNode& n) { return n.name == name; });
  return v.empty() ? nullptr : v.front();
}

// concatenated decoded text of all descendant text nodes
inline std::string subtree_text(const DomNode& node) {
  std::string out;
  walk(node, [&](const DomNode& n) {
    if (n.kind == NodeKind::Text) out += n.text;
  });
  return out;
}

}  // namespace veilbench::html
