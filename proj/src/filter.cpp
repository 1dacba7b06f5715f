#include <fnmatch.h>

#include <algorithm>
#include <charconv>
#include <cmath>

#include "tracekit/error.hpp"
#include "tracekit/query.hpp"

namespace tracekit {

struct FilterExpr::Node {
  enum class Kind { Atom, And, Or, Not };
  Kind kind = Kind::Atom;
  Field field = Field::Name;
  std::string attr_key;
  Op op = Op::Eq;
  std::vector<AttrValue> operands;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = FilterExpr::Node;

std::pair<Field, std::string> parse_field(std::string_view spec) {
  if (spec == "name") return {Field::Name, {}};
  if (spec == "process" || spec == "rank") return {Field::Process, {}};
  if (spec == "thread") return {Field::Thread, {}};
  if (spec == "timestamp" || spec == "time" || spec == "ts") return {Field::Timestamp, {}};
  if (spec == "event_type" || spec == "type" || spec == "kind") return {Field::EventType, {}};
  for (std::string_view prefix : {"attr:", "attr."}) {
    if (spec.starts_with(prefix) && spec.size() > prefix.size()) {
      return {Field::Attr, std::string(spec.substr(prefix.size()))};
    }
  }
  throw Error(Errc::BadExpr, "unknown field '" + std::string(spec) + "'");
}

std::string_view field_name(Field f) {
  switch (f) {
    case Field::Name: return "name";
    case Field::Process: return "process";
    case Field::Thread: return "thread";
    case Field::Timestamp: return "timestamp";
    case Field::EventType: return "event_type";
    case Field::Attr: return "attr:";
  }
  return "?";
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::In: return "in";
    case Op::Between: return "between";
    case Op::Glob: return "=~";
  }
  return "?";
}

bool is_string(const AttrValue& v) { return std::holds_alternative<std::string>(v); }

std::optional<long double> numeric(const AttrValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<long double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return static_cast<long double>(*d);
  return std::nullopt;
}

/// Three-way comparison when both sides are numbers or both strings.
std::optional<int> order(const AttrValue& a, const AttrValue& b) {
  if (is_string(a) && is_string(b)) {
    const auto c = std::get<std::string>(a).compare(std::get<std::string>(b));
    return (c > 0) - (c < 0);
  }
  auto x = numeric(a);
  auto y = numeric(b);
  if (!x || !y || std::isnan(*x) || std::isnan(*y)) return std::nullopt;
  return (*x > *y) - (*x < *y);
}

bool test(const AttrValue& value, Op op, const std::vector<AttrValue>& operands) {
  auto cmp = [&value](const AttrValue& operand) { return order(value, operand); };
  switch (op) {
    case Op::Eq: return cmp(operands[0]) == 0;
    case Op::Ne: {
      auto c = cmp(operands[0]);
      return c && *c != 0;
    }
    case Op::Lt: return cmp(operands[0]) == -1;
    case Op::Le: {
      auto c = cmp(operands[0]);
      return c && *c <= 0;
    }
    case Op::Gt: return cmp(operands[0]) == 1;
    case Op::Ge: {
      auto c = cmp(operands[0]);
      return c && *c >= 0;
    }
    case Op::In:
      return std::any_of(operands.begin(), operands.end(), [&](const auto& o) { return cmp(o) == 0; });
    case Op::Between: {
      auto lo = cmp(operands[0]);
      auto hi = cmp(operands[1]);
      return lo && hi && *lo >= 0 && *hi < 0;
    }
    case Op::Glob: {
      if (!is_string(value)) return false;
      return fnmatch(std::get<std::string>(operands[0]).c_str(), std::get<std::string>(value).c_str(), 0) == 0;
    }
  }
  return false;
}

Timestamp window_bound(const AttrValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  // Integer t satisfies t >= x exactly when t >= ceil(x).
  return static_cast<Timestamp>(std::ceil(std::get<double>(v)));
}

bool is_window(const Node& n) { return n.kind == Node::Kind::Atom && n.field == Field::Timestamp && n.op == Op::Between; }

bool eval(const Node& n, const EventTable& t, std::size_t row,
          const std::optional<std::pair<Timestamp, Timestamp>>& call) {
  switch (n.kind) {
    case Node::Kind::And: return eval(*n.lhs, t, row, call) && eval(*n.rhs, t, row, call);
    case Node::Kind::Or: return eval(*n.lhs, t, row, call) || eval(*n.rhs, t, row, call);
    case Node::Kind::Not: return !eval(*n.lhs, t, row, call);
    case Node::Kind::Atom: break;
  }
  if (is_window(n) && call && call->second > call->first) {
    return call->first < window_bound(n.operands[1]) && call->second > window_bound(n.operands[0]);
  }
  switch (n.field) {
    case Field::Name: return test(AttrValue{t.name(row)}, n.op, n.operands);
    case Field::Process: return test(AttrValue{std::int64_t{t.process(row)}}, n.op, n.operands);
    case Field::Thread: return test(AttrValue{std::int64_t{t.thread(row)}}, n.op, n.operands);
    case Field::Timestamp: return test(AttrValue{t.timestamp(row)}, n.op, n.operands);
    case Field::EventType: return test(AttrValue{std::string(to_string(t.kind(row)))}, n.op, n.operands);
    case Field::Attr: {
      const auto* v = t.attrs(row).find(n.attr_key);
      return v && test(*v, n.op, n.operands);
    }
  }
  return false;
}

std::string literal(const AttrValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), *d);
    std::string text(buf, ptr);
    if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
    return text;
  }
  std::string out = "\"";
  for (char c : std::get<std::string>(v)) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::string render(const Node& n) {
  switch (n.kind) {
    case Node::Kind::And: return "(" + render(*n.lhs) + " && " + render(*n.rhs) + ")";
    case Node::Kind::Or: return "(" + render(*n.lhs) + " || " + render(*n.rhs) + ")";
    case Node::Kind::Not: return "!" + render(*n.lhs);
    case Node::Kind::Atom: break;
  }
  std::string out(field_name(n.field));
  out += n.attr_key;
  out += ' ';
  out += op_name(n.op);
  out += ' ';
  if (n.op == Op::In || n.op == Op::Between) {
    out += '[';
    for (std::size_t k = 0; k < n.operands.size(); ++k) {
      if (k) out += ", ";
      out += literal(n.operands[k]);
    }
    out += n.op == Op::Between ? ")" : "]";
  } else {
    out += literal(n.operands[0]);
  }
  return out;
}

const Node* first_window(const Node& n) {
  if (is_window(n)) return &n;
  if (n.lhs) {
    if (const auto* w = first_window(*n.lhs)) return w;
  }
  if (n.rhs) return first_window(*n.rhs);
  return nullptr;
}

}  // namespace

FilterExpr FilterExpr::atom(std::string_view field, Op op, std::vector<AttrValue> operands) {
  auto node = std::make_shared<Node>();
  std::tie(node->field, node->attr_key) = parse_field(field);
  node->op = op;
  const std::string where = "'" + std::string(field) + " " + std::string(op_name(op)) + "'";
  const std::size_t want = op == Op::Between ? 2 : 1;
  if (op == Op::In ? operands.empty() : operands.size() != want) {
    throw Error(Errc::BadExpr, where + " takes " + (op == Op::In ? "at least 1" : std::to_string(want)) +
                                   " operand(s), got " + std::to_string(operands.size()));
  }
  const bool string_field = node->field == Field::Name || node->field == Field::EventType;
  const bool numeric_field = node->field == Field::Process || node->field == Field::Thread ||
                             node->field == Field::Timestamp;
  for (const auto& v : operands) {
    if (std::holds_alternative<double>(v) && std::isnan(std::get<double>(v))) {
      throw Error(Errc::BadExpr, where + " has a NaN operand");
    }
    if (string_field && !is_string(v)) throw Error(Errc::BadExpr, where + " needs string operands");
    if (numeric_field && is_string(v)) throw Error(Errc::BadExpr, where + " needs numeric operands");
    if (op == Op::Glob && !is_string(v)) throw Error(Errc::BadExpr, where + " needs a string pattern");
    if (node->field == Field::EventType && op != Op::Glob && !parse_event_kind(std::get<std::string>(v))) {
      throw Error(Errc::BadExpr, "unknown event type '" + std::get<std::string>(v) + "'");
    }
  }
  if (op == Op::Glob && numeric_field) throw Error(Errc::BadExpr, where + ": glob needs a string field");
  node->operands = std::move(operands);
  return FilterExpr(std::move(node));
}

FilterExpr operator&&(const FilterExpr& a, const FilterExpr& b) {
  auto node = std::make_shared<Node>();
  node->kind = Node::Kind::And;
  node->lhs = a.node_;
  node->rhs = b.node_;
  return FilterExpr(std::move(node));
}

FilterExpr operator||(const FilterExpr& a, const FilterExpr& b) {
  auto node = std::make_shared<Node>();
  node->kind = Node::Kind::Or;
  node->lhs = a.node_;
  node->rhs = b.node_;
  return FilterExpr(std::move(node));
}

FilterExpr operator!(const FilterExpr& a) {
  auto node = std::make_shared<Node>();
  node->kind = Node::Kind::Not;
  node->lhs = a.node_;
  return FilterExpr(std::move(node));
}

bool FilterExpr::evaluate(const EventTable& events, std::size_t row,
                          std::optional<std::pair<Timestamp, Timestamp>> call) const {
  return eval(*node_, events, row, call);
}

std::optional<std::pair<Timestamp, Timestamp>> FilterExpr::time_window() const {
  const auto* w = first_window(*node_);
  if (!w) return std::nullopt;
  return std::pair{window_bound(w->operands[0]), window_bound(w->operands[1])};
}

std::string FilterExpr::to_string() const { return render(*node_); }

FilterExpr compare(std::string_view field, Op op, AttrValue value) {
  return FilterExpr::atom(field, op, {std::move(value)});
}

FilterExpr in_set(std::string_view field, std::vector<AttrValue> values) {
  return FilterExpr::atom(field, Op::In, std::move(values));
}

FilterExpr between(std::string_view field, AttrValue lo, AttrValue hi) {
  return FilterExpr::atom(field, Op::Between, {std::move(lo), std::move(hi)});
}

FilterExpr glob(std::string_view field, std::string pattern) {
  return FilterExpr::atom(field, Op::Glob, {AttrValue{std::move(pattern)}});
}

Trace filter(const Trace& trace, const FilterExpr& expr, const FilterOptions& options) {
  std::optional<Trace> local;
  const Trace* base = &trace;
  if (!trace.events.derived.matching_index) {
    local.emplace();
    local->events = trace.events;
    local->metadata = trace.metadata;
    // Repair would add synthetic rows that the filter then keeps.
    match_caller_callee(*local, MatchOptions{false, false});
    base = &*local;
  }
  const auto& t = base->events;
  const auto& matching = *t.derived.matching_index;
  const auto& parent = *t.derived.parent_index;
  const auto n = t.size();

  auto interval = [&](std::size_t i) -> std::optional<std::pair<Timestamp, Timestamp>> {
    if (t.kind(i) == EventKind::Instant || matching[i] == kNoRow) return std::nullopt;
    const auto m = static_cast<std::size_t>(matching[i]);
    return t.kind(i) == EventKind::Enter ? std::pair{t.timestamp(i), t.timestamp(m)}
                                         : std::pair{t.timestamp(m), t.timestamp(i)};
  };
  std::vector<char> keep(n, 0);
  for (std::size_t i = 0; i < n; ++i) keep[i] = expr.evaluate(t, i, interval(i));
  if (options.pair_preserving) {
    for (std::size_t i = 0; i < n; ++i) {
      if (t.kind(i) == EventKind::Enter && matching[i] != kNoRow) {
        const auto m = static_cast<std::size_t>(matching[i]);
        keep[i] = keep[m] = keep[i] || keep[m];
      }
    }
  }
  const auto window = expr.time_window();
  if (window) {
    for (std::size_t i = 0; i < n; ++i) {
      if (t.kind(i) == EventKind::Instant && parent[i] != kNoRow && !keep[static_cast<std::size_t>(parent[i])]) {
        keep[i] = 0;
      }
    }
  }

  Trace out;
  auto& events = out.events;
  for (NameId id = 0; id < t.strings().size(); ++id) events.strings().intern(t.strings().resolve(id));
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    auto ts = t.timestamp(i);
    AttrMap attrs = t.attrs(i);
    if (options.time_clip && window) {
      if (auto call = interval(i)) {
        const auto lo = std::clamp(call->first, window->first, std::max(window->first, window->second));
        const auto hi = std::clamp(call->second, window->first, std::max(window->first, window->second));
        if (lo != call->first || hi != call->second) {
          ts = t.kind(i) == EventKind::Enter ? lo : hi;
          attrs.set("clipped", std::int64_t{1});
        }
      }
    }
    events.append(ts, t.kind(i), t.name_id(i), t.process(i), t.thread(i), std::move(attrs));
  }
  events.sort();
  out.metadata = trace.metadata;
  out.metadata["filter"] = expr.to_string();
  return out;
}

}  // namespace tracekit
