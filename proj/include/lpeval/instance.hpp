#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lpeval/error.hpp"
#include "lpeval/graph_store.hpp"
#include "lpeval/text.hpp"

namespace lpeval {

/// Geodesic distance of a candidate pair in the feature network.
///
/// Finite hop counts order before `beyond` (same component, past the
/// enumeration depth), which orders before `disconnected`. A default
/// constructed Distance is unknown (not yet stratified).
class Distance {
 public:
  constexpr Distance() = default;
  static constexpr Distance hops(std::uint32_t h) { return Distance(h); }
  static constexpr Distance beyond() { return Distance(kBeyond); }
  static constexpr Distance disconnected() { return Distance(kDisconnected); }

  constexpr bool known() const noexcept { return value_ != 0; }
  constexpr bool finite() const noexcept { return known() && value_ < kBeyond; }
  constexpr bool is_beyond() const noexcept { return value_ == kBeyond; }
  constexpr bool is_disconnected() const noexcept { return value_ == kDisconnected; }
  constexpr std::uint32_t value() const noexcept { return value_; }

  std::string to_string() const {
    if (!known()) return "";
    if (is_beyond()) return "beyond";
    if (is_disconnected()) return "disconnected";
    return std::to_string(value_);
  }

  static std::optional<Distance> parse(std::string_view s) {
    if (s.empty()) return Distance();
    if (s == "beyond") return beyond();
    if (s == "disconnected") return disconnected();
    auto v = text::parse_int(s);
    if (!v || *v < 1 || *v >= kBeyond) return std::nullopt;
    return hops(static_cast<std::uint32_t>(*v));
  }

  friend constexpr auto operator<=>(Distance, Distance) = default;

 private:
  static constexpr std::uint32_t kBeyond = std::numeric_limits<std::uint32_t>::max() - 1;
  static constexpr std::uint32_t kDisconnected = std::numeric_limits<std::uint32_t>::max();
  constexpr explicit Distance(std::uint32_t v) : value_(v) {}
  std::uint32_t value_ = 0;
};

enum class Label : std::int8_t { unknown = -1, negative = 0, positive = 1 };

/// One candidate pair with its stratum, label and a single predictor score.
///
/// For symmetric use u < v. Directional predictors under the list-both policy
/// emit a second instance with u and v swapped.
struct Instance {
  NodeId u = kNoNode;
  NodeId v = kNoNode;
  Distance distance;
  Label label = Label::unknown;
  double score = 0.0;
  bool involves_new_node = false;

  bool positive() const noexcept { return label == Label::positive; }
};

inline std::string label_to_string(Label l) {
  switch (l) {
    case Label::positive: return "1";
    case Label::negative: return "0";
    case Label::unknown: return "";
  }
  return "";
}

/// Writes `u,v,distance,label[,score]` rows with a header line.
inline void write_instances_csv(std::ostream& out, const std::vector<Instance>& instances,
                                const NodeTable* names, bool with_score) {
  auto name = [&](NodeId n) {
    return names && n < names->size() ? names->name(n) : std::to_string(n);
  };
  out << (with_score ? "u,v,distance,label,score\n" : "u,v,distance,label\n");
  for (const auto& i : instances) {
    out << name(i.u) << ',' << name(i.v) << ',' << i.distance.to_string() << ','
        << label_to_string(i.label);
    if (with_score) out << ',' << text::format_double(i.score);
    out << '\n';
  }
}

/// Reads instance or scored-instance CSV. Node names are interned into
/// `names`, so files produced by third-party predictors can be evaluated.
/// A missing score column leaves scores at 0.
inline std::vector<Instance> read_instances_csv(std::istream& in, NodeTable& names) {
  std::vector<Instance> out;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto f = text::split(line, ',');
    if (!header_seen) {
      header_seen = true;
      if (f.size() >= 2 && f[0] == "u" && f[1] == "v") continue;
    }
    if (f.size() < 4 || f.size() > 5)
      throw DataError("expected u,v,distance,label[,score]", line_no);
    Instance inst;
    if (f[0].empty() || f[1].empty()) throw DataError("empty node id", line_no);
    inst.u = names.intern(f[0]);
    inst.v = names.intern(f[1]);
    auto d = Distance::parse(f[2]);
    if (!d) throw DataError("bad distance '" + std::string(f[2]) + "'", line_no);
    inst.distance = *d;
    if (f[3] == "1" || f[3] == "positive")
      inst.label = Label::positive;
    else if (f[3] == "0" || f[3] == "negative")
      inst.label = Label::negative;
    else if (f[3].empty())
      inst.label = Label::unknown;
    else
      throw DataError("bad label '" + std::string(f[3]) + "'", line_no);
    if (f.size() == 5 && !f[4].empty()) {
      auto s = text::parse_double(f[4]);
      if (!s || !std::isfinite(*s)) throw DataError("bad score '" + std::string(f[4]) + "'", line_no);
      inst.score = *s;
    }
    out.push_back(inst);
  }
  return out;
}

}  // namespace lpeval
