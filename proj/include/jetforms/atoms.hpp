#pragma once

#include <compare>
#include <cstdint>

#include "jetforms/multi_index.hpp"

namespace jetforms {

enum class AtomKind : std::uint8_t {
  Base,      // x^i                       (id = base index)
  Fiber,     // y^sigma_J                 (id = field index, idx = J)
  Param,     // opaque scalar constant    (id = parameter index)
  Opaque,    // registered symbol atom    (id = symbol index, idx = symbol indices)
  HomotopyT  // the homotopy parameter t
};

/// One symbolic variable of the polynomial engine. Fiber atoms with an empty
/// multi-index denote y^sigma itself. The total ordering (base < fiber <
/// param < opaque < t, then by indices) fixes canonical monomial sorting.
struct Atom {
  AtomKind kind = AtomKind::Base;
  std::uint16_t id = 0;
  MultiIndex idx;

  static Atom base(int i) { return {AtomKind::Base, static_cast<std::uint16_t>(i), {}}; }
  static Atom fiber(int field, MultiIndex j) {
    return {AtomKind::Fiber, static_cast<std::uint16_t>(field), std::move(j)};
  }
  static Atom param(int p) { return {AtomKind::Param, static_cast<std::uint16_t>(p), {}}; }
  static Atom opaque(int sym, MultiIndex indices) {
    return {AtomKind::Opaque, static_cast<std::uint16_t>(sym), std::move(indices)};
  }
  static Atom homotopy_t() { return {AtomKind::HomotopyT, 0, {}}; }

  bool is_fiber() const { return kind == AtomKind::Fiber; }
  bool is_base() const { return kind == AtomKind::Base; }

  /// Jet order carried by this atom (0 for anything but fiber coordinates).
  int jet_order() const { return kind == AtomKind::Fiber ? idx.order() : 0; }

  friend std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (a.kind == AtomKind::Fiber) {
      // by field, then |J|, then lexicographically on J
      if (auto c = a.id <=> b.id; c != 0) return c;
      return a.idx <=> b.idx;
    }
    if (auto c = a.id <=> b.id; c != 0) return c;
    return a.idx <=> b.idx;
  }
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// A chart coordinate is a base or fiber atom.
using JetCoordinate = Atom;

}  // namespace jetforms
