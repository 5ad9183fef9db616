#include "padkit/area.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace padkit {
namespace {

bool usable(const Pin& p) {
  return std::isfinite(p.cx) && std::isfinite(p.cy) && std::isfinite(p.w) &&
         std::isfinite(p.h) && p.w > 0 && p.h > 0;
}

std::vector<Pin> usable_pins(std::span<const Pin> pins) {
  std::vector<Pin> out;
  out.reserve(pins.size());
  for (const auto& p : pins) {
    if (usable(p)) out.push_back(p);
  }
  return out;
}

// Coverage-counting segment tree over elementary y intervals.
class CoverTree {
 public:
  explicit CoverTree(const std::vector<double>& ys)
      : ys_(ys), count_(4 * ys.size(), 0), covered_(4 * ys.size(), 0.0) {}

  void add(std::size_t lo, std::size_t hi, int delta) {
    if (lo < hi) update(1, 0, ys_.size() - 1, lo, hi, delta);
  }
  double covered() const { return covered_[1]; }

 private:
  // Node covers elementary intervals [l, r), i.e. y range [ys[l], ys[r]].
  void update(std::size_t node, std::size_t l, std::size_t r, std::size_t lo, std::size_t hi,
              int delta) {
    if (hi <= l || r <= lo) return;
    if (lo <= l && r <= hi) {
      count_[node] += delta;
    } else {
      const std::size_t mid = (l + r) / 2;
      update(2 * node, l, mid, lo, hi, delta);
      update(2 * node + 1, mid, r, lo, hi, delta);
    }
    if (count_[node] > 0) {
      covered_[node] = ys_[r] - ys_[l];
    } else if (r - l == 1) {
      covered_[node] = 0.0;
    } else {
      covered_[node] = covered_[2 * node] + covered_[2 * node + 1];
    }
  }

  const std::vector<double>& ys_;
  std::vector<int> count_;
  std::vector<double> covered_;
};

struct Interval {
  double lo;
  double hi;
};

// x extent of a pad at height y, or an empty interval.
Interval row_extent(const Pin& p, double y) {
  double r = 0.0;
  Rect core = pad_bounds(p);
  if (p.shape == PadShape::circle) {
    r = p.w / 2;
    core = {p.cx, p.cy, p.cx, p.cy};
  } else if (p.shape == PadShape::stadium) {
    r = std::min(p.w, p.h) / 2;
    core = {p.cx - p.w / 2 + r, p.cy - p.h / 2 + r, p.cx + p.w / 2 - r, p.cy + p.h / 2 - r};
  }
  const double d = std::max({0.0, core.y0 - y, y - core.y1});
  if (d > r) return {0.0, 0.0};
  const double half = std::sqrt(r * r - d * d);
  return {core.x0 - half, core.x1 + half};
}

double merged_length(std::vector<Interval>& xs) {
  std::sort(xs.begin(), xs.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  double total = 0.0;
  double cur_lo = 0.0;
  double cur_hi = 0.0;
  bool open = false;
  for (const auto& iv : xs) {
    if (iv.hi <= iv.lo) continue;
    if (!open) {
      cur_lo = iv.lo;
      cur_hi = iv.hi;
      open = true;
    } else if (iv.lo <= cur_hi) {
      cur_hi = std::max(cur_hi, iv.hi);
    } else {
      total += cur_hi - cur_lo;
      cur_lo = iv.lo;
      cur_hi = iv.hi;
    }
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

double union_area(std::span<const Pin> pins, bool exact, double step) {
  return exact ? rect_union_area(pins) : raster_union_area(pins, step);
}

}  // namespace

double raster_step(std::span<const Pin> pins) {
  double step = 0.01;
  for (const auto& p : pins) {
    if (usable(p)) step = std::min(step, std::min(p.w, p.h) / 64);
  }
  return step;
}

bool all_rectangles(std::span<const Pin> pins) {
  return std::all_of(pins.begin(), pins.end(),
                     [](const Pin& p) { return p.shape == PadShape::rectangle; });
}

double rect_union_area(std::span<const Pin> pins) {
  const std::vector<Pin> rects = usable_pins(pins);
  if (rects.empty()) return 0.0;

  std::vector<double> ys;
  ys.reserve(2 * rects.size());
  for (const auto& p : rects) {
    const Rect b = pad_bounds(p);
    ys.push_back(b.y0);
    ys.push_back(b.y1);
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (ys.size() < 2) return 0.0;

  struct Event {
    double x;
    std::size_t lo;
    std::size_t hi;
    int delta;
  };
  std::vector<Event> events;
  events.reserve(2 * rects.size());
  auto index_of = [&](double y) {
    return static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin());
  };
  for (const auto& p : rects) {
    const Rect b = pad_bounds(p);
    const std::size_t lo = index_of(b.y0);
    const std::size_t hi = index_of(b.y1);
    events.push_back({b.x0, lo, hi, +1});
    events.push_back({b.x1, lo, hi, -1});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.lo != b.lo) return a.lo < b.lo;
    if (a.hi != b.hi) return a.hi < b.hi;
    return a.delta < b.delta;
  });

  CoverTree tree(ys);
  double area = 0.0;
  std::size_t i = 0;
  double prev_x = events.front().x;
  while (i < events.size()) {
    const double x = events[i].x;
    area += tree.covered() * (x - prev_x);
    for (; i < events.size() && events[i].x == x; ++i) {
      tree.add(events[i].lo, events[i].hi, events[i].delta);
    }
    prev_x = x;
  }
  return area;
}

double raster_union_area(std::span<const Pin> pins, double step) {
  if (!(step > 0)) throw GeometryError("raster step must be positive");
  std::vector<Pin> pads = usable_pins(pins);
  if (pads.empty()) return 0.0;

  // Strip boundaries: pad extents plus the points where a rounded outline
  // switches between straight and curved sides.
  std::vector<double> breaks;
  breaks.reserve(4 * pads.size());
  for (const auto& p : pads) {
    const Rect b = pad_bounds(p);
    breaks.push_back(b.y0);
    breaks.push_back(b.y1);
    if (p.shape == PadShape::stadium && p.h > p.w) {
      breaks.push_back(b.y0 + p.w / 2);
      breaks.push_back(b.y1 - p.w / 2);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::sort(pads.begin(), pads.end(),
            [](const Pin& a, const Pin& b) { return pad_bounds(a).y0 < pad_bounds(b).y0; });

  double area = 0.0;
  std::vector<const Pin*> active;
  std::vector<Interval> row;
  std::size_t next = 0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double y0 = breaks[k];
    const double y1 = breaks[k + 1];
    while (next < pads.size() && pad_bounds(pads[next]).y0 <= y0) {
      active.push_back(&pads[next]);
      ++next;
    }
    std::erase_if(active, [&](const Pin* p) { return pad_bounds(*p).y1 <= y0; });
    if (active.empty()) continue;

    const auto rows = static_cast<std::size_t>(std::ceil((y1 - y0) / step));
    const double dy = (y1 - y0) / static_cast<double>(std::max<std::size_t>(rows, 1));
    for (std::size_t j = 0; j < std::max<std::size_t>(rows, 1); ++j) {
      const double y = y0 + (static_cast<double>(j) + 0.5) * dy;
      row.clear();
      for (const Pin* p : active) row.push_back(row_extent(*p, y));
      area += merged_length(row) * dy;
    }
  }
  return area;
}

double layout_union_area(std::span<const Pin> pins) {
  if (pins.empty()) return 0.0;
  return union_area(pins, all_rectangles(pins), raster_step(pins));
}

double pad_iou(const Pin& a, const Pin& b) {
  if (!usable(a) || !usable(b)) return 0.0;
  if (a.shape == PadShape::rectangle && b.shape == PadShape::rectangle) {
    const Rect ra = pad_bounds(a);
    const Rect rb = pad_bounds(b);
    const double ox = std::max(0.0, std::min(ra.x1, rb.x1) - std::max(ra.x0, rb.x0));
    const double oy = std::max(0.0, std::min(ra.y1, rb.y1) - std::max(ra.y0, rb.y0));
    const double inter = ox * oy;
    const double uni = ra.area() + rb.area() - inter;
    return uni > 0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
  }
  const Pin one[1] = {a};
  const Pin two[1] = {b};
  return pad_set_iou(one, two).value;
}

IouResult pad_set_iou(std::span<const Pin> pred, std::span<const Pin> truth) {
  IouResult result;
  const std::vector<Pin> p = usable_pins(pred);
  const std::vector<Pin> t = usable_pins(truth);
  std::vector<Pin> both = p;
  both.insert(both.end(), t.begin(), t.end());
  result.exact = all_rectangles(both);
  if (p.empty() || t.empty()) {
    result.degenerate = true;
    result.union_area = layout_union_area(both);
    return result;
  }
  const double step = raster_step(both);
  const double ua = union_area(p, result.exact, step);
  const double ub = union_area(t, result.exact, step);
  const double uab = union_area(both, result.exact, step);
  result.union_area = uab;
  result.intersection = std::clamp(ua + ub - uab, 0.0, std::min(ua, ub));
  if (uab <= 0) {
    result.degenerate = true;
    return result;
  }
  result.value = std::clamp(result.intersection / uab, 0.0, 1.0);
  return result;
}

IouResult layout_iou(const FootprintGeometry& pred, const FootprintGeometry& truth) {
  return pad_set_iou(pred.pins, truth.pins);
}

}  // namespace padkit
