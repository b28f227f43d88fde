// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/reference_metrics.hpp"

#include <algorithm>

namespace pvlff::refimpl {
namespace {

bool skip(const std::vector<char>& ignore, std::size_t p) {
  return !ignore.empty() && ignore[p] != 0;
}

std::vector<std::uint32_t> unique_sorted(std::vector<std::uint32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Pixels of one panoptic segment, as an index list.
std::vector<std::size_t> segment_pixels(const pvlff::PanopticMap& m, std::uint32_t cls,
                                        std::uint32_t id, const std::vector<char>& dead) {
  std::vector<std::size_t> px;
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (dead[p]) continue;
    if (m.class_ids[p] == cls && m.instance_ids[p] == id) px.push_back(p);
  }
  return px;
}

double pixel_iou(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t overlap = 0;
  for (std::size_t pa : a) {
    overlap += std::find(b.begin(), b.end(), pa) != b.end() ? 1 : 0;
  }
  if (a.empty() && b.empty()) return 0.0;
  return static_cast<double>(overlap) / static_cast<double>(a.size() + b.size() - overlap);
}

}  // namespace

RefSemantic semantic_oracle(const std::vector<std::uint32_t>& pred,
                            const std::vector<std::uint32_t>& gt,
                            const std::vector<char>& ignore,
                            const std::vector<std::uint32_t>& class_set) {
  std::vector<std::uint32_t> candidates = class_set;
  if (candidates.empty()) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (skip(ignore, p)) continue;
      candidates.push_back(pred[p]);
      candidates.push_back(gt[p]);
    }
  }
  candidates = unique_sorted(candidates);

  RefSemantic out;
  std::size_t taken = 0;
  for (std::uint32_t c : candidates) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (skip(ignore, p)) continue;
      if (pred[p] == c && gt[p] == c) ++tp;
      if (pred[p] == c && gt[p] != c) ++fp;
      if (pred[p] != c && gt[p] == c) ++fn;
    }
    if (tp + fp + fn == 0) continue;  // class appears in neither map
    ++taken;
    out.miou += static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    out.macc += tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  }
  if (taken == 0) return out;
  out.miou /= static_cast<double>(taken);
  out.macc /= static_cast<double>(taken);
  out.defined = true;
  return out;
}

RefPanoptic panoptic_oracle(const pvlff::PanopticMap& pred, const pvlff::PanopticMap& gt,
                            const std::vector<char>& ignore) {
  // Pixels excluded up front: ignored, or invalid in either map.
  std::vector<char> dead(pred.size(), 0);
  for (std::size_t p = 0; p < pred.size(); ++p) {
    dead[p] = skip(ignore, p) || !pred.valid[p] || !gt.valid[p] ? 1 : 0;
  }

  std::vector<std::uint32_t> classes;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (dead[p]) continue;
    classes.push_back(pred.class_ids[p]);
    classes.push_back(gt.class_ids[p]);
  }
  classes = unique_sorted(classes);

  RefPanoptic out;
  for (std::uint32_t c : classes) {
    // Enumerate this class's segments in each map by instance id.
    std::vector<std::uint32_t> pred_ids, gt_ids;
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (dead[p]) continue;
      if (pred.class_ids[p] == c) pred_ids.push_back(pred.instance_ids[p]);
      if (gt.class_ids[p] == c) gt_ids.push_back(gt.instance_ids[p]);
    }
    pred_ids = unique_sorted(pred_ids);
    gt_ids = unique_sorted(gt_ids);

    std::size_t tp = 0;
    double iou_sum = 0.0;
    for (std::uint32_t gi : gt_ids) {
      const std::vector<std::size_t> gpx = segment_pixels(gt, c, gi, dead);
      for (std::uint32_t pi : pred_ids) {
        const double iou = pixel_iou(segment_pixels(pred, c, pi, dead), gpx);
        if (iou > 0.5) {
          ++tp;
          iou_sum += iou;
        }
      }
    }
    const std::size_t fp = pred_ids.size() - tp;
    const std::size_t fn = gt_ids.size() - tp;
    const double denom = static_cast<double>(tp) + 0.5 * static_cast<double>(fp + fn);
    out.pq += iou_sum / denom;
    out.rq += static_cast<double>(tp) / denom;
    out.sq += tp > 0 ? iou_sum / static_cast<double>(tp) : 0.0;
  }
  if (classes.empty()) return out;
  out.pq /= static_cast<double>(classes.size());
  out.sq /= static_cast<double>(classes.size());
  out.rq /= static_cast<double>(classes.size());
  out.defined = true;
  return out;
}

RefCoverage coverage_oracle(const std::vector<std::uint32_t>& pred,
                            const std::vector<std::uint32_t>& gt,
                            const std::vector<char>& ignore) {
  std::vector<std::uint32_t> gt_ids, pred_ids;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (skip(ignore, p)) continue;
    if (gt[p] > 0) gt_ids.push_back(gt[p]);
    if (pred[p] > 0) pred_ids.push_back(pred[p]);
  }
  gt_ids = unique_sorted(gt_ids);
  pred_ids = unique_sorted(pred_ids);

  RefCoverage out;
  if (gt_ids.empty()) return out;

  double total_gt = 0.0;
  for (std::size_t p = 0; p < gt.size(); ++p) {
    if (!skip(ignore, p) && gt[p] > 0) total_gt += 1.0;
  }
  for (std::uint32_t gi : gt_ids) {
    std::size_t gn = 0;
    for (std::size_t p = 0; p < gt.size(); ++p) {
      if (!skip(ignore, p) && gt[p] == gi) ++gn;
    }
    double best = 0.0;
    for (std::uint32_t pi : pred_ids) {
      std::size_t pn = 0, overlap = 0;
      for (std::size_t p = 0; p < pred.size(); ++p) {
        if (skip(ignore, p)) continue;
        if (pred[p] == pi) ++pn;
        if (pred[p] == pi && gt[p] == gi) ++overlap;
      }
      const double iou =
          static_cast<double>(overlap) / static_cast<double>(gn + pn - overlap);
      best = std::max(best, iou);
    }
    out.mcov += best;
    out.mwcov += best * static_cast<double>(gn) / total_gt;
  }
  out.mcov /= static_cast<double>(gt_ids.size());
  out.defined = true;
  return out;
}

}  // namespace pvlff::refimpl
