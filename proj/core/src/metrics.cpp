// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/metrics.hpp"

#include <set>
#include <utility>

#include "pvlff/errors.hpp"

namespace pvlff {
namespace {

bool ignored_at(const std::vector<char>& ignore, std::size_t p) {
  return !ignore.empty() && ignore[p] != 0;
}

void check_ignore(const std::vector<char>& ignore, std::size_t n) {
  if (!ignore.empty() && ignore.size() != n) {
    throw DataError("ignore mask size " + std::to_string(ignore.size()) +
                    " does not match pixel count " + std::to_string(n));
  }
}

using SegKey = std::pair<std::uint32_t, std::uint32_t>;  // (class, instance)

}  // namespace

SemanticMetrics miou_macc(const std::vector<std::uint32_t>& pred,
                          const std::vector<std::uint32_t>& gt,
                          const std::vector<char>& ignore,
                          const std::vector<std::uint32_t>& class_set) {
  if (pred.size() != gt.size()) {
    throw DataError("semantic maps disagree in size: " + std::to_string(pred.size()) +
                    " vs " + std::to_string(gt.size()));
  }
  check_ignore(ignore, pred.size());

  std::map<std::uint32_t, std::size_t> tp, fp, fn;
  std::set<std::uint32_t> observed;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (ignored_at(ignore, p)) continue;
    observed.insert(pred[p]);
    observed.insert(gt[p]);
    if (pred[p] == gt[p]) {
      ++tp[pred[p]];
    } else {
      ++fp[pred[p]];
      ++fn[gt[p]];
    }
  }

  std::set<std::uint32_t> candidates(class_set.begin(), class_set.end());
  if (candidates.empty()) candidates = observed;

  SemanticMetrics out;
  for (std::uint32_t c : candidates) {
    if (observed.count(c) == 0) continue;  // absent from both maps
    const double tp_c = static_cast<double>(tp.count(c) ? tp[c] : 0);
    const double fp_c = static_cast<double>(fp.count(c) ? fp[c] : 0);
    const double fn_c = static_cast<double>(fn.count(c) ? fn[c] : 0);
    out.class_iou[c] = tp_c / (tp_c + fp_c + fn_c);
    out.class_acc[c] = tp_c + fn_c > 0.0 ? tp_c / (tp_c + fn_c) : 0.0;
  }
  if (out.class_iou.empty()) return out;
  for (const auto& [c, iou] : out.class_iou) out.miou += iou;
  for (const auto& [c, acc] : out.class_acc) out.macc += acc;
  out.miou /= static_cast<double>(out.class_iou.size());
  out.macc /= static_cast<double>(out.class_acc.size());
  out.defined = true;
  return out;
}

PanopticMetrics panoptic_quality(const PanopticMap& pred, const PanopticMap& gt,
                                 const std::vector<char>& ignore) {
  if (pred.size() != gt.size()) {
    throw DataError("panoptic maps disagree in size: " + std::to_string(pred.size()) +
                    " vs " + std::to_string(gt.size()));
  }
  check_ignore(ignore, pred.size());

  std::map<SegKey, std::size_t> pred_size, gt_size;
  std::map<std::pair<SegKey, SegKey>, std::size_t> inter;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (ignored_at(ignore, p)) continue;
    if (!pred.valid[p] || !gt.valid[p]) continue;
    const SegKey pk{pred.class_ids[p], pred.instance_ids[p]};
    const SegKey gk{gt.class_ids[p], gt.instance_ids[p]};
    ++pred_size[pk];
    ++gt_size[gk];
    ++inter[{pk, gk}];
  }

  std::set<std::uint32_t> classes;
  for (const auto& [key, n] : pred_size) classes.insert(key.first);
  for (const auto& [key, n] : gt_size) classes.insert(key.first);

  PanopticMetrics out;
  for (std::uint32_t c : classes) {
    ClassPanoptic cp;
    for (const auto& [pair, overlap] : inter) {
      if (pair.first.first != c || pair.second.first != c) continue;
      const double uni = static_cast<double>(pred_size[pair.first] + gt_size[pair.second] - overlap);
      const double iou = static_cast<double>(overlap) / uni;
      if (iou > 0.5) {  // IoU > 0.5 makes the match unique per segment
        ++cp.tp;
        cp.iou_sum += iou;
      }
    }
    std::size_t pred_segments = 0, gt_segments = 0;
    for (const auto& [key, n] : pred_size) pred_segments += key.first == c ? 1 : 0;
    for (const auto& [key, n] : gt_size) gt_segments += key.first == c ? 1 : 0;
    cp.fp = pred_segments - cp.tp;
    cp.fn = gt_segments - cp.tp;
    const double denom = static_cast<double>(cp.tp) +
                         0.5 * static_cast<double>(cp.fp + cp.fn);
    cp.pq = cp.iou_sum / denom;
    cp.rq = static_cast<double>(cp.tp) / denom;
    cp.sq = cp.tp > 0 ? cp.iou_sum / static_cast<double>(cp.tp) : 0.0;
    out.per_class[c] = cp;
  }
  if (out.per_class.empty()) return out;
  for (const auto& [c, cp] : out.per_class) {
    out.pq += cp.pq;
    out.sq += cp.sq;
    out.rq += cp.rq;
  }
  const double k = static_cast<double>(out.per_class.size());
  out.pq /= k;
  out.sq /= k;
  out.rq /= k;
  out.defined = true;
  return out;
}

PanopticMetrics pq_scene(const std::vector<PanopticMap>& pred_frames,
                         const std::vector<PanopticMap>& gt_frames,
                         const std::vector<std::vector<char>>& ignore) {
  if (pred_frames.size() != gt_frames.size()) {
    throw DataError("frame counts disagree: " + std::to_string(pred_frames.size()) +
                    " vs " + std::to_string(gt_frames.size()));
  }
  if (pred_frames.empty()) throw DataError("pq_scene needs at least one frame");
  if (!ignore.empty() && ignore.size() != pred_frames.size()) {
    throw DataError("ignore mask count does not match frame count");
  }

  PanopticMap pred_all, gt_all;
  std::vector<char> ignore_all;
  static const std::vector<char> kNoIgnore;
  for (std::size_t f = 0; f < pred_frames.size(); ++f) {
    const PanopticMap& pf = pred_frames[f];
    const PanopticMap& gf = gt_frames[f];
    if (pf.size() != gf.size()) {
      throw DataError("frame " + std::to_string(f) + " sizes disagree: " +
                      std::to_string(pf.size()) + " vs " + std::to_string(gf.size()));
    }
    const std::vector<char>& mask = ignore.empty() ? kNoIgnore : ignore[f];
    check_ignore(mask, pf.size());
    for (std::size_t p = 0; p < pf.size(); ++p) {
      pred_all.class_ids.push_back(pf.class_ids[p]);
      pred_all.instance_ids.push_back(pf.instance_ids[p]);
      pred_all.valid.push_back(pf.valid[p]);
      gt_all.class_ids.push_back(gf.class_ids[p]);
      gt_all.instance_ids.push_back(gf.instance_ids[p]);
      gt_all.valid.push_back(gf.valid[p]);
      ignore_all.push_back(mask.empty() ? 0 : mask[p]);
    }
  }
  pred_all.width = pred_all.class_ids.size();
  pred_all.height = 1;
  gt_all.width = gt_all.class_ids.size();
  gt_all.height = 1;
  return panoptic_quality(pred_all, gt_all, ignore_all);
}

CoverageMetrics coverage(const std::vector<std::uint32_t>& pred_instances,
                         const std::vector<std::uint32_t>& gt_instances,
                         const std::vector<char>& ignore) {
  if (pred_instances.size() != gt_instances.size()) {
    throw DataError("instance maps disagree in size: " +
                    std::to_string(pred_instances.size()) + " vs " +
                    std::to_string(gt_instances.size()));
  }
  check_ignore(ignore, pred_instances.size());

  std::map<std::uint32_t, std::size_t> pred_size, gt_size;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> inter;
  for (std::size_t p = 0; p < pred_instances.size(); ++p) {
    if (ignored_at(ignore, p)) continue;
    if (pred_instances[p] > 0) ++pred_size[pred_instances[p]];
    if (gt_instances[p] > 0) ++gt_size[gt_instances[p]];
    if (pred_instances[p] > 0 && gt_instances[p] > 0) {
      ++inter[{gt_instances[p], pred_instances[p]}];
    }
  }

  CoverageMetrics out;
  if (gt_size.empty()) return out;
  double total_gt = 0.0;
  for (const auto& [g, n] : gt_size) total_gt += static_cast<double>(n);
  for (const auto& [g, gn] : gt_size) {
    double best = 0.0;
    for (const auto& [pr, pn] : pred_size) {
      const auto it = inter.find({g, pr});
      if (it == inter.end()) continue;
      const double overlap = static_cast<double>(it->second);
      const double iou = overlap / static_cast<double>(gn + pn - it->second);
      if (iou > best) best = iou;
    }
    out.mcov += best;
    out.mwcov += best * static_cast<double>(gn) / total_gt;
  }
  out.mcov /= static_cast<double>(gt_size.size());
  out.defined = true;
  return out;
}

}  // namespace pvlff
