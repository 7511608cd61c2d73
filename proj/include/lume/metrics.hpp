#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lume/assignment.hpp"
#include "lume/geometry.hpp"
#include "lume/saliency.hpp"

namespace lume {

struct FrameBoxCounts {
    int frame_id = 0;
    long tp = 0, fp = 0, fn = 0;
};

/// Dataset-level box-vs-KP evaluation. q_k penalizes boxes spanning several
/// KPs, q_b penalizes KPs covered by several boxes, q = q_k * q_b. When no
/// box is a TP the quality factors are reported as 1.0 with zero_tp set.
struct BoxEvalReport {
    long tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f_score = 0.0;
    double q_k = 1.0, q_b = 1.0, q = 1.0;
    bool zero_tp = false;
    std::vector<FrameBoxCounts> per_frame;
};

struct BoxFrame {
    int frame_id = 0;
    std::vector<Box> boxes;
};

struct KpFrame {
    int frame_id = 0;
    std::vector<Keypoint> kps;
};

/// Evaluates predicted boxes against ground-truth KPs. A box containing at
/// least one KP is a TP, otherwise an FP; a KP inside no box is an FN.
/// Quality sums accumulate over the whole dataset before division.
inline BoxEvalReport evaluate_boxes(std::span<const BoxFrame> pred, std::span<const KpFrame> gt) {
    std::map<int, const KpFrame*> gt_by_id;
    for (const KpFrame& f : gt) gt_by_id[f.frame_id] = &f;
    if (gt_by_id.size() != gt.size())
        throw std::invalid_argument("evaluate_boxes: duplicate ground-truth frame id");
    if (pred.size() != gt.size())
        throw std::invalid_argument("evaluate_boxes: frame count mismatch");

    BoxEvalReport rep;
    double qk_sum = 0.0, qb_sum = 0.0;
    long n_b = 0, n_k = 0;
    for (const BoxFrame& pf : pred) {
        const auto it = gt_by_id.find(pf.frame_id);
        if (it == gt_by_id.end())
            throw std::invalid_argument("evaluate_boxes: no ground truth for frame " +
                                        std::to_string(pf.frame_id));
        const std::vector<Keypoint>& kps = it->second->kps;
        FrameBoxCounts fc;
        fc.frame_id = pf.frame_id;
        std::vector<int> covers(kps.size(), 0);  // TP boxes covering each KP
        for (const Box& b : pf.boxes) {
            int n_kp = 0;
            for (const Keypoint& k : kps)
                if (contains_kp(b, k)) ++n_kp;
            if (n_kp > 0) {
                ++fc.tp;
                ++n_b;
                qk_sum += 1.0 / n_kp;
                for (std::size_t ki = 0; ki < kps.size(); ++ki)
                    if (contains_kp(b, kps[ki])) ++covers[ki];
            } else {
                ++fc.fp;
            }
        }
        for (int c : covers) {
            if (c > 0) {
                ++n_k;
                qb_sum += 1.0 / c;
            } else {
                ++fc.fn;
            }
        }
        rep.tp += fc.tp;
        rep.fp += fc.fp;
        rep.fn += fc.fn;
        rep.per_frame.push_back(fc);
    }
    std::sort(rep.per_frame.begin(), rep.per_frame.end(),
              [](const FrameBoxCounts& a, const FrameBoxCounts& b) {
                  return a.frame_id < b.frame_id;
              });
    rep.precision = rep.tp + rep.fp > 0 ? static_cast<double>(rep.tp) / (rep.tp + rep.fp) : 0.0;
    rep.recall = rep.tp + rep.fn > 0 ? static_cast<double>(rep.tp) / (rep.tp + rep.fn) : 0.0;
    rep.f_score = rep.precision + rep.recall > 0.0
                      ? 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall)
                      : 0.0;
    if (n_b > 0) {
        rep.q_k = qk_sum / static_cast<double>(n_b);
        rep.q_b = qb_sum / static_cast<double>(n_k);
    } else {
        rep.zero_tp = true;
    }
    rep.q = rep.q_k * rep.q_b;
    return rep;
}

/// Similarity between a predicted and a ground-truth KP:
/// exp(-euclidean_distance * |s(p|gt) - s(gt|gt)|) with s from the ground
/// truth KP's saliency map. Always in (0, 1].
inline double kps_similarity(const Keypoint& p, const Keypoint& gt, const SaliencyMap& s_map) {
    if (s_map.seed.x != gt.x || s_map.seed.y != gt.y)
        throw std::invalid_argument("kps_similarity: saliency map not seeded at the GT keypoint");
    if (p.x < 0 || p.x >= s_map.width || p.y < 0 || p.y >= s_map.height)
        throw std::invalid_argument("kps_similarity: predicted keypoint out of bounds");
    const double dx = p.x - gt.x, dy = p.y - gt.y;
    const double dist = std::sqrt(dx * dx + dy * dy);
    const double sdiff =
        std::abs(saliency_at(s_map, p) - saliency_at(s_map, gt));
    return std::exp(-dist * sdiff);
}

struct ScoredKeypoint {
    Keypoint kp;
    double score = 1.0;
};

struct KpPredFrame {
    int frame_id = 0;
    std::vector<ScoredKeypoint> preds;
};

struct KpGtFrame {
    int frame_id = 0;
    std::vector<Keypoint> kps;
    std::vector<SaliencyMap> maps;  // aligned with kps
};

struct KpMatch {
    int pred_index = -1;
    int gt_index = -1;
    double kps = 0.0;
};

struct KpFrameMatches {
    int frame_id = 0;
    std::vector<KpMatch> matches;
};

struct ThresholdEntry {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double ap = 0.0;
};

struct KpEvalReport {
    double map = 0.0;
    double mar = 0.0;
    std::vector<ThresholdEntry> per_threshold;
    std::vector<KpFrameMatches> matches;
};

inline std::vector<double> default_kps_thresholds() {
    std::vector<double> t;
    for (int i = 0; i <= 9; ++i) t.push_back(0.50 + 0.05 * i);
    return t;
}

/// KP-predictor evaluation: per frame an optimal assignment of predictions to
/// ground truth by kps similarity, then per threshold a COCO-style
/// 101-point-interpolated AP over globally confidence-ranked predictions.
/// mAP and mAR are the means over the threshold grid.
inline KpEvalReport evaluate_keypoints(std::span<const KpPredFrame> pred,
                                       std::span<const KpGtFrame> gt,
                                       std::vector<double> thresholds = default_kps_thresholds()) {
    if (thresholds.empty())
        throw std::invalid_argument("evaluate_keypoints: empty threshold list");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] <= thresholds[i - 1])
            throw std::invalid_argument("evaluate_keypoints: thresholds must strictly increase");
    std::map<int, const KpGtFrame*> gt_by_id;
    for (const KpGtFrame& f : gt) {
        if (f.maps.size() != f.kps.size())
            throw std::invalid_argument("evaluate_keypoints: missing saliency map in frame " +
                                        std::to_string(f.frame_id));
        gt_by_id[f.frame_id] = &f;
    }
    if (pred.size() != gt.size() || gt_by_id.size() != gt.size())
        throw std::invalid_argument("evaluate_keypoints: frame id mismatch");

    struct PredRecord {
        double score = 0.0;
        bool matched = false;
        double kps = 0.0;
        int frame_order = 0;  // deterministic tie-break for equal scores
        int index = 0;
    };
    std::vector<PredRecord> records;
    long total_gt = 0;
    KpEvalReport rep;
    int frame_order = 0;
    for (const KpPredFrame& pf : pred) {
        const auto it = gt_by_id.find(pf.frame_id);
        if (it == gt_by_id.end())
            throw std::invalid_argument("evaluate_keypoints: no ground truth for frame " +
                                        std::to_string(pf.frame_id));
        const KpGtFrame& gf = *it->second;
        total_gt += static_cast<long>(gf.kps.size());
        WeightMatrix w(static_cast<int>(pf.preds.size()), static_cast<int>(gf.kps.size()));
        for (int i = 0; i < w.rows; ++i)
            for (int j = 0; j < w.cols; ++j)
                w.at(i, j) = kps_similarity(pf.preds[i].kp, gf.kps[j], gf.maps[j]);
        const Assignment asg = solve_max(w);
        KpFrameMatches fm;
        fm.frame_id = pf.frame_id;
        std::vector<char> matched(pf.preds.size(), 0);
        for (const auto& [i, j] : asg.pairs) {
            fm.matches.push_back({i, j, w.at(i, j)});
            matched[i] = 1;
        }
        rep.matches.push_back(std::move(fm));
        for (std::size_t i = 0; i < pf.preds.size(); ++i) {
            PredRecord r;
            r.score = pf.preds[i].score;
            r.matched = matched[i];
            if (matched[i]) {
                for (const auto& [pi, gj] : asg.pairs)
                    if (pi == static_cast<int>(i)) r.kps = w.at(pi, gj);
            }
            r.frame_order = frame_order;
            r.index = static_cast<int>(i);
            records.push_back(r);
        }
        ++frame_order;
    }
    std::sort(records.begin(), records.end(), [](const PredRecord& a, const PredRecord& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.frame_order != b.frame_order) return a.frame_order < b.frame_order;
        return a.index < b.index;
    });

    double ap_sum = 0.0, ar_sum = 0.0;
    for (double t : thresholds) {
        long tp = 0, fp = 0;
        std::vector<std::pair<double, double>> curve;  // (recall, precision)
        for (const PredRecord& r : records) {
            if (r.matched && r.kps >= t)
                ++tp;
            else
                ++fp;
            const double prec = static_cast<double>(tp) / (tp + fp);
            const double rec = total_gt > 0 ? static_cast<double>(tp) / total_gt : 0.0;
            curve.emplace_back(rec, prec);
        }
        double ap = 0.0;
        if (total_gt > 0) {
            for (int r101 = 0; r101 <= 100; ++r101) {
                const double r = r101 / 100.0;
                double best = 0.0;
                for (const auto& [rec, prec] : curve)
                    if (rec >= r) best = std::max(best, prec);
                ap += best;
            }
            ap /= 101.0;
        }
        ThresholdEntry entry;
        entry.threshold = t;
        entry.precision = records.empty() ? 0.0 : static_cast<double>(tp) / (tp + fp);
        entry.recall = total_gt > 0 ? static_cast<double>(tp) / total_gt : 0.0;
        entry.ap = ap;
        rep.per_threshold.push_back(entry);
        ap_sum += ap;
        ar_sum += entry.recall;
    }
    rep.map = ap_sum / static_cast<double>(thresholds.size());
    rep.mar = ar_sum / static_cast<double>(thresholds.size());
    return rep;
}

/// Annotator-agreement statistics for one instance stream.
struct ConsistencyReport {
    std::vector<std::vector<double>> per_frame_iou;  // one value per annotator per frame
    double median_iou = 0.0;
    std::vector<long> histogram;  // fixed-width bins over [0,1]
    int bins = 0;
};

/// Compares each annotator's box to the corner-wise mean of the present boxes
/// per frame. Absent annotators contribute an IoU of zero; the median runs
/// over every collected value including those zeros.
inline ConsistencyReport consistency_report(
    std::span<const std::vector<std::optional<Box>>> frames, int bins = 20) {
    if (bins < 1) throw std::invalid_argument("consistency_report: bins must be >= 1");
    std::size_t annotators = 0;
    for (const auto& frame : frames) annotators = std::max(annotators, frame.size());
    if (annotators < 2)
        throw std::invalid_argument("consistency_report: need at least 2 annotators");

    ConsistencyReport rep;
    rep.bins = bins;
    rep.histogram.assign(bins, 0);
    std::vector<double> all;
    for (const auto& frame : frames) {
        if (frame.size() != annotators)
            throw std::invalid_argument("consistency_report: annotator count varies per frame");
        std::vector<Box> present;
        for (const auto& b : frame)
            if (b) present.push_back(*b);
        if (present.empty()) {
            rep.per_frame_iou.emplace_back();
            continue;
        }
        const BoxF mean = mean_bb(present);
        std::vector<double> frame_ious;
        for (const auto& b : frame)
            frame_ious.push_back(b ? iou(BoxF(*b), mean) : 0.0);
        all.insert(all.end(), frame_ious.begin(), frame_ious.end());
        rep.per_frame_iou.push_back(std::move(frame_ious));
    }
    for (double v : all) {
        int bin = static_cast<int>(v * bins);
        if (bin >= bins) bin = bins - 1;  // IoU of exactly 1.0 lands in the top bin
        ++rep.histogram[bin];
    }
    if (!all.empty()) {
        std::sort(all.begin(), all.end());
        const std::size_t n = all.size();
        rep.median_iou = n % 2 == 1 ? all[n / 2] : 0.5 * (all[n / 2 - 1] + all[n / 2]);
    }
    return rep;
}

} // namespace lume
