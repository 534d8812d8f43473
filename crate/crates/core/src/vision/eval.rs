//! Detection-quality evaluation against ground-truth boxes.

use serde::{Deserialize, Serialize};

use super::{detect_widgets, match_widgets, Image, VisionConfig, WidgetBox};
use crate::par;

/// Ground-truth sidecar document: one per screenshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub widgets: Vec<GroundTruthWidget>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthWidget {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    #[serde(rename = "type")]
    pub type_id: u8,
}

impl GroundTruthWidget {
    pub fn bounds(&self) -> WidgetBox {
        WidgetBox::new(self.x, self.y, self.w, self.h)
    }
}

/// Aggregate precision/recall over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl DetectionStats {
    pub fn precision(&self) -> f64 {
        let denom = self.true_positives + self.false_positives;
        if denom == 0 {
            0.0
        } else {
            self.true_positives as f64 / denom as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let denom = self.true_positives + self.false_negatives;
        if denom == 0 {
            0.0
        } else {
            self.true_positives as f64 / denom as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accumulate(&mut self, other: DetectionStats) {
        self.true_positives += other.true_positives;
        self.false_positives += other.false_positives;
        self.false_negatives += other.false_negatives;
    }
}

/// Scores one screenshot: detections matched one-to-one against truth at the
/// given IoU threshold (a true positive requires IoU strictly above it).
pub fn evaluate_detections(
    detected: &[WidgetBox],
    truth: &[WidgetBox],
    iou_threshold: f64,
) -> DetectionStats {
    let pairs = match_widgets(detected, truth, iou_threshold);
    DetectionStats {
        true_positives: pairs.len(),
        false_positives: detected.len() - pairs.len(),
        false_negatives: truth.len() - pairs.len(),
    }
}

/// Runs the full detection pipeline over a labeled corpus and aggregates
/// precision/recall/F1. Fans out over images when built with `parallel`.
pub fn corpus_stats(
    corpus: &[(Image, Vec<WidgetBox>)],
    cfg: &VisionConfig,
    iou_threshold: f64,
) -> DetectionStats {
    let per_image = par::map_slice(corpus, |(img, truth)| {
        let detected = detect_widgets(img, cfg).unwrap_or_default();
        evaluate_detections(&detected, truth, iou_threshold)
    });
    let mut total = DetectionStats {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
    };
    for s in per_image {
        total.accumulate(s);
    }
    total
}

/// Sequential reference path for the criterion benchmark.
pub fn corpus_stats_seq(
    corpus: &[(Image, Vec<WidgetBox>)],
    cfg: &VisionConfig,
    iou_threshold: f64,
) -> DetectionStats {
    let per_image = par::map_slice_seq(corpus, |(img, truth)| {
        let detected = detect_widgets(img, cfg).unwrap_or_default();
        evaluate_detections(&detected, truth, iou_threshold)
    });
    let mut total = DetectionStats {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
    };
    for s in per_image {
        total.accumulate(s);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_detection_scores_perfectly() {
        let truth = vec![WidgetBox::new(0, 0, 10, 10), WidgetBox::new(20, 0, 10, 10)];
        let stats = evaluate_detections(&truth, &truth, 0.8);
        assert_eq!(stats.true_positives, 2);
        assert_eq!(stats.f1(), 1.0);
    }

    #[test]
    fn spurious_and_missed_boxes_are_counted() {
        let truth = vec![WidgetBox::new(0, 0, 10, 10), WidgetBox::new(40, 40, 10, 10)];
        let detected = vec![WidgetBox::new(0, 0, 10, 10), WidgetBox::new(80, 80, 5, 5)];
        let stats = evaluate_detections(&detected, &truth, 0.8);
        assert_eq!(stats.true_positives, 1);
        assert_eq!(stats.false_positives, 1);
        assert_eq!(stats.false_negatives, 1);
        assert!((stats.precision() - 0.5).abs() < 1e-12);
        assert!((stats.recall() - 0.5).abs() < 1e-12);
    }
}
