//! Screenshot corpus tooling: generating labeled corpora from simulated
//! apps and evaluating the detection pipeline against them.

use std::path::Path;

use super::HarnessError;
use crate::simenv::{generate_app, ground_truth_boxes, render, GenParams};
use crate::vision::eval::{corpus_stats, DetectionStats, GroundTruthFile, GroundTruthWidget};
use crate::vision::{read_pgm_file, write_pgm_file, Image, VisionConfig, WidgetBox};

/// Renders `count` screenshots with ground truth from a run of seeded apps.
/// Screens are drawn round-robin across apps seeded `base_seed`,
/// `base_seed + 1`, ...
pub fn generate_labeled_corpus(
    base_seed: u64,
    count: usize,
    width: usize,
    height: usize,
) -> Result<Vec<(Image, Vec<WidgetBox>)>, HarnessError> {
    let mut corpus = Vec::with_capacity(count);
    let mut seed = base_seed;
    while corpus.len() < count {
        let app = generate_app(&GenParams {
            seed,
            ..GenParams::default()
        })?;
        for screen in &app.screens {
            if corpus.len() >= count {
                break;
            }
            let img = render(&app, screen.id, width, height)?;
            let truth: Vec<WidgetBox> = ground_truth_boxes(&app, screen.id, width, height)?
                .into_iter()
                .map(|(b, _)| b)
                .collect();
            corpus.push((img, truth));
        }
        seed += 1;
    }
    Ok(corpus)
}

/// As above, but with type labels kept (for classifier evaluation).
pub fn generate_typed_corpus(
    base_seed: u64,
    count: usize,
    width: usize,
    height: usize,
) -> Result<Vec<(Image, Vec<(WidgetBox, crate::embedding::WidgetType)>)>, HarnessError> {
    let mut corpus = Vec::with_capacity(count);
    let mut seed = base_seed;
    while corpus.len() < count {
        let app = generate_app(&GenParams {
            seed,
            ..GenParams::default()
        })?;
        for screen in &app.screens {
            if corpus.len() >= count {
                break;
            }
            let img = render(&app, screen.id, width, height)?;
            let truth = ground_truth_boxes(&app, screen.id, width, height)?;
            corpus.push((img, truth));
        }
        seed += 1;
    }
    Ok(corpus)
}

/// Writes a corpus to disk: `NNNN.pgm` plus a `NNNN.json` sidecar each.
pub fn export_corpus(
    corpus: &[(Image, Vec<(WidgetBox, crate::embedding::WidgetType)>)],
    dir: &Path,
) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    for (i, (img, truth)) in corpus.iter().enumerate() {
        let stem = format!("{i:04}");
        write_pgm_file(img, &dir.join(format!("{stem}.pgm")))?;
        let sidecar = GroundTruthFile {
            widgets: truth
                .iter()
                .map(|(b, t)| GroundTruthWidget {
                    x: b.x,
                    y: b.y,
                    w: b.w,
                    h: b.h,
                    type_id: t.id(),
                })
                .collect(),
        };
        std::fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&sidecar)?,
        )?;
    }
    Ok(())
}

/// Loads every `*.pgm` with its `*.json` sidecar from a directory.
pub fn load_corpus(dir: &Path) -> Result<Vec<(Image, Vec<WidgetBox>)>, HarnessError> {
    let mut stems: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.strip_suffix(".pgm").map(str::to_string)
        })
        .collect();
    stems.sort();
    let mut corpus = Vec::with_capacity(stems.len());
    for stem in stems {
        let img = read_pgm_file(&dir.join(format!("{stem}.pgm")))?;
        let sidecar: GroundTruthFile =
            serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        let truth = sidecar.widgets.iter().map(GroundTruthWidget::bounds).collect();
        corpus.push((img, truth));
    }
    Ok(corpus)
}

/// Full detection evaluation over a labeled corpus.
pub fn evaluate_vision(
    corpus: &[(Image, Vec<WidgetBox>)],
    cfg: &VisionConfig,
    iou_threshold: f64,
) -> DetectionStats {
    corpus_stats(corpus, cfg, iou_threshold)
}
