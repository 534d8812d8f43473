//! Page state abstraction: widget feature vectors, layout embedding, the
//! concatenated page state vector, and page similarity.
//!
//! A widget's feature has three parts: a down-sampled image patch, a pooled
//! location mask, and a 14-way type one-hot. The page state vector is the
//! mean of the widget vectors concatenated with the layout embedding, so its
//! dimension is `d_img + d_loc + 14 + d_layout` regardless of widget count.

mod classify;
mod encoder;

pub use classify::classify_widget_type;
pub use encoder::{
    train_layout_encoder,EncoderTrainConfig, LayoutEncoder, RecurrentEncoder, TrainingPair,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{
    characterize_layout, layout_similarity, serialize_tree, LayoutError, LayoutString, LayoutTree,
};
use crate::vision::{detect_widgets, match_widgets, Image, VisionConfig, VisionError, WidgetBox};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("dimension {0} is not a perfect square")]
    NotASquare(usize),
    #[error("degenerate widget patch after clipping: {0:?}")]
    DegeneratePatch(WidgetBox),
    #[error("empty training pair set")]
    EmptyTrainingSet,
    #[error("training diverged (non-finite loss)")]
    TrainingDiverged,
    #[error(transparent)]
    Vision(#[from] VisionError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Number of widget classes in the taxonomy.
pub const WIDGET_TYPE_COUNT: usize = 14;

/// The 14-way widget taxonomy; ids are stable across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum WidgetType {
    Button = 0,
    TextView = 1,
    EditText = 2,
    CheckBox = 3,
    ImageButton = 4,
    ImageView = 5,
    RadioButton = 6,
    Switch = 7,
    SeekBar = 8,
    ProgressBar = 9,
    Spinner = 10,
    Toolbar = 11,
    ListItem = 12,
    Icon = 13,
}

impl WidgetType {
    pub fn id(&self) -> u8 {
        *self as u8
    }

    pub fn from_id(id: u8) -> Option<WidgetType> {
        WidgetType::all().get(id as usize).copied()
    }

    pub fn all() -> [WidgetType; WIDGET_TYPE_COUNT] {
        use WidgetType::*;
        [
            Button,
            TextView,
            EditText,
            CheckBox,
            ImageButton,
            ImageView,
            RadioButton,
            Switch,
            SeekBar,
            ProgressBar,
            Spinner,
            Toolbar,
            ListItem,
            Icon,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            WidgetType::Button => "Button",
            WidgetType::TextView => "TextView",
            WidgetType::EditText => "EditText",
            WidgetType::CheckBox => "CheckBox",
            WidgetType::ImageButton => "ImageButton",
            WidgetType::ImageView => "ImageView",
            WidgetType::RadioButton => "RadioButton",
            WidgetType::Switch => "Switch",
            WidgetType::SeekBar => "SeekBar",
            WidgetType::ProgressBar => "ProgressBar",
            WidgetType::Spinner => "Spinner",
            WidgetType::Toolbar => "Toolbar",
            WidgetType::ListItem => "ListItem",
            WidgetType::Icon => "Icon",
        }
    }

    pub fn one_hot(&self) -> [f64; WIDGET_TYPE_COUNT] {
        let mut v = [0.0; WIDGET_TYPE_COUNT];
        v[self.id() as usize] = 1.0;
        v
    }
}

/// A detected widget with its three-part embedded feature.
#[derive(Debug, Clone, PartialEq)]
pub struct WidgetDescriptor {
    pub bounds: WidgetBox,
    pub image_vec: Vec<f64>,
    pub loc_vec: Vec<f64>,
    pub widget_type: WidgetType,
    pub type_onehot: [f64; WIDGET_TYPE_COUNT],
}

impl WidgetDescriptor {
    /// Concatenated feature: image, then location, then type one-hot.
    pub fn widget_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.image_vec.len() + self.loc_vec.len() + WIDGET_TYPE_COUNT);
        v.extend_from_slice(&self.image_vec);
        v.extend_from_slice(&self.loc_vec);
        v.extend_from_slice(&self.type_onehot);
        v
    }
}

/// Embedded page: widgets in canonical order, layout, and the state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PageState {
    pub widgets: Vec<WidgetDescriptor>,
    pub layout: LayoutTree,
    pub layout_string: LayoutString,
    pub state_vec: Vec<f64>,
}

impl PageState {
    pub fn widget_boxes(&self) -> Vec<WidgetBox> {
        self.widgets.iter().map(|w| w.bounds).collect()
    }
}

/// Crops a patch and resamples it bilinearly to a sqrt(d) x sqrt(d) grid
/// with intensities scaled into [0, 1].
pub fn embed_widget_image(img: &Image, bounds: &WidgetBox, d_img: usize) -> Result<Vec<f64>, EmbedError> {
    let side = perfect_square_side(d_img)?;
    // Clip to the image; reject zero-area results.
    let x0 = bounds.x.min(img.width());
    let y0 = bounds.y.min(img.height());
    let x1 = bounds.right().min(img.width());
    let y1 = bounds.bottom().min(img.height());
    if x1 <= x0 || y1 <= y0 {
        return Err(EmbedError::DegeneratePatch(*bounds));
    }
    let pw = (x1 - x0) as f64;
    let ph = (y1 - y0) as f64;
    let mut out = Vec::with_capacity(d_img);
    for gy in 0..side {
        for gx in 0..side {
            // Map the grid-cell center into patch coordinates.
            let sx = (gx as f64 + 0.5) * pw / side as f64 - 0.5;
            let sy = (gy as f64 + 0.5) * ph / side as f64 - 0.5;
            let sx = sx.clamp(0.0, pw - 1.0);
            let sy = sy.clamp(0.0, ph - 1.0);
            let ix = sx.floor() as usize;
            let iy = sy.floor() as usize;
            let fx = sx - ix as f64;
            let fy = sy - iy as f64;
            let ix1 = (ix + 1).min(x1 - x0 - 1);
            let iy1 = (iy + 1).min(y1 - y0 - 1);
            let p00 = img.get(x0 + ix, y0 + iy) as f64;
            let p10 = img.get(x0 + ix1, y0 + iy) as f64;
            let p01 = img.get(x0 + ix, y0 + iy1) as f64;
            let p11 = img.get(x0 + ix1, y0 + iy1) as f64;
            let top = p00 * (1.0 - fx) + p10 * fx;
            let bottom = p01 * (1.0 - fx) + p11 * fx;
            out.push((top * (1.0 - fy) + bottom * fy) / 255.0);
        }
    }
    Ok(out)
}

/// Pools the widget's binary screen mask onto a sqrt(d) x sqrt(d) grid;
/// each component is the covered fraction of its cell.
pub fn embed_widget_location(
    bounds: &WidgetBox,
    screen_width: usize,
    screen_height: usize,
    d_loc: usize,
) -> Result<Vec<f64>, EmbedError> {
    let side = perfect_square_side(d_loc)?;
    let mut out = Vec::with_capacity(d_loc);
    for gy in 0..side {
        for gx in 0..side {
            let cx0 = gx * screen_width / side;
            let cx1 = (gx + 1) * screen_width / side;
            let cy0 = gy * screen_height / side;
            let cy1 = (gy + 1) * screen_height / side;
            let cell_area = (cx1 - cx0) * (cy1 - cy0);
            if cell_area == 0 {
                out.push(0.0);
                continue;
            }
            let ox0 = bounds.x.max(cx0);
            let ox1 = bounds.right().min(cx1);
            let oy0 = bounds.y.max(cy0);
            let oy1 = bounds.bottom().min(cy1);
            let covered = if ox1 > ox0 && oy1 > oy0 {
                (ox1 - ox0) * (oy1 - oy0)
            } else {
                0
            };
            out.push(covered as f64 / cell_area as f64);
        }
    }
    Ok(out)
}

fn perfect_square_side(d: usize) -> Result<usize, EmbedError> {
    let side = (d as f64).sqrt().round() as usize;
    if side * side != d || d == 0 {
        return Err(EmbedError::NotASquare(d));
    }
    Ok(side)
}

/// Widget similarity between two pages.
///
/// Widgets are matched one-to-one by IoU above `iou_threshold`; each matched
/// pair contributes a normalized Euclidean distance `||u - v|| / sqrt(dim)`
/// (clamped to [0, 1]); similarity is one minus the mean pair distance. Two
/// widgetless pages are identical (1.0); otherwise no matched pairs means
/// maximal dissimilarity (0.0).
pub fn widget_similarity(a: &PageState, b: &PageState, iou_threshold: f64) -> f64 {
    if a.widgets.is_empty() && b.widgets.is_empty() {
        return 1.0;
    }
    let boxes_a = a.widget_boxes();
    let boxes_b = b.widget_boxes();
    let pairs = match_widgets(&boxes_a, &boxes_b, iou_threshold);
    if pairs.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (i, j) in &pairs {
        let u = a.widgets[*i].widget_vector();
        let v = b.widgets[*j].widget_vector();
        total += normalized_distance(&u, &v);
    }
    1.0 - total / pairs.len() as f64
}

/// `||u - v||_2 / sqrt(dim)`, clamped to [0, 1].
pub fn normalized_distance(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let sq: f64 = u.iter().zip(v.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    (sq.sqrt() / (u.len() as f64).sqrt()).clamp(0.0, 1.0)
}

/// Similarity weighting and the same-page threshold.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimilarityParams {
    pub widget_weight: f64,
    pub layout_weight: f64,
    pub iou_threshold: f64,
    pub same_page_threshold: f64,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            widget_weight: 0.5,
            layout_weight: 0.5,
            iou_threshold: 0.8,
            same_page_threshold: 0.75,
        }
    }
}

/// Weighted sum of widget and layout similarity.
pub fn page_similarity(a: &PageState, b: &PageState, params: &SimilarityParams) -> f64 {
    let sim_w = widget_similarity(a, b, params.iou_threshold);
    let sim_l = layout_similarity(&a.layout_string, &b.layout_string)
        .expect("layout strings produced by serialize_tree always parse");
    params.widget_weight * sim_w + params.layout_weight * sim_l
}

/// Same-page predicate: similarity at or above the threshold (default 0.75).
pub fn same_page(a: &PageState, b: &PageState, params: &SimilarityParams) -> bool {
    page_similarity(a, b, params) >= params.same_page_threshold
}

/// Embedding dimensions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmbedDims {
    pub d_img: usize,
    pub d_loc: usize,
    pub d_layout: usize,
}

impl Default for EmbedDims {
    fn default() -> Self {
        EmbedDims {
            d_img: 64,
            d_loc: 64,
            d_layout: 32,
        }
    }
}

impl EmbedDims {
    /// Per-widget vector dimension.
    pub fn widget_dim(&self) -> usize {
        self.d_img + self.d_loc + WIDGET_TYPE_COUNT
    }

    /// Page state vector dimension.
    pub fn state_dim(&self) -> usize {
        self.widget_dim() + self.d_layout
    }
}

/// Everything needed to turn a screenshot into a [`PageState`].
#[derive(Debug, Clone)]
pub struct StateEmbedder {
    pub dims: EmbedDims,
    pub vision: VisionConfig,
    pub gap_threshold: f64,
    pub encoder: LayoutEncoder,
}

impl StateEmbedder {
    pub fn new(dims: EmbedDims, vision: VisionConfig, gap_threshold: f64, encoder: LayoutEncoder) -> Self {
        assert_eq!(encoder.dim(), dims.d_layout, "encoder dim must match d_layout");
        StateEmbedder {
            dims,
            vision,
            gap_threshold,
            encoder,
        }
    }

    /// Runs vision -> layout -> per-widget embedding -> state vector.
    pub fn page_state(&self, img: &Image) -> Result<PageState, EmbedError> {
        let boxes = detect_widgets(img, &self.vision)?;
        self.page_state_from_boxes(img, boxes)
    }

    /// Same pipeline, skipping detection (boxes already known).
    pub fn page_state_from_boxes(
        &self,
        img: &Image,
        boxes: Vec<WidgetBox>,
    ) -> Result<PageState, EmbedError> {
        let layout = characterize_layout(&boxes, img.height(), self.gap_threshold);
        let layout_string = serialize_tree(&layout);

        // Canonical widget order must match the layout's leaf indexing.
        let mut order: Vec<usize> = (0..boxes.len()).collect();
        order.sort_by_key(|&i| (boxes[i].y, boxes[i].x, boxes[i].w, boxes[i].h));

        let mut widgets = Vec::with_capacity(boxes.len());
        for &i in &order {
            let b = boxes[i];
            let image_vec = embed_widget_image(img, &b, self.dims.d_img)?;
            let loc_vec = embed_widget_location(&b, img.width(), img.height(), self.dims.d_loc)?;
            let widget_type = classify_widget_type(img, &b);
            widgets.push(WidgetDescriptor {
                bounds: b,
                image_vec,
                loc_vec,
                widget_type,
                type_onehot: widget_type.one_hot(),
            });
        }

        let widget_dim = self.dims.widget_dim();
        let mut state_vec = vec![0.0; widget_dim];
        if !widgets.is_empty() {
            for w in &widgets {
                for (acc, v) in state_vec.iter_mut().zip(w.widget_vector()) {
                    *acc += v;
                }
            }
            let n = widgets.len() as f64;
            for v in state_vec.iter_mut() {
                *v /= n;
            }
        }
        state_vec.extend(self.encoder.embed(&layout_string));
        debug_assert_eq!(state_vec.len(), self.dims.state_dim());

        Ok(PageState {
            widgets,
            layout,
            layout_string,
            state_vec,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blank_embedder() -> StateEmbedder {
        StateEmbedder::new(
            EmbedDims {
                d_img: 16,
                d_loc: 16,
                d_layout: 8,
            },
            VisionConfig::default(),
            0.05,
            LayoutEncoder::structural(8),
        )
    }

    #[test]
    fn taxonomy_has_exactly_fourteen_stable_ids() {
        let all = WidgetType::all();
        assert_eq!(all.len(), WIDGET_TYPE_COUNT);
        for (i, t) in all.iter().enumerate() {
            assert_eq!(t.id() as usize, i);
            assert_eq!(WidgetType::from_id(t.id()), Some(*t));
            let onehot = t.one_hot();
            assert_eq!(onehot.iter().sum::<f64>(), 1.0);
            assert_eq!(onehot[i], 1.0);
        }
    }

    #[test]
    fn black_patch_embeds_to_zero_vector() {
        let img = Image::filled(32, 32, 0);
        let v = embed_widget_image(&img, &WidgetBox::new(4, 4, 16, 16), 16).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn white_patch_embeds_to_ones_vector() {
        let img = Image::filled(32, 32, 255);
        let v = embed_widget_image(&img, &WidgetBox::new(4, 4, 16, 16), 16).unwrap();
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn image_embedding_is_deterministic() {
        let img = Image::from_fn(40, 40, |x, y| ((x * 5 + y * 7) % 256) as u8);
        let b = WidgetBox::new(3, 5, 21, 17);
        assert_eq!(
            embed_widget_image(&img, &b, 64).unwrap(),
            embed_widget_image(&img, &b, 64).unwrap()
        );
    }

    #[test]
    fn non_square_dimension_is_rejected() {
        let img = Image::filled(8, 8, 0);
        assert!(matches!(
            embed_widget_image(&img, &WidgetBox::new(0, 0, 4, 4), 15),
            Err(EmbedError::NotASquare(15))
        ));
    }

    #[test]
    fn out_of_frame_patch_is_degenerate() {
        let img = Image::filled(8, 8, 0);
        assert!(matches!(
            embed_widget_image(&img, &WidgetBox::new(20, 20, 4, 4), 16),
            Err(EmbedError::DegeneratePatch(_))
        ));
    }

    #[test]
    fn full_screen_widget_covers_every_location_cell() {
        let v = embed_widget_location(&WidgetBox::new(0, 0, 64, 64), 64, 64, 16).unwrap();
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn left_half_widget_pools_to_alternating_cells() {
        // 2x2 grid, widget covers exactly the left half: (1, 0, 1, 0).
        let v = embed_widget_location(&WidgetBox::new(0, 0, 32, 64), 64, 64, 4).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn widget_vector_concatenation_length() {
        let d = WidgetDescriptor {
            bounds: WidgetBox::new(0, 0, 4, 4),
            image_vec: vec![0.0; 4],
            loc_vec: vec![0.0; 4],
            widget_type: WidgetType::Button,
            type_onehot: WidgetType::Button.one_hot(),
        };
        let v = d.widget_vector();
        assert_eq!(v.len(), 22);
        // Zero image and location blocks: a single 1 in the type block.
        assert_eq!(v.iter().sum::<f64>(), 1.0);
        assert_eq!(v[8 + WidgetType::Button.id() as usize], 1.0);
    }

    #[test]
    fn paper_scale_dimensions_are_accepted_by_configuration() {
        let dims = EmbedDims {
            d_img: 4096,
            d_loc: 4096,
            d_layout: 512,
        };
        assert_eq!(dims.widget_dim(), 8206);
        assert_eq!(dims.state_dim(), 8718);
    }

    #[test]
    fn blank_screenshot_produces_zero_widget_page() {
        let embedder = blank_embedder();
        let img = Image::filled(64, 64, 128);
        let page = embedder.page_state(&img).unwrap();
        assert!(page.widgets.is_empty());
        assert_eq!(page.layout_string.as_str(), "");
        assert_eq!(page.state_vec.len(), embedder.dims.state_dim());
        let widget_block = &page.state_vec[..embedder.dims.widget_dim()];
        assert!(widget_block.iter().all(|&v| v == 0.0));
        let layout_block = &page.state_vec[embedder.dims.widget_dim()..];
        assert_eq!(layout_block, &embedder.encoder.embed(&page.layout_string)[..]);
    }

    #[test]
    fn hand_constructed_single_pair_distance() {
        // One matched pair, vectors differing by 1.0 in one of 4 components:
        // distance 0.5, similarity 0.5.
        let mk = |delta: f64| {
            let mut d = WidgetDescriptor {
                bounds: WidgetBox::new(0, 0, 10, 10),
                image_vec: vec![0.0, 0.0],
                loc_vec: vec![0.0],
                widget_type: WidgetType::Button,
                type_onehot: WidgetType::Button.one_hot(),
            };
            // Use a 4-dim feature by trimming the one-hot to reach dim 4.
            d.image_vec = vec![delta, 0.0, 0.0, 0.0];
            d.loc_vec = vec![];
            d.type_onehot = [0.0; WIDGET_TYPE_COUNT];
            d
        };
        let a = mk(1.0);
        let b = mk(0.0);
        let u = a.widget_vector();
        let v = b.widget_vector();
        // Distances are normalized by the full vector dim; check the helper
        // directly on the 4-dim prefix.
        assert!((normalized_distance(&u[..4], &v[..4]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn widgetless_pages_are_identical() {
        let embedder = blank_embedder();
        let img = Image::filled(64, 64, 128);
        let a = embedder.page_state(&img).unwrap();
        let b = embedder.page_state(&img).unwrap();
        let params = SimilarityParams::default();
        assert_eq!(widget_similarity(&a, &b, params.iou_threshold), 1.0);
        assert_eq!(page_similarity(&a, &b, &params), 1.0);
        assert!(same_page(&a, &b, &params));
    }

    #[test]
    fn disjoint_geometry_is_maximally_dissimilar_in_widget_view() {
        let mk = |x: usize| PageState {
            widgets: vec![WidgetDescriptor {
                bounds: WidgetBox::new(x, 10, 20, 20),
                image_vec: vec![0.5; 4],
                loc_vec: vec![0.5; 4],
                widget_type: WidgetType::Button,
                type_onehot: WidgetType::Button.one_hot(),
            }],
            layout: LayoutTree::empty(),
            layout_string: LayoutString("G{L{C}}".into()),
            state_vec: vec![],
        };
        let a = mk(0);
        let b = mk(200);
        assert_eq!(widget_similarity(&a, &b, 0.8), 0.0);
    }

    #[test]
    fn weighted_sum_threshold_behavior() {
        // sim_w = 0.6, sim_l = 1.0 -> 0.8 >= 0.75; sim_w = 0, sim_l = 1 -> 0.5.
        let params = SimilarityParams::default();
        let combined = params.widget_weight * 0.6 + params.layout_weight * 1.0;
        assert!(combined >= params.same_page_threshold);
        let combined2 = params.widget_weight * 0.0 + params.layout_weight * 1.0;
        assert!(combined2 < params.same_page_threshold);
    }
}
