//! Deterministic grayscale screen renderer.
//!
//! Every widget type has a distinct visual grammar so both the edge detector
//! and the heuristic classifier have signal. Contrast is organized in three
//! classes relative to the per-screen background shade: dark marks (borders,
//! glyphs, thumbs), mid blocks (filled cards, tracks, gradients), and light
//! interiors. Internal decorations are kept thin or tiny so component
//! filtering never promotes them to widget candidates of their own. Drawn
//! content always spans the widget's full box, so the box is the ground
//! truth for detection scoring.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SimApp, SimError};
use crate::embedding::WidgetType;
use crate::vision::{Image, WidgetBox};

/// Dark marks sit this far below the background.
const DARK_DROP: i32 = 165;
/// Mid blocks sit this far below the background.
const MID_DROP: i32 = 85;
/// Light interiors sit just below the background (no detectable edge).
const LIGHT_DROP: i32 = 15;

fn shade(background: u8, drop: i32, jitter: i32) -> u8 {
    (background as i32 - drop + jitter).clamp(10, 250) as u8
}

/// Scales nominal-space ground-truth boxes to the requested render size.
pub fn ground_truth_boxes(
    app: &SimApp,
    screen_id: u32,
    width: usize,
    height: usize,
) -> Result<Vec<(WidgetBox, WidgetType)>, SimError> {
    let screen = app.screen(screen_id)?;
    let sx = width as f64 / app.nominal_width as f64;
    let sy = height as f64 / app.nominal_height as f64;
    Ok(screen
        .widgets
        .iter()
        .map(|w| {
            let x = (w.bounds.x as f64 * sx).round() as usize;
            let y = (w.bounds.y as f64 * sy).round() as usize;
            let bw = ((w.bounds.w as f64 * sx).round() as usize).max(2);
            let bh = ((w.bounds.h as f64 * sy).round() as usize).max(2);
            let x = x.min(width.saturating_sub(bw + 1));
            let y = y.min(height.saturating_sub(bh + 1));
            (WidgetBox::new(x, y, bw, bh), w.widget_type)
        })
        .collect())
}

/// Renders a screen at the given dimensions. Bit-identical per input.
pub fn render(app: &SimApp, screen_id: u32, width: usize, height: usize) -> Result<Image, SimError> {
    let screen = app.screen(screen_id)?;
    let bg = screen.background;
    let mut img = Image::filled(width, height, bg);
    let boxes = ground_truth_boxes(app, screen_id, width, height)?;
    for ((bounds, widget_type), w) in boxes.iter().zip(screen.widgets.iter()) {
        let mut style = ChaCha8Rng::seed_from_u64(w.style_seed);
        draw_widget(&mut img, bounds, *widget_type, bg, &mut style);
    }
    Ok(img)
}

fn draw_widget(img: &mut Image, b: &WidgetBox, t: WidgetType, bg: u8, style: &mut ChaCha8Rng) {
    let dark = shade(bg, DARK_DROP, style.gen_range(-8..=8));
    let mid = shade(bg, MID_DROP, style.gen_range(-6..=6));
    let light = shade(bg, LIGHT_DROP, style.gen_range(-3..=3));
    match t {
        WidgetType::Button => {
            fill_rect(img, b.x, b.y, b.w, b.h, light);
            border(img, b, 2, dark);
            // Centered label bar, 3 px tall, well inside the border.
            let bar_half = ((b.w as f64) * style.gen_range(0.18..0.26)) as usize;
            let cx = b.x + b.w / 2;
            let cy = b.y + b.h / 2;
            let x0 = cx.saturating_sub(bar_half).max(b.x + 5);
            let x1 = (cx + bar_half).min(b.right() - 5);
            if x1 > x0 {
                fill_rect(img, x0, cy.saturating_sub(1), x1 - x0, 3, dark);
            }
        }
        WidgetType::TextView => {
            fill_rect(img, b.x, b.y, b.w, b.h, mid);
            let strokes = style.gen_range(2..=4usize);
            let stroke_h = 2;
            let span = (b.h.saturating_sub(8)).max(1);
            for i in 0..strokes {
                let y = b.y + 4 + i * span / strokes;
                if y + stroke_h >= b.bottom() {
                    break;
                }
                let frac = style.gen_range(0.55..0.85);
                let len = ((b.w.saturating_sub(8)) as f64 * frac) as usize;
                fill_rect(img, b.x + 4, y, len.max(4), stroke_h, dark);
            }
        }
        WidgetType::EditText => {
            fill_rect(img, b.x, b.y, b.w, b.h, light);
            border(img, b, 2, shade(bg, 150, style.gen_range(-6..=6)));
            // Dark underline hugging the bottom border.
            if b.h > 10 {
                fill_rect(img, b.x + 3, b.bottom() - 5, b.w - 6, 3, dark);
            }
        }
        WidgetType::CheckBox => {
            fill_rect(img, b.x, b.y, b.w, b.h, light);
            border(img, b, 2, dark);
            if style.gen_bool(0.5) && b.w > 10 && b.h > 10 {
                let cx = b.x + b.w / 2;
                let cy = b.y + b.h / 2;
                fill_rect(img, cx - 1, cy - 1, 3, 3, dark);
            }
        }
        WidgetType::ImageButton => {
            // Vertical gradient interior behind a dark frame.
            let top = shade(bg, 150, style.gen_range(-5..=5));
            let bottom = shade(bg, 110, style.gen_range(-5..=5));
            for y in b.y..b.bottom() {
                let fr = (y - b.y) as f64 / b.h.max(1) as f64;
                let v = top as f64 + (bottom as f64 - top as f64) * fr;
                fill_rect(img, b.x, y, b.w, 1, v as u8);
            }
            border(img, b, 2, dark);
        }
        WidgetType::ImageView => {
            // Smooth horizontal gradient, no frame.
            let left = shade(bg, 160, style.gen_range(-5..=5));
            let right = shade(bg, 95, style.gen_range(-5..=5));
            for x in b.x..b.right() {
                let fr = (x - b.x) as f64 / b.w.max(1) as f64;
                let v = left as f64 + (right as f64 - left as f64) * fr;
                for y in b.y..b.bottom() {
                    img.set(x, y, v as u8);
                }
            }
        }
        WidgetType::RadioButton => {
            fill_rect(img, b.x, b.y, b.w, b.h, bg);
            let r = (b.w.min(b.h) as f64) / 2.0 - 0.5;
            ring(img, b, r, 2.0, dark);
            if style.gen_bool(0.5) && b.w > 12 {
                let cx = b.x + b.w / 2;
                let cy = b.y + b.h / 2;
                fill_rect(img, cx - 1, cy - 1, 3, 3, dark);
            }
        }
        WidgetType::Switch => {
            // Rounded track with a full-height thumb at one end.
            rounded_fill(img, b, mid);
            let r = (b.h / 2).saturating_sub(1).max(2);
            let left_side = style.gen_bool(0.5);
            let cx = if left_side { b.x + r + 1 } else { b.right() - r - 1 };
            let cy = b.y + b.h / 2;
            disk(img, cx, cy, r as f64, dark);
        }
        WidgetType::SeekBar => {
            fill_rect(img, b.x, b.y, b.w, b.h, bg);
            let cy = b.y + b.h / 2;
            fill_rect(img, b.x, cy.saturating_sub(1), b.w, 3, shade(bg, 150, 0));
            let pos = style.gen_range(0.2..0.8);
            let r = (b.h as f64) / 2.0 - 0.5;
            let cx = b.x + (b.w as f64 * pos) as usize;
            let cx = cx.clamp(b.x + b.h / 2, b.right().saturating_sub(b.h / 2 + 1));
            disk(img, cx, cy, r, dark);
        }
        WidgetType::ProgressBar => {
            fill_rect(img, b.x, b.y, b.w, b.h, light);
            border(img, b, 2, shade(bg, 110, style.gen_range(-5..=5)));
            let pct = style.gen_range(0.25..0.75);
            let inner_w = b.w.saturating_sub(4);
            let fill_w = ((inner_w as f64) * pct) as usize;
            if b.h > 4 {
                fill_rect(img, b.x + 2, b.y + 2, fill_w, b.h - 4, shade(bg, 150, 0));
            }
        }
        WidgetType::Spinner => {
            fill_rect(img, b.x, b.y, b.w, b.h, light);
            border(img, b, 2, dark);
            // Down-pointing triangle hugging the right border.
            let th = ((b.h as f64) * 0.45) as usize;
            let tw = ((b.h as f64) * 0.7) as usize;
            let right_edge = b.right() - 2;
            let top = b.y + (b.h - th) / 2;
            for row in 0..th {
                let w_here = tw.saturating_sub(row * tw / th.max(1));
                if w_here == 0 {
                    break;
                }
                fill_rect(img, right_edge - w_here, top + row, w_here, 1, dark);
            }
        }
        WidgetType::Toolbar => {
            fill_rect(img, b.x, b.y, b.w, b.h, shade(bg, 155, style.gen_range(-6..=6)));
            let n = style.gen_range(2..=3usize);
            let cy = b.y + b.h / 2;
            for i in 0..n {
                let cx = b.right().saturating_sub(12 + i * 14);
                if cx > b.x + 8 {
                    fill_rect(img, cx - 3, cy - 3, 6, 6, shade(bg, 20, 0));
                }
            }
        }
        WidgetType::ListItem => {
            fill_rect(img, b.x, b.y, b.w, b.h, light);
            border(img, b, 2, shade(bg, 95, style.gen_range(-5..=5)));
            let cy = b.y + b.h / 2;
            // Left icon blob plus one text stroke.
            fill_rect(img, b.x + 5, cy - 3, 6, 6, dark);
            let len = ((b.w as f64) * style.gen_range(0.3..0.45)) as usize;
            fill_rect(img, b.x + 16, cy - 1, len, 2, dark);
        }
        WidgetType::Icon => {
            fill_rect(img, b.x, b.y, b.w, b.h, bg);
            if style.gen_bool(0.6) {
                // Plus glyph spanning the box.
                let bar_w = (b.w / 3).max(3);
                let bar_h = (b.h / 3).max(3);
                fill_rect(img, b.x + (b.w - bar_w) / 2, b.y, bar_w, b.h, dark);
                fill_rect(img, b.x, b.y + (b.h - bar_h) / 2, b.w, bar_h, dark);
            } else {
                // Filled diamond touching all four sides.
                let cx = b.x as f64 + b.w as f64 / 2.0;
                let cy = b.y as f64 + b.h as f64 / 2.0;
                for y in b.y..b.bottom() {
                    for x in b.x..b.right() {
                        let dx = (x as f64 + 0.5 - cx).abs() / (b.w as f64 / 2.0);
                        let dy = (y as f64 + 0.5 - cy).abs() / (b.h as f64 / 2.0);
                        if dx + dy <= 1.0 {
                            img.set(x, y, dark);
                        }
                    }
                }
            }
        }
    }
}

fn fill_rect(img: &mut Image, x: usize, y: usize, w: usize, h: usize, shade: u8) {
    let x1 = (x + w).min(img.width());
    let y1 = (y + h).min(img.height());
    for yy in y.min(img.height())..y1 {
        for xx in x.min(img.width())..x1 {
            img.set(xx, yy, shade);
        }
    }
}

fn border(img: &mut Image, b: &WidgetBox, thickness: usize, shade: u8) {
    let t = thickness.min(b.w / 2).min(b.h / 2).max(1);
    fill_rect(img, b.x, b.y, b.w, t, shade);
    fill_rect(img, b.x, b.bottom() - t, b.w, t, shade);
    fill_rect(img, b.x, b.y, t, b.h, shade);
    fill_rect(img, b.right() - t, b.y, t, b.h, shade);
}

fn disk(img: &mut Image, cx: usize, cy: usize, r: f64, shade: u8) {
    let x0 = cx.saturating_sub(r as usize + 1);
    let y0 = cy.saturating_sub(r as usize + 1);
    for y in y0..(cy + r as usize + 2).min(img.height()) {
        for x in x0..(cx + r as usize + 2).min(img.width()) {
            let dx = x as f64 - cx as f64;
            let dy = y as f64 - cy as f64;
            if (dx * dx + dy * dy).sqrt() <= r {
                img.set(x, y, shade);
            }
        }
    }
}

fn ring(img: &mut Image, b: &WidgetBox, r: f64, thickness: f64, shade: u8) {
    let cx = b.x as f64 + b.w as f64 / 2.0 - 0.5;
    let cy = b.y as f64 + b.h as f64 / 2.0 - 0.5;
    for y in b.y..b.bottom() {
        for x in b.x..b.right() {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let d = (dx * dx + dy * dy).sqrt();
            if d <= r && d >= r - thickness {
                img.set(x, y, shade);
            }
        }
    }
}

/// Rectangle with semicircular ends (pill shape).
fn rounded_fill(img: &mut Image, b: &WidgetBox, shade: u8) {
    let r = b.h as f64 / 2.0;
    let cy = b.y as f64 + r - 0.5;
    let left_cx = b.x as f64 + r - 0.5;
    let right_cx = b.right() as f64 - r - 0.5;
    for y in b.y..b.bottom() {
        for x in b.x..b.right() {
            let xf = x as f64;
            let inside = if xf < left_cx {
                let dx = xf - left_cx;
                let dy = y as f64 - cy;
                (dx * dx + dy * dy).sqrt() <= r
            } else if xf > right_cx {
                let dx = xf - right_cx;
                let dy = y as f64 - cy;
                (dx * dx + dy * dy).sqrt() <= r
            } else {
                true
            };
            if inside {
                img.set(x, y, shade);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simenv::{Screen, SimWidget};
    use crate::vision::{canny_edges, detect_widgets, VisionConfig};

    fn one_widget_app(t: WidgetType, w: usize, h: usize) -> SimApp {
        SimApp {
            seed: 1,
            nominal_width: 240,
            nominal_height: 240,
            start: 0,
            screens: vec![Screen {
                id: 0,
                background: 230,
                widgets: vec![SimWidget {
                    bounds: WidgetBox::new(60, 60, w, h),
                    widget_type: t,
                    style_seed: 3,
                }],
            }],
            transitions: vec![],
            crashes: vec![],
            reachable_fraction: 1.0,
        }
    }

    #[test]
    fn empty_screen_renders_uniform_and_edge_free() {
        let mut app = one_widget_app(WidgetType::Button, 80, 30);
        app.screens[0].widgets.clear();
        let img = render(&app, 0, 240, 240).unwrap();
        let edges = canny_edges(&img, 50.0, 150.0).unwrap();
        assert_eq!(edges.edge_count(), 0);
        let boxes = detect_widgets(&img, &VisionConfig::default()).unwrap();
        assert!(boxes.is_empty());
    }

    #[test]
    fn rendering_twice_is_bit_identical() {
        let app = one_widget_app(WidgetType::SeekBar, 150, 14);
        assert_eq!(render(&app, 0, 240, 240).unwrap(), render(&app, 0, 240, 240).unwrap());
    }

    #[test]
    fn each_type_is_detected_as_a_single_box() {
        for t in WidgetType::all() {
            let (w, h) = match t {
                WidgetType::CheckBox | WidgetType::RadioButton => (24, 24),
                WidgetType::Icon => (26, 26),
                WidgetType::ImageButton => (40, 40),
                WidgetType::SeekBar => (150, 14),
                WidgetType::ProgressBar => (150, 12),
                WidgetType::Toolbar => (200, 44),
                WidgetType::Switch => (48, 22),
                WidgetType::ImageView => (90, 70),
                _ => (110, 34),
            };
            let app = one_widget_app(t, w, h);
            let img = render(&app, 0, 240, 240).unwrap();
            let boxes = detect_widgets(&img, &VisionConfig::default()).unwrap();
            assert_eq!(
                boxes.len(),
                1,
                "type {:?} produced {} boxes: {:?}",
                t,
                boxes.len(),
                boxes
            );
            let truth = ground_truth_boxes(&app, 0, 240, 240).unwrap()[0].0;
            let v = crate::vision::iou(&boxes[0], &truth);
            assert!(v > 0.8, "type {:?} IoU {v:.3} (detected {:?}, truth {truth:?})", t, boxes[0]);
        }
    }

    #[test]
    fn invalid_screen_is_an_error() {
        let app = one_widget_app(WidgetType::Button, 80, 30);
        assert!(matches!(render(&app, 9, 100, 100), Err(SimError::InvalidScreen(9))));
    }
}
