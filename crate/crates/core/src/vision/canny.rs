//! Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
//! suppression, and double-threshold hysteresis.

use super::{EdgeMap, Image, VisionError};

const SIGMA: f64 = 1.4;
const RADIUS: usize = 2; // 5x5 Gaussian kernel

/// Runs the Canny pipeline and returns the binary edge mask.
///
/// `low` and `high` are hysteresis thresholds on the Sobel gradient
/// magnitude. Deterministic for fixed inputs; images narrower or shorter
/// than 3 pixels are rejected.
pub fn canny_edges(img: &Image, low: f64, high: f64) -> Result<EdgeMap, VisionError> {
    if img.width() < 3 || img.height() < 3 {
        return Err(VisionError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
        });
    }
    if !(low >= 0.0 && low <= high) {
        return Err(VisionError::BadThresholds { low, high });
    }

    let w = img.width();
    let h = img.height();
    let blurred = gaussian_blur(img);
    let (gx, gy) = sobel(&blurred, w, h);

    let mut mag = vec![0.0f64; w * h];
    for i in 0..w * h {
        mag[i] = gx[i].hypot(gy[i]);
    }

    let thinned = non_maximum_suppression(&mag, &gx, &gy, w, h);
    Ok(hysteresis(&thinned, w, h, low, high))
}

fn gaussian_kernel() -> [f64; 2 * RADIUS + 1] {
    let mut k = [0.0; 2 * RADIUS + 1];
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - RADIUS as f64;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
        sum += *v;
    }
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Separable 5x5 Gaussian blur with clamped borders.
fn gaussian_blur(img: &Image) -> Vec<f64> {
    let w = img.width();
    let h = img.height();
    let k = gaussian_kernel();
    let mut horiz = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                let sx = (x + i).saturating_sub(RADIUS).min(w - 1);
                acc += kv * img.get(sx, y) as f64;
            }
            horiz[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                let sy = (y + i).saturating_sub(RADIUS).min(h - 1);
                acc += kv * horiz[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// 3x3 Sobel gradients with clamped borders.
fn sobel(buf: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0f64; w * h];
    let mut gy = vec![0.0f64; w * h];
    let at = |x: isize, y: isize| -> f64 {
        let cx = x.clamp(0, w as isize - 1) as usize;
        let cy = y.clamp(0, h as isize - 1) as usize;
        buf[cy * w + cx]
    };
    for y in 0..h as isize {
        for x in 0..w as isize {
            let tl = at(x - 1, y - 1);
            let tc = at(x, y - 1);
            let tr = at(x + 1, y - 1);
            let ml = at(x - 1, y);
            let mr = at(x + 1, y);
            let bl = at(x - 1, y + 1);
            let bc = at(x, y + 1);
            let br = at(x + 1, y + 1);
            let i = y as usize * w + x as usize;
            gx[i] = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            gy[i] = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
        }
    }
    (gx, gy)
}

/// Keeps only pixels that are local maxima along the gradient direction.
///
/// The gradient angle is quantized into four sectors; a pixel survives when
/// its magnitude is at least that of both neighbors across the sector, so
/// perfectly symmetric step edges keep a two-pixel band.
fn non_maximum_suppression(mag: &[f64], gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (n1, n2) = if !(22.5..157.5).contains(&angle) {
                (mag[i - 1], mag[i + 1])
            } else if angle < 67.5 {
                (mag[i - w - 1], mag[i + w + 1])
            } else if angle < 112.5 {
                (mag[i - w], mag[i + w])
            } else {
                (mag[i - w + 1], mag[i + w - 1])
            };
            if m >= n1 && m >= n2 {
                out[i] = m;
            }
        }
    }
    out
}

/// Double-threshold hysteresis: flood from strong pixels through weak ones.
fn hysteresis(mag: &[f64], w: usize, h: usize, low: f64, high: f64) -> EdgeMap {
    let mut edges = EdgeMap::new(w, h);
    let mut visited = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..w * h {
        if mag[i] >= high && !visited[i] {
            visited[i] = true;
            stack.push(i);
            while let Some(j) = stack.pop() {
                edges.set(j % w, j / w, true);
                let x = j % w;
                let y = j / w;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let nx = x as i64 + dx;
                        let ny = y as i64 + dy;
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let n = ny as usize * w + nx as usize;
                        if !visited[n] && mag[n] >= low {
                            visited[n] = true;
                            stack.push(n);
                        }
                    }
                }
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_image_has_no_edges() {
        let img = Image::filled(64, 64, 128);
        let edges = canny_edges(&img, 50.0, 150.0).unwrap();
        assert_eq!(edges.edge_count(), 0);
    }

    #[test]
    fn degenerate_image_is_rejected() {
        let img = Image::filled(2, 64, 0);
        assert!(matches!(
            canny_edges(&img, 50.0, 150.0),
            Err(VisionError::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn inverted_thresholds_are_rejected() {
        let img = Image::filled(8, 8, 0);
        assert!(matches!(
            canny_edges(&img, 150.0, 50.0),
            Err(VisionError::BadThresholds { .. })
        ));
    }

    #[test]
    fn vertical_step_edge_is_a_narrow_band() {
        // Left half 0, right half 255: the response must stay within a
        // 1-2 px band at the step column. The Sobel peak straddles the
        // boundary between columns 31 and 32.
        let img = Image::from_fn(64, 64, |x, _| if x < 32 { 0 } else { 255 });
        let edges = canny_edges(&img, 50.0, 150.0).unwrap();
        assert!(edges.edge_count() > 0);
        for (x, _) in edges.edge_pixels() {
            assert!(
                (31..=32).contains(&x),
                "edge pixel at column {x} outside the step band"
            );
        }
        // Every interior row crosses the step somewhere.
        for y in 1..63 {
            assert!(
                edges.get(31, y) || edges.get(32, y),
                "row {y} lost the step edge"
            );
        }
    }

    #[test]
    fn filled_rectangle_produces_closed_contour_near_border() {
        // 64x64 black with a white 20x20 rectangle at (22, 22): edge pixels
        // must hug the rectangle border (within 2 px) and the contour must be
        // closed (every border pixel has an edge pixel within 1 px).
        let rect = crate::vision::WidgetBox::new(22, 22, 20, 20);
        let img = Image::from_fn(64, 64, |x, y| {
            if x >= rect.x && x < rect.right() && y >= rect.y && y < rect.bottom() {
                255
            } else {
                0
            }
        });
        let edges = canny_edges(&img, 50.0, 150.0).unwrap();
        assert!(edges.edge_count() > 0);

        let border_dist = |x: usize, y: usize| -> usize {
            // Chebyshev distance from the rectangle outline.
            let xi = x as i64;
            let yi = y as i64;
            let (x0, y0) = (rect.x as i64, rect.y as i64);
            let (x1, y1) = (rect.right() as i64 - 1, rect.bottom() as i64 - 1);
            let dx = (x0 - xi).max(xi - x1).max(0);
            let dy = (y0 - yi).max(yi - y1).max(0);
            let outside = dx.max(dy);
            if outside > 0 {
                return outside as usize;
            }
            // Inside: distance to the nearest side.
            let d = (xi - x0).min(x1 - xi).min(yi - y0).min(y1 - yi);
            d as usize
        };

        for (x, y) in edges.edge_pixels() {
            assert!(
                border_dist(x, y) <= 2,
                "edge pixel ({x},{y}) more than 2 px from the rectangle border"
            );
        }
        // Closed contour: walk the outline, require a detected pixel nearby.
        let mut outline: Vec<(usize, usize)> = Vec::new();
        for x in rect.x..rect.right() {
            outline.push((x, rect.y));
            outline.push((x, rect.bottom() - 1));
        }
        for y in rect.y..rect.bottom() {
            outline.push((rect.x, y));
            outline.push((rect.right() - 1, y));
        }
        for (bx, by) in outline {
            let mut found = false;
            'scan: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = bx as i64 + dx;
                    let ny = by as i64 + dy;
                    if nx >= 0 && ny >= 0 && (nx as usize) < 64 && (ny as usize) < 64 {
                        if edges.get(nx as usize, ny as usize) {
                            found = true;
                            break 'scan;
                        }
                    }
                }
            }
            assert!(found, "no edge pixel within 1 px of border point ({bx},{by})");
        }
    }

    #[test]
    fn deterministic_for_fixed_input() {
        let img = Image::from_fn(48, 48, |x, y| ((x * 7 + y * 13) % 251) as u8);
        let a = canny_edges(&img, 50.0, 150.0).unwrap();
        let b = canny_edges(&img, 50.0, 150.0).unwrap();
        assert_eq!(a, b);
    }
}
