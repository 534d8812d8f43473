//! Connected-component analysis over edge masks.

use super::{iou, EdgeMap, WidgetBox};

/// Turns 8-connected edge components into candidate widget boxes.
///
/// Components whose bounding box covers less than `min_area_fraction` of the
/// image, or has either side below `min_side`, are discarded as noise. Boxes
/// fully contained in another box with IoU-to-container above 0.9 are merged
/// into the container. Output is sorted by (y, x).
pub fn extract_widget_boxes(
    edges: &EdgeMap,
    min_area_fraction: f64,
    min_side: usize,
) -> Vec<WidgetBox> {
    let w = edges.width();
    let h = edges.height();
    let image_area = (w * h) as f64;
    let mut visited = vec![false; w * h];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut boxes: Vec<WidgetBox> = Vec::new();

    for sy in 0..h {
        for sx in 0..w {
            if !edges.get(sx, sy) || visited[sy * w + sx] {
                continue;
            }
            let (mut x0, mut y0, mut x1, mut y1) = (sx, sy, sx, sy);
            visited[sy * w + sx] = true;
            stack.push((sx, sy));
            while let Some((x, y)) = stack.pop() {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
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
                        let (nx, ny) = (nx as usize, ny as usize);
                        if edges.get(nx, ny) && !visited[ny * w + nx] {
                            visited[ny * w + nx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            let bx = WidgetBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
            if bx.w < min_side || bx.h < min_side {
                continue;
            }
            if (bx.area() as f64) < min_area_fraction * image_area {
                continue;
            }
            boxes.push(bx);
        }
    }

    merge_contained(&mut boxes);
    boxes.sort_by_key(|b| (b.y, b.x, b.w, b.h));
    boxes
}

/// Drops boxes fully contained in a near-coincident container (IoU > 0.9).
fn merge_contained(boxes: &mut Vec<WidgetBox>) {
    let snapshot = boxes.clone();
    boxes.retain(|b| {
        !snapshot
            .iter()
            .any(|c| c != b && c.contains(b) && iou(b, c) > 0.9)
    });
}
