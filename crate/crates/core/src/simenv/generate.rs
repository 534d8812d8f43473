//! Seeded screen-graph generation.
//!
//! Screens are packed with non-overlapping typed widgets laid out in rows
//! (occasionally separated by large vertical gaps, so ground-truth layout
//! trees are nontrivial). A spanning structure biased toward chains keeps
//! at least 80% of screens start-reachable while leaving some screens behind
//! multi-step action sequences; a subset of transitions requires a granted
//! permission or the network flag, giving system actions real exploration
//! value. Crash triggers are sampled onto otherwise-unbound widget slots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

use super::{CrashRule, Guard, Screen, SimApp, SimError, SimWidget, TransitionRule, Trigger};
use crate::actions::ActionKind;
use crate::embedding::WidgetType;
use crate::vision::WidgetBox;

const NOMINAL_W: u32 = 360;
const NOMINAL_H: u32 = 640;
const MARGIN: usize = 14;

#[derive(Debug, Clone)]
pub struct GenParams {
    pub seed: u64,
    pub n_screens: u32,
    pub widgets_min: usize,
    pub widgets_max: usize,
    /// Scales the number of extra (non-spanning) transitions.
    pub edge_density: f64,
    /// Per-slot probability scale for injected crash triggers.
    pub crash_rate: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 1,
            n_screens: 30,
            widgets_min: 3,
            widgets_max: 8,
            edge_density: 0.3,
            crash_rate: 0.03,
        }
    }
}

/// Widget types weighted so clickable targets dominate, as on real pages.
fn sample_type(rng: &mut ChaCha8Rng) -> WidgetType {
    const TABLE: &[(WidgetType, u32)] = &[
        (WidgetType::Button, 6),
        (WidgetType::TextView, 4),
        (WidgetType::EditText, 3),
        (WidgetType::CheckBox, 2),
        (WidgetType::ImageButton, 3),
        (WidgetType::ImageView, 3),
        (WidgetType::RadioButton, 2),
        (WidgetType::Switch, 2),
        (WidgetType::SeekBar, 2),
        (WidgetType::ProgressBar, 2),
        (WidgetType::Spinner, 2),
        (WidgetType::ListItem, 3),
        (WidgetType::Icon, 3),
    ];
    let total: u32 = TABLE.iter().map(|(_, w)| w).sum();
    let mut draw = rng.gen_range(0..total);
    for (t, w) in TABLE {
        if draw < *w {
            return *t;
        }
        draw -= w;
    }
    WidgetType::Button
}

fn sample_size(t: WidgetType, rng: &mut ChaCha8Rng) -> (usize, usize) {
    match t {
        WidgetType::Button => (rng.gen_range(70..=140), rng.gen_range(26..=40)),
        WidgetType::TextView => (rng.gen_range(100..=220), rng.gen_range(26..=48)),
        WidgetType::EditText => (rng.gen_range(120..=240), rng.gen_range(28..=40)),
        WidgetType::CheckBox | WidgetType::RadioButton => {
            let s = rng.gen_range(20..=28);
            (s, s)
        }
        WidgetType::ImageButton => {
            let s = rng.gen_range(34..=56);
            (s, s)
        }
        WidgetType::ImageView => (rng.gen_range(60..=140), rng.gen_range(40..=100)),
        WidgetType::Switch => (rng.gen_range(42..=56), rng.gen_range(20..=26)),
        WidgetType::SeekBar => (rng.gen_range(140..=240), rng.gen_range(12..=16)),
        WidgetType::ProgressBar => (rng.gen_range(140..=240), rng.gen_range(10..=14)),
        WidgetType::Spinner => (rng.gen_range(90..=160), rng.gen_range(26..=38)),
        WidgetType::Toolbar => (0, 0), // placed explicitly
        WidgetType::ListItem => (rng.gen_range(200..=320), rng.gen_range(30..=44)),
        WidgetType::Icon => {
            let s = rng.gen_range(22..=34);
            (s, s)
        }
    }
}

fn build_screen(id: u32, rng: &mut ChaCha8Rng, params: &GenParams) -> Result<Screen, SimError> {
    let background = rng.gen_range(215..=245u8);
    let mut widgets: Vec<SimWidget> = Vec::new();
    let target = rng.gen_range(params.widgets_min..=params.widgets_max.max(params.widgets_min));
    let content_right = NOMINAL_W as usize - MARGIN;
    // Per-screen vertical offset so same-type rows rarely align across
    // screens (keeps distinct screens from matching each other's widgets).
    let mut y = MARGIN + rng.gen_range(0..=28);

    if rng.gen_bool(0.35) {
        let h = rng.gen_range(40..=52);
        widgets.push(SimWidget {
            bounds: WidgetBox::new(MARGIN, y, content_right - MARGIN, h),
            widget_type: WidgetType::Toolbar,
            style_seed: rng.gen(),
        });
        y += h + rng.gen_range(10..=24);
    }

    while widgets.len() < target && y < NOMINAL_H as usize - 70 {
        let row_slots = rng.gen_range(1..=3usize);
        let mut x = MARGIN + rng.gen_range(0..=10);
        let mut row_h = 0usize;
        for _ in 0..row_slots {
            if widgets.len() >= target {
                break;
            }
            let t = sample_type(rng);
            let (w, h) = sample_size(t, rng);
            if x + w > content_right {
                break;
            }
            if y + h > NOMINAL_H as usize - MARGIN {
                break;
            }
            widgets.push(SimWidget {
                bounds: WidgetBox::new(x, y, w, h),
                widget_type: t,
                style_seed: rng.gen(),
            });
            x += w + rng.gen_range(12..=26);
            row_h = row_h.max(h);
        }
        if row_h == 0 {
            break;
        }
        // Occasionally a large gap: splits the layout into multiple groups
        // (0.05 of the 640-px screen is 32).
        let gap = if rng.gen_bool(0.3) {
            rng.gen_range(40..=80)
        } else {
            rng.gen_range(8..=26)
        };
        y += row_h + gap;
    }

    if widgets.len() < params.widgets_min {
        return Err(SimError::InfeasiblePacking {
            wanted: params.widgets_min,
            width: NOMINAL_W,
            height: NOMINAL_H,
        });
    }
    Ok(Screen {
        id,
        background,
        widgets,
    })
}

/// Slots on a screen that accept a given widget action kind.
fn slots_for_kind(screen: &Screen, kind: ActionKind) -> Vec<u8> {
    let matrix = crate::actions::TypeActionMatrix::default();
    screen
        .widgets
        .iter()
        .enumerate()
        .filter(|(_, w)| match kind {
            ActionKind::Click | ActionKind::DoubleClick | ActionKind::LongClick => {
                matrix.is_clickable(w.widget_type)
            }
            ActionKind::Input => matrix.is_editable(w.widget_type),
            ActionKind::Drag => matrix.is_draggable(w.widget_type),
            _ => false,
        })
        .map(|(i, _)| i as u8)
        .collect()
}

/// Deterministic seeded app generation.
pub fn generate_app(params: &GenParams) -> Result<SimApp, SimError> {
    if params.n_screens < 2 {
        return Err(SimError::TooFewScreens(params.n_screens));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_screens;

    let mut screens = Vec::with_capacity(n as usize);
    for id in 0..n {
        screens.push(build_screen(id, &mut rng, params)?);
    }

    let mut transitions: Vec<TransitionRule> = Vec::new();
    let mut used: BTreeSet<(u32, Trigger)> = BTreeSet::new();
    let mut bind = |transitions: &mut Vec<TransitionRule>,
                    used: &mut BTreeSet<(u32, Trigger)>,
                    from: u32,
                    trigger: Trigger,
                    to: u32,
                    requires: Option<Guard>|
     -> bool {
        if used.insert((from, trigger)) {
            transitions.push(TransitionRule {
                from,
                trigger,
                to,
                requires,
            });
            true
        } else {
            false
        }
    };

    // Spanning structure: chain-biased attachment keeps some screens behind
    // long action sequences.
    let reachable_target = {
        let min = (0.8 * n as f64).ceil() as u32;
        rng.gen_range(min..=n)
    };
    let mut order: Vec<u32> = (1..n).collect();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut built: Vec<u32> = vec![0];
    for &next in order.iter().take(reachable_target as usize - 1) {
        // Try parents until one has a free clickable slot.
        let mut attached = false;
        for attempt in 0..8 {
            let parent = if attempt == 0 && rng.gen_bool(0.55) {
                *built.last().unwrap()
            } else {
                built[rng.gen_range(0..built.len())]
            };
            let slots = slots_for_kind(&screens[parent as usize], ActionKind::Click);
            let free: Vec<u8> = slots
                .into_iter()
                .filter(|s| !used.contains(&(parent, Trigger::on_slot(ActionKind::Click, *s))))
                .collect();
            let trigger = if let Some(&slot) = free.first() {
                Trigger::on_slot(ActionKind::Click, slot)
            } else if !used.contains(&(parent, Trigger::with_bucket(ActionKind::Swipe, 1))) {
                Trigger::with_bucket(ActionKind::Swipe, 1)
            } else if !used.contains(&(parent, Trigger::with_bucket(ActionKind::Swipe, -1))) {
                Trigger::with_bucket(ActionKind::Swipe, -1)
            } else {
                continue;
            };
            let requires = if rng.gen_bool(0.18) {
                Some(if rng.gen_bool(0.5) {
                    Guard::PermissionGranted
                } else {
                    Guard::NetworkOn
                })
            } else {
                None
            };
            if bind(&mut transitions, &mut used, parent, trigger, next, requires) {
                built.push(next);
                attached = true;
                break;
            }
        }
        if !attached {
            // Fall back to the start screen with a swipe.
            bind(
                &mut transitions,
                &mut used,
                0,
                Trigger::with_bucket(ActionKind::Swipe, -1),
                next,
                None,
            );
            built.push(next);
        }
    }

    // Secondary bindings: inputs, drags, and extra edges per density.
    for screen in &screens {
        for slot in slots_for_kind(screen, ActionKind::Input) {
            if rng.gen_bool(0.4) {
                let to = rng.gen_range(0..n);
                let trigger = Trigger::on_slot(ActionKind::Input, slot);
                let requires = rng.gen_bool(0.1).then(|| Guard::PermissionGranted);
                bind(&mut transitions, &mut used, screen.id, trigger, to, requires);
            }
        }
        for slot in slots_for_kind(screen, ActionKind::Drag) {
            if rng.gen_bool(0.25) {
                let to = rng.gen_range(0..n);
                let trigger = Trigger::on_slot(ActionKind::Drag, slot);
                bind(&mut transitions, &mut used, screen.id, trigger, to, None);
            }
        }
    }
    let extra = (params.edge_density * n as f64 * 2.0).round() as usize;
    for _ in 0..extra {
        let from = rng.gen_range(0..n);
        let to = rng.gen_range(0..n);
        if from == to {
            continue;
        }
        let slots = slots_for_kind(&screens[from as usize], ActionKind::Click);
        if slots.is_empty() {
            continue;
        }
        let slot = slots[rng.gen_range(0..slots.len())];
        let kind = if rng.gen_bool(0.7) {
            ActionKind::Click
        } else {
            ActionKind::DoubleClick
        };
        let requires = rng.gen_bool(0.1).then(|| {
            if rng.gen_bool(0.5) {
                Guard::PermissionGranted
            } else {
                Guard::NetworkOn
            }
        });
        bind(
            &mut transitions,
            &mut used,
            from,
            Trigger::on_slot(kind, slot),
            to,
            requires,
        );
    }

    // Crash triggers on otherwise-unbound slots.
    let mut crashes: Vec<CrashRule> = Vec::new();
    for screen in &screens {
        for slot in slots_for_kind(screen, ActionKind::Click) {
            if rng.gen_bool((params.crash_rate * 1.5).min(1.0)) {
                let kind = if rng.gen_bool(0.75) {
                    ActionKind::Click
                } else {
                    ActionKind::LongClick
                };
                let trigger = Trigger::on_slot(kind, slot);
                if used.insert((screen.id, trigger)) {
                    crashes.push(CrashRule {
                        id: crashes.len() as u32,
                        screen: screen.id,
                        trigger,
                    });
                }
            }
        }
        if rng.gen_bool((params.crash_rate * 0.5).min(1.0)) {
            let trigger = Trigger::bare(ActionKind::PhoneInterrupt);
            if used.insert((screen.id, trigger)) {
                crashes.push(CrashRule {
                    id: crashes.len() as u32,
                    screen: screen.id,
                    trigger,
                });
            }
        }
    }

    let mut app = SimApp {
        seed: params.seed,
        nominal_width: NOMINAL_W,
        nominal_height: NOMINAL_H,
        start: 0,
        screens,
        transitions,
        crashes,
        reachable_fraction: 0.0,
    };
    app.reachable_fraction = reachable_fraction(&app);
    Ok(app)
}

/// BFS over transitions from the start, ignoring guards (they are always
/// satisfiable through system actions).
fn reachable_fraction(app: &SimApp) -> f64 {
    let n = app.screens.len();
    let mut seen = vec![false; n];
    seen[app.start as usize] = true;
    let mut queue = vec![app.start];
    while let Some(s) = queue.pop() {
        for rule in &app.transitions {
            if rule.from == s && !seen[rule.to as usize] {
                seen[rule.to as usize] = true;
                queue.push(rule.to);
            }
        }
    }
    seen.iter().filter(|s| **s).count() as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_byte_identical() {
        let p = GenParams::default();
        let a = generate_app(&p).unwrap();
        let b = generate_app(&p).unwrap();
        assert_eq!(a.to_canonical_json(), b.to_canonical_json());
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate_app(&GenParams::default()).unwrap();
        let b = generate_app(&GenParams {
            seed: 2,
            ..GenParams::default()
        })
        .unwrap();
        assert_ne!(a.to_canonical_json(), b.to_canonical_json());
    }

    #[test]
    fn two_screen_dense_app_is_fully_reachable() {
        let app = generate_app(&GenParams {
            seed: 3,
            n_screens: 2,
            edge_density: 1.0,
            ..GenParams::default()
        })
        .unwrap();
        assert_eq!(app.reachable_fraction, 1.0);
    }

    #[test]
    fn reachability_guarantee_holds_across_seeds() {
        for seed in 1..=20 {
            let app = generate_app(&GenParams {
                seed,
                ..GenParams::default()
            })
            .unwrap();
            assert!(
                app.reachable_fraction >= 0.8,
                "seed {seed}: only {:.2} reachable",
                app.reachable_fraction
            );
        }
    }

    #[test]
    fn zero_crash_rate_means_no_crashes() {
        let app = generate_app(&GenParams {
            seed: 4,
            crash_rate: 0.0,
            ..GenParams::default()
        })
        .unwrap();
        assert!(app.crashes.is_empty());
    }

    #[test]
    fn too_few_screens_is_an_error() {
        assert!(matches!(
            generate_app(&GenParams {
                n_screens: 1,
                ..GenParams::default()
            }),
            Err(SimError::TooFewScreens(1))
        ));
    }

    #[test]
    fn widgets_do_not_overlap() {
        let app = generate_app(&GenParams::default()).unwrap();
        for screen in &app.screens {
            for (i, a) in screen.widgets.iter().enumerate() {
                for b in screen.widgets.iter().skip(i + 1) {
                    assert_eq!(
                        a.bounds.intersection_area(&b.bounds),
                        0,
                        "screen {} widgets overlap: {:?} vs {:?}",
                        screen.id,
                        a.bounds,
                        b.bounds
                    );
                }
            }
        }
    }

    #[test]
    fn widget_counts_respect_bounds() {
        let p = GenParams::default();
        let app = generate_app(&p).unwrap();
        for screen in &app.screens {
            assert!(screen.widgets.len() >= p.widgets_min);
            // Toolbar placement may add one widget beyond the sampled target.
            assert!(screen.widgets.len() <= p.widgets_max + 1);
        }
    }
}
