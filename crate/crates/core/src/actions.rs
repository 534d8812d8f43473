//! The 17-action taxonomy: widget, page, and system actions with platform
//! applicability, per-page applicable-action inference, and action embedding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{PageState, WidgetType, WIDGET_TYPE_COUNT};

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("action target {target} out of range for page with {widgets} widgets")]
    TargetOutOfRange { target: usize, widgets: usize },
}

pub const ACTION_KIND_COUNT: usize = 17;

/// Fixed pool of input payloads, indexed deterministically.
pub const INPUT_PAYLOADS: [&str; 8] = [
    "",
    "ok",
    "The quick brown fox jumps over the lazy dog",
    "1234567890",
    "user@example.com",
    "h\u{e9}llo w\u{f6}rld \u{2603}",
    "   ",
    "aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa\
     aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionCategory {
    Widget,
    Page,
    System,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Mobile,
    Web,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlatformScope {
    Both,
    MobileOnly,
    WebOnly,
}

impl PlatformScope {
    pub fn applies_to(&self, platform: Platform) -> bool {
        match self {
            PlatformScope::Both => true,
            PlatformScope::MobileOnly => platform == Platform::Mobile,
            PlatformScope::WebOnly => platform == Platform::Web,
        }
    }
}

/// The 17 action kinds; ids are stable and dense (0..16).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum ActionKind {
    Click = 0,
    Input = 1,
    Drag = 2,
    DoubleClick = 3,
    Swipe = 4,
    SplitScreen = 5,
    Return = 6,
    BackSwitch = 7,
    AccessGrant = 8,
    AccessDeny = 9,
    NetworkSwitch = 10,
    LongClick = 11,
    OrientationSwitch = 12,
    PhoneInterrupt = 13,
    MidClick = 14,
    RightClick = 15,
    WindowSize = 16,
}

impl ActionKind {
    pub fn id(&self) -> u8 {
        *self as u8
    }

    pub fn from_id(id: u8) -> Option<ActionKind> {
        ActionKind::all().get(id as usize).copied()
    }

    pub fn all() -> [ActionKind; ACTION_KIND_COUNT] {
        use ActionKind::*;
        [
            Click,
            Input,
            Drag,
            DoubleClick,
            Swipe,
            SplitScreen,
            Return,
            BackSwitch,
            AccessGrant,
            AccessDeny,
            NetworkSwitch,
            LongClick,
            OrientationSwitch,
            PhoneInterrupt,
            MidClick,
            RightClick,
            WindowSize,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ActionKind::Click => "click",
            ActionKind::Input => "input",
            ActionKind::Drag => "drag",
            ActionKind::DoubleClick => "double_click",
            ActionKind::Swipe => "swipe",
            ActionKind::SplitScreen => "split_screen",
            ActionKind::Return => "return",
            ActionKind::BackSwitch => "back_switch",
            ActionKind::AccessGrant => "access_grant",
            ActionKind::AccessDeny => "access_deny",
            ActionKind::NetworkSwitch => "network_switch",
            ActionKind::LongClick => "long_click",
            ActionKind::OrientationSwitch => "orientation_switch",
            ActionKind::PhoneInterrupt => "phone_interrupt",
            ActionKind::MidClick => "mid_click",
            ActionKind::RightClick => "right_click",
            ActionKind::WindowSize => "window_size",
        }
    }

    pub fn category(&self) -> ActionCategory {
        use ActionKind::*;
        match self {
            Click | Input | Drag | DoubleClick | LongClick | MidClick | RightClick => {
                ActionCategory::Widget
            }
            Swipe | SplitScreen | OrientationSwitch | WindowSize => ActionCategory::Page,
            Return | BackSwitch | AccessGrant | AccessDeny | NetworkSwitch | PhoneInterrupt => {
                ActionCategory::System
            }
        }
    }

    pub fn scope(&self) -> PlatformScope {
        use ActionKind::*;
        match self {
            LongClick | OrientationSwitch | PhoneInterrupt => PlatformScope::MobileOnly,
            MidClick | RightClick | WindowSize => PlatformScope::WebOnly,
            _ => PlatformScope::Both,
        }
    }

    pub fn is_widget_action(&self) -> bool {
        self.category() == ActionCategory::Widget
    }
}

/// One concrete test event.
///
/// Widget actions carry a target index into the page's widget list; kinds
/// with a parameter carry it (swipe direction, orientation toggle, window
/// ratio, normalized input-payload index); `payload` names the input text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<usize>,
}

impl Action {
    pub fn on_widget(kind: ActionKind, target: usize) -> Self {
        Action {
            kind,
            target: Some(target),
            parameter: None,
            payload: None,
        }
    }

    pub fn bare(kind: ActionKind) -> Self {
        Action {
            kind,
            target: None,
            parameter: None,
            payload: None,
        }
    }

    pub fn with_parameter(kind: ActionKind, parameter: f64) -> Self {
        Action {
            kind,
            target: None,
            parameter: Some(parameter),
            payload: None,
        }
    }

    pub fn input(target: usize, payload_index: usize) -> Self {
        Action {
            kind: ActionKind::Input,
            target: Some(target),
            parameter: Some(payload_index as f64 / (INPUT_PAYLOADS.len() - 1) as f64),
            payload: Some(payload_index),
        }
    }

    /// Execution identity for exploration-rate bookkeeping:
    /// the (kind, target, parameter) triple.
    pub fn identity(&self) -> ActionIdentity {
        ActionIdentity {
            kind: self.kind.id(),
            target: self.target,
            parameter_bits: self.parameter.map(f64::to_bits),
        }
    }
}

/// Hashable identity of an executed action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionIdentity {
    pub kind: u8,
    pub target: Option<usize>,
    pub parameter_bits: Option<u64>,
}

/// Which widget actions apply to which widget type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypeActionMatrix {
    pub clickable: Vec<WidgetType>,
    pub editable: Vec<WidgetType>,
    pub draggable: Vec<WidgetType>,
}

impl Default for TypeActionMatrix {
    fn default() -> Self {
        use WidgetType::*;
        TypeActionMatrix {
            clickable: vec![
                Button,
                ImageButton,
                CheckBox,
                RadioButton,
                Switch,
                ListItem,
                Icon,
                Spinner,
            ],
            editable: vec![EditText],
            draggable: vec![SeekBar, ImageView],
        }
    }
}

impl TypeActionMatrix {
    pub fn is_clickable(&self, t: WidgetType) -> bool {
        self.clickable.contains(&t)
    }

    pub fn is_editable(&self, t: WidgetType) -> bool {
        self.editable.contains(&t)
    }

    pub fn is_draggable(&self, t: WidgetType) -> bool {
        self.draggable.contains(&t)
    }
}

/// Applicability configuration: the type matrix plus enumerated parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionConfig {
    pub matrix: TypeActionMatrix,
    /// Window-size change ratios enumerated on web pages.
    pub window_size_ratios: Vec<f64>,
}

impl Default for ActionConfig {
    fn default() -> Self {
        ActionConfig {
            matrix: TypeActionMatrix::default(),
            window_size_ratios: vec![0.5, 1.5],
        }
    }
}

/// Infers the applicable action set for a page on a platform.
///
/// Widget actions follow the type matrix (double click wherever click
/// applies; long/mid/right click per platform wherever click applies); page
/// and system actions are appended with their enumerated parameters (swipe
/// up and down only). Order is deterministic: widget actions by (widget
/// index, kind id), then page, then system. Input payloads are indexed
/// deterministically by widget position.
pub fn applicable_actions(page: &PageState, platform: Platform, cfg: &ActionConfig) -> Vec<Action> {
    let mut out = Vec::new();
    for (i, w) in page.widgets.iter().enumerate() {
        let t = w.widget_type;
        let mut kinds: Vec<ActionKind> = Vec::new();
        if cfg.matrix.is_clickable(t) {
            kinds.push(ActionKind::Click);
            kinds.push(ActionKind::DoubleClick);
            match platform {
                Platform::Mobile => kinds.push(ActionKind::LongClick),
                Platform::Web => {
                    kinds.push(ActionKind::MidClick);
                    kinds.push(ActionKind::RightClick);
                }
            }
        }
        if cfg.matrix.is_editable(t) {
            kinds.push(ActionKind::Input);
        }
        if cfg.matrix.is_draggable(t) {
            kinds.push(ActionKind::Drag);
        }
        kinds.sort_by_key(ActionKind::id);
        for kind in kinds {
            if kind == ActionKind::Input {
                out.push(Action::input(i, i % INPUT_PAYLOADS.len()));
            } else {
                out.push(Action::on_widget(kind, i));
            }
        }
    }

    // Page actions: swipe up/down, split screen, then platform extras.
    out.push(Action::with_parameter(ActionKind::Swipe, 1.0));
    out.push(Action::with_parameter(ActionKind::Swipe, -1.0));
    out.push(Action::bare(ActionKind::SplitScreen));
    match platform {
        Platform::Mobile => out.push(Action::with_parameter(ActionKind::OrientationSwitch, 1.0)),
        Platform::Web => {
            for &ratio in &cfg.window_size_ratios {
                out.push(Action::with_parameter(ActionKind::WindowSize, ratio));
            }
        }
    }

    // System actions.
    for kind in [
        ActionKind::Return,
        ActionKind::BackSwitch,
        ActionKind::AccessGrant,
        ActionKind::AccessDeny,
        ActionKind::NetworkSwitch,
    ] {
        out.push(Action::bare(kind));
    }
    if platform == Platform::Mobile {
        out.push(Action::bare(ActionKind::PhoneInterrupt));
    }
    out
}

/// Embedding dimension for a given widget vector dimension.
pub fn action_embedding_dim(widget_dim: usize) -> usize {
    ACTION_KIND_COUNT + widget_dim + 1
}

/// Embeds an action as kind one-hot ++ target widget vector ++ parameter,
/// zero-padding the inapplicable parts.
pub fn embed_action(
    action: &Action,
    page: &PageState,
    widget_dim: usize,
) -> Result<Vec<f64>, ActionError> {
    let mut v = vec![0.0; action_embedding_dim(widget_dim)];
    v[action.kind.id() as usize] = 1.0;
    if let Some(t) = action.target {
        let w = page
            .widgets
            .get(t)
            .ok_or(ActionError::TargetOutOfRange {
                target: t,
                widgets: page.widgets.len(),
            })?;
        let wv = w.widget_vector();
        debug_assert_eq!(wv.len(), widget_dim);
        v[ACTION_KIND_COUNT..ACTION_KIND_COUNT + widget_dim].copy_from_slice(&wv);
    }
    if let Some(p) = action.parameter {
        v[ACTION_KIND_COUNT + widget_dim] = p;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{LayoutEncoder, StateEmbedder, EmbedDims, WidgetDescriptor};
    use crate::layout::{LayoutString, LayoutTree};
    use crate::vision::{Image, VisionConfig, WidgetBox};

    fn blank_page() -> PageState {
        let embedder = StateEmbedder::new(
            EmbedDims {
                d_img: 4,
                d_loc: 4,
                d_layout: 4,
            },
            VisionConfig::default(),
            0.05,
            LayoutEncoder::structural(4),
        );
        embedder.page_state(&Image::filled(64, 64, 128)).unwrap()
    }

    fn page_with(types: &[WidgetType]) -> PageState {
        let widgets = types
            .iter()
            .enumerate()
            .map(|(i, t)| WidgetDescriptor {
                bounds: WidgetBox::new(10, 10 + 30 * i, 20, 20),
                image_vec: vec![0.0; 4],
                loc_vec: vec![0.0; 4],
                widget_type: *t,
                type_onehot: t.one_hot(),
            })
            .collect();
        PageState {
            widgets,
            layout: LayoutTree::empty(),
            layout_string: LayoutString(String::new()),
            state_vec: vec![],
        }
    }

    #[test]
    fn taxonomy_counts_match_per_platform() {
        let count = |platform: Platform, cat: ActionCategory| {
            ActionKind::all()
                .iter()
                .filter(|k| k.scope().applies_to(platform) && k.category() == cat)
                .count()
        };
        assert_eq!(ActionKind::all().len(), 17);
        assert_eq!(count(Platform::Mobile, ActionCategory::Widget), 5);
        assert_eq!(count(Platform::Mobile, ActionCategory::Page), 3);
        assert_eq!(count(Platform::Mobile, ActionCategory::System), 6);
        assert_eq!(count(Platform::Web, ActionCategory::Widget), 6);
        assert_eq!(count(Platform::Web, ActionCategory::Page), 3);
        assert_eq!(count(Platform::Web, ActionCategory::System), 5);
    }

    #[test]
    fn ids_are_dense_and_stable() {
        for (i, k) in ActionKind::all().iter().enumerate() {
            assert_eq!(k.id() as usize, i);
            assert_eq!(ActionKind::from_id(k.id()), Some(*k));
        }
    }

    #[test]
    fn blank_mobile_page_gets_exactly_the_page_and_system_actions() {
        let page = blank_page();
        let acts = applicable_actions(&page, Platform::Mobile, &ActionConfig::default());
        // swipe x2, split_screen, orientation_switch, return, back_switch,
        // access_grant, access_deny, network_switch, phone_interrupt.
        assert_eq!(acts.len(), 9);
        assert!(acts.iter().all(|a| a.target.is_none()));
        let kinds: Vec<ActionKind> = acts.iter().map(|a| a.kind).collect();
        assert_eq!(kinds.iter().filter(|k| **k == ActionKind::Swipe).count(), 2);
        assert!(kinds.contains(&ActionKind::OrientationSwitch));
        assert!(kinds.contains(&ActionKind::PhoneInterrupt));
    }

    #[test]
    fn one_button_on_web_gets_click_family_without_input_or_long_click() {
        let page = page_with(&[WidgetType::Button]);
        let acts = applicable_actions(&page, Platform::Web, &ActionConfig::default());
        let widget_kinds: Vec<ActionKind> = acts
            .iter()
            .filter(|a| a.target == Some(0))
            .map(|a| a.kind)
            .collect();
        assert_eq!(
            widget_kinds,
            vec![
                ActionKind::Click,
                ActionKind::DoubleClick,
                ActionKind::MidClick,
                ActionKind::RightClick
            ]
        );
        assert!(!acts.iter().any(|a| a.kind == ActionKind::Input));
        assert!(!acts.iter().any(|a| a.kind == ActionKind::LongClick));
    }

    #[test]
    fn phone_interrupt_never_appears_on_web() {
        let page = page_with(&[WidgetType::Button, WidgetType::EditText]);
        let acts = applicable_actions(&page, Platform::Web, &ActionConfig::default());
        assert!(!acts.iter().any(|a| a.kind == ActionKind::PhoneInterrupt));
        assert!(!acts.iter().any(|a| a.kind == ActionKind::OrientationSwitch));
    }

    #[test]
    fn input_applies_only_to_edit_text() {
        let page = page_with(&[WidgetType::EditText, WidgetType::SeekBar]);
        let acts = applicable_actions(&page, Platform::Mobile, &ActionConfig::default());
        let inputs: Vec<&Action> = acts.iter().filter(|a| a.kind == ActionKind::Input).collect();
        assert_eq!(inputs.len(), 1);
        assert_eq!(inputs[0].target, Some(0));
        assert_eq!(inputs[0].payload, Some(0));
        assert!(acts
            .iter()
            .any(|a| a.kind == ActionKind::Drag && a.target == Some(1)));
    }

    #[test]
    fn applicable_actions_are_deterministic() {
        let page = page_with(&[WidgetType::Button, WidgetType::EditText, WidgetType::Icon]);
        let a = applicable_actions(&page, Platform::Mobile, &ActionConfig::default());
        let b = applicable_actions(&page, Platform::Mobile, &ActionConfig::default());
        assert_eq!(a, b);
    }

    #[test]
    fn system_action_embedding_is_onehot_then_zeros() {
        let page = blank_page();
        let v = embed_action(&Action::bare(ActionKind::Return), &page, 22).unwrap();
        assert_eq!(v.len(), 17 + 22 + 1);
        assert_eq!(v[ActionKind::Return.id() as usize], 1.0);
        assert_eq!(v.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn swipe_up_embedding_carries_parameter_one() {
        let page = blank_page();
        let v = embed_action(
            &Action::with_parameter(ActionKind::Swipe, 1.0),
            &page,
            22,
        )
        .unwrap();
        assert_eq!(v[ActionKind::Swipe.id() as usize], 1.0);
        assert_eq!(*v.last().unwrap(), 1.0);
    }

    #[test]
    fn widget_action_embedding_includes_widget_vector() {
        let page = page_with(&[WidgetType::Button]);
        let widget_dim = 4 + 4 + WIDGET_TYPE_COUNT;
        let v = embed_action(&Action::on_widget(ActionKind::Click, 0), &page, widget_dim).unwrap();
        assert_eq!(v[ActionKind::Click.id() as usize], 1.0);
        let block = &v[ACTION_KIND_COUNT..ACTION_KIND_COUNT + widget_dim];
        assert_eq!(block, &page.widgets[0].widget_vector()[..]);
        assert_eq!(*v.last().unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_target_is_an_error() {
        let page = blank_page();
        assert!(matches!(
            embed_action(&Action::on_widget(ActionKind::Click, 3), &page, 22),
            Err(ActionError::TargetOutOfRange { .. })
        ));
    }
}
