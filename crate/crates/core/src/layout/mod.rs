//! Layout characterization: the Group/Line/Column hierarchy, its brace-string
//! serialization, and tree edit distance over parsed layout strings.
//!
//! A page layout is a four-level tree (root -> Group -> Line -> Column). The
//! brace string uses the alphabet `{G, L, C, '{', '}'}`: each Group emits
//! `G{...}`, each Line `L{...}`, each Column `C`, and the root emits only the
//! concatenation of its children, so a root-only tree serializes to the empty
//! string.

mod zhang_shasha;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vision::WidgetBox;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("malformed layout string at byte {position}: {message}")]
    Malformed { position: usize, message: String },
}

/// Node label of a parsed layout tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeLabel {
    Group,
    Line,
    Column,
}

impl NodeLabel {
    pub fn letter(&self) -> char {
        match self {
            NodeLabel::Group => 'G',
            NodeLabel::Line => 'L',
            NodeLabel::Column => 'C',
        }
    }
}

/// General ordered labeled tree node; the form edit distance operates on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub label: NodeLabel,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(label: NodeLabel) -> Self {
        TreeNode {
            label,
            children: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(TreeNode::node_count).sum::<usize>()
    }
}

pub fn forest_node_count(forest: &[TreeNode]) -> usize {
    forest.iter().map(TreeNode::node_count).sum()
}

/// Brace-string serialization of a layout forest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayoutString(pub String);

impl LayoutString {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for LayoutString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// The four-level page layout: Groups of Lines of Columns.
///
/// Columns are leaves and carry the index of their widget in the page's
/// canonical widget order (sorted by (y, x, w, h)).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutTree {
    pub groups: Vec<GroupNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupNode {
    pub lines: Vec<LineNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineNode {
    /// Widget indices, left to right.
    pub columns: Vec<usize>,
}

impl LayoutTree {
    pub fn empty() -> Self {
        LayoutTree { groups: Vec::new() }
    }

    pub fn leaf_count(&self) -> usize {
        self.groups
            .iter()
            .flat_map(|g| &g.lines)
            .map(|l| l.columns.len())
            .sum()
    }

    /// Converts to the general tree form used by the edit distance.
    pub fn to_forest(&self) -> Vec<TreeNode> {
        self.groups
            .iter()
            .map(|g| TreeNode {
                label: NodeLabel::Group,
                children: g
                    .lines
                    .iter()
                    .map(|l| TreeNode {
                        label: NodeLabel::Line,
                        children: l
                            .columns
                            .iter()
                            .map(|_| TreeNode::leaf(NodeLabel::Column))
                            .collect(),
                    })
                    .collect(),
            })
            .collect()
    }
}

/// Builds the Group/Line/Column hierarchy from widget boxes.
///
/// Groups are maximal runs under vertical-gap clustering: boxes are sorted by
/// (y, x, w, h) and a new Group starts when the gap between a box's top edge
/// and the previous box's bottom edge exceeds `gap_threshold` of the screen
/// height. Within a Group, Lines are the connected components of the
/// "vertical intervals overlap by at least half the smaller height" relation;
/// Columns are Line members sorted by x. Permutation-invariant: leaf indices
/// refer to the canonical sorted order, not the input order.
pub fn characterize_layout(
    boxes: &[WidgetBox],
    screen_height: usize,
    gap_threshold: f64,
) -> LayoutTree {
    if boxes.is_empty() {
        return LayoutTree::empty();
    }
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by_key(|&i| (boxes[i].y, boxes[i].x, boxes[i].w, boxes[i].h));
    // Canonical index = rank in the sorted order.
    let max_gap = gap_threshold * screen_height as f64;

    let mut group_runs: Vec<Vec<usize>> = Vec::new(); // canonical indices
    for rank in 0..order.len() {
        let start_new = if rank == 0 {
            true
        } else {
            let prev = &boxes[order[rank - 1]];
            let cur = &boxes[order[rank]];
            let gap = cur.y.saturating_sub(prev.bottom()) as f64;
            gap > max_gap
        };
        if start_new {
            group_runs.push(Vec::new());
        }
        group_runs.last_mut().unwrap().push(rank);
    }

    let canon_box = |rank: usize| &boxes[order[rank]];
    let mut groups = Vec::with_capacity(group_runs.len());
    for run in group_runs {
        // Lines: connected components under the >= 50% vertical-overlap rule.
        let n = run.len();
        let mut component = vec![usize::MAX; n];
        let mut next_component = 0usize;
        for i in 0..n {
            if component[i] != usize::MAX {
                continue;
            }
            component[i] = next_component;
            let mut stack = vec![i];
            while let Some(k) = stack.pop() {
                for j in 0..n {
                    if component[j] == usize::MAX
                        && shares_line(canon_box(run[k]), canon_box(run[j]))
                    {
                        component[j] = next_component;
                        stack.push(j);
                    }
                }
            }
            next_component += 1;
        }
        let mut lines: Vec<Vec<usize>> = vec![Vec::new(); next_component];
        for (i, &rank) in run.iter().enumerate() {
            lines[component[i]].push(rank);
        }
        // Order lines top-to-bottom, members left-to-right.
        for members in lines.iter_mut() {
            members.sort_by_key(|&r| {
                let b = canon_box(r);
                (b.x, b.y, b.w, b.h)
            });
        }
        lines.sort_by_key(|members| {
            let top = members.iter().map(|&r| canon_box(r).y).min().unwrap_or(0);
            let left = members.iter().map(|&r| canon_box(r).x).min().unwrap_or(0);
            (top, left)
        });
        groups.push(GroupNode {
            lines: lines
                .into_iter()
                .map(|columns| LineNode { columns })
                .collect(),
        });
    }
    LayoutTree { groups }
}

/// Two boxes share a Line when their [y, y+h) intervals overlap by at least
/// half of the smaller height.
fn shares_line(a: &WidgetBox, b: &WidgetBox) -> bool {
    let top = a.y.max(b.y);
    let bottom = a.bottom().min(b.bottom());
    if bottom <= top {
        return false;
    }
    let overlap = bottom - top;
    2 * overlap >= a.h.min(b.h)
}

/// Serializes the tree: `G{...}` per Group, `L{...}` per Line, `C` per Column.
pub fn serialize_tree(tree: &LayoutTree) -> LayoutString {
    let mut out = String::new();
    for g in &tree.groups {
        out.push('G');
        out.push('{');
        for l in &g.lines {
            out.push('L');
            out.push('{');
            for _ in &l.columns {
                out.push('C');
            }
            out.push('}');
        }
        out.push('}');
    }
    LayoutString(out)
}

/// Parses a brace string into an ordered labeled forest.
///
/// Grammar: `forest := node*`, `node := ('G'|'L'|'C') ('{' forest '}')?`.
/// Arbitrary nesting is accepted so the edit distance is defined on any
/// {G,L,C}-labeled tree, not only four-level page layouts.
pub fn parse_forest(s: &str) -> Result<Vec<TreeNode>, LayoutError> {
    let bytes = s.as_bytes();
    let mut pos = 0usize;
    let forest = parse_nodes(bytes, &mut pos)?;
    if pos != bytes.len() {
        return Err(LayoutError::Malformed {
            position: pos,
            message: "unexpected closing brace".into(),
        });
    }
    Ok(forest)
}

fn parse_nodes(bytes: &[u8], pos: &mut usize) -> Result<Vec<TreeNode>, LayoutError> {
    let mut nodes = Vec::new();
    while *pos < bytes.len() {
        let label = match bytes[*pos] {
            b'G' => NodeLabel::Group,
            b'L' => NodeLabel::Line,
            b'C' => NodeLabel::Column,
            b'}' => break,
            other => {
                return Err(LayoutError::Malformed {
                    position: *pos,
                    message: format!("unexpected byte {:?}", other as char),
                })
            }
        };
        *pos += 1;
        let mut children = Vec::new();
        if *pos < bytes.len() && bytes[*pos] == b'{' {
            *pos += 1;
            children = parse_nodes(bytes, pos)?;
            if *pos >= bytes.len() || bytes[*pos] != b'}' {
                return Err(LayoutError::Malformed {
                    position: *pos,
                    message: "unbalanced braces".into(),
                });
            }
            *pos += 1;
        }
        nodes.push(TreeNode { label, children });
    }
    Ok(nodes)
}

/// Exact ordered-tree edit distance between two layout strings.
///
/// Unit costs for insert, delete, and relabel over node labels {G, L, C},
/// computed with the Zhang-Shasha algorithm. A virtual root wraps each parsed
/// forest so the distance is defined between forests; the virtual roots
/// always match at zero cost.
pub fn tree_edit_distance(a: &LayoutString, b: &LayoutString) -> Result<usize, LayoutError> {
    let fa = parse_forest(a.as_str())?;
    let fb = parse_forest(b.as_str())?;
    Ok(zhang_shasha::forest_distance(&fa, &fb))
}

/// Edit distance between already-parsed forests.
pub fn forest_edit_distance(a: &[TreeNode], b: &[TreeNode]) -> usize {
    zhang_shasha::forest_distance(a, b)
}

/// Layout similarity: `1 - d / max(n_a, n_b)`, clamped to [0, 1].
///
/// Node counts exclude the virtual root; two empty layouts are defined as
/// identical (similarity 1).
pub fn layout_similarity(a: &LayoutString, b: &LayoutString) -> Result<f64, LayoutError> {
    let fa = parse_forest(a.as_str())?;
    let fb = parse_forest(b.as_str())?;
    let na = forest_node_count(&fa);
    let nb = forest_node_count(&fb);
    if na == 0 && nb == 0 {
        return Ok(1.0);
    }
    let d = zhang_shasha::forest_distance(&fa, &fb) as f64;
    let sim = 1.0 - d / na.max(nb) as f64;
    Ok(sim.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> LayoutString {
        LayoutString(text.to_string())
    }

    #[test]
    fn empty_box_list_yields_root_only_tree() {
        let tree = characterize_layout(&[], 640, 0.05);
        assert!(tree.groups.is_empty());
        assert_eq!(serialize_tree(&tree).as_str(), "");
    }

    #[test]
    fn single_box_yields_the_only_four_level_shape() {
        let tree = characterize_layout(&[WidgetBox::new(10, 10, 50, 20)], 640, 0.05);
        assert_eq!(serialize_tree(&tree).as_str(), "G{L{C}}");
        assert_eq!(tree.leaf_count(), 1);
    }

    #[test]
    fn large_vertical_gap_splits_groups() {
        // Gap 270 between bottoms/tops; threshold 0.05 * 640 = 32.
        let boxes = vec![
            WidgetBox::new(10, 10, 50, 20),
            WidgetBox::new(10, 300, 50, 20),
        ];
        let tree = characterize_layout(&boxes, 640, 0.05);
        assert_eq!(tree.groups.len(), 2);
        assert_eq!(serialize_tree(&tree).as_str(), "G{L{C}}G{L{C}}");
    }

    #[test]
    fn side_by_side_boxes_share_a_line() {
        let boxes = vec![
            WidgetBox::new(80, 10, 50, 20),
            WidgetBox::new(10, 10, 50, 20),
        ];
        let tree = characterize_layout(&boxes, 640, 0.05);
        assert_eq!(serialize_tree(&tree).as_str(), "G{L{CC}}");
        // Columns ordered left to right by canonical index.
        assert_eq!(tree.groups[0].lines[0].columns, vec![0, 1]);
    }

    #[test]
    fn less_than_half_overlap_splits_lines() {
        // Overlap of 4 rows against min height 20: below the 50% rule.
        let boxes = vec![
            WidgetBox::new(10, 10, 50, 20),
            WidgetBox::new(80, 26, 50, 20),
        ];
        let tree = characterize_layout(&boxes, 640, 0.05);
        assert_eq!(tree.groups.len(), 1);
        assert_eq!(serialize_tree(&tree).as_str(), "G{L{C}L{C}}");
    }

    #[test]
    fn characterization_is_permutation_invariant() {
        let boxes = vec![
            WidgetBox::new(10, 10, 50, 20),
            WidgetBox::new(80, 10, 50, 20),
            WidgetBox::new(10, 300, 50, 20),
            WidgetBox::new(200, 305, 40, 24),
        ];
        let tree = characterize_layout(&boxes, 640, 0.05);
        let mut shuffled = boxes.clone();
        shuffled.reverse();
        shuffled.swap(0, 2);
        let tree2 = characterize_layout(&shuffled, 640, 0.05);
        assert_eq!(tree, tree2);
    }

    #[test]
    fn serialize_then_parse_round_trips() {
        let boxes = vec![
            WidgetBox::new(10, 10, 50, 20),
            WidgetBox::new(80, 10, 50, 20),
            WidgetBox::new(10, 300, 50, 20),
        ];
        let tree = characterize_layout(&boxes, 640, 0.05);
        let text = serialize_tree(&tree);
        let forest = parse_forest(text.as_str()).unwrap();
        assert_eq!(forest, tree.to_forest());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_forest("G{L{C}").is_err());
        assert!(parse_forest("G}").is_err());
        assert!(parse_forest("X").is_err());
        assert!(parse_forest("G{}}").is_err());
    }

    #[test]
    fn distance_identical_strings_is_zero() {
        let a = s("G{L{CC}}G{L{C}}");
        assert_eq!(tree_edit_distance(&a, &a).unwrap(), 0);
    }

    #[test]
    fn distance_single_leaf_insertion_is_one() {
        assert_eq!(
            tree_edit_distance(&s("G{L{C}}"), &s("G{L{CC}}")).unwrap(),
            1
        );
    }

    #[test]
    fn distance_to_empty_deletes_every_node() {
        assert_eq!(tree_edit_distance(&s("G{L{C}}"), &s("")).unwrap(), 3);
    }

    #[test]
    fn distance_propagates_parse_failure() {
        assert!(tree_edit_distance(&s("G{"), &s("")).is_err());
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(layout_similarity(&s("G{L{C}}"), &s("G{L{C}}")).unwrap(), 1.0);
        assert_eq!(layout_similarity(&s("G{L{C}}"), &s("")).unwrap(), 0.0);
        assert!((layout_similarity(&s("G{L{C}}"), &s("G{L{CC}}")).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(layout_similarity(&s(""), &s("")).unwrap(), 1.0);
    }

    #[test]
    fn relabel_costs_one() {
        assert_eq!(tree_edit_distance(&s("G{L{C}}"), &s("G{G{C}}")).unwrap(), 1);
    }
}
