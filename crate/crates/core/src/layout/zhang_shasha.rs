//! Zhang-Shasha ordered-tree edit distance with unit costs.
//!
//! Forests are wrapped in a virtual root (which always matches its
//! counterpart at zero cost), then distance is computed over post-order
//! indices with the classic keyroot / forest-distance recurrence.

use super::{NodeLabel, TreeNode};

/// Post-order view of a tree: labels, leftmost-leaf descendants, keyroots.
/// `None` labels the virtual root.
struct PostOrder {
    labels: Vec<Option<NodeLabel>>,
    lld: Vec<usize>,
    keyroots: Vec<usize>,
}

impl PostOrder {
    fn from_forest(forest: &[TreeNode]) -> Self {
        let mut labels = Vec::new();
        let mut lld = Vec::new();
        fn walk(
            node: &TreeNode,
            labels: &mut Vec<Option<NodeLabel>>,
            lld: &mut Vec<usize>,
        ) -> usize {
            let mut leftmost = usize::MAX;
            for child in &node.children {
                let child_lld = walk(child, labels, lld);
                if leftmost == usize::MAX {
                    leftmost = child_lld;
                }
            }
            let idx = labels.len();
            if leftmost == usize::MAX {
                leftmost = idx;
            }
            labels.push(Some(node.label));
            lld.push(leftmost);
            leftmost
        }
        let mut root_leftmost = usize::MAX;
        for node in forest {
            let l = walk(node, &mut labels, &mut lld);
            if root_leftmost == usize::MAX {
                root_leftmost = l;
            }
        }
        let root_idx = labels.len();
        if root_leftmost == usize::MAX {
            root_leftmost = root_idx;
        }
        labels.push(None); // virtual root
        lld.push(root_leftmost);

        // Keyroots: the highest post-order index for each distinct lld value.
        let n = labels.len();
        let mut highest: std::collections::BTreeMap<usize, usize> = Default::default();
        for i in 0..n {
            highest.insert(lld[i], i);
        }
        let mut keyroots: Vec<usize> = highest.into_values().collect();
        keyroots.sort_unstable();
        PostOrder {
            labels,
            lld,
            keyroots,
        }
    }

    fn len(&self) -> usize {
        self.labels.len()
    }
}

fn relabel_cost(a: Option<NodeLabel>, b: Option<NodeLabel>) -> usize {
    usize::from(a != b)
}

/// Unit-cost edit distance between two forests.
pub fn forest_distance(a: &[TreeNode], b: &[TreeNode]) -> usize {
    let t1 = PostOrder::from_forest(a);
    let t2 = PostOrder::from_forest(b);
    let n1 = t1.len();
    let n2 = t2.len();
    let mut td = vec![vec![0usize; n2]; n1];

    for &k1 in &t1.keyroots {
        for &k2 in &t2.keyroots {
            let li = t1.lld[k1];
            let lj = t2.lld[k2];
            let rows = k1 - li + 2;
            let cols = k2 - lj + 2;
            let mut fd = vec![vec![0usize; cols]; rows];
            for di in 1..rows {
                fd[di][0] = fd[di - 1][0] + 1;
            }
            for dj in 1..cols {
                fd[0][dj] = fd[0][dj - 1] + 1;
            }
            for di in 1..rows {
                let i1 = li + di - 1;
                for dj in 1..cols {
                    let j1 = lj + dj - 1;
                    if t1.lld[i1] == li && t2.lld[j1] == lj {
                        let cost = relabel_cost(t1.labels[i1], t2.labels[j1]);
                        fd[di][dj] = (fd[di - 1][dj] + 1)
                            .min(fd[di][dj - 1] + 1)
                            .min(fd[di - 1][dj - 1] + cost);
                        td[i1][j1] = fd[di][dj];
                    } else {
                        fd[di][dj] = (fd[di - 1][dj] + 1)
                            .min(fd[di][dj - 1] + 1)
                            .min(fd[t1.lld[i1] - li][t2.lld[j1] - lj] + td[i1][j1]);
                    }
                }
            }
        }
    }
    td[n1 - 1][n2 - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::parse_forest;

    fn d(a: &str, b: &str) -> usize {
        forest_distance(&parse_forest(a).unwrap(), &parse_forest(b).unwrap())
    }

    #[test]
    fn empty_to_empty_is_zero() {
        assert_eq!(d("", ""), 0);
    }

    #[test]
    fn build_from_nothing_inserts_every_node() {
        assert_eq!(d("", "G{L{CC}}"), 4);
    }

    #[test]
    fn sibling_versus_nested_shapes() {
        // GG vs G{G}: relabelings cost nothing (same labels); one structural
        // move = delete+insert is not available, so the optimal script keeps
        // one G, makes the other its child: distance is 2 moves? Verified by
        // hand: delete second G (1), insert child G under first (1) -> 2...
        // but matching outer G to outer G and inner G as inserted sibling of
        // nothing gives 1 insert + 1 delete = 2. The algorithm may also map
        // both Gs preserving order at cost 0 if ancestrality allows; it does
        // not, so expect 2.
        assert_eq!(d("GG", "G{G}"), 2);
    }

    #[test]
    fn pure_relabel_chain() {
        assert_eq!(d("G{G{G}}", "L{L{L}}"), 3);
    }

    #[test]
    fn symmetric_small_cases() {
        let cases = [
            ("G{L{C}}", "G{L{CC}}"),
            ("G{L{CC}}G{L{C}}", "G{L{C}}"),
            ("C{G{L}}", "L{G{C}}"),
            ("GGG", "G{G{G}}"),
        ];
        for (a, b) in cases {
            assert_eq!(d(a, b), d(b, a), "asymmetry for {a} vs {b}");
        }
    }
}
