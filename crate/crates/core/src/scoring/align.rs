use serde::{Deserialize, Serialize};

use super::Token;

/// One step of an alignment, in reference/hypothesis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum EditOp {
    Match { ref_idx: usize, hyp_idx: usize },
    Substitute { ref_idx: usize, hyp_idx: usize },
    Delete { ref_idx: usize },
    Insert { hyp_idx: usize },
}

/// Minimal-cost alignment of one reference/hypothesis pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    reference: Vec<Token>,
    hypothesis: Vec<Token>,
    ops: Vec<EditOp>,
    subs: usize,
    dels: usize,
    ins: usize,
}

impl AlignmentResult {
    pub fn reference(&self) -> &[Token] {
        &self.reference
    }

    pub fn hypothesis(&self) -> &[Token] {
        &self.hypothesis
    }

    pub fn ops(&self) -> &[EditOp] {
        &self.ops
    }

    pub fn subs(&self) -> usize {
        self.subs
    }

    pub fn dels(&self) -> usize {
        self.dels
    }

    pub fn ins(&self) -> usize {
        self.ins
    }

    pub fn matches(&self) -> usize {
        self.reference.len() - self.subs - self.dels
    }

    /// Reference length N.
    pub fn ref_len(&self) -> usize {
        self.reference.len()
    }

    pub fn errors(&self) -> usize {
        self.subs + self.dels + self.ins
    }

    pub fn is_exact(&self) -> bool {
        self.errors() == 0
    }
}

/// Levenshtein alignment with unit substitution/deletion/insertion costs.
///
/// Ties during the backtrace resolve as Match, then Substitute, then Delete,
/// then Insert, so the op sequence is fully determined by the inputs.
pub fn align(reference: &[Token], hypothesis: &[Token]) -> AlignmentResult {
    let n = reference.len();
    let m = hypothesis.len();
    let width = m + 1;
    let mut cost = vec![0u32; (n + 1) * width];
    for j in 0..=m {
        cost[j] = j as u32;
    }
    for i in 1..=n {
        cost[i * width] = i as u32;
        for j in 1..=m {
            let diag =
                cost[(i - 1) * width + j - 1] + u32::from(reference[i - 1] != hypothesis[j - 1]);
            let up = cost[(i - 1) * width + j] + 1;
            let left = cost[i * width + j - 1] + 1;
            cost[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut subs, mut dels, mut ins) = (0, 0, 0);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * width + j];
        if i > 0 && j > 0 {
            let diag = cost[(i - 1) * width + j - 1];
            if reference[i - 1] == hypothesis[j - 1] && diag == here {
                ops.push(EditOp::Match {
                    ref_idx: i - 1,
                    hyp_idx: j - 1,
                });
                i -= 1;
                j -= 1;
                continue;
            }
            if reference[i - 1] != hypothesis[j - 1] && diag + 1 == here {
                ops.push(EditOp::Substitute {
                    ref_idx: i - 1,
                    hyp_idx: j - 1,
                });
                subs += 1;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && cost[(i - 1) * width + j] + 1 == here {
            ops.push(EditOp::Delete { ref_idx: i - 1 });
            dels += 1;
            i -= 1;
        } else {
            ops.push(EditOp::Insert { hyp_idx: j - 1 });
            ins += 1;
            j -= 1;
        }
    }
    ops.reverse();

    AlignmentResult {
        reference: reference.to_vec(),
        hypothesis: hypothesis.to_vec(),
        ops,
        subs,
        dels,
        ins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::normalize;

    fn run(r: &str, h: &str) -> AlignmentResult {
        align(&normalize(r), &normalize(h))
    }

    #[test]
    fn identity() {
        let a = run("A B C", "A B C");
        assert_eq!((a.subs(), a.dels(), a.ins()), (0, 0, 0));
        assert_eq!(a.matches(), 3);
    }

    #[test]
    fn substitution_and_insertion() {
        let a = run("THE CAT SAT", "THE BAT SAT ON");
        assert_eq!((a.subs(), a.dels(), a.ins()), (1, 0, 1));
    }

    #[test]
    fn single_deletion() {
        let a = run("A B C D", "A C D");
        assert_eq!((a.subs(), a.dels(), a.ins()), (0, 1, 0));
        assert_eq!(a.ops()[1], EditOp::Delete { ref_idx: 1 });
    }

    #[test]
    fn empty_sides() {
        let a = run("", "X Y");
        assert_eq!(a.ins(), 2);
        assert_eq!(a.ref_len(), 0);
        let a = run("X Y", "");
        assert_eq!(a.dels(), 2);
        let a = run("", "");
        assert!(a.ops().is_empty());
    }

    #[test]
    fn tie_break_prefers_substitution_over_indels() {
        // "A" vs "B" costs 1 either way as sub, or 2 as del+ins; sub wins.
        // "A B" vs "B C": sub+sub (2) ties with del A, match B, ins C (2);
        // the backtrace from the end sees C/B: sub preferred.
        let a = run("A B", "B C");
        assert_eq!(a.subs() + a.dels() + a.ins(), 2);
        assert_eq!(
            a.ops(),
            &[
                EditOp::Substitute {
                    ref_idx: 0,
                    hyp_idx: 0
                },
                EditOp::Substitute {
                    ref_idx: 1,
                    hyp_idx: 1
                }
            ]
        );
    }

    #[test]
    fn ops_consume_indices_in_order() {
        let a = run("A B C D E", "B X D E F");
        let mut next_ref = 0;
        let mut next_hyp = 0;
        for op in a.ops() {
            match *op {
                EditOp::Match { ref_idx, hyp_idx } | EditOp::Substitute { ref_idx, hyp_idx } => {
                    assert_eq!((ref_idx, hyp_idx), (next_ref, next_hyp));
                    next_ref += 1;
                    next_hyp += 1;
                }
                EditOp::Delete { ref_idx } => {
                    assert_eq!(ref_idx, next_ref);
                    next_ref += 1;
                }
                EditOp::Insert { hyp_idx } => {
                    assert_eq!(hyp_idx, next_hyp);
                    next_hyp += 1;
                }
            }
        }
        assert_eq!((next_ref, next_hyp), (5, 5));
    }
}
