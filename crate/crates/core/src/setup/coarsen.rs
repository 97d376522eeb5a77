use std::cmp::Reverse;
use std::collections::BTreeSet;

use super::StrengthMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Coarse,
    Fine,
}

/// Disjoint C/F partition of the rows of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct CfSplitting {
    labels: Vec<PointKind>,
    coarse_index: Vec<Option<usize>>,
    n_coarse: usize,
}

impl CfSplitting {
    pub fn from_labels(labels: Vec<PointKind>) -> Self {
        let mut n_coarse = 0;
        let coarse_index = labels
            .iter()
            .map(|&l| {
                (l == PointKind::Coarse).then(|| {
                    n_coarse += 1;
                    n_coarse - 1
                })
            })
            .collect();
        CfSplitting {
            labels,
            coarse_index,
            n_coarse,
        }
    }

    pub fn labels(&self) -> &[PointKind] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_coarse(&self, i: usize) -> bool {
        self.labels[i] == PointKind::Coarse
    }

    pub fn coarse_index(&self, i: usize) -> Option<usize> {
        self.coarse_index[i]
    }

    pub fn n_coarse(&self) -> usize {
        self.n_coarse
    }

    pub fn coarse_points(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.is_coarse(i))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Unassigned,
    Coarse,
    Fine,
}

/// Ruge–Stüben coarsening.
///
/// First pass: repeatedly take the unassigned point of largest measure
/// `λ_i = |Sᵀ_i ∩ U| + 2 |Sᵀ_i ∩ F|` (lowest index on ties), make it C and
/// every unassigned point that strongly depends on it F. Points without
/// strong connections end up C. Second pass: any F point with strong
/// connections but no strong C neighbor is promoted to C.
pub fn cf_split(s: &StrengthMatrix) -> CfSplitting {
    let n = s.nrows();
    let st = s.matrix().transpose();
    let mut state = vec![State::Unassigned; n];
    let mut measure: Vec<usize> = (0..n).map(|i| st.row(i).0.len()).collect();
    let mut queue: BTreeSet<(usize, Reverse<usize>)> =
        (0..n).map(|i| (measure[i], Reverse(i))).collect();

    let bump = |queue: &mut BTreeSet<(usize, Reverse<usize>)>, measure: &mut [usize], k: usize, up: bool| {
        queue.remove(&(measure[k], Reverse(k)));
        if up {
            measure[k] += 1;
        } else {
            measure[k] -= 1;
        }
        queue.insert((measure[k], Reverse(k)));
    };

    while let Some((_, Reverse(i))) = queue.pop_last() {
        state[i] = State::Coarse;
        for &j in st.row(i).0 {
            if state[j] != State::Unassigned {
                continue;
            }
            state[j] = State::Fine;
            queue.remove(&(measure[j], Reverse(j)));
            for &k in s.neighbors(j) {
                if state[k] == State::Unassigned {
                    bump(&mut queue, &mut measure, k, true);
                }
            }
        }
        for &k in s.neighbors(i) {
            if state[k] == State::Unassigned {
                bump(&mut queue, &mut measure, k, false);
            }
        }
    }

    for i in 0..n {
        if state[i] == State::Fine {
            let nbrs = s.neighbors(i);
            if !nbrs.is_empty() && !nbrs.iter().any(|&j| state[j] == State::Coarse) {
                state[i] = State::Coarse;
            }
        }
    }

    CfSplitting::from_labels(
        state
            .into_iter()
            .map(|st| match st {
                State::Coarse => PointKind::Coarse,
                _ => PointKind::Fine,
            })
            .collect(),
    )
}
