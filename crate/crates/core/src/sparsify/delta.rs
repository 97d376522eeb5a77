use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Destination {
    pub row: usize,
    pub col: usize,
    /// Signed share of the removed value added at `(row, col)`.
    pub fraction: f64,
}

/// One removed entry and where its value went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub row: usize,
    pub col: usize,
    pub value_removed: f64,
    pub destinations: Vec<Destination>,
}

/// Removed entries of one sparsified operator, in application order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeltaLog {
    pub gamma: f64,
    pub records: Vec<DeltaRecord>,
}

#[derive(Serialize)]
struct Line<'a> {
    level: usize,
    gamma: f64,
    #[serde(flatten)]
    record: &'a DeltaRecord,
}

impl DeltaLog {
    pub fn empty(gamma: f64) -> Self {
        DeltaLog {
            gamma,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Undoes every record, newest first: the lumped shares are taken
    /// back out and the removed value is put back in place.
    pub fn replay_inverse(&self, a_hat: &CsrMatrix) -> CsrMatrix {
        let mut t: Vec<(usize, usize, f64)> = a_hat.triplets().collect();
        for rec in self.records.iter().rev() {
            for d in &rec.destinations {
                t.push((d.row, d.col, -d.fraction * rec.value_removed));
            }
            t.push((rec.row, rec.col, rec.value_removed));
        }
        CsrMatrix::from_triplets(a_hat.nrows(), a_hat.ncols(), &t).expect("same shape")
    }

    /// Writes one JSON object per removed entry.
    pub fn write_jsonl(&self, level: usize, w: &mut impl Write) -> std::io::Result<()> {
        for record in &self.records {
            let line = Line {
                level,
                gamma: self.gamma,
                record,
            };
            serde_json::to_writer(&mut *w, &line)?;
            writeln!(w)?;
        }
        Ok(())
    }
}
