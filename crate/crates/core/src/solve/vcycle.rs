use super::{relax, SmootherSpec};
use crate::error::{AmgError, Result};
use crate::setup::Hierarchy;

/// One V-cycle on `A_0 x = b`, updating `x` in place.
///
/// Smoothing and residuals use the active operators `Â_ℓ`; transfers use
/// the unmodified `P_ℓ` and `P_ℓᵀ`.
pub fn vcycle(h: &Hierarchy, b: &[f64], x: &mut [f64], spec: &SmootherSpec) -> Result<()> {
    let n = h.level(0).n();
    if b.len() != n || x.len() != n {
        return Err(AmgError::DimensionMismatch {
            op: "vcycle",
            detail: format!("level 0 has {n} rows, b has {}, x has {}", b.len(), x.len()),
        });
    }
    cycle(h, 0, b, x, spec)
}

fn cycle(h: &Hierarchy, l: usize, b: &[f64], x: &mut [f64], spec: &SmootherSpec) -> Result<()> {
    let level = h.level(l);
    if l + 1 == h.num_levels() {
        let sol = h.coarse_solver().solve(b)?;
        x.copy_from_slice(&sol);
        return Ok(());
    }
    let a = level.a_hat();
    let p = level.p().expect("non-coarsest level has P");
    let r_op = level.restriction().expect("non-coarsest level has R");

    relax(a, x, b, spec)?;
    let mut r = vec![0.0; a.nrows()];
    a.residual_into(b, x, &mut r)?;
    let bc = r_op.spmv(&r)?;
    let mut xc = vec![0.0; bc.len()];
    cycle(h, l + 1, &bc, &mut xc, spec)?;
    let corr = p.spmv(&xc)?;
    for (xi, ci) in x.iter_mut().zip(&corr) {
        *xi += ci;
    }
    relax(a, x, b, spec)
}
