use super::{sparsify, DropSchedule, Variant};
use crate::error::{AmgError, Result};
use crate::setup::{Hierarchy, SparsifyMethod};

/// Sparsifies every coarse level of a Galerkin hierarchy in place of its
/// active operator, keeping the Galerkin operators untouched.
///
/// Sparse Galerkin forms each minimal pattern from the Galerkin fine
/// operator; Hybrid Galerkin uses the sparsified fine operator, so levels
/// are processed finest to coarsest.
pub fn sparse_hybrid_setup(mut h: Hierarchy, schedule: &DropSchedule) -> Result<Hierarchy> {
    if schedule.variant == Variant::NonGalerkin {
        return Err(AmgError::InvalidParameter {
            name: "variant",
            detail: "non-Galerkin sparsification happens during setup".into(),
        });
    }
    if h.method.is_some() {
        return Err(AmgError::InvalidParameter {
            name: "hierarchy",
            detail: "expected an unsparsified Galerkin hierarchy".into(),
        });
    }
    if schedule.gammas.len() != h.num_levels() {
        return Err(AmgError::ScheduleLength {
            expected: h.num_levels(),
            got: schedule.gammas.len(),
        });
    }
    for &g in &schedule.gammas {
        super::pattern::check_gamma(g)?;
    }
    h.method = Some(SparsifyMethod {
        variant: schedule.variant,
        lumping: schedule.lumping,
    });
    for (l, level) in h.levels.iter_mut().enumerate() {
        level.gamma = if l == 0 { 0.0 } else { schedule.gammas[l] };
    }
    let levels: Vec<usize> = (1..h.num_levels()).collect();
    resparsify_levels(&mut h, &levels)?;
    Ok(h)
}

/// Recomputes the active operator of each listed level from its retained
/// Galerkin operator at the level's current tolerance. For Hybrid
/// hierarchies every level below the finest listed one is recomputed too,
/// since their minimal patterns depend on it.
pub fn resparsify_levels(h: &mut Hierarchy, levels: &[usize]) -> Result<()> {
    let Some(method) = h.method else {
        return Err(AmgError::InvalidParameter {
            name: "hierarchy",
            detail: "hierarchy has no sparsification method".into(),
        });
    };
    if method.variant == Variant::NonGalerkin {
        return Err(AmgError::InvalidParameter {
            name: "variant",
            detail: "non-Galerkin hierarchies cannot be re-sparsified in place".into(),
        });
    }
    let nlev = h.num_levels();
    let mut todo: Vec<usize> = levels.iter().copied().filter(|&l| l >= 1 && l < nlev).collect();
    todo.sort_unstable();
    todo.dedup();
    if method.variant == Variant::Hybrid {
        if let Some(&first) = todo.first() {
            todo = (first..nlev).collect();
        }
    }
    for &l in &todo {
        let (fine_levels, rest) = h.levels.split_at_mut(l);
        let fine = &fine_levels[l - 1];
        let level = &mut rest[0];
        let fine_op = match method.variant {
            Variant::Hybrid => &fine.a_hat,
            _ => &fine.a,
        };
        let p = fine.p.as_ref().expect("non-coarsest level has P");
        let p_inj = fine.p_inj.as_ref().expect("non-coarsest level has injection");
        // the level's strength graph was built from its Galerkin operator
        let (a_hat, log) =
            sparsify(&level.a, fine_op, p, p_inj, &level.strength, level.gamma, method.lumping)?;
        level.a_hat = a_hat;
        level.delta = log;
    }
    if todo.last() == Some(&(nlev - 1)) {
        h.refresh_coarse()?;
    }
    Ok(())
}

/// Lowers the tolerance of `level` to `new_gamma` and re-sparsifies it
/// from the retained Galerkin operator. `new_gamma = 0` restores the
/// Galerkin operator exactly.
pub fn restore(h: &mut Hierarchy, level: usize, new_gamma: f64) -> Result<()> {
    if level >= h.num_levels() {
        return Err(AmgError::InvalidParameter {
            name: "level",
            detail: format!("hierarchy has {} levels", h.num_levels()),
        });
    }
    let current = h.levels[level].gamma;
    if new_gamma > current || new_gamma < 0.0 {
        return Err(AmgError::RestoreTolerance {
            level,
            new: new_gamma,
            current,
        });
    }
    if new_gamma == current {
        return Ok(());
    }
    h.levels[level].gamma = new_gamma;
    resparsify_levels(h, &[level])
}

/// Drop-tolerance update of one adaptive trigger.
///
/// Starting at the finest level `l >= 1` with a positive tolerance, the
/// next `s` levels get `gamma / 10`, or zero when that falls below
/// `gamma_min`. Returns the new tolerances and the touched levels, or
/// `None` when every tolerance is already zero.
pub fn next_gammas(gammas: &[f64], s: usize, gamma_min: f64) -> Option<(Vec<f64>, Vec<usize>)> {
    let start = (1..gammas.len()).find(|&l| gammas[l] > 0.0)?;
    let end = (start + s.max(1)).min(gammas.len());
    let mut out = gammas.to_vec();
    let touched: Vec<usize> = (start..end).collect();
    for &l in &touched {
        let reduced = out[l] / 10.0;
        // relative slack so that 0.1 / 10 survives a 0.01 floor
        out[l] = if reduced < gamma_min * (1.0 - 1e-9) { 0.0 } else { reduced };
    }
    Some((out, touched))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsify::Lumping;
    use crate::setup::{amg_setup, SetupOptions};

    #[test]
    fn trigger_sequence_from_six_level_example() {
        let g = [0.0, 0.01, 0.1, 1.0, 1.0, 1.0];
        let (g1, t1) = next_gammas(&g, 2, 0.01).unwrap();
        assert_eq!(g1, vec![0.0, 0.0, 0.01, 1.0, 1.0, 1.0]);
        assert_eq!(t1, vec![1, 2]);
        let (g2, t2) = next_gammas(&g1, 2, 0.01).unwrap();
        assert_eq!(t2, vec![2, 3]);
        assert_eq!(g2, vec![0.0, 0.0, 0.0, 0.1, 1.0, 1.0]);
    }

    #[test]
    fn below_floor_rounds_to_zero_and_exhausts() {
        assert_eq!(next_gammas(&[0.0, 0.01], 1, 0.01).unwrap().0, vec![0.0, 0.0]);
        assert!(next_gammas(&[0.0, 0.0, 0.0], 2, 0.01).is_none());
        // the window is clipped at the coarsest level
        assert_eq!(next_gammas(&[0.0, 0.0, 1.0], 3, 0.01).unwrap().1, vec![2]);
    }

    #[test]
    fn schedule_length_checked() {
        let a = crate::problems::poisson2d_5pt(12, 12);
        let h = amg_setup(&a, &SetupOptions { max_size: 20, ..Default::default() }, None).unwrap();
        let s = DropSchedule::new(vec![0.0, 1.0], Lumping::Diagonal, Variant::Sparse).unwrap();
        assert!(matches!(
            sparse_hybrid_setup(h, &s),
            Err(AmgError::ScheduleLength { .. })
        ));
    }

    #[test]
    fn restore_rejects_raising_tolerance() {
        let a = crate::problems::poisson2d_5pt(12, 12);
        let h = amg_setup(&a, &SetupOptions { max_size: 20, ..Default::default() }, None).unwrap();
        let sched = DropSchedule::new(vec![0.0, 0.1], Lumping::Diagonal, Variant::Hybrid)
            .unwrap()
            .fitted(h.num_levels());
        let mut h = sparse_hybrid_setup(h, &sched).unwrap();
        assert!(matches!(restore(&mut h, 1, 0.5), Err(AmgError::RestoreTolerance { .. })));
        restore(&mut h, 1, 0.1).unwrap();
        restore(&mut h, 1, 0.0).unwrap();
        assert!(h.level(1).a_hat().bitwise_eq(h.level(1).a()));
    }
}
