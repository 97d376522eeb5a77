use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::krylov::{check_system, gmres_cycles, norm, PcgState};
use super::{AdaptiveEvent, AmgPreconditioner, KrylovMethod, KrylovSpec, SmootherSpec, SolveReport};
use crate::error::{AmgError, Result};
use crate::setup::Hierarchy;
use crate::sparse::CsrMatrix;
use crate::sparsify::{next_gammas, resparsify_levels, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    /// Re-add entries after every batch that did not converge.
    Always,
    /// Re-add only when the batch's mean convergence factor exceeds `rho_max`.
    ConvFactor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveSpec {
    /// Krylov iterations per batch.
    pub k: usize,
    /// Levels whose tolerance is lowered per trigger.
    pub s: usize,
    /// New tolerances below this become zero.
    pub gamma_min: f64,
    pub trigger: Trigger,
    pub rho_max: f64,
}

impl Default for AdaptiveSpec {
    fn default() -> Self {
        AdaptiveSpec {
            k: 3,
            s: 1,
            gamma_min: 0.01,
            trigger: Trigger::ConvFactor,
            rho_max: 0.9,
        }
    }
}

impl AdaptiveSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, detail: &str| {
            Err(AmgError::InvalidParameter {
                name,
                detail: detail.into(),
            })
        };
        if self.k == 0 {
            return bad("k", "at least one iteration per batch");
        }
        if self.s == 0 {
            return bad("s", "at least one level per trigger");
        }
        if !(self.gamma_min > 0.0 && self.gamma_min < 1.0) {
            return bad("gamma_min", "must lie in (0, 1)");
        }
        if !(self.rho_max > 0.0 && self.rho_max < 1.0) {
            return bad("rho_max", "must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Lowers drop tolerances on the finest sparsified levels and rebuilds
/// the affected operators. Returns the events, or `None` when every
/// tolerance is already zero.
fn fire(h: &mut Hierarchy, spec: &AdaptiveSpec, iteration: usize) -> Result<Option<Vec<AdaptiveEvent>>> {
    let old = h.gammas();
    let Some((new, touched)) = next_gammas(&old, spec.s, spec.gamma_min) else {
        return Ok(None);
    };
    for &l in &touched {
        h.levels[l].gamma = new[l];
    }
    resparsify_levels(h, &touched)?;
    let events = touched
        .iter()
        .map(|&l| AdaptiveEvent {
            iteration,
            level: l,
            old_gamma: old[l],
            new_gamma: new[l],
        })
        .collect();
    Ok(Some(events))
}

/// Krylov solve in batches of `spec.k` iterations that re-adds dropped
/// entries to the hierarchy when a batch converges poorly.
///
/// After a trigger the Krylov method restarts from the current iterate,
/// or from `x0` when the residual has grown past `‖r₀‖`. PCG batches that
/// do not fire continue the same recurrence; GMRES restarts every batch.
/// A PCG breakdown counts as a trigger. `sends` gives the modeled sends
/// per iteration of the current hierarchy.
pub fn adaptive_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    h: &mut Hierarchy,
    smoother: &SmootherSpec,
    spec: &AdaptiveSpec,
    kspec: &KrylovSpec,
    sends: Option<&dyn Fn(&Hierarchy) -> Result<usize>>,
) -> Result<(Vec<f64>, SolveReport)> {
    spec.validate()?;
    kspec.validate()?;
    smoother.validate()?;
    check_system(a, b, x0, "adaptive_solve")?;
    if h.method().map(|m| m.variant) == Some(Variant::NonGalerkin) {
        return Err(AmgError::InvalidParameter {
            name: "hierarchy",
            detail: "adaptive solves need a hierarchy that retains its Galerkin operators".into(),
        });
    }
    let start = Instant::now();
    let count_sends = |h: &Hierarchy| -> Result<Option<usize>> { sends.map(|f| f(h)).transpose() };
    let mut cur_sends = count_sends(h)?;
    let mut report = SolveReport::default();
    let mut r = vec![0.0; a.nrows()];
    a.residual_into(b, x0, &mut r)?;
    let r0 = norm(&r);
    let target = kspec.tol * r0;
    report.residual_history.push(r0);
    report.per_iteration_sends.extend(cur_sends);
    let mut x = x0.to_vec();
    let mut iterations = 0;
    let mut converged = r0 <= target;

    'restart: while !converged && iterations < kspec.max_iter {
        let mut pcg = match kspec.method {
            KrylovMethod::Pcg => Some(PcgState::new(a, b, &x)?),
            KrylovMethod::Gmres => None,
        };
        loop {
            let m = AmgPreconditioner {
                hierarchy: &*h,
                smoother: *smoother,
            };
            let budget = spec.k.min(kspec.max_iter - iterations);
            let before = report.residual_history.len();
            let batch_start = *report.residual_history.last().expect("history is non-empty");
            let mut broke = None;
            let batch_end = match pcg.as_mut() {
                Some(state) => {
                    let mut done = 0;
                    while done < budget && state.rnorm() > target {
                        match state.step(&m) {
                            Ok(()) => {
                                done += 1;
                                report.residual_history.push(state.rnorm());
                            }
                            Err(e @ AmgError::Breakdown { .. }) => {
                                log::warn!("{e}");
                                broke = Some(e);
                                break;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    x.copy_from_slice(&state.x);
                    converged = state.rnorm() <= target;
                    state.rnorm()
                }
                None => {
                    let run = gmres_cycles(
                        a,
                        b,
                        &mut x,
                        &m,
                        target,
                        kspec.restart.min(spec.k),
                        budget,
                        &mut report.residual_history,
                    )?;
                    converged = run.converged;
                    *report.residual_history.last().expect("history is non-empty")
                }
            };
            let done = report.residual_history.len() - before;
            iterations += done;
            report.per_iteration_sends.extend(std::iter::repeat(cur_sends).take(done).flatten());
            if converged || iterations >= kspec.max_iter {
                break 'restart;
            }
            let rho = if done > 0 && batch_start > 0.0 {
                (batch_end / batch_start).powf(1.0 / done as f64)
            } else {
                f64::INFINITY
            };
            report.conv_factor_per_batch.push(rho);
            let wants = broke.is_some() || spec.trigger == Trigger::Always || rho > spec.rho_max;
            if !wants {
                if pcg.is_some() {
                    continue;
                }
                continue 'restart;
            }
            match fire(h, spec, iterations)? {
                Some(events) => {
                    report.adaptive_events.extend(events);
                    cur_sends = count_sends(h)?;
                }
                None => {
                    if let Some(e) = broke {
                        return Err(e);
                    }
                    if pcg.is_some() {
                        continue;
                    }
                    continue 'restart;
                }
            }
            a.residual_into(b, &x, &mut r)?;
            if norm(&r) > r0 {
                x.copy_from_slice(x0);
            }
            continue 'restart;
        }
    }

    report.iterations = iterations;
    report.converged = converged;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setup::{amg_setup, SetupOptions};
    use crate::sparsify::{sparse_hybrid_setup, DropSchedule, Lumping};

    fn hierarchy(gamma: f64) -> (CsrMatrix, Hierarchy) {
        let a = crate::problems::poisson2d_5pt(24, 24);
        let h = amg_setup(&a, &SetupOptions { max_size: 20, ..Default::default() }, None).unwrap();
        let sched = DropSchedule::new(vec![0.0, gamma], Lumping::Diagonal, Variant::Hybrid)
            .unwrap()
            .fitted(h.num_levels());
        (a, sparse_hybrid_setup(h, &sched).unwrap())
    }

    #[test]
    fn always_trigger_drives_tolerances_to_zero() {
        let (a, mut h) = hierarchy(1.0);
        let n = a.nrows();
        let b = vec![1.0; n];
        let spec = AdaptiveSpec { k: 1, s: 1, trigger: Trigger::Always, ..Default::default() };
        let kspec = KrylovSpec { tol: 1e-30, max_iter: 40, ..Default::default() };
        let (_, rep) = adaptive_solve(&a, &b, &vec![0.0; n], &mut h, &SmootherSpec::default(), &spec, &kspec, None)
            .unwrap();
        assert!(h.gammas().iter().all(|&g| g == 0.0));
        assert!(!rep.adaptive_events.is_empty());
        // tolerances only ever decrease
        for e in &rep.adaptive_events {
            assert!(e.new_gamma < e.old_gamma);
        }
        for l in 0..h.num_levels() {
            assert!(h.level(l).a_hat().bitwise_eq(h.level(l).a()));
        }
    }

    #[test]
    fn galerkin_hierarchy_never_fires() {
        let (a, mut h) = hierarchy(0.0);
        let n = a.nrows();
        let sends = |_: &Hierarchy| Ok(5);
        let (_, rep) = adaptive_solve(
            &a,
            &vec![1.0; n],
            &vec![0.0; n],
            &mut h,
            &SmootherSpec::default(),
            &AdaptiveSpec::default(),
            &KrylovSpec::default(),
            Some(&sends),
        )
        .unwrap();
        assert!(rep.converged);
        assert!(rep.adaptive_events.is_empty());
        assert_eq!(rep.per_iteration_sends.len(), rep.residual_history.len());
        assert_eq!(rep.residual_history.len(), rep.iterations + 1);
    }
}
