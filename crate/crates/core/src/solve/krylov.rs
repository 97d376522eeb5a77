use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{vcycle, SmootherSpec};
use crate::error::{AmgError, Result};
use crate::setup::Hierarchy;
use crate::sparse::CsrMatrix;

/// A fixed linear map `z = M r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

/// One V-cycle from a zero initial guess.
#[derive(Debug, Clone, Copy)]
pub struct AmgPreconditioner<'h> {
    pub hierarchy: &'h Hierarchy,
    pub smoother: SmootherSpec,
}

impl Preconditioner for AmgPreconditioner<'_> {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.iter_mut().for_each(|v| *v = 0.0);
        vcycle(self.hierarchy, r, z, &self.smoother)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KrylovMethod {
    Pcg,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KrylovSpec {
    pub method: KrylovMethod,
    /// Stop once `‖r‖ / ‖r₀‖ <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// GMRES restart length.
    pub restart: usize,
}

impl Default for KrylovSpec {
    fn default() -> Self {
        KrylovSpec {
            method: KrylovMethod::Pcg,
            tol: 1e-8,
            max_iter: 200,
            restart: 50,
        }
    }
}

impl KrylovSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(AmgError::InvalidParameter {
                name: "tol",
                detail: format!("must be positive, got {}", self.tol),
            });
        }
        if self.restart == 0 {
            return Err(AmgError::InvalidParameter {
                name: "restart",
                detail: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveEvent {
    /// Iterations completed when the trigger fired.
    pub iteration: usize,
    pub level: usize,
    pub old_gamma: f64,
    pub new_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveReport {
    /// `‖b - A x‖₂` per iteration, starting with the initial guess.
    /// GMRES entries inside a restart cycle are the least-squares estimates.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub conv_factor_per_batch: Vec<f64>,
    pub adaptive_events: Vec<AdaptiveEvent>,
    /// Modeled sends of the preconditioner in effect for each entry of
    /// `residual_history`; empty when no partition was requested.
    pub per_iteration_sends: Vec<usize>,
    pub wall_time: f64,
    /// GMRES made no progress over a whole restart cycle.
    #[serde(default)]
    pub stagnated: bool,
}

impl SolveReport {
    pub fn relative_residuals(&self) -> Vec<f64> {
        let r0 = self.residual_history.first().copied().unwrap_or(0.0);
        self.residual_history
            .iter()
            .map(|&r| if r0 > 0.0 { r / r0 } else { 0.0 })
            .collect()
    }

    pub fn final_relative_residual(&self) -> f64 {
        self.relative_residuals().last().copied().unwrap_or(0.0)
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub(crate) fn check_system(a: &CsrMatrix, b: &[f64], x0: &[f64], op: &'static str) -> Result<()> {
    if !a.is_square() || b.len() != a.nrows() || x0.len() != a.nrows() {
        return Err(AmgError::DimensionMismatch {
            op,
            detail: format!("A is {}x{}, b has {}, x0 has {}", a.nrows(), a.ncols(), b.len(), x0.len()),
        });
    }
    Ok(())
}

/// Conjugate gradient state that can be advanced one iteration at a time.
pub(crate) struct PcgState<'a> {
    a: &'a CsrMatrix,
    pub(crate) x: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    rz: f64,
    fresh: bool,
    need_direction: bool,
    pub(crate) iteration: usize,
}

impl<'a> PcgState<'a> {
    pub(crate) fn new(a: &'a CsrMatrix, b: &[f64], x0: &[f64]) -> Result<Self> {
        let n = a.nrows();
        let mut r = vec![0.0; n];
        a.residual_into(b, x0, &mut r)?;
        Ok(PcgState {
            a,
            x: x0.to_vec(),
            r,
            z: vec![0.0; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
            rz: 0.0,
            fresh: true,
            need_direction: true,
            iteration: 0,
        })
    }

    pub(crate) fn rnorm(&self) -> f64 {
        norm(&self.r)
    }

    fn direction(&mut self, m: &dyn Preconditioner) -> Result<()> {
        m.apply(&self.r, &mut self.z)?;
        let rz = dot(&self.z, &self.r);
        if !(rz > 0.0) {
            return Err(AmgError::Breakdown {
                iteration: self.iteration,
                detail: format!("zᵀr = {rz:e}: preconditioner is not positive definite"),
            });
        }
        if self.fresh {
            self.p.copy_from_slice(&self.z);
            self.fresh = false;
        } else {
            let beta = rz / self.rz;
            for (pi, zi) in self.p.iter_mut().zip(&self.z) {
                *pi = zi + beta * *pi;
            }
        }
        self.rz = rz;
        self.need_direction = false;
        Ok(())
    }

    /// One iteration. On error the iterate is left at its last valid value.
    pub(crate) fn step(&mut self, m: &dyn Preconditioner) -> Result<()> {
        if self.need_direction {
            self.direction(m)?;
        }
        self.a.spmv_into(&self.p, &mut self.q)?;
        let pq = dot(&self.p, &self.q);
        if !(pq > 0.0) {
            return Err(AmgError::Breakdown {
                iteration: self.iteration,
                detail: format!("pᵀAp = {pq:e}: operator is not positive definite"),
            });
        }
        let alpha = self.rz / pq;
        for i in 0..self.x.len() {
            self.x[i] += alpha * self.p[i];
            self.r[i] -= alpha * self.q[i];
        }
        self.iteration += 1;
        self.need_direction = true;
        Ok(())
    }
}

/// Preconditioned conjugate gradients on the relative residual.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    m: &dyn Preconditioner,
    spec: &KrylovSpec,
) -> Result<(Vec<f64>, SolveReport)> {
    spec.validate()?;
    check_system(a, b, x0, "pcg")?;
    let start = Instant::now();
    let mut state = PcgState::new(a, b, x0)?;
    let r0 = state.rnorm();
    let target = spec.tol * r0;
    let mut history = vec![r0];
    while state.iteration < spec.max_iter && state.rnorm() > target {
        state.step(m)?;
        history.push(state.rnorm());
    }
    let converged = state.rnorm() <= target;
    let report = SolveReport {
        residual_history: history,
        iterations: state.iteration,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
        ..Default::default()
    };
    Ok((state.x, report))
}

/// Outcome of [`gmres_cycles`].
pub(crate) struct GmresRun {
    pub(crate) iterations: usize,
    pub(crate) converged: bool,
    pub(crate) stagnated: bool,
}

/// Right-preconditioned restarted GMRES from `x` until `‖r‖ <= target`,
/// `max_iter` iterations, or a cycle without progress. Pushes one
/// residual (estimate) per iteration onto `history`.
pub(crate) fn gmres_cycles(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    m: &dyn Preconditioner,
    target: f64,
    restart: usize,
    max_iter: usize,
    history: &mut Vec<f64>,
) -> Result<GmresRun> {
    let n = a.nrows();
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    loop {
        a.residual_into(b, x, &mut r)?;
        let beta = norm(&r);
        if beta <= target {
            return Ok(GmresRun { iterations, converged: true, stagnated: false });
        }
        if iterations >= max_iter {
            return Ok(GmresRun { iterations, converged: false, stagnated: false });
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::new();
        let mut h: Vec<Vec<f64>> = Vec::new(); // h[j] is column j, length j + 2
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut resid = beta;
        for j in 0..restart {
            if iterations >= max_iter {
                break;
            }
            let mut z = vec![0.0; n];
            m.apply(&v[j], &mut z)?;
            a.spmv_into(&z, &mut w)?;
            zs.push(z);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hnext = norm(&w);
            col[j + 1] = hnext;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let rho = col[j].hypot(col[j + 1]);
            if rho == 0.0 {
                // A M annihilates the new direction: no reduction possible
                cs.push(1.0);
                sn.push(0.0);
                g.push(g[j]);
                g[j] = 0.0;
            } else {
                let (c, s) = (col[j] / rho, col[j + 1] / rho);
                col[j] = rho;
                col[j + 1] = 0.0;
                cs.push(c);
                sn.push(s);
                g.push(-s * g[j]);
                g[j] *= c;
            }
            h.push(col);
            iterations += 1;
            resid = g[j + 1].abs();
            history.push(resid);
            if resid <= target || hnext == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hnext).collect());
        }
        // back substitution on the triangular factor
        let k = h.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for jj in i + 1..k {
                s -= h[jj][i] * y[jj];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        for (yi, zi) in y.iter().zip(&zs) {
            for (xk, zk) in x.iter_mut().zip(zi) {
                *xk += yi * zk;
            }
        }
        if resid > target && beta - resid < 1e-12 * beta {
            return Ok(GmresRun { iterations, converged: false, stagnated: true });
        }
    }
}

/// Restarted GMRES, right-preconditioned.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    m: &dyn Preconditioner,
    spec: &KrylovSpec,
) -> Result<(Vec<f64>, SolveReport)> {
    spec.validate()?;
    check_system(a, b, x0, "gmres")?;
    let start = Instant::now();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; a.nrows()];
    a.residual_into(b, &x, &mut r)?;
    let r0 = norm(&r);
    let mut history = vec![r0];
    let run = gmres_cycles(a, b, &mut x, m, spec.tol * r0, spec.restart, spec.max_iter, &mut history)?;
    let report = SolveReport {
        residual_history: history,
        iterations: run.iterations,
        converged: run.converged,
        stagnated: run.stagnated,
        wall_time: start.elapsed().as_secs_f64(),
        ..Default::default()
    };
    Ok((x, report))
}

/// Krylov solve preconditioned by one V-cycle of `h`, dispatching on
/// `spec.method`. `sends`, when given, is recorded for every iteration.
pub fn solve_with_hierarchy(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    h: &Hierarchy,
    smoother: &SmootherSpec,
    spec: &KrylovSpec,
    sends: Option<usize>,
) -> Result<(Vec<f64>, SolveReport)> {
    smoother.validate()?;
    let m = AmgPreconditioner { hierarchy: h, smoother: *smoother };
    let (x, mut report) = match spec.method {
        KrylovMethod::Pcg => pcg(a, b, x0, &m, spec)?,
        KrylovMethod::Gmres => gmres(a, b, x0, &m, spec)?,
    };
    if let Some(s) = sends {
        report.per_iteration_sends = vec![s; report.residual_history.len()];
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(method: KrylovMethod) -> KrylovSpec {
        KrylovSpec { method, tol: 1e-12, max_iter: 100, restart: 50 }
    }

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        for method in [KrylovMethod::Pcg, KrylovMethod::Gmres] {
            let solver = if method == KrylovMethod::Pcg { pcg } else { gmres };
            let (x, rep) = solver(&a, &b, &[0.0; 5], &IdentityPreconditioner, &spec(method)).unwrap();
            assert!(rep.converged);
            assert_eq!(rep.iterations, 1);
            assert_eq!(x, b);
        }
    }

    #[test]
    fn cg_terminates_on_diagonal() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
        let (x, rep) = pcg(&a, &[1.0; 3], &[0.0; 3], &IdentityPreconditioner, &spec(KrylovMethod::Pcg)).unwrap();
        assert!(rep.converged && rep.iterations <= 3);
        assert!((x[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gmres_nonsymmetric_two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let (x, rep) = gmres(&a, &[2.0, 1.0], &[0.0; 2], &IdentityPreconditioner, &spec(KrylovMethod::Gmres)).unwrap();
        assert!(rep.converged && rep.iterations <= 2);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn indefinite_operator_breaks_down() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let err = pcg(&a, &[0.0, 1.0], &[0.0; 2], &IdentityPreconditioner, &spec(KrylovMethod::Pcg));
        assert!(matches!(err, Err(AmgError::Breakdown { .. })));
    }

    #[test]
    fn gmres_restart_and_history() {
        let a = crate::problems::poisson1d(40);
        let b = vec![1.0; 40];
        let s = KrylovSpec { restart: 5, max_iter: 2000, tol: 1e-10, method: KrylovMethod::Gmres };
        let (x, rep) = gmres(&a, &b, &vec![0.0; 40], &IdentityPreconditioner, &s).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert_eq!(rep.residual_history.len(), rep.iterations + 1);
        let r = a.spmv(&x).unwrap();
        let res: f64 = r.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-10 * norm(&b) * 1.0001);
    }

    #[test]
    fn singular_system_stagnates() {
        // b is outside the range of A, so no cycle makes progress
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let (_, rep) = gmres(&a, &[0.0, 1.0], &[0.0; 2], &IdentityPreconditioner, &spec(KrylovMethod::Gmres)).unwrap();
        assert!(!rep.converged && rep.stagnated);
    }
}
