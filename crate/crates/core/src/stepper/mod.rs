//! Time stepping for `M du/dt = sum_p RD^{1-gamma_p}[K_p u + b_p] + F(t)`.
//!
//! Crank–Nicolson averaged weighted-shifted Grünwald–Letnikov sums, one per
//! flux part, with optional starting-value corrections. With corrections the
//! first `m` levels are obtained from one coupled block solve.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::assembly::SparseSystem;
use crate::fracops::{gamma, CorrectionSet, FracError, WeightTable};
use crate::linalg::{BandLu, CsrMatrix, EdgeOperator, LinalgError};

#[derive(Debug, Error)]
pub enum StepError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error("invalid stepping setup: {0}")]
    Config(String),
    #[error("solution became non-finite at step {0}")]
    NonFinite(usize),
}

struct PartState {
    order: f64,
    alpha: f64,
    weights: WeightTable,
    /// Columns of `K_p` with stored entries; history is kept only there.
    support: Vec<usize>,
    /// Increments `u^k - u^0` on `support`, levels 1..=n, flattened.
    history: Vec<f64>,
    /// `K_p u^0 + b_p`.
    initial_flux: Vec<f64>,
    /// `tau^{gamma - 1}`.
    scale: f64,
    long_memory: bool,
    /// `K_p`, rebuilt from its pair form when it is symmetric with zero row sums.
    matrix: CsrMatrix,
    conservative: bool,
}

/// When to stop a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub t_final: Option<f64>,
    pub max_steps: usize,
    pub steady: Option<SteadyRule>,
}

/// Steady state: relative change of the monitored quantities per step below
/// `tol` for `window` consecutive steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyRule {
    pub tol: f64,
    pub window: usize,
}

impl Default for SteadyRule {
    fn default() -> Self {
        Self { tol: 1e-8, window: 10 }
    }
}

impl StopRule {
    pub fn until(t_final: f64) -> Self {
        Self { t_final: Some(t_final), max_steps: usize::MAX, steady: None }
    }

    pub fn steady(rule: SteadyRule, max_steps: usize) -> Self {
        Self { t_final: None, max_steps, steady: Some(rule) }
    }
}

/// One row of the run trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    /// Mass-weighted mean of the unknowns.
    pub mean: f64,
    /// Relative change of the monitored quantities over the last step.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub time: f64,
    pub steady: bool,
    pub trace: Vec<TraceRow>,
    /// Largest `|sum M u^n - sum M u^0|` seen.
    pub mass_drift: f64,
}

type Forcing<'a> = Box<dyn Fn(f64) -> Vec<f64> + 'a>;

pub struct Stepper<'a> {
    sys: &'a SparseSystem,
    tau: f64,
    corrections: CorrectionSet,
    parts: Vec<PartState>,
    forcing: Option<Forcing<'a>>,
    lu: Option<BandLu>,
    lhs_diag: Vec<f64>,
    u0: Vec<f64>,
    prev: Vec<f64>,
    cur: Vec<f64>,
    /// Increments of the corrected starting levels `1..=m`.
    start: Vec<Vec<f64>>,
    n: usize,
    mass0: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a SparseSystem, tau: f64, corrections: CorrectionSet, u0: Vec<f64>) -> Result<Self, StepError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(StepError::Config(format!("time step {tau} must be positive")));
        }
        let nu = sys.num_unknowns();
        if u0.len() != nu {
            return Err(StepError::Config(format!("initial state has {} entries, expected {nu}", u0.len())));
        }
        if sys.parts.is_empty() {
            return Err(StepError::Config("system has no flux parts".into()));
        }
        let mut parts = Vec::with_capacity(sys.parts.len());
        for p in &sys.parts {
            let alpha = 1.0 - p.order;
            let weights = WeightTable::new(alpha, 64)?;
            let pair_form = EdgeOperator::from_matrix(&p.matrix, 1e-12);
            let matrix = pair_form.as_ref().map_or_else(|| p.matrix.clone(), EdgeOperator::to_matrix);
            let mut initial_flux = p.load.clone();
            matrix.mul_vec_add(1.0, &u0, &mut initial_flux);
            let long_memory = weights.support().is_none();
            parts.push(PartState {
                order: p.order,
                alpha,
                weights,
                support: matrix.column_support(),
                history: Vec::new(),
                initial_flux,
                scale: tau.powf(p.order - 1.0),
                long_memory,
                matrix,
                conservative: pair_form.is_some(),
            });
        }
        let lhs_diag: Vec<f64> = sys.mass.iter().map(|m| m / tau).collect();
        let mass0 = sys.total_mass(&u0);
        Ok(Self {
            sys,
            tau,
            corrections,
            parts,
            forcing: None,
            lu: None,
            lhs_diag,
            prev: u0.clone(),
            cur: u0.clone(),
            u0,
            start: Vec::new(),
            n: 0,
            mass0,
        })
    }

    /// Add a boundary forcing `t -> F(t)` (reduced vector), evaluated at half steps.
    pub fn with_forcing(mut self, f: impl Fn(f64) -> Vec<f64> + 'a) -> Self {
        self.forcing = Some(Box::new(f));
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * self.tau
    }

    pub fn current(&self) -> &[f64] {
        &self.cur
    }

    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    pub fn system(&self) -> &SparseSystem {
        self.sys
    }

    /// Mass-weighted mean of the current unknowns.
    pub fn mean(&self) -> f64 {
        self.sys.total_mass(&self.cur) / self.sys.mass.iter().sum::<f64>()
    }

    pub fn mass_drift(&self) -> f64 {
        (self.sys.total_mass(&self.cur) - self.mass0).abs()
    }

    /// Sum of the stored history weights applied to increments, for the part
    /// `p` at level `n`: `sum_{k=1}^{n-1} D_{n-k} (u^k - u^0)` on the part's support.
    pub fn history_sum(&self, p: usize) -> Vec<f64> {
        let part = &self.parts[p];
        let n = self.n + 1;
        let s = part.support.len();
        let mut h = vec![0.0; s];
        let d = crate::fracops::averaged_weights(part.alpha, n).expect("order validated");
        for (k, chunk) in part.history.chunks(s).enumerate().take(n - 1) {
            let w = d[n - (k + 1)];
            for (hv, &e) in h.iter_mut().zip(chunk) {
                *hv += w * e;
            }
        }
        h
    }

    /// Support columns of flux part `p`.
    pub fn part_support(&self, p: usize) -> &[usize] {
        &self.parts[p].support
    }

    fn source(&self, n: usize) -> Vec<f64> {
        let mut r = self.forcing_at(n);
        self.add_slip(n, &mut r);
        r
    }

    fn forcing_at(&self, n: usize) -> Vec<f64> {
        match &self.forcing {
            Some(f) => f((n as f64 - 0.5) * self.tau),
            None => vec![0.0; self.u0.len()],
        }
    }

    /// Initial-flux terms `t^{gamma-1} / Gamma(gamma) (K u^0 + b)` at the half step.
    fn add_slip(&self, n: usize, r: &mut [f64]) {
        let t_half = (n as f64 - 0.5) * self.tau;
        for p in &self.parts {
            let c = t_half.powf(p.order - 1.0) / gamma(p.order);
            for (ri, fi) in r.iter_mut().zip(&p.initial_flux) {
                *ri += c * fi;
            }
        }
    }

    fn record(&mut self, e: &[f64]) {
        for p in &mut self.parts {
            if p.long_memory {
                p.history.extend(p.support.iter().map(|&j| e[j]));
            }
        }
    }

    /// Advance one level; on the first call with corrections, advances all
    /// `m` starting levels at once.
    pub fn step(&mut self) -> Result<(), StepError> {
        let m = self.corrections.len();
        if self.n == 0 && m > 0 {
            self.startup()?;
        } else {
            self.regular_step()?;
        }
        Ok(())
    }

    fn startup(&mut self) -> Result<(), StepError> {
        let m = self.corrections.len();
        let nu = self.u0.len();
        for p in &mut self.parts {
            p.weights.ensure(m + 1);
        }
        let mass = &self.sys.mass;
        let mut trip: Vec<(usize, usize, f64)> = Vec::new();
        let mut rhs = vec![0.0; nu * m];
        // summed rows: sum_k level_mass[n][k] * sum(M e_k) = sum(F_n); the slip terms sum to zero
        // for conservative parts
        let mut level_mass = DMatrix::<f64>::zeros(m, m);
        let mut source_sum = DVector::<f64>::zeros(m);
        for n in 1..=m {
            let pw = self.corrections.derivative_weights(n)?;
            let row_of = |j: usize| j * m + (n - 1);
            let col_of = |j: usize, k: usize| j * m + (k - 1);
            for k in 1..=m {
                let mut cm = pw[k - 1];
                if k == n {
                    cm += 1.0;
                }
                if k + 1 == n {
                    cm -= 1.0;
                }
                level_mass[(n - 1, k - 1)] = cm / self.tau;
                if cm != 0.0 {
                    for j in 0..nu {
                        trip.push((row_of(j), col_of(j, k), cm * mass[j] / self.tau));
                    }
                }
            }
            for p in self.parts.iter() {
                let d = p.weights.averaged();
                let ew = self.corrections.starting_weights(p.alpha, n, d)?;
                let kp = &p.matrix;
                for k in 1..=m {
                    let mut c = ew[k - 1];
                    if k <= n {
                        c += d[n - k];
                    }
                    if c == 0.0 {
                        continue;
                    }
                    let c = -p.scale * c;
                    for (i, j, v) in kp.triplets() {
                        trip.push((row_of(i), col_of(j, k), c * v));
                    }
                }
            }
            let src = self.source(n);
            source_sum[n - 1] = self.forcing_at(n).iter().sum();
            for j in 0..nu {
                rhs[row_of(j)] = src[j];
            }
        }
        let mut row_scale = vec![0.0f64; nu * m];
        for &(i, _, v) in &trip {
            row_scale[i] = row_scale[i].max(v.abs());
        }
        for (i, _, v) in trip.iter_mut() {
            *v /= row_scale[*i];
        }
        for (r, s) in rhs.iter_mut().zip(&row_scale) {
            *r /= s;
        }
        let block = CsrMatrix::from_triplets(nu * m, nu * m, &trip);
        let lu = BandLu::factor(&block)?;
        lu.solve_in_place(&mut rhs);
        self.start = (1..=m).map(|k| (0..nu).map(|j| rhs[j * m + (k - 1)]).collect()).collect();
        if self.parts.iter().all(|p| p.conservative) {
            if let Some(target) = level_mass.lu().solve(&source_sum) {
                let total: f64 = mass.iter().sum();
                for (e, want) in self.start.iter_mut().zip(target.iter()) {
                    let held: f64 = e.iter().zip(mass).map(|(x, m)| x * m).sum();
                    let shift = (want - held) / total;
                    e.iter_mut().for_each(|x| *x += shift);
                }
            }
        }
        for k in 0..m {
            let e = self.start[k].clone();
            self.record(&e);
        }
        let last = &self.start[m - 1];
        self.prev = if m >= 2 {
            self.start[m - 2].iter().zip(&self.u0).map(|(e, u)| e + u).collect()
        } else {
            self.u0.clone()
        };
        self.cur = last.iter().zip(&self.u0).map(|(e, u)| e + u).collect();
        self.n = m;
        self.check_finite()
    }

    fn factor_regular(&mut self) -> Result<(), StepError> {
        let mut terms: Vec<(f64, &CsrMatrix)> = Vec::new();
        let mut coeffs = Vec::new();
        for p in &mut self.parts {
            p.weights.ensure(1);
            coeffs.push(-p.scale * p.weights.averaged()[0]);
        }
        for (c, p) in coeffs.iter().zip(&self.parts) {
            terms.push((*c, &p.matrix));
        }
        let a = CsrMatrix::linear_combination(&terms).with_diagonal(&self.lhs_diag);
        self.lu = Some(BandLu::factor(&a)?);
        Ok(())
    }

    /// Banded solve. When every part is conservative the flux terms carry no
    /// net mass and the constant vector is in the kernel of each `K_p`; the
    /// solution is shifted along it so that `sum M e / tau` equals `storage`,
    /// the sum of the storage and forcing terms of the right-hand side.
    fn balanced_solve(&self, rhs: &mut [f64], storage: f64) {
        self.lu.as_ref().expect("factored").solve_in_place(rhs);
        if self.parts.iter().all(|p| p.conservative) {
            let held: f64 = rhs.iter().zip(&self.lhs_diag).map(|(x, m)| x * m).sum();
            let shift = (storage - held) / self.lhs_diag.iter().sum::<f64>();
            for x in rhs.iter_mut() {
                *x += shift;
            }
        }
    }

    fn regular_step(&mut self) -> Result<(), StepError> {
        if self.lu.is_none() {
            self.factor_regular()?;
        }
        let n = self.n + 1;
        let nu = self.u0.len();
        let m = self.corrections.len();
        let mut rhs = self.forcing_at(n);
        let e_prev: Vec<f64> = self.cur.iter().zip(&self.u0).map(|(u, u0)| u - u0).collect();
        for j in 0..nu {
            rhs[j] += self.lhs_diag[j] * e_prev[j];
        }
        if m > 0 {
            let pw = self.corrections.derivative_weights(n)?;
            for (k, w) in pw.iter().enumerate() {
                for j in 0..nu {
                    rhs[j] -= w * self.lhs_diag[j] * self.start[k][j];
                }
            }
        }
        let storage: f64 = rhs.iter().sum();
        self.add_slip(n, &mut rhs);
        let mut scratch = vec![0.0; nu];
        for p in self.parts.iter_mut() {
            p.weights.ensure(n);
            let d = p.weights.averaged();
            if p.long_memory {
                let s = p.support.len();
                let mut h = vec![0.0; s];
                for (k, chunk) in p.history.chunks_exact(s).enumerate() {
                    let w = d[n - (k + 1)];
                    for (hv, &e) in h.iter_mut().zip(chunk) {
                        *hv += w * e;
                    }
                }
                for (hv, &j) in h.iter().zip(&p.support) {
                    scratch[j] = *hv;
                }
            } else {
                // terminating weights: only the previous level contributes
                let len = p.weights.support().unwrap_or(2);
                if len > 2 {
                    return Err(StepError::Config(format!(
                        "order {} has {} nonzero weights; only integer orders are treated locally",
                        p.order, len
                    )));
                }
                for &j in &p.support {
                    scratch[j] = d[1] * e_prev[j];
                }
            }
            if m > 0 {
                let ew = self.corrections.starting_weights(p.alpha, n, d)?;
                for (k, w) in ew.iter().enumerate() {
                    for &j in &p.support {
                        scratch[j] += w * self.start[k][j];
                    }
                }
            }
            p.matrix.mul_vec_add(p.scale, &scratch, &mut rhs);
        }
        self.balanced_solve(&mut rhs, storage);
        self.record(&rhs);
        let next: Vec<f64> = rhs.iter().zip(&self.u0).map(|(e, u)| e + u).collect();
        self.prev = std::mem::replace(&mut self.cur, next);
        self.n = n;
        self.check_finite()
    }

    fn check_finite(&self) -> Result<(), StepError> {
        if self.cur.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(StepError::NonFinite(self.n))
        }
    }

    /// Step until the rule is met. `monitor` returns the quantities whose
    /// relative change decides steadiness; an empty vector means the solution
    /// itself is monitored.
    pub fn run_until(
        &mut self,
        rule: &StopRule,
        mut monitor: impl FnMut(&Stepper<'a>) -> Vec<f64>,
    ) -> Result<RunSummary, StepError> {
        let mut trace = Vec::new();
        let mut quiet = 0usize;
        let mut last = monitored(self, &mut monitor);
        let mut drift: f64 = 0.0;
        let mut steps = 0usize;
        let mut steady = false;
        loop {
            if let Some(tf) = rule.t_final {
                if self.time() >= tf - 1e-9 * self.tau {
                    break;
                }
            }
            if steps >= rule.max_steps {
                break;
            }
            let before = self.n;
            self.step()?;
            steps += self.n - before;
            let q = monitored(self, &mut monitor);
            let change = relative_change(&last, &q);
            last = q;
            drift = drift.max(self.mass_drift());
            trace.push(TraceRow { time: self.time(), mean: self.mean(), change });
            if let Some(sr) = rule.steady {
                if change < sr.tol {
                    quiet += 1;
                    if quiet >= sr.window {
                        steady = true;
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
        Ok(RunSummary { steps, time: self.time(), steady, trace, mass_drift: drift })
    }
}

fn monitored<'a>(s: &Stepper<'a>, f: &mut impl FnMut(&Stepper<'a>) -> Vec<f64>) -> Vec<f64> {
    let q = f(s);
    if q.is_empty() {
        s.current().to_vec()
    } else {
        q
    }
}

fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

#[cfg(test)]
mod tests;
