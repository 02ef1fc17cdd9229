//! Vertical-line Mellin–Barnes quadrature shared by the Meijer-G and Fox-H
//! evaluators.
//!
//! A kernel is a product of gamma factors `Γ(c + Σ_k e_k s_k)^{±1}` times
//! `Π_k z_k^{-s_k}`. The integral `(2πi)^{-K} ∫ kernel ds` is taken over
//! `s_k = c_k + i t_k` with composite Gauss–Legendre panels on a truncated
//! box. Real parameters make the integrand conjugate-symmetric under
//! `t ↦ -t`, so only the half space `t_0 ≥ 0` is sampled.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::gamma::{ln_gamma, ln_gamma_kernel};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// `Γ(offset + Σ_k coeffs[k]·s_k)` in the numerator or denominator.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    pub offset: f64,
    pub coeffs: Vec<f64>,
    pub numerator: bool,
}

impl Factor {
    pub fn new(offset: f64, coeffs: Vec<f64>, numerator: bool) -> Self {
        Self { offset, coeffs, numerator }
    }

    fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    fn real_part(&self, c: &[f64]) -> f64 {
        self.offset + self.coeffs.iter().zip(c).map(|(e, x)| e * x).sum::<f64>()
    }
}

/// Integrand description.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Kernel {
    pub factors: Vec<Factor>,
    /// `ln z_k`; the kernel carries `exp(-Σ_k s_k ln z_k)`.
    pub ln_z: Vec<f64>,
}

impl Kernel {
    pub fn dims(&self) -> usize {
        self.ln_z.len()
    }

    fn ln_factor(f: &Factor, s: &[Complex64]) -> Complex64 {
        let mut arg = Complex64::new(f.offset, 0.0);
        for (e, x) in f.coeffs.iter().zip(s) {
            if *e != 0.0 {
                arg += x * *e;
            }
        }
        let lg = ln_gamma_kernel(arg);
        if f.numerator {
            lg
        } else {
            -lg
        }
    }

    /// Min over numerator factors of the real part of their argument,
    /// normalized by coefficient norm.
    fn margin(&self, c: &[f64]) -> f64 {
        self.factors
            .iter()
            .filter(|f| f.numerator && f.norm() > 0.0)
            .map(|f| f.real_part(c) / f.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Exponential decay rate `Δ_k` of the integrand along axis `k`.
    fn decay_rate(&self, k: usize) -> f64 {
        self.factors
            .iter()
            .map(|f| if f.numerator { f.coeffs[k].abs() } else { -f.coeffs[k].abs() })
            .sum()
    }
}

/// Outcome of a contour evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourValue {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub abscissa: Vec<f64>,
    pub nodes: usize,
    /// Offsets were nudged by [`PERTURBATION`] to separate touching pole families.
    pub perturbed: bool,
}

impl ContourValue {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

pub const PERTURBATION: f64 = 1e-6;

/// Grid layout along every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPlan {
    pub abscissa: Vec<f64>,
    pub half_height: Vec<f64>,
    pub panels: Vec<usize>,
    pub tolerance: f64,
}

pub const MIN_PANELS: usize = 8;
/// Gauss–Legendre nodes per panel for the fine and coarse passes; smaller
/// for tensor grids, smaller still for loose trivariate targets.
fn nodes_per_panel(dims: usize, tolerance: f64) -> (usize, usize) {
    match dims {
        0 | 1 => (12, 8),
        2 => (8, 5),
        _ if tolerance >= 1e-5 => (6, 4),
        _ => (8, 5),
    }
}
const MARGIN_CAP: f64 = 1.0;
const BOX_RADIUS: f64 = 6.0;

impl ContourPlan {
    pub fn validate(&self, dims: usize) -> Result<()> {
        if self.abscissa.len() != dims || self.half_height.len() != dims || self.panels.len() != dims {
            return Err(Error::Usage(format!("contour plan must describe {dims} axes")));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::Usage(format!("tolerance {} outside (0, 1)", self.tolerance)));
        }
        if self.panels.iter().any(|&p| p < MIN_PANELS) {
            return Err(Error::Usage(format!("panel count must be at least {MIN_PANELS}")));
        }
        if self.half_height.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Usage("truncation half-height must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// abscissa selection
// ---------------------------------------------------------------------------

/// Maximize `objective · x` subject to `rows[i] · x ≥ rhs[i]` by vertex
/// enumeration. Intended for at most four unknowns and a bounded region.
fn small_lp(rows: &[Vec<f64>], rhs: &[f64], objective: &[f64]) -> Option<Vec<f64>> {
    let d = objective.len();
    let m = rows.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..d).collect();
    if m < d {
        return None;
    }
    loop {
        if let Some(x) = solve_square(&idx.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>(), &idx.iter().map(|&i| rhs[i]).collect::<Vec<_>>()) {
            let feasible = rows
                .iter()
                .zip(rhs)
                .all(|(r, b)| dot(r, &x) >= b - 1e-10 * (1.0 + b.abs()));
            if feasible {
                let val = dot(objective, &x);
                if best.as_ref().is_none_or(|(bv, _)| val > *bv + 1e-14) {
                    best = Some((val, x));
                }
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return best.map(|(_, x)| x);
            }
            i -= 1;
            if idx[i] < m - d + i {
                idx[i] += 1;
                for j in i + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, v)| {
        let mut row = r.clone();
        row.push(*v);
        row
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Per-axis preferred abscissa from the factors that involve only that axis:
/// midpoint of the gap between the rightmost left pole and the leftmost
/// right pole. The second component is a search radius that covers the gap.
fn preferred_abscissa(kernel: &Kernel) -> Vec<(f64, f64)> {
    (0..kernel.dims())
        .map(|k| {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for f in kernel.factors.iter().filter(|f| f.numerator) {
                let sup = f.support();
                if sup != [k] {
                    continue;
                }
                let a = f.coeffs[k];
                let bound = -f.offset / a;
                if a > 0.0 {
                    lo = lo.max(bound);
                } else {
                    hi = hi.min(bound);
                }
            }
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => (0.5 * (lo + hi), BOX_RADIUS.max(0.5 * (hi - lo))),
                (true, false) => (lo + 0.5, BOX_RADIUS),
                (false, true) => (hi - 0.5, BOX_RADIUS),
                (false, false) => (0.0, BOX_RADIUS),
            }
        })
        .collect()
}

/// Choose abscissas with the largest (capped) pole clearance, then pull them
/// as close as possible to the per-axis preferred points.
///
/// Returns the abscissas, the achieved clearance, and whether the kernel had
/// to be perturbed.
pub(crate) fn choose_abscissa(kernel: &Kernel) -> Result<(Kernel, Vec<f64>, f64, bool)> {
    match clearance_lp(kernel) {
        Some((c, t)) if t > 1e-9 => {
            let (c, t) = saddle_shift(kernel, c, t);
            Ok((kernel.clone(), c, t, false))
        }
        Some((_, t)) if t > -1e-9 => {
            let mut k2 = kernel.clone();
            for f in k2.factors.iter_mut().filter(|f| f.numerator && f.norm() > 0.0) {
                f.offset += PERTURBATION;
            }
            match clearance_lp(&k2) {
                Some((c, t)) if t > 0.0 => {
                    let (c, t) = saddle_shift(&k2, c, t);
                    Ok((k2, c, t, true))
                }
                _ => Err(Error::Contour("pole families touch and perturbation did not separate them".into())),
            }
        }
        Some((_, t)) => Err(Error::Contour(format!(
            "left and right pole families overlap (best clearance {t:.3e})"
        ))),
        None => Err(Error::Contour("no feasible abscissa".into())),
    }
}

fn clearance_lp(kernel: &Kernel) -> Option<(Vec<f64>, f64)> {
    let d = kernel.dims();
    let (c0, radius): (Vec<f64>, Vec<f64>) = preferred_abscissa(kernel).into_iter().unzip();
    let poles: Vec<&Factor> = kernel.factors.iter().filter(|f| f.numerator && f.norm() > 0.0).collect();
    if d == 0 {
        return Some((vec![], f64::INFINITY));
    }
    if poles.is_empty() {
        return Some((c0, MARGIN_CAP));
    }
    // stage 1: x = (c, t), maximize t
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for f in &poles {
        let mut r = f.coeffs.clone();
        r.push(-f.norm());
        rows.push(r);
        rhs.push(-f.offset);
    }
    for k in 0..d {
        let mut up = vec![0.0; d + 1];
        up[k] = 1.0;
        rows.push(up.clone());
        rhs.push(c0[k] - radius[k]);
        up[k] = -1.0;
        rows.push(up);
        rhs.push(-(c0[k] + radius[k]));
    }
    let mut cap = vec![0.0; d + 1];
    cap[d] = -1.0;
    rows.push(cap.clone());
    rhs.push(-MARGIN_CAP);
    cap[d] = 1.0;
    rows.push(cap);
    rhs.push(-10.0);
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    let x = small_lp(&rows, &rhs, &obj)?;
    let t_star = x[d];
    if t_star <= 0.0 {
        return Some((x[..d].to_vec(), t_star));
    }
    // stage 2: x = (c, δ), minimize δ = max_k |c_k - c0_k| keeping clearance ≥ 0.9 t*
    let tau = 0.9 * t_star;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for f in &poles {
        let mut r = f.coeffs.clone();
        r.push(0.0);
        rows.push(r);
        rhs.push(-f.offset + tau * f.norm());
    }
    for k in 0..d {
        let mut r = vec![0.0; d + 1];
        r[k] = 1.0;
        r[d] = 1.0;
        rows.push(r.clone());
        rhs.push(c0[k]);
        r[k] = -1.0;
        rows.push(r);
        rhs.push(-c0[k]);
    }
    let mut r = vec![0.0; d + 1];
    r[d] = 1.0;
    rows.push(r.clone());
    rhs.push(0.0);
    r[d] = -1.0;
    rows.push(r);
    rhs.push(-radius.iter().fold(0.0, |a: f64, &b| a.max(b)));
    let mut obj = vec![0.0; d + 1];
    obj[d] = -1.0;
    let y = small_lp(&rows, &rhs, &obj).unwrap_or(x);
    let c = y[..d].to_vec();
    let t = kernel.margin(&c);
    Some((c, t))
}

const SADDLE_RADIUS: f64 = 60.0;

/// Smoothed log-magnitude of the integrand near `t = 0`; sampling off the
/// real axis keeps denominator zeros from attracting the minimizer.
fn line_log_magnitude(kernel: &Kernel, c: &[f64]) -> f64 {
    let d = kernel.dims();
    let mut vals = [0.0; 3];
    for (slot, h) in vals.iter_mut().zip([0.0, 0.7, 1.9]) {
        let s: Vec<Complex64> = (0..d).map(|k| Complex64::new(c[k], h)).collect();
        let mut acc = 0.0;
        for f in &kernel.factors {
            acc += Kernel::ln_factor(f, &s).re;
        }
        for k in 0..d {
            acc -= c[k] * kernel.ln_z[k];
        }
        *slot = if acc.is_nan() { f64::INFINITY } else { acc };
    }
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + vals.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Move the abscissa toward the real-axis minimum of the integrand magnitude
/// while keeping a pole clearance of at least `min(t/2, 1/4)`. Large
/// arguments otherwise cost digits to cancellation.
fn saddle_shift(kernel: &Kernel, mut c: Vec<f64>, t: f64) -> (Vec<f64>, f64) {
    let d = kernel.dims();
    let tau = (0.5 * t).min(0.25);
    let anchor = c.clone();
    let poles: Vec<&Factor> = kernel.factors.iter().filter(|f| f.numerator && f.norm() > 0.0).collect();
    let mut best = line_log_magnitude(kernel, &c);
    for _sweep in 0..4 {
        for k in 0..d {
            let mut lo = anchor[k] - SADDLE_RADIUS;
            let mut hi = anchor[k] + SADDLE_RADIUS;
            for f in &poles {
                let a = f.coeffs[k];
                if a == 0.0 {
                    continue;
                }
                let rest: f64 = (0..d).filter(|&j| j != k).map(|j| f.coeffs[j] * c[j]).sum();
                let bound = (tau * f.norm() - f.offset - rest) / a;
                if a > 0.0 {
                    lo = lo.max(bound);
                } else {
                    hi = hi.min(bound);
                }
            }
            if !(hi > lo) {
                continue;
            }
            let eval = |x: f64, c: &[f64]| {
                let mut cc = c.to_vec();
                cc[k] = x;
                line_log_magnitude(kernel, &cc)
            };
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut b) = (lo, hi);
            let mut x1 = b - g * (b - a);
            let mut x2 = a + g * (b - a);
            let mut f1 = eval(x1, &c);
            let mut f2 = eval(x2, &c);
            for _ in 0..48 {
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = eval(x1, &c);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = eval(x2, &c);
                }
                if b - a < 1e-3 {
                    break;
                }
            }
            let x = 0.5 * (a + b);
            let fx = eval(x, &c);
            if fx < best {
                best = fx;
                c[k] = x;
            }
        }
    }
    let m = kernel.margin(&c);
    (c, m)
}

// ---------------------------------------------------------------------------
// grid construction
// ---------------------------------------------------------------------------

fn axis_factors(kernel: &Kernel, k: usize) -> impl Iterator<Item = &Factor> {
    kernel.factors.iter().filter(move |f| f.coeffs[k] != 0.0)
}

/// Log-magnitude of the integrand along axis `k` with the other axes at `t = 0`.
fn ray_log_magnitude(kernel: &Kernel, c: &[f64], k: usize, t: f64) -> f64 {
    let s: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(j, &cj)| Complex64::new(cj, if j == k { t } else { 0.0 }))
        .collect();
    let mut acc = 0.0;
    for f in axis_factors(kernel, k) {
        acc += Kernel::ln_factor(f, &s).re;
    }
    acc - c[k] * kernel.ln_z[k]
}

/// Smallest height beyond which the ray magnitude stays below `rel` times
/// its running maximum.
fn truncation_height(kernel: &Kernel, c: &[f64], k: usize, rel: f64) -> f64 {
    let target = rel.ln();
    let mut peak = ray_log_magnitude(kernel, c, k, 0.0);
    let mut t = 0.0;
    let step = 0.5;
    let mut below = 0;
    while t < 400.0 {
        t += step;
        let v = ray_log_magnitude(kernel, c, k, t);
        if v > peak {
            peak = v;
            below = 0;
        } else if v - peak < target {
            below += 1;
            if below >= 4 {
                return t;
            }
        } else {
            below = 0;
        }
    }
    t
}

/// Largest net phase velocity `|d/dt arg kernel|` along axis `k` over
/// `[0, height]`, using `d/dt arg Γ(a + i e t) ≈ e ln|a + i e t|`.
fn oscillation_rate(kernel: &Kernel, c: &[f64], k: usize, height: f64) -> f64 {
    let samples = 16;
    let mut worst: f64 = 0.0;
    for j in 0..=samples {
        let t = height * j as f64 / samples as f64;
        let mut w = -kernel.ln_z[k];
        for f in axis_factors(kernel, k) {
            let e = f.coeffs[k];
            let re = f.real_part(c);
            let im = e * t;
            let mag = (re * re + im * im).sqrt().max(1.0);
            let sign = if f.numerator { 1.0 } else { -1.0 };
            w += sign * e * mag.ln();
        }
        worst = worst.max(w.abs());
    }
    worst.max(1.0)
}

/// Panel edges on `[0, height]`, graded near the origin when poles are close.
fn panel_edges(height: f64, width: f64, clearance: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut w = clearance.clamp(0.02, width);
    let mut x = 0.0;
    while x < height {
        x = (x + w).min(height);
        edges.push(x);
        w = (2.0 * w).min(width);
    }
    edges
}

/// Nodes and weights on one axis. Axis 0 covers `[0, h]`, others `[-h, h]`.
fn axis_nodes(edges: &[f64], nodes_per_panel: usize, symmetric: bool) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(nodes_per_panel);
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for win in edges.windows(2) {
        let (a, b) = (win[0], win[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            ts.push(mid + half * x);
            ws.push(half * w);
        }
    }
    if symmetric {
        let n = ts.len();
        let mut t2 = Vec::with_capacity(2 * n);
        let mut w2 = Vec::with_capacity(2 * n);
        for i in (0..n).rev() {
            t2.push(-ts[i]);
            w2.push(ws[i]);
        }
        t2.extend_from_slice(&ts);
        w2.extend_from_slice(&ws);
        (t2, w2)
    } else {
        (ts, ws)
    }
}

/// Build a default plan for a kernel.
pub(crate) fn auto_plan(kernel: &Kernel, abscissa: Vec<f64>, clearance: f64, tolerance: f64) -> Result<ContourPlan> {
    let d = kernel.dims();
    let mut half_height = Vec::with_capacity(d);
    let mut panels = Vec::with_capacity(d);
    for k in 0..d {
        let rate = kernel.decay_rate(k);
        if rate <= 0.0 {
            return Err(Error::Domain(format!(
                "Mellin–Barnes integrand does not decay along axis {k} (rate {rate}); divergent parameter combination"
            )));
        }
        let h = truncation_height(kernel, &abscissa, k, tolerance * 1e-3);
        let width = (2.0 * PI / oscillation_rate(kernel, &abscissa, k, h)).min(2.0);
        half_height.push(h);
        panels.push((panel_edges(h, width, clearance).len() - 1).max(MIN_PANELS));
    }
    Ok(ContourPlan {
        abscissa,
        half_height,
        panels,
        tolerance,
    })
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

struct Grid {
    t: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
}

fn build_grid(plan: &ContourPlan, clearance: f64, nodes_per_panel: usize, refine: u32) -> Grid {
    let d = plan.abscissa.len();
    let mut t = Vec::with_capacity(d);
    let mut w = Vec::with_capacity(d);
    for k in 0..d {
        let h = plan.half_height[k] * (1.25f64).powi(refine as i32);
        let width = h / plan.panels[k] as f64 / 2f64.powi(refine as i32);
        let edges = panel_edges(h, width, clearance / 2f64.powi(refine as i32));
        let (tk, wk) = axis_nodes(&edges, nodes_per_panel, k != 0);
        t.push(tk);
        w.push(wk);
    }
    Grid { t, w }
}

/// Integral, Σ|w f| and the bound mass of pruned nodes.
struct GridSum {
    value: f64,
    abs: f64,
    pruned: f64,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

const PRUNE: f64 = 1e-15;

fn integrate_grid(kernel: &Kernel, c: &[f64], grid: &Grid) -> GridSum {
    let d = kernel.dims();
    let (separable, joint): (Vec<&Factor>, Vec<&Factor>) =
        kernel.factors.iter().partition(|f| f.support().len() <= 1);
    // per-axis log-kernels from single-variable factors
    let mut axis_ln: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for k in 0..d {
        let vals = grid.t[k]
            .iter()
            .map(|&tk| {
                let mut s = vec![Complex64::new(0.0, 0.0); d];
                s[k] = Complex64::new(c[k], tk);
                let mut acc = -s[k] * kernel.ln_z[k];
                for f in separable.iter().filter(|f| f.coeffs[k] != 0.0) {
                    acc += Kernel::ln_factor(f, &s);
                }
                acc
            })
            .collect();
        axis_ln.push(vals);
    }
    // constant factors (no variable)
    let mut const_ln = Complex64::new(0.0, 0.0);
    for f in separable.iter().filter(|f| f.support().is_empty()) {
        const_ln += Kernel::ln_factor(f, &[]);
    }

    // |Γ(x + iy)| ≤ Γ(x) bounds numerator joint factors by a constant, so
    // every node has a separable magnitude bound
    let joint_bound = joint
        .iter()
        .all(|f| f.numerator && f.real_part(c) > 0.0)
        .then(|| joint.iter().map(|f| ln_gamma(f.real_part(c))).sum::<f64>());
    let bounds: Vec<Vec<f64>> = (0..d)
        .map(|k| axis_ln[k].iter().zip(&grid.w[k]).map(|(a, w)| a.re + w.ln()).collect())
        .collect();
    let axis_mass: Vec<f64> = bounds.iter().map(|b| log_sum_exp(b)).collect();
    let base = const_ln.re + joint_bound.unwrap_or(0.0);
    let threshold = match joint_bound {
        Some(_) if d >= 2 => base + axis_mass.iter().sum::<f64>() + PRUNE.ln(),
        _ => f64::NEG_INFINITY,
    };
    let inner_max: f64 = bounds[1..]
        .iter()
        .map(|b| b.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    let inner_mass: f64 = axis_mass[1..].iter().sum();

    let counts: Vec<usize> = grid.t.iter().map(Vec::len).collect();
    let inner: usize = counts[1..].iter().product();
    let outer = counts[0];
    let partial: Vec<(f64, f64, f64)> = (0..outer)
        .into_par_iter()
        .map(|i0| {
            let head = base + bounds[0][i0];
            if head + inner_max < threshold {
                return (0.0, 0.0, (head + inner_mass).exp());
            }
            let mut sum = 0.0;
            let mut abs = 0.0;
            let mut pruned = 0.0;
            let mut idx = vec![0usize; d];
            idx[0] = i0;
            let mut s = vec![Complex64::new(0.0, 0.0); d];
            for flat in 0..inner {
                let mut rem = flat;
                for k in (1..d).rev() {
                    idx[k] = rem % counts[k];
                    rem /= counts[k];
                }
                let mut bound = head;
                for k in 1..d {
                    bound += bounds[k][idx[k]];
                }
                if bound < threshold {
                    pruned += bound.exp();
                    continue;
                }
                let mut ln = const_ln;
                let mut weight = 1.0;
                for k in 0..d {
                    ln += axis_ln[k][idx[k]];
                    weight *= grid.w[k][idx[k]];
                    s[k] = Complex64::new(c[k], grid.t[k][idx[k]]);
                }
                for f in &joint {
                    ln += Kernel::ln_factor(f, &s);
                }
                if ln.re == f64::NEG_INFINITY {
                    continue;
                }
                let v = ln.exp();
                if v.re.is_finite() {
                    sum += weight * v.re;
                    abs += weight * v.norm();
                }
            }
            (sum, abs, pruned)
        })
        .collect();
    let (sum, abs, pruned) = partial
        .iter()
        .fold((0.0, 0.0, 0.0), |(a, b, p), (x, y, z)| (a + x, b + y, p + z));
    // half space doubled; (2π)^{-K} from ds = i dt
    let scale = 2.0 / (2.0 * PI).powi(d as i32);
    GridSum {
        value: sum * scale,
        abs: abs * scale,
        pruned: pruned * scale,
    }
}

/// Evaluate a kernel on a plan, refining up to `max_refine` times while the
/// error estimate exceeds the plan tolerance. `budget` caps the total node
/// count of the fine grid.
pub(crate) fn evaluate(
    kernel: &Kernel,
    plan: &ContourPlan,
    clearance: f64,
    perturbed: bool,
    budget: usize,
    max_refine: u32,
) -> Result<ContourValue> {
    plan.validate(kernel.dims())?;
    if kernel.dims() == 0 {
        let mut ln = Complex64::new(0.0, 0.0);
        for f in &kernel.factors {
            ln += Kernel::ln_factor(f, &[]);
        }
        return Ok(ContourValue {
            value: ln.exp().re,
            error: 0.0,
            abscissa: vec![],
            nodes: 0,
            perturbed,
        });
    }
    let c = &plan.abscissa;
    let m = kernel.margin(c);
    if !(m > 0.0) {
        return Err(Error::Contour(format!(
            "abscissa {c:?} lies on or beyond a pole (clearance {m:.3e})"
        )));
    }
    let clearance = clearance.min(m);
    let mut last = None;
    let (n_fine, n_coarse) = nodes_per_panel(kernel.dims(), plan.tolerance);
    for refine in 0..=max_refine {
        let fine = build_grid(plan, clearance, n_fine, refine);
        let nodes: usize = fine.t.iter().map(Vec::len).product();
        if nodes > budget {
            if let Some(v) = last {
                return Err(Error::Convergence {
                    requested: plan.tolerance,
                    achieved: ContourValue::relative_error(&v),
                });
            }
            return Err(Error::CostGuard { nodes, budget });
        }
        let coarse = build_grid(plan, clearance, n_coarse, refine);
        let f = integrate_grid(kernel, c, &fine);
        let qc = integrate_grid(kernel, c, &coarse).value;
        let qf = f.value;
        let roundoff = 64.0 * f64::EPSILON * f.abs;
        let error = (qf - qc).abs() + roundoff + f.pruned;
        let value = ContourValue {
            value: qf,
            error,
            abscissa: c.clone(),
            nodes,
            perturbed,
        };
        if !qf.is_finite() {
            return Err(Error::Domain("Mellin–Barnes integral overflowed".into()));
        }
        if error <= plan.tolerance * qf.abs() || ((qf - qc).abs() <= roundoff && f.pruned <= roundoff) {
            return Ok(value);
        }
        last = Some(value);
    }
    let v = last.expect("at least one pass");
    Err(Error::Convergence {
        requested: plan.tolerance,
        achieved: v.relative_error(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel_1d(factors: Vec<(f64, f64, bool)>, z: f64) -> Kernel {
        Kernel {
            factors: factors.into_iter().map(|(o, e, n)| Factor::new(o, vec![e], n)).collect(),
            ln_z: vec![z.ln()],
        }
    }

    #[test]
    fn lp_finds_midpoint_of_gap() {
        // Γ(s) Γ(1 - s): poles at 0, -1, ... and 1, 2, ...
        let k = kernel_1d(vec![(0.0, 1.0, true), (1.0, -1.0, true)], 1.0);
        let (c, t) = clearance_lp(&k).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-9);
        assert!((t - 0.5).abs() < 1e-9);
        let (_, c, _, perturbed) = choose_abscissa(&k).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-2);
        assert!(!perturbed);
    }

    #[test]
    fn large_argument_moves_toward_saddle() {
        let k = kernel_1d(vec![(0.0, 1.0, true)], 20.0);
        let (_, c, _, _) = choose_abscissa(&k).unwrap();
        assert!(c[0] > 10.0);
    }

    #[test]
    fn touching_families_are_perturbed() {
        // Γ(s) Γ(-s): left pole at 0 meets right pole at 0
        let k = kernel_1d(vec![(0.0, 1.0, true), (0.0, -1.0, true)], 1.0);
        let (_, _, t, perturbed) = choose_abscissa(&k).unwrap();
        assert!(perturbed);
        assert!(t > 0.0);
    }

    #[test]
    fn overlapping_families_are_rejected() {
        // Γ(2 + s) needs Re s > -2, Γ(-3 - s) needs Re s < -3
        let k = kernel_1d(vec![(2.0, 1.0, true), (-3.0, -1.0, true)], 1.0);
        assert!(matches!(choose_abscissa(&k), Err(Error::Contour(_))));
    }

    #[test]
    fn exponential_by_contour() {
        // e^{-z} = (1/2πi) ∫ Γ(s) z^{-s} ds
        for z in [0.3, 1.0, 2.0, 5.0] {
            let k = kernel_1d(vec![(0.0, 1.0, true)], z);
            let (k, c, t, p) = choose_abscissa(&k).unwrap();
            let plan = auto_plan(&k, c, t, 1e-10).unwrap();
            let v = evaluate(&k, &plan, t, p, 1_000_000, 3).unwrap();
            assert!((v.value / (-z).exp() - 1.0).abs() < 1e-10, "z={z}: {}", v.value);
        }
    }

    #[test]
    fn trivariate_plan_is_finite() {
        let k = Kernel {
            factors: vec![
                Factor::new(0.0, vec![1.0, 0.0, 0.0], true),
                Factor::new(0.0, vec![0.0, 1.0, 0.0], true),
                Factor::new(0.0, vec![0.0, 0.0, 1.0], true),
                Factor::new(2.0, vec![-1.0, -1.0, -1.0], true),
            ],
            ln_z: vec![0.4f64.ln(), 0.9f64.ln(), 0.7f64.ln()],
        };
        let (k, c, t, _) = choose_abscissa(&k).unwrap();
        let plan = auto_plan(&k, c, t, 1e-6).unwrap();
        plan.validate(3).unwrap();
        assert!(plan.half_height.iter().all(|&h| h > 1.0 && h < 400.0), "{plan:?}");
        // Γ(s₁)Γ(s₂)Γ(s₃)Γ(2-s₁-s₂-s₃) z^{-s} integrates to Γ(2)(1+Σz)^{-2}
        let v = evaluate(&k, &plan, t, false, 20_000_000, 2).unwrap();
        assert!((v.value - 1.0 / (1.0f64 + 0.4 + 0.9 + 0.7).powi(2)).abs() < 1e-6);
    }

    #[test]
    fn lp_two_dimensional_joint_constraint() {
        // the joint factor requires s1 - s2 > -0.2
        let k = Kernel {
            factors: vec![
                Factor::new(0.0, vec![-1.0, 0.0], true),
                Factor::new(1.0, vec![1.0, 0.0], true),
                Factor::new(0.0, vec![0.0, 1.0], true),
                Factor::new(0.2, vec![1.0, -1.0], true),
            ],
            ln_z: vec![0.0, 0.0],
        };
        let (_, c, t, _) = choose_abscissa(&k).unwrap();
        assert!(t > 0.0);
        assert!(k.margin(&c) > 0.0);
    }
}
