//! Fast evaluation of g-dimensional finite theta sums
//! `Σ_{n ∈ Z^g ∩ [0,N]^g} e(Q[n] + l(n))`, generalized φ-sums, partial-sum
//! tracking, and growth-exponent fitting.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::kahan::{tree_sum_complex, KahanComplex};
use crate::reduction::{DiophantineClass, DiophantineReport};
use crate::threads;
use crate::{Result, SiegelError};

mod phase;
pub use phase::{frac, Dyadic};

/// Parallel tile size: tiles are independent summation units combined by a
/// deterministic pairwise tree.
const ANCHOR_BLOCK: u64 = 1 << 16;

/// Steps between fresh trig anchors inside a tile. The multiplicative
/// recurrence accumulates phase error quadratically in the step count, so a
/// full 2^16 block would drift to ~5e-7; 256 steps keep the per-term drift
/// below 1e-11 while the trig cost stays amortized.
const SUB_ANCHOR: u64 = 256;

/// Default term budget for a theta evaluation.
pub const DEFAULT_TERM_BUDGET: u64 = 4_000_000_000;

/// Quadratic data `(Q, l, t)` of a theta sum: phase `Q[n] + l(n)` with
/// external offset `t` used by the φ-sum decomposition.
#[derive(Debug, Clone)]
pub struct QuadraticData {
    q: DMatrix<f64>,
    l: DVector<f64>,
    pub t: f64,
}

impl QuadraticData {
    pub fn new(q: DMatrix<f64>, l: DVector<f64>, t: f64) -> Result<Self> {
        let g = q.nrows();
        if q.ncols() != g || l.len() != g {
            return Err(SiegelError::Dimension("Q must be g×g and l of length g".into()));
        }
        if (&q - q.transpose()).amax() > 1e-14 * (1.0 + q.amax()) {
            return Err(SiegelError::Domain("Q must be symmetric to 1e-14".into()));
        }
        Ok(Self { q, l, t })
    }

    pub fn scalar(q: f64, l: f64, t: f64) -> Self {
        Self {
            q: DMatrix::from_element(1, 1, q),
            l: DVector::from_element(1, l),
            t,
        }
    }

    pub fn genus(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn l(&self) -> &DVector<f64> {
        &self.l
    }

    /// Data for the φ-sum mode `k`: `(kQ, 2k l)`.
    pub fn mode(&self, k: i64) -> Self {
        Self {
            q: &self.q * k as f64,
            l: &self.l * (2 * k) as f64,
            t: self.t,
        }
    }
}

/// One tracked partial sum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    pub re: f64,
    pub im: f64,
    /// `N^{−g/2} |raw|`.
    pub normalized: f64,
}

impl Checkpoint {
    pub fn raw(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Partial sums of a theta evaluation at increasing `N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SumResult {
    pub g: usize,
    pub checkpoints: Vec<Checkpoint>,
    /// Set when the term budget cut the checkpoint list short.
    pub budget_exceeded: bool,
}

/// Geometric checkpoint grid `{⌊N_max·2^{−j}⌋}`, ascending and deduplicated.
pub fn checkpoint_grid(n_max: u64, count: usize) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..count as u32)
        .map(|j| n_max >> j)
        .filter(|&n| n >= 1)
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Exact per-term phase `frac(Q[n] + l(n))` of the theta sum.
///
/// Dyadic reduction term by term; integer shifts `Q → Q + S` (symmetric
/// integer `S`) and `l → l + m` leave the result bit-for-bit unchanged.
pub fn phase_mod_1(data: &QuadraticData, n: &[i64]) -> f64 {
    let g = data.genus();
    let mut acc = 0.0;
    for i in 0..g {
        for j in 0..g {
            let d = Dyadic::from_f64(data.q[(i, j)]);
            acc += d.frac_times(n[i] as i128 * n[j] as i128);
        }
    }
    for i in 0..g {
        let d = Dyadic::from_f64(data.l[i]);
        acc += d.frac_times(n[i] as i128);
    }
    frac(acc)
}

#[inline]
fn unit_phase(theta: f64) -> Complex64 {
    let (s, c) = (TAU * theta).sin_cos();
    Complex64::new(c, s)
}

/// Raw theta sum over the cube `[0, N]^g` by second-difference phase
/// recurrences with exact anchors, compensated accumulation, and
/// deterministic tile reduction.
pub fn theta_raw(data: &QuadraticData, n: u64) -> Complex64 {
    let g = data.genus();
    match g {
        1 => theta_raw_g1(data, n),
        _ => theta_raw_gn(data, n),
    }
}

fn theta_raw_g1(data: &QuadraticData, n: u64) -> Complex64 {
    // tiles are anchor blocks; each is evaluated independently
    let tiles: Vec<u64> = (0..=n / ANCHOR_BLOCK).collect();
    let parts = threads::par_map(tiles, |tile| {
        let start = tile * ANCHOR_BLOCK;
        let stop = ((tile + 1) * ANCHOR_BLOCK - 1).min(n);
        row_sum(data, &[], start, stop)
    });
    tree_sum_complex(&parts)
}

fn theta_raw_gn(data: &QuadraticData, n: u64) -> Complex64 {
    let g = data.genus();
    // split the outermost axis into fixed tiles
    let rows_per_tile = (ANCHOR_BLOCK / (n + 1).max(1)).max(1);
    let n_tiles = (n + 1).div_ceil(rows_per_tile);
    let tiles: Vec<u64> = (0..n_tiles).collect();
    let parts = threads::par_map(tiles, |tile| {
        let lo = tile * rows_per_tile;
        let hi = ((tile + 1) * rows_per_tile - 1).min(n);
        let mut acc = KahanComplex::new();
        let mut outer = vec![0i64; g - 1];
        outer[0] = lo as i64;
        loop {
            acc.add(row_sum(data, &outer, 0, n));
            if !advance_box(&mut outer, hi as i64, n as i64) {
                return acc.value();
            }
        }
    });
    tree_sum_complex(&parts)
}

/// Advances a multi-index over `[.., hi0] × [0, max]^(k-1)`; the first axis
/// only ever increments. Returns false when exhausted.
fn advance_box(idx: &mut [i64], hi0: i64, max: i64) -> bool {
    for axis in (0..idx.len()).rev() {
        let limit = if axis == 0 { hi0 } else { max };
        if idx[axis] < limit {
            idx[axis] += 1;
            for v in idx.iter_mut().skip(axis + 1) {
                *v = 0;
            }
            return true;
        }
    }
    false
}

/// Sums `e(phase(outer, n))` for `n` in `[start, stop]` along the innermost
/// axis, re-anchoring the recurrence every `ANCHOR_BLOCK` terms.
fn row_sum(data: &QuadraticData, outer: &[i64], start: u64, stop: u64) -> Complex64 {
    let g = data.genus();
    let axis = g - 1;
    debug_assert_eq!(outer.len(), axis);
    let mut acc = KahanComplex::new();
    let mut nvec: Vec<i64> = outer.iter().copied().chain(std::iter::once(0)).collect();

    // second difference 2·Q_gg is constant along the axis
    let w2 = unit_phase(Dyadic::from_f64(2.0 * data.q[(axis, axis)]).frac_times(1));

    let mut n = start;
    while n <= stop {
        let block_end = (n + SUB_ANCHOR - 1).min(stop);
        // exact anchors at the block start
        nvec[axis] = n as i64;
        let mut z = unit_phase(phase_mod_1(data, &nvec));
        let mut w = unit_phase(first_difference_mod_1(data, &nvec));
        for _ in n..=block_end {
            acc.add(z);
            z *= w;
            w *= w2;
        }
        n = block_end + 1;
    }
    acc.value()
}

/// `frac(phase(n + e_g) − phase(n))`, exact: the difference is
/// `2 (Q n)_g + Q_gg + l_g`.
fn first_difference_mod_1(data: &QuadraticData, n: &[i64]) -> f64 {
    let g = data.genus();
    let axis = g - 1;
    let mut acc = 0.0;
    for j in 0..g {
        let d = Dyadic::from_f64(data.q[(axis, j)]);
        let factor = if j == axis { 2 * n[j] as i128 + 1 } else { 2 * n[j] as i128 };
        acc += d.frac_times(factor);
    }
    acc += Dyadic::from_f64(data.l[axis]).frac_times(1);
    frac(acc)
}

/// Evaluates the theta sum at the requested checkpoints (ascending `N`).
///
/// Direct cost is `O(Σ N_j^g)`. When the term budget runs out the result is
/// truncated at the last affordable checkpoint and flagged.
pub fn theta_sum(data: &QuadraticData, checkpoints: &[u64]) -> Result<SumResult> {
    theta_sum_with_budget(data, checkpoints, DEFAULT_TERM_BUDGET)
}

pub fn theta_sum_with_budget(
    data: &QuadraticData,
    checkpoints: &[u64],
    budget: u64,
) -> Result<SumResult> {
    if checkpoints.is_empty() {
        return Err(SiegelError::Domain("no checkpoints requested".into()));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SiegelError::Domain("checkpoints must be strictly increasing".into()));
    }
    let g = data.genus();
    let mut spent: u64 = 0;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut budget_exceeded = false;
    for &n in checkpoints {
        let cost = (n + 1).saturating_pow(g as u32);
        if spent.saturating_add(cost) > budget {
            budget_exceeded = true;
            break;
        }
        spent += cost;
        let raw = theta_raw(data, n);
        out.push(Checkpoint {
            n,
            re: raw.re,
            im: raw.im,
            normalized: (n as f64).powf(-(g as f64) / 2.0) * raw.norm(),
        });
    }
    if out.is_empty() {
        return Err(SiegelError::Budget(format!(
            "first checkpoint alone exceeds the budget of {budget} terms"
        )));
    }
    Ok(SumResult {
        g,
        checkpoints: out,
        budget_exceeded,
    })
}

/// Zero-mean finite Fourier series on `R/(1/2)Z`:
/// `φ(u) = Σ_k  c_k e(2k u)`, `k ≠ 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierSeries {
    pub modes: Vec<(i64, Complex64)>,
}

impl FourierSeries {
    pub fn new(modes: Vec<(i64, Complex64)>) -> Result<Self> {
        if modes.iter().any(|&(k, _)| k == 0) {
            return Err(SiegelError::Domain(
                "φ must have zero mean: mode k = 0 is not allowed".into(),
            ));
        }
        Ok(Self { modes })
    }

    /// Evaluates `φ(u)`.
    pub fn eval(&self, u: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|&(k, c)| c * unit_phase(frac(2.0 * k as f64 * u)))
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    }
}

/// φ-sum `Σ_{n ∈ [0,N]^g} φ(t + l(n) + ½ Q[n])` by mode-wise reduction to
/// theta sums with data `(kQ, 2k l)`.
pub fn pretheta_sum(phi: &FourierSeries, data: &QuadraticData, n: u64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(k, c) in &phi.modes {
        let mode_data = data.mode(k);
        let theta = theta_raw(&mode_data, n);
        acc += c * unit_phase(frac(2.0 * k as f64 * data.t)) * theta;
    }
    acc
}

/// Direct evaluation of the φ-sum; O(N^g) trig calls. Test oracle.
pub fn pretheta_direct(phi: &FourierSeries, data: &QuadraticData, n: u64) -> Complex64 {
    let g = data.genus();
    let mut acc = KahanComplex::new();
    let mut idx = vec![0i64; g];
    loop {
        let mut u = data.t;
        let mut qn = 0.0;
        for i in 0..g {
            let mut row = 0.0;
            for j in 0..g {
                row += data.q[(i, j)] * idx[j] as f64;
            }
            qn += idx[i] as f64 * row;
            u += data.l[i] * idx[i] as f64;
        }
        u += 0.5 * qn;
        acc.add(phi.eval(u));
        if !advance_box(&mut idx, n as i64, n as i64) {
            return acc.value();
        }
    }
}

/// Statistic used by the growth fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthStatistic {
    /// Running maxima of `|raw|`; recommended for bound-type claims.
    RunningMax,
    Direct,
}

/// Least-squares fit of `log(statistic of |raw|)` against `log N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub window: (u64, u64),
    pub statistic: GrowthStatistic,
}

pub fn growth_fit(
    result: &SumResult,
    statistic: GrowthStatistic,
    window: Option<(u64, u64)>,
) -> Result<GrowthFit> {
    let cps = &result.checkpoints;
    let window = window.unwrap_or_else(|| (cps.first().unwrap().n, cps.last().unwrap().n));
    if window.0 < cps.first().unwrap().n || window.1 > cps.last().unwrap().n {
        return Err(SiegelError::Fit("window outside the checkpoint range".into()));
    }

    let mut values = Vec::new();
    let mut running: f64 = 0.0;
    for c in cps {
        let v = c.raw().norm();
        running = running.max(v);
        let stat = match statistic {
            GrowthStatistic::RunningMax => running,
            GrowthStatistic::Direct => v,
        };
        if c.n >= window.0 && c.n <= window.1 {
            values.push((c.n, stat));
        }
    }
    if values.len() < 8 {
        return Err(SiegelError::Fit(format!(
            "need >= 8 checkpoints in the window, got {}",
            values.len()
        )));
    }
    let span = values.last().unwrap().0 as f64 / values.first().unwrap().0 as f64;
    if span < 100.0 {
        return Err(SiegelError::Fit(format!(
            "window must span >= 2 decades, got factor {span:.1}"
        )));
    }
    if values.iter().all(|&(_, v)| v == 0.0) {
        return Err(SiegelError::Fit("all partial sums vanish".into()));
    }

    let pts: Vec<(f64, f64)> = values
        .iter()
        .filter(|&&(_, v)| v > 0.0)
        .map(|&(n, v)| ((n as f64).ln(), v.ln()))
        .collect();
    let nf = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = nf * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(SiegelError::Fit("degenerate abscissae".into()));
    }
    let slope = (nf * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / nf;
    let rss: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(GrowthFit {
        slope,
        intercept,
        residual: (rss / nf).sqrt(),
        window,
        statistic,
    })
}

/// Predicted growth exponents for the normalized sum `Θ = N^{−g/2}·raw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedExponent {
    /// Power of `N`.
    pub power: f64,
    /// True when the power holds for every ε > 0 (reported as its infimum).
    pub power_is_epsilon: bool,
    /// Exponent of `log N`, when the prediction is logarithmic.
    pub log_power: Option<f64>,
}

/// Maps a Diophantine class to the predicted exponent of the normalized
/// theta sum. The almost-sure logarithm-law target is exposed through the
/// `Roth`-with-log reading: callers wanting it pass `log_law = true`.
pub fn predicted_exponent(
    report: &DiophantineReport,
    g: usize,
    log_law: bool,
) -> Result<PredictedExponent> {
    if log_law {
        return Ok(PredictedExponent {
            power: 0.0,
            power_is_epsilon: false,
            log_power: Some(g as f64 + 1.0 / (2.0 * g as f64 + 2.0)),
        });
    }
    match report.class {
        DiophantineClass::BoundedType => Ok(PredictedExponent {
            power: 0.0,
            power_is_epsilon: false,
            log_power: None,
        }),
        DiophantineClass::Roth => Ok(PredictedExponent {
            power: 0.0,
            power_is_epsilon: true,
            log_power: None,
        }),
        DiophantineClass::DiophantineType(sigma) => Ok(PredictedExponent {
            // g(1 − σ'/2) − g/2 for σ' < σ, reported at its infimum σ' = σ
            power: g as f64 * (1.0 - sigma) / 2.0,
            power_is_epsilon: true,
            log_power: None,
        }),
        // resonant orbits saturate the trivial rate |raw| ~ N^g
        DiophantineClass::Resonant => Ok(PredictedExponent {
            power: g as f64 / 2.0,
            power_is_epsilon: false,
            log_power: None,
        }),
        DiophantineClass::Unclassified => {
            Err(SiegelError::NoPrediction("Unclassified".into()))
        }
    }
}

/// Prefix supremum of the normalized sum, reported at checkpoints.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SupCheckpoint {
    pub n: u64,
    /// `max_{1 ≤ N' ≤ n} N'^{−g/2} |S(N')|` over nested cubes.
    pub sup_normalized: f64,
}

/// Tracks the running supremum of `N^{−g/2}|S(N)|` over every nested cube
/// `[0, N]^g`, `N ≤ max(checkpoints)`; the bounded-type surrogate statistic.
///
/// Sequential by construction (each prefix needs all earlier shells).
pub fn theta_running_sup(
    data: &QuadraticData,
    checkpoints: &[u64],
) -> Result<Vec<SupCheckpoint>> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SiegelError::Domain(
            "checkpoints must be non-empty and strictly increasing".into(),
        ));
    }
    let g = data.genus();
    let n_max = *checkpoints.last().unwrap();
    let mut acc = KahanComplex::new();
    let mut sup: f64 = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0usize;
    for n in 0..=n_max {
        shell_sum(data, n, &mut acc);
        if n >= 1 {
            let norm = acc.value().norm() * (n as f64).powf(-(g as f64) / 2.0);
            sup = sup.max(norm);
        }
        if next_cp < checkpoints.len() && checkpoints[next_cp] == n {
            out.push(SupCheckpoint {
                n,
                sup_normalized: sup,
            });
            next_cp += 1;
        }
    }
    Ok(out)
}

/// Adds the shell `[0,n]^g \ [0,n−1]^g` to the accumulator. The shell is
/// decomposed into disjoint boxes by the first axis pinned at `n`.
fn shell_sum(data: &QuadraticData, n: u64, acc: &mut KahanComplex) {
    let g = data.genus();
    let n = n as i64;
    if g == 1 {
        acc.add(unit_phase(phase_mod_1(data, &[n])));
        return;
    }
    for pin in 0..g {
        // axes before `pin` range over [0, n-1], axes after over [0, n]
        if n == 0 && pin > 0 {
            break;
        }
        let mut idx = vec![0i64; g];
        idx[pin] = n;
        loop {
            acc.add(unit_phase(phase_mod_1(data, &idx)));
            // odometer skipping the pinned axis
            let mut advanced = false;
            for axis in (0..g).rev() {
                if axis == pin {
                    continue;
                }
                let limit = if axis < pin { n - 1 } else { n };
                if idx[axis] < limit {
                    idx[axis] += 1;
                    for (v, a) in idx.iter_mut().zip(0..g).skip(axis + 1) {
                        if a != pin {
                            *v = 0;
                        }
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
}

/// Naive per-term evaluation; the correctness oracle for `theta_raw`.
pub fn theta_naive(data: &QuadraticData, n: u64) -> Complex64 {
    let g = data.genus();
    let mut acc = KahanComplex::new();
    let mut idx = vec![0i64; g];
    loop {
        acc.add(unit_phase(phase_mod_1(data, &idx)));
        if !advance_box(&mut idx, n as i64, n as i64) {
            return acc.value();
        }
    }
}

#[cfg(test)]
mod tests;
