//! Height trajectories along Cartan flows, Diophantine classification, and
//! the logarithm-law Monte-Carlo experiment.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::symplectic::{BlockSymplectic, CartanDirection};
use crate::threads;
use crate::{Result, SiegelError};

use super::exact::{g1_flow_log_height, is_small_rational, Rational128};
use super::{hgt, ReduceOptions};

/// Sampled `log Hgt` along a Cartan flow.
#[derive(Debug, Clone)]
pub struct HeightTrajectory {
    pub alpha: BlockSymplectic,
    pub dhat: CartanDirection,
    /// `(t, log Hgt(e^{−tδ̂} α))`, with `t` strictly increasing.
    pub samples: Vec<(f64, f64)>,
}

impl HeightTrajectory {
    /// Largest violation of the trivial bound
    /// `log Hgt(t) ≤ 2t Σδ + log Hgt(0)`; negative when the bound holds.
    pub fn trivial_bound_defect(&self) -> f64 {
        let log0 = self.samples.first().map(|&(_, v)| v).unwrap_or(0.0);
        let rate = 2.0 * self.dhat.weight_sum();
        self.samples
            .iter()
            .map(|&(t, v)| v - (rate * t + log0))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Diophantine growth class of a flow trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "sigma")]
pub enum DiophantineClass {
    BoundedType,
    Roth,
    DiophantineType(f64),
    Resonant,
    Unclassified,
}

/// Classification outcome with its fit diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiophantineReport {
    #[serde(flatten)]
    pub class: DiophantineClass,
    pub sup_log_hgt: f64,
    #[serde(rename = "slope")]
    pub fitted_slope: f64,
    #[serde(rename = "window")]
    pub fit_window: (f64, f64),
    /// RMS residual of the running-maximum linear fit.
    pub residual: f64,
}

/// Finite-horizon surrogates for the asymptotic definitions.
#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// Bounded-type threshold above `log Hgt(0)`.
    pub bounded_margin: f64,
    /// Slope below which the trajectory counts as Roth.
    pub eps_roth: f64,
    /// RMS residual above which the fit is rejected.
    pub residual_bound: f64,
    /// Denominator cutoff for the exact `g = 1` resonance override.
    pub rational_cutoff: i128,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            bounded_margin: 50f64.ln(),
            eps_roth: 0.1,
            residual_bound: 1.0,
            rational_cutoff: 1_000_000,
        }
    }
}

/// Samples `log Hgt(e^{−tδ̂} α)` on the given grid.
///
/// For `g = 1`, lower-triangular `α = [[a, 0], [c, a⁻¹]]` and a single-weight
/// direction, the exact lattice path is used, which stays accurate for
/// arbitrarily deep excursions; the generic matrix path is reliable for
/// `t · max δ ≲ 12`.
pub fn height_flow(
    alpha: &BlockSymplectic,
    dhat: &CartanDirection,
    t_grid: &[f64],
    opts: &ReduceOptions,
) -> Result<HeightTrajectory> {
    if t_grid.is_empty() {
        return Err(SiegelError::Domain("empty t grid".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SiegelError::Domain("t grid must be increasing".into()));
    }
    if let Some(q) = g1_exact_parameter(alpha) {
        if dhat.genus() == 1 {
            let w = dhat.weights()[0];
            let samples = t_grid
                .iter()
                .map(|&t| Ok((t, g1_flow_log_height(&q, w * t)?)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(HeightTrajectory {
                alpha: alpha.clone(),
                dhat: dhat.clone(),
                samples,
            });
        }
    }
    let samples = t_grid
        .iter()
        .map(|&t| {
            let flowed = alpha.flow_left(dhat, -t);
            let (h, _) = hgt(&flowed, opts)?;
            Ok((t, h.ln()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HeightTrajectory {
        alpha: alpha.clone(),
        dhat: dhat.clone(),
        samples,
    })
}

/// Exact `g = 1` trajectory for `α = [[1, 0], [q, 1]]` with `q` rational.
pub fn height_flow_g1_exact(q: &Rational128, t_grid: &[f64]) -> Result<HeightTrajectory> {
    let alpha =
        BlockSymplectic::lower_unipotent(&DMatrix::from_element(1, 1, q.to_f64()))?;
    let dhat = CartanDirection::new(vec![1.0])?;
    let samples = t_grid
        .iter()
        .map(|&t| Ok((t, g1_flow_log_height(q, t)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HeightTrajectory {
        alpha,
        dhat,
        samples,
    })
}

/// Recognizes `g = 1` matrices `[[1, 0], [q, 1]]` (the exact-path family).
fn g1_exact_parameter(alpha: &BlockSymplectic) -> Option<Rational128> {
    if alpha.genus() != 1 {
        return None;
    }
    let (a, b, c, d) = (
        alpha.block_a()[(0, 0)],
        alpha.block_b()[(0, 0)],
        alpha.block_c()[(0, 0)],
        alpha.block_d()[(0, 0)],
    );
    if a == 1.0 && d == 1.0 && b == 0.0 {
        Rational128::from_f64_exact(c).ok()
    } else {
        None
    }
}

/// Classifies the Diophantine type of a trajectory for the direction
/// `δ̂(d)` with `d` unit weights.
///
/// Order of decision: exact `g = 1` resonance override, bounded-type sup
/// test, fit-quality gate, then envelope-slope classes.
pub fn classify_diophantine(
    traj: &HeightTrajectory,
    d: usize,
    opts: &ClassifyOptions,
) -> Result<DiophantineReport> {
    let t_max = traj.samples.last().map(|&(t, _)| t).unwrap_or(0.0);
    if t_max < 10.0 || traj.samples.len() < 100 {
        return Err(SiegelError::Window(format!(
            "need t_max >= 10 and >= 100 samples, got t_max = {t_max}, n = {}",
            traj.samples.len()
        )));
    }
    let sup = traj
        .samples
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let log0 = traj.samples[0].1;

    // running maxima
    let mut run_max = Vec::with_capacity(traj.samples.len());
    let mut m = f64::NEG_INFINITY;
    for &(t, v) in &traj.samples {
        m = m.max(v);
        run_max.push((t, m));
    }
    let window = (t_max / 2.0, t_max);
    let fit: Vec<(f64, f64)> = run_max
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0)
        .collect();
    let (slope, residual) = least_squares(&fit)?;

    let mut report = DiophantineReport {
        class: DiophantineClass::Unclassified,
        sup_log_hgt: sup,
        fitted_slope: slope,
        fit_window: window,
        residual,
    };

    // exact resonance override for g = 1
    if let Some(q) = g1_exact_parameter(&traj.alpha) {
        if is_small_rational(&q, opts.rational_cutoff, 1e-12) {
            report.class = DiophantineClass::Resonant;
            return Ok(report);
        }
    }

    if sup <= log0 + opts.bounded_margin {
        report.class = DiophantineClass::BoundedType;
    } else if residual > opts.residual_bound {
        report.class = DiophantineClass::Unclassified;
    } else if slope >= 2.0 * d as f64 - opts.eps_roth {
        report.class = DiophantineClass::Resonant;
    } else if slope < opts.eps_roth {
        report.class = DiophantineClass::Roth;
    } else {
        let sigma = 1.0 - slope / (2.0 * d as f64);
        report.class = DiophantineClass::DiophantineType(sigma);
    }
    Ok(report)
}

fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len();
    if n < 2 {
        return Err(SiegelError::Window("fit window has < 2 points".into()));
    }
    let nf = n as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = nf * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(SiegelError::Window("degenerate fit abscissae".into()));
    }
    let slope = (nf * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / nf;
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok((slope, (rss / nf).sqrt()))
}

/// Product `Π (δ_i + δ_i⁻¹)` of a positive diagonal symplectic element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DalethValue(pub f64);

pub fn daleth(delta: &[f64]) -> Result<DalethValue> {
    if delta.iter().any(|&d| !(d > 0.0)) {
        return Err(SiegelError::Domain(
            "daleth requires strictly positive diagonal entries".into(),
        ));
    }
    Ok(DalethValue(delta.iter().map(|&d| d + 1.0 / d).product()))
}

/// Monte-Carlo summary of the logarithm-law statistic
/// `max_t log Hgt(e^{−tδ̂}α) / log t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogLawSummary {
    pub per_sample: Vec<f64>,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Runs the logarithm-law experiment: samples `α = [[I, 0], [Q, I]]` with
/// `Q` symmetric, entries i.i.d. uniform on `[0, 1)`, and reports the
/// per-sample maxima of `log Hgt(t) / log t` on a grid `t ∈ [e, t_max]`.
///
/// Per-sample seeds are derived by a counter scheme (ChaCha streams), so the
/// output is independent of thread count and deterministic given `seed`.
pub fn loglaw_mc(
    g: usize,
    dhat: &CartanDirection,
    n_samples: usize,
    t_max: f64,
    seed: u64,
) -> Result<LogLawSummary> {
    if n_samples == 0 {
        return Err(SiegelError::Domain("need at least one sample".into()));
    }
    if dhat.genus() != g {
        return Err(SiegelError::Dimension("direction genus mismatch".into()));
    }
    let grid = statistic_grid(t_max);
    let idx: Vec<usize> = (0..n_samples).collect();
    let stats: Vec<Result<f64>> = threads::par_map(idx, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let q = sample_symmetric_unit(&mut rng, g);
        sample_statistic(&q, dhat, &grid)
    });
    let mut per_sample = Vec::with_capacity(n_samples);
    for s in stats {
        per_sample.push(s?);
    }
    let mut sorted = per_sample.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(LogLawSummary {
        median: quantile_sorted(&sorted, 0.5),
        q25: quantile_sorted(&sorted, 0.25),
        q75: quantile_sorted(&sorted, 0.75),
        per_sample,
    })
}

/// Grid for the log-law statistic: `[e, t_max]` in steps of 1/4, with the
/// endpoint always included.
pub(crate) fn statistic_grid(t_max: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut t = std::f64::consts::E;
    while t < t_max {
        grid.push(t);
        t += 0.25;
    }
    grid.push(t_max);
    grid
}

fn sample_symmetric_unit(rng: &mut impl Rng, g: usize) -> DMatrix<f64> {
    let mut q = DMatrix::<f64>::zeros(g, g);
    for i in 0..g {
        for j in i..g {
            let v: f64 = rng.gen_range(0.0..1.0);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    q
}

fn sample_statistic(q: &DMatrix<f64>, dhat: &CartanDirection, grid: &[f64]) -> Result<f64> {
    let g = q.nrows();
    let mut best = f64::NEG_INFINITY;
    if g == 1 && dhat.weights() == [1.0] {
        let qr = Rational128::from_f64_exact(q[(0, 0)])?;
        for &t in grid {
            let lh = g1_flow_log_height(&qr, t)?;
            best = best.max(lh / t.ln());
        }
    } else {
        let alpha = BlockSymplectic::lower_unipotent(q)?;
        let opts = ReduceOptions::default();
        for &t in grid {
            let flowed = alpha.flow_left(dhat, -t);
            let (h, _) = hgt(&flowed, &opts)?;
            best = best.max(h.ln() / t.ln());
        }
    }
    Ok(best)
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}
