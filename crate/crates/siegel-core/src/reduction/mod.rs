//! Reduction to the Siegel fundamental domain, the modular height `Hgt`,
//! Cartan renormalization flows, Diophantine classification, and the
//! logarithm-law Monte-Carlo experiment.

use nalgebra::DMatrix;

use crate::symplectic::{
    height_raw, iwasawa, mobius, BlockSymplectic, IntegerSymplectic, SiegelPoint,
};
use crate::{Result, SiegelError};

pub mod exact;
mod flow;
mod lll;

pub use exact::{g1_flow_log_height, is_small_rational, Rational128};
pub use flow::{
    classify_diophantine, daleth, height_flow, height_flow_g1_exact, loglaw_mc, ClassifyOptions,
    DalethValue, DiophantineClass, DiophantineReport, HeightTrajectory, LogLawSummary,
};
pub use lll::lll_reduce_gram;

/// Result of reducing a point towards the fundamental domain.
#[derive(Debug, Clone)]
pub struct ReducedPoint {
    /// Reduced representative.
    pub z: SiegelPoint,
    /// Integer symplectic element with `mobius(gamma, input) = z`.
    pub gamma: IntegerSymplectic,
    /// Whether the `S_g(2)` membership conditions were verified.
    pub certified: bool,
}

/// Options for `reduce_siegel`.
#[derive(Debug, Clone)]
pub struct ReduceOptions {
    /// Relative improvement a move must achieve to be accepted.
    pub tol: f64,
    /// Iteration cap for the greedy ascent.
    pub max_iter: usize,
    /// Depth of the generator-word polish pass applied at greedy fixed
    /// points (0 disables it).
    pub generator_depth: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 500,
            generator_depth: 2,
        }
    }
}

/// Classical Gauss reduction to `{|Re z| ≤ 1/2, |z| ≥ 1}` for `g = 1`.
pub fn reduce_g1(z: &SiegelPoint) -> Result<ReducedPoint> {
    if z.genus() != 1 {
        return Err(SiegelError::Dimension("reduce_g1 requires g = 1".into()));
    }
    let tol = 1e-12;
    let mut x = z.re()[(0, 0)];
    let mut y = z.im()[(0, 0)];
    // gamma acts on the left: [[a, b], [c, d]]
    let (mut a, mut b, mut c, mut d): (i64, i64, i64, i64) = (1, 0, 0, 1);
    for _ in 0..10_000 {
        let n = x.round();
        if n != 0.0 {
            // z -> z - n, gamma -> [[1, -n], [0, 1]] * gamma
            x -= n;
            let ni = n as i64;
            a -= ni * c;
            b -= ni * d;
        }
        let r2 = x * x + y * y;
        if r2 < 1.0 - tol {
            // z -> -1/z, gamma -> [[0, -1], [1, 0]] * gamma
            let nx = -x / r2;
            let ny = y / r2;
            x = nx;
            y = ny;
            let (na, nb) = (-c, -d);
            let (nc, nd) = (a, b);
            (a, b, c, d) = (na, nb, nc, nd);
        } else {
            let gamma = IntegerSymplectic::new(
                DMatrix::from_element(1, 1, a),
                DMatrix::from_element(1, 1, b),
                DMatrix::from_element(1, 1, c),
                DMatrix::from_element(1, 1, d),
            )?;
            let zr = SiegelPoint::new(
                DMatrix::from_element(1, 1, x),
                DMatrix::from_element(1, 1, y),
            )?;
            return Ok(ReducedPoint {
                z: zr,
                gamma,
                certified: true,
            });
        }
    }
    Err(SiegelError::NonTermination {
        max_iter: 10_000,
        best_log_height: y.ln(),
    })
}

/// Integer generator moves for the greedy ascent: partial inversions `J_k`
/// and the full inversion.
fn generator_set(g: usize) -> Vec<IntegerSymplectic> {
    let mut gens = Vec::new();
    for k in 0..g {
        let mut a = DMatrix::<i64>::identity(g, g);
        a[(k, k)] = 0;
        let d = a.clone();
        let mut b = DMatrix::<i64>::zeros(g, g);
        b[(k, k)] = -1;
        let mut c = DMatrix::<i64>::zeros(g, g);
        c[(k, k)] = 1;
        gens.push(IntegerSymplectic::new(a, b, c, d).expect("J_k is symplectic"));
    }
    if g > 1 {
        let a = DMatrix::<i64>::zeros(g, g);
        let b = -DMatrix::<i64>::identity(g, g);
        let c = DMatrix::<i64>::identity(g, g);
        let d = DMatrix::<i64>::zeros(g, g);
        gens.push(IntegerSymplectic::new(a, b, c, d).expect("J is symplectic"));
    }
    gens
}

fn translation(n: &DMatrix<i64>) -> IntegerSymplectic {
    let g = n.nrows();
    IntegerSymplectic::new(
        DMatrix::identity(g, g),
        n.clone(),
        DMatrix::zeros(g, g),
        DMatrix::identity(g, g),
    )
    .expect("integer translation is symplectic")
}

fn gl_block(u: &DMatrix<i64>, uinv: &DMatrix<i64>) -> IntegerSymplectic {
    let g = u.nrows();
    IntegerSymplectic::new(
        u.transpose(),
        DMatrix::zeros(g, g),
        DMatrix::zeros(g, g),
        uinv.clone(),
    )
    .expect("GL block is symplectic")
}

/// Nearest-integer symmetric translation normalizing `X`, if any.
fn integer_translation_for(z: &SiegelPoint) -> Option<IntegerSymplectic> {
    let g = z.genus();
    let n = DMatrix::from_fn(g, g, |i, j| -(z.re()[(i, j)].round()) as i64);
    if n.iter().all(|&v| v == 0) {
        None
    } else {
        Some(translation(&n))
    }
}

/// Greedy generator ascent to the Siegel fundamental open set.
///
/// Moves: nearest-integer translations of `X`, unimodular congruence moves
/// from LLL reduction of `Y`, and block inversions accepted when they grow
/// `det Im` by more than `1 + tol`. At a fixed point a generator-word search
/// of configurable depth tries to escape local maxima. For `g = 1` the
/// scheme is exactly Gauss reduction.
pub fn reduce_siegel(z0: &SiegelPoint, opts: &ReduceOptions) -> Result<ReducedPoint> {
    let g = z0.genus();
    let gens = generator_set(g);
    let mut gamma = IntegerSymplectic::identity(g);
    let mut z = z0.clone();
    let mut best = height_raw(&z);

    let mut iter = 0usize;
    loop {
        if iter >= opts.max_iter {
            return Err(SiegelError::NonTermination {
                max_iter: opts.max_iter,
                best_log_height: best.ln(),
            });
        }
        iter += 1;
        let mut moved = false;

        // LLL-normalize Y (height neutral, exposes profitable inversions)
        if g > 1 {
            let (u, uinv) = lll_reduce_gram(z.im());
            if u != DMatrix::<i64>::identity(g, g) {
                let m = gl_block(&u, &uinv);
                z = mobius(&m.to_real(), &z)?;
                gamma = m.compose(&gamma);
                moved = true;
            }
        }
        if let Some(tr) = integer_translation_for(&z) {
            z = mobius(&tr.to_real(), &z)?;
            gamma = tr.compose(&gamma);
            moved = true;
        }

        let mut best_move: Option<(usize, f64)> = None;
        for (i, m) in gens.iter().enumerate() {
            if let Ok(cand) = mobius(&m.to_real(), &z) {
                let h = height_raw(&cand);
                if h > best * (1.0 + opts.tol) && best_move.map_or(true, |(_, bh)| h > bh) {
                    best_move = Some((i, h));
                }
            }
        }
        if let Some((i, h)) = best_move {
            z = mobius(&gens[i].to_real(), &z)?;
            gamma = gens[i].compose(&gamma);
            best = h;
            continue;
        }
        if moved {
            continue;
        }

        if opts.generator_depth > 0 && g > 1 {
            if let Some((word, h)) = polish_search(&z, best, opts) {
                z = mobius(&word.to_real(), &z)?;
                gamma = word.compose(&gamma);
                best = h;
                continue;
            }
        }
        break;
    }

    // recompute the representative from the exact integer word
    let z_final = mobius(&gamma.to_real(), z0)?;
    let certified = g <= 3 && in_fundamental_open_set(&z_final, 2.0)?;
    Ok(ReducedPoint {
        z: z_final,
        gamma,
        certified,
    })
}

/// Breadth-first search over short generator words (inversions and unit
/// translations); returns the first word improving on `current`.
fn polish_search(
    z: &SiegelPoint,
    current: f64,
    opts: &ReduceOptions,
) -> Option<(IntegerSymplectic, f64)> {
    let g = z.genus();
    let moves = polish_moves(g);
    let mut frontier: Vec<(IntegerSymplectic, SiegelPoint)> =
        vec![(IntegerSymplectic::identity(g), z.clone())];
    for _ in 0..opts.generator_depth {
        let mut next = Vec::new();
        for (word, pt) in &frontier {
            for m in &moves {
                if let Ok(cand) = mobius(&m.to_real(), pt) {
                    let h = height_raw(&cand);
                    let w = m.compose(word);
                    if h > current * (1.0 + opts.tol) {
                        return Some((w, h));
                    }
                    next.push((w, cand));
                }
            }
        }
        frontier = next;
    }
    None
}

fn polish_moves(g: usize) -> Vec<IntegerSymplectic> {
    let mut moves = generator_set(g);
    for i in 0..g {
        for j in i..g {
            for sign in [1i64, -1] {
                let mut n = DMatrix::<i64>::zeros(g, g);
                n[(i, j)] = sign;
                n[(j, i)] = sign;
                moves.push(translation(&n));
            }
        }
    }
    moves
}

/// Checks the fundamental-open-set conditions `S_g(t)`:
/// `|x_ij| < t`, `|w_ij| < t`, `1 < t δ_1` and `δ_k < t δ_{k+1}`.
pub fn in_fundamental_open_set(z: &SiegelPoint, t: f64) -> Result<bool> {
    let iw = iwasawa(z)?;
    let g = z.genus();
    for i in 0..g {
        for j in 0..g {
            if iw.x[(i, j)].abs() >= t {
                return Ok(false);
            }
            if j > i && iw.w[(i, j)].abs() >= t {
                return Ok(false);
            }
        }
    }
    if t * iw.d[0] <= 1.0 {
        return Ok(false);
    }
    for k in 0..g.saturating_sub(1) {
        if iw.d[k] >= t * iw.d[k + 1] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Modular height of `α`: the maximum of `det Im` over the integer-symplectic
/// orbit of `α⁻¹(i·I_g)`.
pub fn hgt(alpha: &BlockSymplectic, opts: &ReduceOptions) -> Result<(f64, bool)> {
    let g = alpha.genus();
    let p = mobius(&alpha.inverse(), &SiegelPoint::base(g))?;
    let red = if g == 1 {
        reduce_g1(&p)?
    } else {
        reduce_siegel(&p, opts)?
    };
    Ok((height_raw(&red.z), red.certified))
}

/// Enumerates distinct `SL2(Z)` elements of word length at most `depth` in
/// `{S, T, T⁻¹}`; oracle material for `g = 1` reduction tests.
pub fn sl2_word_ball(depth: usize) -> Vec<[[i64; 2]; 2]> {
    use std::collections::HashSet;
    let s: [[i64; 2]; 2] = [[0, -1], [1, 0]];
    let t: [[i64; 2]; 2] = [[1, 1], [0, 1]];
    let tinv: [[i64; 2]; 2] = [[1, -1], [0, 1]];
    let mul = |a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]| {
        [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ]
    };
    let mut seen: HashSet<[[i64; 2]; 2]> = HashSet::new();
    let mut out = vec![[[1, 0], [0, 1]]];
    seen.insert(out[0]);
    let mut frontier = out.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for m in &frontier {
            for gen in [&s, &t, &tinv] {
                let p = mul(gen, m);
                if seen.insert(p) {
                    next.push(p);
                    out.push(p);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Brute-force `max det Im` over an `SL2(Z)` word ball.
pub fn g1_brute_force_height(z: &SiegelPoint, ball: &[[[i64; 2]; 2]]) -> f64 {
    let x = z.re()[(0, 0)];
    let y = z.im()[(0, 0)];
    let mut best = f64::NEG_INFINITY;
    for m in ball {
        let c = m[1][0] as f64;
        let d = m[1][1] as f64;
        let denom = (c * x + d) * (c * x + d) + c * c * y * y;
        best = best.max(y / denom);
    }
    best
}

/// Brute-force generator-word search over Möbius moves for small genus;
/// returns the best `det Im` within the given depth. Test-time oracle.
pub fn brute_force_height(z: &SiegelPoint, depth: usize) -> Result<f64> {
    let g = z.genus();
    let moves = polish_moves(g);
    let mut best = height_raw(z);
    let mut frontier = vec![z.clone()];
    let key = |p: &SiegelPoint| -> Vec<i64> {
        let mut k = Vec::new();
        for i in 0..g {
            for j in 0..g {
                k.push((p.re()[(i, j)] * 1e9).round() as i64);
                k.push((p.im()[(i, j)] * 1e9).round() as i64);
            }
        }
        k
    };
    let mut seen = std::collections::HashSet::new();
    seen.insert(key(z));
    for _ in 0..depth {
        let mut next = Vec::new();
        for pt in &frontier {
            for m in &moves {
                if let Ok(cand) = mobius(&m.to_real(), pt) {
                    if seen.insert(key(&cand)) {
                        best = best.max(height_raw(&cand));
                        next.push(cand);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(best)
}
