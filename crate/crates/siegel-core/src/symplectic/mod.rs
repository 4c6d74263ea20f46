//! Symplectic linear algebra on the Siegel upper half-space: block matrices,
//! the generalized Möbius action, Iwasawa coordinates, Cartan flows and the
//! raw height `det Im Z`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Result, SiegelError};

mod serde_io;
pub use serde_io::{matrix_from_rows, matrix_to_rows};

/// Condition-number cutoff past which `CZ + D` is declared singular.
pub const COCYCLE_COND_CUTOFF: f64 = 1e12;

/// A real symplectic matrix in `(A, B, C, D)` block form.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSymplectic {
    g: usize,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

/// A symplectic matrix with integer entries; the relations hold exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerSymplectic {
    g: usize,
    a: DMatrix<i64>,
    b: DMatrix<i64>,
    c: DMatrix<i64>,
    d: DMatrix<i64>,
}

/// A point `Z = X + iY` of the Siegel upper half-space (`Y` positive definite).
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

/// The unique factorization `Z = X + i WᵀDW` with `W` unit upper triangular
/// and `D` positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct IwasawaCoordinates {
    pub x: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub d: DVector<f64>,
}

/// Non-negative weights of a one-parameter Cartan flow direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanDirection {
    delta: Vec<f64>,
}

impl CartanDirection {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(SiegelError::Domain(
                "Cartan weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self { delta })
    }

    /// The direction with `d` leading unit weights out of `g`.
    pub fn leading_ones(d: usize, g: usize) -> Self {
        let mut delta = vec![0.0; g];
        for w in delta.iter_mut().take(d) {
            *w = 1.0;
        }
        Self { delta }
    }

    pub fn weights(&self) -> &[f64] {
        &self.delta
    }

    pub fn genus(&self) -> usize {
        self.delta.len()
    }

    pub fn weight_sum(&self) -> f64 {
        self.delta.iter().sum()
    }
}

/// Max-norm residual of the three block relations defining `Sp(2g, R)`.
///
/// `AᵀC` and `BᵀD` must be symmetric and `AᵀD − CᵀB = I`. The caller decides
/// the threshold.
pub fn verify_symplectic(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(SiegelError::Dimension(format!(
            "expected a square matrix of even dimension, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let g = m.nrows() / 2;
    let a = m.view((0, 0), (g, g));
    let b = m.view((0, g), (g, g));
    let c = m.view((g, 0), (g, g));
    let d = m.view((g, g), (g, g));

    let atc = a.transpose() * c;
    let btd = b.transpose() * d;
    let atd_ctb = a.transpose() * d - c.transpose() * b;

    let r1 = (&atc - atc.transpose()).amax();
    let r2 = (&btd - btd.transpose()).amax();
    let r3 = (atd_ctb - DMatrix::<f64>::identity(g, g)).amax();
    Ok(r1.max(r2).max(r3))
}

impl BlockSymplectic {
    /// Builds from blocks, checking the symplectic relations to `1e-10` and
    /// the unit determinant to `1e-8`.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self> {
        let g = a.nrows();
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if m.nrows() != g || m.ncols() != g {
                return Err(SiegelError::Dimension(format!(
                    "block {name} must be {g}x{g}"
                )));
            }
        }
        let full = assemble(&a, &b, &c, &d);
        let res = verify_symplectic(&full)?;
        if res > 1e-10 {
            return Err(SiegelError::Domain(format!(
                "symplectic relation residual {res:.3e} exceeds 1e-10"
            )));
        }
        let det = full.determinant();
        if (det - 1.0).abs() > 1e-8 {
            return Err(SiegelError::Domain(format!(
                "determinant {det} differs from 1 beyond 1e-8"
            )));
        }
        Ok(Self { g, a, b, c, d })
    }

    /// Builds from a full `2g x 2g` matrix.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
            return Err(SiegelError::Dimension("expected even square matrix".into()));
        }
        let g = m.nrows() / 2;
        Self::new(
            m.view((0, 0), (g, g)).into(),
            m.view((0, g), (g, g)).into(),
            m.view((g, 0), (g, g)).into(),
            m.view((g, g), (g, g)).into(),
        )
    }

    pub fn identity(g: usize) -> Self {
        Self {
            g,
            a: DMatrix::identity(g, g),
            b: DMatrix::zeros(g, g),
            c: DMatrix::zeros(g, g),
            d: DMatrix::identity(g, g),
        }
    }

    /// `[[I, 0], [Q, I]]` for symmetric `Q`; the automorphism attached to a
    /// quadratic form.
    pub fn lower_unipotent(q: &DMatrix<f64>) -> Result<Self> {
        let g = q.nrows();
        if q.ncols() != g {
            return Err(SiegelError::Dimension("Q must be square".into()));
        }
        if (q - q.transpose()).amax() > 1e-12 * (1.0 + q.amax()) {
            return Err(SiegelError::Domain("Q must be symmetric".into()));
        }
        Self::new(
            DMatrix::identity(g, g),
            DMatrix::zeros(g, g),
            q.clone(),
            DMatrix::identity(g, g),
        )
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn block_a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn block_b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn block_c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn block_d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assemble(&self.a, &self.b, &self.c, &self.d)
    }

    /// Exact block formula for the symplectic inverse:
    /// `α⁻¹ = [[Dᵀ, −Bᵀ], [−Cᵀ, Aᵀ]]`.
    pub fn inverse(&self) -> Self {
        Self {
            g: self.g,
            a: self.d.transpose(),
            b: -self.b.transpose(),
            c: -self.c.transpose(),
            d: self.a.transpose(),
        }
    }

    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.g != rhs.g {
            return Err(SiegelError::Dimension("genus mismatch in composition".into()));
        }
        Self::from_matrix(&(self.to_matrix() * rhs.to_matrix()))
    }

    /// Left multiplication by the Cartan flow, `cartan_matrix(δ̂, t) · self`,
    /// computed by exact row scaling.
    ///
    /// Skips the constructor residual checks: they hold structurally here but
    /// the `det = 1` float test degrades at large `|t|` where entries span
    /// `e^{±tδ}`.
    pub fn flow_left(&self, dhat: &CartanDirection, t: f64) -> Self {
        let w = dhat.weights();
        let scale_rows = |m: &DMatrix<f64>, sign: f64| {
            let mut out = m.clone();
            for i in 0..self.g {
                let f = (sign * t * w[i]).exp();
                for j in 0..self.g {
                    out[(i, j)] *= f;
                }
            }
            out
        };
        Self {
            g: self.g,
            a: scale_rows(&self.a, 1.0),
            b: scale_rows(&self.b, 1.0),
            c: scale_rows(&self.c, -1.0),
            d: scale_rows(&self.d, -1.0),
        }
    }
}

impl IntegerSymplectic {
    pub fn new(
        a: DMatrix<i64>,
        b: DMatrix<i64>,
        c: DMatrix<i64>,
        d: DMatrix<i64>,
    ) -> Result<Self> {
        let g = a.nrows();
        let m = Self { g, a, b, c, d };
        if !m.relations_hold() {
            return Err(SiegelError::Domain(
                "integer blocks do not satisfy the symplectic relations".into(),
            ));
        }
        Ok(m)
    }

    pub fn identity(g: usize) -> Self {
        Self {
            g,
            a: DMatrix::identity(g, g),
            b: DMatrix::zeros(g, g),
            c: DMatrix::zeros(g, g),
            d: DMatrix::identity(g, g),
        }
    }

    fn relations_hold(&self) -> bool {
        let at = self.a.transpose();
        let bt = self.b.transpose();
        let ct = self.c.transpose();
        let atc = &at * &self.c;
        let btd = &bt * &self.d;
        let atd_ctb = &at * &self.d - &ct * &self.b;
        atc == atc.transpose()
            && btd == btd.transpose()
            && atd_ctb == DMatrix::<i64>::identity(self.g, self.g)
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        let a = &self.a * &rhs.a + &self.b * &rhs.c;
        let b = &self.a * &rhs.b + &self.b * &rhs.d;
        let c = &self.c * &rhs.a + &self.d * &rhs.c;
        let d = &self.c * &rhs.b + &self.d * &rhs.d;
        Self { g: self.g, a, b, c, d }
    }

    pub fn inverse(&self) -> Self {
        Self {
            g: self.g,
            a: self.d.transpose(),
            b: -self.b.transpose(),
            c: -self.c.transpose(),
            d: self.a.transpose(),
        }
    }

    pub fn to_real(&self) -> BlockSymplectic {
        BlockSymplectic {
            g: self.g,
            a: self.a.map(|v| v as f64),
            b: self.b.map(|v| v as f64),
            c: self.c.map(|v| v as f64),
            d: self.d.map(|v| v as f64),
        }
    }

    pub fn blocks(&self) -> (&DMatrix<i64>, &DMatrix<i64>, &DMatrix<i64>, &DMatrix<i64>) {
        (&self.a, &self.b, &self.c, &self.d)
    }
}

impl SiegelPoint {
    /// Builds `Z = X + iY`, requiring symmetry to `1e-12` and `Y ≻ 0`.
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        let g = x.nrows();
        if x.ncols() != g || y.nrows() != g || y.ncols() != g {
            return Err(SiegelError::Dimension("X and Y must be square of equal size".into()));
        }
        let scale_x = 1.0 + x.amax();
        let scale_y = 1.0 + y.amax();
        if (&x - x.transpose()).amax() > 1e-12 * scale_x {
            return Err(SiegelError::Domain("X is not symmetric".into()));
        }
        if (&y - y.transpose()).amax() > 1e-12 * scale_y {
            return Err(SiegelError::Domain("Y is not symmetric".into()));
        }
        // positive definiteness via the symmetric triangular factorization
        if udu_factor(&y).is_none() {
            return Err(SiegelError::Domain("Y is not positive definite".into()));
        }
        // store exactly symmetrized parts
        let x = symmetrize(&x);
        let y = symmetrize(&y);
        Ok(Self { x, y })
    }

    /// The base point `i·I_g`.
    pub fn base(g: usize) -> Self {
        Self {
            x: DMatrix::zeros(g, g),
            y: DMatrix::identity(g, g),
        }
    }

    pub fn genus(&self) -> usize {
        self.x.nrows()
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        let g = self.genus();
        DMatrix::from_fn(g, g, |i, j| Complex64::new(self.x[(i, j)], self.y[(i, j)]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.x - &other.x).amax().max((&self.y - &other.y).amax())
    }
}

fn assemble(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    let g = a.nrows();
    let mut m = DMatrix::zeros(2 * g, 2 * g);
    m.view_mut((0, 0), (g, g)).copy_from(a);
    m.view_mut((0, g), (g, g)).copy_from(b);
    m.view_mut((g, 0), (g, g)).copy_from(c);
    m.view_mut((g, g), (g, g)).copy_from(d);
    m
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Triangular factorization `Y = WᵀDW` read from the top-left; returns
/// `None` when a pivot fails to be positive.
fn udu_factor(y: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>)> {
    let g = y.nrows();
    let mut s = y.clone();
    let mut w = DMatrix::<f64>::identity(g, g);
    let mut d = DVector::<f64>::zeros(g);
    for k in 0..g {
        let pivot = s[(k, k)];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return None;
        }
        d[k] = pivot;
        for j in (k + 1)..g {
            w[(k, j)] = s[(k, j)] / pivot;
        }
        for i in (k + 1)..g {
            for j in (k + 1)..g {
                s[(i, j)] -= s[(k, i)] * s[(k, j)] / pivot;
            }
        }
    }
    Some((w, d))
}

/// Generalized Möbius action `Z ↦ (AZ + B)(CZ + D)⁻¹`.
///
/// The output is re-symmetrized; in exact arithmetic the action preserves
/// symmetry, in floating point it drifts.
pub fn mobius(alpha: &BlockSymplectic, z: &SiegelPoint) -> Result<SiegelPoint> {
    if alpha.genus() != z.genus() {
        return Err(SiegelError::Dimension("genus mismatch in Möbius action".into()));
    }
    let g = z.genus();
    let zc = z.to_complex();
    let cmplx = |m: &DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
    let num = cmplx(&alpha.a) * &zc + cmplx(&alpha.b);
    let den = cmplx(&alpha.c) * &zc + cmplx(&alpha.d);

    let cond = condition_number(&den);
    if !cond.is_finite() || cond > COCYCLE_COND_CUTOFF {
        return Err(SiegelError::SingularCocycle {
            cond,
            cutoff: COCYCLE_COND_CUTOFF,
        });
    }

    // Z' = num · den⁻¹, via a linear solve on the transposed system.
    let lu = den.transpose().lu();
    let sol = lu
        .solve(&num.transpose())
        .ok_or(SiegelError::SingularCocycle {
            cond: f64::INFINITY,
            cutoff: COCYCLE_COND_CUTOFF,
        })?;
    let zp = sol.transpose();

    let x = symmetrize(&zp.map(|v| v.re));
    let y = symmetrize(&zp.map(|v| v.im));
    if udu_factor(&y).is_none() {
        return Err(SiegelError::Domain(
            "Möbius image lost positive definiteness".into(),
        ));
    }
    let _ = g;
    Ok(SiegelPoint { x, y })
}

/// Möbius action of an integer symplectic element.
pub fn mobius_int(gamma: &IntegerSymplectic, z: &SiegelPoint) -> Result<SiegelPoint> {
    mobius(&gamma.to_real(), z)
}

/// Two-sided condition estimate from the singular values of `M`.
fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    // singular values via the Hermitian eigenvalues of MᴴM
    let mtm = m.adjoint() * m;
    let eig = mtm.symmetric_eigenvalues();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..eig.len() {
        let v = eig[i].max(0.0);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).sqrt()
    }
}

/// The raw height `det Im(Z)`.
pub fn height_raw(z: &SiegelPoint) -> f64 {
    match udu_factor(z.im()) {
        Some((_, d)) => d.iter().product(),
        None => f64::NAN,
    }
}

/// Iwasawa factorization `Z = X + i WᵀDW`.
pub fn iwasawa(z: &SiegelPoint) -> Result<IwasawaCoordinates> {
    let (w, d) = udu_factor(z.im()).ok_or_else(|| {
        SiegelError::Domain("Y is not positive definite; no Iwasawa factorization".into())
    })?;
    Ok(IwasawaCoordinates {
        x: z.re().clone(),
        w,
        d,
    })
}

impl IwasawaCoordinates {
    /// Rebuilds the Siegel point `X + i WᵀDW`.
    pub fn reconstruct(&self) -> Result<SiegelPoint> {
        let g = self.d.len();
        let dm = DMatrix::from_fn(g, g, |i, j| if i == j { self.d[i] } else { 0.0 });
        let y = self.w.transpose() * dm * &self.w;
        SiegelPoint::new(self.x.clone(), y)
    }
}

/// The diagonal symplectic flow `diag(e^{tδ}, e^{−tδ})`.
pub fn cartan_matrix(dhat: &CartanDirection, t: f64) -> BlockSymplectic {
    let g = dhat.genus();
    let a = DMatrix::from_fn(g, g, |i, j| {
        if i == j {
            (t * dhat.delta[i]).exp()
        } else {
            0.0
        }
    });
    let d = DMatrix::from_fn(g, g, |i, j| {
        if i == j {
            (-t * dhat.delta[i]).exp()
        } else {
            0.0
        }
    });
    BlockSymplectic {
        g,
        a,
        b: DMatrix::zeros(g, g),
        c: DMatrix::zeros(g, g),
        d,
    }
}

/// Riemannian length of a sampled curve by midpoint quadrature of
/// `ds² = tr(dZ Y⁻¹ dZ̄ Y⁻¹)`.
///
/// At `g = 1` this metric is the standard hyperbolic `|dz|²/y²`; the vertical
/// segment from `i` to `ie` has length 1.
pub fn path_length(path: &[SiegelPoint]) -> Result<f64> {
    if path.len() < 2 {
        return Err(SiegelError::Domain("path needs at least 2 samples".into()));
    }
    let mut total = 0.0;
    for (seg, pair) in path.windows(2).enumerate() {
        let (z0, z1) = (&pair[0], &pair[1]);
        let dz = z1.to_complex() - z0.to_complex();
        let ymid = (z0.im() + z1.im()) * 0.5;
        let ylu = ymid.clone().lu();
        let yinv = ylu
            .try_inverse()
            .ok_or_else(|| SiegelError::Domain("midpoint Y not invertible".into()))?;
        let yinv_c = yinv.map(|v| Complex64::new(v, 0.0));
        let prod = &dz * &yinv_c * dz.map(|v| v.conj()) * &yinv_c;
        let ds2 = prod.trace().re.max(0.0);
        let ds = ds2.sqrt();
        if ds >= 0.5 {
            return Err(SiegelError::RefinementRequired {
                segment: seg,
                increment: ds,
            });
        }
        total += ds;
    }
    Ok(total)
}

#[cfg(test)]
pub(crate) mod tests;
