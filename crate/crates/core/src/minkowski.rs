//! Minkowski-space linear algebra under the `(+, -, -, -)` metric, in units
//! with `c = 1`.
//!
//! The central objects are the unit time-like normal `eta` of a no-decay
//! hyperplane and the hyperplane `{x : eta.x = tau}` itself. A velocity `u`
//! and its normal are related by `eta = (1, u) / sqrt(1 - u^2)` and
//! `u = eta_spatial / eta_t`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `eta.eta = 1` accepted by [`UnitTimelike::new`], relative to
/// the squared Euclidean size of the vector.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Velocities whose magnitude lies in `[VELOCITY_CAP, 1)` are scaled down to
/// this magnitude.
pub const VELOCITY_CAP: f64 = 1.0 - 1e-12;

/// Default relative singular-value cutoff for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// A contravariant four-vector `(t, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub const ZERO: FourVector = FourVector { t: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const TIME: FourVector = FourVector { t: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Builds a vector, rejecting NaN and infinite components.
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let v = FourVector { t, x, y, z };
        if v.components().iter().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(Error::NonFinite("four-vector"))
        }
    }

    pub fn from_array(c: [f64; 4]) -> Result<Self> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn components(&self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Minkowski inner product with `other`.
    pub fn dot(&self, other: &FourVector) -> f64 {
        lorentz_inner(self, other)
    }

    /// The Minkowski square `v.v`; positive for time-like vectors.
    pub fn square(&self) -> f64 {
        lorentz_inner(self, self)
    }

    /// Components with the index lowered, `g_{mu nu} v^nu`.
    pub fn lowered(&self) -> [f64; 4] {
        [self.t, -self.x, -self.y, -self.z]
    }

    pub fn max_abs_diff(&self, other: &FourVector) -> f64 {
        (*self - *other).components().iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector { t: self.t + o.t, x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector { t: self.t - o.t, x: self.x - o.x, y: self.y - o.y, z: self.z - o.z }
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector { t: -self.t, x: -self.x, y: -self.y, z: -self.z }
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, k: f64) -> FourVector {
        FourVector { t: self.t * k, x: self.x * k, y: self.y * k, z: self.z * k }
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

/// Minkowski inner product `a.t b.t - a.x b.x - a.y b.y - a.z b.z`.
pub fn lorentz_inner(a: &FourVector, b: &FourVector) -> f64 {
    a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z
}

/// A future-pointing time-like unit vector: the normal of a no-decay
/// hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitTimelike(FourVector);

impl UnitTimelike {
    pub const REST: UnitTimelike = UnitTimelike(FourVector::TIME);

    /// Accepts `v` if it is future-pointing with `v.v = 1` to within
    /// [`UNIT_TOLERANCE`] times its squared Euclidean size.
    pub fn new(v: FourVector) -> Result<Self> {
        FourVector::from_array(v.components()).map_err(|_| Error::InvalidEta("non-finite component".into()))?;
        if v.t <= 0.0 {
            return Err(Error::InvalidEta(format!("time component {} is not positive", v.t)));
        }
        let scale = v.components().iter().map(|c| c * c).sum::<f64>().max(1.0);
        let defect = (v.square() - 1.0).abs();
        if defect > UNIT_TOLERANCE * scale {
            return Err(Error::InvalidEta(format!("eta.eta - 1 = {defect:e}")));
        }
        Ok(UnitTimelike(v))
    }

    /// Rescales a future-pointing time-like vector to unit Minkowski norm.
    pub fn normalize(v: FourVector) -> Result<Self> {
        FourVector::from_array(v.components()).map_err(|_| Error::InvalidEta("non-finite component".into()))?;
        let sq = v.square();
        if v.t <= 0.0 || sq <= 0.0 {
            return Err(Error::InvalidEta("vector is not future-pointing time-like".into()));
        }
        Ok(UnitTimelike(v * (1.0 / sq.sqrt())))
    }

    pub fn vec(&self) -> FourVector {
        self.0
    }

    /// The time component `eta^0 = 1 / sqrt(1 - u^2)`.
    pub fn gamma(&self) -> f64 {
        self.0.t
    }
}

/// The space-like hyperplane `{x : normal.x = tau}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hyperplane {
    pub normal: UnitTimelike,
    pub tau: f64,
}

impl Hyperplane {
    pub fn new(normal: UnitTimelike, tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::NonFinite("hyperplane offset"));
        }
        Ok(Hyperplane { normal, tau })
    }

    pub fn contains(&self, x: &FourVector, tol: f64) -> bool {
        (lorentz_inner(&self.normal.vec(), x) - self.tau).abs() <= tol
    }
}

/// A three-velocity as a fraction of the speed of light.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Velocity3 {
    pub ux: f64,
    pub uy: f64,
    pub uz: f64,
}

impl Velocity3 {
    pub const ZERO: Velocity3 = Velocity3 { ux: 0.0, uy: 0.0, uz: 0.0 };

    /// Rejects `|u| >= 1`; magnitudes in `[VELOCITY_CAP, 1)` are clamped to
    /// `VELOCITY_CAP`.
    pub fn new(ux: f64, uy: f64, uz: f64) -> Result<Self> {
        if !(ux.is_finite() && uy.is_finite() && uz.is_finite()) {
            return Err(Error::NonFinite("velocity"));
        }
        let v = Velocity3 { ux, uy, uz };
        let speed = v.speed();
        if speed >= 1.0 {
            return Err(Error::VelocityNotSubluminal(speed));
        }
        if speed > VELOCITY_CAP {
            let k = VELOCITY_CAP / speed;
            return Ok(Velocity3 { ux: ux * k, uy: uy * k, uz: uz * k });
        }
        Ok(v)
    }

    pub fn from_array(u: [f64; 3]) -> Result<Self> {
        Self::new(u[0], u[1], u[2])
    }

    pub fn components(&self) -> [f64; 3] {
        [self.ux, self.uy, self.uz]
    }

    pub fn speed_squared(&self) -> f64 {
        self.ux * self.ux + self.uy * self.uy + self.uz * self.uz
    }

    pub fn speed(&self) -> f64 {
        self.speed_squared().sqrt()
    }
}

/// `eta = (1, u) / sqrt(1 - u^2)`.
pub fn eta_from_velocity(u: &Velocity3) -> UnitTimelike {
    let g = 1.0 / (1.0 - u.speed_squared()).sqrt();
    UnitTimelike(FourVector { t: g, x: g * u.ux, y: g * u.uy, z: g * u.uz })
}

/// `u = eta_spatial / eta_t`.
pub fn velocity_from_eta(eta: &UnitTimelike) -> Velocity3 {
    let v = eta.vec();
    Velocity3 { ux: v.x / v.t, uy: v.y / v.t, uz: v.z / v.t }
}

/// Pure boost with rapidity `rapidity` along the unit 3-direction `axis`.
///
/// Acting on the rest vector `(1, 0, 0, 0)` this gives
/// `(cosh r, sinh r * axis)`.
pub fn boost(axis: [f64; 3], rapidity: f64, v: &FourVector) -> Result<FourVector> {
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= 1e-12) {
        return Err(Error::AxisNotNormalized(norm));
    }
    if !rapidity.is_finite() {
        return Err(Error::NonFinite("rapidity"));
    }
    let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
    let par = axis[0] * v.x + axis[1] * v.y + axis[2] * v.z;
    let t = ch * v.t + sh * par;
    let par_new = sh * v.t + ch * par;
    let shift = par_new - par;
    Ok(FourVector { t, x: v.x + shift * axis[0], y: v.y + shift * axis[1], z: v.z + shift * axis[2] })
}

/// Boosts `v` by the pure boost that carries the rest vector onto `eta`.
pub fn boost_from_rest(eta: &UnitTimelike, v: &FourVector) -> FourVector {
    let e = eta.vec();
    let p = (e.x * e.x + e.y * e.y + e.z * e.z).sqrt();
    if p == 0.0 {
        return *v;
    }
    let axis = [e.x / p, e.y / p, e.z / p];
    // sinh(r) = |eta_spatial|; asinh is better conditioned than acosh(eta_t) near rest.
    boost(axis, p.asinh(), v).expect("axis is normalized by construction")
}

/// Coordinate-time separation `(h2.tau - h1.tau) / eta^0` between two parallel
/// hyperplanes.
pub fn time_gap_between_parallel(h1: &Hyperplane, h2: &Hyperplane) -> Result<f64> {
    let mismatch = h1.normal.vec().max_abs_diff(&h2.normal.vec());
    if !(mismatch <= 1e-10) {
        return Err(Error::HyperplanesNotParallel(mismatch));
    }
    Ok((h2.tau - h1.tau) / h1.normal.gamma())
}

/// `p - eta (eta.p)`: the part of `p` lying in the hyperplane orthogonal to
/// `eta`.
pub fn project_spacelike(p: &FourVector, eta: &UnitTimelike) -> FourVector {
    let e = eta.vec();
    *p - e * lorentz_inner(&e, p)
}

/// Singular-value analysis of a small set of four-vectors.
#[derive(Debug, Clone)]
pub(crate) struct SpanAnalysis {
    pub rank: usize,
    /// True if some singular value sits within a factor of ten of the cutoff.
    pub near_degenerate: bool,
    /// Lorentz-orthonormal space-like basis of the complement.
    pub complement: Vec<FourVector>,
}

pub(crate) fn analyze_span(vectors: &[FourVector], tol: f64) -> Result<SpanAnalysis> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if vectors.len() > 4 {
        return Err(Error::InvalidParameters(format!("at most four vectors, got {}", vectors.len())));
    }
    // Rows are the metric-lowered vectors, so the Euclidean null space of the
    // matrix is the Lorentz-orthogonal complement of their span.
    let mut m = Matrix4::<f64>::zeros();
    for (i, v) in vectors.iter().enumerate() {
        for (j, c) in v.lowered().iter().enumerate() {
            m[(i, j)] = *c;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let cutoff = tol * singular_values[0];
    let rank = singular_values.iter().filter(|&&s| s > cutoff).count();
    let near_degenerate = singular_values.iter().any(|&s| s > cutoff / 10.0 && s < cutoff * 10.0);

    let raw: Vec<FourVector> = order[rank..]
        .iter()
        .map(|&i| FourVector { t: v_t[(i, 0)], x: v_t[(i, 1)], y: v_t[(i, 2)], z: v_t[(i, 3)] })
        .collect();
    Ok(SpanAnalysis { rank, near_degenerate, complement: lorentz_orthonormalize(&raw) })
}

/// Gram-Schmidt on space-like vectors with the positive-definite form `-g`.
fn lorentz_orthonormalize(vectors: &[FourVector]) -> Vec<FourVector> {
    let mut out: Vec<FourVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = *v;
        for b in &out {
            // <w, b> with -g, b normalized to -b.b = 1
            let c = -lorentz_inner(&w, b);
            w = w - *b * c;
        }
        let n2 = -w.square();
        if n2 <= 0.0 {
            continue;
        }
        w = w * (1.0 / n2.sqrt());
        let lead = w.components().into_iter().find(|c| c.abs() > 1e-12).unwrap_or(1.0);
        if lead < 0.0 {
            w = -w;
        }
        out.push(w);
    }
    out
}

/// Rank of the span of `etas` and a space-like basis of its
/// Lorentz-orthogonal complement.
///
/// ```
/// use slmdecay::minkowski::{eta_from_velocity, orthogonal_spacelike_family, Velocity3};
///
/// let etas = [
///     eta_from_velocity(&Velocity3::ZERO),
///     eta_from_velocity(&Velocity3::new(0.6, 0.0, 0.0).unwrap()),
///     eta_from_velocity(&Velocity3::new(0.0, 0.6, 0.0).unwrap()),
/// ];
/// let (rank, family) = orthogonal_spacelike_family(&etas, 1e-9).unwrap();
/// assert_eq!((rank, family.len()), (3, 1));
/// assert!(family[0].z.abs() > 0.999);
/// ```
pub fn orthogonal_spacelike_family(etas: &[UnitTimelike], tol: f64) -> Result<(usize, Vec<FourVector>)> {
    if etas.is_empty() {
        return Err(Error::EmptyInput);
    }
    if etas.len() > 3 {
        return Err(Error::InvalidParameters(format!("expected at most three normals, got {}", etas.len())));
    }
    let vs: Vec<FourVector> = etas.iter().map(|e| e.vec()).collect();
    let a = analyze_span(&vs, tol)?;
    Ok((a.rank, a.complement))
}
