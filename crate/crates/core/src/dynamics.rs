//! Survival amplitudes and lifetimes of unstable quantons.
//!
//! A state with space-like momentum `p` on the no-decay hyperplane of `eta`
//! has survival amplitude
//!
//! ```text
//! I(tau) = integral dmu sigma(mu) exp(-(i/hbar) sqrt(mu^2 + s) tau),   s = -p.p >= 0
//! ```
//!
//! along the `eta` direction, and lifetime
//!
//! ```text
//! T = integral_0^inf dtau |I(tau)|^2 = pi hbar integral dmu sigma(mu)^2 sqrt(mu^2 + s) / mu.
//! ```
//!
//! The two expressions for `T` are computed independently by
//! [`lifetime_numeric`] and [`lifetime_closed_form`] and serve as mutual
//! checks. A velocity eigenstate is the `p = 0` case; evolved through
//! coordinate time `t` it sees the rest-frame amplitude at `eta^0 t`, so it
//! decays faster, by the Shirokov factor `sqrt(1 - u^2)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::minkowski::{boost_from_rest, eta_from_velocity, lorentz_inner, FourVector, UnitTimelike, Velocity3};
use crate::spectra::SpectralDensity;

pub const DEFAULT_HBAR: f64 = 1.0;

/// Tolerance on `eta.p = 0` and on `p.p <= 0`, relative to the size of `p`.
pub const LABEL_TOLERANCE: f64 = 1e-10;

/// Samples per phasor chunk in [`lifetime_numeric`]; each chunk restarts
/// from exact phases.
const CHUNK: usize = 1024;

/// Upper bound on tau samples before [`lifetime_numeric`] gives up.
const MAX_SAMPLES: usize = 1 << 24;

/// Labels a space-like momentum eigenstate: momentum `p` lying in the
/// no-decay hyperplane of `eta`, for the channel `alpha`. `p = 0` is the
/// velocity eigenstate of velocity `eta_spatial / eta_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlmLabel {
    eta: UnitTimelike,
    p: FourVector,
    alpha: String,
}

impl SlmLabel {
    pub fn new(eta: UnitTimelike, p: FourVector, alpha: impl Into<String>) -> Result<Self> {
        FourVector::from_array(p.components())?;
        let scale = p.components().iter().map(|c| c.abs()).fold(1.0, f64::max);
        let ep = lorentz_inner(&eta.vec(), &p);
        if ep.abs() > LABEL_TOLERANCE * scale * eta.gamma() {
            return Err(Error::InvalidLabel(format!("eta.p = {ep:e}, expected 0")));
        }
        if p.square() > LABEL_TOLERANCE * scale * scale {
            return Err(Error::InvalidLabel(format!("p is time-like (p.p = {:e})", p.square())));
        }
        Ok(SlmLabel { eta, p, alpha: alpha.into() })
    }

    pub fn velocity_eigenstate(u: &Velocity3, alpha: impl Into<String>) -> Self {
        SlmLabel { eta: eta_from_velocity(u), p: FourVector::ZERO, alpha: alpha.into() }
    }

    /// The label whose momentum is `q` in the rest frame of `eta`, carried
    /// over by the pure boost from rest to `eta`.
    pub fn from_rest_frame_momentum(eta: UnitTimelike, q: [f64; 3], alpha: impl Into<String>) -> Result<Self> {
        let rest = FourVector::new(0.0, q[0], q[1], q[2])?;
        SlmLabel::new(eta, boost_from_rest(&eta, &rest), alpha)
    }

    pub fn eta(&self) -> UnitTimelike {
        self.eta
    }

    pub fn p(&self) -> FourVector {
        self.p
    }

    pub fn alpha(&self) -> &str {
        &self.alpha
    }

    /// `s = -p.p`, clamped at zero against rounding.
    pub fn s(&self) -> f64 {
        (-self.p.square()).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LifetimeMethod {
    ClosedForm,
    NumericTau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimeResult {
    pub value: f64,
    pub method: LifetimeMethod,
    /// Extrapolated contribution of the tau tail beyond the last sample.
    /// Zero for the closed form.
    pub tail_bound: f64,
}

fn check_s(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::SpacelikeMomentumRequired(s))
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("hbar must be positive, got {hbar}")))
    }
}

/// `sqrt(mu^2 + s)` at every node.
fn energies(d: &SpectralDensity, s: f64) -> Vec<f64> {
    d.nodes().iter().map(|mu| (mu * mu + s).sqrt()).collect()
}

/// Quadrature weight times density at every node.
fn masses(d: &SpectralDensity) -> Vec<f64> {
    d.weights().iter().zip(d.values()).map(|(w, v)| w * v).collect()
}

fn amplitude_at(energies: &[f64], masses: &[f64], tau: f64, hbar: f64) -> Complex64 {
    let k = tau / hbar;
    let (mut re, mut im) = (0.0, 0.0);
    for (e, m) in energies.iter().zip(masses) {
        let (sin, cos) = (e * k).sin_cos();
        re += m * cos;
        im -= m * sin;
    }
    Complex64::new(re, im)
}

/// `I(tau) = integral sigma(mu) exp(-(i/hbar) sqrt(mu^2 + s) tau) dmu`.
pub fn survival_amplitude(d: &SpectralDensity, s: f64, tau: f64, hbar: f64) -> Result<Complex64> {
    check_s(s)?;
    check_hbar(hbar)?;
    if !tau.is_finite() {
        return Err(Error::NonFinite("tau"));
    }
    Ok(amplitude_at(&energies(d, s), &masses(d), tau, hbar))
}

/// [`survival_amplitude`] over a list of times. Points are evaluated in
/// parallel; each is an independent fixed-order sum.
pub fn survival_curve(d: &SpectralDensity, s: f64, taus: &[f64], hbar: f64) -> Result<SurvivalCurve> {
    check_s(s)?;
    check_hbar(hbar)?;
    if taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("tau"));
    }
    let (e, m) = (energies(d, s), masses(d));
    let amplitudes: Vec<Complex64> = taus.par_iter().map(|&t| amplitude_at(&e, &m, t, hbar)).collect();
    let probabilities = amplitudes.iter().map(|a| a.norm_sqr()).collect();
    Ok(SurvivalCurve { times: taus.to_vec(), amplitudes, probabilities })
}

/// `T = pi hbar integral sigma(mu)^2 sqrt(mu^2 + s) / mu dmu`.
///
/// ```
/// use slmdecay::{dynamics::lifetime_closed_form, spectra::make_gaussian};
///
/// let d = make_gaussian(1.0, 1e-3, 12.0, 4096).unwrap();
/// let t0 = lifetime_closed_form(&d, 0.0, 1.0).unwrap().value;
/// let t3 = lifetime_closed_form(&d, 3.0, 1.0).unwrap().value;
/// assert!((t3 / t0 - 2.0).abs() < 1e-4);
/// ```
pub fn lifetime_closed_form(d: &SpectralDensity, s: f64, hbar: f64) -> Result<LifetimeResult> {
    check_s(s)?;
    check_hbar(hbar)?;
    if d.is_sharp() {
        return Err(Error::InfiniteLifetime);
    }
    if d.mu_min() <= 0.0 {
        return Err(Error::SupportTouchesZeroMass);
    }
    let integral: f64 = d
        .nodes()
        .iter()
        .zip(d.weights())
        .zip(d.values())
        .map(|((&mu, &w), &v)| w * v * v * (mu * mu + s).sqrt() / mu)
        .sum();
    Ok(LifetimeResult {
        value: std::f64::consts::PI * hbar * integral,
        method: LifetimeMethod::ClosedForm,
        tail_bound: 0.0,
    })
}

/// Phasor state for evaluating `|I|^2` on a uniform tau grid.
struct UniformSampler {
    energies: Vec<f64>,
    masses: Vec<f64>,
    step_re: Vec<f64>,
    step_im: Vec<f64>,
    step: f64,
    hbar: f64,
}

impl UniformSampler {
    fn new(energies: Vec<f64>, masses: Vec<f64>, step: f64, hbar: f64) -> Self {
        let (step_im, step_re): (Vec<f64>, Vec<f64>) = energies
            .iter()
            .map(|e| {
                let (s, c) = (e * step / hbar).sin_cos();
                (-s, c)
            })
            .unzip();
        UniformSampler { energies, masses, step_re, step_im, step, hbar }
    }

    /// `|I(k step)|^2` for `k` in `start..end`, chunked and evaluated in
    /// parallel. Chunk boundaries depend only on `start`, so results do not
    /// depend on the thread count.
    fn probabilities(&self, start: usize, end: usize) -> Vec<f64> {
        let chunks: Vec<(usize, usize)> = (start..end).step_by(CHUNK).map(|a| (a, (a + CHUNK).min(end))).collect();
        chunks.par_iter().flat_map_iter(|&(a, b)| self.chunk(a, b)).collect()
    }

    fn chunk(&self, a: usize, b: usize) -> Vec<f64> {
        let tau = a as f64 * self.step;
        let n = self.energies.len();
        let mut re = Vec::with_capacity(n);
        let mut im = Vec::with_capacity(n);
        for (e, m) in self.energies.iter().zip(&self.masses) {
            let (s, c) = (e * tau / self.hbar).sin_cos();
            re.push(m * c);
            im.push(-m * s);
        }
        let mut out = Vec::with_capacity(b - a);
        for _ in a..b {
            let (mut sr, mut si) = (0.0, 0.0);
            for i in 0..n {
                sr += re[i];
                si += im[i];
                let (r, q) = (re[i], im[i]);
                re[i] = r * self.step_re[i] - q * self.step_im[i];
                im[i] = r * self.step_im[i] + q * self.step_re[i];
            }
            out.push(sr * sr + si * si);
        }
        out
    }
}

/// Least-squares line through `(x, ln y)`.
fn log_linear_fit(xs: impl Iterator<Item = f64>, ys: &[f64]) -> (f64, f64) {
    let n = ys.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, &y) in xs.zip(ys) {
        let ly = y.max(f64::MIN_POSITIVE).ln();
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// `T = integral_0^inf |I(tau)|^2 dtau`, by direct integration in tau.
///
/// `|I|^2` is sampled on a uniform grid whose step resolves the widest beat
/// frequency of the spectrum by ten samples, and integrated with the
/// trapezoid rule (spectrally accurate here: the integrand is even in tau
/// and band-limited). The window doubles until an exponential fitted to
/// `ln |I|^2` over its second half predicts a remaining tail below
/// `rel_tol` of the accumulated value; that tail estimate is added and
/// reported as `tail_bound`.
pub fn lifetime_numeric(d: &SpectralDensity, s: f64, hbar: f64, rel_tol: f64) -> Result<LifetimeResult> {
    check_s(s)?;
    check_hbar(hbar)?;
    if !(rel_tol > 0.0 && rel_tol <= 0.1) {
        return Err(Error::InvalidParameters(format!("rel_tol must lie in (0, 0.1], got {rel_tol}")));
    }
    if d.is_sharp() {
        return Err(Error::TailNotDecaying("sharp spectrum: |I| is identically one".into()));
    }
    let e = energies(d, s);
    let m = masses(d);
    let (e_min, e_max) = e.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let spread = {
        let mean: f64 = e.iter().zip(&m).map(|(x, w)| x * w).sum();
        e.iter().zip(&m).map(|(x, w)| w * (x - mean) * (x - mean)).sum::<f64>().max(0.0).sqrt()
    };
    let bandwidth = e_max - e_min;
    if !(bandwidth > 0.0) || !(spread > 0.0) {
        return Err(Error::TailNotDecaying("no energy spread on the grid".into()));
    }

    let step = hbar / (10.0 * bandwidth);
    let sampler = UniformSampler::new(e, m, step, hbar);
    let mut n = ((hbar / spread / step).ceil() as usize).max(64);
    let mut probs = sampler.probabilities(0, n + 1);
    loop {
        let interior: f64 = probs[1..n].iter().sum();
        let accumulated = step * (0.5 * probs[0] + interior + 0.5 * probs[n]);
        let half = n / 2;
        let (a, b) = log_linear_fit((half..=n).map(|k| k as f64 * step), &probs[half..=n]);
        if !(b < 0.0) {
            return Err(Error::TailNotDecaying(format!(
                "fitted log-slope {b:e} over tau in [{}, {}]; the spectral grid may be too coarse",
                half as f64 * step,
                n as f64 * step
            )));
        }
        let window_end = n as f64 * step;
        let tail = (a + b * window_end).exp() / -b;
        if tail < rel_tol * accumulated {
            return Ok(LifetimeResult {
                value: accumulated + tail,
                method: LifetimeMethod::NumericTau,
                tail_bound: tail,
            });
        }
        if 2 * n > MAX_SAMPLES {
            return Err(Error::TailNotDecaying(format!(
                "tail estimate {tail:e} still above tolerance at tau = {window_end:e}"
            )));
        }
        probs.extend(sampler.probabilities(n + 1, 2 * n + 1));
        n *= 2;
    }
}

/// Shirokov's coordinate-time lifetime `tau0 sqrt(1 - u^2)`.
pub fn shirokov_time(tau0: f64, u: &Velocity3) -> Result<f64> {
    if !(tau0 > 0.0 && tau0.is_finite()) {
        return Err(Error::InvalidParameters(format!("tau0 must be positive, got {tau0}")));
    }
    Ok(tau0 * (1.0 - u.speed_squared()).sqrt())
}

/// Survival amplitude of the velocity eigenstate of velocity `u` after
/// coordinate time `t`: the rest-frame amplitude at `tau = eta^0 t`.
pub fn velocity_eigenstate_survival(d: &SpectralDensity, u: &Velocity3, t: f64, hbar: f64) -> Result<Complex64> {
    let gamma = eta_from_velocity(u).gamma();
    survival_amplitude(d, 0.0, gamma * t, hbar)
}

/// `<(eta P)^-1> = integral sigma(mu) / sqrt(mu^2 + s) dmu`.
pub fn mean_inverse_energy(d: &SpectralDensity, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(d.expectation(|mu| 1.0 / (mu * mu + s).sqrt()))
}

/// Mean and root-variance of `K(eta) / (eta P)` in the state `label`.
///
/// The mean is `p <(eta P)^-1>`. The spread is
/// `sqrt(s Var[1 / sqrt(mu^2 + s)])`, which vanishes for velocity eigenstates
/// and for sharp spectra.
pub fn velocity_expectation_and_spread(d: &SpectralDensity, label: &SlmLabel) -> Result<(FourVector, f64)> {
    let s = label.s();
    let mean_inv = mean_inverse_energy(d, s)?;
    let var = d.expectation(|mu| {
        let x = 1.0 / (mu * mu + s).sqrt() - mean_inv;
        x * x
    });
    Ok((label.p() * mean_inv, (s * var).max(0.0).sqrt()))
}

/// `<(p + eta_spatial E) / (p^0 + eta^0 E)>` with `E = sqrt(mu^2 + s)`.
pub fn instantaneous_velocity_expectation(d: &SpectralDensity, label: &SlmLabel) -> Result<Velocity3> {
    let s = label.s();
    let (eta, p) = (label.eta().vec(), label.p());
    let component = |pi: f64, ei: f64| {
        d.expectation(|mu| {
            let e = (mu * mu + s).sqrt();
            (pi + ei * e) / (p.t + eta.t * e)
        })
    };
    Velocity3::new(component(p.x, eta.x), component(p.y, eta.y), component(p.z, eta.z))
}
