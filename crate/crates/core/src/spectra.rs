//! Mass spectral densities `sigma(mu)` and the quadrature rules that carry
//! them.
//!
//! Every density is normalized as a probability density in `mu`, so the
//! survival amplitude starts at one. The quadrature is composite
//! Gauss-Legendre: panels are laid out by inverting the cumulative of a
//! placement density that mixes `sqrt(sigma)` with a uniform floor. For a
//! Lorentzian this makes panel length grow in proportion to the distance
//! from the peak, which keeps every panel well inside the region where the
//! rule converges geometrically, while the uniform share keeps the far tails
//! resolved for the oscillatory integrals of [`crate::dynamics`].

use std::num::NonZeroUsize;
use std::path::Path;

use gauss_quad::GaussLegendre;
use serde::Serialize;

use crate::error::{Error, Result};

/// Nodes per Gauss-Legendre panel.
pub const PANEL_ORDER: usize = 16;

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 4096;

/// Default Breit-Wigner truncation, in units of the width `Gamma`.
pub const DEFAULT_BW_SUPPORT: f64 = 200.0;

/// Default Gaussian truncation, in standard deviations.
pub const DEFAULT_GAUSSIAN_SUPPORT: f64 = 12.0;

/// Lower edge of built-in supports as a fraction of the central mass. Keeps
/// `mu_min > 0` so the `1/mu` lifetime integrand stays finite.
pub const MASS_FLOOR_FRACTION: f64 = 1e-3;

/// Widths below this fraction of the central mass are treated as sharp.
pub const SHARP_WIDTH_FRACTION: f64 = 1e-12;

/// Share of panels placed according to `sqrt(sigma)`; the rest are uniform.
const CLUSTER_SHARE: f64 = 0.5;

/// Resolution of the auxiliary grid used to place panels.
const PLACEMENT_SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SpectralKind {
    BreitWigner {
        mass: f64,
        gamma: f64,
    },
    Gaussian {
        mass: f64,
        width: f64,
    },
    /// Linear interpolant through `(mu, sigma)` pairs.
    Tabulated {
        nodes: Vec<(f64, f64)>,
    },
}

impl SpectralKind {
    /// Unnormalized density.
    fn shape(&self, mu: f64) -> f64 {
        match self {
            SpectralKind::BreitWigner { mass, gamma } => {
                let d = mu - mass;
                (gamma / (2.0 * std::f64::consts::PI)) / (d * d + gamma * gamma / 4.0)
            }
            SpectralKind::Gaussian { mass, width } => {
                let z = (mu - mass) / width;
                (-0.5 * z * z).exp()
            }
            SpectralKind::Tabulated { nodes } => interpolate(nodes, mu),
        }
    }
}

fn interpolate(nodes: &[(f64, f64)], mu: f64) -> f64 {
    let first = nodes[0];
    let last = nodes[nodes.len() - 1];
    if mu < first.0 || mu > last.0 {
        return 0.0;
    }
    let i = nodes.partition_point(|n| n.0 <= mu);
    if i == nodes.len() {
        return last.1;
    }
    let (a, b) = (nodes[i - 1], nodes[i]);
    a.1 + (b.1 - a.1) * (mu - a.0) / (b.0 - a.0)
}

/// A normalized mass spectral density on a fixed quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    kind: SpectralKind,
    alpha: String,
    mu_min: f64,
    mu_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
    /// Multiplies `kind.shape` to give the normalized density.
    scale: f64,
    sharp: bool,
}

/// Breit-Wigner resonance `(Gamma / 2 pi) / ((mu - M)^2 + Gamma^2 / 4)`
/// truncated to `M +- support * Gamma` (clipped below at
/// `MASS_FLOOR_FRACTION * M`) and renormalized.
///
/// ```
/// use slmdecay::spectra::make_breit_wigner;
///
/// let bw = make_breit_wigner(1.0, 0.05, 200.0, 4096).unwrap();
/// assert!((bw.expectation(|_| 1.0) - 1.0).abs() < 1e-12);
/// ```
pub fn make_breit_wigner(mass: f64, gamma: f64, support: f64, n_nodes: usize) -> Result<SpectralDensity> {
    check_positive("mass", mass)?;
    check_positive("gamma", gamma)?;
    check_positive("support", support)?;
    check_nodes(n_nodes)?;
    let kind = SpectralKind::BreitWigner { mass, gamma };
    if gamma < SHARP_WIDTH_FRACTION * mass {
        return Ok(SpectralDensity::sharp(kind, mass));
    }
    let lo = (mass - support * gamma).max(MASS_FLOOR_FRACTION * mass);
    SpectralDensity::build(kind, lo, mass + support * gamma, n_nodes)
}

/// Gaussian of standard deviation `width` truncated to `M +- support * width`.
/// The truncation may not reach negative masses.
pub fn make_gaussian(mass: f64, width: f64, support: f64, n_nodes: usize) -> Result<SpectralDensity> {
    check_positive("mass", mass)?;
    check_positive("width", width)?;
    check_positive("support", support)?;
    check_nodes(n_nodes)?;
    let kind = SpectralKind::Gaussian { mass, width };
    if width < SHARP_WIDTH_FRACTION * mass {
        return Ok(SpectralDensity::sharp(kind, mass));
    }
    let lo = mass - support * width;
    if lo < 0.0 {
        return Err(Error::InvalidParameters(format!(
            "gaussian truncation reaches negative mass ({lo}); reduce support or width"
        )));
    }
    SpectralDensity::build(kind, lo, mass + support * width, n_nodes)
}

/// Linear interpolant through tabulated `(mu, sigma)` pairs, renormalized.
pub fn make_tabulated(nodes: Vec<(f64, f64)>) -> Result<SpectralDensity> {
    make_tabulated_with_nodes(nodes, DEFAULT_NODES)
}

pub fn make_tabulated_with_nodes(nodes: Vec<(f64, f64)>, n_nodes: usize) -> Result<SpectralDensity> {
    check_nodes(n_nodes)?;
    if nodes.len() < 2 {
        return Err(Error::InvalidParameters("a tabulated density needs at least two nodes".into()));
    }
    for (i, &(mu, s)) in nodes.iter().enumerate() {
        if !mu.is_finite() || !s.is_finite() {
            return Err(Error::NonFinite("tabulated density"));
        }
        if mu < 0.0 {
            return Err(Error::NegativeMass(i));
        }
        if s < 0.0 {
            return Err(Error::NegativeDensity(i));
        }
        if i > 0 && mu <= nodes[i - 1].0 {
            return Err(Error::NonMonotoneGrid(i));
        }
    }
    let (lo, hi) = (nodes[0].0, nodes[nodes.len() - 1].0);
    SpectralDensity::build(SpectralKind::Tabulated { nodes }, lo, hi, n_nodes)
}

/// Parses the two-column `mu sigma` text format. Blank lines and lines whose
/// first non-blank character is `#` are skipped.
pub fn parse_tabulated(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse { line: i + 1, msg: format!("expected two columns, found {}", fields.len()) });
        }
        let parse = |f: &str| f.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: format!("{f:?}: {e}") });
        out.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(out)
}

pub fn load_tabulated(path: &Path) -> Result<SpectralDensity> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Parse { line: 0, msg: format!("{}: {e}", path.display()) })?;
    make_tabulated(parse_tabulated(&text)?)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_nodes(n: usize) -> Result<()> {
    if n >= 32 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("need at least 32 quadrature nodes, got {n}")))
    }
}

impl SpectralDensity {
    fn sharp(kind: SpectralKind, mass: f64) -> Self {
        SpectralDensity {
            kind,
            alpha: String::new(),
            mu_min: mass,
            mu_max: mass,
            nodes: vec![mass],
            weights: vec![1.0],
            values: vec![1.0],
            scale: 1.0,
            sharp: true,
        }
    }

    fn build(kind: SpectralKind, mu_min: f64, mu_max: f64, n_nodes: usize) -> Result<Self> {
        let n_panels = n_nodes.div_ceil(PANEL_ORDER);
        let edges = match &kind {
            SpectralKind::Tabulated { nodes } => tabulated_edges(nodes, n_panels),
            _ => placement_edges(&kind, mu_min, mu_max, n_panels),
        };
        let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).expect("nonzero order"));
        let mut nodes = Vec::with_capacity(PANEL_ORDER * (edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in rule.iter() {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        let raw: Vec<f64> = nodes.iter().map(|&mu| kind.shape(mu)).collect();
        let total: f64 = raw.iter().zip(&weights).map(|(s, w)| s * w).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParameters("density has zero integral".into()));
        }
        let scale = 1.0 / total;
        let values = raw.iter().map(|s| s * scale).collect();
        Ok(SpectralDensity { kind, alpha: String::new(), mu_min, mu_max, nodes, weights, values, scale, sharp: false })
    }

    /// Attaches the channel label `alpha`.
    pub fn with_alpha(mut self, alpha: impl Into<String>) -> Self {
        self.alpha = alpha.into();
        self
    }

    pub fn alpha(&self) -> &str {
        &self.alpha
    }

    pub fn kind(&self) -> &SpectralKind {
        &self.kind
    }

    pub fn mu_min(&self) -> f64 {
        self.mu_min
    }

    pub fn mu_max(&self) -> f64 {
        self.mu_max
    }

    /// True for a delta-function spectrum (width below
    /// `SHARP_WIDTH_FRACTION` of the mass).
    pub fn is_sharp(&self) -> bool {
        self.sharp
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized density at the quadrature nodes. For a sharp spectrum this
    /// is the single unit mass at `M`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Normalized density at `mu`; zero outside the support. A sharp spectrum
    /// has no pointwise value and returns zero everywhere.
    pub fn sigma(&self, mu: f64) -> f64 {
        if self.sharp || mu < self.mu_min || mu > self.mu_max {
            return 0.0;
        }
        self.scale * self.kind.shape(mu)
    }

    /// Rescales so that the stored quadrature integrates `sigma` to one.
    /// Idempotent.
    pub fn normalized(&self) -> Self {
        let total = self.integral();
        let mut out = self.clone();
        out.scale /= total;
        out.values.iter_mut().for_each(|v| *v /= total);
        out
    }

    /// `integral sigma(mu) f(mu) dmu` by the stored rule, summed in node order.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).zip(&self.values).map(|((&mu, &w), &s)| w * s * f(mu)).sum()
    }

    /// `integral sigma dmu`; one for every constructed density.
    pub fn integral(&self) -> f64 {
        self.expectation(|_| 1.0)
    }

    /// `integral sigma^2 dmu`, or infinity for a sharp spectrum.
    pub fn integral_squared(&self) -> f64 {
        if self.sharp {
            return f64::INFINITY;
        }
        self.weights.iter().zip(&self.values).map(|(w, s)| w * s * s).sum()
    }

    pub fn mean_mass(&self) -> f64 {
        self.expectation(|mu| mu)
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean_mass();
        self.expectation(|mu| (mu - m) * (mu - m)).max(0.0).sqrt()
    }

    /// Central mass used for classical reference values: the resonance mass of
    /// the built-in families, the mean mass of a table.
    pub fn nominal_mass(&self) -> f64 {
        match &self.kind {
            SpectralKind::BreitWigner { mass, .. } | SpectralKind::Gaussian { mass, .. } => *mass,
            SpectralKind::Tabulated { .. } => self.mean_mass(),
        }
    }
}

/// Panel edges from the inverse cumulative of the placement density.
fn placement_edges(kind: &SpectralKind, lo: f64, hi: f64, n_panels: usize) -> Vec<f64> {
    let k = PLACEMENT_SAMPLES;
    let h = (hi - lo) / k as f64;
    let root: Vec<f64> = (0..=k).map(|i| kind.shape(lo + h * i as f64).sqrt()).collect();
    let root_total: f64 = trapezoid_cumulative(&root, h).last().copied().unwrap_or(0.0);
    let uniform = 1.0 / (hi - lo);
    let density: Vec<f64> =
        root.iter().map(|r| CLUSTER_SHARE * r / root_total + (1.0 - CLUSTER_SHARE) * uniform).collect();
    let cdf = trapezoid_cumulative(&density, h);
    let total = cdf[k];
    let mut edges = Vec::with_capacity(n_panels + 1);
    edges.push(lo);
    let mut j = 0;
    for p in 1..n_panels {
        let target = total * p as f64 / n_panels as f64;
        while cdf[j + 1] < target {
            j += 1;
        }
        let frac = (target - cdf[j]) / (cdf[j + 1] - cdf[j]);
        edges.push(lo + h * (j as f64 + frac));
    }
    edges.push(hi);
    edges
}

fn trapezoid_cumulative(y: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in y.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Panels aligned with the table so the linear interpolant is smooth on each.
fn tabulated_edges(nodes: &[(f64, f64)], n_panels: usize) -> Vec<f64> {
    let (lo, hi) = (nodes[0].0, nodes[nodes.len() - 1].0);
    let mut edges = vec![lo];
    for w in nodes.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        let parts = ((n_panels as f64 * (b - a) / (hi - lo)).round() as usize).max(1);
        for i in 1..=parts {
            edges.push(a + (b - a) * i as f64 / parts as f64);
        }
    }
    edges
}
