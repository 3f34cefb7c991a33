//! Linear relations among three no-decay hyperplane normals.
//!
//! Translation covariance of a mixed matrix element of the instantaneous
//! projector between hyperplanes `(eta, tau)`, `(eta', tau')` and
//! `(eta'', tau'')` constrains how it may depend on the three offsets. Which
//! constraints survive is decided by the number of independent linear
//! relations `l eta + l' eta' + l'' eta'' = 0`:
//!
//! | case | rank | relations | orthogonal space-like family | non-trivial tau combinations |
//! |------|------|-----------|------------------------------|------------------------------|
//! | 1    | 3    | 0         | 1-dimensional                | none                         |
//! | 2    | 2    | 1         | 2-dimensional                | `l tau + l' tau' + l'' tau''` |
//! | 3    | 1    | 2         | 3-dimensional (`p = p'`)     | both relation combinations   |
//!
//! "Trivial" dependence means at most a phase factor. Case 3 happens only
//! when all three normals coincide.

use std::fmt::Write;

use nalgebra::{Matrix3, Matrix4x3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::format_f64;
use crate::minkowski::{analyze_span, eta_from_velocity, FourVector, UnitTimelike, Velocity3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
}

impl CaseId {
    pub fn name(self) -> &'static str {
        match self {
            CaseId::Case1 => "Case1",
            CaseId::Case2 => "Case2",
            CaseId::Case3 => "Case3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub case_id: CaseId,
    pub rank: usize,
    /// Singular values of the 4x3 matrix of normals, descending.
    pub singular_values: [f64; 3],
    /// Basis of coefficient triples `(l, l', l'')` with
    /// `l eta + l' eta' + l'' eta'' = 0`, in reduced row-echelon order, each of
    /// unit norm with leading coefficient positive.
    pub relations: Vec<[f64; 3]>,
    pub orthogonal_family_dim: usize,
    /// Lorentz-orthonormal space-like vectors orthogonal to all three normals.
    pub orthogonal_family: Vec<FourVector>,
    pub support_condition: String,
    /// tau-coefficient triples on which more than a phase may depend.
    pub nontrivial_combinations: Vec<[f64; 3]>,
    /// Orthonormal basis of the remaining tau combinations (phase only).
    pub trivial_combinations: Vec<[f64; 3]>,
    /// Case 2 only: the relation involves just two normals, which are then
    /// equal.
    pub two_equal: bool,
    /// Some singular value lies within a factor of ten of the rank cutoff.
    pub near_degenerate: bool,
    /// Coefficients below this are treated as zero.
    pub zero_tol: f64,
}

impl CaseReport {
    /// True if some non-trivial combination involves the third hyperplane's
    /// offset `tau''`.
    pub fn depends_on_third(&self) -> bool {
        self.nontrivial_combinations.iter().any(|c| c[2].abs() > self.zero_tol)
    }

    /// `key: value` lines.
    pub fn to_record(&self) -> String {
        let triples = |v: &[[f64; 3]]| {
            if v.is_empty() {
                "none".to_string()
            } else {
                v.iter()
                    .map(|c| format!("({}, {}, {})", format_f64(c[0]), format_f64(c[1]), format_f64(c[2])))
                    .collect::<Vec<_>>()
                    .join("; ")
            }
        };
        let family = self
            .orthogonal_family
            .iter()
            .map(|b| {
                let c = b.components().map(format_f64);
                format!("({}, {}, {}, {})", c[0], c[1], c[2], c[3])
            })
            .collect::<Vec<_>>()
            .join("; ");
        let mut out = String::new();
        let _ = writeln!(out, "case: {}", self.case_id.name());
        let _ = writeln!(out, "rank: {}", self.rank);
        let _ = writeln!(out, "singular_values: {}", self.singular_values.map(format_f64).join(", "));
        let _ = writeln!(out, "relations: {}", triples(&self.relations));
        let _ = writeln!(out, "orthogonal_family_dim: {}", self.orthogonal_family_dim);
        let _ = writeln!(out, "orthogonal_family: {family}");
        let _ = writeln!(out, "support_condition: {}", self.support_condition);
        let _ = writeln!(out, "nontrivial_combinations: {}", triples(&self.nontrivial_combinations));
        let _ = writeln!(out, "trivial_combinations: {}", triples(&self.trivial_combinations));
        let _ = writeln!(out, "trivial_meaning: dependence on these combinations is at most a phase factor");
        let _ = writeln!(out, "two_equal: {}", self.two_equal);
        let _ = writeln!(out, "near_degenerate: {}", self.near_degenerate);
        out
    }
}

/// Classifies the normals of three hyperplanes by their linear relations.
///
/// `tol` is the singular-value cutoff relative to the largest singular value.
///
/// ```
/// use slmdecay::minkowski::{eta_from_velocity, Velocity3};
/// use slmdecay::relations::{classify_triple, CaseId};
///
/// let eta = |x: f64| eta_from_velocity(&Velocity3::new(x, 0.0, 0.0).unwrap());
/// let report = classify_triple(&eta(0.0), &eta(0.3), &eta(0.6), 1e-9).unwrap();
/// assert_eq!(report.case_id, CaseId::Case2);
/// assert_eq!(report.orthogonal_family_dim, 2);
/// assert_eq!(report.nontrivial_combinations.len(), 1);
/// ```
pub fn classify_triple(
    eta: &UnitTimelike,
    eta_p: &UnitTimelike,
    eta_pp: &UnitTimelike,
    tol: f64,
) -> Result<CaseReport> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameters(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let etas = [eta.vec(), eta_p.vec(), eta_pp.vec()];
    for e in &etas {
        UnitTimelike::new(*e)?;
    }
    let span = analyze_span(&etas, tol)?;
    let rank = span.rank;
    if !(1..=3).contains(&rank) {
        return Err(Error::InvalidEta(format!("normals have rank {rank}")));
    }

    // Columns are the normals; right singular vectors of the smallest
    // singular values span the relation space.
    let a = Matrix4x3::from_fn(|r, c| etas[c].components()[r]);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let singular_values = [svd.singular_values[order[0]], svd.singular_values[order[1]], svd.singular_values[order[2]]];
    let null: Vec<[f64; 3]> = order[rank..].iter().map(|&i| [v_t[(i, 0)], v_t[(i, 1)], v_t[(i, 2)]]).collect();
    let zero_tol = 10.0 * tol;
    let relations = canonical_basis(&null, zero_tol);

    let case_id = match rank {
        3 => CaseId::Case1,
        2 => CaseId::Case2,
        _ => CaseId::Case3,
    };
    let orthogonal_family_dim = span.complement.len();
    let support_condition = match case_id {
        CaseId::Case3 => "p - p' = 0 (all components)".to_string(),
        _ => format!("(p - p').a = 0 for every a in the {orthogonal_family_dim}-dimensional orthogonal family"),
    };
    let two_equal = case_id == CaseId::Case2 && relations[0].iter().filter(|c| c.abs() <= zero_tol).count() == 1;
    let nontrivial_combinations = relations.clone();
    let trivial_combinations = complement_basis(&nontrivial_combinations);

    Ok(CaseReport {
        case_id,
        rank,
        singular_values,
        relations,
        orthogonal_family_dim,
        orthogonal_family: span.complement,
        support_condition,
        nontrivial_combinations,
        trivial_combinations,
        two_equal,
        near_degenerate: span.near_degenerate,
        zero_tol,
    })
}

/// Reduced row-echelon form of the basis, each row then scaled to unit norm
/// with its leading coefficient positive. Entries below `zero_tol` are
/// flushed to zero.
fn canonical_basis(basis: &[[f64; 3]], zero_tol: f64) -> Vec<[f64; 3]> {
    let mut rows: Vec<[f64; 3]> = basis.to_vec();
    let mut pivot_row = 0;
    for col in 0..3 {
        if pivot_row == rows.len() {
            break;
        }
        let Some(best) = (pivot_row..rows.len()).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
        else {
            break;
        };
        if rows[best][col].abs() <= zero_tol {
            continue;
        }
        rows.swap(pivot_row, best);
        let p = rows[pivot_row][col];
        rows[pivot_row].iter_mut().for_each(|x| *x /= p);
        for r in 0..rows.len() {
            if r != pivot_row {
                let (f, pivot) = (rows[r][col], rows[pivot_row]);
                for (x, y) in rows[r].iter_mut().zip(pivot) {
                    *x -= f * y;
                }
            }
        }
        pivot_row += 1;
    }
    rows.iter()
        .map(|row| {
            let mut row = row.map(|x| if x.abs() <= zero_tol { 0.0 } else { x });
            let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            let lead = row.iter().copied().find(|x| *x != 0.0).unwrap_or(1.0);
            let k = lead.signum() / n;
            row.iter_mut().for_each(|x| *x *= k);
            row
        })
        .collect()
}

/// Orthonormal basis of the orthogonal complement in R^3, from Gram-Schmidt
/// on the standard basis after the given vectors.
fn complement_basis(vectors: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut done: Vec<[f64; 3]> = Vec::new();
    for v in vectors {
        let mut w = *v;
        for b in &done {
            let c = dot(&w, b);
            (0..3).for_each(|i| w[i] -= c * b[i]);
        }
        let n = dot(&w, &w).sqrt();
        if n > 1e-12 {
            done.push(w.map(|x| x / n));
        }
    }
    let start = done.len();
    let id = Matrix3::<f64>::identity();
    for k in 0..3 {
        if done.len() == 3 {
            break;
        }
        let mut w = [id[(0, k)], id[(1, k)], id[(2, k)]];
        for b in &done {
            let c = dot(&w, b);
            (0..3).for_each(|i| w[i] -= c * b[i]);
        }
        let n = dot(&w, &w).sqrt();
        if n > 1e-8 {
            let mut w = w.map(|x| x / n);
            if w.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0) < 0.0 {
                w = w.map(|x| -x);
            }
            done.push(w.map(|x| if x.abs() < 1e-15 { 0.0 } else { x }));
        }
    }
    done.split_off(start)
}

/// True if `(p - p')` satisfies the report's support condition within `tol`:
/// Lorentz-orthogonal to every vector of the orthogonal family, or (Case 3)
/// zero componentwise.
pub fn support_condition_check(report: &CaseReport, p: &FourVector, p_p: &FourVector, tol: f64) -> bool {
    let d = *p - *p_p;
    match report.case_id {
        CaseId::Case3 => d.components().iter().all(|c| c.abs() <= tol),
        _ => report.orthogonal_family.iter().all(|a| d.dot(a).abs() <= tol),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairCategory {
    BothZero,
    EqualNonzero,
    CollinearUnequal,
    NonCollinear,
}

impl PairCategory {
    pub fn name(self) -> &'static str {
        match self {
            PairCategory::BothZero => "BothZero",
            PairCategory::EqualNonzero => "EqualNonzero",
            PairCategory::CollinearUnequal => "CollinearUnequal",
            PairCategory::NonCollinear => "NonCollinear",
        }
    }

    /// Whether the instantaneous-projector matrix element between velocity
    /// eigenstates in this category can depend non-trivially on time.
    pub fn time_dependent(self) -> bool {
        matches!(self, PairCategory::BothZero | PairCategory::CollinearUnequal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VelocityPairVerdict {
    pub category: PairCategory,
    pub time_dependent: bool,
}

impl VelocityPairVerdict {
    pub fn new(category: PairCategory) -> Self {
        VelocityPairVerdict { category, time_dependent: category.time_dependent() }
    }

    pub fn to_record(&self) -> String {
        format!("category: {}\ntime_dependent: {}\n", self.category.name(), self.time_dependent)
    }
}

/// Classifies a pair of velocity eigenstates by the geometry of their
/// velocities.
///
/// Zero test `|u| < tol`, equality `|u - u'| < tol`, collinearity
/// `|u x u'| < tol (1 + |u| |u'|)`.
pub fn classify_velocity_pair(u: &Velocity3, u_p: &Velocity3, tol: f64) -> Result<VelocityPairVerdict> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameters(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    for v in [u, u_p] {
        if v.speed() >= 1.0 {
            return Err(Error::VelocityNotSubluminal(v.speed()));
        }
    }
    let (a, b) = (u.components(), u_p.components());
    let diff = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let cross = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let category = if u.speed() < tol && u_p.speed() < tol {
        PairCategory::BothZero
    } else if diff < tol {
        PairCategory::EqualNonzero
    } else if cross < tol * (1.0 + u.speed() * u_p.speed()) {
        PairCategory::CollinearUnequal
    } else {
        PairCategory::NonCollinear
    };
    Ok(VelocityPairVerdict::new(category))
}

/// The same verdict read off [`classify_triple`] applied to
/// `(eta(u), eta(u'), rest)`: the rest normal is the instantaneous
/// hyperplane, and time dependence means a non-trivial combination involving
/// its offset.
pub fn velocity_pair_from_triple(
    u: &Velocity3,
    u_p: &Velocity3,
    tol: f64,
) -> Result<(VelocityPairVerdict, CaseReport)> {
    let report = classify_triple(&eta_from_velocity(u), &eta_from_velocity(u_p), &UnitTimelike::REST, tol)?;
    let category = match report.case_id {
        CaseId::Case3 => PairCategory::BothZero,
        CaseId::Case1 => PairCategory::NonCollinear,
        CaseId::Case2 if report.depends_on_third() => PairCategory::CollinearUnequal,
        CaseId::Case2 => PairCategory::EqualNonzero,
    };
    let verdict = VelocityPairVerdict { category, time_dependent: report.depends_on_third() };
    Ok((verdict, report))
}
