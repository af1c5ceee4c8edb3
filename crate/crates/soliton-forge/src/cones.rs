//! Frequency-cone analysis of operator outputs, theorem-style
//! classification, and reconstruction of resonant parameters from the
//! cleared y-Wronskian.
//!
//! A polynomial sits in the n-dimensional nonnegative cone (strict mode)
//! when its grouping by the chosen variable has at most n entries, no
//! polynomial prefactors, nonnegative frequencies and syntactically
//! positive coefficient polynomials. Signed mode keeps only the entry
//! count and prefactor requirements; it is used where the classified data
//! legitimately carries mixed signs (the heat and Airy images of a
//! 2-soliton). Syntactic coefficient positivity is a sufficient condition
//! for pointwise positivity of exponential sums and matches exactly what
//! the phase constructors produce.
//!
//! All classification here is syntactic: it checks the functional
//! equations and cone inclusions, not the uniqueness hypotheses (which
//! prescribe Cauchy data and are out of scope).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expalg::{rational_sqrt, AlgebraError, ExpPoly};
use crate::operators::{self, OperatorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("phase must be non-zero")]
    ZeroPhase,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("decomposition has {entries} entries but M={m} requires {expected}")]
    WrongEntryCount { entries: usize, m: usize, expected: usize },
    #[error("M must be at least 2")]
    MTooSmall,
    #[error("entry {0} is not a single positive exponential term")]
    NonSingleTermCoefficient(usize),
    #[error("entry {0} has a non-positive coefficient")]
    NonPositiveCoefficient(usize),
    #[error("entry {0} carries a polynomial prefactor")]
    PolynomialPrefactor(usize),
    #[error("pairwise sums are inconsistent: {0}")]
    InconsistentSums(String),
}

/// One frequency slice of a decomposition: `coeff * var^degree * e^{freq*var}`
/// with `coeff` over the remaining variables.
#[derive(Debug, Clone)]
pub struct ConeEntry {
    pub freq: BigRational,
    pub coeff: ExpPoly,
    pub poly_degree: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConeFlags {
    pub all_freq_nonneg: bool,
    pub all_coeff_syntactically_positive: bool,
    pub no_poly_prefactor: bool,
}

/// Grouping of a polynomial by its exponential frequency in one variable,
/// with the cone-membership flags. Frequencies are strictly increasing.
#[derive(Debug, Clone)]
pub struct ConeDecomposition {
    pub var: String,
    pub entries: Vec<ConeEntry>,
    pub flags: ConeFlags,
}

impl ConeDecomposition {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Membership in the nonnegative cone of dimension at most `n`.
    pub fn in_cone_strict(&self, n: usize) -> bool {
        self.entries.len() <= n
            && self.flags.no_poly_prefactor
            && self.flags.all_freq_nonneg
            && self.flags.all_coeff_syntactically_positive
    }

    /// Signed-span membership: entry count and prefactor checks only.
    pub fn in_span_signed(&self, n: usize) -> bool {
        self.entries.len() <= n && self.flags.no_poly_prefactor
    }
}

pub fn decompose(p: &ExpPoly, var: &str) -> Result<ConeDecomposition, ConeError> {
    let groups = p.group_by_frequency(var)?;
    let entries: Vec<ConeEntry> = groups
        .into_iter()
        .map(|g| ConeEntry { freq: g.freq, coeff: g.coeff, poly_degree: g.poly_degree })
        .collect();
    let flags = ConeFlags {
        all_freq_nonneg: entries.iter().all(|e| !e.freq.is_negative()),
        all_coeff_syntactically_positive: entries
            .iter()
            .all(|e| e.coeff.terms().iter().all(|t| t.coeff.is_positive())),
        no_poly_prefactor: entries.iter().all(|e| e.poly_degree == 0),
    };
    Ok(ConeDecomposition { var: var.to_string(), entries, flags })
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremFlags {
    /// Vertical (KdV) soliton characterization: H = Ai = W_y = 0.
    pub kdv_vertical: bool,
    /// Oblique line soliton: H = Ai = 0 and the cleared Wronskians share a
    /// single strictly positive y-frequency slice.
    pub oblique_line: bool,
    /// Resonant multi-soliton order M, when H = Ai = 0, ΘW_y = ΘW_x lies in
    /// the strict cone and its dimension is a triangular number M(M-1)/2.
    pub resonant_m: Option<u64>,
    /// 2-soliton conditions (1)-(3); see `two_soliton_conditions`.
    pub two_soliton: bool,
    /// (1) H, Ai in the signed span of dimension 4; (2) ΘW_y, ΘW_x in the
    /// strict cone of dimension 5; (3) Ai = (3/2) ∂x H exactly.
    pub two_soliton_conditions: [bool; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub heat_zero: bool,
    pub airy_zero: bool,
    pub wx_eq_wy: bool,
    pub wy_cone_dim: usize,
    pub wy_strict_cone: bool,
    pub heat_span_dim: usize,
    pub heat_strict_cone: bool,
    pub airy_span_dim: usize,
    pub airy_strict_cone: bool,
    pub airy_heat_identity: bool,
    pub theorem_flags: TheoremFlags,
    pub notes: Vec<String>,
}

fn triangular_order(dim: usize) -> Option<u64> {
    // dim = M(M-1)/2 for integer M >= 1; dim 0 gives M = 1
    let disc = 8 * dim as u64 + 1;
    let root = (disc as f64).sqrt().round() as u64;
    if root * root == disc && root % 2 == 1 {
        Some(root.div_ceil(2))
    } else {
        None
    }
}

/// Evaluates the hypothesis sets of the classification theorems on a phase
/// over `(t, x, y)`. Purely syntactic; no uniqueness claim.
pub fn classify(theta: &ExpPoly) -> Result<ClassificationReport, ConeError> {
    if theta.is_zero() {
        return Err(ConeError::ZeroPhase);
    }
    let h = operators::heat(theta)?.expr;
    let ai = operators::airy(theta)?.expr;
    let wx = operators::wx_cleared(theta)?.expr;
    let wy = operators::wy_cleared(theta)?.expr;

    let heat_zero = h.is_zero();
    let airy_zero = ai.is_zero();
    let wx_eq_wy = wx == wy;

    let wy_dec = decompose(&wy, "y")?;
    let wx_dec = decompose(&wx, "y")?;
    let h_dec = decompose(&h, "y")?;
    let ai_dec = decompose(&ai, "y")?;

    // the 2-soliton dispersion identity Ai(Θ) = (3/2) ∂x H(Θ)
    let three_halves = BigRational::new(BigInt::from(3), BigInt::from(2));
    let airy_heat_identity = ai == h.diff("x", 1)?.scale(&three_halves);

    let kdv_vertical = heat_zero && airy_zero && wy.is_zero();

    let oblique_line = heat_zero
        && airy_zero
        && wx_eq_wy
        && wy_dec.dim() <= 1
        && (wy_dec.dim() == 0
            || (wy_dec.in_cone_strict(1) && wy_dec.entries[0].freq.is_positive()));

    let resonant_m = if heat_zero && airy_zero && wx_eq_wy && wy_dec.in_cone_strict(usize::MAX) {
        triangular_order(wy_dec.dim())
    } else {
        None
    };

    let cond1 = h_dec.in_span_signed(4) && ai_dec.in_span_signed(4);
    let cond2 = wy_dec.in_cone_strict(5) && wx_dec.in_cone_strict(5);
    let cond3 = airy_heat_identity;
    let two_soliton = cond1 && cond2 && cond3;

    let mut notes = Vec::new();
    if two_soliton && heat_zero {
        notes.push(
            "two-soliton conditions hold but H = 0: phase is in the resonant class".to_string(),
        );
    }
    if kdv_vertical || oblique_line || resonant_m.is_some() || two_soliton {
        notes.push(
            "flags check functional identities and cone inclusions only; prescribed Cauchy data is not examined".to_string(),
        );
    }

    Ok(ClassificationReport {
        heat_zero,
        airy_zero,
        wx_eq_wy,
        wy_cone_dim: wy_dec.dim(),
        wy_strict_cone: wy_dec.in_cone_strict(usize::MAX),
        heat_span_dim: h_dec.dim(),
        heat_strict_cone: h_dec.in_cone_strict(usize::MAX),
        airy_span_dim: ai_dec.dim(),
        airy_strict_cone: ai_dec.in_cone_strict(usize::MAX),
        airy_heat_identity,
        theorem_flags: TheoremFlags {
            kdv_vertical,
            oblique_line,
            resonant_m,
            two_soliton,
            two_soliton_conditions: [cond1, cond2, cond3],
        },
        notes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonantParameters {
    pub k: Vec<BigRational>,
    pub a: Vec<BigRational>,
}

/// Number of spectral parameters a decomposition with this many entries
/// could come from, if any: entries = M(M-1)/2.
pub fn infer_resonant_order(entries: usize) -> Option<usize> {
    triangular_order(entries).map(|m| m as usize).filter(|&m| m >= 2)
}

struct EntryData {
    y: BigRational,
    x: BigRational,
    t: BigRational,
    b: BigRational,
}

fn entry_data(dec: &ConeDecomposition) -> Result<Vec<EntryData>, ReconstructError> {
    let mut out = Vec::with_capacity(dec.entries.len());
    for (i, e) in dec.entries.iter().enumerate() {
        if e.poly_degree != 0 {
            return Err(ReconstructError::PolynomialPrefactor(i));
        }
        if e.coeff.term_count() != 1 {
            return Err(ReconstructError::NonSingleTermCoefficient(i));
        }
        let term = &e.coeff.terms()[0];
        if term.mono.iter().any(|&m| m != 0) {
            return Err(ReconstructError::NonSingleTermCoefficient(i));
        }
        if !term.coeff.is_positive() {
            return Err(ReconstructError::NonPositiveCoefficient(i));
        }
        // coeff is over the remaining variables (t, x)
        let names = e.coeff.vars().names();
        let t_idx = names.iter().position(|n| n == "t").unwrap_or(0);
        let x_idx = names.iter().position(|n| n == "x").unwrap_or(1);
        out.push(EntryData {
            y: e.freq.clone(),
            x: term.freq[x_idx].clone(),
            t: term.freq[t_idx].clone(),
            b: term.coeff.clone(),
        });
    }
    Ok(out)
}

/// Reconstructs the points of a strictly increasing sequence from the
/// multiset of its pairwise sums `{p_i + p_j : i < j}` (n >= 3), returning
/// every consistent candidate. Exhaustive backtracking over the placement
/// of the third-smallest point; fine for n <= 8.
fn turnpike_pair_sums(sums: &[BigRational]) -> Vec<Vec<BigRational>> {
    let len = sums.len();
    let n = match infer_resonant_order(len) {
        Some(m) if m >= 3 => m,
        _ => return Vec::new(),
    };
    let mut sorted = sums.to_vec();
    sorted.sort();
    let two = BigRational::from_integer(BigInt::from(2));

    let mut results: Vec<Vec<BigRational>> = Vec::new();
    // p1+p2 is the smallest sum and p1+p3 the second smallest; branch on
    // which remaining sum equals p2+p3.
    let mut seen_branches: Vec<BigRational> = Vec::new();
    for idx in 2..len {
        let d = &sorted[idx];
        if seen_branches.contains(d) {
            continue;
        }
        seen_branches.push(d.clone());
        let p1 = (&sorted[0] + &sorted[1] - d) / &two;
        let p2 = &sorted[0] - &p1;
        let p3 = &sorted[1] - &p1;
        if !(p1 < p2 && p2 < p3) {
            continue;
        }
        let mut remaining = sorted.clone();
        let mut points = vec![p1, p2, p3];
        let mut ok = true;
        for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let s = &points[a] + &points[b];
            match remaining.iter().position(|v| *v == s) {
                Some(pos) => {
                    remaining.remove(pos);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        while ok && points.len() < n {
            // the smallest unexplained sum must be p1 + (next point)
            let next = &remaining[0] - &points[0];
            if next <= *points.last().unwrap() {
                ok = false;
                break;
            }
            for p in &points {
                let s = p + &next;
                match remaining.iter().position(|v| *v == s) {
                    Some(pos) => {
                        remaining.remove(pos);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            points.push(next);
        }
        if ok && remaining.is_empty() && !results.contains(&points) {
            results.push(points);
        }
    }
    results
}

/// Recovers `(k, a)` of a resonant phase from the decomposition of its
/// cleared y-Wronskian: y-frequencies are the pairwise sums `k_i² + k_j²`
/// (solved by turnpike with backtracking), the coefficient terms'
/// x-frequencies `k_i + k_j` fix the signs and the assignment, and the
/// multiplicative system `a_i a_j (k_j² - k_i²)² = b_ij` is solved exactly.
/// For `M = 2` the gauge is fixed by `a_1 = 1`.
pub fn reconstruct_resonant(
    dec: &ConeDecomposition,
    m: usize,
) -> Result<ResonantParameters, ReconstructError> {
    if m < 2 {
        return Err(ReconstructError::MTooSmall);
    }
    let expected = m * (m - 1) / 2;
    if dec.entries.len() != expected {
        return Err(ReconstructError::WrongEntryCount {
            entries: dec.entries.len(),
            m,
            expected,
        });
    }
    let entries = entry_data(dec)?;

    if m == 2 {
        return reconstruct_m2(&entries[0]);
    }

    let sums: Vec<BigRational> = entries.iter().map(|e| e.y.clone()).collect();
    let candidates = turnpike_pair_sums(&sums);
    if candidates.is_empty() {
        return Err(ReconstructError::InconsistentSums(
            "y-frequencies are not the pairwise sums of squares of a rational sequence".into(),
        ));
    }
    for squares in candidates {
        if let Some(params) = try_candidate(&squares, &entries, m) {
            return Ok(params);
        }
    }
    Err(ReconstructError::InconsistentSums(
        "no sign assignment matches the x- and t-frequencies".into(),
    ))
}

fn reconstruct_m2(e: &EntryData) -> Result<ResonantParameters, ReconstructError> {
    let two = BigRational::from_integer(BigInt::from(2));
    // s = k1+k2, q = k1²+k2²  =>  (k2-k1)² = 2q - s²
    let disc = &two * &e.y - &e.x * &e.x;
    let d = rational_sqrt(&disc).ok_or_else(|| {
        ReconstructError::InconsistentSums("(k2-k1)² is not a rational square".into())
    })?;
    if d.is_zero() {
        return Err(ReconstructError::InconsistentSums("k1 = k2 is degenerate".into()));
    }
    let k1 = (&e.x - &d) / &two;
    let k2 = (&e.x + &d) / &two;
    if &k1 * &k1 * &k1 + &k2 * &k2 * &k2 != e.t {
        return Err(ReconstructError::InconsistentSums(
            "t-frequency does not match k1³ + k2³".into(),
        ));
    }
    let den = &k2 * &k2 - &k1 * &k1;
    if den.is_zero() {
        return Err(ReconstructError::InconsistentSums(
            "k1² = k2² is outside the image of the y-Wronskian".into(),
        ));
    }
    let a2 = &e.b / (&den * &den);
    Ok(ResonantParameters { k: vec![k1, k2], a: vec![BigRational::one(), a2] })
}

fn try_candidate(
    squares: &[BigRational],
    entries: &[EntryData],
    m: usize,
) -> Option<ResonantParameters> {
    let roots: Vec<BigRational> =
        squares.iter().map(rational_sqrt).collect::<Option<Vec<_>>>()?;
    // enumerate sign choices; zero roots admit only one sign
    let nonzero: Vec<usize> =
        (0..m).filter(|&i| !roots[i].is_zero()).collect();
    for mask in 0u32..(1 << nonzero.len()) {
        let mut k: Vec<BigRational> = roots.clone();
        for (bit, &i) in nonzero.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                k[i] = -k[i].clone();
            }
        }
        k.sort();
        if k.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        if let Some(params) = solve_amplitudes(&k, entries, m) {
            return Some(params);
        }
    }
    None
}

fn solve_amplitudes(
    k: &[BigRational],
    entries: &[EntryData],
    m: usize,
) -> Option<ResonantParameters> {
    // map each entry to its (i, j) pair through the exact frequency triple
    let mut c = vec![vec![BigRational::zero(); m]; m];
    let mut matched = vec![false; entries.len()];
    for i in 0..m {
        for j in (i + 1)..m {
            let y = &k[i] * &k[i] + &k[j] * &k[j];
            let x = &k[i] + &k[j];
            let t = &k[i] * &k[i] * &k[i] + &k[j] * &k[j] * &k[j];
            let pos = entries.iter().enumerate().position(|(e_idx, e)| {
                !matched[e_idx] && e.y == y && e.x == x && e.t == t
            })?;
            matched[pos] = true;
            let den = &k[j] * &k[j] - &k[i] * &k[i];
            if den.is_zero() {
                return None;
            }
            c[i][j] = &entries[pos].b / (&den * &den);
            if !c[i][j].is_positive() {
                return None;
            }
        }
    }
    // a_1 = sqrt(c_01 c_02 / c_12), a_j = c_0j / a_1
    let a1_sq = &c[0][1] * &c[0][2] / &c[1][2];
    let a1 = rational_sqrt(&a1_sq)?;
    if a1.is_zero() {
        return None;
    }
    let mut a = vec![a1.clone()];
    a.extend(c[0][1..m].iter().map(|c0j| c0j / &a1));
    for i in 0..m {
        for j in (i + 1)..m {
            if i == 0 {
                continue;
            }
            if &a[i] * &a[j] != c[i][j] {
                return None;
            }
        }
    }
    if a.iter().any(|v| !v.is_positive()) {
        return None;
    }
    Some(ResonantParameters { k: k.to_vec(), a })
}

/// Convenience route used by the CLI: decompose the cleared y-Wronskian of
/// a phase and reconstruct the resonant parameters.
pub fn reconstruct_from_theta(
    theta: &ExpPoly,
    m: usize,
) -> Result<ResonantParameters, ConeReconstructError> {
    let wy = operators::wy_cleared(theta).map_err(ConeError::from)?;
    let dec = decompose(&wy.expr, "y")?;
    Ok(reconstruct_resonant(&dec, m)?)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeReconstructError {
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expalg::{rat, VarSet};
    use crate::operators::wy_cleared;
    use crate::phases::{
        galilean_theta, kdv_vertical, line_soliton, resonant, theta_exponential, two_soliton,
    };

    #[test]
    fn decompose_line_wy_is_one_dimensional() {
        let p = line_soliton(&rat(1, 1), &rat(1, 1), &rat(1, 1), &rat(2, 1)).unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr;
        let dec = decompose(&wy, "y").unwrap();
        assert_eq!(dec.dim(), 1);
        assert_eq!(dec.entries[0].freq, rat(5, 1));
        assert!(dec.in_cone_strict(1));
        // coefficient is 9 e^{9t + 3x} over (t, x)
        let expected = ExpPoly::exponential(VarSet::kdv(), vec![rat(9, 1), rat(3, 1)])
            .unwrap()
            .scale(&rat(9, 1));
        assert_eq!(dec.entries[0].coeff, expected);
    }

    #[test]
    fn decompose_resonant_m3_has_dim_three() {
        let p = resonant(
            &[rat(1, 1), rat(1, 1), rat(1, 1)],
            &[rat(-3, 10), rat(0, 1), rat(1, 2)],
        )
        .unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr;
        let dec = decompose(&wy, "y").unwrap();
        assert_eq!(dec.dim(), 3);
        assert!(dec.in_cone_strict(3));
    }

    #[test]
    fn decompose_generic_two_soliton_has_dim_five() {
        let p = two_soliton(&rat(-1, 1), &rat(-1, 3), &rat(1, 2), &rat(5, 4)).unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr;
        let dec = decompose(&wy, "y").unwrap();
        assert_eq!(dec.dim(), 5);
        assert!(dec.in_cone_strict(5));
    }

    #[test]
    fn symmetric_two_soliton_collapses_to_dim_three() {
        // k2² + k4² = k1² + k3² merges y-slices for the Fig. 1 parameters
        let p = two_soliton(&rat(-1, 1), &rat(-1, 2), &rat(1, 2), &rat(1, 1)).unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr;
        let dec = decompose(&wy, "y").unwrap();
        assert_eq!(dec.dim(), 3);
        assert!(dec.in_cone_strict(5));
    }

    #[test]
    fn polynomial_prefactor_is_flagged() {
        let y = ExpPoly::var(VarSet::kp(), "y").unwrap();
        let e2y =
            ExpPoly::exponential(VarSet::kp(), vec![rat(0, 1), rat(0, 1), rat(2, 1)]).unwrap();
        let dec = decompose(&y.mul(&e2y).unwrap(), "y").unwrap();
        assert!(!dec.flags.no_poly_prefactor);
        assert!(!dec.in_cone_strict(1));
        assert!(!dec.in_span_signed(1));
    }

    #[test]
    fn gauge_multiplication_shifts_wy_by_double_frequency() {
        let p = resonant(&[rat(1, 1), rat(2, 1)], &[rat(-1, 2), rat(1, 1)]).unwrap();
        let eky =
            ExpPoly::exponential(VarSet::kp(), vec![rat(0, 1), rat(0, 1), rat(3, 1)]).unwrap();
        let gauged = p.theta.mul(&eky).unwrap();
        let e2ky =
            ExpPoly::exponential(VarSet::kp(), vec![rat(0, 1), rat(0, 1), rat(6, 1)]).unwrap();
        let lhs = wy_cleared(&gauged).unwrap().expr;
        let rhs = wy_cleared(&p.theta).unwrap().expr.mul(&e2ky).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn classify_vertical_phase() {
        let p = kdv_vertical(&rat(1, 2)).unwrap();
        let r = classify(&p.theta).unwrap();
        assert!(r.heat_zero && r.airy_zero);
        assert!(r.theorem_flags.kdv_vertical);
        assert!(r.theorem_flags.oblique_line);
        assert_eq!(r.theorem_flags.resonant_m, Some(1));
        assert_eq!(r.wy_cone_dim, 0);
    }

    #[test]
    fn classify_oblique_line() {
        let p = line_soliton(&rat(1, 1), &rat(1, 1), &rat(-1, 2), &rat(1, 1)).unwrap();
        let r = classify(&p.theta).unwrap();
        assert!(!r.theorem_flags.kdv_vertical);
        assert!(r.theorem_flags.oblique_line);
        assert_eq!(r.wy_cone_dim, 1);
        assert_eq!(r.theorem_flags.resonant_m, Some(2));
    }

    #[test]
    fn classify_resonant_m3() {
        let p = resonant(
            &[rat(1, 1), rat(1, 1), rat(1, 1)],
            &[rat(-3, 10), rat(0, 1), rat(1, 2)],
        )
        .unwrap();
        let r = classify(&p.theta).unwrap();
        assert_eq!(r.theorem_flags.resonant_m, Some(3));
        assert!(!r.theorem_flags.oblique_line);
    }

    #[test]
    fn classify_two_soliton() {
        let p = two_soliton(&rat(-1, 1), &rat(-1, 2), &rat(1, 2), &rat(1, 1)).unwrap();
        let r = classify(&p.theta).unwrap();
        assert!(!r.heat_zero && !r.airy_zero);
        assert!(r.airy_heat_identity);
        assert!(r.theorem_flags.two_soliton);
        assert_eq!(r.theorem_flags.two_soliton_conditions, [true, true, true]);
        assert_eq!(r.theorem_flags.resonant_m, None);
    }

    #[test]
    fn classify_galilean_vertical_loses_heat() {
        let p = kdv_vertical(&rat(1, 1)).unwrap();
        let tb = galilean_theta(&p.theta, &rat(1, 3)).unwrap();
        let r = classify(&tb).unwrap();
        assert!(!r.heat_zero);
        assert!(!r.theorem_flags.kdv_vertical);
    }

    #[test]
    fn wy_rigidity_over_constructed_corpus() {
        // zero exactly for vertical phases and single exponentials
        assert!(wy_cleared(&kdv_vertical(&rat(2, 3)).unwrap().theta).unwrap().is_zero());
        assert!(wy_cleared(&theta_exponential(&rat(1, 2))).unwrap().is_zero());
        let line = line_soliton(&rat(1, 1), &rat(1, 1), &rat(1, 3), &rat(1, 2)).unwrap();
        assert!(!wy_cleared(&line.theta).unwrap().is_zero());
        let res = resonant(
            &[rat(1, 1), rat(1, 1), rat(1, 1)],
            &[rat(-1, 1), rat(0, 1), rat(1, 1)],
        )
        .unwrap();
        assert!(!wy_cleared(&res.theta).unwrap().is_zero());
    }

    #[test]
    fn turnpike_recovers_squares() {
        // pairwise sums {5, 17, 20} come from {1, 4, 16}
        let sums = vec![rat(5, 1), rat(17, 1), rat(20, 1)];
        let res = turnpike_pair_sums(&sums);
        assert_eq!(res, vec![vec![rat(1, 1), rat(4, 1), rat(16, 1)]]);
    }

    #[test]
    fn turnpike_rejects_inconsistent_sums() {
        let sums = vec![rat(5, 1), rat(17, 1), rat(21, 1)];
        // p1 = 1/2, p2 = 9/2, p3 = 33/2 would give sums {5, 17, 21}; all
        // consistent triples are found, so this has a solution
        assert!(!turnpike_pair_sums(&sums).is_empty());
        // but a multiset that cannot be pairwise sums of 4 points fails
        let sums4 = vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1), rat(5, 1), rat(100, 1)];
        assert!(turnpike_pair_sums(&sums4).is_empty());
    }

    #[test]
    fn reconstruct_known_resonant_example() {
        let k = vec![rat(1, 1), rat(2, 1), rat(4, 1)];
        let a = vec![rat(1, 1), rat(1, 1), rat(1, 1)];
        let p = resonant(&a, &k).unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr;
        let dec = decompose(&wy, "y").unwrap();
        let rec = reconstruct_resonant(&dec, 3).unwrap();
        assert_eq!(rec.k, k);
        assert_eq!(rec.a, a);
    }

    #[test]
    fn reconstruct_fig1_y_soliton() {
        let k = vec![rat(-3, 10), rat(0, 1), rat(1, 2)];
        let a = vec![rat(1, 1), rat(2, 1), rat(1, 3)];
        let p = resonant(&a, &k).unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr;
        let dec = decompose(&wy, "y").unwrap();
        let rec = reconstruct_resonant(&dec, 3).unwrap();
        assert_eq!(rec.k, k);
        assert_eq!(rec.a, a);
    }

    #[test]
    fn reconstruct_m2_gauge_normalization() {
        let k = vec![rat(1, 2), rat(5, 4)];
        let a = vec![rat(2, 1), rat(3, 1)];
        let p = resonant(&a, &k).unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr;
        let dec = decompose(&wy, "y").unwrap();
        let rec = reconstruct_resonant(&dec, 2).unwrap();
        assert_eq!(rec.k, k);
        assert_eq!(rec.a[0], rat(1, 1));
        // gauge: a1 a2 preserved
        assert_eq!(&rec.a[0] * &rec.a[1], rat(6, 1));
    }

    #[test]
    fn reconstruct_rejects_two_soliton_decomposition() {
        let p = two_soliton(&rat(-1, 1), &rat(-1, 3), &rat(1, 2), &rat(5, 4)).unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr;
        let dec = decompose(&wy, "y").unwrap();
        assert_eq!(dec.dim(), 5);
        for m in 2..=5 {
            assert!(matches!(
                reconstruct_resonant(&dec, m),
                Err(ReconstructError::WrongEntryCount { .. })
            ));
        }
        assert_eq!(infer_resonant_order(5), None);
        assert_eq!(infer_resonant_order(3), Some(3));
        assert_eq!(infer_resonant_order(6), Some(4));
    }

    #[test]
    fn reconstruct_rejects_sign_flipped_entry() {
        let p = resonant(&[rat(1, 1), rat(1, 1)], &[rat(1, 2), rat(5, 4)]).unwrap();
        let wy = wy_cleared(&p.theta).unwrap().expr.neg();
        let dec = decompose(&wy, "y").unwrap();
        assert!(matches!(
            reconstruct_resonant(&dec, 2),
            Err(ReconstructError::NonPositiveCoefficient(_))
        ));
    }

    #[test]
    fn airy_heat_identity_false_on_generic_phase() {
        let ex = ExpPoly::exponential(VarSet::kp(), vec![rat(0, 1), rat(1, 1), rat(0, 1)]).unwrap();
        let ey = ExpPoly::exponential(VarSet::kp(), vec![rat(0, 1), rat(0, 1), rat(1, 1)]).unwrap();
        let r = classify(&ex.add(&ey).unwrap()).unwrap();
        assert!(!r.airy_heat_identity);
        assert!(!r.theorem_flags.two_soliton);
    }
}
