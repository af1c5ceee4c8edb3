//! Constructors for the concrete soliton phases and the symmetry transforms
//! acting on them.
//!
//! Every constructed phase is a positive sum of pure exponentials over
//! `(t, x, y)` with building blocks `exp(k x + k^2 y + k^3 t)`, so
//! `Θ(point) > 0` holds for all real points. The two-soliton is stored in
//! its expanded four-term form and cross-checked against the Wronskian
//! constructor in tests rather than defined through it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expalg::{AlgebraError, ExpPoly, Term, VarSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhaseError {
    #[error("amplitude parameters must be strictly positive")]
    NonPositiveAmplitude,
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("spectral parameters must be strictly increasing")]
    Unsorted,
    #[error("at least one input phase is required")]
    EmptyInput,
    #[error("variable set must contain `{0}`")]
    MissingVar(&'static str),
    #[error("scaling parameter must be strictly positive")]
    NonPositiveScale,
    #[error("y_sign must be +1 or -1")]
    BadSign,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Serializable description of a constructed phase; `to_json` produces the
/// `{kind, params, source}` object used by the CLI reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseSpec {
    Line { a1: String, a2: String, k1: String, k2: String },
    KdvVertical { k: String },
    Resonant { a: Vec<String>, k: Vec<String> },
    ResonantGeneral { a1: Vec<String>, a2: Vec<String>, k: Vec<String> },
    TwoSoliton { k: Vec<String>, checked: bool },
    Wronskian { source: Vec<PhaseSpec> },
    Galilean { beta: String, source: Box<PhaseSpec> },
    Scale { lambda: String, y_sign: i8, source: Box<PhaseSpec> },
}

impl PhaseSpec {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("phase spec serializes")
    }
}

/// A constructed phase: the parameter record plus its exact expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub spec: PhaseSpec,
    pub theta: ExpPoly,
}

fn s(q: &BigRational) -> String {
    q.to_string()
}

/// `exp(theta_k)` with `theta_k = k x + k^2 y + k^3 t`, over `(t, x, y)`.
pub fn theta_exponential(k: &BigRational) -> ExpPoly {
    let freq = vec![k * k * k, k.clone(), k * k];
    ExpPoly::exponential(VarSet::kp(), freq).expect("kp arity")
}

fn require_positive(values: &[&BigRational]) -> Result<(), PhaseError> {
    if values.iter().any(|a| !a.is_positive()) {
        return Err(PhaseError::NonPositiveAmplitude);
    }
    Ok(())
}

fn require_sorted(k: &[BigRational]) -> Result<(), PhaseError> {
    if k.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PhaseError::Unsorted);
    }
    Ok(())
}

/// Two-exponential line-soliton phase `a1 e^{theta_1} + a2 e^{theta_2}`.
pub fn line_soliton(
    a1: &BigRational,
    a2: &BigRational,
    k1: &BigRational,
    k2: &BigRational,
) -> Result<Phase, PhaseError> {
    require_positive(&[a1, a2])?;
    if k1 == k2 {
        return Err(PhaseError::Degenerate("k1 = k2".into()));
    }
    let theta = theta_exponential(k1)
        .scale(a1)
        .add(&theta_exponential(k2).scale(a2))?;
    Ok(Phase {
        spec: PhaseSpec::Line { a1: s(a1), a2: s(a2), k1: s(k1), k2: s(k2) },
        theta,
    })
}

/// Vertical (KdV) soliton phase `e^{kx + k^2 y + k^3 t} + e^{-kx + k^2 y - k^3 t}`.
pub fn kdv_vertical(k: &BigRational) -> Result<Phase, PhaseError> {
    if k.is_zero() {
        return Err(PhaseError::Degenerate("k = 0".into()));
    }
    let theta = theta_exponential(k).add(&theta_exponential(&-k.clone()))?;
    Ok(Phase { spec: PhaseSpec::KdvVertical { k: s(k) }, theta })
}

/// Resonant multi-soliton phase `sum a_i e^{theta_i}` with `a_i > 0` and
/// strictly increasing spectral parameters.
pub fn resonant(a: &[BigRational], k: &[BigRational]) -> Result<Phase, PhaseError> {
    if a.is_empty() || a.len() != k.len() {
        return Err(PhaseError::Degenerate("need M >= 1 and |a| = |k|".into()));
    }
    require_positive(&a.iter().collect::<Vec<_>>())?;
    require_sorted(k)?;
    let mut theta = ExpPoly::zero(VarSet::kp());
    for (ai, ki) in a.iter().zip(k) {
        theta = theta.add(&theta_exponential(ki).scale(ai))?;
    }
    Ok(Phase {
        spec: PhaseSpec::Resonant { a: a.iter().map(s).collect(), k: k.iter().map(s).collect() },
        theta,
    })
}

/// The larger resonant class: each spectral parameter contributes the pair
/// `a_{i,1} e^{-k_i x + k_i^2 y - k_i^3 t} + a_{i,2} e^{k_i x + k_i^2 y + k_i^3 t}`,
/// i.e. the building-block exponential taken at `-k_i` and at `k_i`. For
/// `M = 1`, `a = (1,1)` this is exactly the vertical soliton phase.
pub fn resonant_general(
    a1: &[BigRational],
    a2: &[BigRational],
    k: &[BigRational],
) -> Result<Phase, PhaseError> {
    if k.is_empty() || a1.len() != k.len() || a2.len() != k.len() {
        return Err(PhaseError::Degenerate("need M >= 1 and |a1| = |a2| = |k|".into()));
    }
    require_positive(&a1.iter().chain(a2.iter()).collect::<Vec<_>>())?;
    require_sorted(k)?;
    let mut theta = ExpPoly::zero(VarSet::kp());
    for ((a1i, a2i), ki) in a1.iter().zip(a2).zip(k) {
        theta = theta.add(&theta_exponential(&-ki.clone()).scale(a1i))?;
        theta = theta.add(&theta_exponential(ki).scale(a2i))?;
    }
    Ok(Phase {
        spec: PhaseSpec::ResonantGeneral {
            a1: a1.iter().map(s).collect(),
            a2: a2.iter().map(s).collect(),
            k: k.iter().map(s).collect(),
        },
        theta,
    })
}

fn two_soliton_theta(k: &[BigRational; 4]) -> Result<ExpPoly, PhaseError> {
    let mut theta = ExpPoly::zero(VarSet::kp());
    for (i, j) in [(0usize, 2usize), (0, 3), (1, 2), (1, 3)] {
        let c = &k[j] - &k[i];
        let e = theta_exponential(&k[i]).mul(&theta_exponential(&k[j]))?;
        theta = theta.add(&e.scale(&c))?;
    }
    Ok(theta)
}

/// Expanded 2-soliton phase
/// `(k3-k1) e^{theta_1+theta_3} + (k4-k1) e^{theta_1+theta_4} + (k3-k2) e^{theta_2+theta_3} + (k4-k2) e^{theta_2+theta_4}`
/// with `k1 < k2 < k3 < k4`.
pub fn two_soliton(
    k1: &BigRational,
    k2: &BigRational,
    k3: &BigRational,
    k4: &BigRational,
) -> Result<Phase, PhaseError> {
    let k = [k1.clone(), k2.clone(), k3.clone(), k4.clone()];
    require_sorted(&k)?;
    let theta = two_soliton_theta(&k)?;
    Ok(Phase {
        spec: PhaseSpec::TwoSoliton { k: k.iter().map(s).collect(), checked: true },
        theta,
    })
}

/// Same expansion without the ordering requirement. Exploratory: the result
/// may fail positivity; only a vanishing expansion is rejected.
pub fn two_soliton_unchecked(
    k1: &BigRational,
    k2: &BigRational,
    k3: &BigRational,
    k4: &BigRational,
) -> Result<Phase, PhaseError> {
    let k = [k1.clone(), k2.clone(), k3.clone(), k4.clone()];
    let theta = two_soliton_theta(&k)?;
    if theta.is_zero() {
        return Err(PhaseError::Degenerate("expansion vanishes".into()));
    }
    Ok(Phase {
        spec: PhaseSpec::TwoSoliton { k: k.iter().map(s).collect(), checked: false },
        theta,
    })
}

/// Determinant by cofactor expansion along the first row. Sizes stay tiny
/// (n <= ~6), and the ring has no division, so fraction-free elimination
/// buys nothing here.
fn determinant(m: &[Vec<ExpPoly>]) -> Result<ExpPoly, PhaseError> {
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let vars = m[0][0].vars().clone();
    let mut det = ExpPoly::zero(vars);
    for (col, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<ExpPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let cofactor = entry.mul(&determinant(&minor)?)?;
        det = if col % 2 == 0 { det.add(&cofactor)? } else { det.sub(&cofactor)? };
    }
    Ok(det)
}

/// Wronskian determinant `det [ d^i/dx^i theta_j ]_{i=0..n-1}` of the input
/// polynomials, with derivatives in `x`.
pub fn wronskian(thetas: &[ExpPoly]) -> Result<ExpPoly, PhaseError> {
    if thetas.is_empty() {
        return Err(PhaseError::EmptyInput);
    }
    let vars = thetas[0].vars().clone();
    if vars.index_of("x").is_none() {
        return Err(PhaseError::MissingVar("x"));
    }
    for t in thetas {
        if t.vars() != &vars {
            return Err(PhaseError::Algebra(AlgebraError::VarSetMismatch));
        }
    }
    let n = thetas.len();
    let mut rows: Vec<Vec<ExpPoly>> = Vec::with_capacity(n);
    let mut current: Vec<ExpPoly> = thetas.to_vec();
    rows.push(current.clone());
    for _ in 1..n {
        current = current
            .iter()
            .map(|p| p.diff("x", 1))
            .collect::<Result<_, _>>()?;
        rows.push(current.clone());
    }
    determinant(&rows)
}

/// Wronskian of already-constructed phases, keeping the parameter records.
pub fn wronskian_phase(phases: &[Phase]) -> Result<Phase, PhaseError> {
    let thetas: Vec<ExpPoly> = phases.iter().map(|p| p.theta.clone()).collect();
    let theta = wronskian(&thetas)?;
    Ok(Phase {
        spec: PhaseSpec::Wronskian { source: phases.iter().map(|p| p.spec.clone()).collect() },
        theta,
    })
}

/// Galilean change of variables on the phase level:
/// `Θ_β(t,x,y) = Θ(t, x - (4β/3) y + (4β²/3) t, y - 2β t)`.
pub fn galilean_theta(theta: &ExpPoly, beta: &BigRational) -> Result<ExpPoly, PhaseError> {
    let vars = theta.vars();
    if vars != &VarSet::kp() {
        return Err(PhaseError::MissingVar("x"));
    }
    let zero = BigRational::zero();
    let one = BigRational::one();
    let four_thirds = BigRational::new(BigInt::from(4), BigInt::from(3));
    let a = vec![
        vec![one.clone(), zero.clone(), zero.clone()],
        vec![&four_thirds * beta * beta, one.clone(), -(&four_thirds * beta)],
        vec![-(beta + beta), zero.clone(), one.clone()],
    ];
    let b = vec![zero.clone(), zero.clone(), zero];
    Ok(theta.substitute_affine(&a, &b)?)
}

pub fn galilean(phase: &Phase, beta: &BigRational) -> Result<Phase, PhaseError> {
    let theta = galilean_theta(&phase.theta, beta)?;
    Ok(Phase {
        spec: PhaseSpec::Galilean { beta: s(beta), source: Box::new(phase.spec.clone()) },
        theta,
    })
}

/// Scaling change of variables `Θ(λ³ t, λ x, ± λ² y)`, `λ > 0`.
pub fn scale_theta(
    theta: &ExpPoly,
    lambda: &BigRational,
    y_sign: i8,
) -> Result<ExpPoly, PhaseError> {
    if !lambda.is_positive() {
        return Err(PhaseError::NonPositiveScale);
    }
    if y_sign != 1 && y_sign != -1 {
        return Err(PhaseError::BadSign);
    }
    let vars = theta.vars();
    if vars != &VarSet::kp() {
        return Err(PhaseError::MissingVar("x"));
    }
    let zero = BigRational::zero();
    let sign = BigRational::from_integer(BigInt::from(y_sign));
    let a = vec![
        vec![lambda * lambda * lambda, zero.clone(), zero.clone()],
        vec![zero.clone(), lambda.clone(), zero.clone()],
        vec![zero.clone(), zero.clone(), &sign * lambda * lambda],
    ];
    let b = vec![zero.clone(), zero.clone(), zero];
    Ok(theta.substitute_affine(&a, &b)?)
}

pub fn scale(phase: &Phase, lambda: &BigRational, y_sign: i8) -> Result<Phase, PhaseError> {
    let theta = scale_theta(&phase.theta, lambda, y_sign)?;
    Ok(Phase {
        spec: PhaseSpec::Scale {
            lambda: s(lambda),
            y_sign,
            source: Box::new(phase.spec.clone()),
        },
        theta,
    })
}

/// True when every term is a pure exponential with a positive coefficient,
/// which guarantees pointwise positivity of the phase.
pub fn is_positive_exponential_sum(theta: &ExpPoly) -> bool {
    !theta.is_zero()
        && theta.terms().iter().all(|t: &Term| {
            t.coeff.is_positive() && t.mono.iter().all(|&m| m == 0)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expalg::rat;

    #[test]
    fn line_with_opposite_k_is_vertical_phase() {
        let k = rat(2, 3);
        let line = line_soliton(&rat(1, 1), &rat(1, 1), &k, &-k.clone()).unwrap();
        let vertical = kdv_vertical(&k).unwrap();
        assert_eq!(line.theta, vertical.theta);
    }

    #[test]
    fn line_fig1_left() {
        let p = line_soliton(&rat(1, 1), &rat(1, 1), &rat(-1, 2), &rat(1, 1)).unwrap();
        assert_eq!(p.theta.term_count(), 2);
        assert!(is_positive_exponential_sum(&p.theta));
    }

    #[test]
    fn line_direct_substitution() {
        // (2,3,0,1) -> 2 + 3 e^{x+y+t}
        let p = line_soliton(&rat(2, 1), &rat(3, 1), &rat(0, 1), &rat(1, 1)).unwrap();
        let expected = ExpPoly::constant_i64(VarSet::kp(), 2)
            .add(
                &ExpPoly::exponential(VarSet::kp(), vec![rat(1, 1), rat(1, 1), rat(1, 1)])
                    .unwrap()
                    .scale(&rat(3, 1)),
            )
            .unwrap();
        assert_eq!(p.theta, expected);
    }

    #[test]
    fn line_rejects_bad_parameters() {
        assert_eq!(
            line_soliton(&rat(1, 1), &rat(1, 1), &rat(1, 1), &rat(1, 1)),
            Err(PhaseError::Degenerate("k1 = k2".into()))
        );
        assert_eq!(
            line_soliton(&rat(-1, 1), &rat(1, 1), &rat(0, 1), &rat(1, 1)),
            Err(PhaseError::NonPositiveAmplitude)
        );
    }

    #[test]
    fn resonant_y_soliton() {
        let p = resonant(
            &[rat(1, 1), rat(1, 1), rat(1, 1)],
            &[rat(-3, 10), rat(0, 1), rat(1, 2)],
        )
        .unwrap();
        assert_eq!(p.theta.term_count(), 3);
        assert!(is_positive_exponential_sum(&p.theta));
    }

    #[test]
    fn resonant_single_exponential() {
        let p = resonant(&[rat(2, 1)], &[rat(1, 3)]).unwrap();
        assert_eq!(p.theta, theta_exponential(&rat(1, 3)).scale(&rat(2, 1)));
    }

    #[test]
    fn resonant_rejects_unsorted() {
        assert_eq!(
            resonant(&[rat(1, 1), rat(1, 1)], &[rat(1, 1), rat(0, 1)]),
            Err(PhaseError::Unsorted)
        );
    }

    #[test]
    fn resonant_general_m1_is_vertical_phase() {
        let k = rat(3, 4);
        let p = resonant_general(&[rat(1, 1)], &[rat(1, 1)], std::slice::from_ref(&k)).unwrap();
        assert_eq!(p.theta, kdv_vertical(&k).unwrap().theta);
    }

    #[test]
    fn two_soliton_fig1_center_coefficients() {
        let p = two_soliton(&rat(-1, 1), &rat(-1, 2), &rat(1, 2), &rat(1, 1)).unwrap();
        assert_eq!(p.theta.term_count(), 4);
        let coeffs: Vec<BigRational> =
            p.theta.terms().iter().map(|t| t.coeff.clone()).collect();
        let mut expected = vec![rat(3, 2), rat(2, 1), rat(1, 1), rat(3, 2)];
        let mut got = coeffs;
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn two_soliton_matches_wronskian_of_line_phases() {
        let (k1, k2, k3, k4) = (rat(-1, 1), rat(-1, 2), rat(1, 2), rat(1, 1));
        let p = two_soliton(&k1, &k2, &k3, &k4).unwrap();
        let theta1 = theta_exponential(&k1).add(&theta_exponential(&k2)).unwrap();
        let theta2 = theta_exponential(&k3).add(&theta_exponential(&k4)).unwrap();
        let w = wronskian(&[theta1, theta2]).unwrap();
        assert_eq!(p.theta, w);
    }

    #[test]
    fn two_soliton_rejects_unsorted() {
        assert!(two_soliton(&rat(1, 1), &rat(0, 1), &rat(2, 1), &rat(3, 1)).is_err());
    }

    #[test]
    fn wronskian_single_input_identity() {
        let p = theta_exponential(&rat(1, 2)).scale(&rat(5, 1));
        assert_eq!(wronskian(std::slice::from_ref(&p)).unwrap(), p);
    }

    #[test]
    fn wronskian_two_exponentials() {
        // Wr[e^{theta_1}, e^{theta_2}] = (k2 - k1) e^{theta_1 + theta_2}
        let (k1, k2) = (rat(1, 3), rat(5, 4));
        let w = wronskian(&[theta_exponential(&k1), theta_exponential(&k2)]).unwrap();
        let expected = theta_exponential(&k1)
            .mul(&theta_exponential(&k2))
            .unwrap()
            .scale(&(&k2 - &k1));
        assert_eq!(w, expected);
    }

    #[test]
    fn wronskian_is_alternating() {
        let p = theta_exponential(&rat(1, 1));
        let q = theta_exponential(&rat(2, 1)).add(&theta_exponential(&rat(-1, 2))).unwrap();
        let w_pq = wronskian(&[p.clone(), q.clone()]).unwrap();
        let w_qp = wronskian(&[q, p]).unwrap();
        assert_eq!(w_pq, w_qp.neg());
    }

    #[test]
    fn wronskian_rejects_empty() {
        assert_eq!(wronskian(&[]), Err(PhaseError::EmptyInput));
    }

    #[test]
    fn galilean_zero_is_identity() {
        let p = line_soliton(&rat(1, 1), &rat(2, 1), &rat(-1, 2), &rat(1, 1)).unwrap();
        let q = galilean(&p, &rat(0, 1)).unwrap();
        assert_eq!(p.theta, q.theta);
    }

    #[test]
    fn galilean_composes_additively() {
        let p = two_soliton(&rat(-1, 1), &rat(-1, 2), &rat(1, 2), &rat(1, 1)).unwrap();
        let b1 = rat(1, 3);
        let b2 = rat(-2, 5);
        let twice = galilean_theta(&galilean_theta(&p.theta, &b1).unwrap(), &b2).unwrap();
        let once = galilean_theta(&p.theta, &(&b1 + &b2)).unwrap();
        assert_eq!(twice, once);
    }

    #[test]
    fn scale_maps_line_to_line() {
        // lambda = 2 sends the k-parametrized building block to the 2k one
        let p = line_soliton(&rat(1, 1), &rat(1, 1), &rat(1, 2), &rat(1, 1)).unwrap();
        let q = scale_theta(&p.theta, &rat(2, 1), 1).unwrap();
        let expected =
            line_soliton(&rat(1, 1), &rat(1, 1), &rat(1, 1), &rat(2, 1)).unwrap().theta;
        assert_eq!(q, expected);
    }

    #[test]
    fn scale_flips_y_frequency() {
        let p = ExpPoly::exponential(VarSet::kp(), vec![rat(1, 1), rat(1, 1), rat(1, 1)])
            .unwrap();
        let q = scale_theta(&p, &rat(2, 1), -1).unwrap();
        let expected =
            ExpPoly::exponential(VarSet::kp(), vec![rat(8, 1), rat(2, 1), rat(-4, 1)]).unwrap();
        assert_eq!(q, expected);
    }

    #[test]
    fn scale_rejects_nonpositive_lambda() {
        let p = kdv_vertical(&rat(1, 1)).unwrap();
        assert_eq!(scale(&p, &rat(0, 1), 1), Err(PhaseError::NonPositiveScale));
        assert_eq!(scale(&p, &rat(-1, 1), 1), Err(PhaseError::NonPositiveScale));
    }

    #[test]
    fn constructed_phases_are_positive_exponential_sums() {
        let phases = [
            line_soliton(&rat(1, 2), &rat(3, 1), &rat(-1, 3), &rat(4, 5)).unwrap(),
            kdv_vertical(&rat(5, 6)).unwrap(),
            resonant(&[rat(1, 1), rat(2, 1)], &[rat(-1, 1), rat(1, 4)]).unwrap(),
            resonant_general(&[rat(1, 2)], &[rat(2, 3)], &[rat(1, 5)]).unwrap(),
            two_soliton(&rat(-2, 1), &rat(-1, 1), &rat(1, 1), &rat(2, 1)).unwrap(),
        ];
        for p in &phases {
            assert!(is_positive_exponential_sum(&p.theta), "{:?}", p.spec);
        }
    }

    #[test]
    fn phase_spec_json_shape() {
        let p = galilean(&kdv_vertical(&rat(1, 2)).unwrap(), &rat(1, 3)).unwrap();
        let v = p.spec.to_json();
        assert_eq!(v["kind"], "galilean");
        assert_eq!(v["beta"], "1/3");
        assert_eq!(v["source"]["kind"], "kdv_vertical");
        assert_eq!(v["source"]["k"], "1/2");
    }
}
