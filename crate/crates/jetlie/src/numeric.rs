//! Independent floating-point oracle.
//!
//! Symbolic verdicts in this crate are exact; this module cross-checks them
//! numerically. It evaluates expressions at random jet points (with
//! conjugate variables holding conjugate values), generates points that
//! satisfy the side condition exactly by differentiating the ansatz, and
//! certifies functional independence of invariant families through the rank
//! of their Jacobian, computed from exact symbolic partials.

use crate::expr::{Atom, BaseVar, Expr, FunctionId, JetVar, MultiIndex, Param};
use crate::reduction::Ansatz;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EvalError {
    #[error("no value assigned to {0}")]
    MissingAtom(String),
    #[error("near-zero base |{atom}| = {magnitude:.3e} raised to a negative power")]
    DivisionNearZero { atom: String, magnitude: f64 },
}

/// Where a point's values came from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Provenance {
    Free,
    AnsatzGenerated,
}

/// An assignment of complex values to atoms.
#[derive(Clone, Debug)]
pub struct JetPoint {
    assignment: BTreeMap<Atom, Complex64>,
    pub seed: u64,
    pub provenance: Provenance,
}

/// Which jet coordinates a point assigns.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Setting {
    /// `u`, `u*` up to second order over `x0..x3`.
    WaveOrder2,
    /// `phi`, `phi*` up to second order over `tau, x1, x2`.
    ReducedOrder2,
}

fn multi_indices(function: FunctionId, max_order: u32) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::empty()];
    let mut frontier = vec![MultiIndex::empty()];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for idx in frontier {
            for &v in function.domain() {
                let target = idx.plus(v);
                if !out.contains(&target) {
                    out.push(target);
                    next.push(target);
                }
            }
        }
        frontier = next;
    }
    out
}

/// The jet coordinates of a setting, conjugate pairs excluded (they are
/// implied).
pub fn setting_coordinates(setting: Setting) -> Vec<JetVar> {
    let f = match setting {
        Setting::WaveOrder2 => FunctionId::U,
        Setting::ReducedOrder2 => FunctionId::Phi,
    };
    multi_indices(f, 2)
        .into_iter()
        .map(|idx| JetVar::new(f, idx))
        .collect()
}

/// Jet coordinates including the conjugates, the columns used for rank
/// certification.
pub fn setting_coordinates_with_conjugates(setting: Setting) -> Vec<JetVar> {
    let mut out = setting_coordinates(setting);
    let conj: Vec<JetVar> = out.iter().map(|j| j.conjugate()).collect();
    out.extend(conj);
    out
}

fn random_magnitude_phase(rng: &mut ChaCha8Rng) -> Complex64 {
    let magnitude = rng.gen_range(0.5..2.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(magnitude, phase)
}

fn random_real(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude = rng.gen_range(0.5..2.0);
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

impl JetPoint {
    /// Deterministic random point: base variables real, jet values complex
    /// with magnitudes in `[0.5, 2)`, conjugate variables holding conjugate
    /// values, parameters real and positive.
    pub fn random(seed: u64, setting: Setting) -> JetPoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assignment = BTreeMap::new();
        for v in BaseVar::ALL {
            assignment.insert(Atom::Base(v), Complex64::new(random_real(&mut rng), 0.0));
        }
        assignment.insert(
            Atom::Param(Param::M),
            Complex64::new(rng.gen_range(0.5..2.0), 0.0),
        );
        assignment.insert(
            Atom::Param(Param::Lambda),
            Complex64::new(rng.gen_range(0.5..2.0), 0.0),
        );
        assignment.insert(Atom::Param(Param::N), Complex64::new(2.0, 0.0));
        for jet in setting_coordinates(setting) {
            let value = random_magnitude_phase(&mut rng);
            assignment.insert(Atom::Jet(jet), value);
            assignment.insert(Atom::Jet(jet.conjugate()), value.conj());
        }
        JetPoint {
            assignment,
            seed,
            provenance: Provenance::Free,
        }
    }

    /// A wave-setting point generated from the ansatz: reduced jet values
    /// are random, `tau = x0 - x3`, and every `u`-derivative up to second
    /// order is computed by exact differentiation of the ansatz and then
    /// evaluated. The result satisfies the side condition and all its
    /// consequences to machine precision.
    pub fn from_ansatz(seed: u64) -> Result<JetPoint, EvalError> {
        let mut point = JetPoint::random(seed, Setting::ReducedOrder2);
        point.provenance = Provenance::AnsatzGenerated;
        let x0 = point.assignment[&Atom::Base(BaseVar::X0)];
        let x3 = point.assignment[&Atom::Base(BaseVar::X3)];
        point.assignment.insert(Atom::Base(BaseVar::Tau), x0 - x3);
        let ansatz = Ansatz::new(2);
        for jet in setting_coordinates(Setting::WaveOrder2) {
            let image = ansatz.u_derivative(&jet.index).expect("order 2 table");
            let value = eval(&image, &point)?;
            point.assignment.insert(Atom::Jet(jet), value);
            point
                .assignment
                .insert(Atom::Jet(jet.conjugate()), value.conj());
        }
        Ok(point)
    }

    pub fn value(&self, atom: &Atom) -> Option<Complex64> {
        self.assignment.get(atom).copied()
    }

    /// Override one assignment (used to probe degenerate configurations).
    pub fn set(&mut self, atom: Atom, value: Complex64) {
        self.assignment.insert(atom, value);
    }
}

/// Evaluate an expression at a point. Powers use the principal branch;
/// near-zero bases of negative or fractional powers are reported rather than
/// amplified.
pub fn eval(e: &Expr, point: &JetPoint) -> Result<Complex64, EvalError> {
    let mut total = Complex64::new(0.0, 0.0);
    for term in e.terms() {
        let mut value = term.coeff.to_complex();
        for (atom, exp) in term.mono.factors() {
            let base = eval_atom(atom, point)?;
            if *exp < 0 && base.norm() < 1e-12 {
                return Err(EvalError::DivisionNearZero {
                    atom: atom_name(atom),
                    magnitude: base.norm(),
                });
            }
            value *= base.powi(*exp);
        }
        total += value;
    }
    Ok(total)
}

fn eval_atom(atom: &Atom, point: &JetPoint) -> Result<Complex64, EvalError> {
    match atom {
        Atom::Exp(arg) => Ok(eval(arg, point)?.exp()),
        Atom::Pow(base, r) => {
            let b = eval(base, point)?;
            let exponent = *r.numer() as f64 / *r.denom() as f64;
            if exponent < 0.0 && b.norm() < 1e-12 {
                return Err(EvalError::DivisionNearZero {
                    atom: atom_name(atom),
                    magnitude: b.norm(),
                });
            }
            Ok(b.powf(exponent))
        }
        plain => point
            .value(plain)
            .ok_or_else(|| EvalError::MissingAtom(atom_name(plain))),
    }
}

fn atom_name(atom: &Atom) -> String {
    match atom {
        Atom::Base(v) => v.name().to_string(),
        Atom::Jet(j) => j.to_string(),
        Atom::Param(p) => p.name().to_string(),
        Atom::Exp(arg) => format!("exp({arg})"),
        Atom::Pow(base, r) => format!("({base})^({r})"),
    }
}

/// `|eval(lhs - rhs)| / max(|lhs|, |rhs|, 1)`.
pub fn relative_residual(lhs: &Expr, rhs: &Expr, point: &JetPoint) -> Result<f64, EvalError> {
    let a = eval(lhs, point)?;
    let b = eval(rhs, point)?;
    let scale = a.norm().max(b.norm()).max(1.0);
    Ok((a - b).norm() / scale)
}

/// How completely the terms of an expression cancel at a point:
/// `|eval(e)|` divided by the largest intermediate term magnitude (at least
/// one). Near zero for an expression that vanishes on the point's
/// constraint manifold.
pub fn cancellation_residual(e: &Expr, point: &JetPoint) -> Result<f64, EvalError> {
    let total = eval(e, point)?;
    let mut scale = 1.0_f64;
    for term in e.terms() {
        let mut value = term.coeff.to_complex();
        for (atom, exp) in term.mono.factors() {
            let base = eval_atom(atom, point)?;
            if *exp < 0 && base.norm() < 1e-12 {
                return Err(EvalError::DivisionNearZero {
                    atom: atom_name(atom),
                    magnitude: base.norm(),
                });
            }
            value *= base.powi(*exp);
        }
        scale = scale.max(value.norm());
    }
    Ok(total.norm() / scale)
}

/// Outcome of a rank certification.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub threshold: f64,
    pub seed: u64,
}

/// Symbolic Jacobian `[d expr_i / d jet_j]` computed once, then evaluated at
/// as many points as needed. Exact partials, no finite differencing.
pub fn symbolic_jacobian(exprs: &[Expr], columns: &[JetVar]) -> Vec<Vec<Expr>> {
    exprs
        .iter()
        .map(|e| {
            columns
                .iter()
                .map(|jet| e.partial(&Atom::Jet(*jet)))
                .collect()
        })
        .collect()
}

fn rank_of_matrix(mut matrix: Vec<Vec<Complex64>>, threshold_scale: f64) -> (usize, f64) {
    let rows = matrix.len();
    let cols = matrix.first().map(Vec::len).unwrap_or(0);
    let mut largest = 0.0_f64;
    for row in &matrix {
        for v in row {
            largest = largest.max(v.norm());
        }
    }
    let threshold = largest * 1e-8 * rows.max(cols) as f64 * threshold_scale;
    let mut rank = 0;
    let mut row_start = 0;
    for col in 0..cols {
        // partial pivoting on the current column
        let mut pivot_row = None;
        let mut pivot_mag = threshold;
        for (r, row) in matrix.iter().enumerate().skip(row_start) {
            let mag = row[col].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = Some(r);
            }
        }
        let Some(p) = pivot_row else { continue };
        matrix.swap(row_start, p);
        let pivot = matrix[row_start][col];
        for r in (row_start + 1)..rows {
            let factor = matrix[r][col] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            let (upper, lower) = matrix.split_at_mut(r);
            let lead_row = &upper[row_start];
            for (target, &above) in lower[0][col..].iter_mut().zip(&lead_row[col..]) {
                *target -= factor * above;
            }
        }
        rank += 1;
        row_start += 1;
        if row_start == rows {
            break;
        }
    }
    (rank, threshold)
}

/// Numerical rank of the Jacobian at a point, from exact symbolic partials
/// and complex Gaussian elimination with partial pivoting; the threshold is
/// `largest pivot * 1e-8 * max(rows, cols)`, scaled by `threshold_scale`.
pub fn jacobian_rank(
    exprs: &[Expr],
    columns: &[JetVar],
    point: &JetPoint,
    threshold_scale: f64,
) -> Result<RankReport, EvalError> {
    assert!(threshold_scale > 0.0, "threshold must be positive");
    let partials = symbolic_jacobian(exprs, columns);
    let mut matrix = Vec::with_capacity(partials.len());
    for row in &partials {
        let mut out = Vec::with_capacity(row.len());
        for d in row {
            out.push(eval(d, point)?);
        }
        matrix.push(out);
    }
    let (rank, threshold) = rank_of_matrix(matrix, threshold_scale);
    Ok(RankReport {
        rows: exprs.len(),
        cols: columns.len(),
        rank,
        threshold,
        seed: point.seed,
    })
}

/// Rank certification across several seeds and a tenfold threshold
/// variation; returns the common rank when stable.
pub fn certified_rank(
    exprs: &[Expr],
    columns: &[JetVar],
    setting: Setting,
    seeds: &[u64],
) -> Result<Option<usize>, EvalError> {
    let partials = symbolic_jacobian(exprs, columns);
    let mut agreed: Option<usize> = None;
    for &seed in seeds {
        let point = JetPoint::random(seed, setting);
        let mut matrix = Vec::with_capacity(partials.len());
        for row in &partials {
            let mut out = Vec::with_capacity(row.len());
            for d in row {
                out.push(eval(d, &point)?);
            }
            matrix.push(out);
        }
        for scale in [0.1, 1.0, 10.0] {
            let (rank, _) = rank_of_matrix(matrix.clone(), scale);
            match agreed {
                None => agreed = Some(rank),
                Some(r) if r != rank => return Ok(None),
                _ => {}
            }
        }
    }
    Ok(agreed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::coeff::GaussRat;

    #[test]
    fn determinism_and_conjugate_pairing() {
        let p1 = JetPoint::random(7, Setting::WaveOrder2);
        let p2 = JetPoint::random(7, Setting::WaveOrder2);
        let u1 = JetVar::deriv(FunctionId::U, &[BaseVar::X1]);
        assert_eq!(p1.value(&Atom::Jet(u1)), p2.value(&Atom::Jet(u1)));
        let conj = p1.value(&Atom::Jet(u1.conjugate())).unwrap();
        assert_eq!(conj, p1.value(&Atom::Jet(u1)).unwrap().conj());
        let m = p1.value(&Atom::Param(Param::M)).unwrap();
        assert!(m.im == 0.0 && m.re > 0.0);
    }

    #[test]
    fn eval_basics() {
        let p = JetPoint::random(3, Setting::ReducedOrder2);
        assert_eq!(
            eval(&Expr::from_int(2), &p).unwrap(),
            Complex64::new(2.0, 0.0)
        );
        // exp(phi + phi*) = |Phi|^2
        let arg = Expr::func(FunctionId::Phi).add_ref(&Expr::func(FunctionId::PhiStar));
        let val = eval(&Expr::exp_of(&arg), &p).unwrap();
        let phi = p.value(&Atom::Jet(JetVar::value(FunctionId::Phi))).unwrap();
        let expected = (phi.exp()).norm_sqr();
        assert!((val - expected).norm() < 1e-12);
    }

    #[test]
    fn ansatz_points_satisfy_the_condition() {
        for seed in 0..20 {
            let p = JetPoint::from_ansatz(seed).unwrap();
            let cond = eval(&catalog::condition(), &p).unwrap();
            let scale = eval(&Expr::func(FunctionId::U), &p)
                .unwrap()
                .norm()
                .max(1.0);
            assert!(cond.norm() / scale < 1e-12, "seed {seed}: {}", cond.norm());
            // second-order consequence u_00 = u_33 + 2 i m u_3 - m^2 u
            let lhs = Expr::deriv(FunctionId::U, &[BaseVar::X0, BaseVar::X0]);
            let m = Expr::param(Param::M);
            let rhs = Expr::deriv(FunctionId::U, &[BaseVar::X3, BaseVar::X3])
                .add_ref(
                    &catalog::im()
                        .scale(&GaussRat::from_int(2))
                        .mul_ref(&Expr::deriv(FunctionId::U, &[BaseVar::X3])),
                )
                .sub_ref(&m.mul_ref(&m).mul_ref(&Expr::func(FunctionId::U)));
            assert!(relative_residual(&lhs, &rhs, &p).unwrap() < 1e-9);
        }
    }

    #[test]
    fn box_identity_on_ansatz_points() {
        let p = JetPoint::from_ansatz(42).unwrap();
        let lhs = catalog::box_u(FunctionId::U);
        let rhs = Expr::func(FunctionId::U).mul_ref(&catalog::n1());
        assert!(relative_residual(&lhs, &rhs, &p).unwrap() < 1e-9);
    }

    #[test]
    fn i2_equals_n1_over_n1_conj_numerically() {
        let p = JetPoint::from_ansatz(5).unwrap();
        let i2 = &catalog::conditional_invariants(2)[1];
        let lhs = eval(&i2.u_form, &p).unwrap();
        let n1 = eval(&catalog::n1(), &p).unwrap();
        let n1c = eval(&catalog::n1().conjugate(), &p).unwrap();
        assert!((lhs - n1 / n1c).norm() / lhs.norm().max(1.0) < 1e-9);
    }

    #[test]
    fn degenerate_constant_input_is_rejected() {
        // With a constant phi every derivative vanishes, N1 = 0, and the
        // quotient invariants hit a near-zero denominator.
        let mut p = JetPoint::from_ansatz(9).unwrap();
        for jet in setting_coordinates(Setting::ReducedOrder2) {
            if jet.order() > 0 {
                p.set(Atom::Jet(jet), Complex64::new(0.0, 0.0));
                p.set(Atom::Jet(jet.conjugate()), Complex64::new(0.0, 0.0));
            }
        }
        let i2 = &catalog::conditional_invariants(2)[1];
        assert!(matches!(
            eval(&i2.phi_form, &p),
            Err(EvalError::DivisionNearZero { .. })
        ));
    }

    #[test]
    fn rank_of_simple_families() {
        let u = Expr::func(FunctionId::U);
        let us = Expr::func(FunctionId::UStar);
        let cols = setting_coordinates_with_conjugates(Setting::WaveOrder2);
        let p = JetPoint::random(11, Setting::WaveOrder2);
        let r = jacobian_rank(&[u.clone(), us], &cols, &p, 1.0).unwrap();
        assert_eq!(r.rank, 2);
        let r = jacobian_rank(
            &[u.clone(), u.scale(&GaussRat::from_int(2))],
            &cols,
            &p,
            1.0,
        )
        .unwrap();
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn missing_atom_is_reported() {
        let p = JetPoint::random(1, Setting::ReducedOrder2);
        let e = Expr::deriv(FunctionId::U, &[BaseVar::X0]);
        assert!(matches!(eval(&e, &p), Err(EvalError::MissingAtom(_))));
    }
}
