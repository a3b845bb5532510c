//! Decision procedures for differential invariance.
//!
//! A function `F` on jet space is an *absolute* invariant of a vector field
//! `X` when the prolonged field annihilates it, a *relative* invariant when
//! `pr X(F) = lambda * F` for some factor, and a *conditional* invariant when
//! the residual vanishes only modulo a constraint system and its derivative
//! consequences. All verdicts are exact: residuals are cleared of
//! denominators, reduced to normal form, and compared with zero structurally.
//! Numeric sampling is a separate, advisory cross-check (see
//! [`crate::numeric`]); it never decides a verdict.

use crate::expr::{Atom, Expr, FunctionId, JetVar};
use crate::prolong::{prolong, ProlongError, VectorField};
use crate::rewrite::{self, RewriteError, RewriteSystem};
use serde::Serialize;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum InvarianceError {
    #[error(transparent)]
    Prolong(#[from] ProlongError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),
}

/// Outcome of an invariance check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Absolute,
    /// `pr X(F) = lambda * F` with the factor in canonical form.
    Relative {
        factor: String,
    },
    /// Residual vanishes modulo the supplied constraint system.
    Conditional,
    Fails,
}

/// Result of checking one subject expression against one operator.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub subject: String,
    pub operator: String,
    pub verdict: Verdict,
    /// Cleared residual in canonical syntax; `0` iff the check passed.
    pub residual: String,
    pub order_used: u32,
    /// Bases assumed nonvanishing while clearing denominators.
    pub assumptions: Vec<String>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Absolute | Verdict::Conditional)
    }
}

fn clear(e: &Expr) -> (Expr, Vec<String>) {
    let (cleared, mults) = e.clear_denominators();
    let assumptions = mults
        .iter()
        .map(|(base, _)| format!("{base} != 0"))
        .collect();
    (cleared, assumptions)
}

/// Apply the prolonged field and clear denominators of the residual.
fn cleared_residual(
    field: &VectorField,
    target: &Expr,
    l: u32,
) -> Result<(Expr, Vec<String>), InvarianceError> {
    let residual = prolong(field, l).apply(target)?;
    Ok(clear(&residual))
}

/// Check absolute invariance of `target` under each generator separately.
pub fn check_absolute(
    generators: &[VectorField],
    target: &Expr,
    l: u32,
) -> Result<Vec<InvarianceReport>, InvarianceError> {
    let mut reports = Vec::with_capacity(generators.len());
    for field in generators {
        let (residual, assumptions) = cleared_residual(field, target, l)?;
        let verdict = if residual.is_zero() {
            Verdict::Absolute
        } else {
            Verdict::Fails
        };
        reports.push(InvarianceReport {
            subject: target.to_string(),
            operator: field.name.clone(),
            verdict,
            residual: residual.to_string(),
            order_used: l,
            assumptions,
        });
    }
    Ok(reports)
}

/// Exact relative-invariance factor: returns `lambda` with
/// `pr X(F) = lambda * F` when the division is exact in the polynomial
/// fragment (zero for absolute invariants), `None` otherwise.
pub fn relative_factor(
    field: &VectorField,
    target: &Expr,
    l: u32,
) -> Result<Option<Expr>, InvarianceError> {
    if target.is_zero() {
        return Ok(None);
    }
    let residual = prolong(field, l).apply(target)?;
    if residual.is_zero() {
        return Ok(Some(Expr::zero()));
    }
    Ok(residual.div_exact(target))
}

/// The constraint system of `G = 0` together with its conjugate
/// `conj(G) = 0`, both closed under derivative consequences up to
/// `max_order`.
pub fn condition_system(
    constraint: &Expr,
    solve_for: JetVar,
    max_order: u32,
) -> Result<RewriteSystem, RewriteError> {
    let conj_constraint = constraint.conjugate();
    let conj_for = solve_for.conjugate();
    if conj_constraint == *constraint {
        return rewrite::consequences(constraint, solve_for, max_order);
    }
    rewrite::system_from_constraints(
        &[(constraint.clone(), solve_for), (conj_constraint, conj_for)],
        max_order,
    )
}

/// Residual of `target` under `field`, reduced modulo `sys` after clearing.
pub fn reduced_residual(
    field: &VectorField,
    target: &Expr,
    sys: &RewriteSystem,
    l: u32,
) -> Result<(Expr, Vec<String>), InvarianceError> {
    let raw = prolong(field, l).apply(target)?;
    let reduced_once = sys.reduce(&raw)?;
    let (cleared, assumptions) = clear(&reduced_once);
    let reduced = sys.reduce(&cleared)?;
    Ok((reduced, assumptions))
}

/// Classical Lie-algorithm check of a system of equations: build the merged
/// consequence-closed rewrite system of all equations (with conjugates) and
/// require every equation's residual to reduce to zero.
pub fn check_system_invariance(
    field: &VectorField,
    equations: &[(Expr, JetVar)],
    l: u32,
) -> Result<Vec<InvarianceReport>, InvarianceError> {
    let mut sys = RewriteSystem::empty(l);
    for (eq, solve_for) in equations {
        let single = condition_system(eq, *solve_for, l)?;
        sys = rewrite::merge(&sys, &single)?;
    }
    let mut reports = Vec::new();
    for (eq, _) in equations {
        let (plain, _) = cleared_residual(field, eq, l)?;
        let (reduced, assumptions) = reduced_residual(field, eq, &sys, l)?;
        let verdict = if plain.is_zero() {
            Verdict::Absolute
        } else if reduced.is_zero() {
            Verdict::Conditional
        } else {
            Verdict::Fails
        };
        reports.push(InvarianceReport {
            subject: eq.to_string(),
            operator: field.name.clone(),
            verdict,
            residual: reduced.to_string(),
            order_used: l,
            assumptions,
        });
    }
    Ok(reports)
}

/// Conditional differential invariance: `pr X(F)` and `pr X(G)` must both
/// reduce to zero modulo the consequence-closed system of the condition `G`.
/// The prolongation order is `max(order F, order G, l)`.
pub fn check_conditional_invariant(
    field: &VectorField,
    target: &Expr,
    condition: &(Expr, JetVar),
    l: u32,
) -> Result<InvarianceReport, InvarianceError> {
    let l_max = l.max(target.jet_order()).max(condition.0.jet_order());
    let sys = condition_system(&condition.0, condition.1, l_max)?;

    let (plain, _) = cleared_residual(field, target, l_max)?;
    let (res_f, mut assumptions) = reduced_residual(field, target, &sys, l_max)?;
    let (res_g, more) = reduced_residual(field, &condition.0, &sys, l_max)?;
    assumptions.extend(more);
    assumptions.dedup();

    let verdict = if plain.is_zero() && res_g.is_zero() {
        Verdict::Absolute
    } else if res_f.is_zero() && res_g.is_zero() {
        Verdict::Conditional
    } else {
        Verdict::Fails
    };
    let residual = if res_f.is_zero() { res_g } else { res_f };
    Ok(InvarianceReport {
        subject: target.to_string(),
        operator: field.name.clone(),
        verdict,
        residual: residual.to_string(),
        order_used: l_max,
        assumptions,
    })
}

/// The characteristic `Q u = sum_i xi^i u_i - eta` of a field for one
/// function; `G = Qu` is the side condition of Q-conditional invariance.
pub fn q_characteristic(field: &VectorField, function: FunctionId) -> Expr {
    let mut acc = field.eta(function).neg_ref();
    for (&v, xi) in field.xi_entries() {
        if function.domain().contains(&v) {
            acc = acc.add_ref(&xi.mul_ref(&Expr::jet(JetVar::new(
                function,
                crate::expr::MultiIndex::empty().plus(v),
            ))));
        }
    }
    acc
}

/// Q-conditional invariance: conditional invariance with `G = Qu` as the
/// side condition, solved for its leading derivative.
pub fn check_q_conditional(
    field: &VectorField,
    target: &Expr,
    function: FunctionId,
    l: u32,
) -> Result<InvarianceReport, InvarianceError> {
    let g = q_characteristic(field, function);
    let lead = g
        .atoms()
        .into_iter()
        .filter_map(|a| match a {
            Atom::Jet(j) if j.order() >= 1 => Some(j),
            _ => None,
        })
        .min()
        .ok_or_else(|| RewriteError::NoLeadingVariable(g.to_string()))?;
    check_conditional_invariant(field, target, &(g, lead), l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BaseVar, Param};
    use crate::prolong::VectorField;

    fn u(vars: &[BaseVar]) -> Expr {
        Expr::deriv(FunctionId::U, vars)
    }

    fn jet(vars: &[BaseVar]) -> JetVar {
        JetVar::deriv(FunctionId::U, vars)
    }

    fn translation(v: BaseVar, name: &str) -> VectorField {
        VectorField::from_parts(name, &[(v, Expr::one())], &[]).unwrap()
    }

    #[test]
    fn x_coordinate_is_not_invariant_under_its_translation() {
        let p0 = translation(BaseVar::X0, "P0");
        let reports = check_absolute(&[p0], &Expr::base(BaseVar::X0), 1).unwrap();
        assert_eq!(reports[0].verdict, Verdict::Fails);
        assert_eq!(reports[0].residual, "1");
    }

    #[test]
    fn relative_factor_trivial_cases() {
        let p1 = translation(BaseVar::X1, "P1");
        assert_eq!(
            relative_factor(&p1, &u(&[]), 1).unwrap(),
            Some(Expr::zero())
        );
        // J = Phi dPhi - Phi* dPhi*, J(Phi) = 1 * Phi
        let j = VectorField::from_parts(
            "J",
            &[],
            &[
                (FunctionId::CapPhi, Expr::func(FunctionId::CapPhi)),
                (
                    FunctionId::CapPhiStar,
                    Expr::func(FunctionId::CapPhiStar).neg_ref(),
                ),
            ],
        )
        .unwrap();
        assert_eq!(
            relative_factor(&j, &Expr::func(FunctionId::CapPhi), 0).unwrap(),
            Some(Expr::one())
        );
    }

    #[test]
    fn conditional_example_fails() {
        // X = d1, F = x1, G = (u_1 = 0): residual 1 survives reduction.
        let p1 = translation(BaseVar::X1, "P1");
        let report = check_conditional_invariant(
            &p1,
            &Expr::base(BaseVar::X1),
            &(u(&[BaseVar::X1]), jet(&[BaseVar::X1])),
            1,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        assert_eq!(report.residual, "1");
    }

    #[test]
    fn x2_free_system_trivially_conditional() {
        let p2 = translation(BaseVar::X2, "P2");
        let eqs = vec![(u(&[BaseVar::X0]).add_ref(&u(&[])), jet(&[BaseVar::X0]))];
        let reports = check_system_invariance(&p2, &eqs, 2).unwrap();
        assert!(reports.iter().all(|r| r.passed()));
    }

    #[test]
    fn q_conditional_wrapper() {
        // Q = d0 + d3: G = u_0 + u_3; u itself is Q-conditionally trivial
        // because pr Q annihilates x-free expressions.
        let q = VectorField::from_parts(
            "Q",
            &[(BaseVar::X0, Expr::one()), (BaseVar::X3, Expr::one())],
            &[],
        )
        .unwrap();
        let g = q_characteristic(&q, FunctionId::U);
        assert_eq!(g, u(&[BaseVar::X0]).add_ref(&u(&[BaseVar::X3])));
        let report = check_q_conditional(&q, &u(&[]), FunctionId::U, 1).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn scaling_does_not_change_verdicts() {
        let p1 = translation(BaseVar::X1, "P1");
        let f = u(&[BaseVar::X0]).mul_ref(&u(&[]));
        let scaled = f.scale(&crate::coeff::GaussRat::from_ratio(-7, 3));
        let r1 = &check_absolute(std::slice::from_ref(&p1), &f, 1).unwrap()[0];
        let r2 = &check_absolute(&[p1], &scaled, 1).unwrap()[0];
        assert_eq!(r1.verdict, r2.verdict);
    }

    #[test]
    fn condition_system_includes_conjugate() {
        let cond = u(&[BaseVar::X0])
            .add_ref(&u(&[BaseVar::X3]))
            .add_ref(&Expr::i().mul_ref(&Expr::param(Param::M)).mul_ref(&u(&[])));
        let sys = condition_system(&cond, jet(&[BaseVar::X0]), 2).unwrap();
        let conj_lhs = JetVar::deriv(FunctionId::UStar, &[BaseVar::X0]);
        assert!(sys.rules().any(|(j, _)| *j == conj_lhs));
        assert!(sys.reduce(&cond.conjugate()).unwrap().is_zero());
    }
}
