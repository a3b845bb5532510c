//! Solved-form differential constraints and reduction modulo them.
//!
//! A constraint `c * v + rest = 0`, linear in a chosen jet variable `v` with
//! an exactly invertible coefficient, becomes the rule `v -> -rest/c`
//! together with rules for every total-derivative consequence whose left-hand
//! side stays within the system's maximum order. The resulting
//! [`RewriteSystem`] is inter-reduced: no rule's right-hand side mentions any
//! rule's left-hand side, so reduction is a fixpoint substitution.

use crate::expr::{Atom, Expr, ExprError, JetVar};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("constraint is not linear in {0} with an invertible coefficient")]
    NotSolvable(String),
    #[error("constraint {0} has no admissible leading variable")]
    NoLeadingVariable(String),
    #[error("rules form a cycle involving {0}")]
    Cycle(String),
    #[error("constraints are inconsistent: reduced to the nonzero constant {0}")]
    Inconsistent(String),
    #[error("expression contains {0}, which the system rewrites only up to order {1}; rebuild with a higher max order")]
    OrderExceeded(String, u32),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// One solved constraint `lhs -> rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedRule {
    pub lhs: JetVar,
    pub rhs: Expr,
}

/// An inter-reduced set of solved rules closed under total derivatives up to
/// `max_order`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RewriteSystem {
    rules: BTreeMap<JetVar, Expr>,
    /// The originally solved constraints (before consequence closure).
    base: Vec<SolvedRule>,
    max_order: u32,
}

/// Extract the coefficient of `v` in `e` when `e` is degree-1 in `v` and the
/// coefficient is an invertible monomial (a Gaussian-rational times parameter
/// powers). Returns `(coefficient, rest)` with `e = coefficient * v + rest`.
fn split_linear(e: &Expr, v: JetVar) -> Option<(Expr, Expr)> {
    let coeff = e.partial(&Atom::Jet(v));
    if coeff.is_zero() {
        return None;
    }
    // Degree-1 check: the coefficient must not mention v.
    if coeff.atoms().contains(&Atom::Jet(v)) {
        return None;
    }
    // Invertibility: a single term whose atoms are parameters only.
    if coeff.num_terms() != 1 {
        return None;
    }
    let term = &coeff.terms()[0];
    let invertible = term
        .mono
        .factors()
        .iter()
        .all(|(a, _)| matches!(a, Atom::Param(_)));
    if !invertible {
        return None;
    }
    let rest = e.sub_ref(&coeff.mul_ref(&Expr::jet(v)));
    if rest.atoms().contains(&Atom::Jet(v)) {
        return None;
    }
    Some((coeff, rest))
}

/// Exact inverse of an invertible monomial (single term, parameter atoms
/// only, possibly negative exponents).
fn invert_monomial(coeff: &Expr) -> Expr {
    let term = &coeff.terms()[0];
    let mut acc = Expr::from_coeff(term.coeff.inv());
    for (a, e) in term.mono.factors() {
        let inv_atom = Expr::atom(a.clone())
            .pow_int(-(*e as i64))
            .expect("param atom");
        acc = acc.mul_ref(&inv_atom);
    }
    acc
}

/// Solve `constraint = 0` for `solve_for`.
fn solve(constraint: &Expr, solve_for: JetVar) -> Result<SolvedRule, RewriteError> {
    let (coeff, rest) = split_linear(constraint, solve_for)
        .ok_or_else(|| RewriteError::NotSolvable(solve_for.to_string()))?;
    let rhs = rest.neg_ref().mul_ref(&invert_monomial(&coeff));
    Ok(SolvedRule {
        lhs: solve_for,
        rhs,
    })
}

/// Candidate leading variables of a constraint: jet variables with an
/// invertible linear coefficient, preferring the highest derivative order and
/// breaking ties by the canonical order on jet variables.
fn pick_leading(constraint: &Expr) -> Option<JetVar> {
    let mut candidates: Vec<JetVar> = constraint
        .atoms()
        .into_iter()
        .filter_map(|a| match a {
            Atom::Jet(j) if split_linear(constraint, j).is_some() => Some(j),
            _ => None,
        })
        .collect();
    candidates.sort_by_key(|j| (std::cmp::Reverse(j.order()), *j));
    candidates.first().copied()
}

impl RewriteSystem {
    pub fn empty(max_order: u32) -> Self {
        RewriteSystem {
            rules: BTreeMap::new(),
            base: Vec::new(),
            max_order,
        }
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn rules(&self) -> impl Iterator<Item = (&JetVar, &Expr)> {
        self.rules.iter()
    }

    pub fn base_rules(&self) -> &[SolvedRule] {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// True if the system would rewrite `jet` at some order (i.e. `jet` is a
    /// derivative of a solved base variable).
    pub fn rewrites_eventually(&self, jet: &JetVar) -> bool {
        self.base
            .iter()
            .any(|r| r.lhs.function == jet.function && jet.index.contains(&r.lhs.index))
    }

    /// Normal form of `e` modulo the system: fixpoint substitution of all
    /// rules, then normalization. Errors if `e` contains a rewritable jet
    /// variable above the system's maximum order.
    pub fn reduce(&self, e: &Expr) -> Result<Expr, RewriteError> {
        for a in e.atoms() {
            if let Atom::Jet(j) = a {
                if j.order() > self.max_order && self.rewrites_eventually(&j) {
                    return Err(RewriteError::OrderExceeded(j.to_string(), self.max_order));
                }
            }
        }
        let bindings: BTreeMap<Atom, Expr> = self
            .rules
            .iter()
            .map(|(j, r)| (Atom::Jet(*j), r.clone()))
            .collect();
        let mut current = e.clone();
        for _ in 0..64 {
            let hit = current.atoms().iter().any(|a| bindings.contains_key(a));
            if !hit {
                return Ok(current.normalize());
            }
            current = current.substitute(&bindings)?;
        }
        Err(RewriteError::Cycle("reduction did not converge".into()))
    }

    /// Close the current base rules under total derivatives up to
    /// `max_order` and inter-reduce.
    ///
    /// Inter-reduction may expose a hidden dependency: substituting other
    /// rules can bring a rule's own left-hand side into its right-hand side.
    /// With a rational coefficient `c != 1` the rule is re-solved exactly;
    /// with `c = 1` the rule degenerates into a lower constraint, which is
    /// re-solved for a fresh leading variable and closure restarts. This is
    /// what turns the raw wave rule `u33 -> u00 - u11 - u22 + ...` into a
    /// rule for `u11` once the side condition eliminates `u00`.
    fn close_and_interreduce(&mut self) -> Result<(), RewriteError> {
        'rebuild: for _attempt in 0..16 {
            let mut rules: BTreeMap<JetVar, Expr> = BTreeMap::new();
            for r in &self.base {
                rules.insert(r.lhs, r.rhs.clone());
            }
            // Consequences, breadth-first by added derivative.
            for r in &self.base {
                let mut frontier: Vec<(JetVar, Expr)> = vec![(r.lhs, r.rhs.clone())];
                while let Some((jv, rhs)) = frontier.pop() {
                    for &dir in jv.function.domain() {
                        let target = JetVar::new(jv.function, jv.index.plus(dir));
                        if target.order() > self.max_order || rules.contains_key(&target) {
                            continue;
                        }
                        let new_rhs = rhs.total_derivative(dir);
                        rules.insert(target, new_rhs.clone());
                        frontier.push((target, new_rhs));
                    }
                }
            }
            // Inter-reduce right-hand sides against all other rules.
            for _pass in 0..64 {
                let mut changed = false;
                let snapshot = rules.clone();
                for (lhs, rhs) in rules.iter_mut() {
                    let bindings: BTreeMap<Atom, Expr> = snapshot
                        .iter()
                        .filter(|(j, _)| *j != lhs)
                        .map(|(j, r)| (Atom::Jet(*j), r.clone()))
                        .collect();
                    let reduced = rhs.substitute(&bindings)?;
                    if &reduced != rhs {
                        *rhs = reduced;
                        changed = true;
                    }
                    if !rhs.atoms().contains(&Atom::Jet(*lhs)) {
                        continue;
                    }
                    // Self-dependent rule: re-solve or degenerate.
                    let coeff = rhs.partial(&Atom::Jet(*lhs));
                    let c = coeff
                        .as_coeff()
                        .ok_or_else(|| RewriteError::NotSolvable(lhs.to_string()))?;
                    let one = crate::coeff::GaussRat::one();
                    if c != one {
                        let rest = rhs.sub_ref(&coeff.mul_ref(&Expr::jet(*lhs)));
                        let scale = (&one - &c).inv();
                        *rhs = rest.scale(&scale);
                        changed = true;
                        continue;
                    }
                    let constraint = Expr::jet(*lhs).sub_ref(rhs);
                    self.base.retain(|r| r.lhs != *lhs);
                    if !constraint.is_zero() {
                        if let Some(con) = constraint.as_coeff() {
                            if !con.is_zero() {
                                return Err(RewriteError::Inconsistent(constraint.to_string()));
                            }
                        }
                        let lead = pick_leading(&constraint).ok_or_else(|| {
                            RewriteError::NoLeadingVariable(constraint.to_string())
                        })?;
                        self.base.push(solve(&constraint, lead)?);
                    }
                    continue 'rebuild;
                }
                if !changed {
                    for (lhs, rhs) in &rules {
                        if rhs.atoms().contains(&Atom::Jet(*lhs)) {
                            return Err(RewriteError::Cycle(lhs.to_string()));
                        }
                    }
                    self.rules = rules;
                    return Ok(());
                }
            }
            return Err(RewriteError::Cycle(
                "inter-reduction did not converge".into(),
            ));
        }
        Err(RewriteError::Cycle("closure kept degenerating".into()))
    }
}

/// Build the rewrite system generated by one constraint solved for
/// `solve_for`, closed under total derivatives up to `max_order` (measured as
/// absolute jet order of the rewritten variable).
pub fn consequences(
    constraint: &Expr,
    solve_for: JetVar,
    max_order: u32,
) -> Result<RewriteSystem, RewriteError> {
    let rule = solve(constraint, solve_for)?;
    let mut sys = RewriteSystem::empty(max_order);
    sys.base.push(rule);
    sys.close_and_interreduce()?;
    Ok(sys)
}

/// Build a system from several constraints at once; equivalent to merging
/// their individual systems.
pub fn system_from_constraints(
    constraints: &[(Expr, JetVar)],
    max_order: u32,
) -> Result<RewriteSystem, RewriteError> {
    let mut acc = RewriteSystem::empty(max_order);
    for (c, v) in constraints {
        let single = consequences(c, *v, max_order)?;
        acc = merge(&acc, &single)?;
    }
    Ok(acc)
}

/// Inter-reduced union of two systems, closed under consequences up to the
/// smaller maximum order.
///
/// During inter-reduction a base rule's right-hand side may come to depend on
/// its own left-hand side. When the net coefficient differs from one, the
/// rule is re-solved exactly; when the left-hand side cancels, the residual
/// constraint is re-solved for a fresh leading variable (highest order first,
/// canonical order breaking ties). A residual nonzero constant means the
/// systems are inconsistent.
pub fn merge(s1: &RewriteSystem, s2: &RewriteSystem) -> Result<RewriteSystem, RewriteError> {
    let max_order = if s1.base.is_empty() {
        s2.max_order
    } else if s2.base.is_empty() {
        s1.max_order
    } else {
        s1.max_order.min(s2.max_order)
    };
    // Sequential elimination, lowest leading order first, so that a
    // higher-order constraint is reduced by the consequence closure of the
    // lower ones before it is solved. This is what exposes a degenerate
    // leading variable (the wave rule losing u33 on the condition manifold)
    // at the earliest point, independent of argument order.
    let mut incoming: Vec<&SolvedRule> = s1.base.iter().chain(s2.base.iter()).collect();
    incoming.sort_by_key(|r| (r.lhs.order(), r.lhs));
    let mut solved: Vec<SolvedRule> = Vec::new();
    for rule in incoming {
        // Reduce the incoming constraint by what is solved so far.
        let mut partial = RewriteSystem::empty(max_order);
        partial.base = solved.clone();
        partial.close_and_interreduce()?;
        let constraint = Expr::jet(rule.lhs).sub_ref(&rule.rhs);
        let reduced = partial.reduce(&constraint)?;
        if reduced.is_zero() {
            continue; // redundant
        }
        if let Some(c) = reduced.as_coeff() {
            if !c.is_zero() {
                return Err(RewriteError::Inconsistent(reduced.to_string()));
            }
        }
        // Prefer the original leading variable when it survived.
        let lead = if split_linear(&reduced, rule.lhs).is_some() {
            rule.lhs
        } else {
            pick_leading(&reduced)
                .ok_or_else(|| RewriteError::NoLeadingVariable(reduced.to_string()))?
        };
        solved.push(solve(&reduced, lead)?);
    }
    let mut sys = RewriteSystem::empty(max_order);
    sys.base = solved;
    sys.close_and_interreduce()?;
    Ok(sys)
}

/// Reduce with an explicit rule application order, one rule at a time, for
/// confluence testing. The result of a confluent system must agree with
/// [`RewriteSystem::reduce`].
pub fn reduce_with_order(
    sys: &RewriteSystem,
    e: &Expr,
    order: &[JetVar],
) -> Result<Expr, RewriteError> {
    let mut current = e.clone();
    for _ in 0..256 {
        let mut hit = false;
        for jv in order {
            if let Some(rhs) = sys.rules.get(jv) {
                if current.atoms().contains(&Atom::Jet(*jv)) {
                    let mut single = BTreeMap::new();
                    single.insert(Atom::Jet(*jv), rhs.clone());
                    current = current.substitute(&single)?;
                    hit = true;
                }
            }
        }
        if !hit {
            return Ok(current.normalize());
        }
    }
    Err(RewriteError::Cycle(
        "sequential reduction did not converge".into(),
    ))
}

/// The coefficient `i*m` that recurs in the light-cone condition; kept here
/// for tests.
#[cfg(test)]
fn im() -> Expr {
    Expr::i().mul_ref(&Expr::param(crate::expr::Param::M))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BaseVar, FunctionId, Param};

    fn u(vars: &[BaseVar]) -> Expr {
        Expr::deriv(FunctionId::U, vars)
    }

    fn jet(vars: &[BaseVar]) -> JetVar {
        JetVar::deriv(FunctionId::U, vars)
    }

    fn condition() -> Expr {
        u(&[BaseVar::X0])
            .add_ref(&u(&[BaseVar::X3]))
            .add_ref(&im().mul_ref(&u(&[])))
    }

    #[test]
    fn condition_base_rule() {
        let sys = consequences(&condition(), jet(&[BaseVar::X0]), 2).unwrap();
        let rhs = sys
            .rules()
            .find(|(j, _)| **j == jet(&[BaseVar::X0]))
            .map(|(_, r)| r.clone())
            .unwrap();
        let expected = u(&[BaseVar::X3]).neg_ref().sub_ref(&im().mul_ref(&u(&[])));
        assert_eq!(rhs, expected);
    }

    #[test]
    fn condition_second_order_consequence() {
        // u_00 -> u_33 + 2 i m u_3 - m^2 u
        let sys = consequences(&condition(), jet(&[BaseVar::X0]), 2).unwrap();
        let rhs = sys
            .rules()
            .find(|(j, _)| **j == jet(&[BaseVar::X0, BaseVar::X0]))
            .map(|(_, r)| r.clone())
            .unwrap();
        let m = Expr::param(Param::M);
        let expected = u(&[BaseVar::X3, BaseVar::X3])
            .add_ref(
                &im()
                    .scale(&crate::coeff::GaussRat::from_int(2))
                    .mul_ref(&u(&[BaseVar::X3])),
            )
            .sub_ref(&m.pow_int(2).unwrap().mul_ref(&u(&[])));
        assert_eq!(rhs, expected);
    }

    #[test]
    fn trivial_gradient_system() {
        // u_1 = 0 closed to order 2 kills all its derivatives.
        let sys = consequences(&u(&[BaseVar::X1]), jet(&[BaseVar::X1]), 2).unwrap();
        let expected_lhs: Vec<JetVar> = vec![
            jet(&[BaseVar::X1]),
            jet(&[BaseVar::X0, BaseVar::X1]),
            jet(&[BaseVar::X1, BaseVar::X1]),
            jet(&[BaseVar::X1, BaseVar::X2]),
            jet(&[BaseVar::X1, BaseVar::X3]),
        ];
        let got: Vec<JetVar> = sys.rules().map(|(j, _)| *j).collect();
        for l in &expected_lhs {
            assert!(got.contains(l), "missing rule for {l}");
        }
        assert_eq!(got.len(), expected_lhs.len());
        for (_, rhs) in sys.rules() {
            assert!(rhs.is_zero());
        }
    }

    #[test]
    fn reduce_condition_to_zero() {
        let sys = consequences(&condition(), jet(&[BaseVar::X0]), 2).unwrap();
        assert!(sys.reduce(&condition()).unwrap().is_zero());
    }

    #[test]
    fn reduce_by_empty_system_normalizes() {
        let sys = RewriteSystem::empty(2);
        let e = u(&[BaseVar::X1]).add_ref(&u(&[BaseVar::X1]));
        assert_eq!(sys.reduce(&e).unwrap(), e.normalize());
    }

    #[test]
    fn reduce_order_exceeded() {
        let sys = consequences(&condition(), jet(&[BaseVar::X0]), 1).unwrap();
        let e = u(&[BaseVar::X0, BaseVar::X0]);
        assert!(matches!(
            sys.reduce(&e),
            Err(RewriteError::OrderExceeded(_, 1))
        ));
    }

    #[test]
    fn merge_with_empty_and_self() {
        let sys = consequences(&condition(), jet(&[BaseVar::X0]), 2).unwrap();
        let merged = merge(&sys, &RewriteSystem::empty(2)).unwrap();
        assert_eq!(merged, sys);
        let twice = merge(&sys, &sys).unwrap();
        assert_eq!(twice, sys);
    }

    #[test]
    fn merge_resolves_degenerate_leading_variable() {
        // Wave equation solved for u_33 collides with the condition's
        // consequence for u_00; the merge re-solves for u_11.
        let lam = Expr::param(Param::Lambda);
        let box_u = u(&[BaseVar::X0, BaseVar::X0])
            .neg_ref()
            .add_ref(&u(&[BaseVar::X1, BaseVar::X1]))
            .add_ref(&u(&[BaseVar::X2, BaseVar::X2]))
            .add_ref(&u(&[BaseVar::X3, BaseVar::X3]));
        let wave = box_u.sub_ref(
            &lam.mul_ref(&u(&[]).pow_int(2).unwrap())
                .mul_ref(&Expr::func(FunctionId::UStar)),
        );
        let cond_sys = consequences(&condition(), jet(&[BaseVar::X0]), 2).unwrap();
        let wave_sys = consequences(&wave, jet(&[BaseVar::X3, BaseVar::X3]), 2).unwrap();
        let merged = merge(&cond_sys, &wave_sys).unwrap();
        assert!(
            merged
                .rules()
                .any(|(j, _)| *j == jet(&[BaseVar::X1, BaseVar::X1])),
            "expected the wave constraint re-solved for u[1,1]"
        );
        // The merged system sends the wave polynomial to zero.
        assert!(merged.reduce(&wave).unwrap().is_zero());
        assert!(merged.reduce(&condition()).unwrap().is_zero());
    }

    #[test]
    fn sequential_reduction_matches() {
        let sys = consequences(&condition(), jet(&[BaseVar::X0]), 2).unwrap();
        let e = u(&[BaseVar::X0, BaseVar::X0])
            .mul_ref(&u(&[BaseVar::X0]))
            .add_ref(&u(&[BaseVar::X0, BaseVar::X1]));
        let expected = sys.reduce(&e).unwrap();
        let mut order: Vec<JetVar> = sys.rules().map(|(j, _)| *j).collect();
        order.reverse();
        assert_eq!(reduce_with_order(&sys, &e, &order).unwrap(), expected);
    }

    #[test]
    fn unsolvable_constraints_error() {
        // coefficient of u_0 is u (not a parameter monomial)
        let c = u(&[])
            .mul_ref(&u(&[BaseVar::X0]))
            .add_ref(&u(&[BaseVar::X3]));
        assert!(matches!(
            consequences(&c, jet(&[BaseVar::X0]), 2),
            Err(RewriteError::NotSolvable(_))
        ));
        // nonlinear in u_0
        let c2 = u(&[BaseVar::X0]).pow_int(2).unwrap().add_ref(&u(&[]));
        assert!(matches!(
            consequences(&c2, jet(&[BaseVar::X0]), 2),
            Err(RewriteError::NotSolvable(_))
        ));
    }
}
