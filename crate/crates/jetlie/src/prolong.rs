//! Vector fields and their prolongations to jet space.
//!
//! A [`VectorField`] is `xi^i d/dx_i + eta^r d/du^r` with coefficients in the
//! zeroth-order variables only. Its order-`l` prolongation carries one
//! coefficient per jet variable up to order `l`, computed by the standard
//! recursion
//!
//! ```text
//! coeff(u^r_{J+i}) = D_i coeff(u^r_J) - sum_j D_i(xi^j) u^r_{J+j}
//! ```
//!
//! and is applied to expressions as a derivation.

use crate::expr::{Atom, BaseVar, Expr, FunctionId, JetVar};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ProlongError {
    #[error("field coefficients must not contain derivatives: {0}")]
    CoefficientHasJet(String),
    #[error("expression contains {jet} of order {order}, above the prolongation order {max}")]
    OrderTooLow { jet: String, order: u32, max: u32 },
}

/// An infinitesimal operator on `(x, u)`-space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub name: String,
    xi: BTreeMap<BaseVar, Expr>,
    eta: BTreeMap<FunctionId, Expr>,
}

impl VectorField {
    pub fn new(
        name: impl Into<String>,
        xi: BTreeMap<BaseVar, Expr>,
        eta: BTreeMap<FunctionId, Expr>,
    ) -> Result<Self, ProlongError> {
        for e in xi.values().chain(eta.values()) {
            if e.has_positive_order_jet() {
                return Err(ProlongError::CoefficientHasJet(e.to_string()));
            }
        }
        Ok(VectorField {
            name: name.into(),
            xi,
            eta,
        })
    }

    /// Builder for the common case of a few nonzero coefficients.
    pub fn from_parts(
        name: impl Into<String>,
        xi: &[(BaseVar, Expr)],
        eta: &[(FunctionId, Expr)],
    ) -> Result<Self, ProlongError> {
        VectorField::new(
            name,
            xi.iter().cloned().collect(),
            eta.iter().cloned().collect(),
        )
    }

    pub fn xi(&self, v: BaseVar) -> Expr {
        self.xi.get(&v).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn eta(&self, f: FunctionId) -> Expr {
        self.eta.get(&f).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn xi_entries(&self) -> impl Iterator<Item = (&BaseVar, &Expr)> {
        self.xi.iter()
    }

    pub fn eta_entries(&self) -> impl Iterator<Item = (&FunctionId, &Expr)> {
        self.eta.iter()
    }

    /// The field with conjugated coefficients acting on conjugated functions.
    pub fn conjugate(&self, name: impl Into<String>) -> VectorField {
        VectorField {
            name: name.into(),
            xi: self.xi.iter().map(|(v, e)| (*v, e.conjugate())).collect(),
            eta: self
                .eta
                .iter()
                .map(|(f, e)| (f.conjugate(), e.conjugate()))
                .collect(),
        }
    }
}

/// A vector field together with all prolongation coefficients up to a fixed
/// order. Immutable after construction and safe to share.
#[derive(Clone, Debug)]
pub struct ProlongedField {
    pub base: VectorField,
    pub order: u32,
    coeffs: BTreeMap<JetVar, Expr>,
}

/// Compute the order-`l` prolongation of `field`. Coefficients are computed
/// for every function over its own variable domain.
pub fn prolong(field: &VectorField, l: u32) -> ProlongedField {
    let mut coeffs: BTreeMap<JetVar, Expr> = BTreeMap::new();
    for f in FunctionId::ALL {
        let seed = JetVar::value(f);
        coeffs.insert(seed, field.eta(f));
        let mut frontier = vec![seed];
        for _ in 0..l {
            let mut next = Vec::new();
            for jv in frontier {
                for &dir in f.domain() {
                    let target = JetVar::new(f, jv.index.plus(dir));
                    if coeffs.contains_key(&target) {
                        continue;
                    }
                    let prev = coeffs.get(&jv).expect("parent coefficient").clone();
                    let mut c = prev.total_derivative(dir);
                    for (&j, xi_j) in field.xi_entries() {
                        let dxi = xi_j.total_derivative(dir);
                        if dxi.is_zero() {
                            continue;
                        }
                        let shifted = Expr::jet(JetVar::new(f, jv.index.plus(j)));
                        c = c.sub_ref(&dxi.mul_ref(&shifted));
                    }
                    coeffs.insert(target, c);
                    next.push(target);
                }
            }
            frontier = next;
        }
    }
    ProlongedField {
        base: field.clone(),
        order: l,
        coeffs,
    }
}

impl ProlongedField {
    /// Prolongation coefficient for one jet variable; zero when out of the
    /// computed table (i.e. for a variable of higher order than requested the
    /// caller must re-prolong, see [`ProlongedField::apply`]).
    pub fn coeff(&self, jet: &JetVar) -> Option<&Expr> {
        self.coeffs.get(jet)
    }

    /// Apply the prolonged field to an expression as a derivation.
    pub fn apply(&self, target: &Expr) -> Result<Expr, ProlongError> {
        let order = self.order;
        target.derive_with(&mut |a: &Atom| match a {
            Atom::Base(v) => Ok(self.base.xi(*v)),
            Atom::Param(_) => Ok(Expr::zero()),
            Atom::Jet(j) => {
                if j.order() > order {
                    return Err(ProlongError::OrderTooLow {
                        jet: j.to_string(),
                        order: j.order(),
                        max: order,
                    });
                }
                Ok(self.coeffs.get(j).cloned().unwrap_or_else(Expr::zero))
            }
            _ => unreachable!("structured atoms handled by derive_with"),
        })
    }
}

/// Convenience: prolong and apply in one step, choosing the prolongation
/// order from the target.
pub fn apply_prolonged(field: &VectorField, target: &Expr, l: u32) -> Result<Expr, ProlongError> {
    prolong(field, l).apply(target)
}
