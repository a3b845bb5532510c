//! Canonical jet-space expressions.
//!
//! An [`Expr`] is a sum of terms, each an exact Gaussian-rational coefficient
//! times a monomial in atoms. Atoms are independent variables, jet variables
//! (a function tagged with a derivative multi-index), symbolic parameters,
//! exponentials of expressions, and rational powers of expressions. All
//! arithmetic routes through smart constructors that keep the representation
//! canonical, so two mathematically equal expressions in this fragment compare
//! equal structurally and `e - e` is the empty sum.
//!
//! Canonical-form invariants:
//! - terms are sorted by graded-lex monomial order, like monomials merged,
//!   zero coefficients dropped;
//! - a term carries at most one exponential factor: `exp(a)*exp(b)` is stored
//!   as `exp(a+b)`, `exp(a)^k` as `exp(k*a)`, and `exp(0)` is 1;
//! - power atoms merge within a term: `pow(e,a)*pow(e,b) = pow(e,a+b)`,
//!   `pow(e,0)` is 1, and positive integer powers of multi-term bases are
//!   expanded into polynomials;
//! - integer powers of a plain atom live in the monomial exponent (which may
//!   be negative, e.g. `u^-3`); non-integer powers become power atoms.

use crate::coeff::GaussRat;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;
use thiserror::Error;

/// Exact rational exponent for power atoms.
pub type Exponent = Ratio<i64>;

/// Independent variables. The wave setting uses `x0..x3`; the reduced
/// setting uses `tau, x1, x2` (the spatial variables are shared).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BaseVar {
    X0,
    X1,
    X2,
    X3,
    Tau,
}

impl BaseVar {
    pub const ALL: [BaseVar; 5] = [
        BaseVar::X0,
        BaseVar::X1,
        BaseVar::X2,
        BaseVar::X3,
        BaseVar::Tau,
    ];

    /// Slot in a [`MultiIndex`].
    pub fn slot(self) -> usize {
        match self {
            BaseVar::X0 => 0,
            BaseVar::X1 => 1,
            BaseVar::X2 => 2,
            BaseVar::X3 => 3,
            BaseVar::Tau => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseVar::X0 => "x0",
            BaseVar::X1 => "x1",
            BaseVar::X2 => "x2",
            BaseVar::X3 => "x3",
            BaseVar::Tau => "tau",
        }
    }

    /// Short index label used inside jet brackets: `u[0,3]`, `phi[t,1]`.
    pub fn index_label(self) -> &'static str {
        match self {
            BaseVar::X0 => "0",
            BaseVar::X1 => "1",
            BaseVar::X2 => "2",
            BaseVar::X3 => "3",
            BaseVar::Tau => "t",
        }
    }
}

/// Dependent functions. Conjugation pairs `u <-> u*`, `Phi <-> Phi*`,
/// `phi <-> phi*` and fixes everything else.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FunctionId {
    U,
    UStar,
    CapPhi,
    CapPhiStar,
    Phi,
    PhiStar,
}

impl FunctionId {
    pub const ALL: [FunctionId; 6] = [
        FunctionId::U,
        FunctionId::UStar,
        FunctionId::CapPhi,
        FunctionId::CapPhiStar,
        FunctionId::Phi,
        FunctionId::PhiStar,
    ];

    pub fn conjugate(self) -> FunctionId {
        match self {
            FunctionId::U => FunctionId::UStar,
            FunctionId::UStar => FunctionId::U,
            FunctionId::CapPhi => FunctionId::CapPhiStar,
            FunctionId::CapPhiStar => FunctionId::CapPhi,
            FunctionId::Phi => FunctionId::PhiStar,
            FunctionId::PhiStar => FunctionId::Phi,
        }
    }

    /// The independent variables this function depends on.
    pub fn domain(self) -> &'static [BaseVar] {
        match self {
            FunctionId::U | FunctionId::UStar => {
                &[BaseVar::X0, BaseVar::X1, BaseVar::X2, BaseVar::X3]
            }
            _ => &[BaseVar::Tau, BaseVar::X1, BaseVar::X2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::U => "u",
            FunctionId::UStar => "u*",
            FunctionId::CapPhi => "Phi",
            FunctionId::CapPhiStar => "Phi*",
            FunctionId::Phi => "phi",
            FunctionId::PhiStar => "phi*",
        }
    }
}

/// Symbolic real constants.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Param {
    M,
    Lambda,
    N,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::M => "m",
            Param::Lambda => "lambda",
            Param::N => "n",
        }
    }
}

/// Derivative multi-index: per-variable counts, so commutativity of partial
/// derivatives is built in.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct MultiIndex {
    counts: [u8; 5],
}

/// Graded order, then lexicographic by differentiation slots, so that
/// `u < u[0] < u[1] < ... < u[0,0] < u[0,1] < u[1,1] < u[2,2]`.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.slots().cmp(&other.slots()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex::default()
    }

    pub fn from_vars(vars: &[BaseVar]) -> Self {
        let mut idx = MultiIndex::default();
        for v in vars {
            idx.counts[v.slot()] += 1;
        }
        idx
    }

    pub fn order(&self) -> u32 {
        self.counts.iter().map(|&c| c as u32).sum()
    }

    pub fn count(&self, v: BaseVar) -> u8 {
        self.counts[v.slot()]
    }

    pub fn plus(&self, v: BaseVar) -> Self {
        let mut idx = *self;
        idx.counts[v.slot()] += 1;
        idx
    }

    /// Componentwise `self >= other`.
    pub fn contains(&self, other: &MultiIndex) -> bool {
        self.counts
            .iter()
            .zip(other.counts.iter())
            .all(|(a, b)| a >= b)
    }

    /// Variables listed with multiplicity, `tau` first.
    pub fn vars(&self) -> Vec<BaseVar> {
        let mut out = Vec::new();
        for v in [
            BaseVar::Tau,
            BaseVar::X0,
            BaseVar::X1,
            BaseVar::X2,
            BaseVar::X3,
        ] {
            for _ in 0..self.counts[v.slot()] {
                out.push(v);
            }
        }
        out
    }

    /// Differentiation slots with multiplicity in enum order, for ordering.
    fn slots(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (slot, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                out.push(slot);
            }
        }
        out
    }
}

/// One dependent function tagged with a derivative multi-index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct JetVar {
    pub function: FunctionId,
    pub index: MultiIndex,
}

impl JetVar {
    pub fn new(function: FunctionId, index: MultiIndex) -> Self {
        JetVar { function, index }
    }

    pub fn value(function: FunctionId) -> Self {
        JetVar::new(function, MultiIndex::empty())
    }

    pub fn deriv(function: FunctionId, vars: &[BaseVar]) -> Self {
        JetVar::new(function, MultiIndex::from_vars(vars))
    }

    pub fn order(&self) -> u32 {
        self.index.order()
    }

    pub fn conjugate(&self) -> JetVar {
        JetVar::new(self.function.conjugate(), self.index)
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.function.name())?;
        if self.index.order() > 0 {
            let labels: Vec<&str> = self.index.vars().iter().map(|v| v.index_label()).collect();
            write!(f, "[{}]", labels.join(","))?;
        }
        Ok(())
    }
}

/// The atoms a monomial is built from.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Base(BaseVar),
    Jet(JetVar),
    Param(Param),
    /// `exp(argument)`; the argument is canonical. Carries monomial
    /// exponent 1 by invariant.
    Exp(Arc<Expr>),
    /// `base^(p/q)` for a canonical base. Either the base is multi-term with
    /// a negative or non-integer exponent, or the base is a single atom with
    /// a non-integer exponent. Carries monomial exponent 1 by invariant.
    Pow(Arc<Expr>, Exponent),
}

impl Atom {
    pub fn jet(function: FunctionId, vars: &[BaseVar]) -> Atom {
        Atom::Jet(JetVar::deriv(function, vars))
    }
}

/// Product of atoms with nonzero integer exponents, sorted by atom order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial {
    factors: Vec<(Atom, i32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(a: Atom) -> Self {
        Monomial {
            factors: vec![(a, 1)],
        }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.factors
    }

    fn degree(&self) -> i64 {
        self.factors.iter().map(|&(_, k)| k as i64).sum()
    }

    /// Graded-lex comparison used for term ordering and division.
    fn cmp_graded(&self, other: &Monomial) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

/// A coefficient times a monomial.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Term {
    pub coeff: GaussRat,
    pub mono: Monomial,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("0^0 is undefined")]
    ZeroPowZero,
    #[error("zero base raised to a negative power")]
    ZeroToNegativePower,
    #[error("binding for {function:?} covers some but not all of its jet variables in the target (missing {missing})")]
    IncompleteSubstitution {
        function: FunctionId,
        missing: String,
    },
}

/// A canonical sum of terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Expr {
    terms: Vec<Term>,
}

impl Expr {
    // ----- constructors -----

    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::from_coeff(GaussRat::one())
    }

    pub fn from_int(n: i64) -> Self {
        Expr::from_coeff(GaussRat::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Expr::from_coeff(GaussRat::from_ratio(num, den))
    }

    /// The imaginary unit as an expression.
    pub fn i() -> Self {
        Expr::from_coeff(GaussRat::i())
    }

    pub fn from_coeff(c: GaussRat) -> Self {
        if c.is_zero() {
            Expr::zero()
        } else {
            Expr {
                terms: vec![Term {
                    coeff: c,
                    mono: Monomial::one(),
                }],
            }
        }
    }

    pub fn atom(a: Atom) -> Self {
        Expr {
            terms: vec![Term {
                coeff: GaussRat::one(),
                mono: Monomial::atom(a),
            }],
        }
    }

    pub fn base(v: BaseVar) -> Self {
        Expr::atom(Atom::Base(v))
    }

    pub fn jet(j: JetVar) -> Self {
        Expr::atom(Atom::Jet(j))
    }

    pub fn func(f: FunctionId) -> Self {
        Expr::jet(JetVar::value(f))
    }

    pub fn deriv(f: FunctionId, vars: &[BaseVar]) -> Self {
        Expr::jet(JetVar::deriv(f, vars))
    }

    pub fn param(p: Param) -> Self {
        Expr::atom(Atom::Param(p))
    }

    /// `exp(arg)`, with `exp(0) = 1`.
    pub fn exp_of(arg: &Expr) -> Self {
        if arg.is_zero() {
            Expr::one()
        } else {
            Expr::atom(Atom::Exp(Arc::new(arg.clone())))
        }
    }

    fn from_terms(terms: Vec<Term>) -> Self {
        let mut ts = terms;
        ts.sort_by(|a, b| b.mono.cmp_graded(&a.mono));
        let mut out: Vec<Term> = Vec::with_capacity(ts.len());
        for t in ts {
            if t.coeff.is_zero() {
                continue;
            }
            if let Some(last) = out.last_mut() {
                if last.mono == t.mono {
                    last.coeff = &last.coeff + &t.coeff;
                    if last.coeff.is_zero() {
                        out.pop();
                    }
                    continue;
                }
            }
            out.push(t);
        }
        Expr { terms: out }
    }

    // ----- inspection -----

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].coeff.is_one() && self.terms[0].mono.is_one()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Constant value if the expression is a pure coefficient.
    pub fn as_coeff(&self) -> Option<GaussRat> {
        if self.is_zero() {
            return Some(GaussRat::zero());
        }
        if self.terms.len() == 1 && self.terms[0].mono.is_one() {
            return Some(self.terms[0].coeff.clone());
        }
        None
    }

    /// If the expression is exactly one atom with coefficient 1 and
    /// exponent 1, return it.
    pub fn as_single_atom(&self) -> Option<&Atom> {
        if self.terms.len() == 1 && self.terms[0].coeff.is_one() {
            let fs = self.terms[0].mono.factors();
            if fs.len() == 1 && fs[0].1 == 1 {
                return Some(&fs[0].0);
            }
        }
        None
    }

    /// All atoms occurring anywhere, recursing into exp/pow arguments.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut set = BTreeSet::new();
        self.collect_atoms(&mut set);
        set
    }

    fn collect_atoms(&self, set: &mut BTreeSet<Atom>) {
        for t in &self.terms {
            for (a, _) in t.mono.factors() {
                set.insert(a.clone());
                match a {
                    Atom::Exp(arg) => arg.collect_atoms(set),
                    Atom::Pow(base, _) => base.collect_atoms(set),
                    _ => {}
                }
            }
        }
    }

    /// Maximum derivative order of any jet variable, recursing into
    /// exp/pow arguments.
    pub fn jet_order(&self) -> u32 {
        self.atoms()
            .iter()
            .filter_map(|a| match a {
                Atom::Jet(j) => Some(j.order()),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// True if some jet variable of order >= 1 occurs.
    pub fn has_positive_order_jet(&self) -> bool {
        self.jet_order() >= 1
    }

    // ----- ring operations -----

    pub fn neg_ref(&self) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: -&t.coeff,
                    mono: t.mono.clone(),
                })
                .collect(),
        }
    }

    pub fn add_ref(&self, other: &Expr) -> Expr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Expr::from_terms(terms)
    }

    pub fn sub_ref(&self, other: &Expr) -> Expr {
        self.add_ref(&other.neg_ref())
    }

    pub fn scale(&self, c: &GaussRat) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * c,
                    mono: t.mono.clone(),
                })
                .collect(),
        }
    }

    pub fn mul_ref(&self, other: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for t1 in &self.terms {
            for t2 in &other.terms {
                acc = acc.add_ref(&mul_terms(t1, t2));
            }
        }
        acc
    }

    /// Integer power. Negative exponents invert; see [`Expr::pow`].
    pub fn pow_int(&self, k: i64) -> Result<Expr, ExprError> {
        self.pow(Exponent::from_integer(k))
    }

    /// Exact rational power with canonical placement of the result:
    /// integer powers of single atoms fold into monomial exponents,
    /// positive integer powers of sums expand, everything else becomes a
    /// power atom. `0^0` and `0^negative` are rejected.
    pub fn pow(&self, r: Exponent) -> Result<Expr, ExprError> {
        if self.is_zero() {
            if r.is_zero() {
                return Err(ExprError::ZeroPowZero);
            }
            if r.is_negative() {
                return Err(ExprError::ZeroToNegativePower);
            }
            return Ok(Expr::zero());
        }
        if r.is_zero() {
            return Ok(Expr::one());
        }
        if r == Exponent::from_integer(1) {
            return Ok(self.clone());
        }
        // Single-term base: distribute over the monomial when exact.
        if self.terms.len() == 1 {
            let t = &self.terms[0];
            if r.is_integer() {
                let k = r.to_integer();
                let coeff = t.coeff.powi(k);
                let mut acc = Expr::from_coeff(coeff);
                for (a, e) in t.mono.factors() {
                    let shifted = atom_power(a, Exponent::from_integer(*e as i64) * r)?;
                    acc = acc.mul_ref(&shifted);
                }
                return Ok(acc);
            }
            if t.coeff.is_one() {
                let mut acc = Expr::one();
                for (a, e) in t.mono.factors() {
                    let shifted = atom_power(a, Exponent::from_integer(*e as i64) * r)?;
                    acc = acc.mul_ref(&shifted);
                }
                return Ok(acc);
            }
            // Non-integer power of a scaled monomial: keep the whole base.
            return Ok(Expr::atom(Atom::Pow(Arc::new(self.clone()), r)));
        }
        // Multi-term base.
        if r.is_integer() && r.is_positive() {
            let k = r.to_integer();
            let mut acc = Expr::one();
            for _ in 0..k {
                acc = acc.mul_ref(self);
            }
            return Ok(acc);
        }
        // Factor a common exponential out of the base (exact for any r) and,
        // for integer exponents, make the base monic; equal quotients built
        // along different routes then share one canonical power atom.
        let mut outside = Expr::one();
        let mut base = self.clone();
        if let Some(g) = base.common_exp_argument() {
            base = base.mul_ref(&Expr::exp_of(&g.neg_ref()));
            let rat = GaussRat {
                re: num_rational::BigRational::new(
                    num_bigint::BigInt::from(*r.numer()),
                    num_bigint::BigInt::from(*r.denom()),
                ),
                im: num_rational::BigRational::from_integer(num_bigint::BigInt::from(0)),
            };
            outside = Expr::exp_of(&g.scale(&rat));
        }
        if r.is_integer() {
            let lead = base.terms[0].coeff.clone();
            if !lead.is_one() {
                base = base.scale(&lead.inv());
                outside = outside.scale(&lead.powi(r.to_integer()));
            }
        }
        Ok(outside.mul_ref(&Expr::atom(Atom::Pow(Arc::new(base), r))))
    }

    /// If every term carries an exponential factor, the argument of the
    /// leading term's exponential (a canonical choice of common factor).
    fn common_exp_argument(&self) -> Option<Expr> {
        let mut lead: Option<Expr> = None;
        for t in &self.terms {
            let found = t.mono.factors().iter().find_map(|(a, _)| match a {
                Atom::Exp(arg) => Some((**arg).clone()),
                _ => None,
            })?;
            if lead.is_none() {
                lead = Some(found);
            }
        }
        lead
    }

    /// Exact reciprocal: `pow(self, -1)`.
    pub fn inv(&self) -> Result<Expr, ExprError> {
        self.pow(Exponent::from_integer(-1))
    }

    /// Idempotent re-canonicalization. Construction already keeps values
    /// canonical; this rebuilds from scratch and is used by tests and the
    /// parser as a single entry point.
    pub fn normalize(&self) -> Expr {
        let mut acc = Expr::zero();
        for t in &self.terms {
            let mut term_expr = Expr::from_coeff(t.coeff.clone());
            for (a, e) in t.mono.factors() {
                let rebuilt = match a {
                    Atom::Exp(arg) => Expr::exp_of(&arg.normalize()),
                    Atom::Pow(base, r) => base.normalize().pow(*r).expect("canonical pow"),
                    other => Expr::atom(other.clone()),
                };
                let powed = rebuilt.pow_int(*e as i64).expect("canonical pow");
                term_expr = term_expr.mul_ref(&powed);
            }
            acc = acc.add_ref(&term_expr);
        }
        acc
    }

    // ----- calculus -----

    /// Generic derivation: extends the leaf rule over products, sums,
    /// exponentials (`d exp(a) = da * exp(a)`) and powers
    /// (`d b^r = r * b^(r-1) * db`) by linearity and the Leibniz rule.
    pub fn derive_with<E>(
        &self,
        leaf: &mut impl FnMut(&Atom) -> Result<Expr, E>,
    ) -> Result<Expr, E> {
        let mut acc = Expr::zero();
        for t in &self.terms {
            for (pos, (a, e)) in t.mono.factors().iter().enumerate() {
                let da = derive_atom(a, leaf)?;
                if da.is_zero() {
                    continue;
                }
                // term * e / a * da
                let mut rest = Vec::with_capacity(t.mono.factors().len());
                for (q, (b, k)) in t.mono.factors().iter().enumerate() {
                    let k2 = if q == pos { *k - 1 } else { *k };
                    if k2 != 0 {
                        rest.push((b.clone(), k2));
                    }
                }
                // Dropping or decrementing one slot of a sorted factor list
                // keeps it canonical, so the term can be built directly.
                let base_term = Term {
                    coeff: &t.coeff * &GaussRat::from_int(*e as i64),
                    mono: Monomial { factors: rest },
                };
                let contrib = Expr {
                    terms: vec![base_term],
                }
                .mul_ref(&da);
                acc = acc.add_ref(&contrib);
            }
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to one atom; all other atoms
    /// are treated as independent. Exponentials and powers differentiate by
    /// the chain rule.
    pub fn partial(&self, v: &Atom) -> Expr {
        let res: Result<Expr, std::convert::Infallible> =
            self.derive_with(&mut |a: &Atom| Ok(if a == v { Expr::one() } else { Expr::zero() }));
        res.unwrap()
    }

    /// Total derivative `D_i`: moves jet variables up one derivative in the
    /// `i` direction and differentiates explicit dependence on `x_i`.
    pub fn total_derivative(&self, i: BaseVar) -> Expr {
        let res: Result<Expr, std::convert::Infallible> = self.derive_with(&mut |a: &Atom| {
            Ok(match a {
                Atom::Base(v) => {
                    if *v == i {
                        Expr::one()
                    } else {
                        Expr::zero()
                    }
                }
                Atom::Jet(j) => Expr::jet(JetVar::new(j.function, j.index.plus(i))),
                Atom::Param(_) => Expr::zero(),
                _ => unreachable!("exp/pow handled by derive_with"),
            })
        });
        res.unwrap()
    }

    /// Complex conjugation: `i -> -i` in coefficients, each function to its
    /// partner, variables and parameters fixed. An involution and a ring
    /// homomorphism.
    pub fn conjugate(&self) -> Expr {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let factors = t
                    .mono
                    .factors()
                    .iter()
                    .map(|(a, e)| {
                        let a2 = match a {
                            Atom::Jet(j) => Atom::Jet(j.conjugate()),
                            Atom::Exp(arg) => Atom::Exp(Arc::new(arg.conjugate())),
                            Atom::Pow(base, r) => Atom::Pow(Arc::new(base.conjugate()), *r),
                            other => other.clone(),
                        };
                        (a2, *e)
                    })
                    .collect();
                let mut mono = Monomial { factors };
                mono.factors.sort_by(|a, b| a.0.cmp(&b.0));
                Term {
                    coeff: t.coeff.conj(),
                    mono,
                }
            })
            .collect();
        Expr::from_terms(terms)
    }

    /// Simultaneous replacement of atoms, then normalization. Exp/pow
    /// arguments are substituted recursively before lookup.
    pub fn substitute(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr, ExprError> {
        let mut acc = Expr::zero();
        for t in &self.terms {
            let mut term_expr = Expr::from_coeff(t.coeff.clone());
            for (a, e) in t.mono.factors() {
                let rebuilt = substitute_atom(a, bindings)?;
                term_expr = term_expr.mul_ref(&rebuilt.pow_int(*e as i64)?);
            }
            acc = acc.add_ref(&term_expr);
        }
        Ok(acc)
    }

    /// Like [`Expr::substitute`], but for each function listed in `closed`,
    /// if any binding key is a jet variable of that function then every jet
    /// variable of that function occurring in `self` must be bound. Guards
    /// against accidental partial substitutions.
    pub fn substitute_checked(
        &self,
        bindings: &BTreeMap<Atom, Expr>,
        closed: &[FunctionId],
    ) -> Result<Expr, ExprError> {
        for f in closed {
            let touches = bindings
                .keys()
                .any(|a| matches!(a, Atom::Jet(j) if j.function == *f));
            if !touches {
                continue;
            }
            for a in self.atoms() {
                if let Atom::Jet(j) = &a {
                    if j.function == *f && !bindings.contains_key(&a) {
                        return Err(ExprError::IncompleteSubstitution {
                            function: *f,
                            missing: j.to_string(),
                        });
                    }
                }
            }
        }
        self.substitute(bindings)
    }

    // ----- quotient handling -----

    /// Multiply through by enough power-atom denominators to make all
    /// multi-term power atoms carry nonnegative exponents, then expand the
    /// resulting positive integer powers. Returns the cleared expression and
    /// the list of `(base, exponent)` multipliers applied; the result is zero
    /// iff the original vanishes wherever the cleared bases do not.
    pub fn clear_denominators(&self) -> (Expr, Vec<(Expr, Exponent)>) {
        let mut mins: BTreeMap<Expr, Exponent> = BTreeMap::new();
        for t in &self.terms {
            let mut here: BTreeMap<&Expr, Exponent> = BTreeMap::new();
            for (a, e) in t.mono.factors() {
                if let Atom::Pow(base, r) = a {
                    let entry = here.entry(base).or_insert_with(Exponent::zero);
                    *entry += *r * Exponent::from_integer(*e as i64);
                }
            }
            for (base, r) in here {
                if r.is_negative() {
                    let entry = mins.entry(base.clone()).or_insert_with(Exponent::zero);
                    if r < *entry {
                        *entry = r;
                    }
                }
            }
        }
        let mut multipliers = Vec::new();
        let mut cleared = self.clone();
        for (base, min) in mins {
            let shift = -min;
            let factor = Expr::atom(Atom::Pow(Arc::new(base.clone()), shift));
            cleared = cleared.mul_ref(&factor);
            multipliers.push((base, shift));
        }
        // Expand any remaining positive-integer powers of sums so that
        // cancellation across terms is visible to normalization.
        (cleared.normalize(), multipliers)
    }

    /// Exact polynomial division: returns `q` with `self = q * divisor` if one
    /// exists in the polynomial fragment (no power atoms, no negative
    /// exponents), else `None`.
    pub fn div_exact(&self, divisor: &Expr) -> Option<Expr> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Expr::zero());
        }
        if !self.is_polynomial() || !divisor.is_polynomial() {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = Expr::zero();
        let lead_div = &divisor.terms[0];
        let cap = 16 * (self.terms.len() + divisor.terms.len()) + 64;
        for _ in 0..cap {
            if rem.is_zero() {
                return Some(quot);
            }
            let lead_rem = &rem.terms[0];
            let t = div_monomials(lead_rem, lead_div)?;
            let t_expr = Expr { terms: vec![t] };
            quot = quot.add_ref(&t_expr);
            rem = rem.sub_ref(&t_expr.mul_ref(divisor));
        }
        None
    }

    /// True if every factor is a plain atom with positive exponent.
    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| {
            t.mono
                .factors()
                .iter()
                .all(|(a, e)| *e > 0 && !matches!(a, Atom::Exp(_) | Atom::Pow(_, _)))
        })
    }
}

fn substitute_atom(a: &Atom, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr, ExprError> {
    // Rebuild exp/pow arguments first so bindings reach inside them.
    let rebuilt = match a {
        Atom::Exp(arg) => {
            let arg2 = arg.substitute(bindings)?;
            if let Some(rep) = bindings.get(&Atom::Exp(Arc::new(arg2.clone()))) {
                return Ok(rep.clone());
            }
            return Ok(Expr::exp_of(&arg2));
        }
        Atom::Pow(base, r) => {
            let base2 = base.substitute(bindings)?;
            return base2.pow(*r);
        }
        other => other.clone(),
    };
    if let Some(rep) = bindings.get(&rebuilt) {
        Ok(rep.clone())
    } else {
        Ok(Expr::atom(rebuilt))
    }
}

fn derive_atom<E>(a: &Atom, leaf: &mut impl FnMut(&Atom) -> Result<Expr, E>) -> Result<Expr, E> {
    match a {
        Atom::Exp(arg) => {
            let darg = arg.derive_with(leaf)?;
            Ok(darg.mul_ref(&Expr::atom(a.clone())))
        }
        Atom::Pow(base, r) => {
            let dbase = base.derive_with(leaf)?;
            if dbase.is_zero() {
                return Ok(Expr::zero());
            }
            let shifted = atom_power_of_expr(base, *r - Exponent::from_integer(1))
                .expect("pow derivative on nonzero base");
            let mut c = Expr::from_coeff(GaussRat {
                re: num_rational::BigRational::new(
                    num_bigint::BigInt::from(*r.numer()),
                    num_bigint::BigInt::from(*r.denom()),
                ),
                im: num_rational::BigRational::from_integer(num_bigint::BigInt::from(0)),
            });
            c = c.mul_ref(&shifted);
            Ok(c.mul_ref(&dbase))
        }
        leaf_atom => leaf(leaf_atom),
    }
}

fn atom_power_of_expr(base: &Expr, r: Exponent) -> Result<Expr, ExprError> {
    base.pow(r)
}

/// `a^r` for a plain or structured atom, with canonical placement.
fn atom_power(a: &Atom, r: Exponent) -> Result<Expr, ExprError> {
    if r.is_zero() {
        return Ok(Expr::one());
    }
    match a {
        Atom::Exp(arg) => {
            let rat = GaussRat {
                re: num_rational::BigRational::new(
                    num_bigint::BigInt::from(*r.numer()),
                    num_bigint::BigInt::from(*r.denom()),
                ),
                im: num_rational::BigRational::from_integer(num_bigint::BigInt::from(0)),
            };
            Ok(Expr::exp_of(&arg.scale(&rat)))
        }
        Atom::Pow(base, r0) => base.pow(*r0 * r),
        plain => {
            if r.is_integer() {
                let k = r.to_integer();
                let k32 = i32::try_from(k).expect("exponent fits i32");
                Ok(Expr {
                    terms: vec![Term {
                        coeff: GaussRat::one(),
                        mono: Monomial {
                            factors: vec![(plain.clone(), k32)],
                        },
                    }],
                })
            } else {
                Ok(Expr::atom(Atom::Pow(
                    Arc::new(Expr::atom(plain.clone())),
                    r,
                )))
            }
        }
    }
}

/// Multiply two terms, merging exponential factors and power atoms. May
/// expand (returns an `Expr`) when a power-atom exponent becomes a positive
/// integer over a multi-term base.
fn mul_terms(t1: &Term, t2: &Term) -> Expr {
    let coeff = &t1.coeff * &t2.coeff;
    if coeff.is_zero() {
        return Expr::zero();
    }
    let mut plain: BTreeMap<Atom, i64> = BTreeMap::new();
    let mut exp_arg = Expr::zero();
    // per base: accumulated exponent, and whether the accumulation is just
    // one canonical atom passing through untouched
    let mut pows: BTreeMap<Arc<Expr>, (Exponent, bool)> = BTreeMap::new();

    for (a, e) in t1.mono.factors().iter().chain(t2.mono.factors().iter()) {
        match a {
            Atom::Exp(arg) => {
                let scaled = if *e == 1 {
                    (**arg).clone()
                } else {
                    arg.scale(&GaussRat::from_int(*e as i64))
                };
                exp_arg = exp_arg.add_ref(&scaled);
            }
            Atom::Pow(base, r) => {
                let entry = pows
                    .entry(base.clone())
                    .and_modify(|(_, pristine)| *pristine = false)
                    .or_insert_with(|| (Exponent::zero(), *e == 1));
                entry.0 += *r * Exponent::from_integer(*e as i64);
            }
            plain_atom => {
                *plain.entry(plain_atom.clone()).or_insert(0) += *e as i64;
            }
        }
    }

    let mut factors: Vec<(Atom, i32)> = Vec::new();
    for (a, e) in plain {
        if e != 0 {
            factors.push((a, i32::try_from(e).expect("exponent fits i32")));
        }
    }
    if !exp_arg.is_zero() {
        factors.push((Atom::Exp(Arc::new(exp_arg)), 1));
    }

    let mut expansions: Vec<Expr> = Vec::new();
    for (base, (r, pristine)) in pows {
        if r.is_zero() {
            continue;
        }
        if pristine && !(r.is_integer() && r.is_positive()) {
            // A single canonical power atom passes through unchanged;
            // positive integer powers (cleared denominators) expand instead.
            factors.push((Atom::Pow(base, r), 1));
            continue;
        }
        // Merged or rescaled accumulations re-enter the smart constructor so
        // that every route to the same power yields one canonical form
        // (integer powers of atoms fold into the monomial, positive integer
        // powers of sums expand, bases stay monic and exponential-free).
        expansions.push(base.pow(r).expect("merged power of nonzero base"));
    }

    factors.sort_by(|a, b| a.0.cmp(&b.0));
    // Merge duplicates that may appear after folding pow atoms back in.
    let mut merged: Vec<(Atom, i32)> = Vec::new();
    for (a, e) in factors {
        if let Some(last) = merged.last_mut() {
            if last.0 == a {
                last.1 += e;
                if last.1 == 0 {
                    merged.pop();
                }
                continue;
            }
        }
        merged.push((a, e));
    }

    let mut acc = Expr {
        terms: vec![Term {
            coeff,
            mono: Monomial { factors: merged },
        }],
    };
    for ex in expansions {
        acc = acc.mul_ref(&ex);
    }
    acc
}

/// Monomial division for exact polynomial division; requires the quotient to
/// stay a genuine monomial (no negative exponents introduced).
fn div_monomials(num: &Term, den: &Term) -> Option<Term> {
    let mut remaining: BTreeMap<&Atom, i32> = BTreeMap::new();
    for (a, e) in num.mono.factors() {
        remaining.insert(a, *e);
    }
    for (a, e) in den.mono.factors() {
        let have = remaining.get(a).copied().unwrap_or(0);
        if have < *e {
            return None;
        }
        remaining.insert(a, have - e);
    }
    let factors: Vec<(Atom, i32)> = remaining
        .into_iter()
        .filter(|&(_, e)| e != 0)
        .map(|(a, e)| (a.clone(), e))
        .collect();
    Some(Term {
        coeff: &num.coeff * &den.coeff.inv(),
        mono: Monomial { factors },
    })
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.add_ref(rhs)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.sub_ref(rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.mul_ref(rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}

// ----- printing -----

fn fmt_exponent(r: &Exponent, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

struct AtomDisplay<'a>(&'a Atom);

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Atom::Base(v) => write!(f, "{}", v.name()),
            Atom::Jet(j) => write!(f, "{j}"),
            Atom::Param(p) => write!(f, "{}", p.name()),
            Atom::Exp(arg) => write!(f, "exp({arg})"),
            Atom::Pow(base, r) => {
                write!(f, "({base})^")?;
                fmt_exponent(r, f)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.display_negative();
            let abs = if neg { -&t.coeff } else { t.coeff.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut wrote = false;
            if !abs.is_one() || t.mono.is_one() {
                write!(f, "{abs}")?;
                wrote = true;
            }
            for (a, e) in t.mono.factors() {
                if wrote {
                    write!(f, "*")?;
                }
                write!(f, "{}", AtomDisplay(a))?;
                if *e != 1 {
                    write!(f, "^{e}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}
