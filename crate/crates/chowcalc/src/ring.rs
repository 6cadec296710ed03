//! Truncated multivariate polynomial rings over exact rationals.
//!
//! A [`RingCtx`] fixes a variable count and a per-variable cap vector; the
//! quotient ring is Q[H_1..H_p] / (H_i^{cap_i + 1}), which models the Chow
//! ring of a product of projective spaces P^{cap_1} x ... x P^{cap_p} with
//! H_i the pullback of the i-th hyperplane class. [`TruncPoly`] stores a
//! sparse coefficient map keyed by exponent vectors; every operation drops
//! monomials that exceed a cap. [`TSeries`] is a dense formal power series
//! in an auxiliary parameter t whose coefficients are ring elements, used by
//! the Chern-character computations.
//!
//! All scalars are [`Rat`] (arbitrary-precision rationals, always in lowest
//! terms with positive denominator).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Exact rational scalar.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// n! as a rational.
pub fn factorial(n: u32) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

/// Binomial coefficient C(n, k) as a rational.
pub fn binomial(n: u32, k: u32) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k as u64 {
        num *= BigInt::from(n as u64 - i);
        den *= BigInt::from(i + 1);
    }
    Rat::new(num, den)
}

/// Renders a rational as `num` or `num/den` for reports.
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// True if the rational is an integer.
pub fn is_integer(x: &Rat) -> bool {
    x.denom().is_one()
}

/// Ambient truncated ring: variable count and per-variable nilpotency caps.
///
/// Variable i satisfies H_i^{caps[i]+1} = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingCtx {
    caps: Vec<u32>,
}

/// Builds the ring Q[H_1..H_p]/(H_i^{caps[i]+1}).
pub fn make_ring(caps: Vec<u32>) -> RingCtx {
    assert!(!caps.is_empty(), "ring needs at least one variable");
    RingCtx { caps }
}

impl RingCtx {
    /// Number of variables.
    pub fn num_vars(&self) -> usize {
        self.caps.len()
    }

    /// Cap of variable i (largest surviving exponent).
    pub fn cap(&self, i: usize) -> u32 {
        self.caps[i]
    }

    /// The full cap vector.
    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    fn admits(&self, exps: &[u32]) -> bool {
        exps.iter().zip(&self.caps).all(|(e, c)| e <= c)
    }
}

/// Element of a truncated polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncPoly {
    ctx: RingCtx,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl TruncPoly {
    /// The zero element.
    pub fn zero(ctx: &RingCtx) -> Self {
        TruncPoly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    /// The unit element.
    pub fn one(ctx: &RingCtx) -> Self {
        Self::monomial(ctx, vec![0; ctx.num_vars()], rat(1))
    }

    /// The variable H_i.
    pub fn var(ctx: &RingCtx, i: usize) -> Self {
        let mut exps = vec![0; ctx.num_vars()];
        exps[i] = 1;
        Self::monomial(ctx, exps, rat(1))
    }

    /// A single monomial c * prod H_i^{exps[i]} (zero if over a cap).
    pub fn monomial(ctx: &RingCtx, exps: Vec<u32>, coeff: Rat) -> Self {
        assert_eq!(exps.len(), ctx.num_vars(), "exponent arity mismatch");
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() && ctx.admits(&exps) {
            terms.insert(exps, coeff);
        }
        TruncPoly { ctx: ctx.clone(), terms }
    }

    /// A linear form sum_i coeffs[i] * H_i.
    pub fn linear(ctx: &RingCtx, coeffs: &[Rat]) -> Self {
        assert_eq!(coeffs.len(), ctx.num_vars(), "coefficient arity mismatch");
        let mut p = Self::zero(ctx);
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(Self::var(ctx, i).scale(c));
        }
        p
    }

    /// The ambient ring.
    pub fn ctx(&self) -> &RingCtx {
        &self.ctx
    }

    /// Sparse view of the coefficient map.
    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rat> {
        &self.terms
    }

    /// True if identically zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the given exponent vector.
    pub fn coeff(&self, exps: &[u32]) -> Rat {
        self.terms.get(exps).cloned().unwrap_or_else(Rat::zero)
    }

    fn insert(&mut self, exps: Vec<u32>, coeff: Rat) {
        if coeff.is_zero() || !self.ctx.admits(&exps) {
            return;
        }
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add_term(&mut self, other: Self) {
        assert_eq!(self.ctx, other.ctx, "ring context mismatch");
        for (e, c) in other.terms {
            self.insert(e, c);
        }
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_term(other.clone());
        out
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    /// Scalar multiple.
    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            return Self::zero(&self.ctx);
        }
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect();
        TruncPoly { ctx: self.ctx.clone(), terms }
    }

    /// Total degree of the highest surviving term, or None when zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// True if every term has total degree k.
    pub fn is_homogeneous(&self, k: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == k)
    }

    /// Terms of total degree exactly k.
    pub fn graded_part(&self, k: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.iter().sum::<u32>() == k)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        TruncPoly { ctx: self.ctx.clone(), terms }
    }

    /// Coefficient of the socle monomial prod H_i^{cap_i}, i.e. the degree
    /// pairing against the point class of the ambient product.
    pub fn integrate(&self) -> Rat {
        self.coeff(&self.ctx.caps.clone())
    }

    /// Replaces each power of variable `var` by a scalar weight:
    /// a monomial m * var^j becomes weights[j] * m. Used to collapse an
    /// abstract-root variable onto numeric power sums.
    pub fn collapse_var(&self, var: usize, weights: &[Rat]) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            let j = e[var] as usize;
            assert!(j < weights.len(), "missing collapse weight for exponent {j}");
            let mut e2 = e.clone();
            e2[var] = 0;
            out.insert(e2, c * &weights[j]);
        }
        out
    }

    /// Removes a variable that appears nowhere with positive exponent,
    /// returning the element of the smaller ring.
    pub fn drop_var(&self, var: usize) -> Self {
        let mut caps = self.ctx.caps.clone();
        caps.remove(var);
        let ctx = make_ring(caps);
        let mut out = Self::zero(&ctx);
        for (e, c) in &self.terms {
            assert_eq!(e[var], 0, "variable H{} still occurs", var + 1);
            let mut e2 = e.clone();
            e2.remove(var);
            out.insert(e2, c.clone());
        }
        out
    }

    /// Reinterprets the element in another ring with the same variable
    /// count, dropping terms that exceed the new caps.
    pub fn recap(&self, ctx: &RingCtx) -> Self {
        assert_eq!(ctx.num_vars(), self.ctx.num_vars(), "variable count mismatch");
        let mut out = Self::zero(ctx);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    /// Applies a slot permutation: variable i of the result carries the
    /// exponent that variable perm[i] carried in the input.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.ctx.num_vars(), "permutation arity mismatch");
        let caps: Vec<u32> = perm.iter().map(|&j| self.ctx.caps[j]).collect();
        let ctx = make_ring(caps);
        let mut out = Self::zero(&ctx);
        for (e, c) in &self.terms {
            let e2: Vec<u32> = perm.iter().map(|&j| e[j]).collect();
            out.insert(e2, c.clone());
        }
        out
    }
}

/// Product, truncated by the caps.
pub fn poly_mul(a: &TruncPoly, b: &TruncPoly) -> TruncPoly {
    assert_eq!(a.ctx, b.ctx, "ring context mismatch");
    let mut out = TruncPoly::zero(&a.ctx);
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            if a.ctx.admits(&e) {
                out.insert(e, ca * cb);
            }
        }
    }
    out
}

/// Product of linear forms; each factor is a coefficient vector over the
/// variables. The empty product is 1.
pub fn linear_product(ctx: &RingCtx, factors: &[Vec<Rat>]) -> TruncPoly {
    let mut acc = TruncPoly::one(ctx);
    for f in factors {
        acc = poly_mul(&acc, &TruncPoly::linear(ctx, f));
    }
    acc
}

/// Formal inverse of (1 - u), i.e. 1 + u + u^2 + ... + u^bound, for u with
/// zero constant term.
pub fn geometric_inverse(u: &TruncPoly, bound: u32) -> TruncPoly {
    assert!(
        u.coeff(&vec![0; u.ctx.num_vars()]).is_zero(),
        "geometric inverse needs a nilpotent argument"
    );
    let mut acc = TruncPoly::one(&u.ctx);
    let mut pow = TruncPoly::one(&u.ctx);
    for _ in 0..bound {
        pow = poly_mul(&pow, u);
        if pow.is_zero() {
            break;
        }
        acc = acc.add(&pow);
    }
    acc
}

/// Bernoulli numbers B_0..B_m in the convention w/(e^w - 1) = sum B_m w^m/m!
/// (so B_1 = -1/2), via the defining recurrence.
pub fn bernoulli_upto(m: u32) -> Vec<Rat> {
    let mut b = Vec::with_capacity(m as usize + 1);
    b.push(rat(1));
    for k in 1..=m {
        let mut s = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            s += binomial(k + 1, j as u32) * bj;
        }
        b.push(-s / binomial(k + 1, k));
    }
    b
}

/// The single Bernoulli number B_m.
pub fn bernoulli(m: u32) -> Rat {
    bernoulli_upto(m).pop().expect("nonempty")
}

/// Formal power series in t with ring-element coefficients, truncated at a
/// fixed order (inclusive).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSeries {
    coeffs: Vec<TruncPoly>,
}

impl TSeries {
    /// Series from explicit coefficients of t^0..t^order.
    pub fn from_coeffs(coeffs: Vec<TruncPoly>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the t^0 coefficient");
        TSeries { coeffs }
    }

    /// Truncation order (largest tracked power of t).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of t^m.
    pub fn coeff(&self, m: usize) -> &TruncPoly {
        &self.coeffs[m]
    }

    /// Product, truncated at the common order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let ctx = self.coeffs[0].ctx().clone();
        let mut out = vec![TruncPoly::zero(&ctx); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > order {
                    break;
                }
                out[i + j] = out[i + j].add(&poly_mul(a, b));
            }
        }
        TSeries { coeffs: out }
    }

    /// Sum, truncated at the common order.
    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order).map(|m| self.coeffs[m].add(&other.coeffs[m])).collect();
        TSeries { coeffs }
    }

    /// Applies a map to every coefficient.
    pub fn map<F: Fn(&TruncPoly) -> TruncPoly>(&self, f: F) -> Self {
        TSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

/// exp(u * t) as a series in t: coefficient of t^m is u^m / m!.
/// The argument must have zero constant term so coefficients stay nilpotent.
pub fn exp_series(u: &TruncPoly, order: usize) -> TSeries {
    assert!(
        u.coeff(&vec![0; u.ctx().num_vars()]).is_zero(),
        "exponential argument must have zero constant term"
    );
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(TruncPoly::one(u.ctx()));
    let mut pow = TruncPoly::one(u.ctx());
    for m in 1..=order {
        pow = poly_mul(&pow, u);
        coeffs.push(pow.scale(&(rat(1) / factorial(m as u32))));
    }
    TSeries { coeffs }
}

/// exp(l * t) for the linear form l = sum coeffs[i] * H_i.
pub fn exp_linear(ctx: &RingCtx, coeffs: &[Rat], order: usize) -> TSeries {
    exp_series(&TruncPoly::linear(ctx, coeffs), order)
}

/// The series (e^{a w} - 1)/(e^w - 1) in w, with `a` an abstract root kept
/// as ring variable `root`: the coefficient of w^m is
/// sum_{p=0}^{m} B_{m-p}/(m-p)! * a^{p+1}/(p+1)!.
///
/// Specializing a to a nonnegative integer recovers the finite geometric sum
/// 1 + e^w + ... + e^{(a-1)w}.
pub fn ratio_series(ctx: &RingCtx, root: usize, order: usize) -> TSeries {
    let bern = bernoulli_upto(order as u32);
    let mut coeffs = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let mut cm = TruncPoly::zero(ctx);
        for p in 0..=m {
            let scalar = &bern[m - p] / factorial((m - p) as u32) / factorial(p as u32 + 1);
            let mut exps = vec![0; ctx.num_vars()];
            exps[root] = p as u32 + 1;
            cm = cm.add(&TruncPoly::monomial(ctx, exps, scalar));
        }
        coeffs.push(cm);
    }
    TSeries { coeffs }
}

/// Formats an exponent vector as a monomial key like `H1^2*H2` (zero
/// exponents omitted; the constant monomial is `1`).
pub fn monomial_key(exps: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("H{}", i + 1)),
            _ => parts.push(format!("H{}^{}", i + 1, e)),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let key = monomial_key(e);
                if key == "1" {
                    format_rat(c)
                } else if c.is_one() {
                    key
                } else {
                    format!("{}*{}", format_rat(c), key)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
