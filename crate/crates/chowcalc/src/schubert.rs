//! Schubert calculus on the Grassmannian G(2,N) of projective lines in
//! P^{N-1}, Chow rings of towers of r-pointed lines over it, and
//! pushforwards to products of projective spaces.
//!
//! The tower of r-pointed lines is the r-fold fiber product over G(2,N) of
//! the universal-line P^1-bundle. Its Chow ring is generated over CH(G) by
//! the point classes xi_1..xi_r, each satisfying
//! xi^2 = sigma_1 * xi - sigma_{1,1}, with sigma_{1,1} = c_2(S^dual) for the
//! rank-2 tautological subbundle S. Evaluating the i-th point maps the tower
//! to P^{N-1} and pulls the hyperplane class back to xi_i; the induced
//! pushforward to (P^{N-1})^r is read off against the dual monomial basis.
//! On top of this the module computes top Chern classes of direct sums of
//! twisted symmetric powers of S^dual (the bundles cutting out cycles of
//! pointed lines on a complete intersection), their pushed-forward
//! correction polynomials, and the classical line counts.

use crate::ring::{is_integer, make_ring, rat, Rat, RingCtx, TruncPoly};
use num_traits::Zero;
use std::collections::BTreeMap;

/// The Grassmannian G(2,N) of lines in P^{N-1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrassCtx {
    nn: u32,
}

/// Builds the context for G(2,N).
pub fn grass(nn: u32) -> GrassCtx {
    assert!(nn >= 2, "need an ambient P^1 at least");
    GrassCtx { nn }
}

impl GrassCtx {
    /// N, with lines living in P^{N-1}.
    pub fn nn(&self) -> u32 {
        self.nn
    }

    /// Largest admissible Schubert index N-2.
    pub fn max_part(&self) -> u32 {
        self.nn - 2
    }

    /// dim G(2,N) = 2(N-2).
    pub fn dim(&self) -> u32 {
        2 * (self.nn - 2)
    }
}

/// Class on G(2,N) in the Schubert basis sigma_{a,b}, N-2 >= a >= b >= 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrassElem {
    ctx: GrassCtx,
    terms: BTreeMap<(u32, u32), Rat>,
}

impl GrassElem {
    /// The zero class.
    pub fn zero(ctx: GrassCtx) -> Self {
        GrassElem { ctx, terms: BTreeMap::new() }
    }

    /// The fundamental class sigma_{0,0}.
    pub fn one(ctx: GrassCtx) -> Self {
        Self::sigma(ctx, 0, 0)
    }

    /// The basis class sigma_{a,b}.
    pub fn sigma(ctx: GrassCtx, a: u32, b: u32) -> Self {
        assert!(a >= b && a <= ctx.max_part(), "index outside the Schubert basis");
        let mut terms = BTreeMap::new();
        terms.insert((a, b), rat(1));
        GrassElem { ctx, terms }
    }

    /// The special class sigma_p = sigma_{p,0}, zero once p exceeds N-2.
    pub fn special(ctx: GrassCtx, p: u32) -> Self {
        if p > ctx.max_part() {
            Self::zero(ctx)
        } else {
            Self::sigma(ctx, p, 0)
        }
    }

    /// The ambient Grassmannian.
    pub fn ctx(&self) -> GrassCtx {
        self.ctx
    }

    /// True if identically zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of sigma_{a,b}.
    pub fn coeff(&self, a: u32, b: u32) -> Rat {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(Rat::zero)
    }

    fn insert(&mut self, key: (u32, u32), c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ctx, other.ctx, "Grassmannian mismatch");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    /// Scalar multiple.
    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            return Self::zero(self.ctx);
        }
        let terms = self.terms.iter().map(|(k, c)| (*k, c * s)).collect();
        GrassElem { ctx: self.ctx, terms }
    }

    /// Codimension when homogeneous (sigma_{a,b} has codimension a+b).
    pub fn degree(&self) -> Option<u32> {
        let mut deg = None;
        for (a, b) in self.terms.keys() {
            let d = a + b;
            match deg {
                None => deg = Some(d),
                Some(e) if e == d => {}
                Some(_) => return None,
            }
        }
        deg
    }

    /// Pieri product with the special class sigma_p.
    pub fn mul_special(&self, p: u32) -> Self {
        let mut out = Self::zero(self.ctx);
        if p > self.ctx.max_part() {
            return out;
        }
        for ((a, b), q) in &self.terms {
            for d in *b..=*a {
                let c = a + b + p - d;
                if c >= *a && c <= self.ctx.max_part() {
                    out.insert((c, d), q.clone());
                }
            }
        }
        out
    }

    /// Product in the Schubert basis, by the rank-2 determinantal reduction
    /// sigma_{c,d} = sigma_c sigma_d - sigma_{c+1} sigma_{d-1}.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ctx, other.ctx, "Grassmannian mismatch");
        let mut out = Self::zero(self.ctx);
        for ((c, d), q) in &other.terms {
            let direct = self.mul_special(*c).mul_special(*d);
            let prod = if *d >= 1 {
                direct.sub(&self.mul_special(c + 1).mul_special(d - 1))
            } else {
                direct
            };
            out = out.add(&prod.scale(q));
        }
        out
    }

    /// Degree pairing: coefficient of the point class sigma_{N-2,N-2}.
    pub fn integrate(&self) -> Rat {
        self.coeff(self.ctx.max_part(), self.ctx.max_part())
    }
}

/// sigma_1^i * sigma_{1,1}^j.
fn sigma_power(ctx: GrassCtx, i: u32, j: u32) -> GrassElem {
    let mut out = GrassElem::one(ctx);
    for _ in 0..i {
        out = out.mul_special(1);
    }
    if j > 0 {
        let c2 = GrassElem::sigma(ctx, 1, 1);
        for _ in 0..j {
            out = out.mul(&c2);
        }
    }
    out
}

/// Tower of r-pointed lines over G(2,N); with `fiber` set, the universal
/// line bundle over that tower (one extra moving point).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TowerCtx {
    g: GrassCtx,
    r: usize,
    fiber: bool,
}

/// Builds the tower of r-pointed lines.
pub fn tower(g: GrassCtx, r: usize) -> TowerCtx {
    assert!(r >= 1 && r <= 12, "slot count out of range");
    TowerCtx { g, r, fiber: false }
}

impl TowerCtx {
    /// The same tower with the moving-point fiber variable added.
    pub fn with_fiber(&self) -> TowerCtx {
        TowerCtx { fiber: true, ..*self }
    }

    /// The underlying Grassmannian.
    pub fn grass(&self) -> GrassCtx {
        self.g
    }

    /// Number of pointed slots.
    pub fn slots(&self) -> usize {
        self.r
    }
}

/// Class on the tower: Grassmannian coefficients indexed by a square-free
/// xi-monomial (bitmask) and the fiber-variable exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerElem {
    ctx: TowerCtx,
    terms: BTreeMap<(u16, bool), GrassElem>,
}

impl TowerElem {
    /// The zero class.
    pub fn zero(ctx: TowerCtx) -> Self {
        TowerElem { ctx, terms: BTreeMap::new() }
    }

    /// The fundamental class.
    pub fn one(ctx: TowerCtx) -> Self {
        Self::scalar(ctx, GrassElem::one(ctx.g))
    }

    /// A class pulled back from the Grassmannian.
    pub fn scalar(ctx: TowerCtx, g: GrassElem) -> Self {
        assert_eq!(g.ctx(), ctx.g, "Grassmannian mismatch");
        let mut out = Self::zero(ctx);
        out.insert((0, false), g);
        out
    }

    /// The point class xi_i (0-based slot).
    pub fn xi(ctx: TowerCtx, i: usize) -> Self {
        assert!(i < ctx.r, "slot out of range");
        let mut out = Self::zero(ctx);
        out.insert((1 << i, false), GrassElem::one(ctx.g));
        out
    }

    /// The moving-point class zeta on the fiber.
    pub fn zeta(ctx: TowerCtx) -> Self {
        assert!(ctx.fiber, "no fiber variable in this context");
        let mut out = Self::zero(ctx);
        out.insert((0, true), GrassElem::one(ctx.g));
        out
    }

    /// The ambient tower.
    pub fn ctx(&self) -> TowerCtx {
        self.ctx
    }

    /// True if identically zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Grassmannian coefficient of a xi-monomial (and fiber exponent).
    pub fn coeff(&self, mask: u16, z: bool) -> GrassElem {
        self.terms.get(&(mask, z)).cloned().unwrap_or_else(|| GrassElem::zero(self.ctx.g))
    }

    fn insert(&mut self, key: (u16, bool), g: GrassElem) {
        if g.is_zero() {
            return;
        }
        assert!(!key.1 || self.ctx.fiber, "fiber variable in a fiberless context");
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(g);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&g);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ctx, other.ctx, "tower mismatch");
        let mut out = self.clone();
        for (k, g) in &other.terms {
            out.insert(*k, g.clone());
        }
        out
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    /// Scalar multiple.
    pub fn scale(&self, s: &Rat) -> Self {
        let mut out = Self::zero(self.ctx);
        for (k, g) in &self.terms {
            out.insert(*k, g.scale(s));
        }
        out
    }

    /// Product with a class pulled back from the Grassmannian.
    pub fn mul_grass(&self, g: &GrassElem) -> Self {
        let mut out = Self::zero(self.ctx);
        for (k, c) in &self.terms {
            out.insert(*k, c.mul(g));
        }
        out
    }

    /// Product with xi_i, reducing xi_i^2 = sigma_1 xi_i - sigma_{1,1}.
    pub fn mul_xi(&self, i: usize) -> Self {
        assert!(i < self.ctx.r, "slot out of range");
        let bit = 1u16 << i;
        let s1 = GrassElem::special(self.ctx.g, 1);
        let c2 = GrassElem::sigma(self.ctx.g, 1, 1);
        let mut out = Self::zero(self.ctx);
        for ((mask, z), g) in &self.terms {
            if mask & bit == 0 {
                out.insert((mask | bit, *z), g.clone());
            } else {
                out.insert((*mask, *z), g.mul(&s1));
                out.insert((mask & !bit, *z), g.mul(&c2).scale(&rat(-1)));
            }
        }
        out
    }

    /// Product with zeta, reducing zeta^2 = sigma_1 zeta - sigma_{1,1}.
    pub fn mul_zeta(&self) -> Self {
        assert!(self.ctx.fiber, "no fiber variable in this context");
        let s1 = GrassElem::special(self.ctx.g, 1);
        let c2 = GrassElem::sigma(self.ctx.g, 1, 1);
        let mut out = Self::zero(self.ctx);
        for ((mask, z), g) in &self.terms {
            if !z {
                out.insert((*mask, true), g.clone());
            } else {
                out.insert((*mask, true), g.mul(&s1));
                out.insert((*mask, false), g.mul(&c2).scale(&rat(-1)));
            }
        }
        out
    }

    /// Product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ctx, other.ctx, "tower mismatch");
        let mut out = Self::zero(self.ctx);
        for ((mask, z), g) in &other.terms {
            let mut part = self.mul_grass(g);
            for i in 0..self.ctx.r {
                if mask & (1 << i) != 0 {
                    part = part.mul_xi(i);
                }
            }
            if *z {
                part = part.mul_zeta();
            }
            out = out.add(&part);
        }
        out
    }

    /// k-th power.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.ctx);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Codimension when homogeneous (xi and zeta have codimension 1).
    pub fn degree(&self) -> Option<u32> {
        let mut deg = None;
        for ((mask, z), g) in &self.terms {
            let d = g.degree()? + mask.count_ones() + *z as u32;
            match deg {
                None => deg = Some(d),
                Some(e) if e == d => {}
                Some(_) => return None,
            }
        }
        deg
    }

    /// Pushforward along the fiber: a + b*zeta goes to b.
    pub fn fiber_push(&self) -> Self {
        assert!(self.ctx.fiber, "no fiber variable to push along");
        let base = TowerCtx { fiber: false, ..self.ctx };
        let mut out = Self::zero(base);
        for ((mask, z), g) in &self.terms {
            if *z {
                out.insert((*mask, false), g.clone());
            }
        }
        out
    }

    /// Restriction along the i-th marked-point section: zeta maps to xi_i.
    pub fn section_restrict(&self, i: usize) -> Self {
        assert!(self.ctx.fiber, "no fiber variable to restrict");
        let base = TowerCtx { fiber: false, ..self.ctx };
        let mut out = Self::zero(base);
        for ((mask, z), g) in &self.terms {
            let mut part = Self::zero(base);
            part.insert((*mask, false), g.clone());
            if *z {
                part = part.mul_xi(i);
            }
            out = out.add(&part);
        }
        out
    }

    /// Full integration: iterated point-slot pushforwards (a + b*xi_i to b)
    /// followed by the Grassmannian degree pairing.
    pub fn tower_integrate(&self) -> Rat {
        assert!(!self.ctx.fiber, "push the fiber before integrating");
        let full = (1u16 << self.ctx.r) - 1;
        self.coeff(full, false).integrate()
    }
}

/// Divisor class of the i-th marked-point section inside the universal-line
/// bundle over the tower: zeta + xi_i - sigma_1.
pub fn d_class(ctx: TowerCtx, i: usize) -> TowerElem {
    assert!(ctx.fiber, "section divisors live on the fiber");
    let s1 = GrassElem::special(ctx.g, 1);
    TowerElem::zeta(ctx)
        .add(&TowerElem::xi(ctx, i))
        .sub(&TowerElem::scalar(ctx, s1))
}

type Poly3 = BTreeMap<(u32, u32, u32), Rat>;

/// Expands prod (u*x1 + v*x2 + w*t) over the given root coefficients.
fn expand_roots(roots: &[(i64, i64, i64)]) -> Poly3 {
    let mut acc: Poly3 = BTreeMap::new();
    acc.insert((0, 0, 0), rat(1));
    for &(u, v, w) in roots {
        let mut next: Poly3 = BTreeMap::new();
        for ((e1, e2, e3), c) in &acc {
            for (du, dv, dw, s) in [(1, 0, 0, u), (0, 1, 0, v), (0, 0, 1, w)] {
                if s == 0 {
                    continue;
                }
                let key = (e1 + du, e2 + dv, e3 + dw);
                let add = c * rat(s);
                let entry = next.entry(key).or_insert_with(Rat::zero);
                *entry += add;
                if entry.is_zero() {
                    next.remove(&key);
                }
            }
        }
        acc = next;
    }
    acc
}

/// Rewrites a polynomial symmetric in (x1,x2) in terms of e1 = x1+x2,
/// e2 = x1*x2, and t, by repeated subtraction of the lex-leading term.
fn to_elementary(mut p: Poly3) -> Vec<((u32, u32, u32), Rat)> {
    let mut out = Vec::new();
    while let Some((&(a, b, g), c)) = p.iter().next_back() {
        assert!(a >= b, "input not symmetric in the two roots");
        let c = c.clone();
        out.push(((a - b, b, g), c.clone()));
        for s in 0..=(a - b) {
            let key = (b + s, a - s, g);
            let sub = &c * crate::ring::binomial(a - b, s);
            let entry = p.entry(key).or_insert_with(Rat::zero);
            *entry -= sub;
            if entry.is_zero() {
                p.remove(&key);
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Top Chern class on the tower of a direct sum of twisted symmetric powers,
/// together with its rank.
pub struct FBundle {
    /// Top Chern class as a tower element.
    pub class: TowerElem,
    /// Number of Chern roots, i.e. the bundle rank.
    pub rank: u32,
}

/// Top Chern class of the bundle of degree-(d_i) forms on the universal line
/// vanishing to order a_j at the j-th marked point: the direct sum over i of
/// Sym^{d_i-K} S^dual twisted by O(K*sigma_1 - sum_j a_j xi_j), K = sum a_j.
/// Summands with d_i - K = -1 vanish and are skipped.
pub fn f_bundle_top_chern(ctx: TowerCtx, degrees: &[u32], a: &[u32]) -> FBundle {
    assert!(!ctx.fiber, "bundle classes live on the tower itself");
    assert_eq!(a.len(), ctx.r, "one multiplicity per pointed slot");
    assert!(a.iter().all(|&x| x >= 1), "multiplicities must be >= 1");
    assert!(!degrees.is_empty(), "no bundle data");
    let k: i64 = a.iter().map(|&x| x as i64).sum();
    let mut roots = Vec::new();
    for &d in degrees {
        let m = d as i64 - k;
        assert!(m >= -1, "symmetric power below -1 undefined");
        for j in 0..=m {
            roots.push((j, m - j, 1));
        }
    }
    let rank = roots.len() as u32;

    let twist_base = GrassElem::special(ctx.g, 1).scale(&rat(k));
    let mut twist = TowerElem::scalar(ctx, twist_base);
    for (j, &aj) in a.iter().enumerate() {
        twist = twist.sub(&TowerElem::xi(ctx, j).scale(&rat(aj as i64)));
    }

    let sym = to_elementary(expand_roots(&roots));
    let max_t = sym.iter().map(|((_, _, g), _)| *g).max().unwrap_or(0);
    let mut twist_pows = vec![TowerElem::one(ctx)];
    for g in 1..=max_t {
        twist_pows.push(twist_pows[g as usize - 1].mul(&twist));
    }

    let mut class = TowerElem::zero(ctx);
    for ((i, j, g), c) in sym {
        let base = sigma_power(ctx.g, i, j);
        class = class.add(&TowerElem::scalar(ctx, base).mul(&twist_pows[g as usize]).scale(&c));
    }
    FBundle { class, rank }
}

/// Pushforward to (P^{N-1})^r along the marked-point evaluations: the
/// coefficient of prod H_i^{m_i} is the tower integral of
/// elem * prod xi_i^{N-1-m_i}.
pub fn pushforward_to_products(elem: &TowerElem, target: &RingCtx) -> TruncPoly {
    let ctx = elem.ctx();
    assert!(!ctx.fiber, "push the fiber before the evaluation maps");
    assert!(ctx.r >= 2, "need at least two marked points");
    assert_eq!(target.num_vars(), ctx.r, "one variable per marked point");
    let nn = ctx.g.nn();
    assert!(target.caps().iter().all(|&c| c == nn - 1), "target caps must be N-1");
    let deg = elem.degree().expect("pushforward needs a homogeneous class");
    let dtotal = (ctx.r as u32 - 2) * (nn - 2) + deg;

    let mut out = TruncPoly::zero(target);
    let mut exps = vec![0u32; ctx.r];
    push_rec(elem, target, nn, dtotal, 0, &mut exps, &mut out);
    out
}

fn push_rec(
    elem: &TowerElem,
    target: &RingCtx,
    nn: u32,
    remaining: u32,
    slot: usize,
    exps: &mut Vec<u32>,
    out: &mut TruncPoly,
) {
    let r = elem.ctx().r;
    if slot == r {
        if remaining != 0 {
            return;
        }
        let mut integrand = elem.clone();
        for (i, &m) in exps.iter().enumerate() {
            for _ in 0..(nn - 1 - m) {
                integrand = integrand.mul_xi(i);
            }
        }
        let val = integrand.tower_integrate();
        *out = out.add(&TruncPoly::monomial(target, exps.clone(), val));
        return;
    }
    let hi = remaining.min(nn - 1);
    for m in 0..=hi {
        if remaining - m > (r - slot - 1) as u32 * (nn - 1) {
            continue;
        }
        exps[slot] = m;
        push_rec(elem, target, nn, remaining - m, slot + 1, exps, out);
    }
    exps[slot] = 0;
}

/// Correction polynomial of the r-pointed cycle construction: minus the
/// pushforward to (P^{N-1})^r of the top Chern class of the pointed-forms
/// bundle for the given degrees and point multiplicities.
///
/// For a single degree d on X^n in P^{n+1} the multiplicities must sum to
/// d+1-n; for Calabi-Yau multidegree data the slots must be (1,1,1). The
/// result is homogeneous of degree (r-2)(N-2) + rank with integer
/// coefficients, symmetric under permuting slots with equal multiplicity.
pub fn compute_p(n: u32, degrees: &[u32], a: &[u32]) -> TruncPoly {
    let re = degrees.len();
    let r = a.len();
    assert!(r >= 2, "need at least two marked points");
    let k: u32 = a.iter().sum();
    let nn = n + re as u32 + 1;
    let expected_rank = if re == 1 {
        assert_eq!(k + n, degrees[0] + 1, "multiplicities must sum to d+1-n");
        n
    } else {
        assert_eq!(degrees.iter().sum::<u32>(), nn, "multidegree data must be Calabi-Yau");
        assert!(r == 3 && k == 3, "multidegree case is defined for slots (1,1,1)");
        n + 1 - re as u32
    };
    let ctx = tower(grass(nn), r);
    let fb = f_bundle_top_chern(ctx, degrees, a);
    assert_eq!(fb.rank, expected_rank, "bundle rank mismatch");
    let target = make_ring(vec![nn - 1; r]);
    let p = pushforward_to_products(&fb.class, &target).scale(&rat(-1));
    assert!(
        p.is_homogeneous((r as u32 - 2) * (nn - 2) + expected_rank),
        "pushforward degree mismatch"
    );
    assert!(p.terms().values().all(is_integer), "pushforward must be integral");
    p
}

/// Expected dimension and (when zero) degree of the variety of lines on a
/// complete intersection of the given multidegree in P^{N-1}.
pub struct FanoData {
    /// 2(N-2) - sum (d_i + 1).
    pub expected_dim: i64,
    /// Line count when the expected dimension is zero.
    pub degree: Option<Rat>,
}

/// Line-count data: the expected dimension of the space of lines, and its
/// degree integral c_top(sum_i Sym^{d_i} S^dual) over G(2,N) when that
/// dimension is zero.
pub fn fano(degrees: &[u32], nn: u32) -> FanoData {
    let expected_dim =
        2 * (nn as i64 - 2) - degrees.iter().map(|&d| d as i64 + 1).sum::<i64>();
    let degree = if expected_dim == 0 {
        let mut roots = Vec::new();
        for &d in degrees {
            for j in 0..=d as i64 {
                roots.push((j, d as i64 - j, 0));
            }
        }
        let g = grass(nn);
        let mut acc = GrassElem::zero(g);
        for ((i, j, t), c) in to_elementary(expand_roots(&roots)) {
            assert_eq!(t, 0, "no twist variable here");
            acc = acc.add(&sigma_power(g, i, j).scale(&c));
        }
        Some(acc.integrate())
    } else {
        None
    };
    FanoData { expected_dim, degree }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{binomial, linear_product};

    fn catalan(m: u32) -> Rat {
        binomial(2 * m, m) / rat(m as i64 + 1)
    }

    fn sigma1_power(ctx: GrassCtx, e: u32) -> GrassElem {
        let mut out = GrassElem::one(ctx);
        for _ in 0..e {
            out = out.mul_special(1);
        }
        out
    }

    // Dense integration oracle: products of Schubert classes integrate to
    // the coefficient of x1^{N-1} x2^{N-2} in the product of the two-row
    // Schur polynomials times (x1 - x2).
    fn schur2(a: u32, b: u32) -> BTreeMap<(u32, u32), Rat> {
        let mut out = BTreeMap::new();
        for i in 0..=(a - b) {
            out.insert((b + i, a - i), rat(1));
        }
        out
    }

    fn p2_mul(
        x: &BTreeMap<(u32, u32), Rat>,
        y: &BTreeMap<(u32, u32), Rat>,
    ) -> BTreeMap<(u32, u32), Rat> {
        let mut out: BTreeMap<(u32, u32), Rat> = BTreeMap::new();
        for ((a1, a2), c) in x {
            for ((b1, b2), d) in y {
                let entry = out.entry((a1 + b1, a2 + b2)).or_insert_with(Rat::zero);
                *entry += c * d;
            }
        }
        out
    }

    fn oracle_integral(nn: u32, factors: &[(u32, u32)]) -> Rat {
        let mut prod: BTreeMap<(u32, u32), Rat> = BTreeMap::new();
        prod.insert((0, 0), rat(1));
        for &(a, b) in factors {
            prod = p2_mul(&prod, &schur2(a, b));
        }
        let mut vandermonde = BTreeMap::new();
        vandermonde.insert((1, 0), rat(1));
        vandermonde.insert((0, 1), rat(-1));
        prod = p2_mul(&prod, &vandermonde);
        prod.get(&(nn - 1, nn - 2)).cloned().unwrap_or_else(Rat::zero)
    }

    fn basis(ctx: GrassCtx) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for a in 0..=ctx.max_part() {
            for b in 0..=a {
                out.push((a, b));
            }
        }
        out
    }

    #[test]
    fn pieri_products_in_small_grassmannians() {
        let g = grass(4);
        let s1sq = sigma1_power(g, 2);
        assert_eq!(s1sq.coeff(2, 0), rat(1));
        assert_eq!(s1sq.coeff(1, 1), rat(1));
        let s1cube = sigma1_power(g, 3);
        assert_eq!(s1cube.coeff(2, 1), rat(2));
        assert_eq!(sigma1_power(g, 4).integrate(), rat(2));
    }

    #[test]
    fn plucker_degrees_are_catalan() {
        for nn in 4..=8u32 {
            let g = grass(nn);
            assert_eq!(sigma1_power(g, 2 * (nn - 2)).integrate(), catalan(nn - 2), "N={nn}");
        }
    }

    #[test]
    fn poincare_duality_pairs_complementary_classes() {
        for nn in [5u32, 6] {
            let g = grass(nn);
            let top = g.max_part();
            for &(a, b) in &basis(g) {
                for &(c, d) in &basis(g) {
                    if a + b + c + d != 2 * top {
                        continue;
                    }
                    let val = GrassElem::sigma(g, a, b).mul(&GrassElem::sigma(g, c, d)).integrate();
                    let expected =
                        if c == top - b && d == top - a { rat(1) } else { rat(0) };
                    assert_eq!(val, expected, "N={nn} ({a},{b})x({c},{d})");
                }
            }
        }
    }

    #[test]
    fn triple_integrals_match_dense_oracle() {
        for nn in [4u32, 5] {
            let g = grass(nn);
            let b = basis(g);
            for &x in &b {
                for &y in &b {
                    for &z in &b {
                        let engine = GrassElem::sigma(g, x.0, x.1)
                            .mul(&GrassElem::sigma(g, y.0, y.1))
                            .mul(&GrassElem::sigma(g, z.0, z.1))
                            .integrate();
                        assert_eq!(engine, oracle_integral(nn, &[x, y, z]), "N={nn} {x:?}{y:?}{z:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn xi_relation_holds() {
        let t = tower(grass(5), 2);
        let xi = TowerElem::xi(t, 0);
        let lhs = xi.mul(&xi);
        let rhs = xi
            .mul_grass(&GrassElem::special(t.grass(), 1))
            .sub(&TowerElem::scalar(t, GrassElem::sigma(t.grass(), 1, 1)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn fiber_push_and_section_checks() {
        let t = tower(grass(5), 2).with_fiber();
        let base = tower(grass(5), 2);
        assert!(TowerElem::one(t).fiber_push().is_zero());
        assert_eq!(TowerElem::zeta(t).fiber_push(), TowerElem::one(base));
        let b0 = d_class(t, 0);
        assert_eq!(b0.fiber_push(), TowerElem::one(base));
        let s1 = TowerElem::scalar(base, GrassElem::special(base.grass(), 1));
        let self_restrict = TowerElem::xi(base, 0).scale(&rat(2)).sub(&s1);
        assert_eq!(b0.section_restrict(0), self_restrict);
        let cross = TowerElem::xi(base, 0).add(&TowerElem::xi(base, 1)).sub(&s1);
        assert_eq!(b0.section_restrict(1), cross);
    }

    #[test]
    fn collinear_pair_socle_integral() {
        let t = tower(grass(5), 2);
        let elem = TowerElem::xi(t, 0).pow(4).mul(&TowerElem::xi(t, 1).pow(4));
        assert_eq!(elem.tower_integrate(), rat(1));
    }

    #[test]
    fn pushforward_identity_and_projection() {
        let t = tower(grass(5), 2);
        let target = make_ring(vec![4, 4]);
        let one = pushforward_to_products(&TowerElem::one(t), &target);
        assert_eq!(one, TruncPoly::one(&target));
        let h1 = pushforward_to_products(&TowerElem::xi(t, 0), &target);
        assert_eq!(h1, TruncPoly::var(&target, 0));
    }

    #[test]
    fn pushforward_sections_restriction() {
        let t = tower(grass(5), 2);
        let target = make_ring(vec![4, 4]);
        for m0 in 0..=4u32 {
            for m1 in 0..=4u32 {
                let elem = TowerElem::xi(t, 0).pow(m0).mul(&TowerElem::xi(t, 1).pow(m1));
                let pushed = pushforward_to_products(&elem, &target);
                assert_eq!(
                    pushed,
                    TruncPoly::monomial(&target, vec![m0, m1], rat(1)),
                    "m=({m0},{m1})"
                );
            }
        }
    }

    #[test]
    fn symmetrization_examples() {
        // (x1 + t)(x2 + t) = e2 + e1 t + t^2.
        let sym = to_elementary(expand_roots(&[(1, 0, 1), (0, 1, 1)]));
        assert_eq!(sym, vec![((0, 0, 2), rat(1)), ((0, 1, 0), rat(1)), ((1, 0, 1), rat(1))]);
        // Roots of the cubic symmetric power: 18 e1^2 e2 + 9 e2^2.
        let cubic = to_elementary(expand_roots(&[(3, 0, 0), (2, 1, 0), (1, 2, 0), (0, 3, 0)]));
        assert_eq!(cubic, vec![((0, 2, 0), rat(9)), ((2, 1, 0), rat(18))]);
    }

    #[test]
    fn two_slot_pushforward_matches_starting_polynomial() {
        // Degree-5 forms on a pointed line in P^4, n = 3: the pushforward of
        // the top Chern class must be the split product
        // prod_{i=0}^{2} ((b+i)H1 + (2-i+a)H2).
        let ctx = tower(grass(5), 2);
        let target = make_ring(vec![4, 4]);
        for (a, b) in [(2u32, 1u32), (1, 2)] {
            let fb = f_bundle_top_chern(ctx, &[5], &[a, b]);
            assert_eq!(fb.rank, 3);
            let pushed = pushforward_to_products(&fb.class, &target);
            let factors: Vec<Vec<Rat>> = (0..3)
                .map(|i| vec![rat((b + i) as i64), rat((2 - i + a) as i64)])
                .collect();
            assert_eq!(pushed, linear_product(&target, &factors), "a={a} b={b}");
        }
    }

    #[test]
    fn f_bundle_rank_bookkeeping() {
        let one = &[1u32, 1, 1];
        assert_eq!(f_bundle_top_chern(tower(grass(5), 3), &[5], one).rank, 3);
        assert_eq!(f_bundle_top_chern(tower(grass(6), 3), &[3, 3], one).rank, 2);
        assert_eq!(f_bundle_top_chern(tower(grass(7), 3), &[2, 2, 3], one).rank, 1);
        assert_eq!(f_bundle_top_chern(tower(grass(5), 3), &[6], &[2, 1, 1]).rank, 3);
    }

    #[test]
    fn quintic_correction_polynomial_coefficients() {
        let p = compute_p(3, &[5], &[1, 1, 1]);
        assert!(p.is_homogeneous(6));
        assert_eq!(p.coeff(&[0, 3, 3]), rat(-6));
        assert_eq!(p.coeff(&[1, 2, 3]), rat(-19));
        for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            assert_eq!(p.permute_vars(&perm), p, "perm {perm:?}");
        }
    }

    #[test]
    fn correction_polynomial_slot_equivariance() {
        let p211 = compute_p(3, &[6], &[2, 1, 1]);
        assert_eq!(p211.permute_vars(&[0, 2, 1]), p211);
        let p121 = compute_p(3, &[6], &[1, 2, 1]);
        assert_eq!(p211.permute_vars(&[1, 0, 2]), p121);
    }

    #[test]
    fn bicubic_correction_polynomial_via_multidegree_data() {
        // Q coefficients for degrees (3,3) are a = (4, 24, 21, 5); each
        // H1^i H2^j H3^3 coefficient with i+j=3 must be -(a_i+a_j)/deg X.
        let p = compute_p(3, &[3, 3], &[1, 1, 1]);
        assert!(p.is_homogeneous(6));
        assert_eq!(p.coeff(&[0, 3, 3]), rat(-1));
        assert_eq!(p.coeff(&[1, 2, 3]), rat(-5));
    }

    #[test]
    fn line_counts() {
        let cubic_surface = fano(&[3], 4);
        assert_eq!(cubic_surface.expected_dim, 0);
        assert_eq!(cubic_surface.degree, Some(rat(27)));
        let quintic = fano(&[5], 5);
        assert_eq!(quintic.expected_dim, 0);
        assert_eq!(quintic.degree, Some(rat(2875)));
        let bicubic = fano(&[3, 3], 6);
        assert_eq!(bicubic.expected_dim, 0);
        let deg = bicubic.degree.expect("dimension is zero");
        assert!(is_integer(&deg) && deg > rat(0));
        let conic_fourfold = fano(&[2], 4);
        assert_eq!(conic_fourfold.expected_dim, 1);
        assert!(conic_fourfold.degree.is_none());
    }

    #[test]
    fn expected_dimension_of_cy_line_spaces() {
        for (n, degrees) in [(3u32, vec![5u32]), (3, vec![3, 3]), (3, vec![2, 2, 3]), (5, vec![7])]
        {
            let nn = n + degrees.len() as u32 + 1;
            assert_eq!(fano(&degrees, nn).expected_dim, n as i64 - 3);
        }
    }

    #[test]
    fn pushforward_respects_grading() {
        // A homogeneous tower class of degree g pushes to a homogeneous
        // polynomial of degree (r-2)(N-2)+g; the H1*H2*H3^2 coefficient of
        // the pushed xi_1*xi_2 on the three-slot tower over G(2,4) is the
        // hand value of the Grassmannian integral of (sigma_1^2-sigma_11)^2.
        let t = tower(grass(4), 3);
        let target = make_ring(vec![3, 3, 3]);
        let elem = TowerElem::xi(t, 0).mul(&TowerElem::xi(t, 1));
        let pushed = pushforward_to_products(&elem, &target);
        assert!(pushed.is_homogeneous(4));
        assert_eq!(pushed.coeff(&[1, 1, 2]), rat(1));
    }
}
