//! Formal diagonal calculus on powers of a polarized variety.
//!
//! Works in the subring of rational Chow classes on X^r spanned by partial
//! diagonals times powers of the hyperplane class h, for X smooth of
//! dimension n and degree d inside a projective space whose diagonal splits
//! into h-powers. A basis monomial is a set partition of the r slots with
//! one h-exponent per block; the rewrite
//! d * diag_b(h^e) = sum_{j=1..n} diag_{b-1}(h^{e+j-1}) x h^{n+1-j}
//! eliminates positive exponents on multi-slot blocks and yields a normal
//! form. The module supplies the decomposition basis (small diagonal,
//! point-augmented diagonals, polynomial classes), pushforwards along
//! diagonal and projection maps, a classifier into decomposition buckets,
//! and a symbolic layer applying such classes as correspondences to formal
//! cycles with declared codimensions.

use std::collections::BTreeMap;
use std::fmt;

use crate::partitions::PartitionMap;
use crate::ring::{format_rat, linear_product, make_ring, rat, Rat, RingCtx, TruncPoly};
use num_traits::{One, Zero};

/// Ambient data for the calculus: X has dimension n and degree d, classes
/// live on the r-fold product X^r.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TautCtx {
    n: u32,
    d: u32,
    r: usize,
}

/// Creates the context for classes on X^r.
pub fn taut_ctx(n: u32, d: u32, r: usize) -> TautCtx {
    assert!(n >= 1 && d >= 1 && r >= 1, "need n, d, r >= 1");
    TautCtx { n, d, r }
}

impl TautCtx {
    /// Dimension of X.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Degree of X.
    pub fn d(&self) -> u32 {
        self.d
    }

    /// Number of factors.
    pub fn r(&self) -> usize {
        self.r
    }

    /// The truncated ring Q[h_1..h_r]/(h_i^{n+1}) of slot variables.
    pub fn ring(&self) -> RingCtx {
        make_ring(vec![self.n; self.r])
    }

    /// Same X, different number of factors.
    pub fn with_r(&self, r: usize) -> TautCtx {
        taut_ctx(self.n, self.d, r)
    }

    fn d_rat(&self) -> Rat {
        rat(self.d as i64)
    }
}

/// Basis monomial: a set partition of the slots with an h-exponent per
/// block. A block of size b with exponent e stands for the image of h^e
/// under the small-diagonal inclusion of X into those b slots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiagMonomial {
    blocks: Vec<(Vec<usize>, u32)>,
}

impl DiagMonomial {
    fn new(r: usize, mut blocks: Vec<(Vec<usize>, u32)>) -> Self {
        for (b, _) in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort();
        let mut seen = vec![false; r];
        for (b, _) in &blocks {
            assert!(!b.is_empty(), "empty block");
            for &i in b {
                assert!((1..=r).contains(&i) && !seen[i - 1], "blocks must partition 1..{r}");
                seen[i - 1] = true;
            }
        }
        assert!(seen.iter().all(|&s| s), "blocks must cover 1..{r}");
        DiagMonomial { blocks }
    }

    /// Blocks as (sorted 1-based slots, exponent), ordered by first slot.
    pub fn blocks(&self) -> &[(Vec<usize>, u32)] {
        &self.blocks
    }

    /// True when every block of size two or more carries exponent zero.
    pub fn is_normal(&self) -> bool {
        self.blocks.iter().all(|(b, e)| b.len() == 1 || *e == 0)
    }
}

impl fmt::Display for DiagMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (b, e) in &self.blocks {
            if b.len() == 1 {
                match e {
                    0 => {}
                    1 => parts.push(format!("h{}", b[0])),
                    _ => parts.push(format!("h{}^{}", b[0], e)),
                }
            } else {
                let slots = b.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                match e {
                    0 => parts.push(format!("d({slots})")),
                    _ => parts.push(format!("d({slots})^{e}")),
                }
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Expands one block through the rewrite rule, peeling the largest slot.
/// Returns (replacement blocks, coefficient) pairs; an empty list is zero.
fn expand_block(slots: &[usize], e: u32, n: u32, inv_d: &Rat) -> Vec<(Vec<(Vec<usize>, u32)>, Rat)> {
    if e > n {
        return Vec::new();
    }
    if slots.len() == 1 || e == 0 {
        return vec![(vec![(slots.to_vec(), e)], Rat::one())];
    }
    let peeled = slots[slots.len() - 1];
    let rest = &slots[..slots.len() - 1];
    let mut out = Vec::new();
    for j in 1..=n {
        for (mut pieces, c) in expand_block(rest, e + j - 1, n, inv_d) {
            pieces.push((vec![peeled], n + 1 - j));
            out.push((pieces, &c * inv_d));
        }
    }
    out
}

/// Normalizes one raw term and accumulates the result.
fn add_normalized(ctx: &TautCtx, blocks: &[(Vec<usize>, u32)], coeff: &Rat, out: &mut BTreeMap<DiagMonomial, Rat>) {
    let inv_d = Rat::one() / ctx.d_rat();
    let mut acc: Vec<(Vec<(Vec<usize>, u32)>, Rat)> = vec![(Vec::new(), coeff.clone())];
    for (b, e) in blocks {
        let expansion = expand_block(b, *e, ctx.n, &inv_d);
        if expansion.is_empty() {
            return;
        }
        let mut next = Vec::with_capacity(acc.len() * expansion.len());
        for (pieces0, c0) in &acc {
            for (pieces1, c1) in &expansion {
                let mut pieces = pieces0.clone();
                pieces.extend(pieces1.iter().cloned());
                next.push((pieces, c0 * c1));
            }
        }
        acc = next;
    }
    for (pieces, c) in acc {
        let mono = DiagMonomial::new(ctx.r, pieces);
        *out.entry(mono).or_insert_with(Rat::zero) += c;
    }
}

/// Rational combination of diagonal monomials on X^r.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagClass {
    ctx: TautCtx,
    terms: BTreeMap<DiagMonomial, Rat>,
}

/// The small diagonal of X^r.
pub fn delta(ctx: TautCtx) -> DiagClass {
    let mono = DiagMonomial::new(ctx.r, vec![((1..=ctx.r).collect(), 0)]);
    DiagClass::from_terms(ctx, BTreeMap::from([(mono, Rat::one())]))
}

/// Embeds a polynomial in the slot variables as a class of X^r.
pub fn from_poly(ctx: TautCtx, p: &TruncPoly) -> DiagClass {
    assert_eq!(*p.ctx(), ctx.ring(), "polynomial must live in the slot ring");
    let mut terms = BTreeMap::new();
    for (exps, c) in p.terms() {
        let blocks = exps.iter().enumerate().map(|(i, &e)| (vec![i + 1], e)).collect();
        terms.insert(DiagMonomial::new(ctx.r, blocks), c.clone());
    }
    DiagClass::from_terms(ctx, terms)
}

/// The point-augmented diagonal D_I: the diagonal of the slots outside I
/// times the degree-one point class on each slot of I. I must be a proper
/// subset; the empty set gives the small diagonal.
pub fn d_class(ctx: TautCtx, i_set: &[usize]) -> DiagClass {
    let r = ctx.r;
    let mut in_set = vec![false; r];
    for &i in i_set {
        assert!((1..=r).contains(&i), "slot out of range");
        assert!(!in_set[i - 1], "repeated slot");
        in_set[i - 1] = true;
    }
    assert!(i_set.len() < r, "point-augmented classes need a proper subset");
    let comp: Vec<usize> = (1..=r).filter(|&i| !in_set[i - 1]).collect();
    let mut blocks = vec![(comp, 0)];
    let mut coeff = Rat::one();
    for &i in i_set {
        blocks.push((vec![i], ctx.n));
        coeff = coeff / ctx.d_rat();
    }
    DiagClass::from_terms(ctx, BTreeMap::from([(DiagMonomial::new(r, blocks), coeff)]))
}

/// The starting two-slot class with multiplicities (a, b): the product of
/// the linear forms (b+i)h_1 + (n-1-i+a)h_2 for i = 0..n-1.
pub fn gamma_start(ctx: TautCtx, a: u32, b: u32) -> DiagClass {
    assert_eq!(ctx.r, 2, "starting classes live on two factors");
    assert!(a >= 1 && b >= 1, "multiplicities must be positive");
    assert_eq!(a + b + ctx.n, ctx.d + 1, "multiplicities must sum to d+1-n");
    let ring = ctx.ring();
    let factors: Vec<Vec<Rat>> = (0..ctx.n)
        .map(|i| vec![rat((b + i) as i64), rat((ctx.n - 1 - i + a) as i64)])
        .collect();
    from_poly(ctx, &linear_product(&ring, &factors))
}

impl DiagClass {
    fn from_terms(ctx: TautCtx, mut terms: BTreeMap<DiagMonomial, Rat>) -> Self {
        terms.retain(|_, c| !c.is_zero());
        DiagClass { ctx, terms }
    }

    /// The zero class.
    pub fn zero(ctx: TautCtx) -> Self {
        DiagClass { ctx, terms: BTreeMap::new() }
    }

    /// Ambient context.
    pub fn ctx(&self) -> TautCtx {
        self.ctx
    }

    /// Terms as monomial-to-coefficient map.
    pub fn terms(&self) -> &BTreeMap<DiagMonomial, Rat> {
        &self.terms
    }

    /// True when there are no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every term is in normal form.
    pub fn is_normal(&self) -> bool {
        self.terms.keys().all(|m| m.is_normal())
    }

    /// Sum of classes.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ctx, other.ctx, "context mismatch");
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert_with(Rat::zero) += c.clone();
        }
        DiagClass::from_terms(self.ctx, terms)
    }

    /// Difference of classes.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rat::one()))
    }

    /// Scalar multiple.
    pub fn scale(&self, s: &Rat) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect();
        DiagClass::from_terms(self.ctx, terms)
    }

    /// Expands every multi-slot block with positive exponent through the
    /// rewrite rule; the result is the normal form of the same class.
    pub fn normalize(&self) -> Self {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            add_normalized(&self.ctx, &m.blocks, c, &mut out);
        }
        DiagClass::from_terms(self.ctx, out)
    }

    /// Multiplies by h_slot^m and renormalizes.
    pub fn mul_h(&self, slot: usize, m: u32) -> Self {
        assert!((1..=self.ctx.r).contains(&slot), "slot out of range");
        let mut out = BTreeMap::new();
        for (mono, c) in &self.terms {
            let mut blocks = mono.blocks.clone();
            let entry = blocks.iter_mut().find(|(b, _)| b.contains(&slot)).expect("partition covers slot");
            entry.1 += m;
            add_normalized(&self.ctx, &blocks, c, &mut out);
        }
        DiagClass::from_terms(self.ctx, out)
    }

    /// Pushforward along the diagonal map X^s -> X^r induced by a partition
    /// of {1..r} into s blocks, without renormalizing: block j of the
    /// partition absorbs slot j of the source. The result can carry positive
    /// exponents on multi-slot blocks; `push_diag` is its normal form.
    pub fn push_diag_raw(&self, alpha: &PartitionMap) -> DiagClass {
        assert_eq!(alpha.num_blocks(), self.ctx.r, "partition blocks must match source factors");
        let r = alpha.ground();
        let ctx = self.ctx.with_r(r);
        let fibers = alpha.blocks();
        let mut terms = BTreeMap::new();
        for (mono, c) in &self.terms {
            let blocks = mono
                .blocks
                .iter()
                .map(|(b, e)| {
                    let mut nb = Vec::new();
                    for &s in b {
                        nb.extend(fibers[s - 1].iter().copied());
                    }
                    (nb, *e)
                })
                .collect();
            *terms.entry(DiagMonomial::new(r, blocks)).or_insert_with(Rat::zero) += c.clone();
        }
        DiagClass::from_terms(ctx, terms)
    }

    /// Pushforward along the diagonal map induced by a partition, in normal
    /// form.
    pub fn push_diag(&self, alpha: &PartitionMap) -> DiagClass {
        self.push_diag_raw(alpha).normalize()
    }

    /// Pushforward along the projection keeping the listed slots in the
    /// given order. A dropped slot forming a singleton block integrates its
    /// h-power over X (degree d at exponent n, zero otherwise); a dropped
    /// slot inside a larger block is deleted from it.
    pub fn push_proj(&self, keep: &[usize]) -> DiagClass {
        let r = self.ctx.r;
        assert!(!keep.is_empty(), "must keep at least one slot");
        let mut kept = vec![false; r + 1];
        let mut pos = vec![0usize; r + 1];
        for (j, &i) in keep.iter().enumerate() {
            assert!((1..=r).contains(&i), "slot out of range");
            assert!(!kept[i], "repeated slot");
            kept[i] = true;
            pos[i] = j + 1;
        }
        let ctx = self.ctx.with_r(keep.len());
        let mut terms = BTreeMap::new();
        'term: for (mono, c) in &self.terms {
            let mut coeff = c.clone();
            let mut blocks = Vec::new();
            for (b, e) in &mono.blocks {
                let nb: Vec<usize> = b.iter().filter(|&&i| kept[i]).map(|&i| pos[i]).collect();
                if nb.is_empty() {
                    if *e != self.ctx.n {
                        continue 'term;
                    }
                    coeff = &coeff * &self.ctx.d_rat();
                } else {
                    blocks.push((nb, *e));
                }
            }
            *terms.entry(DiagMonomial::new(ctx.r, blocks)).or_insert_with(Rat::zero) += coeff;
        }
        DiagClass::from_terms(ctx, terms)
    }

    /// Slot relabelling: result slot i+1 carries input slot perm[i]+1,
    /// mirroring the variable permutation of the slot ring.
    pub fn permute_slots(&self, perm: &[usize]) -> DiagClass {
        assert_eq!(perm.len(), self.ctx.r, "permutation length mismatch");
        let keep: Vec<usize> = perm.iter().map(|&p| p + 1).collect();
        self.push_proj(&keep)
    }

    /// Degree of the zero-dimensional part: integrates over X^r.
    pub fn integrate(&self) -> Rat {
        let mut total = Rat::zero();
        for (mono, c) in &self.terms {
            if mono.blocks.iter().all(|(_, e)| *e == self.ctx.n) {
                let mut v = c.clone();
                for _ in 0..mono.blocks.len() {
                    v = &v * &self.ctx.d_rat();
                }
                total += v;
            }
        }
        total
    }

    /// Splits a normalized class into the decomposition buckets: small
    /// diagonal, point-augmented diagonals D_I, and polynomial content.
    /// Monomials fitting no bucket are reported verbatim as nonstandard.
    pub fn classify(&self) -> Classification {
        let ctx = self.ctx;
        assert!(ctx.r >= 2, "classification needs at least two factors");
        let ring = ctx.ring();
        let mut delta_coeff = Rat::zero();
        let mut b_parts: BTreeMap<usize, BTreeMap<Vec<usize>, Rat>> = BTreeMap::new();
        let mut poly = TruncPoly::zero(&ring);
        let mut nonstandard = Vec::new();
        for (mono, c) in &self.terms {
            assert!(mono.is_normal(), "classification needs a normalized class");
            let multi: Vec<usize> = (0..mono.blocks.len()).filter(|&i| mono.blocks[i].0.len() >= 2).collect();
            if multi.is_empty() {
                let exps: Vec<u32> = mono.blocks.iter().map(|(_, e)| *e).collect();
                if ctx.r == 2 && (exps == [ctx.n, 0] || exps == [0, ctx.n]) {
                    let slot = if exps[0] == ctx.n { 1 } else { 2 };
                    let entry = b_parts.entry(1).or_default().entry(vec![slot]).or_insert_with(Rat::zero);
                    *entry += c * &ctx.d_rat();
                    continue;
                }
                poly = poly.add(&TruncPoly::monomial(&ring, exps, c.clone()));
                continue;
            }
            if multi.len() == 1 && mono.blocks[multi[0]].1 == 0 {
                if mono.blocks[multi[0]].0.len() == ctx.r {
                    delta_coeff += c.clone();
                    continue;
                }
                let singles: Vec<&(Vec<usize>, u32)> =
                    mono.blocks.iter().enumerate().filter(|(i, _)| *i != multi[0]).map(|(_, b)| b).collect();
                if singles.iter().all(|(_, e)| *e == ctx.n) {
                    let i_set: Vec<usize> = singles.iter().map(|(b, _)| b[0]).collect();
                    let mut coeff = c.clone();
                    for _ in 0..i_set.len() {
                        coeff = &coeff * &ctx.d_rat();
                    }
                    let entry = b_parts.entry(i_set.len()).or_default().entry(i_set).or_insert_with(Rat::zero);
                    *entry += coeff;
                    continue;
                }
            }
            nonstandard.push((mono.clone(), c.clone()));
        }
        Classification { ctx, delta: delta_coeff, b_parts, poly, nonstandard }
    }

    /// Applies the class, viewed as a correspondence from X^{r-1} to the
    /// last slot, to a product of formal cycles with declared codimensions
    /// summing to n. Blocks away from the last slot integrate to degree
    /// symbols (and require total codimension exactly n to survive); the
    /// block containing the last slot becomes the output product.
    pub fn apply_corr(&self, z: &[SymCycle]) -> SymExpr {
        let r = self.ctx.r;
        let n = self.ctx.n;
        assert!(r >= 2, "a correspondence needs a source and a target slot");
        assert_eq!(z.len(), r - 1, "one cycle per source slot");
        assert!(z.iter().all(|c| c.codim >= 1), "cycles must have positive codimension");
        assert_eq!(z.iter().map(|c| c.codim).sum::<u32>(), n, "codimensions must sum to n");
        let mut out = SymExpr::zero(n, self.ctx.d, z);
        'term: for (mono, c) in &self.terms {
            let mut degs: Vec<Vec<usize>> = Vec::new();
            let mut open = None;
            for (b, e) in &mono.blocks {
                if b.contains(&r) {
                    open = Some((b.iter().filter(|&&i| i != r).map(|&i| i - 1).collect::<Vec<_>>(), *e));
                } else {
                    let kappa = b.iter().map(|&i| z[i - 1].codim).sum::<u32>() + e;
                    if kappa != n {
                        continue 'term;
                    }
                    degs.push(b.iter().map(|&i| i - 1).collect());
                }
            }
            let (prod, e) = open.expect("the target slot lies in some block");
            let cdim = prod.iter().map(|&i| z[i].codim).sum::<u32>() + e;
            if cdim > n {
                continue;
            }
            assert_eq!(cdim, n, "correspondence input must be n-dimensional");
            degs.sort();
            out.insert(SymMonomial { degs, prod, hpow: e }, c.clone());
        }
        out
    }
}

impl fmt::Display for DiagClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(m, c)| format!("({}) {}", format_rat(c), m)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Result of classifying a class into decomposition buckets.
#[derive(Clone, Debug)]
pub struct Classification {
    /// Ambient context of the classified class.
    pub ctx: TautCtx,
    /// Coefficient of the small diagonal.
    pub delta: Rat,
    /// Coefficients of the classes D_I, grouped by |I| and keyed by I.
    pub b_parts: BTreeMap<usize, BTreeMap<Vec<usize>, Rat>>,
    /// Pure polynomial content in the slot variables.
    pub poly: TruncPoly,
    /// Monomials fitting no bucket, reported verbatim.
    pub nonstandard: Vec<(DiagMonomial, Rat)>,
}

impl Classification {
    /// Coefficient of D_I, zero when absent.
    pub fn b_coeff(&self, i_set: &[usize]) -> Rat {
        let mut key = i_set.to_vec();
        key.sort_unstable();
        self.b_parts
            .get(&key.len())
            .and_then(|m| m.get(&key))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Coefficient of the i-th secondary class D_{i}.
    pub fn b1(&self, i: usize) -> Rat {
        self.b_coeff(&[i])
    }

    /// Rebuilds the classified class from its buckets.
    pub fn reassemble(&self) -> DiagClass {
        let mut out = delta(self.ctx).scale(&self.delta);
        for per_size in self.b_parts.values() {
            for (i_set, c) in per_size {
                out = out.add(&d_class(self.ctx, i_set).scale(c));
            }
        }
        out = out.add(&from_poly(self.ctx, &self.poly));
        let extra = self.nonstandard.iter().cloned().collect();
        out.add(&DiagClass::from_terms(self.ctx, extra))
    }
}

/// Formal algebraic cycle with a name and a declared codimension.
#[derive(Clone, Debug)]
pub struct SymCycle {
    /// Display name.
    pub name: String,
    /// Codimension in X.
    pub codim: u32,
}

/// Creates a named formal cycle of the given positive codimension.
pub fn sym_cycle(name: &str, codim: u32) -> SymCycle {
    assert!(codim >= 1, "formal cycles must have positive codimension");
    SymCycle { name: name.to_string(), codim }
}

/// One formal zero-cycle term: a product of degree symbols deg(z_i1*..*z_ik)
/// times a cycle product z_j1*..*z_jm*h^hpow, with hpow chosen so the
/// product has codimension n.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct SymMonomial {
    degs: Vec<Vec<usize>>,
    prod: Vec<usize>,
    hpow: u32,
}

/// Rational combination of formal zero-cycle terms on X.
#[derive(Clone, Debug, PartialEq)]
pub struct SymExpr {
    n: u32,
    d: u32,
    names: Vec<String>,
    codims: Vec<u32>,
    terms: BTreeMap<SymMonomial, Rat>,
}

impl SymExpr {
    /// The zero expression over the given cycle symbols.
    pub fn zero(n: u32, d: u32, z: &[SymCycle]) -> SymExpr {
        SymExpr {
            n,
            d,
            names: z.iter().map(|c| c.name.clone()).collect(),
            codims: z.iter().map(|c| c.codim).collect(),
            terms: BTreeMap::new(),
        }
    }

    fn insert(&mut self, mono: SymMonomial, c: Rat) {
        let entry = self.terms.entry(mono.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }

    /// Adds c times (product of degree symbols) times (cycle product times
    /// the h-power completing it to codimension n).
    pub fn plus_term(mut self, c: Rat, degs: &[&[usize]], prod: &[usize]) -> SymExpr {
        let cdim: u32 = prod.iter().map(|&i| self.codims[i]).sum();
        assert!(cdim <= self.n, "cycle product exceeds the dimension");
        let mut degs: Vec<Vec<usize>> = degs
            .iter()
            .map(|g| {
                let mut v = g.to_vec();
                v.sort_unstable();
                v
            })
            .collect();
        degs.sort();
        let mut prod = prod.to_vec();
        prod.sort_unstable();
        let hpow = self.n - cdim;
        self.insert(SymMonomial { degs, prod, hpow }, c);
        self
    }

    /// True when there are no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of expressions over the same symbols.
    pub fn add(&self, other: &SymExpr) -> SymExpr {
        assert_eq!(self.codims, other.codims, "symbol tables must match");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    /// Difference of expressions.
    pub fn sub(&self, other: &SymExpr) -> SymExpr {
        self.add(&other.scale(&-Rat::one()))
    }

    /// Scalar multiple.
    pub fn scale(&self, s: &Rat) -> SymExpr {
        let mut out = self.clone();
        out.terms = self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect();
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Evaluates cycle id at the h-power of its codimension: degree symbols
    /// drop the id (an emptied symbol is the degree d of X) and products
    /// absorb it into the h-power.
    pub fn substitute_h(&self, id: usize) -> SymExpr {
        assert!(id < self.codims.len(), "unknown cycle id");
        let mut out = SymExpr { terms: BTreeMap::new(), ..self.clone() };
        for (mono, c) in &self.terms {
            let mut coeff = c.clone();
            let mut degs = Vec::new();
            for g in &mono.degs {
                let ng: Vec<usize> = g.iter().copied().filter(|&i| i != id).collect();
                if ng.is_empty() {
                    coeff = &coeff * &rat(self.d as i64);
                } else {
                    degs.push(ng);
                }
            }
            degs.sort();
            let mut prod = mono.prod.clone();
            let mut hpow = mono.hpow;
            if let Some(p) = prod.iter().position(|&i| i == id) {
                prod.remove(p);
                hpow += self.codims[id];
            }
            out.insert(SymMonomial { degs, prod, hpow }, coeff);
        }
        out
    }

    /// Rewrites every product term with a positive h-power as 1/d times its
    /// degree symbol times h^n; valid whenever positive-codimension cycles
    /// intersected with complementary h-powers are proportional to h^n.
    pub fn laststep_reduce(&self) -> SymExpr {
        let mut out = SymExpr { terms: BTreeMap::new(), ..self.clone() };
        for (mono, c) in &self.terms {
            if mono.prod.is_empty() || mono.hpow == 0 {
                out.insert(mono.clone(), c.clone());
                continue;
            }
            let mut degs = mono.degs.clone();
            degs.push(mono.prod.clone());
            degs.sort();
            let coeff = c / rat(self.d as i64);
            out.insert(SymMonomial { degs, prod: Vec::new(), hpow: self.n }, coeff);
        }
        out
    }

    /// True when every term is a multiple of h^n (times degree symbols).
    pub fn proportional_to_hn(&self) -> bool {
        self.terms.keys().all(|m| m.prod.is_empty())
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let name = |i: usize| self.names[i].clone();
        let mut parts = Vec::new();
        for (mono, c) in &self.terms {
            let mut factors = vec![format!("({})", format_rat(c))];
            for g in &mono.degs {
                let inner = g.iter().map(|&i| name(i)).collect::<Vec<_>>().join("*");
                factors.push(format!("deg({inner})"));
            }
            if !mono.prod.is_empty() {
                factors.push(mono.prod.iter().map(|&i| name(i)).collect::<Vec<_>>().join("*"));
            }
            if mono.hpow > 0 {
                factors.push(format!("h^{}", mono.hpow));
            }
            parts.push(factors.join("*"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::ratio;

    fn quintic3(r: usize) -> TautCtx {
        taut_ctx(3, 5, r)
    }

    fn poly_class(ctx: TautCtx, terms: &[(Vec<u32>, Rat)]) -> DiagClass {
        let ring = ctx.ring();
        let mut p = TruncPoly::zero(&ring);
        for (exps, c) in terms {
            p = p.add(&TruncPoly::monomial(&ring, exps.clone(), c.clone()));
        }
        from_poly(ctx, &p)
    }

    #[test]
    fn delta_and_d_class_basics() {
        let ctx = quintic3(3);
        let d3 = d_class(ctx, &[3]);
        let (mono, coeff) = d3.terms().iter().next().unwrap();
        assert_eq!(d3.terms().len(), 1);
        assert_eq!(mono.blocks(), &[(vec![1, 2], 0), (vec![3], 3)]);
        assert_eq!(*coeff, ratio(1, 5));
        assert_eq!(d_class(ctx, &[1, 2]), poly_class(ctx, &[(vec![3, 3, 0], ratio(1, 25))]));
        assert_eq!(d_class(ctx, &[]), delta(ctx));
        assert!(std::panic::catch_unwind(|| d_class(ctx, &[1, 2, 3])).is_err());
        assert!(from_poly(ctx, &TruncPoly::zero(&ctx.ring())).is_zero());
    }

    #[test]
    fn projective_diagonal_rewrite() {
        let ctx = quintic3(2);
        let expected = poly_class(
            ctx,
            &[
                (vec![1, 3], ratio(1, 5)),
                (vec![2, 2], ratio(1, 5)),
                (vec![3, 1], ratio(1, 5)),
            ],
        );
        assert_eq!(delta(ctx).mul_h(1, 1), expected);
    }

    #[test]
    fn diagonal_times_point_class() {
        let ctx = quintic3(2);
        assert_eq!(delta(ctx).mul_h(1, 3), poly_class(ctx, &[(vec![3, 3], ratio(1, 5))]));
        assert!(delta(ctx).mul_h(1, 3).mul_h(2, 1).is_zero());
        assert_eq!(delta(ctx).mul_h(1, 2).mul_h(2, 1), delta(ctx).mul_h(1, 3));
    }

    #[test]
    fn monomial_exponent_bump_caps() {
        let ctx = quintic3(2);
        let m = poly_class(ctx, &[(vec![2, 0], rat(1))]);
        assert_eq!(m.mul_h(1, 1), poly_class(ctx, &[(vec![3, 0], rat(1))]));
        assert!(m.mul_h(1, 2).is_zero());
    }

    #[test]
    fn push_diag_secondary_examples() {
        let ctx2 = quintic3(2);
        let ctx3 = quintic3(3);
        let alpha = PartitionMap::from_blocks(3, &[vec![1, 2], vec![3]]);
        assert_eq!(d_class(ctx2, &[1]).push_diag(&alpha), d_class(ctx3, &[1, 2]));
        assert_eq!(d_class(ctx2, &[2]).push_diag(&alpha), d_class(ctx3, &[3]));
        let id = PartitionMap::identity(2);
        let mixed = delta(ctx2).add(&gamma_start(ctx2, 1, 2)).add(&d_class(ctx2, &[1]).scale(&rat(7)));
        assert_eq!(mixed.push_diag(&id), mixed);
    }

    #[test]
    fn push_proj_examples() {
        let ctx3 = quintic3(3);
        let ctx2 = quintic3(2);
        assert_eq!(delta(ctx3).push_proj(&[1, 2]), delta(ctx2));
        assert_eq!(d_class(ctx3, &[3]).push_proj(&[1, 2]), delta(ctx2));
        let p = poly_class(ctx3, &[(vec![1, 2, 3], rat(1))]);
        assert_eq!(p.push_proj(&[1, 2]), poly_class(ctx2, &[(vec![1, 2], rat(5))]));
        assert!(poly_class(ctx3, &[(vec![1, 2, 2], rat(1))]).push_proj(&[1, 2]).is_zero());
        let one_slot = delta(ctx3).push_proj(&[3]);
        assert_eq!(one_slot, poly_class(quintic3(1), &[(vec![0], rat(1))]));
    }

    #[test]
    fn permute_slots_matches_ring_convention() {
        let ctx = quintic3(3);
        let ring = ctx.ring();
        let p = TruncPoly::monomial(&ring, vec![2, 1, 0], rat(3))
            .add(&TruncPoly::monomial(&ring, vec![0, 3, 1], rat(5)));
        let perm = [2usize, 0, 1];
        assert_eq!(from_poly(ctx, &p).permute_slots(&perm), from_poly(ctx, &p.permute_vars(&perm)));
        let swapped = d_class(ctx, &[1]).permute_slots(&[1, 0, 2]);
        assert_eq!(swapped, d_class(ctx, &[2]).permute_slots(&[0, 1, 2]));
    }

    #[test]
    fn gamma_start_quintic_values() {
        let ctx = quintic3(2);
        let g = gamma_start(ctx, 1, 2);
        let expected = poly_class(
            ctx,
            &[
                (vec![3, 0], rat(24)),
                (vec![2, 1], rat(58)),
                (vec![1, 2], rat(37)),
                (vec![0, 3], rat(6)),
            ],
        );
        assert_eq!(g, expected);
        assert_eq!(gamma_start(ctx, 2, 1), g.permute_slots(&[1, 0]));
    }

    #[test]
    fn classify_gamma_start() {
        let ctx = quintic3(2);
        let cl = gamma_start(ctx, 1, 2).classify();
        assert!(cl.delta.is_zero());
        assert_eq!(cl.b1(1), rat(120));
        assert_eq!(cl.b1(2), rat(30));
        let ring = ctx.ring();
        let poly = TruncPoly::monomial(&ring, vec![2, 1], rat(58))
            .add(&TruncPoly::monomial(&ring, vec![1, 2], rat(37)));
        assert_eq!(cl.poly, poly);
        assert!(cl.nonstandard.is_empty());
    }

    #[test]
    fn classify_buckets_and_roundtrip() {
        let ctx = quintic3(3);
        let loose = from_poly(quintic3(2), &TruncPoly::monomial(&quintic3(2).ring(), vec![0, 2], rat(1)))
            .push_diag_raw(&PartitionMap::from_blocks(3, &[vec![1, 2], vec![3]]));
        assert!(loose.is_normal());
        let x = delta(ctx)
            .scale(&rat(3))
            .add(&d_class(ctx, &[1, 2]).scale(&rat(2)))
            .add(&d_class(ctx, &[2]).scale(&ratio(7, 3)))
            .add(&poly_class(ctx, &[(vec![1, 2, 3], rat(11)), (vec![3, 3, 0], rat(4))]))
            .add(&loose.scale(&rat(5)));
        let cl = x.classify();
        assert_eq!(cl.delta, rat(3));
        assert_eq!(cl.b_coeff(&[2]), ratio(7, 3));
        assert_eq!(cl.b_coeff(&[1, 2]), rat(0));
        assert_eq!(cl.poly.coeff(&[3, 3, 0]), rat(4) + ratio(2, 25));
        assert_eq!(cl.poly.coeff(&[1, 2, 3]), rat(11));
        assert_eq!(cl.nonstandard.len(), 1);
        assert_eq!(cl.nonstandard[0].1, rat(5));
        assert_eq!(cl.reassemble(), x);
        let empty = DiagClass::zero(ctx).classify();
        assert!(empty.delta.is_zero() && empty.b_parts.is_empty());
        assert!(empty.poly.is_zero() && empty.nonstandard.is_empty());
    }

    #[test]
    fn rewrite_conservation_exhaustive() {
        for d in [3u32, 5] {
            for n in 1..=4u32 {
                for b in 2..=4usize {
                    let ctx = taut_ctx(n, d, b);
                    for e in 0..=n {
                        for tuple in exponent_tuples(b, n) {
                            let mut class = delta(ctx).mul_h(1, e);
                            for (i, &m) in tuple.iter().enumerate() {
                                if m > 0 {
                                    class = class.mul_h(i + 1, m);
                                }
                            }
                            let total = e + tuple.iter().sum::<u32>();
                            let expected = if total == n { rat(d as i64) } else { rat(0) };
                            assert_eq!(class.integrate(), expected, "d={d} n={n} b={b} e={e} tuple={tuple:?}");
                        }
                    }
                }
            }
        }
    }

    fn exponent_tuples(len: usize, max: u32) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::new();
            for t in &out {
                for m in 0..=max {
                    let mut t = t.clone();
                    t.push(m);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn rewrite_order_confluence() {
        let ctx = taut_ctx(3, 5, 3);
        let orders: [[usize; 3]; 4] = [[1, 2, 3], [3, 2, 1], [2, 3, 1], [3, 1, 2]];
        let exps = [2u32, 1, 1];
        let mut results = Vec::new();
        for order in orders {
            let mut class = delta(ctx);
            for &slot in &order {
                class = class.mul_h(slot, exps[slot - 1]);
            }
            results.push(class);
        }
        for r in &results[1..] {
            assert_eq!(*r, results[0]);
        }
        let split = delta(ctx).mul_h(1, 1).mul_h(1, 1);
        assert_eq!(split, delta(ctx).mul_h(1, 2));
    }

    #[test]
    fn section_pair_identity() {
        let ctx2 = quintic3(2);
        let alpha = PartitionMap::from_blocks(3, &[vec![1, 2], vec![3]]);
        let samples = [
            delta(ctx2),
            d_class(ctx2, &[1]),
            d_class(ctx2, &[2]),
            gamma_start(ctx2, 1, 2),
            poly_class(ctx2, &[(vec![2, 1], rat(1)), (vec![0, 3], ratio(2, 7))]),
        ];
        for x in &samples {
            assert_eq!(x.push_diag(&alpha).push_proj(&[2, 3]), *x);
            assert_eq!(x.push_diag(&alpha).push_proj(&[1, 3]), *x);
        }
    }

    #[test]
    fn push_diag_type_preservation() {
        let ctx2 = quintic3(2);
        let alpha = PartitionMap::from_blocks(3, &[vec![1, 3], vec![2]]);
        let type_a = poly_class(ctx2, &[(vec![1, 2], rat(4)), (vec![2, 1], rat(9))]);
        let pushed = type_a.push_diag(&alpha);
        for mono in pushed.terms().keys() {
            assert!(mono.blocks().iter().all(|(b, e)| b.len() == 1 && *e >= 1));
        }
        let doubled = d_class(ctx2, &[1]).push_diag(&alpha).classify();
        assert!(doubled.delta.is_zero() && doubled.b_parts.is_empty() && doubled.nonstandard.is_empty());
        assert_eq!(doubled.poly.coeff(&[3, 0, 3]), ratio(1, 25));
        let fixed = d_class(ctx2, &[2]).push_diag(&alpha).classify();
        assert!(fixed.delta.is_zero() && fixed.poly.is_zero() && fixed.nonstandard.is_empty());
        assert_eq!(fixed.b1(2), rat(1));
        let ctx4 = quintic3(4);
        let beta = PartitionMap::from_blocks(5, &[vec![1], vec![2, 5], vec![3], vec![4]]);
        for i_set in [vec![1usize, 2], vec![2, 3], vec![3, 4]] {
            let cl = d_class(ctx4, &i_set).push_diag(&beta).classify();
            assert!(cl.delta.is_zero() && cl.poly.is_zero() && cl.nonstandard.is_empty());
            assert!(cl.b_parts.keys().all(|&s| s == 2 || s == 3));
        }
    }

    #[test]
    fn integrate_values() {
        let ctx = quintic3(3);
        assert!(delta(ctx).integrate().is_zero());
        assert_eq!(poly_class(ctx, &[(vec![3, 3, 3], rat(1))]).integrate(), rat(125));
        let d1 = d_class(ctx, &[1]).mul_h(2, 3);
        assert_eq!(d1.integrate(), rat(5));
        assert!(d1.mul_h(3, 1).is_zero());
    }

    #[test]
    fn raw_push_keeps_block_exponents() {
        let ctx2 = quintic3(2);
        let alpha = PartitionMap::from_blocks(3, &[vec![1, 3], vec![2]]);
        let raw = gamma_start(ctx2, 1, 2).push_diag_raw(&alpha);
        assert!(!raw.is_normal());
        assert_eq!(raw.normalize(), gamma_start(ctx2, 1, 2).push_diag(&alpha));
    }

    #[test]
    fn apply_corr_bucket_rules() {
        let ctx = quintic3(3);
        let z = [sym_cycle("Z", 1), sym_cycle("Z'", 2)];
        let prod = delta(ctx).apply_corr(&z);
        assert_eq!(prod, SymExpr::zero(3, 5, &z).plus_term(rat(1), &[], &[0, 1]));
        let dk = d_class(ctx, &[3]).apply_corr(&z);
        assert_eq!(dk, SymExpr::zero(3, 5, &z).plus_term(ratio(1, 5), &[&[0, 1]], &[]));
        assert!(d_class(ctx, &[1]).apply_corr(&z).is_zero());
        assert!(d_class(ctx, &[2]).apply_corr(&z).is_zero());
        let good = poly_class(ctx, &[(vec![2, 1, 3], rat(7))]).apply_corr(&z);
        assert_eq!(good, SymExpr::zero(3, 5, &z).plus_term(rat(7), &[&[0], &[1]], &[]));
        assert!(poly_class(ctx, &[(vec![1, 2, 3], rat(7))]).apply_corr(&z).is_zero());
        assert!(poly_class(ctx, &[(vec![2, 3, 1], rat(2))]).apply_corr(&z).is_zero());
    }

    fn quintic_q() -> TruncPoly {
        let ring = make_ring(vec![3, 3]);
        TruncPoly::monomial(&ring, vec![0, 3], rat(24))
            .add(&TruncPoly::monomial(&ring, vec![1, 2], rat(58)))
            .add(&TruncPoly::monomial(&ring, vec![2, 1], rat(37)))
            .add(&TruncPoly::monomial(&ring, vec![3, 0], rat(6)))
    }

    fn quintic_decomposition_rhs() -> DiagClass {
        let ctx2 = quintic3(2);
        let ctx3 = quintic3(3);
        let q = from_poly(ctx2, &quintic_q());
        let j12 = PartitionMap::from_blocks(3, &[vec![1, 2], vec![3]]);
        let j13 = PartitionMap::from_blocks(3, &[vec![1, 3], vec![2]]);
        let j23 = PartitionMap::from_blocks(3, &[vec![1], vec![2, 3]]);
        let pushes = q
            .push_diag_raw(&j12)
            .add(&q.push_diag_raw(&j13))
            .add(&q.permute_slots(&[1, 0]).push_diag_raw(&j23));
        let p = crate::schubert::compute_p(3, &[5], &[1, 1, 1]).recap(&ctx3.ring());
        pushes.add(&from_poly(ctx3, &p))
    }

    #[test]
    fn product_degeneration_four_terms() {
        let z = [sym_cycle("Z", 1), sym_cycle("Z'", 2)];
        let applied = quintic_decomposition_rhs().apply_corr(&z);
        let expected = SymExpr::zero(3, 5, &z)
            .plus_term(rat(24), &[&[0, 1]], &[])
            .plus_term(rat(37), &[&[1]], &[0])
            .plus_term(rat(58), &[&[0]], &[1])
            .plus_term(rat(-19), &[&[0], &[1]], &[]);
        assert_eq!(applied, expected);
        let reduced = applied.laststep_reduce();
        let target = SymExpr::zero(3, 5, &z).plus_term(rat(24), &[&[0, 1]], &[]);
        assert_eq!(reduced, target);
        assert!(target.proportional_to_hn());
    }

    #[test]
    fn laststep_identity_symbolic() {
        let z = [sym_cycle("W", 2), sym_cycle("H", 1)];
        let lhs = delta(quintic3(3)).scale(&rat(120)).apply_corr(&z);
        let rhs = quintic_decomposition_rhs().apply_corr(&z);
        let residual = lhs.sub(&rhs).substitute_h(1);
        let expected = SymExpr::zero(3, 5, &z)
            .plus_term(rat(5) * (rat(24) - rat(58)), &[], &[0])
            .plus_term(rat(58) - rat(24), &[&[0]], &[]);
        assert_eq!(residual, expected);
        assert!(residual.laststep_reduce().is_zero());
    }

    #[test]
    fn symexpr_substitution_and_display() {
        let z = [sym_cycle("Z", 1), sym_cycle("Z'", 2)];
        let e = SymExpr::zero(3, 5, &z)
            .plus_term(rat(2), &[&[0, 1]], &[])
            .plus_term(ratio(1, 5), &[], &[0, 1]);
        let sub = e.substitute_h(0);
        let expected = SymExpr::zero(3, 5, &z)
            .plus_term(rat(2), &[&[1]], &[])
            .plus_term(ratio(1, 5), &[], &[1]);
        assert_eq!(sub, expected);
        let both = sub.substitute_h(1);
        let constant = SymExpr::zero(3, 5, &z).plus_term(rat(10), &[], &[]).plus_term(ratio(1, 5), &[], &[]);
        assert_eq!(both, constant);
        assert_eq!(format!("{e}"), "(1/5)*Z*Z' + (2)*deg(Z*Z')*h^3");
        let ctx = quintic3(2);
        assert_eq!(format!("{}", d_class(ctx, &[1]).scale(&rat(5)).add(&delta(ctx))), "(1) h1^3 + (1) d(1,2)");
    }
}
