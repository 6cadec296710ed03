//! Chern-class machinery for the bundle data of a Calabi-Yau complete
//! intersection X in P^{n+r}, and the degree-n polynomial Q(H1,H2) whose
//! coefficients control the diagonal decomposition of X x X.
//!
//! Q is the product of two factors on P^{n+r} x P^{n+r}:
//! the top Chern class c_{n-r+1}(M) of the middle bundle M, and a degree
//! (r-1) excess factor. For split bundle data both factors are products of
//! linear forms; for general bundle data given by Chern classes, c(M) is
//! recovered from the Chern character of
//! ch(M)(t) = e^{(H1+2H2)t} * sum_i (e^{(d_i-2)H1 t} - e^{(d_i-2)H2 t})
//!                                  / (e^{H1 t} - e^{H2 t}),
//! expanded with an abstract root in place of d_i - 2 and collapsed onto
//! power sums, then converted to Chern classes by Newton's identities.
//! The two routes must agree on split data; that agreement is enforced in
//! tests and in the acceptance suite.

use crate::ring::{
    binomial, exp_series, factorial, geometric_inverse, linear_product, make_ring, poly_mul, rat,
    ratio_series, Rat, RingCtx, TruncPoly,
};
use num_traits::Zero;

/// Bundle data for E = O(d_1) + ... + O(d_r), or a non-split bundle of rank
/// r described by its Chern classes c_i(E) = gamma_i * H^i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BundleSpec {
    /// Multidegrees d_1..d_r, each >= 1.
    Split(Vec<u32>),
    /// gamma_1..gamma_r with c_i(E) = gamma_i * H^i.
    ChernClasses(Vec<Rat>),
}

impl BundleSpec {
    /// Rank r of the bundle.
    pub fn rank(&self) -> usize {
        match self {
            BundleSpec::Split(d) => d.len(),
            BundleSpec::ChernClasses(g) => g.len(),
        }
    }

    /// c_1(E) as a scalar (coefficient of H).
    pub fn c1(&self) -> Rat {
        match self {
            BundleSpec::Split(d) => rat(d.iter().map(|&x| x as i64).sum()),
            BundleSpec::ChernClasses(g) => g[0].clone(),
        }
    }

    /// Elementary symmetric functions e_0..e_r of the Chern roots.
    fn elementary(&self) -> Vec<Rat> {
        match self {
            BundleSpec::Split(d) => {
                let mut e = vec![Rat::zero(); d.len() + 1];
                e[0] = rat(1);
                for &di in d {
                    for k in (1..e.len()).rev() {
                        let bump = &e[k - 1] * rat(di as i64);
                        e[k] = &e[k] + bump;
                    }
                }
                e
            }
            BundleSpec::ChernClasses(g) => {
                let mut e = Vec::with_capacity(g.len() + 1);
                e.push(rat(1));
                e.extend(g.iter().cloned());
                e
            }
        }
    }

    fn validate(&self) {
        match self {
            BundleSpec::Split(d) => {
                assert!(!d.is_empty() && d.iter().all(|&x| x >= 1), "degrees must be >= 1")
            }
            BundleSpec::ChernClasses(g) => assert!(!g.is_empty(), "empty Chern data"),
        }
    }
}

/// Total Chern class of E pulled back through variable `var`:
/// prod (1 + d_i H_var) for split data, 1 + sum gamma_i H_var^i otherwise.
pub fn total_chern(ctx: &RingCtx, spec: &BundleSpec, var: usize) -> TruncPoly {
    spec.validate();
    match spec {
        BundleSpec::Split(d) => {
            let mut acc = TruncPoly::one(ctx);
            for &di in d {
                let mut exps = vec![0; ctx.num_vars()];
                exps[var] = 1;
                let f = TruncPoly::one(ctx)
                    .add(&TruncPoly::monomial(ctx, exps, rat(di as i64)));
                acc = poly_mul(&acc, &f);
            }
            acc
        }
        BundleSpec::ChernClasses(g) => {
            let mut acc = TruncPoly::one(ctx);
            for (i, gi) in g.iter().enumerate() {
                let mut exps = vec![0; ctx.num_vars()];
                exps[var] = i as u32 + 1;
                acc = acc.add(&TruncPoly::monomial(ctx, exps, gi.clone()));
            }
            acc
        }
    }
}

/// Power sums p_1..p_upto of the Chern roots of E, via Newton's identities
/// from the elementary symmetric functions.
pub fn power_sums(spec: &BundleSpec, upto: usize) -> Vec<Rat> {
    spec.validate();
    let e = spec.elementary();
    let r = spec.rank();
    let mut p: Vec<Rat> = Vec::with_capacity(upto + 1);
    p.push(rat(r as i64));
    for k in 1..=upto {
        // p_k = sum_{i=1}^{min(k,r)} (-1)^{i-1} e_i p_{k-i}, with the
        // k*e_k correction when k <= r.
        let mut s = Rat::zero();
        for i in 1..=k.min(r) {
            let sign = if i % 2 == 1 { rat(1) } else { rat(-1) };
            if i == k {
                s += sign * rat(k as i64) * &e[i];
            } else {
                s += sign * &e[i] * &p[k - i];
            }
        }
        p.push(s);
    }
    p[1..].to_vec()
}

/// Power sums q_j = sum_i (d_i - 2)^j for j = 0..upto, from the power sums
/// of the roots via the binomial transform.
fn shifted_power_sums(spec: &BundleSpec, upto: usize) -> Vec<Rat> {
    let p = power_sums(spec, upto);
    let r = spec.rank();
    let mut q = Vec::with_capacity(upto + 1);
    for j in 0..=upto {
        let mut s = Rat::zero();
        for t in 0..=j {
            let pt = if t == 0 { rat(r as i64) } else { p[t - 1].clone() };
            let sign = rat(-2).pow((j - t) as i32);
            s += binomial(j as u32, t as u32) * sign * pt;
        }
        q.push(s);
    }
    q
}

/// Newton step over a polynomial ring: elementary classes e_1..e_upto from
/// power-sum classes p_1..p_upto.
fn elementary_from_power_sum_classes(
    ctx: &RingCtx,
    p: &[TruncPoly],
    upto: usize,
) -> Vec<TruncPoly> {
    let mut e = vec![TruncPoly::one(ctx)];
    for k in 1..=upto {
        let mut s = TruncPoly::zero(ctx);
        for i in 1..=k {
            let sign = if i % 2 == 1 { rat(1) } else { rat(-1) };
            s = s.add(&poly_mul(&e[k - i], &p[i - 1]).scale(&sign));
        }
        e.push(s.scale(&(rat(1) / rat(k as i64))));
    }
    e[1..].to_vec()
}

/// Top Chern class c_{n-r+1}(M) for split data, as the product
/// prod_i prod_{j=1}^{d_i-2} (j H1 + (d_i - j) H2).
pub fn m_top_chern_split(ctx: &RingCtx, degrees: &[u32]) -> TruncPoly {
    let mut factors = Vec::new();
    for &d in degrees {
        for j in 1..=d.saturating_sub(2) {
            factors.push(vec![rat(j as i64), rat((d - j) as i64)]);
        }
    }
    linear_product(ctx, &factors)
}

/// Top Chern class c_{n-r+1}(M) through the Chern character: valid for any
/// bundle data satisfying the Calabi-Yau constraint c_1(E) = n + r + 1.
///
/// The per-summand ratio (e^{(d_i-2)w} - 1)/(e^w - 1), w = (H1-H2)t, is
/// expanded with an abstract root variable; root powers collapse onto the
/// power sums sum_i (d_i-2)^j, which are computable from Chern classes.
pub fn m_top_chern_grr(n: u32, spec: &BundleSpec) -> TruncPoly {
    spec.validate();
    let r = spec.rank();
    assert!(r as u32 <= n + 1, "rank exceeds n+1");
    assert_eq!(spec.c1(), rat((n as i64) + (r as i64) + 1), "not Calabi-Yau data");
    let m = (n + 1 - r as u32) as usize;
    let ctx2 = make_ring(vec![n, n]);
    if m == 0 {
        return TruncPoly::one(&ctx2);
    }
    let ctx3 = make_ring(vec![n, n, m as u32 + 1]);
    let q = shifted_power_sums(spec, m + 1);

    // ratio(w)|_{w=(H1-H2)t}: coefficient of t^k is ratio_k(A)*(H1-H2)^k.
    let raw = ratio_series(&ctx3, 2, m);
    let h1_minus_h2 = TruncPoly::linear(&ctx3, &[rat(1), rat(-1), rat(0)]);
    let mut w_pow = TruncPoly::one(&ctx3);
    let mut ratio_coeffs = Vec::with_capacity(m + 1);
    for k in 0..=m {
        ratio_coeffs.push(poly_mul(raw.coeff(k), &w_pow));
        w_pow = poly_mul(&w_pow, &h1_minus_h2);
    }
    let ratio = crate::ring::TSeries::from_coeffs(ratio_coeffs);

    // e^{(A-1)H2 t} * ratio, summed over the roots by collapsing powers of
    // the abstract root A onto the shifted power sums.
    let mid = exp_series(
        &TruncPoly::monomial(&ctx3, vec![0, 1, 1], rat(1))
            .add(&TruncPoly::linear(&ctx3, &[rat(0), rat(-1), rat(0)])),
        m,
    );
    let summed = mid.mul(&ratio).map(|c| c.collapse_var(2, &q));

    // ch(M)(t) = e^{(H1+2H2)t} * summed; coefficient of t^k is ch_k(M).
    let ch = exp_series(&TruncPoly::linear(&ctx3, &[rat(1), rat(2), rat(0)]), m).mul(&summed);
    assert_eq!(
        *ch.coeff(0),
        TruncPoly::one(&ctx3).scale(&rat(m as i64)),
        "rank of M must be n-r+1"
    );
    let p: Vec<TruncPoly> =
        (1..=m).map(|k| ch.coeff(k).scale(&factorial(k as u32))).collect();
    let e = elementary_from_power_sum_classes(&ctx3, &p, m);
    e[m - 1].drop_var(2).recap(&ctx2)
}

/// Degree-(r-1) excess factor: the degree-(r-1) part of
/// c(E)(H1) / (1 - (H2 - H1)).
pub fn excess_factor(ctx: &RingCtx, spec: &BundleSpec) -> TruncPoly {
    spec.validate();
    let r = spec.rank() as u32;
    let c = total_chern(ctx, spec, 0);
    let g = geometric_inverse(&TruncPoly::linear(ctx, &[rat(-1), rat(1)]), r.saturating_sub(1));
    poly_mul(&c, &g).graded_part(r - 1)
}

/// Which route computes c_{n-r+1}(M).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QPath {
    /// Product of linear forms (split data only).
    Split,
    /// Chern-character route (any Calabi-Yau data).
    Grr,
}

/// The polynomial Q and derived bookkeeping.
#[derive(Clone, Debug)]
pub struct QResult {
    /// Q(H1,H2), homogeneous of degree n.
    pub q: TruncPoly,
    /// a_i = coefficient of H1^i H2^{n-i}, i = 0..n.
    pub a: Vec<Rat>,
    /// a_0 != 0.
    pub a0_nonzero: bool,
    /// a_1 != a_0.
    pub a1_ne_a0: bool,
    /// Every a_i is an integer.
    pub integral: bool,
}

impl QResult {
    /// Both coefficient conditions hold.
    pub fn diamond(&self) -> bool {
        self.a0_nonzero && self.a1_ne_a0
    }
}

/// Computes Q(H1,H2) = c_{n-r+1}(M) * excess for Calabi-Yau data
/// (c_1(E) = n + r + 1) and packages its coefficients.
pub fn compute_q(n: u32, spec: &BundleSpec, path: QPath) -> QResult {
    spec.validate();
    let r = spec.rank();
    assert!(n >= 1, "need n >= 1");
    assert!(r as u32 <= n + 1, "rank exceeds n+1");
    assert_eq!(spec.c1(), rat((n as i64) + (r as i64) + 1), "not Calabi-Yau data");
    let ctx = make_ring(vec![n, n]);
    let cm = match path {
        QPath::Split => match spec {
            BundleSpec::Split(d) => m_top_chern_split(&ctx, d),
            BundleSpec::ChernClasses(_) => panic!("split path needs split data"),
        },
        QPath::Grr => m_top_chern_grr(n, spec),
    };
    let q = poly_mul(&cm, &excess_factor(&ctx, spec));
    assert!(q.is_homogeneous(n), "Q must be homogeneous of degree n");
    let a: Vec<Rat> = (0..=n).map(|i| q.coeff(&[i, n - i])).collect();
    let a0_nonzero = !a[0].is_zero();
    let a1_ne_a0 = n >= 1 && a[1] != a[0];
    let integral = a.iter().all(crate::ring::is_integer);
    QResult { q, a, a0_nonzero, a1_ne_a0, integral }
}

/// prod_i (d_i - 1)!, the closed form of a_0.
pub fn a0_closed_form(degrees: &[u32]) -> Rat {
    degrees.iter().map(|&d| factorial(d - 1)).fold(rat(1), |s, x| s * x)
}

/// Closed form of a_1: prod (d_i-1)! * (sum_i sum_{j=1}^{d_i-2} j/(d_i-j)
/// + (n+2)), where the (n+2) term is the excess-factor contribution and is
/// present only for r >= 2.
pub fn a1_closed_form(n: u32, degrees: &[u32]) -> Rat {
    let mut inner = Rat::zero();
    for &d in degrees {
        for j in 1..=d.saturating_sub(2) {
            inner += crate::ring::ratio(j as i64, (d - j) as i64);
        }
    }
    if degrees.len() >= 2 {
        inner += rat(n as i64 + 2);
    }
    a0_closed_form(degrees) * inner
}

/// deg X = integral of c_r(E) against H^n: prod d_i for split data, the top
/// Chern coefficient gamma_r otherwise.
pub fn degree_of_x(spec: &BundleSpec) -> Rat {
    spec.validate();
    match spec {
        BundleSpec::Split(d) => d.iter().map(|&x| rat(x as i64)).fold(rat(1), |s, x| s * x),
        BundleSpec::ChernClasses(g) => g.last().expect("nonempty").clone(),
    }
}

/// All split Calabi-Yau degree tuples (weakly decreasing, entries >= 2)
/// with sum n + r + 1, for the given n and r.
pub fn split_cy_tuples(n: u32, r: usize) -> Vec<Vec<u32>> {
    let total = n + r as u32 + 1;
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rem: u32, parts: usize, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let hi = max.min(rem.saturating_sub(2 * (parts as u32 - 1)));
        for d in (2..=hi).rev() {
            cur.push(d);
            rec(rem - d, parts - 1, d, cur, out);
            cur.pop();
        }
    }
    rec(total, r, total, &mut cur, &mut out);
    out
}
