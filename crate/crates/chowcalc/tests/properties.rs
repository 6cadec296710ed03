//! Randomized structural laws. Each property states an exact algebraic
//! identity over generated inputs; shrinking hands back a minimal witness
//! whenever one fails.

use chowcalc::cli::run_from;
use chowcalc::diagonal::{from_poly, taut_ctx, DiagClass};
use chowcalc::partitions::{enumerate, stirling2, PartitionMap};
use chowcalc::ring::{make_ring, poly_mul, rat, Rat, TruncPoly};
use chowcalc::schubert::{grass, GrassElem};
use num_traits::Zero;
use proptest::prelude::*;
use std::collections::BTreeSet;

/// Assembles a polynomial over the given caps from sparse terms.
fn poly_from(caps: &[u32], terms: &[(Vec<u32>, i64)]) -> TruncPoly {
    let ring = make_ring(caps.to_vec());
    let mut p = TruncPoly::zero(&ring);
    for (e, c) in terms {
        p = p.add(&TruncPoly::monomial(&ring, e.clone(), rat(*c)));
    }
    p
}

/// Sparse term lists with exponents within the caps and small coefficients.
fn terms_in(caps: Vec<u32>, max_terms: usize) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    let exps: Vec<std::ops::RangeInclusive<u32>> = caps.iter().map(|&c| 0..=c).collect();
    prop::collection::vec((exps, -4i64..=4), 0..=max_terms)
}

/// Random classes on X^r built from polynomial pieces pushed along random
/// partitions, left unnormalized on purpose.
fn raw_class(n: u32, d: u32, r: usize) -> impl Strategy<Value = DiagClass> {
    let piece = (1..=r, any::<prop::sample::Index>(), terms_in(vec![n; r], 3)).prop_map(
        move |(s, idx, terms)| {
            let parts = enumerate(r, s);
            let alpha = idx.get(&parts);
            let cut: Vec<(Vec<u32>, i64)> = terms.iter().map(|(e, c)| (e[..s].to_vec(), *c)).collect();
            from_poly(taut_ctx(n, d, s), &poly_from(&vec![n; s], &cut)).push_diag_raw(alpha)
        },
    );
    prop::collection::vec(piece, 1..=3).prop_map(move |pieces| {
        let mut acc = DiagClass::zero(taut_ctx(n, d, r));
        for p in &pieces {
            acc = acc.add(p);
        }
        acc
    })
}

/// Random (n, d, class on X^r) with d >= n + 2 never required here; the
/// rewrite calculus is uniform in d.
fn nd_class(r: usize) -> impl Strategy<Value = (u32, u32, DiagClass)> {
    (1u32..=3, 2u32..=5)
        .prop_flat_map(move |(n, d)| raw_class(n, d, r).prop_map(move |c| (n, d, c)))
}

proptest! {
    #[test]
    fn truncated_ring_laws(
        a in terms_in(vec![2, 3, 2], 4),
        b in terms_in(vec![2, 3, 2], 4),
        c in terms_in(vec![2, 3, 2], 4),
    ) {
        let caps = [2u32, 3, 2];
        let (p, q, s) = (poly_from(&caps, &a), poly_from(&caps, &b), poly_from(&caps, &c));
        prop_assert_eq!(p.add(&q), q.add(&p));
        prop_assert_eq!(poly_mul(&p, &q), poly_mul(&q, &p));
        prop_assert_eq!(poly_mul(&poly_mul(&p, &q), &s), poly_mul(&p, &poly_mul(&q, &s)));
        prop_assert_eq!(poly_mul(&p, &q.add(&s)), poly_mul(&p, &q).add(&poly_mul(&p, &s)));
        prop_assert_eq!(poly_mul(&p, &TruncPoly::one(&make_ring(caps.to_vec()))), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn normal_form_laws((_n, _d, class) in nd_class(3)) {
        let nf = class.normalize();
        prop_assert!(nf.is_normal());
        prop_assert_eq!(nf.normalize(), nf.clone());
        prop_assert_eq!(class.integrate(), nf.integrate());
    }

    #[test]
    fn classification_roundtrip((_n, _d, class) in nd_class(3)) {
        let nf = class.normalize();
        let cl = nf.classify();
        prop_assert_eq!(cl.reassemble(), nf);
    }

    #[test]
    fn pushforward_laws(
        (_n, _d, class) in nd_class(2),
        idx in any::<prop::sample::Index>(),
    ) {
        let parts = enumerate(4, 2);
        let alpha = idx.get(&parts);
        prop_assert_eq!(class.push_diag_raw(alpha).integrate(), class.integrate());
        prop_assert_eq!(class.push_diag(alpha), class.normalize().push_diag(alpha));
    }

    #[test]
    fn pushforward_functoriality(
        (_n, _d, class) in nd_class(2),
        i_beta in any::<prop::sample::Index>(),
        i_alpha in any::<prop::sample::Index>(),
    ) {
        let betas = enumerate(3, 2);
        let alphas = enumerate(5, 3);
        let beta = i_beta.get(&betas);
        let alpha = i_alpha.get(&alphas);
        let chained = class.push_diag_raw(beta).push_diag_raw(alpha);
        prop_assert_eq!(chained, class.push_diag_raw(&alpha.compose(beta)));
    }
}

proptest! {
    #[test]
    fn partition_counting_laws(r in 1usize..=7, tuple in prop::collection::vec(0u32..=6, 7)) {
        let mut total = 0usize;
        for s in 1..=r {
            let parts = enumerate(r, s);
            prop_assert_eq!(rat(parts.len() as i64), stirling2(r, s));
            let distinct: BTreeSet<Vec<u8>> = parts.iter().map(|p| p.labels().to_vec()).collect();
            prop_assert_eq!(distinct.len(), parts.len());
            for p in &parts {
                let pulled = p.pull_tuple(&tuple[..r]);
                prop_assert_eq!(pulled.len(), s);
                prop_assert_eq!(pulled.iter().sum::<u32>(), tuple[..r].iter().sum::<u32>());
            }
            total += parts.len();
        }
        let bell: Rat = (1..=r).map(|s| stirling2(r, s)).sum();
        prop_assert_eq!(rat(total as i64), bell);
    }

    #[test]
    fn partition_composition_associates(
        ia in any::<prop::sample::Index>(),
        ib in any::<prop::sample::Index>(),
        ic in any::<prop::sample::Index>(),
    ) {
        let top = enumerate(5, 3);
        let mid = enumerate(3, 2);
        let low = enumerate(2, 1);
        let a = ia.get(&top);
        let b = ib.get(&mid);
        let c = ic.get(&low);
        prop_assert_eq!(a.compose(b).compose(c), a.compose(&b.compose(c)));
        let id_top = PartitionMap::identity(5);
        prop_assert_eq!(id_top.compose(a), a.clone());
        prop_assert_eq!(a.compose(&PartitionMap::identity(3)), a.clone());
    }

    #[test]
    fn stirling_recurrence(r in 2usize..=10, s in 1usize..=10) {
        prop_assume!(s <= r);
        let want = rat(s as i64) * stirling2(r - 1, s) + stirling2(r - 1, s - 1);
        prop_assert_eq!(stirling2(r, s), want);
    }

    #[test]
    fn schubert_duality_pairing(nn in 4u32..=8, x in 0u32..=6, y in 0u32..=6) {
        let g = grass(nn);
        let max = g.max_part();
        let (a, b) = ((x % (max + 1)).max(y % (max + 1)), (x % (max + 1)).min(y % (max + 1)));
        let base = GrassElem::sigma(g, a, b);
        let c = 2 * max - a - b;
        let lo = c.div_ceil(2);
        for e in lo..=max.min(c) {
            let f = c - e;
            let pairing = base.mul(&GrassElem::sigma(g, e, f)).integrate();
            let dual = e == max - b && f == max - a;
            prop_assert_eq!(pairing, if dual { rat(1) } else { Rat::zero() });
        }
    }

    #[test]
    fn schubert_product_commutes(nn in 4u32..=7, x in 0u32..=5, y in 0u32..=5, k in -3i64..=3) {
        let g = grass(nn);
        let max = g.max_part();
        let (a, b) = ((x % (max + 1)).max(y % (max + 1)), (x % (max + 1)).min(y % (max + 1)));
        let u = GrassElem::sigma(g, a, b).add(&GrassElem::special(g, 1).scale(&rat(k)));
        let v = GrassElem::special(g, 2).add(&GrassElem::sigma(g, max, max));
        prop_assert_eq!(u.mul(&v), v.mul(&u));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn cli_partitions_deterministic_json(r in 1u32..=6, s in 1u32..=6) {
        prop_assume!(s <= r);
        let args = [
            "chowcalc".to_string(),
            "partitions".to_string(),
            "-r".to_string(),
            r.to_string(),
            "-s".to_string(),
            s.to_string(),
            "--output".to_string(),
            "json".to_string(),
        ];
        let (code_a, out_a) = run_from(args.clone());
        let (code_b, out_b) = run_from(args);
        prop_assert_eq!(code_a, 0);
        prop_assert_eq!(code_b, 0);
        prop_assert_eq!(&out_a, &out_b);
        let parsed: serde_json::Value = serde_json::from_str(&out_a).unwrap();
        let reprinted = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
        prop_assert_eq!(out_a, reprinted);
    }
}
