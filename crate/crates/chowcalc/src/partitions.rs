//! Set partitions of {1..r} with a fixed number of blocks.
//!
//! A partition into s blocks is stored as its restricted-growth string: the
//! canonical representative of the block-labelling map {1..r} -> {1..s}
//! that numbers blocks by first appearance. Such a partition induces a
//! diagonal-type morphism Y^s -> Y^r, (y_1..y_s) |-> (y_{map(1)},...,
//! y_{map(r)}); composition and the additive pullback on exponent tuples
//! below are exactly composition and pullback of those morphisms.

use crate::ring::{factorial, rat, Rat};
use num_traits::Zero;

/// A partition of {1..r} into s labelled-by-first-appearance blocks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionMap {
    /// map[i] = 0-based block index of slot i+1; a restricted-growth string.
    map: Vec<u8>,
    blocks: u8,
}

impl PartitionMap {
    /// Builds a partition from any block-labelling map by renumbering blocks
    /// in order of first appearance.
    pub fn from_labels(labels: &[u8]) -> Self {
        assert!(!labels.is_empty(), "empty ground set");
        let mut relabel: Vec<Option<u8>> = vec![None; labels.len()];
        let mut next = 0u8;
        let mut map = Vec::with_capacity(labels.len());
        for &l in labels {
            let slot = relabel[l as usize].unwrap_or_else(|| {
                let id = next;
                relabel[l as usize] = Some(id);
                next += 1;
                id
            });
            relabel[l as usize] = Some(slot);
            map.push(slot);
        }
        PartitionMap { map, blocks: next }
    }

    /// Builds a partition from explicit blocks (1-based members, disjoint,
    /// covering 1..r).
    pub fn from_blocks(r: usize, blocks: &[Vec<usize>]) -> Self {
        let mut labels = vec![u8::MAX; r];
        for (id, block) in blocks.iter().enumerate() {
            for &m in block {
                assert!(
                    (1..=r).contains(&m) && labels[m - 1] == u8::MAX,
                    "blocks must partition 1..{r}"
                );
                labels[m - 1] = id as u8;
            }
        }
        assert!(labels.iter().all(|&l| l != u8::MAX), "blocks must cover 1..{r}");
        Self::from_labels(&labels)
    }

    /// The identity partition (all singletons) of {1..r}.
    pub fn identity(r: usize) -> Self {
        Self::from_labels(&(0..r as u8).collect::<Vec<_>>())
    }

    /// Ground-set size r.
    pub fn ground(&self) -> usize {
        self.map.len()
    }

    /// Number of blocks s.
    pub fn num_blocks(&self) -> usize {
        self.blocks as usize
    }

    /// 0-based block index of 1-based slot i.
    pub fn block_of(&self, i: usize) -> usize {
        self.map[i - 1] as usize
    }

    /// The restricted-growth string (0-based block index per slot).
    pub fn labels(&self) -> &[u8] {
        &self.map
    }

    /// Blocks as sorted lists of 1-based members, ordered by first element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks as usize];
        for (i, &b) in self.map.iter().enumerate() {
            out[b as usize].push(i + 1);
        }
        out
    }

    /// Composition: the partition of {1..r} obtained by merging this
    /// partition's blocks according to `other` (a partition of the block
    /// set {1..s}). Matches composition of the induced morphisms:
    /// the result's morphism Y^t -> Y^r is self's after other's.
    pub fn compose(&self, other: &PartitionMap) -> PartitionMap {
        assert_eq!(
            other.ground(),
            self.num_blocks(),
            "composition needs a partition of the block set"
        );
        let labels: Vec<u8> = self.map.iter().map(|&b| other.map[b as usize]).collect();
        Self::from_labels(&labels)
    }

    /// Pullback of an exponent tuple along the induced morphism: entry j of
    /// the result sums the entries of `a` over block j.
    pub fn pull_tuple(&self, a: &[u32]) -> Vec<u32> {
        assert_eq!(a.len(), self.ground(), "tuple arity mismatch");
        let mut out = vec![0u32; self.blocks as usize];
        for (i, &b) in self.map.iter().enumerate() {
            out[b as usize] += a[i];
        }
        out
    }

    /// 1-based slots that form singleton blocks.
    pub fn isolated(&self) -> Vec<usize> {
        let mut count = vec![0usize; self.blocks as usize];
        for &b in &self.map {
            count[b as usize] += 1;
        }
        (1..=self.ground()).filter(|&i| count[self.map[i - 1] as usize] == 1).collect()
    }
}

/// All partitions of {1..r} into exactly s blocks, in lexicographic
/// restricted-growth-string order.
pub fn enumerate(r: usize, s: usize) -> Vec<PartitionMap> {
    assert!(r >= 1 && s >= 1, "need r, s >= 1");
    let mut out = Vec::new();
    if s > r {
        return out;
    }
    let mut cur = vec![0u8; r];
    fn rec(cur: &mut Vec<u8>, pos: usize, used: u8, s: u8, out: &mut Vec<PartitionMap>) {
        let r = cur.len();
        if pos == r {
            if used == s {
                out.push(PartitionMap { map: cur.clone(), blocks: s });
            }
            return;
        }
        // Remaining slots must be able to introduce the missing blocks.
        let remaining = (r - pos) as u8;
        if s.saturating_sub(used) > remaining {
            return;
        }
        let top = if used < s { used } else { used - 1 };
        for b in 0..=top {
            cur[pos] = b;
            rec(cur, pos + 1, used.max(b + 1), s, out);
        }
    }
    rec(&mut cur, 0, 0, s as u8, &mut out);
    out
}

/// Number of partitions of {1..r} into s blocks (Stirling number of the
/// second kind), by the standard recurrence.
pub fn stirling2(r: usize, s: usize) -> Rat {
    if r == 0 && s == 0 {
        return rat(1);
    }
    if r == 0 || s == 0 || s > r {
        return Rat::zero();
    }
    let mut row = vec![Rat::zero(); s + 1];
    row[0] = rat(1); // S(0,0)
    for n in 1..=r {
        let mut next = vec![Rat::zero(); s + 1];
        for k in 1..=s.min(n) {
            next[k] = rat(k as i64) * &row[k] + &row[k - 1];
        }
        row = next;
    }
    row[s].clone()
}

/// Number of surjections {1..m} -> {1..j}: j! * stirling2(m, j).
pub fn surjections(m: usize, j: usize) -> Rat {
    factorial(j as u32) * stirling2(m, j)
}

/// sum_{j=1}^{m} (-1)^j (j-1)! * #{partitions of {1..m} into j blocks}.
/// Vanishes for every m >= 2; equals -1 at m = 1.
pub fn identity_sum(m: usize) -> Rat {
    let mut acc = Rat::zero();
    for j in 1..=m {
        let sign = if j % 2 == 0 { rat(1) } else { rat(-1) };
        acc += sign * factorial(j as u32 - 1) * stirling2(m, j);
    }
    acc
}

/// Number of partitions of {1..r} into s blocks in which slot 1 is
/// isolated; equals stirling2(r-1, s-1).
pub fn count_with_isolated(r: usize, s: usize) -> Rat {
    assert!(r >= 1 && s >= 1, "need r, s >= 1");
    stirling2(r - 1, s - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_small_counts_and_strings() {
        let n32 = enumerate(3, 2);
        let strings: Vec<Vec<u8>> = n32.iter().map(|p| p.labels().to_vec()).collect();
        assert_eq!(strings, vec![vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1]]);
        assert_eq!(enumerate(5, 3).len(), 25);
        let nrr = enumerate(4, 4);
        assert_eq!(nrr.len(), 1);
        assert_eq!(nrr[0], PartitionMap::identity(4));
    }

    #[test]
    fn enumerate_matches_stirling_counts() {
        for r in 1..=8 {
            for s in 1..=r {
                assert_eq!(rat(enumerate(r, s).len() as i64), stirling2(r, s), "r={r} s={s}");
            }
        }
    }

    #[test]
    fn from_blocks_canonical_labels() {
        // ({1,3};{4};{2,5}): minimal representative 1,2,1,3,2.
        let p = PartitionMap::from_blocks(5, &[vec![1, 3], vec![4], vec![2, 5]]);
        assert_eq!(p.labels(), &[0, 1, 0, 2, 1]);
        assert_eq!(p.blocks(), vec![vec![1, 3], vec![2, 5], vec![4]]);
    }

    #[test]
    fn compose_merges_blocks_via_minimal_representatives() {
        // ({1,3};{4};{2,5}) composed with ({1,3};{2}) on the block set:
        // composite labelling i -> other(self(i)) = (1,2,1,1,2), i.e. blocks
        // {1,3,4} and {2,5}, with induced morphism
        // (y1,y2) -> (y1,y2,y1,y1,y2).
        let p = PartitionMap::from_blocks(5, &[vec![1, 3], vec![4], vec![2, 5]]);
        let q = PartitionMap::from_blocks(3, &[vec![1, 3], vec![2]]);
        let c = p.compose(&q);
        assert_eq!(c.blocks(), vec![vec![1, 3, 4], vec![2, 5]]);
        assert_eq!(c.labels(), &[0, 1, 0, 0, 1]);
    }

    #[test]
    fn compose_with_identity_is_identity() {
        for p in enumerate(5, 3) {
            assert_eq!(p.compose(&PartitionMap::identity(3)), p);
            assert_eq!(PartitionMap::identity(5).compose(&p), p);
        }
    }

    #[test]
    fn compose_is_associative() {
        for p in enumerate(5, 3) {
            for q in enumerate(3, 2) {
                for r in enumerate(2, 1) {
                    assert_eq!(p.compose(&q).compose(&r), p.compose(&q.compose(&r)));
                }
            }
        }
    }

    #[test]
    fn pull_tuple_sums_blocks() {
        let p = PartitionMap::from_blocks(5, &[vec![1, 3], vec![4], vec![2, 5]]);
        // Block order by first element: {1,3}, {2,5}, {4}.
        assert_eq!(p.pull_tuple(&[10, 20, 1, 2, 3]), vec![11, 23, 2]);
        assert_eq!(PartitionMap::identity(4).pull_tuple(&[1, 2, 3, 4]), vec![1, 2, 3, 4]);
    }

    #[test]
    fn pull_tuple_is_functorial() {
        let a = [3u32, 1, 4, 1, 5];
        for p in enumerate(5, 3) {
            for q in enumerate(3, 2) {
                let lhs = p.compose(&q).pull_tuple(&a);
                let rhs = q.pull_tuple(&p.pull_tuple(&a));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn isolated_slots() {
        let p = PartitionMap::from_blocks(6, &[vec![1, 3], vec![2, 5], vec![4], vec![6]]);
        assert_eq!(p.isolated(), vec![4, 6]);
        assert_eq!(PartitionMap::identity(3).isolated(), vec![1, 2, 3]);
        let all = PartitionMap::from_blocks(3, &[vec![1, 2, 3]]);
        assert!(all.isolated().is_empty());
    }

    #[test]
    fn surjection_counts() {
        assert_eq!(surjections(3, 2), rat(6));
        assert_eq!(surjections(4, 1), rat(1));
        assert_eq!(surjections(4, 4), rat(24));
        assert_eq!(surjections(2, 3), rat(0));
    }

    #[test]
    fn identity_sum_values() {
        assert_eq!(identity_sum(1), rat(-1));
        for m in 2..=12 {
            assert_eq!(identity_sum(m), rat(0), "m={m}");
        }
    }

    #[test]
    fn count_with_isolated_matches_brute_force() {
        for r in 2..=8 {
            for s in 1..=r {
                let brute =
                    enumerate(r, s).into_iter().filter(|p| p.isolated().contains(&1)).count();
                assert_eq!(rat(brute as i64), count_with_isolated(r, s), "r={r} s={s}");
            }
        }
    }

    #[test]
    fn count_with_isolated_examples() {
        assert_eq!(count_with_isolated(4, 2), rat(1));
        assert_eq!(count_with_isolated(4, 3), rat(3));
        assert_eq!(count_with_isolated(5, 2), rat(1));
    }
}
