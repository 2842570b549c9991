//! Integer combinatorics over compositions, multiset orbits and the
//! symmetric group.
//!
//! A [`Composition`] `[k_0, …, k_{d-1}]` of `n` labels one Dicke state; its
//! orbit is the set of `n`-tuples over `{0, …, d-1}` in which symbol `j`
//! appears exactly `k_j` times. Permutations are 0-based; cycles print
//! 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Size caps for dense constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_n: usize,
    pub max_d: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_n: 8, max_d: 6 }
    }
}

impl Limits {
    pub fn check(&self, d: usize, n: usize) -> Result<()> {
        if d == 0 || n == 0 {
            return Err(Error::invalid(format!("need d >= 1 and n >= 1, got d = {d}, n = {n}")));
        }
        if n > self.max_n || d > self.max_d {
            return Err(Error::size(format!(
                "d = {d}, n = {n} exceeds caps d <= {}, n <= {}",
                self.max_d, self.max_n
            )));
        }
        Ok(())
    }
}

/// `d^n`, checked.
/// Largest `d^n` for which dense operators are built.
pub const MAX_DENSE_DIM: usize = 4096;

/// `d^n` after checking the default caps and [`MAX_DENSE_DIM`].
pub fn dense_dim(d: usize, n: usize) -> Result<usize> {
    Limits::default().check(d, n)?;
    let dim = hilbert_dim(d, n)?;
    if dim > MAX_DENSE_DIM {
        return Err(Error::size(format!(
            "dense operators on {d}^{n} = {dim} dimensions exceed {MAX_DENSE_DIM}"
        )));
    }
    Ok(dim)
}

pub fn hilbert_dim(d: usize, n: usize) -> Result<usize> {
    u32::try_from(n)
        .ok()
        .and_then(|e| d.checked_pow(e))
        .ok_or_else(|| Error::size(format!("{d}^{n} overflows")))
}

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    u64::try_from(acc).ok()
}

/// Dimension of the symmetric sector, `binomial(n + d - 1, d - 1)`.
pub fn symmetric_dim(d: usize, n: usize) -> Result<usize> {
    let b = binomial((n + d - 1) as u64, (d - 1) as u64)
        .ok_or_else(|| Error::size(format!("binomial({}, {}) overflows", n + d - 1, d - 1)))?;
    usize::try_from(b).map_err(|_| Error::size("symmetric dimension overflows usize"))
}

/// Element of `Δ_{d,n}`: how many times each of the `d` symbols occurs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Composition {
    counts: Vec<usize>,
}

impl Composition {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("composition needs at least one part"));
        }
        if counts.iter().sum::<usize>() == 0 {
            return Err(Error::invalid("composition must sum to n >= 1"));
        }
        Ok(Self { counts })
    }

    /// Checks that the composition lives in `Δ_{d,n}`.
    pub fn expect_shape(&self, d: usize, n: usize) -> Result<()> {
        if self.d() != d || self.n() != n {
            return Err(Error::invalid(format!(
                "composition {self} has d = {}, n = {}, expected d = {d}, n = {n}",
                self.d(),
                self.n()
            )));
        }
        Ok(())
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn d(&self) -> usize {
        self.counts.len()
    }

    /// Symbol counts of a tuple over `{0, …, d-1}`.
    pub fn of_tuple(tuple: &[usize], d: usize) -> Result<Self> {
        let mut counts = vec![0; d];
        for &j in tuple {
            *counts
                .get_mut(j)
                .ok_or_else(|| Error::invalid(format!("symbol {j} out of range for d = {d}")))? += 1;
        }
        Self::new(counts)
    }
}

impl TryFrom<Vec<usize>> for Composition {
    type Error = Error;

    fn try_from(counts: Vec<usize>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<Composition> for Vec<usize> {
    fn from(k: Composition) -> Self {
        k.counts
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// All compositions of `n` into `d` parts, starting from `[n, 0, …, 0]` and
/// descending lexicographically down to `[0, …, 0, n]`.
pub fn enumerate_compositions(d: usize, n: usize) -> Result<Vec<Composition>> {
    if d == 0 || n == 0 {
        return Err(Error::invalid(format!("need d >= 1 and n >= 1, got d = {d}, n = {n}")));
    }
    let total = symmetric_dim(d, n)?;
    let mut out = Vec::with_capacity(total);
    let mut counts = vec![0; d];
    fill_compositions(&mut counts, 0, n, &mut out);
    debug_assert_eq!(out.len(), total);
    Ok(out)
}

/// Count vectors of length `d` summing to `total` (zero allowed), in the
/// same descending order as [`enumerate_compositions`].
pub(crate) fn count_vectors(d: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut counts = vec![0; d];
    fill_compositions(&mut counts, 0, total, &mut out);
    out.into_iter().map(|k| k.counts).collect()
}

fn fill_compositions(counts: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<Composition>) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        out.push(Composition {
            counts: counts.to_vec(),
        });
        return;
    }
    for k in (0..=remaining).rev() {
        counts[pos] = k;
        fill_compositions(counts, pos + 1, remaining - k, out);
    }
    counts[pos] = 0;
}

/// `n! / (k_0! ⋯ k_{d-1}!)`, the size of the orbit of `k`.
pub fn multinomial(k: &Composition) -> Result<u64> {
    let mut acc: u64 = 1;
    let mut seen: u64 = 0;
    for &c in k.counts() {
        seen += c as u64;
        let b = binomial(seen, c as u64).ok_or_else(|| Error::size(format!("multinomial of {k} overflows")))?;
        acc = acc
            .checked_mul(b)
            .ok_or_else(|| Error::size(format!("multinomial of {k} overflows")))?;
    }
    Ok(acc)
}

/// Every distinct `n`-tuple with symbol counts `k`, in ascending
/// lexicographic order.
pub fn multiset_orbit(k: &Composition) -> Result<Vec<Vec<usize>>> {
    let size = usize::try_from(multinomial(k)?).map_err(|_| Error::size("orbit too large"))?;
    let mut current: Vec<usize> = k
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j, c))
        .collect();
    let mut out = Vec::with_capacity(size);
    loop {
        out.push(current.clone());
        if !next_permutation(&mut current) {
            break;
        }
    }
    debug_assert_eq!(out.len(), size);
    Ok(out)
}

/// Advances to the next lexicographic arrangement; `false` once the slice
/// is in descending order.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Bijection of `{0, …, n-1}`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("{image:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    /// Builds a permutation of `n` points from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[Cycle]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for c in cycles {
            let e = c.elements();
            for (pos, &a) in e.iter().enumerate() {
                if a >= n || std::mem::replace(&mut touched[a], true) {
                    return Err(Error::invalid(format!("cycles are not disjoint subsets of 0..{n}")));
                }
                image[a] = e[(pos + 1) % e.len()];
            }
        }
        Self::new(image)
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    /// `self ∘ other`, i.e. `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "composing permutations of different degree");
        Permutation {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { image: inv }
    }

    /// Cycle lengths in descending order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = cycle_decomposition(self).iter().map(Cycle::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(image: Vec<usize>) -> Result<Self> {
        Self::new(image)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.image
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let moved: Vec<Cycle> = cycle_decomposition(self).into_iter().filter(|c| c.len() > 1).collect();
        if moved.is_empty() {
            return write!(f, "1");
        }
        for c in moved {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// All `n!` permutations in lexicographic order of their image lists.
pub fn enumerate_permutations(n: usize) -> Result<Vec<Permutation>> {
    enumerate_permutations_capped(n, Limits::default().max_n)
}

pub fn enumerate_permutations_capped(n: usize, cap: usize) -> Result<Vec<Permutation>> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    if n > cap {
        return Err(Error::size(format!("n = {n} exceeds the permutation cap {cap}")));
    }
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity((1..=n).product());
    loop {
        out.push(Permutation { image: current.clone() });
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok(out)
}

/// Cycle `(a_0 a_1 … a_{L-1})` meaning `a_i ↦ a_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cycle {
    elements: Vec<usize>,
}

impl Cycle {
    pub fn new(elements: Vec<usize>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("empty cycle"));
        }
        let mut sorted = elements.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("cycle {elements:?} repeats an element")));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", e + 1)?;
        }
        write!(f, ")")
    }
}

/// Disjoint cycles covering every point (fixed points included as
/// 1-cycles). Each cycle starts at its smallest element and cycles are
/// ordered by that element.
pub fn cycle_decomposition(p: &Permutation) -> Vec<Cycle> {
    let n = p.len();
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut elements = Vec::new();
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            elements.push(i);
            i = p.apply(i);
        }
        cycles.push(Cycle { elements });
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn comp(v: &[usize]) -> Composition {
        Composition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn composition_counts_and_order() {
        assert_eq!(enumerate_compositions(3, 3).unwrap().len(), 10);
        assert_eq!(enumerate_compositions(1, 5).unwrap(), vec![comp(&[5])]);
        let got: Vec<Vec<usize>> = enumerate_compositions(2, 4)
            .unwrap()
            .into_iter()
            .map(Vec::from)
            .collect();
        assert_eq!(got, vec![vec![4, 0], vec![3, 1], vec![2, 2], vec![1, 3], vec![0, 4]]);
    }

    #[test]
    fn composition_sizes_match_binomial() {
        for d in 1..=6 {
            for n in 1..=6 {
                let ks = enumerate_compositions(d, n).unwrap();
                assert_eq!(ks.len() as u64, binomial((n + d - 1) as u64, (d - 1) as u64).unwrap());
                assert!(ks.iter().all(|k| k.n() == n && k.d() == d));
                let total: u64 = ks.iter().map(|k| multinomial(k).unwrap()).sum();
                assert_eq!(total, (d as u64).pow(n as u32), "orbits partition d^n for d={d} n={n}");
            }
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(&comp(&[1, 0, 3])).unwrap(), 4);
        assert_eq!(multinomial(&comp(&[6, 0, 0])).unwrap(), 1);
        assert_eq!(multinomial(&comp(&[1, 1, 1])).unwrap(), 6);
    }

    #[test]
    fn multinomial_overflow_is_a_size_error() {
        let k = comp(&[20; 6]);
        assert!(matches!(multinomial(&k), Err(Error::Size(_))));
    }

    #[test]
    fn orbit_examples() {
        let orbit = multiset_orbit(&comp(&[1, 0, 3])).unwrap();
        assert_eq!(orbit.len(), 4);
        assert!(orbit.contains(&vec![0, 2, 2, 2]));
        assert!(orbit.contains(&vec![2, 0, 2, 2]));
        assert_eq!(multiset_orbit(&comp(&[3, 0])).unwrap(), vec![vec![0, 0, 0]]);
        assert_eq!(
            multiset_orbit(&comp(&[1, 2])).unwrap(),
            vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]
        );
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(enumerate_permutations(3).unwrap().len(), 6);
        assert_eq!(enumerate_permutations(4).unwrap().len(), 24);
        assert_eq!(enumerate_permutations(1).unwrap(), vec![Permutation::identity(1)]);
        assert!(matches!(enumerate_permutations(9), Err(Error::Size(_))));
        assert_eq!(enumerate_permutations_capped(9, 9).unwrap().len(), 362_880);
    }

    #[test]
    fn invalid_permutations_rejected() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Cycle::new(vec![1, 2, 1]).is_err());
    }

    #[test]
    fn cycle_examples() {
        let id = cycle_decomposition(&Permutation::identity(4));
        assert_eq!(id.len(), 4);
        assert!(id.iter().all(|c| c.len() == 1));

        // (1 2)(3 4) in 1-based notation
        let dt = Permutation::new(vec![1, 0, 3, 2]).unwrap();
        let cs = cycle_decomposition(&dt);
        assert_eq!(
            cs.iter().map(Cycle::elements).collect::<Vec<_>>(),
            vec![&[0, 1][..], &[2, 3][..]]
        );
        assert_eq!(dt.to_string(), "(1 2)(3 4)");

        let four = cycle_decomposition(&Permutation::new(vec![1, 2, 3, 0]).unwrap());
        assert_eq!(four.len(), 1);
        assert_eq!(four[0].elements(), &[0, 1, 2, 3]);
    }

    #[test]
    fn s4_class_census() {
        let mut census: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for p in enumerate_permutations(4).unwrap() {
            *census.entry(p.cycle_type()).or_default() += 1;
        }
        assert_eq!(census[&vec![1, 1, 1, 1]], 1);
        assert_eq!(census[&vec![2, 1, 1]], 6);
        assert_eq!(census[&vec![2, 2]], 3);
        assert_eq!(census[&vec![3, 1]], 8);
        assert_eq!(census[&vec![4]], 6);
    }

    #[test]
    fn cycles_recompose() {
        for n in 1..=6 {
            for p in enumerate_permutations(n).unwrap() {
                let cs = cycle_decomposition(&p);
                assert_eq!(cs.iter().map(Cycle::len).sum::<usize>(), n);
                assert!(cs.windows(2).all(|w| w[0].elements()[0] < w[1].elements()[0]));
                assert_eq!(Permutation::from_cycles(n, &cs).unwrap(), p);
            }
        }
    }

    #[test]
    fn compose_and_inverse() {
        let s = Permutation::new(vec![2, 0, 1]).unwrap();
        let t = Permutation::new(vec![1, 0, 2]).unwrap();
        let st = s.compose(&t);
        for i in 0..3 {
            assert_eq!(st.apply(i), s.apply(t.apply(i)));
        }
        assert_eq!(s.compose(&s.inverse()), Permutation::identity(3));
    }

    #[test]
    fn composition_serde_validates() {
        let k: Composition = serde_json::from_str("[1,0,2]").unwrap();
        assert_eq!(k.n(), 3);
        assert!(serde_json::from_str::<Composition>("[]").is_err());
        assert_eq!(comp(&[1, 0, 2]).to_string(), "[1,0,2]");
    }
}
