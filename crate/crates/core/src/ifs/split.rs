use serde::Serialize;

use super::CantorIfs;
use crate::error::{Error, Result};

/// Long/short letters of `K`, each halved into a perturbed part (index 1)
/// and a fixed part (index 2). Entries are label indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlphabetSplit {
    pub long1: Vec<usize>,
    pub long2: Vec<usize>,
    pub short1: Vec<usize>,
    pub short2: Vec<usize>,
}

impl AlphabetSplit {
    pub fn long(&self) -> Vec<usize> {
        sorted(self.long1.iter().chain(&self.long2))
    }

    pub fn short(&self) -> Vec<usize> {
        sorted(self.short1.iter().chain(&self.short2))
    }

    /// Letters that receive a perturbation.
    pub fn a1(&self) -> Vec<usize> {
        sorted(self.long1.iter().chain(&self.short1))
    }

    /// Letters kept unchanged.
    pub fn a2(&self) -> Vec<usize> {
        sorted(self.long2.iter().chain(&self.short2))
    }

    pub fn in_a1(&self, label: usize) -> bool {
        self.long1.contains(&label) || self.short1.contains(&label)
    }

    pub fn labels(&self, ifs: &CantorIfs, part: &[usize]) -> Vec<String> {
        part.iter().map(|&a| ifs.labels()[a].clone()).collect()
    }
}

fn sorted<'a>(it: impl Iterator<Item = &'a usize>) -> Vec<usize> {
    let mut v: Vec<usize> = it.copied().collect();
    v.sort_unstable();
    v
}

/// Longest first, ties by label order, dealt alternately into two halves.
fn deal(ifs: &CantorIfs, mut part: Vec<usize>) -> (Vec<usize>, Vec<usize>) {
    part.sort_by(|&a, &b| ifs.ratio(b).total_cmp(&ifs.ratio(a)).then(a.cmp(&b)));
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (i, a) in part.into_iter().enumerate() {
        if i % 2 == 0 {
            first.push(a);
        } else {
            second.push(a);
        }
    }
    first.sort_unstable();
    second.sort_unstable();
    (first, second)
}

/// Split `K`'s letters into those strictly longer than every letter of
/// `K'` and those strictly shorter than every letter of `K'`.
pub fn split_alphabet(k: &CantorIfs, k_prime: &CantorIfs) -> Result<AlphabetSplit> {
    let max_p = k_prime.max_ratio();
    let min_p = k_prime.min_ratio();
    let long: Vec<usize> = (0..k.len()).filter(|&a| k.ratio(a) > max_p).collect();
    let short: Vec<usize> = (0..k.len()).filter(|&a| k.ratio(a) < min_p).collect();
    let bound = k.len() as f64 / 3.0;
    if long.len() as f64 <= bound || short.len() as f64 <= bound {
        return Err(Error::SplitInfeasible {
            reason: "not enough letters strictly longer and strictly shorter than all letters of K'".into(),
            long: long.len(),
            short: short.len(),
            bound,
        });
    }
    let (long1, long2) = deal(k, long);
    let (short1, short2) = deal(k, short);
    Ok(AlphabetSplit {
        long1,
        long2,
        short1,
        short2,
    })
}

/// Split a single alphabet into long and short letters at a strict length
/// gap, as balanced as possible, both sides larger than a third.
pub fn split_alphabet_self(k: &CantorIfs) -> Result<AlphabetSplit> {
    let n = k.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| k.ratio(b).total_cmp(&k.ratio(a)).then(a.cmp(&b)));
    let third = n as f64 / 3.0;
    let mut best: Option<usize> = None;
    let mut best_achievable = (0, 0);
    for cut in 1..n {
        if k.ratio(order[cut - 1]) <= k.ratio(order[cut]) {
            continue;
        }
        let (l, s) = (cut, n - cut);
        if l.min(s) > best_achievable.0.min(best_achievable.1) {
            best_achievable = (l, s);
        }
        if l as f64 > third && s as f64 > third {
            let better = match best {
                None => true,
                Some(b) => l.abs_diff(n - l) < b.abs_diff(n - b),
            };
            if better {
                best = Some(cut);
            }
        }
    }
    let cut = best.ok_or_else(|| Error::SplitInfeasible {
        reason: "no strict length gap leaves more than a third of the letters on each side".into(),
        long: best_achievable.0,
        short: best_achievable.1,
        bound: third,
    })?;
    let (long1, long2) = deal(k, order[..cut].to_vec());
    let (short1, short2) = deal(k, order[cut..].to_vec());
    Ok(AlphabetSplit {
        long1,
        long2,
        short1,
        short2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lengths(ls: &[f64]) -> CantorIfs {
        let mut pos = 0.0;
        let pairs: Vec<(f64, f64)> = ls
            .iter()
            .map(|&l| {
                let p = (l, pos);
                pos += l + 0.01;
                p
            })
            .collect();
        CantorIfs::from_pairs(&pairs)
    }

    #[test]
    fn cross_split_alternates() {
        let k = lengths(&[0.30, 0.29, 0.11, 0.10]);
        let kp = lengths(&[0.20, 0.19]);
        let s = split_alphabet(&k, &kp).unwrap();
        assert_eq!(s.long(), vec![0, 1]);
        assert_eq!(s.short(), vec![2, 3]);
        assert_eq!((s.long1.clone(), s.long2.clone()), (vec![0], vec![1]));
        assert_eq!((s.short1.clone(), s.short2.clone()), (vec![2], vec![3]));
        assert_eq!(s.a1(), vec![0, 2]);
    }

    #[test]
    fn homogeneous_pair_has_no_split() {
        let k = CantorIfs::middle_thirds();
        assert!(matches!(
            split_alphabet(&k, &k),
            Err(Error::SplitInfeasible { long: 0, short: 0, .. })
        ));
    }

    #[test]
    fn self_split_two_letters() {
        let k = lengths(&[0.3, 0.2]);
        let s = split_alphabet_self(&k).unwrap();
        assert_eq!(s.long(), vec![0]);
        assert_eq!(s.short(), vec![1]);
    }

    #[test]
    fn self_split_prefers_balance() {
        let k = lengths(&[0.1, 0.09, 0.09, 0.05, 0.05, 0.04, 0.04, 0.04]);
        let s = split_alphabet_self(&k).unwrap();
        assert_eq!(s.long(), vec![0, 1, 2]);
        let k = lengths(&[0.1, 0.1, 0.05, 0.05, 0.05, 0.02]);
        assert!(split_alphabet_self(&k).is_err());
        let k = lengths(&[0.1, 0.1, 0.1, 0.05, 0.05, 0.05]);
        let s = split_alphabet_self(&k).unwrap();
        assert_eq!(s.long(), vec![0, 1, 2]);
    }
}
